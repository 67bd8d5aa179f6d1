"""Gap analytics between score reports: deltas, ablation curves, shaded tables.

Gap averages are always the mean of the per-benchmark deltas, computed before
any display rounding; published tables round first, which explains the odd
0.1 discrepancies when comparing against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import BENCHMARKS, ScoreReport
from .errors import CoverageError

GAP_LABELS = ("delta_long", "delta_large")

# column naming per comparison: (first side, second side)
SIDE_NAMES = {"delta_long": ("Long", "Short"), "delta_large": ("Large", "Small")}

DEFAULT_SHADE_MAX = 15.0
SHADE_BUCKETS = 5


@dataclass(frozen=True)
class GapReport:
    """Per-benchmark and average deltas between two score reports.

    ``better`` follows the sign of the average delta: ``first`` when positive,
    ``second`` when negative, ``tie`` at exactly zero. The source reports'
    per-benchmark values ride along for table rendering.
    """

    label: str
    per_benchmark_delta: Mapping[str, float]
    average_delta: float
    better: str
    first_per_benchmark: Mapping[str, float]
    second_per_benchmark: Mapping[str, float]
    first_average: float
    second_average: float

    def __post_init__(self) -> None:
        if self.label not in GAP_LABELS:
            raise ValueError(f"unknown gap label {self.label!r}")
        if self.better not in ("first", "second", "tie"):
            raise ValueError(f"unknown better value {self.better!r}")


def compute_gap(first: ScoreReport, second: ScoreReport, label: str = "delta_long") -> GapReport:
    """Per-benchmark deltas (first minus second) over the five canonical benchmarks."""
    for side, report in (("first", first), ("second", second)):
        missing = sorted(set(BENCHMARKS) - set(report.per_benchmark))
        if missing:
            raise CoverageError(f"{side} report is missing benchmarks: {missing}")
    deltas = {
        b: first.per_benchmark[b].accuracy_pct - second.per_benchmark[b].accuracy_pct
        for b in BENCHMARKS
    }
    average_delta = sum(deltas.values()) / len(BENCHMARKS)
    if average_delta > 0:
        better = "first"
    elif average_delta < 0:
        better = "second"
    else:
        better = "tie"
    return GapReport(
        label=label,
        per_benchmark_delta=deltas,
        average_delta=average_delta,
        better=better,
        first_per_benchmark={b: first.per_benchmark[b].accuracy_pct for b in BENCHMARKS},
        second_per_benchmark={b: second.per_benchmark[b].accuracy_pct for b in BENCHMARKS},
        first_average=sum(first.per_benchmark[b].accuracy_pct for b in BENCHMARKS) / len(BENCHMARKS),
        second_average=sum(second.per_benchmark[b].accuracy_pct for b in BENCHMARKS) / len(BENCHMARKS),
    )


def ablation_curve(
    points: Sequence[tuple[float, ScoreReport]],
) -> tuple[list[tuple[float, float]], float]:
    """Sorted (alpha, average) curve plus the argmax alpha, ties to the smaller."""
    if len(points) < 2:
        raise ValueError("an ablation curve needs at least 2 points")
    alphas = [alpha for alpha, _ in points]
    if len(set(alphas)) != len(alphas):
        raise ValueError("alphas must be distinct")
    for alpha, report in points:
        if not 0 <= alpha <= 1:
            raise ValueError(f"alpha {alpha} outside [0, 1]")
        if report.average_pct is None:
            raise ValueError(f"report at alpha {alpha} has no defined average")
    curve = sorted((alpha, report.average_pct) for alpha, report in points)
    best_alpha, best_avg = curve[0]
    for alpha, avg in curve[1:]:
        if avg > best_avg:
            best_alpha, best_avg = alpha, avg
    return curve, best_alpha


def shade_bucket(delta: float, max_abs: float = DEFAULT_SHADE_MAX) -> int:
    """Signed intensity bucket in [-5, 5], linear in |delta| up to ``max_abs``."""
    if delta == 0:
        return 0
    magnitude = min(abs(delta), max_abs)
    bucket = min(SHADE_BUCKETS, math.ceil(SHADE_BUCKETS * magnitude / max_abs))
    return bucket if delta > 0 else -bucket


def _fmt(value: float) -> str:
    """repr keeps exact float round-trip through CSV."""
    return repr(float(value))


def render_gap_table(
    rows: Sequence[tuple[str, GapReport]], max_abs: float = DEFAULT_SHADE_MAX
) -> tuple[str, str]:
    """Render gap rows as a shaded Markdown table and a raw-value CSV.

    The CSV (header ``model,benchmark,p_first,p_second,delta``) carries exact
    values only; shading buckets are display artifacts and never persisted.
    """
    if not rows:
        return "", "model,benchmark,p_first,p_second,delta\n"
    labels = {gap.label for _, gap in rows}
    if len(labels) > 1:
        raise ValueError(f"rows mix gap labels: {sorted(labels)}")
    first_name, second_name = SIDE_NAMES[rows[0][1].label]

    md_lines = [
        f"| Model | P_{first_name} | P_{second_name} | Δ | Better |",
        "| --- | ---: | ---: | ---: | --- |",
    ]
    for model, gap in rows:
        bucket = shade_bucket(gap.average_delta, max_abs)
        better = {"first": first_name, "second": second_name, "tie": "tie"}[gap.better]
        md_lines.append(
            f"| {model} | {gap.first_average:.1f} | {gap.second_average:.1f} "
            f"| {gap.average_delta:+.1f} [{bucket:+d}] | {better} |"
        )
    markdown = "\n".join(md_lines) + "\n"

    csv_lines = ["model,benchmark,p_first,p_second,delta"]
    for model, gap in rows:
        for bench in BENCHMARKS:
            csv_lines.append(
                f"{model},{bench},{_fmt(gap.first_per_benchmark[bench])},"
                f"{_fmt(gap.second_per_benchmark[bench])},{_fmt(gap.per_benchmark_delta[bench])}"
            )
        csv_lines.append(
            f"{model},average,{_fmt(gap.first_average)},{_fmt(gap.second_average)},"
            f"{_fmt(gap.average_delta)}"
        )
    return markdown, "\n".join(csv_lines) + "\n"
