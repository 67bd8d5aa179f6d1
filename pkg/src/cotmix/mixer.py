"""Blend two SFT datasets with a mixing weight, export trainer files, emit recipes.

Mixing assigns each problem exclusively to one source: problem ids are
shuffled once by a seeded RNG and the first ``ceil(alpha * N)`` take the
first source's response. Because the shuffled order is fixed for a given
seed, raising alpha only ever moves problems from the second source to the
first (nested-prefix property), which makes weight sweeps nested experiments.
"""

from __future__ import annotations

import json
import math
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .corpus import SFTDataset, canonical_json
from .errors import CoverageError, ParseError

MIX_MODES = ("mix_long", "mix_large")
EXPORT_FORMATS = ("alpaca", "sharegpt")

FULL_LORA_BOUNDARY_B = 14.0


@dataclass(frozen=True)
class MixSpec:
    """Mixing recipe: two source references, a weight, and a shuffle seed."""

    source_a: str
    source_b: str
    alpha: float
    seed: int
    mode: str = "mix_long"

    def __post_init__(self) -> None:
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.mode not in MIX_MODES:
            raise ValueError(f"unknown mix mode {self.mode!r}")


def take_count(alpha: float, n: int) -> int:
    """ceil(alpha * n) computed exactly for decimal alphas (0.2 * 7500 is 1500)."""
    try:
        frac = Fraction(str(alpha))
    except ValueError:
        frac = Fraction(alpha)
    return math.ceil(frac * n)


def shuffled_ids(seed: int, ids: Sequence[str]) -> list[str]:
    """Seeded shuffle over the sorted id list; independent of input order."""
    order = sorted(ids)
    random.Random(seed).shuffle(order)
    return order


def split_ids(alpha: float, seed: int, ids: Sequence[str]) -> tuple[list[str], list[str]]:
    """Partition ids into (source-a ids, source-b ids) for the given weight."""
    order = shuffled_ids(seed, ids)
    k = take_count(alpha, len(order))
    return order[:k], order[k:]


def mix(spec: MixSpec, a: SFTDataset, b: SFTDataset) -> SFTDataset:
    """Blend two datasets covering the same problems into one."""
    a_map = {ex.problem_id: ex for ex in a.examples}
    b_map = {ex.problem_id: ex for ex in b.examples}
    missing_in_b = sorted(set(a_map) - set(b_map))
    missing_in_a = sorted(set(b_map) - set(a_map))
    if missing_in_a or missing_in_b:
        raise CoverageError(
            "sources do not cover the same problems; "
            f"missing from source_a: {missing_in_a[:10]} ({len(missing_in_a)}), "
            f"missing from source_b: {missing_in_b[:10]} ({len(missing_in_b)})"
        )
    ids_a, ids_b = split_ids(spec.alpha, spec.seed, list(a_map))
    a_side = set(ids_a)
    # ids_a + ids_b is the full shuffled order, so file order follows the shuffle
    examples = [a_map[pid] if pid in a_side else b_map[pid] for pid in ids_a + ids_b]
    provenance = {
        "kind": "mix",
        "mode": spec.mode,
        "alpha": spec.alpha,
        "seed": spec.seed,
        "source_a": spec.source_a,
        "source_b": spec.source_b,
        "count_a": len(ids_a),
        "count_b": len(ids_b),
    }
    return SFTDataset.build(examples, provenance)


def export(dataset: SFTDataset, format: str, path: str | Path) -> Path:
    """Write a trainer-ready file in alpaca or sharegpt layout."""
    if format not in EXPORT_FORMATS:
        raise ValueError(f"unknown export format {format!r}")
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for ex in dataset.examples:
            if format == "alpaca":
                rec: dict[str, Any] = {
                    "instruction": ex.instruction,
                    "input": "",
                    "output": ex.output,
                }
            else:
                rec = {
                    "conversations": [
                        {"from": "human", "value": ex.instruction},
                        {"from": "gpt", "value": ex.output},
                    ]
                }
            fh.write(canonical_json(rec) + "\n")
    return path


def import_alpaca(path: str | Path) -> list[tuple[str, str]]:
    """Read back (instruction, output) pairs from an alpaca export."""
    path = Path(path)
    pairs = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                pairs.append((rec["instruction"], rec["output"]))
            except (ValueError, KeyError) as exc:
                raise ParseError(f"{path}:{line_no}: bad alpaca record: {exc}") from exc
    return pairs


def format_learning_rate(lr: float) -> str:
    """Compact exponent form: 1e-05 renders as 1e-5."""
    s = f"{lr:e}"
    mantissa, exponent = s.split("e")
    mantissa = mantissa.rstrip("0").rstrip(".")
    exp = int(exponent)
    return f"{mantissa}e{exp}" if exp < 0 else f"{float(lr):g}"


FULL_FINETUNE_RECIPE = {
    "method": "full",
    "learning_rate": 1e-5,
    "num_epochs": 2,
    "num_devices": 4,
    "per_device_batch_size": 2,
    "optimizer": "adamw",
    "lr_scheduler": "cosine",
    "max_seq_length": 16384,
}

LORA_RECIPE = {
    "method": "lora",
    "learning_rate": 1e-4,
    "num_epochs": 2,
    "num_devices": 4,
    "per_device_batch_size": 1,
    "lora_target": "full",
    "lr_scheduler": "cosine",
    "warmup_ratio": 0.03,
    "max_seq_length": 16384,
}


def emit_recipe(
    student_params_b: float,
    lr: float | None = None,
    num_epochs: int | None = None,
    name: str | None = None,
) -> str:
    """Emit a flat key-value training config for a student of the given size.

    Students under 14B parameters get the full fine-tune recipe, those above
    get LoRA. Exactly 14B is treated as full fine-tune with a warning, since
    neither regime claims the boundary. Passing ``lr``/``num_epochs``
    overrides produces a sensitivity variant.
    """
    if student_params_b <= 0:
        raise ValueError("student_params_b must be positive")
    if student_params_b == FULL_LORA_BOUNDARY_B:
        warnings.warn(
            "14B sits on the full/LoRA boundary; emitting the full fine-tune recipe",
            stacklevel=2,
        )
    base = FULL_FINETUNE_RECIPE if student_params_b <= FULL_LORA_BOUNDARY_B else LORA_RECIPE
    config = dict(base)
    if lr is not None:
        config["learning_rate"] = lr
    if num_epochs is not None:
        config["num_epochs"] = num_epochs
    lines = []
    if name:
        lines.append(f"name: {name}")
    for key, value in config.items():
        if key == "learning_rate":
            rendered = format_learning_rate(float(value))
        elif isinstance(value, float):
            rendered = f"{value:g}"
        else:
            rendered = str(value)
        lines.append(f"{key}: {rendered}")
    return "\n".join(lines) + "\n"


def sensitivity_grid() -> list[dict[str, Any]]:
    """The hyperparameter-sensitivity sweep: four epoch and four lr variants."""
    grid: list[dict[str, Any]] = []
    for epochs in (2, 3, 4, 5):
        grid.append(
            {"name": f"long_cot_epoch_{epochs}", "learning_rate": 1e-5, "num_epochs": epochs}
        )
    for lr in (1e-4, 5e-5, 1e-5, 5e-6):
        grid.append(
            {
                "name": f"long_cot_lr_{format_learning_rate(lr)}",
                "learning_rate": lr,
                "num_epochs": 3,
            }
        )
    return grid


def write_recipe(text: str, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path
