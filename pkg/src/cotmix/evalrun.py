"""End-to-end benchmark evaluation of a student endpoint.

Every item gets exactly one greedy generation request at the 16384-token
budget and at most one judge request. Records are persisted incrementally in
item order, so an interrupted run resumes through the request cache and the
final report is reproducible offline from the records alone.
"""

from __future__ import annotations

import json
import logging
import statistics
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import mathgrade, prompts
from .corpus import (
    BENCHMARKS,
    EVAL_MAX_TOKENS,
    BenchmarkScore,
    DecodeParams,
    Problem,
    ScoreReport,
    canonical_json,
    load_problems,
)
from .errors import ParseError
from .inference import EndpointProfile, InferenceClient
from .mathgrade import Verdict

logger = logging.getLogger(__name__)

RECORDS_FILENAME = "records.jsonl"
REPORT_JSONL_FILENAME = "report.jsonl"
REPORT_MD_FILENAME = "report.md"

JUDGE_MAX_TOKENS = 128


@dataclass(frozen=True)
class EvalRecord:
    """One evaluated item: the response, its verdict, and timing."""

    problem_id: str
    benchmark: str
    response_text: str
    verdict: Verdict
    completion_tokens: int
    latency_ms: float

    def to_record(self) -> dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "benchmark": self.benchmark,
            "response_text": self.response_text,
            "verdict": self.verdict.to_record(),
            "completion_tokens": self.completion_tokens,
            "latency_ms": self.latency_ms,
        }

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "EvalRecord":
        return cls(
            problem_id=rec["problem_id"],
            benchmark=rec["benchmark"],
            response_text=rec["response_text"],
            verdict=Verdict.from_record(rec["verdict"]),
            completion_tokens=int(rec["completion_tokens"]),
            latency_ms=float(rec["latency_ms"]),
        )


def judge_client(client: InferenceClient, judge: EndpointProfile):
    """Wrap a chat endpoint as the single-call judge used during grading."""
    decode = DecodeParams(temperature=0.0, max_tokens=JUDGE_MAX_TOKENS, top_p=1.0)

    def call(prompt: str) -> str:
        return client.chat(judge, prompt, decode).text

    return call


def evaluate(
    client: InferenceClient,
    student: EndpointProfile,
    benchmarks: Mapping[str, str | Path],
    judge: EndpointProfile | None = None,
    out_dir: str | Path | None = None,
    allow_partial: bool = False,
    max_tokens: int = EVAL_MAX_TOKENS,
) -> tuple[ScoreReport, list[EvalRecord]]:
    """Run the zero-shot greedy evaluation protocol over benchmark files.

    The five-benchmark average is left undefined when any canonical benchmark
    is missing, unless ``allow_partial`` explicitly overrides that.
    """
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
    judge_call = judge_client(client, judge) if judge is not None else None
    decode = DecodeParams(temperature=0.0, max_tokens=max_tokens, top_p=1.0)

    def worker(problem: Problem) -> EvalRecord:
        prompt = prompts.render_eval_prompt(problem.statement)
        started = time.perf_counter()
        result = client.chat(student, prompt, decode)
        verdict = mathgrade.grade(problem, result.text, judge=judge_call)
        return EvalRecord(
            problem_id=problem.id,
            benchmark=problem.source,
            response_text=result.text,
            verdict=verdict,
            completion_tokens=result.completion_tokens,
            latency_ms=(time.perf_counter() - started) * 1000.0,
        )

    records: list[EvalRecord] = []
    per_benchmark: dict[str, BenchmarkScore] = {}
    records_fh = None
    if out_path is not None:
        records_fh = (out_path / RECORDS_FILENAME).open("w", encoding="utf-8")
    try:
        for bench, path in benchmarks.items():
            problems = load_problems(path, source=bench)
            bench_records: list[EvalRecord] = []
            with ThreadPoolExecutor(max_workers=max(1, student.max_in_flight)) as pool:
                for record in pool.map(worker, problems):
                    bench_records.append(record)
                    if records_fh is not None:
                        records_fh.write(canonical_json(record.to_record()) + "\n")
                        records_fh.flush()
            correct = sum(1 for r in bench_records if r.verdict.correct)
            per_benchmark[bench] = BenchmarkScore.from_counts(correct, len(problems))
            records.extend(bench_records)
    finally:
        if records_fh is not None:
            records_fh.close()

    report = ScoreReport.from_scores(student.model, per_benchmark, allow_partial=allow_partial)
    if report.average_pct is None and not allow_partial:
        missing = sorted(set(BENCHMARKS) - set(per_benchmark))
        logger.warning("average undefined; missing benchmarks: %s", missing)
    if out_path is not None:
        (out_path / REPORT_JSONL_FILENAME).write_text(report_to_jsonl(report), encoding="utf-8")
        (out_path / REPORT_MD_FILENAME).write_text(render_report_md(report), encoding="utf-8")
    return report, records


def summarize(records: Sequence[EvalRecord]) -> dict[str, Any]:
    """Accuracy, verdict-method breakdown, and mean response length."""
    if not records:
        raise ValueError("no records to summarize")
    breakdown = Counter(r.verdict.method for r in records)
    correct = sum(1 for r in records if r.verdict.correct)
    return {
        "accuracy_pct": 100.0 * correct / len(records),
        "method_breakdown": dict(sorted(breakdown.items())),
        "mean_tokens": statistics.mean(r.completion_tokens for r in records),
    }


def rebuild_report(
    records: Sequence[EvalRecord], model: str, allow_partial: bool = False
) -> ScoreReport:
    """Recompute a ScoreReport from persisted records; needs no network."""
    by_bench: dict[str, list[EvalRecord]] = {}
    for r in records:
        by_bench.setdefault(r.benchmark, []).append(r)
    per_benchmark = {
        bench: BenchmarkScore.from_counts(
            sum(1 for r in rs if r.verdict.correct), len(rs)
        )
        for bench, rs in by_bench.items()
    }
    return ScoreReport.from_scores(model, per_benchmark, allow_partial=allow_partial)


def load_records(path: str | Path) -> list[EvalRecord]:
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(EvalRecord.from_record(json.loads(line)))
            except (ValueError, KeyError) as exc:
                raise ParseError(f"{path}:{line_no}: bad eval record: {exc}") from exc
    return records


def report_to_jsonl(report: ScoreReport) -> str:
    """Machine form: one line per benchmark plus a final average line."""
    lines = []
    for bench in sorted(report.per_benchmark):
        score = report.per_benchmark[bench]
        lines.append(
            canonical_json(
                {
                    "model": report.model,
                    "benchmark": bench,
                    "correct": score.correct,
                    "total": score.total,
                    "accuracy_pct": score.accuracy_pct,
                }
            )
        )
    lines.append(
        canonical_json(
            {"model": report.model, "benchmark": "average", "accuracy_pct": report.average_pct}
        )
    )
    return "\n".join(lines) + "\n"


def load_score_report(path: str | Path) -> ScoreReport:
    """Read a report written by ``report_to_jsonl`` (or shaped like it)."""
    path = Path(path)
    model = ""
    per_benchmark: dict[str, BenchmarkScore] = {}
    average: float | None = None
    saw_average = False
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                model = rec["model"]
                bench = rec["benchmark"]
                if bench == "average":
                    average = rec["accuracy_pct"]
                    saw_average = True
                else:
                    per_benchmark[bench] = BenchmarkScore(
                        accuracy_pct=float(rec["accuracy_pct"]),
                        correct=rec.get("correct"),
                        total=rec.get("total"),
                    )
            except (ValueError, KeyError) as exc:
                raise ParseError(f"{path}:{line_no}: bad report record: {exc}") from exc
    if not per_benchmark:
        raise ParseError(f"{path}: no benchmark records found")
    if saw_average:
        return ScoreReport(model=model, per_benchmark=per_benchmark, average_pct=average)
    return ScoreReport.from_scores(model, per_benchmark)


def render_report_md(report: ScoreReport) -> str:
    lines = [
        f"# Evaluation report: {report.model}",
        "",
        "| Benchmark | Correct | Total | Accuracy % |",
        "| --- | ---: | ---: | ---: |",
    ]
    for bench in sorted(report.per_benchmark):
        score = report.per_benchmark[bench]
        correct = "-" if score.correct is None else str(score.correct)
        total = "-" if score.total is None else str(score.total)
        lines.append(f"| {bench} | {correct} | {total} | {score.accuracy_pct:.1f} |")
    average = "undefined" if report.average_pct is None else f"{report.average_pct:.1f}"
    lines += ["", f"Five-benchmark average: **{average}**", ""]
    return "\n".join(lines)
