"""Canonical data model: problems, reasoning traces, SFT datasets, score reports.

On-disk formats are line-delimited JSON with canonical encoding (sorted keys,
no insignificant whitespace, UTF-8) so that content hashes are stable across
runs and platforms. Timestamps are ISO-8601 UTC and never participate in
hashes.
"""

from __future__ import annotations

import hashlib
import json
import statistics
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import ParseError

BENCHMARKS = ("math", "gsm8k", "aime24", "amc23", "olympiadbench")
SOURCES = BENCHMARKS + ("custom",)
STYLES = ("long", "short")

DATASET_FORMAT = "sft-dataset"
DATASET_VERSION = 1

EVAL_MAX_TOKENS = 16384


def canonical_json(obj: Any) -> str:
    """Serialize to the canonical single-line form used for files and hashes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class Problem:
    """A math prompt with its ground-truth final answer."""

    id: str
    statement: str
    ground_truth: str
    source: str = "custom"

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("problem id must be non-empty")
        if not self.statement:
            raise ValueError(f"problem {self.id}: statement must be non-empty")
        if not self.ground_truth:
            raise ValueError(f"problem {self.id}: ground_truth must be non-empty")
        if self.source not in SOURCES:
            raise ValueError(f"problem {self.id}: unknown source {self.source!r}")

    def to_record(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "problem": self.statement,
            "answer": self.ground_truth,
            "source": self.source,
        }


@dataclass(frozen=True)
class DecodeParams:
    """Decoding parameters for a generation request.

    ``temperature == 0`` denotes greedy decoding. ``max_tokens`` defaults to
    the evaluation budget of 16384 tokens.
    """

    temperature: float = 0.0
    max_tokens: int = EVAL_MAX_TOKENS
    top_p: float = 1.0
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")

    @property
    def is_greedy(self) -> bool:
        return self.temperature == 0

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "top_p": self.top_p,
        }
        if self.seed is not None:
            rec["seed"] = self.seed
        return rec

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "DecodeParams":
        return cls(
            temperature=float(rec["temperature"]),
            max_tokens=int(rec["max_tokens"]),
            top_p=float(rec["top_p"]),
            seed=rec.get("seed"),
        )


@dataclass(frozen=True)
class CoTTrace:
    """One generated reasoning response plus its decoding metadata.

    ``completion_tokens`` is the endpoint's usage count at generation time
    (teacher-tokenizer token counts); no tokenizer is bundled here. ``style``
    is declared from the generating model's role, never inferred from length.
    """

    problem_id: str
    text: str
    style: str
    teacher: str
    decode: DecodeParams
    completion_tokens: int
    verified_correct: bool = False
    attempt_index: int = 0

    def __post_init__(self) -> None:
        if self.style not in STYLES:
            raise ValueError(f"trace {self.problem_id}: unknown style {self.style!r}")
        if self.completion_tokens < 0:
            raise ValueError(f"trace {self.problem_id}: negative completion_tokens")
        if self.text and self.completion_tokens < 1:
            raise ValueError(
                f"trace {self.problem_id}: non-empty text requires completion_tokens >= 1"
            )
        if self.attempt_index < 0:
            raise ValueError(f"trace {self.problem_id}: negative attempt_index")

    def to_record(self) -> dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "text": self.text,
            "style": self.style,
            "teacher": self.teacher,
            "decode": self.decode.to_record(),
            "completion_tokens": self.completion_tokens,
            "verified_correct": self.verified_correct,
            "attempt_index": self.attempt_index,
        }

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "CoTTrace":
        return cls(
            problem_id=rec["problem_id"],
            text=rec["text"],
            style=rec["style"],
            teacher=rec["teacher"],
            decode=DecodeParams.from_record(rec["decode"]),
            completion_tokens=int(rec["completion_tokens"]),
            verified_correct=bool(rec["verified_correct"]),
            attempt_index=int(rec["attempt_index"]),
        )


@dataclass(frozen=True)
class SFTExample:
    """One (instruction, output) training pair with its provenance columns."""

    problem_id: str
    instruction: str
    output: str
    style: str
    teacher: str

    def to_record(self) -> dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "instruction": self.instruction,
            "output": self.output,
            "style": self.style,
            "teacher": self.teacher,
        }

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "SFTExample":
        return cls(
            problem_id=rec["problem_id"],
            instruction=rec["instruction"],
            output=rec["output"],
            style=rec["style"],
            teacher=rec["teacher"],
        )


def _dataset_content_hash(examples: Sequence[SFTExample]) -> str:
    h = hashlib.sha256()
    for ex in examples:
        h.update(canonical_json(ex.to_record()).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


@dataclass(frozen=True)
class SFTDataset:
    """An ordered set of training pairs, one per problem id.

    ``content_hash`` covers the canonical serialization of the examples in
    order; it is insensitive to ``created_at`` and to provenance metadata.
    """

    examples: tuple[SFTExample, ...]
    provenance: Mapping[str, Any]
    created_at: str
    content_hash: str = field(default="")

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for ex in self.examples:
            if ex.problem_id in seen:
                raise ValueError(f"duplicate problem_id in dataset: {ex.problem_id}")
            seen.add(ex.problem_id)
        expected = _dataset_content_hash(self.examples)
        if self.content_hash and self.content_hash != expected:
            raise ValueError(
                f"content_hash mismatch: recorded {self.content_hash[:12]}..., "
                f"recomputed {expected[:12]}..."
            )
        if not self.content_hash:
            object.__setattr__(self, "content_hash", expected)

    @classmethod
    def build(
        cls,
        examples: Iterable[SFTExample],
        provenance: Mapping[str, Any],
        created_at: str | None = None,
    ) -> "SFTDataset":
        return cls(
            examples=tuple(examples),
            provenance=dict(provenance),
            created_at=created_at or utc_now_iso(),
        )

    def problem_ids(self) -> list[str]:
        return [ex.problem_id for ex in self.examples]


@dataclass(frozen=True)
class BenchmarkScore:
    """Per-benchmark accuracy, with raw counts when they are known.

    Reports ingested from published tables carry only the percentage; counts
    are then ``None``.
    """

    accuracy_pct: float
    correct: int | None = None
    total: int | None = None

    def __post_init__(self) -> None:
        if self.correct is not None and self.total is not None:
            if self.total <= 0:
                raise ValueError("total must be positive")
            if not 0 <= self.correct <= self.total:
                raise ValueError("correct must be within [0, total]")
            expected = 100.0 * self.correct / self.total
            if abs(self.accuracy_pct - expected) > 1e-9:
                raise ValueError(
                    f"accuracy_pct {self.accuracy_pct} != 100*correct/total {expected}"
                )

    @classmethod
    def from_counts(cls, correct: int, total: int) -> "BenchmarkScore":
        return cls(accuracy_pct=100.0 * correct / total, correct=correct, total=total)


def average_over_benchmarks(per_benchmark: Mapping[str, BenchmarkScore]) -> float | None:
    """Unweighted mean over the five canonical benchmarks, or None if any is missing."""
    if not all(b in per_benchmark for b in BENCHMARKS):
        return None
    return sum(per_benchmark[b].accuracy_pct for b in BENCHMARKS) / len(BENCHMARKS)


@dataclass(frozen=True)
class ScoreReport:
    """Per-benchmark accuracies for one model plus the five-benchmark average."""

    model: str
    per_benchmark: Mapping[str, BenchmarkScore]
    average_pct: float | None

    @classmethod
    def from_scores(
        cls,
        model: str,
        per_benchmark: Mapping[str, BenchmarkScore],
        allow_partial: bool = False,
    ) -> "ScoreReport":
        average = average_over_benchmarks(per_benchmark)
        if average is None and allow_partial and per_benchmark:
            values = [s.accuracy_pct for s in per_benchmark.values()]
            average = sum(values) / len(values)
        return cls(model=model, per_benchmark=dict(per_benchmark), average_pct=average)

    @classmethod
    def from_percentages(
        cls, model: str, percentages: Mapping[str, float], allow_partial: bool = False
    ) -> "ScoreReport":
        scores = {b: BenchmarkScore(accuracy_pct=float(p)) for b, p in percentages.items()}
        return cls.from_scores(model, scores, allow_partial=allow_partial)


def _iter_records(path: Path) -> Iterable[tuple[int, dict[str, Any]]]:
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{line_no}: malformed record: {exc}") from exc
            if not isinstance(rec, dict):
                raise ParseError(f"{path}:{line_no}: record is not an object")
            yield line_no, rec


def load_problems(path: str | Path, source: str = "custom") -> list[Problem]:
    """Load problems from a line-delimited file of {problem, answer[, id]} records.

    Ids default to ``<source>/<index>`` (0-based position in the file).
    Duplicate ids are rejected with both locations named.
    """
    path = Path(path)
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}; expected one of {SOURCES}")
    problems: list[Problem] = []
    seen: dict[str, int] = {}
    for index, (line_no, rec) in enumerate(_iter_records(path)):
        for fieldname in ("problem", "answer"):
            if fieldname not in rec or not isinstance(rec[fieldname], str):
                raise ParseError(f"{path}:{line_no}: missing string field {fieldname!r}")
        pid = rec.get("id") or f"{source}/{index}"
        if pid in seen:
            raise ParseError(
                f"{path}:{line_no}: duplicate problem id {pid!r} (first seen at line {seen[pid]})"
            )
        seen[pid] = line_no
        try:
            problems.append(
                Problem(id=pid, statement=rec["problem"], ground_truth=rec["answer"], source=source)
            )
        except ValueError as exc:
            raise ParseError(f"{path}:{line_no}: {exc}") from exc
    return problems


def save_problems(problems: Sequence[Problem], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for p in problems:
            fh.write(canonical_json(p.to_record()) + "\n")
    return path


def save_traces(traces: Sequence[CoTTrace], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for t in traces:
            fh.write(canonical_json(t.to_record()) + "\n")
    return path


def load_traces(path: str | Path) -> list[CoTTrace]:
    path = Path(path)
    traces = []
    for line_no, rec in _iter_records(path):
        try:
            traces.append(CoTTrace.from_record(rec))
        except (KeyError, ValueError) as exc:
            raise ParseError(f"{path}:{line_no}: bad trace record: {exc}") from exc
    return traces


def save_dataset(dataset: SFTDataset, path: str | Path) -> Path:
    """Write a dataset file: one header record, then one record per example."""
    path = Path(path)
    header = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "provenance": dict(dataset.provenance),
        "created_at": dataset.created_at,
        "content_hash": dataset.content_hash,
    }
    with path.open("w", encoding="utf-8") as fh:
        fh.write(canonical_json(header) + "\n")
        for ex in dataset.examples:
            fh.write(canonical_json(ex.to_record()) + "\n")
    return path


def load_dataset(path: str | Path) -> SFTDataset:
    path = Path(path)
    records = list(_iter_records(path))
    if not records:
        raise ParseError(f"{path}: empty dataset file")
    line_no, header = records[0]
    if header.get("format") != DATASET_FORMAT:
        raise ParseError(f"{path}:{line_no}: not a {DATASET_FORMAT} file")
    if header.get("version") != DATASET_VERSION:
        raise ParseError(f"{path}:{line_no}: unsupported version {header.get('version')!r}")
    examples = []
    for line_no, rec in records[1:]:
        try:
            examples.append(SFTExample.from_record(rec))
        except KeyError as exc:
            raise ParseError(f"{path}:{line_no}: bad example record: {exc}") from exc
    try:
        return SFTDataset(
            examples=tuple(examples),
            provenance=header.get("provenance", {}),
            created_at=header.get("created_at", ""),
            content_hash=header.get("content_hash", ""),
        )
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def corpus_token_stats(traces: Sequence[CoTTrace]) -> dict[str, float | int]:
    """Mean, median, and max of completion token counts over a trace corpus."""
    if not traces:
        raise ValueError("empty corpus")
    counts = [t.completion_tokens for t in traces]
    return {
        "mean": statistics.mean(counts),
        "median": statistics.median(counts),
        "max": max(counts),
    }
