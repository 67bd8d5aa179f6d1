"""Verified teacher-corpus generation: prompting, rejection sampling, filtering.

Attempt 1 of every problem is greedy; further attempts sample at the job's
retry temperature with seeds pinned to ``run_seed + attempt_index`` so reruns
replay byte-identically through the request cache. Only responses whose final
answer grades correct against ground truth ever reach the corpus.
"""

from __future__ import annotations

import json
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

from . import mathgrade, prompts
from .corpus import (
    CoTTrace,
    DecodeParams,
    Problem,
    SFTDataset,
    SFTExample,
    canonical_json,
    corpus_token_stats,
    save_dataset,
    save_traces,
)
from .errors import CoverageError, TransportError
from .inference import EndpointProfile, InferenceClient

logger = logging.getLogger(__name__)

PROMPT_TEMPLATES = ("standard", "simplified_teacher")

TRACES_FILENAME = "traces.jsonl"
DATASET_FILENAME = "dataset.jsonl"
DROPPED_FILENAME = "dropped.jsonl"
SUMMARY_FILENAME = "summary.json"

Grader = Callable[[Problem, str], mathgrade.Verdict]


@dataclass(frozen=True)
class GenerationJob:
    """One rejection-sampling run of a teacher over a problem set."""

    problems: tuple[Problem, ...]
    teacher: EndpointProfile
    style: str
    prompt_template: str = "standard"
    max_attempts: int = 4
    sampling_temperature: float = 0.7
    run_seed: int = 0
    max_tokens: int = 16384

    def __post_init__(self) -> None:
        if self.style not in ("long", "short"):
            raise ValueError(f"unknown style {self.style!r}")
        if self.prompt_template not in PROMPT_TEMPLATES:
            raise ValueError(f"unknown prompt template {self.prompt_template!r}")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.sampling_temperature <= 0:
            raise ValueError("sampling_temperature must be > 0")


def render_teacher_prompt(problem: Problem, template: str = "standard") -> str:
    """Render the generation prompt for a problem under the given template."""
    if template == "standard":
        return prompts.render_eval_prompt(problem.statement)
    if template == "simplified_teacher":
        return prompts.render_simplified_teacher_prompt(problem.statement)
    raise ValueError(f"unknown prompt template {template!r}")


def _default_grader(problem: Problem, text: str) -> mathgrade.Verdict:
    return mathgrade.grade(problem, text, judge=None)


def rejection_sample(
    client: InferenceClient,
    job: GenerationJob,
    problem: Problem,
    grader: Grader | None = None,
) -> CoTTrace | None:
    """Generate until a response grades correct; None when all attempts fail."""
    grader = grader or _default_grader
    prompt = render_teacher_prompt(problem, job.prompt_template)
    for attempt in range(1, job.max_attempts + 1):
        if attempt == 1:
            decode = DecodeParams(temperature=0.0, max_tokens=job.max_tokens, top_p=1.0)
        else:
            decode = DecodeParams(
                temperature=job.sampling_temperature,
                max_tokens=job.max_tokens,
                top_p=1.0,
                seed=job.run_seed + attempt,
            )
        result = client.chat(job.teacher, prompt, decode)
        verdict = grader(problem, result.text)
        if verdict.correct:
            return CoTTrace(
                problem_id=problem.id,
                text=result.text,
                style=job.style,
                teacher=job.teacher.model,
                decode=decode,
                completion_tokens=result.completion_tokens,
                verified_correct=True,
                attempt_index=attempt,
            )
    return None


def pairwise_filter(
    a: Sequence[CoTTrace], b: Sequence[CoTTrace], invert: bool = False
) -> tuple[list[CoTTrace], list[CoTTrace]]:
    """Keep the problems both teachers solved, aligned on problem id.

    With ``invert=True`` the complement is returned instead (each side keeps
    only the problems the other side failed); the two sides are then disjoint
    rather than aligned.
    """
    a_map = _by_problem_id(a, "first")
    b_map = _by_problem_id(b, "second")
    if invert:
        a_only = [t for t in a if t.problem_id not in b_map]
        b_only = [t for t in b if t.problem_id not in a_map]
        return a_only, b_only
    shared = [t.problem_id for t in a if t.problem_id in b_map]
    return [a_map[pid] for pid in shared], [b_map[pid] for pid in shared]


def _by_problem_id(traces: Sequence[CoTTrace], side: str) -> dict[str, CoTTrace]:
    mapping: dict[str, CoTTrace] = {}
    for t in traces:
        if t.problem_id in mapping:
            raise CoverageError(f"duplicate problem_id {t.problem_id!r} in {side} trace set")
        mapping[t.problem_id] = t
    return mapping


def dataset_from_traces(
    problems: Sequence[Problem],
    traces: Sequence[CoTTrace],
    provenance: dict[str, Any] | None = None,
) -> SFTDataset:
    """Assemble training pairs from verified traces.

    Instructions always use the standard evaluation prompt so the training
    and evaluation input distributions match, whatever template produced the
    responses.
    """
    by_id = {p.id: p for p in problems}
    missing = [t.problem_id for t in traces if t.problem_id not in by_id]
    if missing:
        raise CoverageError(f"traces reference unknown problems: {missing[:10]}")
    examples = [
        SFTExample(
            problem_id=t.problem_id,
            instruction=prompts.render_eval_prompt(by_id[t.problem_id].statement),
            output=t.text,
            style=t.style,
            teacher=t.teacher,
        )
        for t in traces
    ]
    tag = provenance if provenance is not None else {"kind": "generation"}
    return SFTDataset.build(examples, tag)


def run_generation(
    client: InferenceClient,
    job: GenerationJob,
    out_dir: str | Path,
    grader: Grader | None = None,
) -> dict[str, Any]:
    """Run rejection sampling over the whole job and write the corpus artifacts.

    Writes ``traces.jsonl``, ``dataset.jsonl``, ``dropped.jsonl``, and
    ``summary.json`` under ``out_dir``. Results are collected in problem
    order regardless of completion order, so outputs are reproducible.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    requests_before = client.network_requests
    hits_before = client.cache_hits

    def worker(problem: Problem) -> tuple[Problem, CoTTrace | None, str | None]:
        try:
            return problem, rejection_sample(client, job, problem, grader), None
        except TransportError as exc:
            logger.error("problem %s: %s", problem.id, exc)
            return problem, None, str(exc)

    workers = max(1, job.teacher.max_in_flight)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(worker, job.problems))

    traces: list[CoTTrace] = []
    dropped: list[dict[str, str]] = []
    errors = 0
    for problem, trace, error in outcomes:
        if trace is not None:
            traces.append(trace)
        elif error is not None:
            errors += 1
            dropped.append({"problem_id": problem.id, "reason": f"transport_error: {error}"})
        else:
            dropped.append({"problem_id": problem.id, "reason": "exhausted_attempts"})

    save_traces(traces, out_dir / TRACES_FILENAME)
    dataset = dataset_from_traces(
        job.problems,
        traces,
        provenance={
            "kind": "generation",
            "teacher": job.teacher.model,
            "style": job.style,
            "template": job.prompt_template,
            "run_seed": job.run_seed,
        },
    )
    save_dataset(dataset, out_dir / DATASET_FILENAME)
    with (out_dir / DROPPED_FILENAME).open("w", encoding="utf-8") as fh:
        for rec in dropped:
            fh.write(canonical_json(rec) + "\n")

    summary: dict[str, Any] = {
        "problems": len(job.problems),
        "solved": len(traces),
        "dropped": len(dropped),
        "transport_errors": errors,
        "solve_rate": len(traces) / len(job.problems) if job.problems else 0.0,
        "mean_attempts": statistics.mean(t.attempt_index for t in traces) if traces else None,
        "mean_completion_tokens": corpus_token_stats(traces)["mean"] if traces else None,
        "network_requests": client.network_requests - requests_before,
        "cache_hits": client.cache_hits - hits_before,
        "complete": errors == 0,
        "teacher": job.teacher.model,
        "style": job.style,
        "template": job.prompt_template,
        "run_seed": job.run_seed,
    }
    with (out_dir / SUMMARY_FILENAME).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
