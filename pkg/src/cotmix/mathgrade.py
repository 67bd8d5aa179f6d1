"""Answer extraction, normalization, equivalence, and judge-backed grading.

Grading runs cheapest-first: pull the last boxed answer out of the response,
compare against ground truth by normalized string equality, then by numeric
value, and only if both fail hand the candidate to an LLM judge. The judge is
consulted at most once per item and never when string/numeric equivalence
already holds.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Callable

from . import prompts
from .corpus import Problem
from .errors import JudgeParseError, TransportError

logger = logging.getLogger(__name__)

VERDICT_METHODS = ("exact", "numeric", "judge", "parse_failure")

NUMERIC_REL_TOL = 1e-6

# Judge callable: takes the rendered judge prompt, returns the raw judge output.
JudgeClient = Callable[[str], str]


@dataclass(frozen=True)
class Verdict:
    """Outcome of grading one response.

    ``method`` records how the decision was reached. ``parse_failure`` means
    no boxed answer could be extracted; such items can still be correct, but
    only through the judge. ``judge_raw`` holds the judge's unparsed output
    whenever the judge was consulted.
    """

    correct: bool
    method: str
    extracted: str | None = None
    judge_raw: str | None = None

    def __post_init__(self) -> None:
        if self.method not in VERDICT_METHODS:
            raise ValueError(f"unknown verdict method {self.method!r}")
        if self.method == "parse_failure" and self.extracted is not None:
            raise ValueError("parse_failure verdicts carry no extracted answer")
        if self.method in ("exact", "numeric") and self.judge_raw is not None:
            raise ValueError(f"{self.method} verdicts carry no judge output")

    def to_record(self) -> dict:
        return {
            "correct": self.correct,
            "method": self.method,
            "extracted": self.extracted,
            "judge_raw": self.judge_raw,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Verdict":
        return cls(
            correct=bool(rec["correct"]),
            method=rec["method"],
            extracted=rec.get("extracted"),
            judge_raw=rec.get("judge_raw"),
        )


def extract_boxed(text: str) -> str | None:
    """Return the content of the last balanced ``\\boxed{...}`` group, or None.

    Brace matching handles nesting, so ``\\boxed{\\frac{3}{4}}`` yields
    ``\\frac{3}{4}``. Surrounding whitespace is trimmed.
    """
    starts = [m.start() for m in re.finditer(r"\\boxed", text)]
    for idx in reversed(starts):
        pos = idx + len("\\boxed")
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text) or text[pos] != "{":
            continue
        depth = 1
        pos += 1
        start = pos
        while pos < len(text):
            ch = text[pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[start:pos].strip()
            pos += 1
    return None


def _unwrap_text_command(s: str) -> str:
    """Unwrap ``\\text{...}`` only when it spans the whole string."""
    if not s.startswith("\\text{") or not s.endswith("}"):
        return s
    depth = 0
    for i, ch in enumerate(s[5:], start=5):
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return s[6:i] if i == len(s) - 1 else s
    return s


_THOUSANDS_RE = re.compile(r"(?<=\d),(?=\d{3}(?!\d))")


def _normalize_once(s: str) -> str:
    s = s.strip()
    while len(s) >= 2 and s.startswith("$") and s.endswith("$"):
        s = s[1:-1].strip()
    s = s.replace("\\left", "").replace("\\right", "")
    s = re.sub(r"\s+", " ", s).strip()
    s = s.rstrip(".").strip()
    s = _unwrap_text_command(s)
    s = s.replace("\\dfrac", "\\frac")
    s = _THOUSANDS_RE.sub("", s)
    if re.fullmatch(r"[A-Za-z]+(?: [A-Za-z]+)*", s):
        s = s.lower()
    return s


def normalize_answer(raw: str) -> str:
    """Canonicalize an answer string; total and idempotent.

    The pass is applied until it reaches a fixed point so that unwrapping one
    layer (say ``\\text{$x$}``) still leaves a fully normalized result.
    """
    s = raw
    for _ in range(10):
        nxt = _normalize_once(s)
        if nxt == s:
            return s
        s = nxt
    return s


_FRAC_RE = re.compile(r"(-?)\\frac\{(-?\d+(?:\.\d+)?)\}\{(-?\d+(?:\.\d+)?)\}")
_SLASH_RE = re.compile(r"(-?\d+(?:\.\d+)?)/(-?\d+(?:\.\d+)?)")


def parse_numeric(s: str) -> float | None:
    """Parse a normalized answer as a real number, if it has one.

    Handles plain ints/decimals, ``\\frac{p}{q}``, simple ``p/q``, and
    percent forms. Returns None when the string is not numeric.
    """
    s = s.strip()
    percent = False
    for suffix in ("\\%", "%"):
        if s.endswith(suffix):
            s = s[: -len(suffix)].strip()
            percent = True
            break
    value: float | None = None
    m = _FRAC_RE.fullmatch(s)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        den = float(m.group(3))
        if den == 0:
            return None
        value = sign * float(m.group(2)) / den
    if value is None:
        m = _SLASH_RE.fullmatch(s)
        if m:
            den = float(m.group(2))
            if den == 0:
                return None
            value = float(m.group(1)) / den
    if value is None:
        try:
            value = float(s)
        except ValueError:
            return None
    return value / 100.0 if percent else value


def _equivalence(a: str, b: str) -> tuple[bool, str]:
    """Decide equivalence and report which comparison was decisive."""
    na, nb = normalize_answer(a), normalize_answer(b)
    if na == nb:
        return True, "exact"
    va, vb = parse_numeric(na), parse_numeric(nb)
    if va is not None and vb is not None:
        # max over both magnitudes keeps the relation symmetric
        return abs(va - vb) <= NUMERIC_REL_TOL * max(1.0, abs(va), abs(vb)), "numeric"
    return False, "exact"


def answers_equivalent(a: str, b: str) -> bool:
    """True when the answers match exactly after normalization or numerically."""
    return _equivalence(a, b)[0]


def build_judge_prompt(problem: str, ground_truth: str, candidate: str) -> str:
    """Render the fixed judge exchange for one candidate answer."""
    return prompts.render_judge_prompt(problem, ground_truth, candidate)


_VERDICT_TOKEN_RE = re.compile(r"\b(true|false)\b", re.IGNORECASE)


def parse_judge_verdict(judge_output: str) -> bool:
    """Read the first standalone 'true'/'false' token, case-insensitively."""
    m = _VERDICT_TOKEN_RE.search(judge_output)
    if m is None:
        raise JudgeParseError(
            f"judge output contains neither 'True' nor 'False': {judge_output[:120]!r}"
        )
    return m.group(1).lower() == "true"


def final_nonempty_line(text: str) -> str:
    for line in reversed(text.splitlines()):
        if line.strip():
            return line.strip()
    return ""


def _consult_judge(judge: JudgeClient, problem: Problem, candidate: str) -> tuple[bool, str]:
    prompt = build_judge_prompt(problem.statement, problem.ground_truth, candidate)
    try:
        raw = judge(prompt)
    except Exception as exc:
        raise TransportError(f"judge call failed for problem {problem.id}: {exc}") from exc
    try:
        return parse_judge_verdict(raw), raw
    except JudgeParseError:
        logger.warning("unparseable judge output for problem %s; scoring incorrect", problem.id)
        return False, raw


def grade(problem: Problem, response: str, judge: JudgeClient | None = None) -> Verdict:
    """Grade one response against the problem's ground truth.

    Equivalence hits never touch the judge. On an equivalence miss (or when no
    boxed answer can be extracted, in which case the final non-empty line
    stands in as the candidate) a present judge decides with a single call;
    with no judge the item scores incorrect under the pre-judge method.
    """
    extracted = extract_boxed(response)
    if extracted is not None:
        ok, method = _equivalence(extracted, problem.ground_truth)
        if ok:
            return Verdict(correct=True, method=method, extracted=extracted)
        if judge is None:
            return Verdict(correct=False, method=method, extracted=extracted)
        correct, raw = _consult_judge(judge, problem, extracted)
        return Verdict(correct=correct, method="judge", extracted=extracted, judge_raw=raw)
    if judge is None:
        return Verdict(correct=False, method="parse_failure")
    correct, raw = _consult_judge(judge, problem, final_nonempty_line(response))
    return Verdict(correct=correct, method="parse_failure", judge_raw=raw)
