"""Distribution-gap analytics: perplexity, text similarity, token rank shift.

Perplexity is pooled over tokens across the whole corpus (not averaged per
document). Similarity confidence intervals are normal 95% intervals,
1.96 * sample stddev / sqrt(n). Rank-shift analysis tolerates top-k
censoring: a generated token missing from the scorer's alternatives gets the
floor rank k+1 and an explicit flag rather than an estimate.
"""

from __future__ import annotations

import hashlib
import math
import re
import statistics
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import CoTTrace
from .errors import TokenAlignmentError
from .inference import DEFAULT_TOP_K, EndpointProfile, InferenceClient, ScoredSequence

CONTEXT_PREFIX_CHARS = 64
DEFAULT_TOP_M = 20

_WORD_RE = re.compile(r"\w+")


@dataclass(frozen=True)
class SimilarityReport:
    """Mean pairwise similarity with a 95% normal confidence half-width."""

    metric: str
    n_pairs: int
    mean: float
    ci_halfwidth: float

    def __post_init__(self) -> None:
        if self.metric not in ("tfidf", "embedding"):
            raise ValueError(f"unknown similarity metric {self.metric!r}")
        if not -1 - 1e-9 <= self.mean <= 1 + 1e-9:
            raise ValueError(f"mean similarity {self.mean} outside [-1, 1]")
        if self.ci_halfwidth < 0:
            raise ValueError("ci_halfwidth must be >= 0")


@dataclass(frozen=True)
class RankShiftRecord:
    """Rank of one generated token under the pre-fine-tuning model.

    ``censored`` marks tokens absent from the scorer's top-k alternatives;
    their ``base_rank`` of k+1 is a floor, not an estimate. ``generator_rank``
    is filled only when a second scorer ranks the token under the generating
    model itself (relevant for sampled generations; greedy ones rank 1).
    """

    position: int
    token: str
    context_prefix: str
    base_rank: int
    censored: bool
    generator_rank: int | None = None

    def __post_init__(self) -> None:
        if self.base_rank < 1:
            raise ValueError("base_rank must be >= 1")

    @property
    def shift(self) -> int:
        return self.base_rank - (self.generator_rank if self.generator_rank else 1)

    def context_hash(self) -> str:
        return hashlib.sha256(self.context_prefix.encode("utf-8")).hexdigest()[:16]

    def to_record(self) -> dict:
        return {
            "position": self.position,
            "token": self.token,
            "base_rank": self.base_rank,
            "censored": self.censored,
            "context_hash": self.context_hash(),
        }


def corpus_perplexity(
    scored: Sequence[ScoredSequence], skip_prompt_tokens: Sequence[int] | int
) -> float:
    """exp(-(sum of counted logprobs) / counted tokens), pooled over the corpus.

    ``skip_prompt_tokens`` excludes each item's prompt positions so the
    statistic covers response tokens only; it must stay below the item length.
    """
    if isinstance(skip_prompt_tokens, int):
        skips: Sequence[int] = [skip_prompt_tokens] * len(scored)
    else:
        skips = skip_prompt_tokens
    if len(skips) != len(scored):
        raise ValueError("skip_prompt_tokens must match the scored sequences")
    count = 0
    parts = []
    for item, skip in zip(scored, skips):
        if skip < 0:
            raise ValueError("skip counts must be >= 0")
        if skip >= len(item):
            raise ValueError(f"skip count {skip} >= sequence length {len(item)}")
        parts.extend(item.logprobs[skip:])
        count += len(item) - skip
    if count == 0:
        raise ValueError("no counted tokens; cannot compute perplexity")
    return math.exp(-math.fsum(parts) / count)


def tokenize_words(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def _tfidf_vectors(corpus: Sequence[str]) -> dict[str, dict[str, float]]:
    """L2-normalized tf-idf vectors; idf = ln((1+N)/(1+df)) + 1 with raw-count tf."""
    token_sets = {doc: set(tokenize_words(doc)) for doc in corpus}
    n_docs = len(corpus)
    df: Counter[str] = Counter()
    for tokens in token_sets.values():
        df.update(tokens)
    idf = {term: math.log((1 + n_docs) / (1 + count)) + 1.0 for term, count in df.items()}
    vectors: dict[str, dict[str, float]] = {}
    for doc in corpus:
        tf = Counter(tokenize_words(doc))
        weights = {term: count * idf[term] for term, count in tf.items()}
        norm = math.sqrt(sum(w * w for w in weights.values()))
        vectors[doc] = {t: w / norm for t, w in weights.items()} if norm else {}
    return vectors


def _sparse_cosine(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    return sum(w * b.get(t, 0.0) for t, w in a.items())


def _report(metric: str, sims: Sequence[float]) -> SimilarityReport:
    mean = statistics.mean(sims)
    halfwidth = 1.96 * statistics.stdev(sims) / math.sqrt(len(sims))
    return SimilarityReport(metric=metric, n_pairs=len(sims), mean=mean, ci_halfwidth=halfwidth)


def tfidf_similarity(pairs: Sequence[tuple[str, str]]) -> SimilarityReport:
    """Mean tf-idf cosine over document pairs, fitted on the union of all documents."""
    if len(pairs) < 2:
        raise ValueError("need at least 2 pairs for a confidence interval")
    corpus: list[str] = []
    for a, b in pairs:
        for doc in (a, b):
            if doc not in corpus:
                corpus.append(doc)
    vectors = _tfidf_vectors(corpus)
    sims = []
    for a, b in pairs:
        va, vb = vectors[a], vectors[b]
        if not va or not vb:
            warnings.warn("empty document in pair; similarity recorded as 0", stacklevel=2)
            sims.append(0.0)
        else:
            sims.append(_sparse_cosine(va, vb))
    return _report("tfidf", sims)


def embedding_similarity(
    pairs: Sequence[tuple[str, str]],
    endpoint: EndpointProfile,
    client: InferenceClient,
) -> SimilarityReport:
    """Mean cosine of endpoint embeddings over document pairs."""
    if len(pairs) < 2:
        raise ValueError("need at least 2 pairs for a confidence interval")
    left = client.embed(endpoint, [a for a, _ in pairs])
    right = client.embed(endpoint, [b for _, b in pairs])
    sims = [sum(x * y for x, y in zip(u, v)) for u, v in zip(left, right)]
    return _report("embedding", sims)


def base_rank_of(token: str, own_logprob: float, alternatives: Sequence[tuple[str, float]], k: int) -> tuple[int, bool]:
    """Rank of a token against top-k alternatives; (k+1, censored) when absent.

    Rank counts only alternatives with strictly greater logprob, so ties rank
    the generated token earlier.
    """
    if not any(alt == token for alt, _ in alternatives):
        return k + 1, True
    return 1 + sum(1 for _, lp in alternatives if lp > own_logprob), False


def prompt_token_count(tokens: Sequence[str], prompt_len: int) -> int:
    consumed = 0
    for i, tok in enumerate(tokens):
        if consumed == prompt_len:
            return i
        consumed += len(tok)
        if consumed > prompt_len:
            raise TokenAlignmentError(
                f"prompt boundary falls inside token {i} ({tok!r}); "
                "retokenization does not align with the prompt/response split"
            )
    if consumed == prompt_len:
        return len(tokens)
    raise TokenAlignmentError("scored tokens are shorter than the prompt")


def _check_reassembly(tokens: Sequence[str], full_text: str) -> None:
    consumed = 0
    for i, tok in enumerate(tokens):
        if full_text[consumed : consumed + len(tok)] != tok:
            raise TokenAlignmentError(
                f"scored token {i} ({tok!r}) diverges from the submitted text at "
                f"character {consumed}"
            )
        consumed += len(tok)
    if consumed != len(full_text):
        raise TokenAlignmentError(
            f"scored tokens cover {consumed} characters of {len(full_text)}"
        )


def rank_shift(
    client: InferenceClient,
    base_scorer: EndpointProfile,
    prompt: str,
    generation: CoTTrace,
    k: int = DEFAULT_TOP_K,
    top_m: int = DEFAULT_TOP_M,
    generator_scorer: EndpointProfile | None = None,
) -> tuple[list[RankShiftRecord], list[int]]:
    """Rank every generated token under the base model; annotate the most shifted.

    The generation is assumed greedy under the fine-tuned model (own rank 1
    everywhere), so the shift reduces to the base model's rank. Passing
    ``generator_scorer`` additionally ranks tokens under the generating model
    and sorts annotations by the difference instead.

    Returns the per-position records and the positions of the ``top_m``
    largest shifts.
    """
    full_text = prompt + generation.text
    scored = client.score_sequence(base_scorer, full_text, k)
    _check_reassembly(scored.tokens, full_text)
    start = prompt_token_count(scored.tokens, len(prompt))

    own_ranks: list[int | None] = [None] * len(scored.tokens)
    if generator_scorer is not None:
        own_scored = client.score_sequence(generator_scorer, full_text, k)
        _check_reassembly(own_scored.tokens, full_text)
        if own_scored.tokens != scored.tokens:
            raise TokenAlignmentError("base and generator scorers tokenize differently")
        own_ranks = [
            base_rank_of(tok, own_scored.logprobs[i], own_scored.top_alternatives[i], k)[0]
            for i, tok in enumerate(own_scored.tokens)
        ]

    records: list[RankShiftRecord] = []
    offset = len(prompt)
    for i in range(start, len(scored.tokens)):
        token = scored.tokens[i]
        rank, censored = base_rank_of(token, scored.logprobs[i], scored.top_alternatives[i], k)
        records.append(
            RankShiftRecord(
                position=i - start,
                token=token,
                context_prefix=full_text[max(0, offset - CONTEXT_PREFIX_CHARS) : offset],
                base_rank=rank,
                censored=censored,
                generator_rank=own_ranks[i],
            )
        )
        offset += len(token)
    annotated = sorted(records, key=lambda r: (-r.shift, r.position))[:top_m]
    return records, [r.position for r in annotated]


def shifted_token_summary(records: Sequence[RankShiftRecord]) -> list[tuple[str, int]]:
    """Count annotated positions by surface token, most frequent first."""
    counts = Counter(r.token for r in records)
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))
