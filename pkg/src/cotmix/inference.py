"""Uniform client for OpenAI-compatible chat, scoring, and embedding endpoints.

Requests are serialized canonically (sorted keys, compact separators) so that
their bytes are reproducible, cacheable by content digest, and checkable
against golden fixtures. The cache is an append-only content-addressed store
of request/response records; greedy requests are always cacheable, sampled
requests only when a seed is pinned. A per-endpoint semaphore bounds the
number of requests in flight.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import requests

from .corpus import DecodeParams, canonical_json
from .errors import CapabilityError, TransportError, WireFormatError

logger = logging.getLogger(__name__)

ENDPOINT_KINDS = ("chat", "completion_scoring", "embedding")

DEFAULT_TOP_K = 20

CHAT_PATH = "/v1/chat/completions"
COMPLETIONS_PATH = "/v1/completions"
EMBEDDINGS_PATH = "/v1/embeddings"


@dataclass(frozen=True)
class EndpointProfile:
    """A named inference or embedding endpoint plus its client-side limits."""

    name: str
    base_url: str
    model: str
    kind: str
    api_key_env: str = ""
    max_in_flight: int = 4
    timeout_s: float = 60.0

    def __post_init__(self) -> None:
        if not self.base_url.startswith(("http://", "https://")):
            raise ValueError(f"endpoint {self.name}: invalid base_url {self.base_url!r}")
        if self.kind not in ENDPOINT_KINDS:
            raise ValueError(f"endpoint {self.name}: unknown kind {self.kind!r}")
        if self.max_in_flight < 1:
            raise ValueError(f"endpoint {self.name}: max_in_flight must be >= 1")
        if self.timeout_s <= 0:
            raise ValueError(f"endpoint {self.name}: timeout_s must be positive")

    @classmethod
    def from_dict(cls, rec: Mapping[str, Any]) -> "EndpointProfile":
        return cls(
            name=rec["name"],
            base_url=rec["base_url"].rstrip("/"),
            model=rec["model"],
            kind=rec["kind"],
            api_key_env=rec.get("api_key_env", ""),
            max_in_flight=int(rec.get("max_in_flight", 4)),
            timeout_s=float(rec.get("timeout_s", 60.0)),
        )


@dataclass(frozen=True)
class ChatResult:
    text: str
    completion_tokens: int


@dataclass(frozen=True)
class ScoredSequence:
    """Per-token logprobs for a teacher-forced text, with top-k alternatives.

    ``top_alternatives`` is sorted descending by logprob at every position.
    Servers may truncate the alternative list, so a token's own logprob is
    not required to appear among them.
    """

    tokens: tuple[str, ...]
    logprobs: tuple[float, ...]
    top_alternatives: tuple[tuple[tuple[str, float], ...], ...]

    def __post_init__(self) -> None:
        if not (len(self.tokens) == len(self.logprobs) == len(self.top_alternatives)):
            raise ValueError("tokens, logprobs, and top_alternatives must be parallel")
        for lp in self.logprobs:
            if lp > 0:
                raise ValueError(f"logprob {lp} is positive")
        for alts in self.top_alternatives:
            for (_, a), (_, b) in zip(alts, alts[1:]):
                if b > a:
                    raise ValueError("top_alternatives must be sorted descending")

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_parts(
        cls,
        tokens: Sequence[str],
        logprobs: Sequence[float],
        top_alternatives: Sequence[Mapping[str, float] | Sequence[tuple[str, float]]],
    ) -> "ScoredSequence":
        sorted_alts = []
        for alts in top_alternatives:
            items = alts.items() if isinstance(alts, Mapping) else alts
            sorted_alts.append(tuple(sorted(items, key=lambda kv: (-kv[1], kv[0]))))
        return cls(
            tokens=tuple(tokens),
            logprobs=tuple(float(x) for x in logprobs),
            top_alternatives=tuple(sorted_alts),
        )


def serialize_request(body: Mapping[str, Any]) -> bytes:
    """Canonical wire bytes for a request body."""
    return canonical_json(body).encode("utf-8")


def request_cache_key(kind: str, model: str, body: Mapping[str, Any]) -> str:
    payload = canonical_json({"kind": kind, "model": model, "request": body})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def chat_request_body(model: str, prompt: str, decode: DecodeParams) -> dict[str, Any]:
    body: dict[str, Any] = {
        "model": model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": decode.temperature,
        "top_p": decode.top_p,
        "max_tokens": decode.max_tokens,
    }
    if decode.seed is not None:
        body["seed"] = decode.seed
    return body


def scoring_request_body(model: str, full_text: str, k: int) -> dict[str, Any]:
    return {"model": model, "prompt": full_text, "max_tokens": 0, "echo": True, "logprobs": k}


def embedding_request_body(model: str, texts: Sequence[str]) -> dict[str, Any]:
    return {"model": model, "input": list(texts)}


def parse_chat_response(resp: Any) -> ChatResult:
    try:
        text = resp["choices"][0]["message"]["content"]
        completion_tokens = int(resp["usage"]["completion_tokens"])
    except (KeyError, IndexError, TypeError) as exc:
        raise WireFormatError(
            f"chat response missing fields: {canonical_json(resp)[:200]}"
        ) from exc
    return ChatResult(text=text, completion_tokens=completion_tokens)


def parse_scoring_response(resp: Any, endpoint_name: str = "") -> ScoredSequence:
    try:
        lp = resp["choices"][0]["logprobs"]
    except (KeyError, IndexError, TypeError) as exc:
        raise WireFormatError(
            f"scoring response missing fields: {canonical_json(resp)[:200]}"
        ) from exc
    if not isinstance(lp, dict) or "tokens" not in lp or "token_logprobs" not in lp:
        raise CapabilityError(
            f"endpoint {endpoint_name or 'scorer'} does not return echoed prompt logprobs; "
            "use a scoring-capable completion server"
        )
    tokens = lp["tokens"]
    logprobs = [0.0 if x is None else float(x) for x in lp["token_logprobs"]]
    raw_alts = lp.get("top_logprobs") or [None] * len(tokens)
    alternatives = [({} if alts is None else alts) for alts in raw_alts]
    return ScoredSequence.from_parts(tokens, logprobs, alternatives)


def parse_embedding_response(resp: Any, expected: int) -> list[list[float]]:
    try:
        data = sorted(resp["data"], key=lambda item: item["index"])
        vectors = [[float(x) for x in item["embedding"]] for item in data]
    except (KeyError, TypeError) as exc:
        raise WireFormatError(
            f"embedding response missing fields: {canonical_json(resp)[:200]}"
        ) from exc
    if len(vectors) != expected:
        raise WireFormatError(f"asked for {expected} embeddings, got {len(vectors)}")
    dims = {len(v) for v in vectors}
    if len(dims) > 1:
        raise WireFormatError(f"embedding dimension mismatch across batch: {sorted(dims)}")
    normalized = []
    for v in vectors:
        norm = math.sqrt(sum(x * x for x in v))
        if norm == 0:
            raise WireFormatError("embedding endpoint returned a zero vector")
        normalized.append([x / norm for x in v])
    return normalized


class RequestCache:
    """Append-only content-addressed store of request/response records."""

    def __init__(self, root: Path):
        self.root = Path(root)

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> dict[str, Any] | None:
        path = self._path(key)
        if not path.exists():
            return None
        with path.open("r", encoding="utf-8") as fh:
            record = json.load(fh)
        return record["response"]

    def put(self, key: str, kind: str, body: Mapping[str, Any], response: Any) -> None:
        path = self._path(key)
        if path.exists():
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        record = canonical_json({"key": key, "kind": kind, "request": body, "response": response})
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(record)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


class InferenceClient:
    """Shared, thread-safe client for all endpoint kinds.

    ``network_requests`` counts actual HTTP round trips (retries included);
    ``cache_hits`` counts requests answered from the store without touching
    the network.
    """

    def __init__(
        self,
        cache_dir: str | Path | None = None,
        retry_attempts: int = 4,
        retry_base_s: float = 0.25,
    ):
        if retry_attempts < 1:
            raise ValueError("retry_attempts must be >= 1")
        self.cache = RequestCache(Path(cache_dir)) if cache_dir else None
        self.retry_attempts = retry_attempts
        self.retry_base_s = retry_base_s
        self.network_requests = 0
        self.cache_hits = 0
        self._counter_lock = threading.Lock()
        self._semaphores: dict[tuple[str, str], threading.BoundedSemaphore] = {}
        self._semaphore_lock = threading.Lock()
        self._local = threading.local()

    # -- plumbing ------------------------------------------------------------

    def _session(self) -> requests.Session:
        if not hasattr(self._local, "session"):
            self._local.session = requests.Session()
        return self._local.session

    def _semaphore(self, endpoint: EndpointProfile) -> threading.BoundedSemaphore:
        key = (endpoint.name, endpoint.base_url)
        with self._semaphore_lock:
            if key not in self._semaphores:
                self._semaphores[key] = threading.BoundedSemaphore(endpoint.max_in_flight)
            return self._semaphores[key]

    def _headers(self, endpoint: EndpointProfile) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if endpoint.api_key_env:
            key = os.environ.get(endpoint.api_key_env)
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, endpoint: EndpointProfile, path: str, body: Mapping[str, Any]) -> Any:
        url = endpoint.base_url.rstrip("/") + path
        data = serialize_request(body)
        headers = self._headers(endpoint)
        last_error = ""
        semaphore = self._semaphore(endpoint)
        for attempt in range(self.retry_attempts):
            if attempt:
                time.sleep(self.retry_base_s * (2 ** (attempt - 1)))
            with semaphore:
                with self._counter_lock:
                    self.network_requests += 1
                try:
                    resp = self._session().post(
                        url, data=data, headers=headers, timeout=endpoint.timeout_s
                    )
                except requests.RequestException as exc:
                    last_error = f"connection error: {exc}"
                    logger.warning("POST %s attempt %d: %s", url, attempt + 1, last_error)
                    continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = f"HTTP {resp.status_code}"
                logger.warning("POST %s attempt %d: %s", url, attempt + 1, last_error)
                continue
            if resp.status_code != 200:
                raise TransportError(
                    f"POST {url} failed with HTTP {resp.status_code}: {resp.text[:200]}"
                )
            try:
                return resp.json()
            except ValueError as exc:
                raise WireFormatError(
                    f"POST {url}: response is not JSON: {resp.text[:200]!r}"
                ) from exc
        raise TransportError(
            f"POST {url} failed after {self.retry_attempts} attempts ({last_error})"
        )

    def _roundtrip(
        self, endpoint: EndpointProfile, path: str, body: Mapping[str, Any], cacheable: bool
    ) -> Any:
        key = request_cache_key(endpoint.kind, endpoint.model, body)
        if cacheable and self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                with self._counter_lock:
                    self.cache_hits += 1
                return cached
        response = self._post(endpoint, path, body)
        if cacheable and self.cache is not None:
            self.cache.put(key, endpoint.kind, body, response)
        return response

    # -- operations ----------------------------------------------------------

    def chat(self, endpoint: EndpointProfile, prompt: str, decode: DecodeParams) -> ChatResult:
        """Single-turn chat completion; returns the assistant text and usage count."""
        if endpoint.kind != "chat":
            raise CapabilityError(f"endpoint {endpoint.name} is {endpoint.kind}, expected chat")
        body = chat_request_body(endpoint.model, prompt, decode)
        # Determinism boundary: greedy requests are reproducible, sampled ones
        # only with a pinned seed; anything else must bypass the cache.
        cacheable = decode.is_greedy or decode.seed is not None
        resp = self._roundtrip(endpoint, CHAT_PATH, body, cacheable)
        return parse_chat_response(resp)

    def score_sequence(
        self, endpoint: EndpointProfile, full_text: str, k: int = DEFAULT_TOP_K
    ) -> ScoredSequence:
        """Teacher-forced per-token logprobs for ``full_text`` with top-k alternatives.

        The first echoed position may carry no defined logprob; it is mapped
        to 0.0 and normally excluded downstream via prompt-skip counts.
        """
        if endpoint.kind != "completion_scoring":
            raise CapabilityError(
                f"endpoint {endpoint.name} is {endpoint.kind}, expected completion_scoring"
            )
        body = scoring_request_body(endpoint.model, full_text, k)
        resp = self._roundtrip(endpoint, COMPLETIONS_PATH, body, cacheable=True)
        return parse_scoring_response(resp, endpoint.name)

    def embed(self, endpoint: EndpointProfile, texts: Sequence[str]) -> list[list[float]]:
        """Embed a batch of texts; vectors are L2-normalized on receipt."""
        if endpoint.kind != "embedding":
            raise CapabilityError(
                f"endpoint {endpoint.name} is {endpoint.kind}, expected embedding"
            )
        body = embedding_request_body(endpoint.model, texts)
        resp = self._roundtrip(endpoint, EMBEDDINGS_PATH, body, cacheable=True)
        return parse_embedding_response(resp, expected=len(texts))
