"""Deterministic mock OpenAI-compatible server for tests and demos.

Behavior is driven by a declarative script: ordered rules that match request
content (prompt regex, decode parameters) and state the response text,
logprobs, or embedding vector to return. Responses carry fixed ids and
``created: 0`` so that byte-level reproducibility holds across runs. The
server also records a request log and a concurrency high-water mark, which
the test suite uses to probe client-side in-flight limits.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Mapping

DEFAULT_EMBEDDING_DIM = 8
LN_HALF = -0.6931471805599453


def _tokenize(text: str) -> list[str]:
    """Split into chunks whose concatenation reproduces the text exactly.

    Leading whitespace binds to the following word, as subword tokenizers do,
    so a prompt/response boundary at a word edge stays on a token edge.
    """
    if not text:
        return []
    parts = re.findall(r"\s*\S+", text)
    joined = "".join(parts)
    if len(joined) < len(text):
        tail = text[len(joined) :]
        if parts:
            parts[-1] += tail
        else:
            parts = [tail]
    return parts


def hash_vector(text: str, dim: int = DEFAULT_EMBEDDING_DIM) -> list[float]:
    """Deterministic pseudo-embedding derived from the text digest (not unit norm)."""
    seed = int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")
    rng = random.Random(seed)
    return [rng.gauss(0.0, 1.0) for _ in range(dim)]


def _matches(match: Mapping[str, Any], text: str, body: Mapping[str, Any]) -> bool:
    pattern = match.get("prompt") or match.get("text")
    if pattern and not re.search(pattern, text, re.DOTALL):
        return False
    for field in ("temperature", "seed", "top_p", "max_tokens", "model"):
        if field in match and body.get(field) != match[field]:
            return False
    return True


class MockInferenceServer:
    """Scripted chat/scoring/embedding server bound to an ephemeral port."""

    def __init__(self, script: Mapping[str, Any] | None = None, host: str = "127.0.0.1", port: int = 0):
        self.script = dict(script or {})
        self._lock = threading.Lock()
        self._active = 0
        self.max_concurrent = 0
        self.request_count = 0
        self.request_log: list[dict[str, Any]] = []
        self._rule_uses: dict[int, int] = {}
        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args: Any) -> None:
                pass

            def do_GET(self) -> None:
                if self.path == "/__stats__":
                    self._send(200, server.stats())
                else:
                    self._send(404, {"error": "not found"})

            def do_POST(self) -> None:
                length = int(self.headers.get("Content-Length", "0"))
                raw = self.rfile.read(length)
                with server._lock:
                    server._active += 1
                    server.max_concurrent = max(server.max_concurrent, server._active)
                    server.request_count += 1
                try:
                    try:
                        body = json.loads(raw.decode("utf-8"))
                    except (ValueError, UnicodeDecodeError):
                        self._send(400, {"error": "bad json"})
                        return
                    with server._lock:
                        server.request_log.append(
                            {
                                "path": self.path,
                                "body": body,
                                "raw": raw,
                                "authorization": self.headers.get("Authorization"),
                            }
                        )
                    status, payload = server.handle(self.path, body)
                    self._send(status, payload)
                finally:
                    with server._lock:
                        server._active -= 1

            def _send(self, status: int, payload: Mapping[str, Any]) -> None:
                data = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        self._httpd = ThreadingHTTPServer((host, port), Handler)
        self._httpd.daemon_threads = True
        self._thread: threading.Thread | None = None

    # -- lifecycle -----------------------------------------------------------

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "MockInferenceServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def stats(self) -> dict[str, int]:
        with self._lock:
            return {"requests": self.request_count, "max_concurrent": self.max_concurrent}

    def reset_stats(self) -> None:
        with self._lock:
            self.request_count = 0
            self.max_concurrent = 0
            self.request_log.clear()

    # -- scripted behavior ----------------------------------------------------

    def _pick_rule(self, rules: list[Mapping[str, Any]], text: str, body: Mapping[str, Any]):
        for i, rule in enumerate(rules):
            if not _matches(rule.get("match", {}), text, body):
                continue
            limit = rule.get("times")
            if limit is not None:
                with self._lock:
                    used = self._rule_uses.get(id(rule), 0)
                    if used >= limit:
                        continue
                    self._rule_uses[id(rule)] = used + 1
            return rule
        return None

    def handle(self, path: str, body: Mapping[str, Any]) -> tuple[int, dict[str, Any]]:
        if path == "/v1/chat/completions":
            return self._handle_chat(body)
        if path == "/v1/completions":
            return self._handle_scoring(body)
        if path == "/v1/embeddings":
            return self._handle_embeddings(body)
        return 404, {"error": f"unknown path {path}"}

    def _handle_chat(self, body: Mapping[str, Any]) -> tuple[int, dict[str, Any]]:
        messages = body.get("messages") or [{}]
        prompt = messages[0].get("content", "")
        rule = self._pick_rule(self.script.get("chat", []), prompt, body)
        if rule is None:
            rule = self.script.get("chat_default")
        if rule is None:
            return 400, {"error": "no chat rule matches the request"}
        if rule.get("delay_s"):
            time.sleep(rule["delay_s"])
        if rule.get("status", 200) != 200:
            return rule["status"], {"error": rule.get("error", "scripted failure")}
        text = rule["response"]
        completion_tokens = rule.get("completion_tokens", max(1, len(text.split())))
        prompt_tokens = len(prompt.split())
        digest = hashlib.sha256((prompt + text).encode("utf-8")).hexdigest()[:12]
        return 200, {
            "id": f"chatcmpl-{digest}",
            "object": "chat.completion",
            "created": 0,
            "model": body.get("model", "mock"),
            "choices": [
                {
                    "index": 0,
                    "message": {"role": "assistant", "content": text},
                    "finish_reason": "stop",
                }
            ],
            "usage": {
                "prompt_tokens": prompt_tokens,
                "completion_tokens": completion_tokens,
                "total_tokens": prompt_tokens + completion_tokens,
            },
        }

    def _handle_scoring(self, body: Mapping[str, Any]) -> tuple[int, dict[str, Any]]:
        text = body.get("prompt", "")
        if not body.get("echo"):
            return 400, {"error": "scoring requires echo:true"}
        rule = self._pick_rule(self.script.get("scoring", []), text, body)
        if rule is not None and rule.get("status", 200) != 200:
            return rule["status"], {"error": rule.get("error", "scripted failure")}
        if rule is not None and rule.get("omit_logprobs"):
            digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
            return 200, {
                "id": f"cmpl-{digest}",
                "object": "text_completion",
                "created": 0,
                "model": body.get("model", "mock"),
                "choices": [{"index": 0, "text": text, "logprobs": None, "finish_reason": "length"}],
                "usage": {"prompt_tokens": 0, "completion_tokens": 0, "total_tokens": 0},
            }
        if rule is not None and "tokens" in rule:
            tokens = list(rule["tokens"])
            token_logprobs = list(rule["token_logprobs"])
            top_logprobs = list(rule.get("top_logprobs") or [None] * len(tokens))
        else:
            default = self.script.get("scoring_default", {})
            lp = default.get("logprob", LN_HALF)
            tokens = _tokenize(text)
            token_logprobs = [None] + [lp] * (len(tokens) - 1) if tokens else []
            top_logprobs = [None] + [{tok: lp} for tok in tokens[1:]] if tokens else []
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
        return 200, {
            "id": f"cmpl-{digest}",
            "object": "text_completion",
            "created": 0,
            "model": body.get("model", "mock"),
            "choices": [
                {
                    "index": 0,
                    "text": text,
                    "logprobs": {
                        "tokens": tokens,
                        "token_logprobs": token_logprobs,
                        "top_logprobs": top_logprobs,
                    },
                    "finish_reason": "length",
                }
            ],
            "usage": {
                "prompt_tokens": len(tokens),
                "completion_tokens": 0,
                "total_tokens": len(tokens),
            },
        }

    def _handle_embeddings(self, body: Mapping[str, Any]) -> tuple[int, dict[str, Any]]:
        texts = body.get("input") or []
        rules = self.script.get("embeddings", [])
        default = self.script.get("embeddings_default", {})
        dim = default.get("dim", DEFAULT_EMBEDDING_DIM)
        data = []
        for i, text in enumerate(texts):
            rule = self._pick_rule(rules, text, body)
            if rule is not None and "vector" in rule:
                vector = list(rule["vector"])
            else:
                vector = hash_vector(text, dim)
            data.append({"object": "embedding", "index": i, "embedding": vector})
        return 200, {
            "object": "list",
            "data": data,
            "model": body.get("model", "mock"),
            "usage": {"prompt_tokens": 0, "total_tokens": 0},
        }


def load_script(path: str | Path) -> dict[str, Any]:
    with Path(path).open("r", encoding="utf-8") as fh:
        return json.load(fh)
