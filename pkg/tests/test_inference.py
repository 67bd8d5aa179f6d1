import json
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import pytest

from cotmix.corpus import DecodeParams
from cotmix.errors import CapabilityError, TransportError, WireFormatError
from cotmix.inference import (
    EndpointProfile,
    InferenceClient,
    ScoredSequence,
    chat_request_body,
    embedding_request_body,
    parse_chat_response,
    parse_embedding_response,
    parse_scoring_response,
    request_cache_key,
    scoring_request_body,
    serialize_request,
)

GOLDENS = Path(__file__).parent / "goldens"

GREEDY = DecodeParams(temperature=0.0, max_tokens=64, top_p=1.0)


# -- wire format ---------------------------------------------------------------


def test_chat_request_matches_golden():
    body = chat_request_body(
        "mock-model", "What is 2+2?", DecodeParams(temperature=0.0, max_tokens=16384, top_p=1.0, seed=7)
    )
    assert serialize_request(body) == (GOLDENS / "chat_request.json").read_bytes()


def test_scoring_request_matches_golden():
    body = scoring_request_body("mock-scorer", "Answer: 4", 20)
    assert serialize_request(body) == (GOLDENS / "scoring_request.json").read_bytes()


def test_embedding_request_matches_golden():
    body = embedding_request_body("mock-embed", ["alpha", "beta"])
    assert serialize_request(body) == (GOLDENS / "embedding_request.json").read_bytes()


def test_seed_omitted_from_chat_body_when_unset():
    body = chat_request_body("m", "p", GREEDY)
    assert "seed" not in body


def test_chat_response_parses_losslessly():
    resp = json.loads((GOLDENS / "chat_response.json").read_text())
    result = parse_chat_response(resp)
    assert result.text == "Final Answer: $\\boxed{4}$"
    assert result.completion_tokens == 9


def test_scoring_response_parses_losslessly():
    resp = json.loads((GOLDENS / "scoring_response.json").read_text())
    scored = parse_scoring_response(resp)
    assert scored.tokens == ("Answer: ", "4")
    assert scored.logprobs == (0.0, -0.25)
    assert scored.top_alternatives[1] == (("4", -0.25), ("5", -1.5))


def test_embedding_response_normalizes():
    resp = {"data": [{"index": 0, "embedding": [3.0, 4.0]}]}
    [vec] = parse_embedding_response(resp, expected=1)
    assert vec == [0.6, 0.8]


def test_parse_errors_carry_body_excerpt():
    with pytest.raises(WireFormatError, match="missing fields"):
        parse_chat_response({"choices": []})
    with pytest.raises(CapabilityError, match="scoring-capable"):
        parse_scoring_response({"choices": [{"logprobs": None}]})
    with pytest.raises(WireFormatError, match="dimension mismatch"):
        parse_embedding_response(
            {"data": [{"index": 0, "embedding": [1.0]}, {"index": 1, "embedding": [1.0, 2.0]}]},
            expected=2,
        )


def test_cache_key_distinguishes_decode_params():
    a = request_cache_key("chat", "m", chat_request_body("m", "p", GREEDY))
    b = request_cache_key("chat", "m", chat_request_body("m", "p", DecodeParams(temperature=0.7, max_tokens=64, seed=1)))
    c = request_cache_key("chat", "m", chat_request_body("m", "q", GREEDY))
    assert len({a, b, c}) == 3


# -- endpoint profile ----------------------------------------------------------


def test_endpoint_profile_validation():
    with pytest.raises(ValueError, match="base_url"):
        EndpointProfile(name="x", base_url="not-a-url", model="m", kind="chat")
    with pytest.raises(ValueError, match="kind"):
        EndpointProfile(name="x", base_url="http://h", model="m", kind="grpc")
    with pytest.raises(ValueError, match="max_in_flight"):
        EndpointProfile(name="x", base_url="http://h", model="m", kind="chat", max_in_flight=0)


def test_scored_sequence_validation():
    with pytest.raises(ValueError, match="parallel"):
        ScoredSequence(tokens=("a",), logprobs=(), top_alternatives=())
    with pytest.raises(ValueError, match="positive"):
        ScoredSequence(tokens=("a",), logprobs=(0.5,), top_alternatives=((),))
    with pytest.raises(ValueError, match="descending"):
        ScoredSequence(tokens=("a",), logprobs=(-1.0,), top_alternatives=((("x", -2.0), ("y", -1.0)),))
    scored = ScoredSequence.from_parts(["a"], [-1.0], [{"x": -2.0, "y": -1.0}])
    assert scored.top_alternatives[0] == (("y", -1.0), ("x", -2.0))


# -- chat against the mock server ------------------------------------------------


def test_chat_returns_scripted_text_and_usage(mock_server, make_endpoint, client):
    server = mock_server({"chat_default": {"response": "hello there", "completion_tokens": 42}})
    endpoint = make_endpoint(server)
    result = client.chat(endpoint, "hi", GREEDY)
    assert result.text == "hello there"
    assert result.completion_tokens == 42


def test_greedy_chat_repeat_served_from_cache(mock_server, make_endpoint, client):
    server = mock_server({"chat_default": {"response": "cached"}})
    endpoint = make_endpoint(server)
    first = client.chat(endpoint, "prompt", GREEDY)
    second = client.chat(endpoint, "prompt", GREEDY)
    assert first == second
    assert server.request_count == 1
    assert client.cache_hits == 1


def test_sampled_chat_without_seed_bypasses_cache(mock_server, make_endpoint, client):
    server = mock_server({"chat_default": {"response": "sampled"}})
    endpoint = make_endpoint(server)
    decode = DecodeParams(temperature=0.7, max_tokens=64)
    client.chat(endpoint, "prompt", decode)
    client.chat(endpoint, "prompt", decode)
    assert server.request_count == 2


def test_sampled_chat_with_seed_is_cacheable(mock_server, make_endpoint, client):
    server = mock_server({"chat_default": {"response": "sampled"}})
    endpoint = make_endpoint(server)
    decode = DecodeParams(temperature=0.7, max_tokens=64, seed=11)
    client.chat(endpoint, "prompt", decode)
    client.chat(endpoint, "prompt", decode)
    assert server.request_count == 1


def test_cached_success_survives_failing_server(mock_server, make_endpoint, tmp_path):
    cache_dir = tmp_path / "cache"
    good = mock_server({"chat_default": {"response": "ok"}})
    client = InferenceClient(cache_dir=cache_dir, retry_base_s=0.01)
    result = client.chat(make_endpoint(good), "prompt", GREEDY)
    bad = mock_server({"chat": [{"match": {}, "status": 500}]})
    replay = client.chat(make_endpoint(bad), "prompt", GREEDY)
    assert replay == result
    assert bad.request_count == 0


def test_retry_on_5xx_then_success(mock_server, make_endpoint, client):
    server = mock_server(
        {
            "chat": [{"match": {}, "status": 500, "times": 2}],
            "chat_default": {"response": "finally"},
        }
    )
    endpoint = make_endpoint(server)
    assert client.chat(endpoint, "p", GREEDY).text == "finally"
    assert server.request_count == 3


def test_retry_exhaustion_raises_transport_error(mock_server, make_endpoint, client):
    server = mock_server({"chat": [{"match": {}, "status": 503}]})
    endpoint = make_endpoint(server)
    with pytest.raises(TransportError, match="4 attempts"):
        client.chat(endpoint, "p", GREEDY)
    assert server.request_count == 4


def test_429_is_retried(mock_server, make_endpoint, client):
    server = mock_server(
        {
            "chat": [{"match": {}, "status": 429, "times": 1}],
            "chat_default": {"response": "after backoff"},
        }
    )
    assert client.chat(make_endpoint(server), "p", GREEDY).text == "after backoff"


def test_max_in_flight_enforced(mock_server, make_endpoint, uncached_client):
    server = mock_server({"chat_default": {"response": "slow", "delay_s": 0.05}})
    endpoint = make_endpoint(server, max_in_flight=3)
    with ThreadPoolExecutor(max_workers=12) as pool:
        list(pool.map(lambda i: uncached_client.chat(endpoint, f"p{i}", GREEDY), range(12)))
    assert server.max_concurrent <= 3
    assert server.max_concurrent >= 2


def test_kind_mismatch_rejected(mock_server, make_endpoint, client):
    server = mock_server({})
    chat_endpoint = make_endpoint(server, kind="chat")
    with pytest.raises(CapabilityError):
        client.score_sequence(chat_endpoint, "text")
    with pytest.raises(CapabilityError):
        client.embed(chat_endpoint, ["text"])
    scoring_endpoint = make_endpoint(server, kind="completion_scoring")
    with pytest.raises(CapabilityError):
        client.chat(scoring_endpoint, "p", GREEDY)


def test_auth_header_from_env(mock_server, make_endpoint, client, monkeypatch):
    monkeypatch.setenv("MOCK_API_KEY", "sk-test-123")
    server = mock_server({"chat_default": {"response": "ok"}})
    endpoint = make_endpoint(server, api_key_env="MOCK_API_KEY")
    client.chat(endpoint, "p", GREEDY)
    assert server.request_log[0]["authorization"] == "Bearer sk-test-123"


# -- scoring ---------------------------------------------------------------------


def test_score_sequence_shapes_and_determinism(mock_server, make_endpoint, client):
    server = mock_server({})
    endpoint = make_endpoint(server, kind="completion_scoring")
    text = "one two three four"
    first = client.score_sequence(endpoint, text, k=5)
    assert len(first) == 4
    assert "".join(first.tokens) == text
    second = client.score_sequence(endpoint, text, k=5)
    assert first == second
    assert server.request_count == 1


def test_score_sequence_uniform_logprob_rule(mock_server, make_endpoint, client):
    ln2 = -math.log(2)
    server = mock_server(
        {
            "scoring": [
                {
                    "match": {"text": "^abc$"},
                    "tokens": ["a", "b", "c"],
                    "token_logprobs": [ln2, ln2, ln2],
                    "top_logprobs": [{"a": ln2}, {"b": ln2}, {"c": ln2}],
                }
            ]
        }
    )
    endpoint = make_endpoint(server, kind="completion_scoring")
    scored = client.score_sequence(endpoint, "abc", k=1)
    assert all(lp == pytest.approx(-0.6931471805599453) for lp in scored.logprobs)


def test_score_sequence_capability_error(mock_server, make_endpoint, client):
    server = mock_server({"scoring": [{"match": {}, "omit_logprobs": True}]})
    endpoint = make_endpoint(server, kind="completion_scoring")
    with pytest.raises(CapabilityError, match="scoring-capable"):
        client.score_sequence(endpoint, "text")


# -- embeddings --------------------------------------------------------------------


def test_embed_unit_norm_and_order(mock_server, make_endpoint, client):
    server = mock_server({})
    endpoint = make_endpoint(server, kind="embedding")
    vectors = client.embed(endpoint, ["alpha", "beta", "gamma"])
    assert len(vectors) == 3
    for v in vectors:
        assert math.sqrt(sum(x * x for x in v)) == pytest.approx(1.0, abs=1e-9)
    again = client.embed(endpoint, ["alpha", "beta", "gamma"])
    assert vectors == again


def test_embed_identical_texts_identical_vectors(mock_server, make_endpoint, client):
    server = mock_server({})
    endpoint = make_endpoint(server, kind="embedding")
    a, b = client.embed(endpoint, ["same text", "same text"])
    assert a == b


def test_embed_dimension_mismatch(mock_server, make_endpoint, client):
    server = mock_server(
        {
            "embeddings": [
                {"match": {"text": "^short$"}, "vector": [1.0, 0.0]},
                {"match": {"text": "^long$"}, "vector": [1.0, 0.0, 0.0]},
            ]
        }
    )
    endpoint = make_endpoint(server, kind="embedding")
    with pytest.raises(WireFormatError, match="dimension mismatch"):
        client.embed(endpoint, ["short", "long"])
