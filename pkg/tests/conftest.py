"""Shared fixtures: scripted mock endpoints and the acceptance summary hook."""

from __future__ import annotations

import pytest

from cotmix.inference import EndpointProfile, InferenceClient
from cotmix.mockserver import MockInferenceServer


@pytest.fixture
def mock_server():
    """Factory that starts scripted servers and tears them down afterwards."""
    servers: list[MockInferenceServer] = []

    def start(script: dict | None = None) -> MockInferenceServer:
        server = MockInferenceServer(script or {}).start()
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.stop()


@pytest.fixture
def make_endpoint():
    def build(server: MockInferenceServer, kind: str = "chat", **overrides) -> EndpointProfile:
        fields = {
            "name": overrides.pop("name", f"mock-{kind}"),
            "base_url": server.url,
            "model": overrides.pop("model", f"mock-{kind}-model"),
            "kind": kind,
        }
        fields.update(overrides)
        return EndpointProfile(**fields)

    return build


@pytest.fixture
def client(tmp_path):
    return InferenceClient(cache_dir=tmp_path / "cache", retry_base_s=0.01)


@pytest.fixture
def uncached_client():
    return InferenceClient(cache_dir=None, retry_base_s=0.01)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one pass/fail line per acceptance criterion."""
    outcomes: dict[str, bool] = {}
    for status, passed in (("passed", True), ("failed", False), ("error", False)):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1].split("[")[0]
                outcomes[name] = outcomes.get(name, True) and passed
    if outcomes:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name in sorted(outcomes):
            terminalreporter.write_line(f"{'PASS' if outcomes[name] else 'FAIL'}: {name}")
