"""Declarative run configuration: endpoints, seeds, directories, defaults."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .corpus import DecodeParams
from .errors import ParseError
from .inference import EndpointProfile


@dataclass(frozen=True)
class RunConfig:
    """One run's endpoints plus the seed, cache, and output locations."""

    endpoints: Mapping[str, EndpointProfile]
    run_seed: int = 0
    cache_dir: Path = Path("cache")
    output_dir: Path = Path("out")
    judge: str | None = None
    defaults: DecodeParams = field(default_factory=DecodeParams)

    def __post_init__(self) -> None:
        if self.judge is not None and self.judge not in self.endpoints:
            raise ValueError(f"judge endpoint {self.judge!r} is not defined")

    def endpoint(self, name: str) -> EndpointProfile:
        if name not in self.endpoints:
            known = ", ".join(sorted(self.endpoints)) or "none"
            raise KeyError(f"unknown endpoint {name!r} (known: {known})")
        return self.endpoints[name]


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw: dict[str, Any] = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ParseError(f"{path}: cannot read run config: {exc}") from exc
    endpoints: dict[str, EndpointProfile] = {}
    for rec in raw.get("endpoints", []):
        try:
            profile = EndpointProfile.from_dict(rec)
        except (KeyError, ValueError) as exc:
            raise ParseError(f"{path}: bad endpoint record {rec!r}: {exc}") from exc
        if profile.name in endpoints:
            raise ParseError(f"{path}: duplicate endpoint name {profile.name!r}")
        endpoints[profile.name] = profile
    defaults = DecodeParams.from_record(raw["defaults"]) if "defaults" in raw else DecodeParams()
    base = path.parent
    cache_dir = Path(raw.get("cache_dir", "cache"))
    output_dir = Path(raw.get("output_dir", "out"))
    try:
        return RunConfig(
            endpoints=endpoints,
            run_seed=int(raw.get("run_seed", 0)),
            cache_dir=cache_dir if cache_dir.is_absolute() else base / cache_dir,
            output_dir=output_dir if output_dir.is_absolute() else base / output_dir,
            judge=raw.get("judge"),
            defaults=defaults,
        )
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
