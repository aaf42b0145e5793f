"""Service configuration: TOML or JSON file plus environment overrides."""

from __future__ import annotations

import json
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from .recommender import RecommenderConfig
from .scheduler import OutcomeMode, SchedulerConfig


@dataclass(frozen=True)
class AppConfig:
    data_dir: Path = Path("./data")
    catalog_path: Path = Path("./data/catalog.json")
    admin_token: str = "change-me"
    bind_addr: str = "127.0.0.1:8000"
    generation_latency_ms: int = 0
    queue_capacity: int = 1000
    generator: str = "mock"
    generation_seed: int = 0
    ui_dir: Optional[Path] = None
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    recommender: RecommenderConfig = field(default_factory=RecommenderConfig)
    outcome_mode: OutcomeMode = OutcomeMode.MEAN_LIKE


_ENV_PREFIX = "AIRADIO_"


def _section(doc: Mapping[str, Any], name: str) -> dict[str, Any]:
    value = doc.get(name, {})
    return dict(value) if isinstance(value, Mapping) else {}


def load_config(path: Optional[Path] = None, env: Optional[Mapping[str, str]] = None) -> AppConfig:
    """Build an AppConfig from an optional TOML/JSON file and the environment.

    Environment keys use the AIRADIO_ prefix with dots replaced by double
    underscores, e.g. AIRADIO_SCHEDULER__GAMMA=1.
    """
    doc: dict[str, Any] = {}
    if path is not None:
        raw = Path(path).read_bytes()
        if str(path).endswith(".json"):
            doc = json.loads(raw)
        else:
            doc = tomllib.loads(raw.decode("utf-8"))
    env = env if env is not None else os.environ
    for key, value in env.items():
        if not key.startswith(_ENV_PREFIX):
            continue
        dotted = key[len(_ENV_PREFIX):].lower().split("__")
        target = doc
        for part in dotted[:-1]:
            target = target.setdefault(part, {})
        target[dotted[-1]] = value

    sched = _section(doc, "scheduler")
    rec = _section(doc, "recommender")
    cfg = AppConfig(
        data_dir=Path(doc.get("data_dir", "./data")),
        catalog_path=Path(doc.get("catalog_path", "./data/catalog.json")),
        admin_token=str(doc.get("admin_token", "change-me")),
        bind_addr=str(doc.get("bind_addr", "127.0.0.1:8000")),
        generation_latency_ms=int(doc.get("generation_latency_ms", 0)),
        queue_capacity=int(doc.get("queue_capacity", 1000)),
        generator=str(doc.get("generator", "mock")),
        generation_seed=int(doc.get("generation_seed", 0)),
        ui_dir=Path(doc["ui_dir"]) if doc.get("ui_dir") else None,
        scheduler=SchedulerConfig(
            M=int(sched.get("m", sched.get("M", 64))),
            gamma=int(sched.get("gamma", 8)),
            ridge_lambda=float(sched.get("ridge_lambda", 1.0)),
            min_ratings_for_fit=int(sched.get("min_ratings_for_fit", 30)),
            min_songs_for_fit=int(sched.get("min_songs_for_fit", 10)),
            rng_seed=int(sched["seed"]) if sched.get("seed") is not None else None,
        ),
        recommender=RecommenderConfig(
            B=float(rec.get("b", rec.get("B", 1.0))),
            exponent_clamp=float(rec.get("exponent_clamp", 8.0)),
            distance_floor=float(rec.get("distance_floor", 1e-9)),
        ),
        outcome_mode=OutcomeMode(doc.get("scheduler", {}).get("outcome_mode", "mean_like"))
        if isinstance(doc.get("scheduler"), Mapping)
        else OutcomeMode.MEAN_LIKE,
    )
    return cfg


def with_overrides(cfg: AppConfig, **changes: Any) -> AppConfig:
    return replace(cfg, **changes)
