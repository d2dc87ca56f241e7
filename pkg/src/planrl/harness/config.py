"""Experiment configuration and the key=value config-file format."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Dict, Optional, Tuple

from ..errors import ValidationError
from ..grid.env import FINDTREASURE, MOVEBOX

ABLATION_FULL = "full"
ABLATION_NO_INTRINSIC = "no-intrinsic"
ABLATION_FLAT = "flat"
ABLATIONS = (ABLATION_FULL, ABLATION_NO_INTRINSIC, ABLATION_FLAT)

DEFAULT_EPISODES = {FINDTREASURE: 5000, MOVEBOX: 10000}


def data_path(*parts: str) -> Path:
    return Path(str(resources.files("planrl").joinpath("data", *parts)))


def default_map_path(env: str) -> Path:
    return data_path("maps", f"{env}.map")


def default_knowledge_path(env: str, task: int) -> Path:
    if env == MOVEBOX and task == 0:
        return data_path("knowledge", "movebox_task0.kf")
    return data_path("knowledge", f"{env}.kf")


@dataclass(frozen=True)
class ExperimentConfig:
    env: str = FINDTREASURE
    task: int = 0
    map_path: Optional[str] = None
    knowledge_path: Optional[str] = None
    episodes: Optional[int] = None
    max_steps: Optional[int] = None
    seeds: Tuple[int, ...] = (1,)
    window: int = 100
    ablation: str = ABLATION_FULL
    learner: str = "tabular"
    alpha: float = 0.1
    gamma: float = 0.99
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_frac: float = 0.5
    phi: float = 5.0
    c: float = 0.01
    n_mode: str = "cumulative"
    match_mode: str = "subset"
    tie_break: str = "seeded"
    h_f: str = "unit"
    option_step_budget: Optional[int] = None
    ledger_decay: float = 1.0
    initial_ledger: Optional[str] = None
    out_dir: Optional[str] = None

    def resolved(self) -> "ExperimentConfig":
        """Fill in env-dependent defaults."""
        updates: Dict[str, object] = {}
        if self.map_path is None:
            updates["map_path"] = str(default_map_path(self.env))
        if self.knowledge_path is None:
            updates["knowledge_path"] = str(default_knowledge_path(self.env, self.task))
        if self.episodes is None:
            updates["episodes"] = DEFAULT_EPISODES[self.env]
        return replace(self, **updates) if updates else self

    def validate(self) -> None:
        if self.env not in (FINDTREASURE, MOVEBOX):
            raise ValidationError(f"unknown env {self.env!r}")
        if self.ablation not in ABLATIONS:
            raise ValidationError(f"ablation must be one of {ABLATIONS}")
        if self.episodes is not None and self.episodes <= 0:
            raise ValidationError("episodes must be positive")
        if not self.seeds:
            raise ValidationError("need at least one seed")
        if self.episodes is not None and self.window > self.episodes:
            raise ValidationError("window must not exceed episodes")
        if self.match_mode not in ("subset", "exact"):
            raise ValidationError(f"unknown match_mode {self.match_mode!r}")
        if self.tie_break not in ("lex", "seeded"):
            raise ValidationError(f"unknown tie_break {self.tie_break!r}")
        if not 0.0 < self.ledger_decay <= 1.0:
            raise ValidationError("ledger_decay must be in (0, 1]")
        if self.option_step_budget is not None and self.option_step_budget <= 0:
            raise ValidationError("option_step_budget must be positive")
        if self.h_f not in ("unit", "primitive_count", "critical_path"):
            raise ValidationError(f"unknown h_f {self.h_f!r}")

    def to_json(self) -> str:
        blob = {f.name: getattr(self, f.name) for f in fields(self)}
        blob["seeds"] = list(self.seeds)
        return json.dumps(blob, indent=2, sort_keys=True) + "\n"


_INT_KEYS = {"task", "episodes", "max_steps", "window", "option_step_budget"}
_FLOAT_KEYS = {"alpha", "gamma", "eps_start", "eps_end", "eps_decay_frac", "phi", "c",
               "ledger_decay"}


def parse_config_file(text: str) -> Dict[str, object]:
    """key = value lines; '#' comments; seeds as comma-separated ints."""
    out: Dict[str, object] = {}
    valid = {f.name for f in fields(ExperimentConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in valid:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        if key == "seeds":
            out[key] = tuple(int(s) for s in value.split(","))
        elif key in _INT_KEYS:
            out[key] = int(value)
        elif key in _FLOAT_KEYS:
            out[key] = float(value)
        else:
            out[key] = value
    return out
