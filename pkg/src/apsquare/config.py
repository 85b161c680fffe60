"""Run configuration: a versioned JSON document, validated with path-qualified errors.

Example::

    {"version": 1, "n": 1, "J": 2, "K": 9, "seed": 7,
     "kernel": {"id": "haar"}, "tgrid": "0.00390625:1.189207115002721:45",
     "experiment": {"id": "sandwich", "params": {"trials": 50}},
     "out": "runs/sandwich"}
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n: int = 1
    J: int = 2
    K: int = 9
    kernel: dict = field(default_factory=lambda: {"id": "haar"})
    tgrid: str | None = None
    seed: int | None = None
    experiment: dict = field(default_factory=dict)
    out: str = "apsquare-out"
    version: int = SCHEMA_VERSION

    def validate(self, need_seed: bool = True) -> "RunConfig":
        if self.version != SCHEMA_VERSION:
            raise ConfigError(f"config.version: expected {SCHEMA_VERSION}, got {self.version!r}")
        for key in ("n", "J", "K"):
            if not isinstance(getattr(self, key), int) or isinstance(getattr(self, key), bool):
                raise ConfigError(f"config.{key}: expected an integer")
        if self.n not in (1, 2):
            raise ConfigError(f"config.n: must be 1 or 2, got {self.n}")
        if not self.K > self.J + 4:
            raise ConfigError(f"config.K: need K > J + 4 (got J={self.J}, K={self.K})")
        if not isinstance(self.kernel, dict) or "id" not in self.kernel:
            raise ConfigError("config.kernel.id: missing")
        if need_seed:
            if self.seed is None:
                raise ConfigError("config.seed: missing (required for randomized experiments)")
            if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
                raise ConfigError("config.seed: expected an unsigned 64-bit integer")
        if self.experiment:
            if "id" not in self.experiment:
                raise ConfigError("config.experiment.id: missing")
            if not isinstance(self.experiment.get("params", {}), dict):
                raise ConfigError("config.experiment.params: expected an object")
        if self.tgrid is not None:
            from .cone import TGrid

            try:
                TGrid.parse(self.tgrid)
            except ValueError as exc:
                raise ConfigError(f"config.tgrid: {exc}") from None
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config: expected a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = sorted(set(obj) - known)
        if extra:
            raise ConfigError(f"config.{extra[0]}: unknown key")
        return cls(**obj)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            obj = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(obj)
