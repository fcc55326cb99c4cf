"""Experiment configuration: a flat JSON document with strict validation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from os import PathLike
from typing import Any, Union

from ..channel import dbm_to_watts
from ..errors import DomainError
from ..harvest import EhCircuitModel, shipped_models

__all__ = ["SCHEMES", "ConfigError", "ExperimentConfig", "load_config"]

#: Every scheme a sweep can run, in canonical output order.
SCHEMES = ("op1", "op2", "op1_hisnr", "op2_hisnr", "ops", "otcm", "dps", "oracle")


class ConfigError(DomainError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Monte-Carlo sweep settings.

    ``rate_grid`` holds absolute rates in bps/Hz when ``rate_mode`` is
    ``"absolute"`` and fractions of each channel's maximum rate when it is
    ``"normalized"``. The noise power is converted from dBm once, here, and
    exposed as ``sigma2_w``.
    """

    n: int
    theta: float
    sigma2_dbm: float
    p_t_watts: float
    rate_grid: tuple
    n_channels: int
    seed: int
    tol: float = 1e-4
    rate_mode: str = "absolute"
    schemes: tuple = ("op1",)
    eh_model: str = "powercast_table"
    eh_table_csv: str = ""
    eh_linear_efficiency: float = 0.5
    infeasible_policy: str = "exclude"
    workers: int = 1
    dps_grid_points: int = 101
    oracle_grid_points: int = 401
    sigma2_w: float = field(init=False)

    def __post_init__(self) -> None:
        def check(cond: bool, msg: str) -> None:
            if not cond:
                raise ConfigError(msg)

        check(isinstance(self.n, int) and 1 <= self.n <= 8, f"n must be an integer in 1..8, got {self.n!r}")
        check(_finite(self.theta) and self.theta > 0, "theta must be positive")
        check(_finite(self.sigma2_dbm), "sigma2_dbm must be finite")
        check(_finite(self.p_t_watts) and self.p_t_watts > 0, "p_t_watts must be positive")
        check(isinstance(self.n_channels, int) and self.n_channels >= 1, "n_channels must be a positive integer")
        check(isinstance(self.seed, int), "seed must be an integer")
        check(_finite(self.tol) and self.tol > 0, "tol must be positive")
        check(self.rate_mode in ("absolute", "normalized"), "rate_mode must be 'absolute' or 'normalized'")
        try:
            grid = tuple(float(x) for x in self.rate_grid)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"rate_grid must be a list of numbers ({exc})") from exc
        check(len(grid) > 0, "rate_grid must be nonempty")
        check(all(_finite(x) and x >= 0 for x in grid), "rate_grid entries must be finite and nonnegative")
        if self.rate_mode == "normalized":
            check(all(x <= 1 for x in grid), "normalized rate_grid entries must lie in [0, 1]")
        object.__setattr__(self, "rate_grid", grid)
        schemes = tuple(self.schemes)
        check(len(schemes) > 0, "schemes must be nonempty")
        unknown = set(schemes) - set(SCHEMES)
        check(not unknown, f"unknown schemes {sorted(unknown)}")
        object.__setattr__(self, "schemes", tuple(s for s in SCHEMES if s in schemes))
        check(
            self.eh_model in ("linear", "powercast_table", "powercast_logistic", "table_csv"),
            f"unknown eh_model {self.eh_model!r}",
        )
        check(self.eh_model != "table_csv" or bool(self.eh_table_csv), "eh_table_csv required for table_csv")
        check(
            self.infeasible_policy in ("exclude", "zero"), "infeasible_policy must be 'exclude' or 'zero'"
        )
        check(isinstance(self.workers, int) and self.workers >= 1, "workers must be a positive integer")
        check(isinstance(self.dps_grid_points, int) and self.dps_grid_points >= 11, "dps_grid_points >= 11")
        check(isinstance(self.oracle_grid_points, int) and self.oracle_grid_points >= 2, "oracle_grid_points >= 2")
        object.__setattr__(self, "sigma2_w", dbm_to_watts(self.sigma2_dbm))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        allowed = {f.name for f in fields(cls) if f.init}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        for key, value in data.items():
            if isinstance(value, dict):
                raise ConfigError(f"configuration must be flat; key {key!r} holds an object")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.init}
        out["rate_grid"] = list(self.rate_grid)
        out["schemes"] = list(self.schemes)
        return out

    def harvester(self) -> EhCircuitModel:
        if self.eh_model == "linear":
            return EhCircuitModel.linear(self.eh_linear_efficiency)
        if self.eh_model == "table_csv":
            return EhCircuitModel.from_csv(self.eh_table_csv)
        return shipped_models()[self.eh_model]


def _finite(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def load_config(path: Union[str, PathLike]) -> ExperimentConfig:
    """Parse and validate a JSON configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return ExperimentConfig.from_dict(data)
