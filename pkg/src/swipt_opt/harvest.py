"""RF-to-DC harvesting models.

Each model is a nondecreasing map ``F`` with ``F(0) = 0`` from received RF
power to harvested DC power. Because ``F`` is monotone, maximizing received
power also maximizes harvested power, so the optimizers never need to see
the model.

The bundled table ``powercast_p1110_approx.csv`` is an approximate,
hand-digitized rendition of the trend of a commercial 915 MHz harvester
evaluation board (efficiency peaking near 64 % around +10 dBm input). It is
a plausible illustration, not measured ground truth.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from os import PathLike
from typing import Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import least_squares
from scipy.special import expit

from .errors import DomainError

__all__ = [
    "EhModelKind",
    "EhCircuitModel",
    "harvested_power",
    "implied_efficiency",
    "load_table_csv",
    "shipped_models",
    "POWERCAST_TABLE",
]

POWERCAST_TABLE = "powercast_p1110_approx.csv"


class EhModelKind(str, Enum):
    LINEAR = "Linear"
    LOGISTIC = "LogisticSaturation"
    TABLE = "PiecewiseTable"


@dataclass(frozen=True)
class EhCircuitModel:
    """Harvester transfer characteristic.

    Attributes
    ----------
    kind : EhModelKind
        Model family.
    params : tuple
        ``(eta0,)`` for linear; ``(max_power, steepness, center)`` for the
        logistic model; ``(p_rf, p_dc)`` arrays for a table.

    Use the constructors :meth:`linear`, :meth:`logistic` and :meth:`table`
    rather than building instances directly.
    """

    kind: EhModelKind
    params: tuple

    @classmethod
    def linear(cls, eta0: float) -> "EhCircuitModel":
        if not 0.0 < eta0 <= 1.0:
            raise DomainError(f"efficiency must lie in (0, 1], got {eta0}")
        return cls(EhModelKind.LINEAR, (float(eta0),))

    @classmethod
    def logistic(cls, max_power: float, steepness: float, center: float) -> "EhCircuitModel":
        """Normalized logistic saturation ``M (s(x) - s(0)) / (1 - s(0))``.

        Parameters
        ----------
        max_power : float
            Saturation DC power ``M`` in watts.
        steepness : float
            Slope parameter ``a`` in 1/W.
        center : float
            Inflection point ``b`` in watts.
        """
        if not (max_power > 0 and steepness > 0 and math.isfinite(center)):
            raise DomainError("logistic model needs positive max_power and steepness")
        return cls(EhModelKind.LOGISTIC, (float(max_power), float(steepness), float(center)))

    @classmethod
    def table(cls, p_rf: ArrayLike, p_dc: ArrayLike) -> "EhCircuitModel":
        """Piecewise-linear table, anchored at the origin and flat past the last sample."""
        x = np.asarray(p_rf, dtype=float)
        y = np.asarray(p_dc, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size == 0:
            raise DomainError("table columns must be 1-D and of equal nonzero length")
        if np.any(x < 0) or np.any(np.diff(x) <= 0):
            raise DomainError("p_rf samples must be nonnegative and strictly increasing")
        if np.any(y < 0) or np.any(np.diff(y) < 0):
            raise DomainError("p_dc samples must be nonnegative and nondecreasing")
        if np.any(y > x):
            raise DomainError("harvested power cannot exceed the RF input")
        if x[0] > 0:
            x, y = np.concatenate(([0.0], x)), np.concatenate(([0.0], y))
        elif y[0] != 0:
            raise DomainError("table must map zero input to zero output")
        x.setflags(write=False)
        y.setflags(write=False)
        return cls(EhModelKind.TABLE, (x, y))

    @classmethod
    def from_csv(cls, path: Union[str, PathLike]) -> "EhCircuitModel":
        return cls.table(*load_table_csv(path))

    @classmethod
    def powercast_table(cls) -> "EhCircuitModel":
        """The bundled approximate table."""
        with resources.as_file(resources.files("swipt_opt") / "data" / POWERCAST_TABLE) as path:
            return cls.from_csv(path)

    @classmethod
    def logistic_from_anchors(
        cls, max_power: float, anchor_lo: tuple[float, float], anchor_hi: tuple[float, float]
    ) -> "EhCircuitModel":
        """Logistic model with saturation ``max_power`` through two ``(p_rf, p_dc)`` points."""
        xs = np.array([anchor_lo[0], anchor_hi[0]])
        ys = np.array([anchor_lo[1], anchor_hi[1]])

        def misfit(theta: np.ndarray) -> np.ndarray:
            a, b = math.exp(theta[0]), theta[1] * xs[1]
            model = cls.logistic(max_power, a, b)
            return np.array([harvested_power(x, model) for x in xs]) / ys - 1.0

        start = np.array([math.log(4.0 / xs[1]), 1.0])
        fit = least_squares(misfit, start, xtol=1e-14, ftol=1e-14)
        return cls.logistic(max_power, math.exp(fit.x[0]), fit.x[1] * xs[1])

    @classmethod
    def powercast_logistic(cls) -> "EhCircuitModel":
        """Logistic fit to the bundled table through its +4 dBm and +13 dBm samples.

        The anchors bracket the compression knee, the region a single
        logistic in linear power can follow.
        """
        x, y = cls.powercast_table().params
        lo = int(np.argmin(np.abs(x - 10 ** (-2.6))))
        hi = int(np.argmin(np.abs(x - 10 ** (-1.7))))
        return cls.logistic_from_anchors(float(y[-1]), (x[lo], y[lo]), (x[hi], y[hi]))


def load_table_csv(path: Union[str, PathLike]) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``p_rf_w,p_dc_w`` CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header != ["p_rf_w", "p_dc_w"]:
            raise DomainError(f"{path}: expected header p_rf_w,p_dc_w, got {header}")
        rows = [(float(a), float(b)) for a, b in reader]
    data = np.array(rows, dtype=float).reshape(-1, 2)
    return data[:, 0], data[:, 1]


def _logistic(x, max_power: float, a: float, b: float):
    s0 = expit(-a * b)
    return max_power * (expit(a * (x - b)) - s0) / (1.0 - s0)


def harvested_power(p_re: Union[float, ArrayLike], model: EhCircuitModel):
    """DC power harvested from received RF power ``p_re`` (scalar or array)."""
    x = np.asarray(p_re, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("received power must be nonnegative")
    if model.kind is EhModelKind.LINEAR:
        out = model.params[0] * x
    elif model.kind is EhModelKind.LOGISTIC:
        out = _logistic(x, *model.params)
    else:
        xs, ys = model.params
        out = np.interp(x, xs, ys)
    return float(out) if np.ndim(out) == 0 else out


def implied_efficiency(p_re: Union[float, ArrayLike], model: EhCircuitModel):
    """RF-to-DC efficiency ``F(p_re) / p_re``; undefined at zero input."""
    x = np.asarray(p_re, dtype=float)
    if np.any(x <= 0):
        raise DomainError("efficiency is undefined for nonpositive input power")
    out = np.asarray(harvested_power(x, model)) / x
    return float(out) if np.ndim(out) == 0 else out


def shipped_models() -> dict[str, EhCircuitModel]:
    """Every ready-made model, keyed by the name accepted in experiment configs."""
    return {
        "linear": EhCircuitModel.linear(0.5),
        "powercast_table": EhCircuitModel.powercast_table(),
        "powercast_logistic": EhCircuitModel.powercast_logistic(),
    }
