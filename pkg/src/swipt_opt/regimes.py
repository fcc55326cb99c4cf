"""Energy-beamforming versus spatial-multiplexing regime quantities.

Arguments named ``lambda1``/``lambda2`` are singular values (amplitude
gains); the formulas use their squares.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DomainError, InfeasibleRateError

__all__ = [
    "P_DELTA",
    "EbKktPoint",
    "rho_eb",
    "rho_sm2",
    "rate_threshold",
    "rate_threshold_ideal",
    "eb_kkt_point",
]

LN2 = math.log(2.0)

#: Power parked on the second mode when locating the beamforming threshold.
P_DELTA = 1e-3


@dataclass(frozen=True)
class EbKktPoint:
    """Closed-form KKT point of the energy-beamforming regime."""

    rho_eb: float
    mu_eb: float
    nu_eb: float
    p1: float


def _snr_needed(rate_req: float) -> float:
    # 2**R - 1 without cancellation at small R
    return math.expm1(rate_req * LN2)


def rho_eb(rate_req: float, p_t: float, lambda1: float, sigma2: float) -> float:
    """Largest splitting ratio for which beamforming on mode 1 still meets the rate."""
    if not lambda1 > 0:
        raise DomainError("lambda1 must be positive")
    try:
        frac = _snr_needed(rate_req) * sigma2 / (p_t * lambda1**2)
    except OverflowError:
        return 0.0
    return max(0.0, 1.0 - frac)


def _two_mode_rate(rho: float, a: float, b: float, sigma2: float) -> float:
    return (math.log1p((1.0 - rho) * a / sigma2) + math.log1p((1.0 - rho) * b / sigma2)) / LN2


def rho_sm2(p1: float, p2: float, lambda1: float, lambda2: float, sigma2: float, rate_req: float) -> float:
    """Splitting ratio at which two-stream multiplexing meets the rate exactly.

    Solves ``(1 + x a)(1 + x b) = 2**R`` for ``x = (1 - rho)/sigma2`` with
    ``a = p1 lambda1^2`` and ``b = p2 lambda2^2``, using the cancellation-free
    root of the quadratic. A bisection on the rate equation takes over if
    the closed form misses the target by more than 1e-8. The result always
    meets the rate; when ``1 - rho`` is tiny it is the largest such double
    to within a few ulps.

    Raises
    ------
    InfeasibleRateError
        If even ``rho = 0`` cannot meet the rate.
    """
    if not (p1 > 0 and p2 > 0):
        raise DomainError("p1 and p2 must be positive")
    if not (lambda1 > lambda2 > 0):
        raise DomainError("requires lambda1 > lambda2 > 0")
    if rate_req <= 0:
        return 1.0
    a, b = p1 * lambda1**2, p2 * lambda2**2
    if _two_mode_rate(0.0, a, b, sigma2) < rate_req:
        raise InfeasibleRateError("two-stream rate at rho=0 is below the requirement")
    c = _snr_needed(rate_req)
    disc = math.sqrt((a - b) ** 2 + 4.0 * a * b * (c + 1.0))
    x = 2.0 * c / ((a + b) + disc)
    rho = min(1.0, max(0.0, 1.0 - sigma2 * x))
    if abs(_two_mode_rate(rho, a, b, sigma2) - rate_req) > 1e-8:
        rho = brentq(
            lambda r: _two_mode_rate(r, a, b, sigma2) - rate_req, 0.0, 1.0, xtol=1e-300, rtol=4 * sys.float_info.epsilon
        )
    # near rho = 1 the root is only resolved to a few ulps; step to the feasible side
    while rho > 0.0 and _two_mode_rate(rho, a, b, sigma2) < rate_req:
        rho = math.nextafter(rho, 0.0)
    return rho


def rate_threshold(p1: float, p2: float, lambda1: float, lambda2: float, sigma2: float) -> float:
    """Rate up to which beamforming out-harvests two-stream multiplexing.

    It is the rate at which ``rho_eb * P_T * lambda1^2`` equals
    ``rho_sm2 * (p1 lambda1^2 + p2 lambda2^2)`` with ``P_T = p1 + p2``.
    """
    if not (lambda1 >= lambda2 > 0):
        raise DomainError("requires lambda1 >= lambda2 > 0")
    if not (p1 > 0 and p2 > 0):
        raise DomainError("p1 and p2 must be positive")
    g1, g2 = lambda1**2, lambda2**2
    dg = g1 - g2
    root = math.sqrt(dg * (g1 * p1 + g2 * p2) ** 2 / (g1 * g2 * sigma2 * p1))
    return math.log2(1.0 + p2 * dg / sigma2 + root)


def rate_threshold_ideal(lambda1: float, p_t: float, sigma2: float) -> float:
    """Rate achieved by beamforming with no power split off."""
    if not lambda1 > 0:
        raise DomainError("lambda1 must be positive")
    return math.log1p(p_t * lambda1**2 / sigma2) / LN2


def eb_kkt_point(rate_req: float, p_t: float, lambda1: float, sigma2: float) -> EbKktPoint:
    """Multipliers of the beamforming KKT point.

    ``mu`` prices the rate constraint and ``nu`` the power budget; both
    follow from stationarity in ``rho`` and in the mode-1 power.
    """
    g1 = lambda1**2
    rho = rho_eb(rate_req, p_t, lambda1, sigma2)
    snr = (1.0 - rho) * p_t * g1
    mu = sigma2 * LN2 * (1.0 + snr / sigma2)
    nu = mu * (1.0 - rho) * g1 / (LN2 * (sigma2 + snr)) + rho * g1
    return EbKktPoint(rho_eb=rho, mu_eb=mu, nu_eb=nu, p1=float(p_t))
