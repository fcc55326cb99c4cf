"""KKT closed forms and reduced residual systems.

Notation: ``g_k = lambda_k**2``; for the splitting problem the modified
waterfilling denominators are ``d_k = nu - rho * g_k``, and for ideal
reception ``d_k = nu2 - g_k``. Only the ``r_s`` strongest modes are active.

The public functions take the multiplier ``nu`` as in the KKT system. The
solvers work with the offset ``t = nu - rho * g_1`` (or ``beta = nu2 - g_1``)
instead, since near the beamforming regime ``t`` is many orders of magnitude
smaller than ``nu`` and forming ``nu - rho * g_1`` would cancel. The
``*_offset`` helpers below take that offset directly.

Residuals are normalized as ``(LHS - RHS) / (|RHS| + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError

__all__ = [
    "SmKktPoint",
    "power_allocation",
    "mu_from_nu_rho",
    "residual_budget_rate",
    "residual_stationarity_rho",
    "residual_ideal",
    "ideal_mu2_and_powers",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SmKktPoint:
    """KKT point of the spatial-multiplexing regime."""

    rho: float
    mu: float
    nu: float
    r_s: int
    powers: np.ndarray


def normalized_gap(log_lhs: float, log_rhs: float) -> float:
    """``(L - R) / (|R| + 1)`` for positive ``L``, ``R`` given by their logs."""
    delta = log_lhs - log_rhs
    if delta > 700.0:
        return math.inf
    if log_rhs < -700.0:
        return math.exp(log_lhs) - math.exp(log_rhs)
    return math.expm1(delta) / (1.0 + math.exp(-log_rhs))


def _gains(singvals: ArrayLike, r_s: int) -> np.ndarray:
    g = np.asarray(singvals, dtype=float) ** 2
    if not 1 <= r_s <= g.size:
        raise DomainError(f"r_s must lie in [1, {g.size}], got {r_s}")
    return g


def _denominators(nu: float, rho: float, g: np.ndarray, r_s: int) -> np.ndarray:
    d = nu - rho * g[:r_s]
    if np.any(d <= 0):
        raise DomainError("nu must exceed rho * lambda_k^2 for every active mode")
    return d


def split_denominators(t: float, rho: float, g: np.ndarray, r_s: int) -> np.ndarray:
    """``d_k = t + rho (g_1 - g_k)`` for the active modes."""
    return t + rho * (g[0] - g[:r_s])


# ---------------------------------------------------------------------------
# splitting receiver


def power_allocation(
    mu: float, nu: float, rho: float, singvals: ArrayLike, r_s: int, sigma2: float
) -> np.ndarray:
    """Modified waterfilling powers, clamped at zero, zero beyond ``r_s``."""
    if not rho < 1:
        raise DomainError("rho must be below 1")
    g = _gains(singvals, r_s)
    d = _denominators(nu, rho, g, r_s)
    p = np.zeros_like(g)
    p[:r_s] = np.maximum(mu / (LN2 * d) - sigma2 / ((1.0 - rho) * g[:r_s]), 0.0)
    return p


def raw_powers_offset(
    mu: float, t: float, rho: float, g: np.ndarray, r_s: int, sigma2: float
) -> np.ndarray:
    """Unclamped modified waterfilling powers of the active modes."""
    d = split_denominators(t, rho, g, r_s)
    return mu / (LN2 * d) - sigma2 / ((1.0 - rho) * g[:r_s])


def mu_offset(t: float, rho: float, g: np.ndarray, r_s: int, p_t: float, sigma2: float) -> float:
    """Rate multiplier that makes the active powers sum to ``p_t``."""
    d = split_denominators(t, rho, g, r_s)
    return LN2 * (p_t + sigma2 / (1.0 - rho) * np.sum(1.0 / g[:r_s])) / np.sum(1.0 / d)


def mu_from_nu_rho(
    nu: float, rho: float, singvals: ArrayLike, r_s: int, p_t: float, sigma2: float
) -> float:
    """Rate multiplier implied by the power budget for given ``(nu, rho)``."""
    if not rho < 1:
        raise DomainError("rho must be below 1")
    g = _gains(singvals, r_s)
    d = _denominators(nu, rho, g, r_s)
    return LN2 * (p_t + sigma2 / (1.0 - rho) * np.sum(1.0 / g[:r_s])) / np.sum(1.0 / d)


def budget_rate_logs(
    t: float, rho: float, g: np.ndarray, r_s: int, p_t: float, sigma2: float, rate_req: float
) -> tuple[float, float]:
    """Logs of both sides of the combined budget and rate equation.

    The equation equates the budget-implied and the rate-implied rate
    multiplier::

        (P_T (1-rho)/sigma2 + sum 1/g_k) / sum 1/d_k = 2**(R/r_s) / G,
        G = (prod g_k / d_k)**(1/r_s)
    """
    d = split_denominators(t, rho, g, r_s)
    gs = g[:r_s]
    log_lhs = math.log(p_t * (1.0 - rho) / sigma2 + np.sum(1.0 / gs)) - math.log(np.sum(1.0 / d))
    log_rhs = rate_req * LN2 / r_s + float(np.mean(np.log(d)) - np.mean(np.log(gs)))
    return log_lhs, log_rhs


def residual_budget_rate(
    nu: float,
    rho: float,
    singvals: ArrayLike,
    r_s: int,
    p_t: float,
    sigma2: float,
    rate_req: float,
) -> float:
    """Normalized residual of the combined budget and rate equation.

    Negative as ``nu`` approaches ``rho * lambda_1^2`` from above (for
    ``r_s >= 2``) and positive for large ``nu`` whenever the rate is
    attainable with ``r_s`` modes at this ``rho``.
    """
    if not rho < 1:
        raise DomainError("rho must be below 1")
    g = _gains(singvals, r_s)
    _denominators(nu, rho, g, r_s)
    return normalized_gap(*budget_rate_logs(nu - rho * g[0], rho, g, r_s, p_t, sigma2, rate_req))


def stationarity_sides(
    t: float, rho: float, g: np.ndarray, r_s: int, sigma2: float, rate_req: float
) -> tuple[float, float]:
    """Both sides of the stationarity condition in ``rho``.

    Powers come from the rate-implied multiplier. ``LHS - RHS`` has the sign
    of the Lagrangian's derivative in ``rho``, which by the envelope theorem
    is the slope of the optimal received power at fixed ``rho``.
    """
    d = split_denominators(t, rho, g, r_s)
    gs = g[:r_s]
    big_g = math.exp(float(np.mean(np.log(gs) - np.log(d))))
    level = 2.0 ** (rate_req / r_s)
    p = sigma2 / (1.0 - rho) * (level / (d * big_g) - 1.0 / gs)
    if np.any(p <= 0):
        raise DomainError("implied powers are not all positive")
    pg = p * gs
    lhs = (1.0 - rho) * big_g * float(np.sum(pg))
    rhs = level * float(np.sum(pg / (1.0 + (1.0 - rho) * pg / sigma2)))
    return lhs, rhs


def residual_stationarity_rho(
    nu: float, rho: float, singvals: ArrayLike, r_s: int, sigma2: float, rate_req: float
) -> float:
    """Normalized residual of the stationarity condition in ``rho``."""
    if not rho < 1:
        raise DomainError("rho must be below 1")
    g = _gains(singvals, r_s)
    _denominators(nu, rho, g, r_s)
    lhs, rhs = stationarity_sides(nu - rho * g[0], rho, g, r_s, sigma2, rate_req)
    return (lhs - rhs) / (abs(rhs) + 1.0)


# ---------------------------------------------------------------------------
# ideal receiver (no splitting loss)


def ideal_denominators(beta: float, g: np.ndarray, r_s: int) -> np.ndarray:
    """``d_k = beta + g_1 - g_k`` for the active modes."""
    return beta + (g[0] - g[:r_s])


def ideal_logs(
    beta: float, g: np.ndarray, r_s: int, p_t: float, sigma2: float, rate_req: float
) -> tuple[float, float]:
    """Logs of both sides of the ideal-reception equation in ``nu2 = g_1 + beta``::

        (P_T/sigma2 + sum 1/g_k) G = 2**(R/r_s) sum 1/d_k,
        G = (prod g_k / d_k)**(1/r_s)
    """
    d = ideal_denominators(beta, g, r_s)
    gs = g[:r_s]
    log_lhs = math.log(p_t / sigma2 + np.sum(1.0 / gs)) + float(np.mean(np.log(gs) - np.log(d)))
    log_rhs = rate_req * LN2 / r_s + math.log(np.sum(1.0 / d))
    return log_lhs, log_rhs


def residual_ideal(
    nu2: float, singvals: ArrayLike, r_s: int, p_t: float, sigma2: float, rate_req: float
) -> float:
    """Normalized residual of the single ideal-reception equation in ``nu2``."""
    g = _gains(singvals, r_s)
    _denominators(nu2, 1.0, g, r_s)
    return normalized_gap(*ideal_logs(nu2 - g[0], g, r_s, p_t, sigma2, rate_req))


def ideal_mu2_beta(beta: float, g: np.ndarray, r_s: int, p_t: float, sigma2: float) -> tuple[float, np.ndarray]:
    d = ideal_denominators(beta, g, r_s)
    mu2 = LN2 * (p_t + sigma2 * np.sum(1.0 / g[:r_s])) / np.sum(1.0 / d)
    return float(mu2), mu2 / (LN2 * d) - sigma2 / g[:r_s]


def ideal_mu2_and_powers(
    nu2: float, singvals: ArrayLike, r_s: int, p_t: float, sigma2: float
) -> tuple[float, np.ndarray]:
    """Rate multiplier and powers of the ideal-reception solution.

    Returns
    -------
    mu2 : float
        Multiplier fixed by the power budget.
    powers : np.ndarray
        ``mu2 / (ln2 (nu2 - g_k)) - sigma2 / g_k`` on the active modes, zero
        beyond; these sum to ``p_t``.
    """
    g = _gains(singvals, r_s)
    _denominators(nu2, 1.0, g, r_s)
    mu2, active = ideal_mu2_beta(nu2 - g[0], g, r_s, p_t, sigma2)
    p = np.zeros_like(g)
    p[:r_s] = active
    return mu2, p
