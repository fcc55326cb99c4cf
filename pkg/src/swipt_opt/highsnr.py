"""High-SNR approximations of the two optimizers.

When every active eigenchannel operates at high SNR, ``log2(1 + x)`` is
replaced by ``log2(x)``. All eigenchannels then carry positive power and
the active-set recursion disappears.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike

from .channel import ChannelDecomposition, SystemParams, achievable_rate
from .errors import ApproximationInapplicableError, DomainError
from .kkt import normalized_gap
from .regimes import rate_threshold_ideal, rho_eb
from .solver import (
    GssBracket,
    JointSolution,
    Mode,
    _beamforming,
    _Counter,
    _infeasible,
    _Inner,
    _polish,
    _root_log_offset,
    beamforming_threshold,
    gss_maximize,
)
from .waterfill import waterfill_gains

__all__ = ["solve_op1_highsnr", "beta_residual", "beta_logs", "solve_op2_highsnr", "BETA_BRACKET"]

LN2 = math.log(2.0)

#: Search interval for ``beta = nu2 - lambda_1^2``.
BETA_BRACKET = (1e-15, 1.0 - 1e-6)
BETA_LOG_TOL = 1e-12


def _log_geomean(x: np.ndarray) -> float:
    return float(np.mean(np.log(x)))


def _equal_split(dec: ChannelDecomposition, params: SystemParams, rho: float) -> JointSolution:
    p = np.full(dec.r, params.p_t / dec.r)
    return JointSolution(
        Mode.SPATIAL_MULTIPLEXING,
        rho,
        p,
        math.nan,
        math.nan,
        rho * float(np.dot(p, dec.gains)),
        achievable_rate(dec, p, rho, params.sigma2),
        r_s=dec.r,
    )


def solve_op1_highsnr(dec: ChannelDecomposition, params: SystemParams) -> JointSolution:
    """High-SNR solution with uniform power splitting.

    For a fixed ``rho`` the powers are ``mu / (ln2 (nu - rho g_k))`` on all
    ``r`` modes, with ``(mu, nu)`` fixed by the budget and by the
    approximate rate equation ``sum log2((1 - rho) p_k g_k / sigma2) = R``.
    A golden-section search over ``rho`` maximizes the received power. The
    reported ``rate_achieved`` uses the exact rate expression, which always
    exceeds the approximate one.

    Raises
    ------
    ApproximationInapplicableError
        If the approximate rate equation admits no splitting ratio above the
        beamforming one.
    """
    g = dec.gains
    s = dec.singvals
    r = dec.r
    rate = params.rate_req
    p_t, sigma2 = params.p_t, params.sigma2
    p_wf = waterfill_gains(g, p_t, sigma2)
    if rate > achievable_rate(dec, p_wf, 0.0, sigma2):
        return _infeasible(dec)
    if r == 1 or (
        rate <= beamforming_threshold(dec, params) and rate <= rate_threshold_ideal(s[0], p_t, sigma2)
    ):
        return _beamforming(dec, params)
    rho_lb = rho_eb(rate, p_t, s[0], sigma2)
    # equal split maximizes the approximate rate; it fixes the largest usable rho
    log_room = math.log(r * sigma2 / p_t) + rate * LN2 / r - _log_geomean(g)
    rho_ub = -math.expm1(log_room) if log_room < 0 else 0.0
    if g[0] - g[-1] <= 1e-12 * g[0]:
        if rho_ub <= 0:
            raise ApproximationInapplicableError("approximate rate unattainable")
        return _equal_split(dec, params, rho_ub)
    if rho_ub <= rho_lb:
        raise ApproximationInapplicableError(
            f"approximate feasible range of rho is empty ({rho_ub} <= {rho_lb})"
        )

    counter = _Counter()
    memo: dict[float, _Inner] = {}
    log_g = np.log(g)

    def evaluate(rho: float) -> _Inner:
        if rho in memo:
            return memo[rho]
        spread = rho * (g[0] - g)
        log_budget = math.log(p_t * (1.0 - rho) / sigma2)

        def logs(t: float) -> tuple[float, float]:
            d = t + spread
            lhs = log_budget + float(np.mean(log_g - np.log(d)))
            rhs = rate * LN2 / r + math.log(np.sum(1.0 / d))
            return lhs, rhs

        t = _root_log_offset(logs, max(1.0 - rho, 1e-300), counter)
        if t is None:
            raise ApproximationInapplicableError(f"no multiplier root at rho={rho}")
        d = t + spread
        mu = LN2 * p_t / np.sum(1.0 / d)
        p = mu / (LN2 * d)
        memo[rho] = _Inner(rho, r, t, mu, p, rho * float(np.dot(p, g)))
        return memo[rho]

    def slope(inner: _Inner) -> float:
        # derivative of the approximate Lagrangian in rho
        lhs = float(np.dot(inner.powers, g))
        rhs = inner.mu * r / ((1.0 - inner.rho) * LN2)
        return (lhs - rhs) / (abs(rhs) + 1.0)

    _, iterations = gss_maximize(lambda x: evaluate(x).p_re, GssBracket(rho_lb, rho_ub, params.tol))
    best = _polish(evaluate, memo, slope, rho_lb, rho_ub)
    return JointSolution(
        Mode.SPATIAL_MULTIPLEXING,
        best.rho,
        best.powers,
        float(best.mu),
        float(best.rho * g[0] + best.t),
        best.p_re,
        achievable_rate(dec, best.powers, best.rho, sigma2),
        iterations=iterations,
        r_s=r,
        inner_solves=counter.solves,
        inner_evals=counter.evals,
    )


def _beta_weights(beta: float, g: np.ndarray) -> np.ndarray:
    return beta / (beta + (g[0] - g))


def beta_logs(beta: float, g: np.ndarray, p_t: float, sigma2: float, rate_req: float) -> tuple[float, float]:
    """Logs of both sides of the high-SNR ideal-reception equation in ``beta``::

        (P_T / sigma2) (prod w_k g_k)**(1/r) = 2**(R/r) sum w_k,
        w_k = beta / (beta + g_1 - g_k)
    """
    w = _beta_weights(beta, g)
    lhs = math.log(p_t / sigma2) + _log_geomean(w * g)
    rhs = rate_req * LN2 / g.size + math.log(np.sum(w))
    return lhs, rhs


def beta_residual(beta: float, singvals: ArrayLike, p_t: float, sigma2: float, rate_req: float) -> float:
    """Normalized residual of the high-SNR ideal-reception equation.

    ``beta = nu2 - lambda_1^2``; the powers are ``p_k = w_k p_1`` with
    ``p_1 = P_T / sum w_k``.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    g = np.asarray(singvals, dtype=float) ** 2
    return normalized_gap(*beta_logs(beta, g, p_t, sigma2, rate_req))


def solve_op2_highsnr(dec: ChannelDecomposition, params: SystemParams) -> JointSolution:
    """High-SNR solution for the ideal receiver.

    A single bisection on ``log(beta)`` over a fixed interval, so the
    iteration count does not depend on the number of antennas.

    Raises
    ------
    ApproximationInapplicableError
        If the residual does not change sign over the search interval.
    """
    g = dec.gains
    s = dec.singvals
    p_t, sigma2, rate = params.p_t, params.sigma2, params.rate_req
    p_wf = waterfill_gains(g, p_t, sigma2)
    if rate > achievable_rate(dec, p_wf, 0.0, sigma2):
        return _infeasible(dec)
    if rate <= rate_threshold_ideal(s[0], p_t, sigma2):
        p = np.zeros(dec.r)
        p[0] = p_t
        return JointSolution(
            Mode.ENERGY_BEAMFORMING,
            1.0,
            p,
            0.0,
            float(g[0]),
            p_t * float(g[0]),
            achievable_rate(dec, p, 0.0, sigma2),
            r_s=1,
        )

    def gap(x: float) -> float:
        lhs, rhs = beta_logs(math.exp(x), g, p_t, sigma2, rate)
        return lhs - rhs

    lo, hi = math.log(BETA_BRACKET[0]), math.log(BETA_BRACKET[1])
    f_lo, f_hi = gap(lo), gap(hi)
    if not (f_lo < 0 < f_hi):
        raise ApproximationInapplicableError("no sign change of the beta residual in the search interval")
    iterations = 0
    while hi - lo > BETA_LOG_TOL:
        iterations += 1
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    beta = math.exp(0.5 * (lo + hi))
    w = _beta_weights(beta, g)
    p = p_t * w / np.sum(w)
    mu2 = LN2 * p[0] * beta
    return JointSolution(
        Mode.SPATIAL_MULTIPLEXING,
        1.0,
        p,
        float(mu2),
        float(g[0] + beta),
        float(np.dot(p, g)),
        achievable_rate(dec, p, 0.0, sigma2),
        iterations=iterations,
        r_s=dec.r,
    )
