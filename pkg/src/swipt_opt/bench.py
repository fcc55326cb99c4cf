"""Baseline schemes and brute-force oracles.

* OPS: waterfilling covariance, splitting ratio pushed as high as the rate allows.
* OTCM: splitting ratio pinned at 0.5, covariance optimized.
* DPS: per-antenna splitting ratios searched on a grid.
* A dense grid over ``(rho, p_1)`` for 2x2 channels, used as a global
  optimality check.
"""

from __future__ import annotations

import itertools
import math
from typing import Union

import numpy as np

from .channel import ChannelDecomposition, ChannelMatrix, SystemParams, achievable_rate, decompose
from .errors import DimensionError, DomainError
from .solver import (
    JointSolution,
    Mode,
    rho_upper_bound,
    solve_fixed_rho,
    solve_op1,
)
from .waterfill import waterfill_gains

__all__ = [
    "baseline_ops",
    "baseline_otcm",
    "baseline_dps_grid",
    "weighted_waterfill",
    "oracle_grid_2x2",
]

LN2 = math.log(2.0)
OTCM_RHO = 0.5
DPS_MAX_ANTENNAS = 4
DPS_CHUNK = 20000


def _as_decomposition(h: Union[ChannelMatrix, ChannelDecomposition]) -> ChannelDecomposition:
    return h if isinstance(h, ChannelDecomposition) else decompose(h)


def _infeasible(r: int, **info) -> JointSolution:
    return JointSolution(Mode.INFEASIBLE, 0.0, np.zeros(r), math.nan, math.nan, 0.0, 0.0, info=info)


def baseline_ops(dec: ChannelDecomposition, params: SystemParams) -> JointSolution:
    """Waterfilling covariance with the largest splitting ratio meeting the rate."""
    g = dec.gains
    p = waterfill_gains(g, params.p_t, params.sigma2)
    if params.rate_req > achievable_rate(dec, p, 0.0, params.sigma2):
        return _infeasible(dec.r)
    rho = rho_upper_bound(dec, params)
    r_w = int(np.count_nonzero(p > 0))
    return JointSolution(
        Mode.ENERGY_BEAMFORMING if r_w == 1 else Mode.SPATIAL_MULTIPLEXING,
        rho,
        p,
        math.nan,
        math.nan,
        rho * float(np.dot(p, g)),
        achievable_rate(dec, p, rho, params.sigma2),
        r_s=r_w,
    )


def baseline_otcm(dec: ChannelDecomposition, params: SystemParams) -> JointSolution:
    """Harvest-optimal covariance at the fixed splitting ratio 0.5."""
    g = dec.gains
    rho = OTCM_RHO
    p_wf = waterfill_gains(g, params.p_t, params.sigma2)
    if achievable_rate(dec, p_wf, rho, params.sigma2) < params.rate_req:
        return _infeasible(dec.r)
    eb_rate = math.log1p((1.0 - rho) * params.p_t * g[0] / params.sigma2) / LN2
    if eb_rate >= params.rate_req:
        p = np.zeros(dec.r)
        p[0] = params.p_t
        return JointSolution(
            Mode.ENERGY_BEAMFORMING, rho, p, 0.0, rho * g[0], rho * params.p_t * g[0], eb_rate, r_s=1
        )
    return solve_fixed_rho(dec, params, rho)


def weighted_waterfill(
    a: np.ndarray,
    c: np.ndarray,
    p_t: float,
    sigma2: float,
    rate_req: float,
    iterations: int = 72,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched harvest-optimal power allocation over parallel channels.

    Solves, independently for each row,
    ``max sum a_k p_k`` subject to ``sum log2(1 + c_k p_k / sigma2) >= R``
    and ``sum p_k <= p_t``. The optimum has the form
    ``p_k = (L / (nu - a_k) - sigma2 / c_k)^+``; ``L`` follows from the budget
    and ``nu`` from the rate, located by bisection on ``log(nu - max a)``.

    Parameters
    ----------
    a, c : np.ndarray
        Harvesting weights and information gains, shape ``(K, m)``; ``c > 0``.

    Returns
    -------
    powers : np.ndarray
        ``(K, m)`` allocation; rows that cannot meet the rate are NaN.
    objective : np.ndarray
        ``sum a_k p_k`` per row, ``-inf`` where infeasible.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    c = np.atleast_2d(np.asarray(c, dtype=float))
    k_rows, m = a.shape
    spread = a.max(axis=1, keepdims=True) - a
    inv_c = sigma2 / c

    def allocate(t: np.ndarray) -> np.ndarray:
        d = t[:, None] + spread
        thresholds = inv_c * d
        order = np.argsort(thresholds, axis=1)
        th_sorted = np.take_along_axis(thresholds, order, axis=1)
        inv_d = np.take_along_axis(1.0 / d, order, axis=1)
        ic = np.take_along_axis(inv_c, order, axis=1)
        # the active set is a prefix in threshold order; keep the longest valid one
        level = (p_t + ic[:, 0]) / inv_d[:, 0]
        for j in range(2, m + 1):
            lj = (p_t + ic[:, :j].sum(axis=1)) / inv_d[:, :j].sum(axis=1)
            level = np.where(lj > th_sorted[:, j - 1], lj, level)
        return np.maximum(level[:, None] / d - inv_c, 0.0)

    def rate_of(p: np.ndarray) -> np.ndarray:
        return np.log1p(p * c / sigma2).sum(axis=1) / LN2

    p_wf = np.vstack([_wf_unsorted(row, p_t, sigma2) for row in c])
    feasible = rate_of(p_wf) >= rate_req
    top = np.argmax(a, axis=1)
    p_eb = np.zeros_like(a)
    p_eb[np.arange(k_rows), top] = p_t
    eb_ok = rate_of(p_eb) >= rate_req

    lo = np.full(k_rows, math.log(1e-280))
    hi = np.full(k_rows, math.log(1e8))
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = rate_of(allocate(np.exp(mid))) < rate_req
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    powers = allocate(np.exp(hi))
    powers = np.where(eb_ok[:, None], p_eb, powers)
    powers = np.where(feasible[:, None], powers, np.nan)
    objective = np.where(feasible, np.sum(np.nan_to_num(powers) * a, axis=1), -np.inf)
    return powers, objective


def _wf_unsorted(c: np.ndarray, p_t: float, sigma2: float) -> np.ndarray:
    order = np.argsort(-c)
    p = np.empty_like(c)
    p[order] = waterfill_gains(c[order], p_t, sigma2)
    return p


def _split_geometry(h: np.ndarray, rhos: np.ndarray, sigma2: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenbasis of the information channel for each tuple of split ratios.

    Returns the harvesting weights ``a``, information gains ``c`` and the
    transmit basis ``V`` (shape ``(K, n_t, m)``).
    """
    scale = np.sqrt(1.0 - rhos)[:, :, None]
    _, s, vh = np.linalg.svd(scale * h[None, :, :], full_matrices=False)
    v = np.conj(np.swapaxes(vh, 1, 2))
    hv = h[None, :, :] @ v
    a = np.einsum("kn,knm->km", rhos, np.abs(hv) ** 2)
    return a, s**2, v


def baseline_dps_grid(
    h: Union[ChannelMatrix, np.ndarray],
    params: SystemParams,
    grid_points: int = 101,
    span_octaves: float = 1.0,
) -> JointSolution:
    """Grid search over per-antenna splitting ratios.

    Each antenna's information fraction ``1 - rho_i`` takes values
    ``(1 - rho*) 2**u`` for ``u`` on a uniform grid over
    ``[-span_octaves, span_octaves]`` (capped at 1), centred on the optimal
    uniform ratio ``rho*``. The all-equal tuple at ``u = 0`` is therefore
    always on the grid. For each tuple the covariance is optimized within
    the eigenbasis of the split-scaled information channel, which is exact
    whenever all ratios are equal.
    """
    if not isinstance(h, ChannelMatrix):
        h = ChannelMatrix(np.asarray(h, dtype=complex))
    n_r = h.n_r
    if n_r > DPS_MAX_ANTENNAS:
        raise DimensionError(f"grid search limited to {DPS_MAX_ANTENNAS} receive antennas, got {n_r}")
    if grid_points < 11:
        raise DomainError("grid_points must be at least 11")
    dec = decompose(h)
    ups = solve_op1(dec, params)
    if not ups.feasible:
        return _infeasible(dec.r)
    if grid_points % 2 == 0:
        grid_points += 1
    u = np.linspace(-span_octaves, span_octaves, grid_points)
    info_frac = np.minimum((1.0 - ups.rho) * 2.0**u, 1.0)
    levels = 1.0 - info_frac
    levels[grid_points // 2] = ups.rho

    best_val, best = -math.inf, None
    tuples = itertools.product(range(grid_points), repeat=n_r)
    while True:
        chunk = list(itertools.islice(tuples, DPS_CHUNK))
        if not chunk:
            break
        rhos = levels[np.array(chunk)]
        a, c, v = _split_geometry(h.entries, rhos, params.sigma2)
        keep = c[0] > 0
        powers, obj = weighted_waterfill(a[:, keep], c[:, keep], params.p_t, params.sigma2, params.rate_req)
        i = int(np.argmax(obj))
        if obj[i] > best_val:
            best_val = float(obj[i])
            best = (rhos[i], powers[i], v[i][:, keep], c[i, keep])
    if best is None or not math.isfinite(best_val):
        return _infeasible(dec.r)
    rhos, p, basis, gains = best
    rate = float(np.sum(np.log1p(p * gains / params.sigma2)) / LN2)
    return JointSolution(
        Mode.SPATIAL_MULTIPLEXING if np.count_nonzero(p > 0) > 1 else Mode.ENERGY_BEAMFORMING,
        float(np.mean(rhos)),
        p,
        math.nan,
        math.nan,
        best_val,
        rate,
        iterations=grid_points**n_r,
        r_s=int(np.count_nonzero(p > 0)),
        info={"rhos": [float(x) for x in rhos], "ups_p_re": ups.p_re},
    )


def oracle_grid_2x2(
    h: Union[ChannelMatrix, ChannelDecomposition, np.ndarray],
    params: SystemParams,
    grid_points: int = 401,
) -> JointSolution:
    """Exhaustive search over ``rho`` and ``p_1`` in the channel eigenbasis.

    Both ``rho`` and ``p_1`` (with ``p_2 = P_T - p_1``) run over
    ``grid_points`` uniformly spaced values including the end points.
    """
    if isinstance(h, np.ndarray):
        h = ChannelMatrix(h)
    dec = _as_decomposition(h)
    if dec.r != 2:
        raise DimensionError(f"oracle requires a rank-2 channel, got rank {dec.r}")
    g = dec.gains
    rho = np.linspace(0.0, 1.0, grid_points)[:, None]
    p1 = np.linspace(0.0, params.p_t, grid_points)[None, :]
    p2 = params.p_t - p1
    info_scale = (1.0 - rho) / params.sigma2
    rate = (np.log1p(info_scale * p1 * g[0]) + np.log1p(info_scale * p2 * g[1])) / LN2
    objective = np.where(rate >= params.rate_req, rho * (p1 * g[0] + p2 * g[1]), -np.inf)
    i, j = np.unravel_index(int(np.argmax(objective)), objective.shape)
    info = {"resolution_rho": 1.0 / grid_points, "resolution_p1": params.p_t / grid_points}
    if not math.isfinite(objective[i, j]):
        return _infeasible(2, **info)
    powers = np.array([p1[0, j], p2[0, j]])
    return JointSolution(
        Mode.ENERGY_BEAMFORMING if powers[1] == 0 else Mode.SPATIAL_MULTIPLEXING,
        float(rho[i, 0]),
        powers,
        math.nan,
        math.nan,
        float(objective[i, j]),
        float(rate[i, j]),
        iterations=grid_points * grid_points,
        r_s=int(np.count_nonzero(powers > 0)),
        info=info,
    )
