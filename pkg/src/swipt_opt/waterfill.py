"""Rate-maximizing waterfilling over the channel eigenmodes."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from .channel import ChannelDecomposition, SystemParams, achievable_rate

__all__ = ["waterfill_rank", "waterfill_allocation", "waterfill_gains", "max_rate"]


def _rank_from_gains(g: np.ndarray, p_t: float, sigma2: float) -> int:
    inv = sigma2 / g
    # Power left after lifting the stronger modes to the noise floor of mode k.
    residual = p_t - (np.arange(g.size) * inv - np.concatenate(([0.0], np.cumsum(inv)[:-1])))
    filled = np.nonzero(residual > 0)[0]
    return int(filled[-1]) + 1 if filled.size else 1


def waterfill_rank(singvals: ArrayLike, p_t: float, sigma2: float) -> int:
    """Number of eigenchannels receiving positive power under waterfilling.

    Parameters
    ----------
    singvals : array_like
        Singular values in descending order.
    p_t : float
        Power budget.
    sigma2 : float
        Noise power.

    Returns
    -------
    int
        Largest ``k`` whose water level, after filling the top ``k`` modes,
        remains strictly above the noise floor of mode ``k``.
    """
    g = np.asarray(singvals, dtype=float) ** 2
    return _rank_from_gains(g, p_t, sigma2)


def waterfill_gains(g: np.ndarray, p_t: float, sigma2: float) -> np.ndarray:
    """Waterfilling allocation expressed directly on power gains."""
    g = np.asarray(g, dtype=float)
    r_w = _rank_from_gains(g, p_t, sigma2)
    inv = sigma2 / g[:r_w]
    level = (p_t + inv.sum()) / r_w
    p = np.zeros_like(g)
    p[:r_w] = level - inv
    return p


def waterfill_allocation(singvals: ArrayLike, p_t: float, sigma2: float) -> np.ndarray:
    """Waterfilling power allocation, zero beyond the filled rank."""
    return waterfill_gains(np.asarray(singvals, dtype=float) ** 2, p_t, sigma2)


def max_rate(dec: ChannelDecomposition, params: SystemParams) -> float:
    """Largest achievable rate, reached with waterfilling and no power splitting."""
    p = waterfill_gains(dec.gains, params.p_t, params.sigma2)
    return achievable_rate(dec, p, 0.0, params.sigma2)
