"""Channel generation, reduced SVD and the elementary link quantities.

Every quantity downstream works on the squared singular values
``g_k = lambda_k**2`` (the eigenchannel power gains) of the channel matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import ArrayLike

from .errors import DegenerateChannelError, DimensionError, DomainError

__all__ = [
    "ChannelMatrix",
    "ChannelDecomposition",
    "SystemParams",
    "PowerAllocation",
    "dbm_to_watts",
    "generate_channel",
    "decompose",
    "received_power",
    "achievable_rate",
    "covariance",
]

#: A power allocation is a 1-D float array with one entry per eigenchannel.
PowerAllocation = np.ndarray

SINGVAL_RTOL = 1e-12


def dbm_to_watts(dbm: float) -> float:
    """Convert a power level in dBm to watts."""
    return 10.0 ** ((float(dbm) - 30.0) / 10.0)


@dataclass(frozen=True)
class ChannelMatrix:
    """Complex ``N_R x N_T`` channel gain matrix.

    Attributes
    ----------
    entries : np.ndarray
        Complex matrix of shape ``(n_r, n_t)``.
    theta : float
        Path-loss amplitude factor the entries were scaled by.
    """

    entries: np.ndarray
    theta: float = 1.0

    def __post_init__(self) -> None:
        h = np.asarray(self.entries, dtype=complex)
        if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] < 1:
            raise DimensionError(f"channel must be a non-empty 2-D matrix, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise DomainError("channel entries must be finite")
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise DomainError(f"theta must be positive, got {self.theta}")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)

    @property
    def n_r(self) -> int:
        return self.entries.shape[0]

    @property
    def n_t(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class ChannelDecomposition:
    """Reduced singular value decomposition ``H = U diag(singvals) V^H``.

    Attributes
    ----------
    U : np.ndarray
        ``(n_r, r)`` matrix with orthonormal columns.
    singvals : np.ndarray
        Strictly positive singular values in descending order.
    V : np.ndarray
        ``(n_t, r)`` matrix with orthonormal columns.
    r : int
        Numerical rank.
    """

    U: np.ndarray
    singvals: np.ndarray
    V: np.ndarray
    r: int

    @property
    def gains(self) -> np.ndarray:
        """Eigenchannel power gains ``singvals**2``."""
        return self.singvals**2

    @property
    def matrix(self) -> np.ndarray:
        """Reconstructed channel matrix."""
        return (self.U * self.singvals) @ self.V.conj().T

    @classmethod
    def from_singvals(cls, singvals: ArrayLike) -> "ChannelDecomposition":
        """Build the decomposition of ``diag(singvals)``.

        Handy for analytic examples where only the eigenchannel gains matter.
        """
        s = np.asarray(singvals, dtype=float)
        return decompose(np.diag(s).astype(complex))


@dataclass(frozen=True)
class SystemParams:
    """Link budget and optimizer settings.

    Attributes
    ----------
    p_t : float
        Transmit power budget in watts.
    sigma2 : float
        Receiver noise power in watts.
    rate_req : float
        Minimum information rate in bps/Hz.
    tol : float
        Search tolerance on the splitting ratio.
    """

    p_t: float
    sigma2: float
    rate_req: float = 0.0
    tol: float = 1e-4

    def __post_init__(self) -> None:
        for name in ("p_t", "sigma2", "tol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and positive, got {value}")
        if not (math.isfinite(self.rate_req) and self.rate_req >= 0):
            raise DomainError(f"rate_req must be finite and nonnegative, got {self.rate_req}")

    def with_rate(self, rate_req: float) -> "SystemParams":
        """Copy of these parameters with a different rate requirement."""
        return SystemParams(self.p_t, self.sigma2, rate_req, self.tol)


def generate_channel(n_r: int, n_t: int, theta: float, seed: int) -> ChannelMatrix:
    """Draw a Rayleigh-fading channel with per-entry variance ``theta**2``.

    Real and imaginary parts are independent standard normals from a PCG64
    generator seeded by ``seed``, scaled by ``theta / sqrt(2)``.
    """
    if int(n_r) != n_r or int(n_t) != n_t or n_r < 1 or n_t < 1:
        raise DimensionError(f"dimensions must be positive integers, got ({n_r}, {n_t})")
    if not (math.isfinite(theta) and theta > 0):
        raise DomainError(f"theta must be positive, got {theta}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((2, int(n_r), int(n_t)))
    return ChannelMatrix(theta * (g[0] + 1j * g[1]) / math.sqrt(2.0), float(theta))


def decompose(h: Union[ChannelMatrix, ArrayLike]) -> ChannelDecomposition:
    """Reduced SVD with relative truncation of negligible singular values.

    Raises
    ------
    DegenerateChannelError
        If the matrix is numerically zero.
    """
    if not isinstance(h, ChannelMatrix):
        h = ChannelMatrix(np.asarray(h, dtype=complex))
    u, s, vh = np.linalg.svd(h.entries, full_matrices=False)
    if s.size == 0 or not s[0] > 0:
        raise DegenerateChannelError("channel matrix is numerically zero")
    r = int(np.count_nonzero(s >= SINGVAL_RTOL * s[0]))
    U = np.ascontiguousarray(u[:, :r])
    V = np.ascontiguousarray(vh[:r, :].conj().T)
    singvals = s[:r].copy()
    for arr in (U, V, singvals):
        arr.setflags(write=False)
    return ChannelDecomposition(U, singvals, V, r)


def _check_alloc(dec: ChannelDecomposition, alloc: ArrayLike) -> np.ndarray:
    p = np.asarray(alloc, dtype=float)
    if p.shape != (dec.r,):
        raise DimensionError(f"allocation must have length {dec.r}, got shape {p.shape}")
    if np.any(p < 0):
        raise DomainError("power allocation entries must be nonnegative")
    return p


def received_power(dec: ChannelDecomposition, alloc: ArrayLike) -> float:
    """Total received RF power ``sum_k p_k lambda_k^2`` (noise excluded)."""
    p = _check_alloc(dec, alloc)
    return float(np.dot(p, dec.gains))


def achievable_rate(dec: ChannelDecomposition, alloc: ArrayLike, rho: float, sigma2: float) -> float:
    """Information rate in bps/Hz when a fraction ``rho`` is split off for harvesting."""
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    p = _check_alloc(dec, alloc)
    snr = (1.0 - rho) * p * dec.gains / sigma2
    return float(np.sum(np.log1p(snr)) / math.log(2.0))


def covariance(dec: ChannelDecomposition, alloc: ArrayLike) -> np.ndarray:
    """Transmit covariance ``V diag(p) V^H`` aligned with the channel eigenmodes."""
    p = _check_alloc(dec, alloc)
    return (dec.V * p) @ dec.V.conj().T
