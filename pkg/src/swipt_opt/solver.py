"""Global optimizers for the harvest-maximization problem.

Two receiver models are covered:

* ``solve_op1``: uniform power splitting. The optimal received power as a
  function of the splitting ratio is unimodal, so a golden-section search
  over ``rho`` wraps an inner solve that, for fixed ``rho``, finds the
  modified waterfilling allocation meeting the budget and the rate with
  equality.
* ``solve_op2``: ideal reception (no splitting loss), reduced to a single
  root-finding problem in the budget multiplier.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.optimize import bisect, brentq

from . import kkt
from .channel import ChannelDecomposition, SystemParams, achievable_rate
from .errors import DomainError, InfeasibleRateError, NumericalBracketError
from .regimes import P_DELTA, eb_kkt_point, rate_threshold, rate_threshold_ideal, rho_eb
from .waterfill import waterfill_gains

__all__ = [
    "GOLDEN",
    "Mode",
    "JointSolution",
    "GssBracket",
    "gss_maximize",
    "gss_iteration_bound",
    "rho_upper_bound",
    "nu_bracket",
    "beamforming_threshold",
    "solve_fixed_rho",
    "solve_op1",
    "solve_op2",
]

LN2 = math.log(2.0)
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

OFFSET_FLOOR = 1e-250
OFFSET_CAP = 1e10
NU_EPS = 1e-12
EQUAL_GAIN_RTOL = 1e-12


class Mode(str, Enum):
    """Operating mode of a solution."""

    ENERGY_BEAMFORMING = "EnergyBeamforming"
    SPATIAL_MULTIPLEXING = "SpatialMultiplexing"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class JointSolution:
    """Optimal transmit spectrum and splitting ratio.

    Attributes
    ----------
    mode : Mode
        Beamforming, multiplexing, or infeasible.
    rho : float
        Fraction of received power routed to the harvester.
    powers : np.ndarray
        Power per eigenchannel, strongest first.
    mu, nu : float
        Multipliers of the rate and power constraints.
    p_re : float
        Received power available for harvesting, ``rho * sum p_k g_k``.
    rate_achieved : float
        Information rate delivered by the solution.
    iterations : int
        Outer search iterations.
    r_s : int
        Number of eigenchannels carrying power.
    inner_solves : int
        Root-finding invocations of the inner problem.
    inner_evals : int
        Residual evaluations across all inner root finds.
    info : dict
        Scheme-specific extras.
    """

    mode: Mode
    rho: float
    powers: np.ndarray
    mu: float
    nu: float
    p_re: float
    rate_achieved: float
    iterations: int = 0
    r_s: int = 0
    inner_solves: int = 0
    inner_evals: int = 0
    info: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.mode is not Mode.INFEASIBLE

    def to_dict(self) -> dict:
        """JSON-friendly representation (non-finite numbers become ``None``)."""

        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return None
            return x

        out = asdict(self)
        out["mode"] = self.mode.value
        out["powers"] = [float(p) for p in self.powers]
        for key in ("rho", "mu", "nu", "p_re", "rate_achieved"):
            out[key] = clean(float(out[key]))
        out["info"] = {k: clean(v) for k, v in self.info.items()}
        return out


@dataclass(frozen=True)
class GssBracket:
    """Search interval ``[lo, hi]`` with absolute tolerance ``tol``."""

    lo: float
    hi: float
    tol: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise DomainError(f"invalid bracket [{self.lo}, {self.hi}]")
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise DomainError(f"tolerance must be positive, got {self.tol}")


def gss_iteration_bound(tol: float, width: float = 1.0) -> int:
    """Worst-case iteration count of :func:`gss_maximize`."""
    if tol >= width:
        return 1
    return math.ceil(math.log(tol / width) / math.log(0.618)) + 1


def gss_maximize(f: Callable[[float], float], bracket: GssBracket) -> tuple[float, int]:
    """Golden-section search for the maximizer of a unimodal function.

    Returns
    -------
    argmax : float
        The better of the two interior probes once the bracket is narrower
        than ``bracket.tol``.
    iterations : int
        Number of bracket reductions performed.
    """
    a, b = bracket.lo, bracket.hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    iterations = 0
    while b - a > bracket.tol:
        iterations += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c if fc >= fd else d), iterations


def nu_bracket(rho: float, lambda1: float) -> GssBracket:
    """Interval holding the budget multiplier at the optimum for a given ``rho``."""
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"rho must lie in [0, 1), got {rho}")
    lo = rho * lambda1**2
    return GssBracket(lo + NU_EPS, lo + (1.0 - rho), NU_EPS)


def rho_upper_bound(dec: ChannelDecomposition, params: SystemParams) -> float:
    """Largest splitting ratio at which waterfilling still meets the rate.

    Bisection runs on ``log(1 - rho)`` so the ratio is resolved to relative
    precision even when it sits within 1e-6 of 1.
    """
    g = dec.gains
    p = waterfill_gains(g, params.p_t, params.sigma2)
    snr = p * g / params.sigma2
    r_req = params.rate_req
    r_max = float(np.sum(np.log1p(snr)) / LN2)
    if r_req > r_max:
        raise InfeasibleRateError(f"rate {r_req} exceeds the maximum {r_max}")
    if r_req <= 0:
        return 1.0
    if r_req >= r_max:
        return 0.0

    def gap(y: float) -> float:
        return float(np.sum(np.log1p(math.exp(y) * snr)) / LN2) - r_req

    # sum log2(1 + x snr) < x sum snr / ln2, so this end lies below the target
    y_lo = math.log(r_req * LN2 / snr.sum()) - 1.0
    y = bisect(gap, y_lo, 0.0, xtol=1e-14, maxiter=400)
    return -math.expm1(y)


def beamforming_threshold(dec: ChannelDecomposition, params: SystemParams) -> float:
    """Rate at or below which beamforming on the strongest mode is selected."""
    if dec.r < 2:
        return math.inf
    p_delta = min(P_DELTA, 0.5 * params.p_t)
    s = dec.singvals
    return rate_threshold(params.p_t - p_delta, p_delta, s[0], s[1], params.sigma2)


# ---------------------------------------------------------------------------
# helpers shared by the receivers


class _Counter:
    __slots__ = ("solves", "evals")

    def __init__(self) -> None:
        self.solves = 0
        self.evals = 0


def _root_log_offset(
    logs: Callable[[float], tuple[float, float]], start_hi: float, counter: _Counter
) -> Optional[float]:
    """Root of an increasing log-gap in the offset, searched in log space.

    The upper end starts at ``start_hi`` and grows geometrically up to
    ``OFFSET_CAP``. Returns ``None`` when no sign change exists.
    """

    def h(x: float) -> float:
        counter.evals += 1
        lhs, rhs = logs(math.exp(x))
        return lhs - rhs

    x_hi = math.log(start_hi)
    f_hi = h(x_hi)
    while not f_hi > 0:
        if x_hi >= math.log(OFFSET_CAP):
            return None
        x_hi = min(x_hi + math.log(16.0), math.log(OFFSET_CAP))
        f_hi = h(x_hi)
    x_lo = math.log(OFFSET_FLOOR)
    if not h(x_lo) < 0:
        return None
    counter.solves += 1
    evals_before = counter.evals
    x, res = brentq(h, x_lo, x_hi, xtol=1e-14, rtol=1e-15, maxiter=200, full_output=True)
    counter.evals = evals_before + res.function_calls
    return math.exp(x)


def _all_gains_equal(g: np.ndarray, k: int) -> bool:
    return g[0] - g[k - 1] <= EQUAL_GAIN_RTOL * g[0]


def _infeasible(dec: ChannelDecomposition) -> JointSolution:
    return JointSolution(Mode.INFEASIBLE, 0.0, np.zeros(dec.r), math.nan, math.nan, 0.0, 0.0)


def _beamforming(dec: ChannelDecomposition, params: SystemParams, **extra) -> JointSolution:
    p = np.zeros(dec.r)
    p[0] = params.p_t
    point = eb_kkt_point(params.rate_req, params.p_t, dec.singvals[0], params.sigma2)
    return JointSolution(
        mode=Mode.ENERGY_BEAMFORMING,
        rho=point.rho_eb,
        powers=p,
        mu=point.mu_eb,
        nu=point.nu_eb,
        p_re=point.rho_eb * params.p_t * dec.gains[0],
        rate_achieved=achievable_rate(dec, p, point.rho_eb, params.sigma2),
        r_s=1,
        **extra,
    )


def _waterfilling_at(dec: ChannelDecomposition, params: SystemParams, rho: float, **extra) -> JointSolution:
    g = dec.gains
    p = waterfill_gains(g, params.p_t, params.sigma2)
    active = p > 0
    pg = p * g
    # multipliers of the rho = 0 KKT point; undefined for rho > 0
    if rho == 0.0:
        mu = LN2 * pg.sum() / np.sum(pg / (params.sigma2 + pg))
        level = (p + params.sigma2 / g)[0]
        nu = mu / (LN2 * level)
    else:
        mu = nu = math.nan
    return JointSolution(
        mode=Mode.SPATIAL_MULTIPLEXING,
        rho=rho,
        powers=p,
        mu=float(mu),
        nu=float(nu),
        p_re=rho * float(pg.sum()),
        rate_achieved=achievable_rate(dec, p, rho, params.sigma2),
        r_s=int(active.sum()),
        **extra,
    )


# ---------------------------------------------------------------------------
# splitting receiver


@dataclass(frozen=True)
class _Inner:
    rho: float
    r_s: int
    t: float
    mu: float
    powers: np.ndarray
    p_re: float
    beamforming: bool = False


def _inner_at(
    g: np.ndarray,
    rho: float,
    params: SystemParams,
    r_w: int,
    r_start: int,
    counter: _Counter,
) -> Optional[_Inner]:
    """Optimal allocation for a fixed splitting ratio.

    Starting from ``r_start`` active modes, the active set shrinks while any
    power is negative and grows while the first inactive mode would receive
    positive power, never beyond ``r_w``. Returns ``None`` when the active
    set collapses to a single mode.
    """
    p_t, sigma2, rate = params.p_t, params.sigma2, params.rate_req
    r_s = r_start
    tried: dict[int, str] = {}
    accepted: Optional[_Inner] = None
    while True:
        if r_s < 2:
            return accepted

        def logs(t: float, r_s: int = r_s) -> tuple[float, float]:
            return kkt.budget_rate_logs(t, rho, g, r_s, p_t, sigma2, rate)

        t = _root_log_offset(logs, max(1.0 - rho, 1e-300), counter)
        if t is None:
            tried[r_s] = "noroot"
            nxt = r_s + 1 if r_s < r_w else None
        else:
            mu = kkt.mu_offset(t, rho, g, r_s, p_t, sigma2)
            p_active = kkt.raw_powers_offset(mu, t, rho, g, r_s, sigma2)
            if np.all(p_active > 0):
                tried[r_s] = "ok"
                powers = np.zeros_like(g)
                powers[:r_s] = p_active
                accepted = _Inner(rho, r_s, t, mu, powers, rho * float(np.dot(powers, g)))
                nxt = None
                if r_s < r_w and (r_s + 1) not in tried:
                    k = r_s  # index of the first inactive mode
                    d_next = t + rho * (g[0] - g[k])
                    if mu / (LN2 * d_next) - sigma2 / ((1.0 - rho) * g[k]) > 0:
                        nxt = r_s + 1
                if nxt is None:
                    return accepted
            else:
                tried[r_s] = "negative"
                nxt = r_s - 1
        if nxt is None or nxt in tried:
            if accepted is not None:
                return accepted
            raise NumericalBracketError(
                f"no consistent active set at rho={rho!r} (tried {sorted(tried.items())})"
            )
        r_s = nxt


def _slope(inner: _Inner, g: np.ndarray, params: SystemParams) -> float:
    """Normalized derivative of the optimal received power in ``rho``."""
    lhs, rhs = kkt.stationarity_sides(inner.t, inner.rho, g, inner.r_s, params.sigma2, params.rate_req)
    return (lhs - rhs) / (abs(rhs) + 1.0)


def _count_local_maxima(values: np.ndarray) -> int:
    v = np.asarray(values)
    interior = (v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])
    return int(interior.sum()) + int(v[0] > v[1]) + int(v[-1] > v[-2])


def solve_fixed_rho(dec: ChannelDecomposition, params: SystemParams, rho: float) -> JointSolution:
    """Harvest-optimal multiplexing allocation at a pinned splitting ratio.

    The rate and budget constraints are both met with equality.

    Raises
    ------
    InfeasibleRateError
        If waterfilling at this ``rho`` cannot meet the rate.
    NumericalBracketError
        If no active set with at least two modes is consistent.
    """
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"rho must lie in [0, 1), got {rho}")
    g = dec.gains
    p_wf = waterfill_gains(g, params.p_t, params.sigma2)
    if achievable_rate(dec, p_wf, rho, params.sigma2) < params.rate_req:
        raise InfeasibleRateError(f"rate {params.rate_req} unattainable at rho={rho}")
    r_w = int(np.count_nonzero(p_wf > 0))
    if r_w < 2 or _all_gains_equal(g, r_w):
        raise NumericalBracketError("fewer than two distinct active modes")
    counter = _Counter()
    inner = _inner_at(g, rho, params, r_w, r_w, counter)
    if inner is None:
        raise NumericalBracketError(f"active set collapsed to one mode at rho={rho}")
    return _inner_solution(dec, params, inner, 0, counter)


def _inner_solution(
    dec: ChannelDecomposition, params: SystemParams, inner: _Inner, iterations: int, counter: _Counter
) -> JointSolution:
    g = dec.gains
    return JointSolution(
        mode=Mode.SPATIAL_MULTIPLEXING,
        rho=inner.rho,
        powers=inner.powers,
        mu=float(inner.mu),
        nu=float(inner.rho * g[0] + inner.t),
        p_re=inner.p_re,
        rate_achieved=achievable_rate(dec, inner.powers, inner.rho, params.sigma2),
        iterations=iterations,
        r_s=inner.r_s,
        inner_solves=counter.solves,
        inner_evals=counter.evals,
    )


def solve_op1(dec: ChannelDecomposition, params: SystemParams, debug: bool = False) -> JointSolution:
    """Maximize harvestable power with uniform power splitting.

    Parameters
    ----------
    dec : ChannelDecomposition
        Channel eigenstructure.
    params : SystemParams
        Budget, noise, rate requirement and search tolerance.
    debug : bool, optional
        Sample 50 splitting ratios and warn if the received-power profile
        has more than one local maximum.

    Returns
    -------
    JointSolution
        Beamforming when the rate is at or below the switching threshold,
        multiplexing otherwise, or infeasible above the maximum rate.
    """
    g = dec.gains
    s = dec.singvals
    rate = params.rate_req
    p_wf = waterfill_gains(g, params.p_t, params.sigma2)
    r_max = achievable_rate(dec, p_wf, 0.0, params.sigma2)
    if rate > r_max:
        return _infeasible(dec)
    r_w = int(np.count_nonzero(p_wf > 0))
    rho_lb = rho_eb(rate, params.p_t, s[0], params.sigma2)
    if rate <= beamforming_threshold(dec, params) and rate <= rate_threshold_ideal(
        s[0], params.p_t, params.sigma2
    ):
        return _beamforming(dec, params)
    if r_w < 2:
        return _beamforming(dec, params)
    rho_ub = rho_upper_bound(dec, params)
    if _all_gains_equal(g, r_w) or rate >= r_max:
        # every allocation harvests the same; waterfilling admits the largest rho
        return _waterfilling_at(dec, params, rho_ub)
    if rho_ub <= rho_lb:
        return _beamforming(dec, params)

    counter = _Counter()
    memo: dict[float, _Inner] = {}
    warm = {"r_s": r_w}

    def evaluate(rho: float) -> _Inner:
        if rho not in memo:
            inner = _inner_at(g, rho, params, r_w, warm["r_s"], counter)
            if inner is None:
                p = np.zeros_like(g)
                p[0] = params.p_t
                inner = _Inner(rho_lb, 1, math.nan, math.nan, p, rho_lb * params.p_t * g[0], True)
                warm["r_s"] = r_w
            else:
                warm["r_s"] = inner.r_s
            memo[rho] = inner
        return memo[rho]

    _, iterations = gss_maximize(lambda r: evaluate(r).p_re, GssBracket(rho_lb, rho_ub, params.tol))

    best = _polish(evaluate, memo, lambda x: _slope(x, g, params), rho_lb, rho_ub)
    if debug:
        grid = np.linspace(rho_lb, rho_ub, 52)[1:-1]
        profile = [_inner_at(g, r, params, r_w, r_w, _Counter()) for r in grid]
        values = [x.p_re if x is not None else rho_lb * params.p_t * g[0] for x in profile]
        if _count_local_maxima(np.array(values)) > 1:
            warnings.warn("received power is not unimodal in rho on this instance", RuntimeWarning)
    if best.beamforming:
        return _beamforming(
            dec,
            params,
            iterations=iterations,
            inner_solves=counter.solves,
            inner_evals=counter.evals,
        )
    return _inner_solution(dec, params, best, iterations, counter)


def _or_nan(x: Optional[float]) -> float:
    return math.nan if x is None else x


def _polish(
    evaluate: Callable[[float], _Inner],
    memo: dict,
    slope_of: Callable[[_Inner], float],
    rho_lb: float,
    rho_ub: float,
) -> _Inner:
    """Refine the search result to the stationary point in ``rho``.

    The stationarity residual changes sign across the maximizer. When two
    probes straddle it, a bracketed root find pins it down far below the
    search tolerance. When the maximizer lies closer to an end of the
    interval than any probe, extra points are placed geometrically closer
    to that end until the sign flips.
    """
    best = max(memo.values(), key=lambda x: x.p_re)
    if best.beamforming:
        return best

    def slope_at(rho: float) -> Optional[float]:
        try:
            inner = evaluate(rho)
        except NumericalBracketError:
            return None
        return None if inner.beamforming else slope_of(inner)

    probes = sorted((r, slope_at(r)) for r in list(memo))
    probes = [(r, s) for r, s in probes if s is not None]
    if not probes:
        return best
    pair = None
    for (r0, s0), (r1, s1) in zip(probes, probes[1:]):
        if s0 > 0 > s1 and (pair is None or abs(r0 - best.rho) < abs(pair[0] - best.rho)):
            pair = (r0, r1)
    if pair is None:
        if probes[-1][1] > 0:
            start, end, want = probes[-1][0], rho_ub, -1.0
        elif probes[0][1] < 0:
            start, end, want = probes[0][0], rho_lb, 1.0
        else:
            return best
        for k in range(1, 40):
            r = end + (start - end) * 0.25**k
            if r == end:
                break
            sl = slope_at(r)
            if sl is None:
                break
            if sl * want > 0:
                pair = (start, r) if want < 0 else (r, start)
                break
            start = r
        if pair is None:
            return max(memo.values(), key=lambda x: x.p_re)
    try:
        root = brentq(
            lambda r: _or_nan(slope_at(r)),
            pair[0],
            pair[1],
            xtol=1e-16,
            rtol=1e-15,
            maxiter=60,
        )
    except (ValueError, RuntimeError):
        return max(memo.values(), key=lambda x: x.p_re)
    candidate = evaluate(root)
    best = max(memo.values(), key=lambda x: x.p_re)
    if candidate.beamforming or candidate.p_re < best.p_re * (1.0 - 1e-9):
        return best
    return candidate


# ---------------------------------------------------------------------------
# ideal receiver


def solve_op2(dec: ChannelDecomposition, params: SystemParams) -> JointSolution:
    """Maximize received power with an ideal receiver that needs no splitting.

    Energy and information are extracted from the same signal, so the rate
    is evaluated at ``rho = 0`` while all received power counts as harvested.
    The returned ``rho`` is 1 by convention.
    """
    g = dec.gains
    s = dec.singvals
    rate = params.rate_req
    p_wf = waterfill_gains(g, params.p_t, params.sigma2)
    r_max = achievable_rate(dec, p_wf, 0.0, params.sigma2)
    if rate > r_max:
        return _infeasible(dec)
    if rate <= rate_threshold_ideal(s[0], params.p_t, params.sigma2):
        p = np.zeros(dec.r)
        p[0] = params.p_t
        return JointSolution(
            Mode.ENERGY_BEAMFORMING,
            1.0,
            p,
            0.0,
            float(g[0]),
            params.p_t * float(g[0]),
            achievable_rate(dec, p, 0.0, params.sigma2),
            r_s=1,
        )
    r_w = int(np.count_nonzero(p_wf > 0))
    if rate >= r_max or _all_gains_equal(g, r_w):
        return JointSolution(
            Mode.SPATIAL_MULTIPLEXING,
            1.0,
            p_wf,
            math.inf,
            math.inf,
            float(np.dot(p_wf, g)),
            r_max,
            r_s=r_w,
        )
    counter = _Counter()
    for r_s in range(r_w, 1, -1):

        def logs(beta: float, r_s: int = r_s) -> tuple[float, float]:
            return kkt.ideal_logs(beta, g, r_s, params.p_t, params.sigma2, rate)

        beta = _root_log_offset(logs, 1.0, counter)
        if beta is None:
            continue
        mu2, active = kkt.ideal_mu2_beta(beta, g, r_s, params.p_t, params.sigma2)
        if np.all(active > 0):
            p = np.zeros_like(g)
            p[:r_s] = active
            return JointSolution(
                Mode.SPATIAL_MULTIPLEXING,
                1.0,
                p,
                mu2,
                float(g[0] + beta),
                float(np.dot(p, g)),
                achievable_rate(dec, p, 0.0, params.sigma2),
                r_s=r_s,
                inner_solves=counter.solves,
                inner_evals=counter.evals,
            )
    raise NumericalBracketError("no active set admits a root of the ideal-reception equation")
