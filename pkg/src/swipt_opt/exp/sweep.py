"""Monte-Carlo sweeps over random channels and their aggregation."""

from __future__ import annotations

import math
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from ..bench import baseline_dps_grid, baseline_ops, baseline_otcm, oracle_grid_2x2
from ..channel import ChannelDecomposition, ChannelMatrix, SystemParams, decompose, generate_channel
from ..errors import SwiptError
from ..harvest import EhCircuitModel, harvested_power
from ..highsnr import solve_op1_highsnr, solve_op2_highsnr
from ..solver import JointSolution, Mode, solve_op1, solve_op2
from ..waterfill import max_rate
from .config import SCHEMES, ExperimentConfig

__all__ = [
    "TradeoffRecord",
    "SummaryRow",
    "solve_scheme",
    "channel_records",
    "run_sweep",
    "summarize",
    "percentage_gain",
    "worker_count",
]

INFEASIBLE = Mode.INFEASIBLE.value


@dataclass(frozen=True)
class TradeoffRecord:
    """One solved (scheme, channel, rate) point.

    ``rate_index`` locates ``rate_req`` in the configured grid; it comes last
    so the leading columns keep their documented order.
    """

    scheme: str
    channel_index: int
    rate_req: float
    p_re: float
    p_h: float
    rho: float
    mode: str
    r_s: int
    iterations: int
    rate_index: int = 0

    @property
    def failed(self) -> bool:
        return self.mode.startswith("Error:")

    @property
    def infeasible(self) -> bool:
        return self.mode == INFEASIBLE


@dataclass(frozen=True)
class SummaryRow:
    """Statistics of one (scheme, rate point) across channels."""

    scheme: str
    rate_index: int
    rate_req_mean: float
    count: int
    p_re_mean: float
    p_re_std: float
    p_h_mean: float
    p_h_std: float
    rho_mean: float
    rho_std: float
    gain_over_ops_pct: float
    gain_over_otcm_pct: float


def solve_scheme(
    scheme: str,
    h: ChannelMatrix,
    dec: ChannelDecomposition,
    params: SystemParams,
    dps_grid_points: int = 101,
    oracle_grid_points: int = 401,
) -> JointSolution:
    """Run one named scheme on one channel."""
    if scheme == "op1":
        return solve_op1(dec, params)
    if scheme == "op2":
        return solve_op2(dec, params)
    if scheme == "op1_hisnr":
        return solve_op1_highsnr(dec, params)
    if scheme == "op2_hisnr":
        return solve_op2_highsnr(dec, params)
    if scheme == "ops":
        return baseline_ops(dec, params)
    if scheme == "otcm":
        return baseline_otcm(dec, params)
    if scheme == "dps":
        return baseline_dps_grid(h, params, dps_grid_points)
    if scheme == "oracle":
        return oracle_grid_2x2(dec, params, oracle_grid_points)
    raise ValueError(f"unknown scheme {scheme!r}")


def channel_records(config: ExperimentConfig, index: int, model: Optional[EhCircuitModel] = None) -> list[TradeoffRecord]:
    """All records of one channel draw, in (rate, scheme) order."""
    model = model or config.harvester()
    h = generate_channel(config.n, config.n, config.theta, config.seed + index)
    dec = decompose(h)
    base = SystemParams(config.p_t_watts, config.sigma2_w, 0.0, config.tol)
    scale = max_rate(dec, base) if config.rate_mode == "normalized" else 1.0
    out = []
    for rate_index, value in enumerate(config.rate_grid):
        params = base.with_rate(value * scale)
        for scheme in config.schemes:
            try:
                sol = solve_scheme(scheme, h, dec, params, config.dps_grid_points, config.oracle_grid_points)
            except SwiptError as exc:
                out.append(
                    TradeoffRecord(
                        scheme, index, params.rate_req, math.nan, math.nan, math.nan,
                        f"Error:{type(exc).__name__}", 0, 0, rate_index,
                    )
                )
                continue
            out.append(
                TradeoffRecord(
                    scheme,
                    index,
                    params.rate_req,
                    float(sol.p_re),
                    float(harvested_power(sol.p_re, model)),
                    float(sol.rho),
                    sol.mode.value,
                    int(sol.r_s),
                    int(sol.iterations),
                    rate_index,
                )
            )
    return out


def worker_count(requested: int) -> int:
    """Requested workers, capped by ``SWIPT_OPT_THREADS`` when set."""
    cap = os.environ.get("SWIPT_OPT_THREADS")
    if cap:
        try:
            return max(1, min(requested, int(cap)))
        except ValueError:
            pass
    return max(1, requested)


def _job(args: tuple[ExperimentConfig, int]) -> list[TradeoffRecord]:
    return channel_records(*args)


def run_sweep(config: ExperimentConfig) -> Iterator[TradeoffRecord]:
    """Solve every (channel, rate, scheme) point of a configuration.

    Channel ``i`` is drawn with seed ``config.seed + i``. Output is ordered
    by channel, then rate point, then scheme, whatever the worker count.
    """
    workers = worker_count(config.workers)
    jobs = [(config, i) for i in range(config.n_channels)]
    if workers == 1:
        model = config.harvester()
        for i in range(config.n_channels):
            yield from channel_records(config, i, model)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for batch in pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))):
            yield from batch


def _usable(records: Iterable[TradeoffRecord], policy: str) -> list[TradeoffRecord]:
    keep = []
    for rec in records:
        if rec.failed:
            continue
        if rec.infeasible:
            if policy == "exclude":
                continue
            rec = replace(rec, p_re=0.0, p_h=0.0, rho=0.0)
        keep.append(rec)
    return keep


def percentage_gain(
    records: Iterable[TradeoffRecord],
    scheme: str,
    baseline: str,
    rate_indices: Optional[Sequence[int]] = None,
    policy: str = "exclude",
) -> float:
    """Percentage by which ``scheme`` out-harvests ``baseline`` on average.

    Only (channel, rate) points where both schemes produced a usable record
    are compared, so each pair shares the same draws.
    """
    by_key: dict[tuple, dict[str, float]] = defaultdict(dict)
    for rec in _usable(records, policy):
        if rate_indices is not None and rec.rate_index not in rate_indices:
            continue
        if rec.scheme in (scheme, baseline):
            by_key[(rec.channel_index, rec.rate_index)][rec.scheme] = rec.p_re
    pairs = [(v[scheme], v[baseline]) for v in by_key.values() if scheme in v and baseline in v]
    if not pairs:
        return math.nan
    a, b = np.array(pairs).T
    if b.sum() <= 0:
        return math.inf if a.sum() > 0 else math.nan
    return 100.0 * (a.sum() / b.sum() - 1.0)


def summarize(records: Iterable[TradeoffRecord], infeasible_policy: str = "exclude") -> list[SummaryRow]:
    """Mean and standard deviation per (scheme, rate point).

    Failed solves are always dropped; infeasible points are dropped or
    counted as zero according to ``infeasible_policy``. The gain columns are
    filled on ``op1`` rows only.
    """
    records = list(records)
    groups: dict[tuple[str, int], list[TradeoffRecord]] = defaultdict(list)
    for rec in _usable(records, infeasible_policy):
        groups[(rec.scheme, rec.rate_index)].append(rec)
    order = {s: i for i, s in enumerate(SCHEMES)}
    rows = []
    for (scheme, rate_index) in sorted(groups, key=lambda k: (order.get(k[0], len(order)), k[0], k[1])):
        grp = groups[(scheme, rate_index)]
        p_re = np.array([r.p_re for r in grp])
        p_h = np.array([r.p_h for r in grp])
        rho = np.array([r.rho for r in grp])
        gains = [math.nan, math.nan]
        if scheme == "op1":
            gains = [
                percentage_gain(records, "op1", base, [rate_index], infeasible_policy) for base in ("ops", "otcm")
            ]
        rows.append(
            SummaryRow(
                scheme,
                rate_index,
                float(np.mean([r.rate_req for r in grp])),
                len(grp),
                float(p_re.mean()),
                float(p_re.std()),
                float(p_h.mean()),
                float(p_h.std()),
                float(rho.mean()),
                float(rho.std()),
                float(gains[0]),
                float(gains[1]),
            )
        )
    return rows
