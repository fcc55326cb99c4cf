import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import eigen_covariance, logdet_rate, trace_received
from swipt_opt.channel import (
    ChannelDecomposition,
    ChannelMatrix,
    SystemParams,
    achievable_rate,
    covariance,
    dbm_to_watts,
    decompose,
    generate_channel,
    received_power,
)
from swipt_opt.errors import DegenerateChannelError, DimensionError, DomainError


class TestGenerateChannel:
    def test_zero_theta_rejected(self):
        with pytest.raises(DomainError):
            generate_channel(1, 1, 0.0, 0)

    @pytest.mark.parametrize("dims", [(0, 2), (2, 0), (-1, 1)])
    def test_bad_dimensions(self, dims):
        with pytest.raises(DimensionError):
            generate_channel(*dims, 0.1, 0)

    def test_deterministic(self):
        a = generate_channel(2, 2, 0.1, 7)
        b = generate_channel(2, 2, 0.1, 7)
        np.testing.assert_array_equal(a.entries, b.entries)

    def test_different_seeds_differ(self):
        assert not np.array_equal(generate_channel(2, 2, 0.1, 7).entries, generate_channel(2, 2, 0.1, 8).entries)

    def test_entry_variance(self):
        # 4x4 x 6250 draws = 1e5 entries; E|h|^2 = theta^2
        samples = np.concatenate([generate_channel(4, 4, 0.05, 3 + k).entries.ravel() for k in range(6250)])
        assert np.mean(np.abs(samples) ** 2) == pytest.approx(0.0025, rel=0.05)
        assert np.var(samples.real) == pytest.approx(0.0025 / 2, rel=0.05)

    def test_shape_and_theta(self):
        h = generate_channel(3, 2, 0.2, 1)
        assert (h.n_r, h.n_t) == (3, 2)
        assert h.theta == 0.2

    def test_entries_read_only(self):
        h = generate_channel(2, 2, 0.1, 1)
        with pytest.raises(ValueError):
            h.entries[0, 0] = 0


class TestChannelMatrix:
    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            ChannelMatrix(np.array([[np.nan, 0], [0, 1]]))

    def test_rejects_vector(self):
        with pytest.raises(DimensionError):
            ChannelMatrix(np.ones(3))


class TestDecompose:
    def test_identity(self):
        dec = decompose(np.eye(2))
        np.testing.assert_allclose(dec.singvals, [1.0, 1.0])
        assert dec.r == 2

    def test_rank_deficient(self):
        dec = decompose(np.diag([3.0, 0.0]))
        assert dec.r == 1
        np.testing.assert_allclose(dec.singvals, [3.0])

    def test_tiny_singular_value_truncated(self):
        dec = decompose(np.diag([1.0, 1e-13]))
        assert dec.r == 1

    def test_zero_matrix(self):
        with pytest.raises(DegenerateChannelError):
            decompose(np.zeros((2, 2)))

    @pytest.mark.parametrize("n_r,n_t", [(2, 2), (4, 4), (2, 3), (3, 2)])
    def test_invariants(self, n_r, n_t):
        h = generate_channel(n_r, n_t, 0.1, 7)
        dec = decompose(h)
        assert dec.r == min(n_r, n_t)
        np.testing.assert_allclose(dec.U.conj().T @ dec.U, np.eye(dec.r), atol=1e-10)
        np.testing.assert_allclose(dec.V.conj().T @ dec.V, np.eye(dec.r), atol=1e-10)
        assert np.all(np.diff(dec.singvals) <= 0) and dec.singvals[-1] > 0
        np.testing.assert_allclose(dec.matrix, h.entries, atol=1e-9)

    def test_from_singvals(self):
        dec = ChannelDecomposition.from_singvals([2.0, 0.5])
        np.testing.assert_allclose(dec.gains, [4.0, 0.25])


class TestReceivedPower:
    def test_equal_modes(self):
        assert received_power(decompose(np.eye(2)), [1.0, 1.0]) == pytest.approx(2.0)

    def test_beamforming(self):
        dec = ChannelDecomposition.from_singvals([2.0, 1.0])
        assert received_power(dec, [10.0, 0.0]) == pytest.approx(40.0)

    def test_negative_power(self):
        with pytest.raises(DomainError):
            received_power(decompose(np.eye(2)), [1.0, -0.1])

    def test_wrong_length(self):
        with pytest.raises(DimensionError):
            received_power(decompose(np.eye(2)), [1.0])

    @pytest.mark.parametrize("seed", range(5))
    def test_trace_oracle(self, seed):
        h = generate_channel(2, 2, 0.1, seed)
        dec = decompose(h)
        p = np.array([3.0, 7.0])
        expected = trace_received(h.entries, eigen_covariance(dec.V, p))
        assert received_power(dec, p) == pytest.approx(expected, rel=1e-10)

    def test_covariance_matches(self):
        h = generate_channel(3, 3, 0.1, 2)
        dec = decompose(h)
        p = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(covariance(dec, p), eigen_covariance(dec.V, p), atol=1e-14)


class TestAchievableRate:
    def test_full_split_gives_zero(self):
        dec = generate_channel(2, 2, 0.1, 1)
        assert achievable_rate(decompose(dec), [5.0, 5.0], 1.0, 1e-10) == 0.0

    def test_inversion(self):
        sigma2, rate = 1e-3, 7.5
        dec = ChannelDecomposition.from_singvals([1.0])
        assert achievable_rate(dec, [sigma2 * (2**rate - 1)], 0.0, sigma2) == pytest.approx(rate, abs=1e-12)

    @pytest.mark.parametrize("rho", [-0.1, 1.5])
    def test_rho_outside_unit_interval(self, rho):
        with pytest.raises(DomainError):
            achievable_rate(decompose(np.eye(2)), [1.0, 1.0], rho, 1.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_logdet_oracle(self, seed):
        h = generate_channel(2, 2, 0.1, seed)
        dec = decompose(h)
        p = np.array([6.0, 4.0])
        expected = logdet_rate(h.entries, eigen_covariance(dec.V, p), 0.3, 1e-10)
        assert achievable_rate(dec, p, 0.3, 1e-10) == pytest.approx(expected, abs=1e-9)


class TestSystemParams:
    @pytest.mark.parametrize("kwargs", [dict(p_t=0, sigma2=1), dict(p_t=1, sigma2=-1), dict(p_t=1, sigma2=1, tol=0)])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            SystemParams(**kwargs)

    def test_negative_rate(self):
        with pytest.raises(DomainError):
            SystemParams(1.0, 1.0, -1.0)

    def test_with_rate(self):
        p = SystemParams(10.0, 1e-10, 0.0, 1e-3).with_rate(5.0)
        assert (p.p_t, p.sigma2, p.rate_req, p.tol) == (10.0, 1e-10, 5.0, 1e-3)


@pytest.mark.parametrize("dbm,watts", [(30.0, 1.0), (0.0, 1e-3), (-70.0, 1e-10), (-100.0, 1e-13)])
def test_dbm_to_watts(dbm, watts):
    assert dbm_to_watts(dbm) == pytest.approx(watts, rel=1e-12)


seeds = st.integers(min_value=0, max_value=2**31)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, r1=st.floats(0.0, 0.99), r2=st.floats(0.0, 0.99))
def test_rate_decreasing_in_rho(seed, r1, r2):
    dec = decompose(generate_channel(2, 2, 0.1, seed))
    p = [6.0, 4.0]
    lo, hi = sorted((r1, r2))
    if hi - lo > 1e-6:
        assert achievable_rate(dec, p, hi, 1e-10) < achievable_rate(dec, p, lo, 1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, scale=st.floats(0.1, 10.0))
def test_received_power_linear(seed, scale):
    dec = decompose(generate_channel(3, 3, 0.1, seed))
    p = np.array([1.0, 2.0, 0.5])
    assert received_power(dec, scale * p) == pytest.approx(scale * received_power(dec, p), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, rate_frac=st.floats(0.1, 0.9))
def test_objective_unimodal_along_segments(seed, rate_frac):
    """Received power for harvesting has at most one interior peak along feasible segments."""
    h = generate_channel(2, 2, 0.1, seed)
    dec = decompose(h)
    sigma2, p_t = 1e-10, 10.0
    rng = np.random.default_rng(seed)
    rate = rate_frac * achievable_rate(dec, [p_t / 2, p_t / 2], 0.0, sigma2)
    # two feasible (p1, rho) end points; feasibility is convex along the segment only
    # where rate holds, so sample ends at rho just below each end's rate limit
    ends = []
    for p1 in rng.uniform(0, p_t, 2):
        p = np.array([p1, p_t - p1])
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if achievable_rate(dec, p, mid, sigma2) >= rate else (lo, mid)
        ends.append((p, lo * rng.uniform(0.5, 1.0)))
    ts = np.linspace(0, 1, 100)
    values = []
    for t in ts:
        p = (1 - t) * ends[0][0] + t * ends[1][0]
        rho = (1 - t) * ends[0][1] + t * ends[1][1]
        values.append(rho * received_power(dec, p))
    d = np.sign(np.diff(values))
    d = d[d != 0]
    peaks = np.count_nonzero((d[:-1] > 0) & (d[1:] < 0))
    assert peaks <= 1
