import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import diag_rate, waterfill_by_bisection
from swipt_opt.channel import ChannelDecomposition, SystemParams, achievable_rate, decompose, generate_channel
from swipt_opt.waterfill import max_rate, waterfill_allocation, waterfill_gains, waterfill_rank


class TestRank:
    def test_equal_modes_both_filled(self):
        for p_t in (1e-9, 1.0, 1e6):
            assert waterfill_rank([1.0, 1.0], p_t, 1.0) == 2

    def test_disparity_excludes_weak_mode(self):
        # sigma2/g2 - sigma2/g1 = 1e4 - 0.01 exceeds the budget
        assert waterfill_rank([10.0, 0.01], 1.0, 1.0) == 1

    def test_high_snr_fills_all(self):
        dec = decompose(generate_channel(4, 4, 0.1, 7))
        assert waterfill_rank(dec.singvals, 10.0, 1e-10) == 4


class TestAllocation:
    def test_symmetric(self):
        np.testing.assert_allclose(waterfill_allocation([1.0, 1.0], 10.0, 1.0), [5.0, 5.0])

    def test_single_mode(self):
        np.testing.assert_allclose(waterfill_allocation([10.0, 0.01], 1.0, 1.0), [1.0, 0.0])

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("sigma2", [1e-13, 1e-10, 1e-4])
    def test_matches_bisection_oracle(self, seed, sigma2):
        g = decompose(generate_channel(4, 4, 0.1, seed)).gains
        p = waterfill_gains(g, 10.0, sigma2)
        np.testing.assert_allclose(p, waterfill_by_bisection(g, 10.0, sigma2), rtol=1e-9, atol=1e-12)
        assert p.sum() == pytest.approx(10.0, rel=1e-9)
        filled = p > 0
        levels = p[filled] + sigma2 / g[filled]
        np.testing.assert_allclose(levels, levels[0], rtol=1e-9)

    def test_grid_oracle_rate(self):
        g = decompose(generate_channel(2, 2, 0.1, 7)).gains
        p_t, sigma2 = 10.0, 1e-7
        p1 = np.linspace(0, p_t, 200001)
        grid_rates = (np.log1p(p1 * g[0] / sigma2) + np.log1p((p_t - p1) * g[1] / sigma2)) / np.log(2)
        rate = diag_rate(g, waterfill_gains(g, p_t, sigma2), 0.0, sigma2)
        assert rate >= grid_rates.max() - 1e-9
        assert rate == pytest.approx(grid_rates.max(), rel=1e-3)


class TestMaxRate:
    def test_single_mode_inversion(self):
        dec = ChannelDecomposition.from_singvals([1.0])
        assert max_rate(dec, SystemParams(1e-3 * (2**10 - 1), 1e-3)) == pytest.approx(10.0, abs=1e-12)

    def test_frozen_seed7(self):
        # frozen oracle value from bisection waterfilling
        dec = decompose(generate_channel(2, 2, 0.1, 7))
        expected = diag_rate(dec.gains, waterfill_by_bisection(dec.gains, 10.0, 1e-13), 0.0, 1e-13)
        assert max_rate(dec, SystemParams(10.0, 1e-13)) == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(74.444134, abs=1e-6)


seeds = st.integers(0, 2**31)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, p_lo=st.floats(0.01, 100.0), factor=st.floats(1.0, 10.0))
def test_max_rate_monotone_in_budget(seed, p_lo, factor):
    dec = decompose(generate_channel(3, 3, 0.1, seed))
    assert max_rate(dec, SystemParams(p_lo * factor, 1e-10)) >= max_rate(dec, SystemParams(p_lo, 1e-10)) - 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=seeds, s_lo=st.floats(1e-14, 1e-6), factor=st.floats(1.0, 100.0))
def test_max_rate_monotone_in_noise(seed, s_lo, factor):
    dec = decompose(generate_channel(3, 3, 0.1, seed))
    assert max_rate(dec, SystemParams(10.0, s_lo * factor)) <= max_rate(dec, SystemParams(10.0, s_lo)) + 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=seeds, sigma2=st.floats(1e-14, 1e-2))
def test_beats_equal_split_and_rank_consistent(seed, sigma2):
    dec = decompose(generate_channel(4, 4, 0.1, seed))
    p = waterfill_allocation(dec.singvals, 10.0, sigma2)
    equal = np.full(4, 2.5)
    assert achievable_rate(dec, p, 0.0, sigma2) >= achievable_rate(dec, equal, 0.0, sigma2) - 1e-12
    assert np.count_nonzero(p > 0) == waterfill_rank(dec.singvals, 10.0, sigma2)
