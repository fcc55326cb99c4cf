import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import eigen_covariance, trace_received
from swipt_opt.channel import SystemParams, decompose, generate_channel
from swipt_opt.errors import DomainError
from swipt_opt.harvest import EhCircuitModel, EhModelKind, harvested_power, implied_efficiency, shipped_models
from swipt_opt.solver import solve_op1
from swipt_opt.waterfill import max_rate

MODELS = shipped_models()
MODEL_IDS = sorted(MODELS)


@pytest.fixture(params=MODEL_IDS)
def model(request):
    return MODELS[request.param]


def write_table(path, rows, header="p_rf_w,p_dc_w"):
    path.write_text(header + "\n" + "".join(f"{a},{b}\n" for a, b in rows))
    return path


class TestHarvestedPower:
    def test_zero_at_zero(self, model):
        assert harvested_power(0.0, model) == 0.0

    def test_linear(self):
        assert harvested_power(2e-3, EhCircuitModel.linear(0.5)) == pytest.approx(1e-3)

    def test_negative_rejected(self, model):
        with pytest.raises(DomainError):
            harvested_power(-1e-6, model)

    def test_nondecreasing_on_grid(self, model):
        out = harvested_power(np.linspace(0.0, 0.5, 1000), model)
        assert np.all(np.diff(out) >= 0)

    def test_array_and_scalar_agree(self, model):
        xs = np.array([1e-4, 1e-3, 1e-2])
        np.testing.assert_array_equal(harvested_power(xs, model), [harvested_power(x, model) for x in xs])

    def test_table_interpolates_and_clamps(self):
        m = EhCircuitModel.table([1e-3, 2e-3], [2e-4, 6e-4])
        assert harvested_power(5e-4, m) == pytest.approx(1e-4)
        assert harvested_power(1.5e-3, m) == pytest.approx(4e-4)
        assert harvested_power(1.0, m) == pytest.approx(6e-4)

    def test_logistic_saturates(self):
        m = EhCircuitModel.logistic(0.02, 100.0, 0.01)
        assert harvested_power(10.0, m) == pytest.approx(0.02, rel=1e-12)

    def test_logistic_midpoint_within_ten_percent(self):
        # anchors are the +4 and +13 dBm samples; the samples between them were not fitted
        x, y = EhCircuitModel.powercast_table().params
        m = EhCircuitModel.powercast_logistic()
        for dbm in (7.0, 10.0):
            i = int(np.argmin(np.abs(x - 10 ** (dbm / 10) * 1e-3)))
            assert harvested_power(x[i], m) == pytest.approx(y[i], rel=0.10)

    def test_anchor_fit_reproduces_anchors(self):
        m = EhCircuitModel.logistic_from_anchors(0.03, (2e-3, 1.2e-3), (2e-2, 1.4e-2))
        assert harvested_power(2e-3, m) == pytest.approx(1.2e-3, rel=1e-8)
        assert harvested_power(2e-2, m) == pytest.approx(1.4e-2, rel=1e-8)


class TestEfficiency:
    def test_linear_constant(self):
        m = EhCircuitModel.linear(0.3)
        np.testing.assert_allclose(implied_efficiency(np.logspace(-6, 0, 20), m), 0.3)

    def test_zero_rejected(self, model):
        with pytest.raises(DomainError):
            implied_efficiency(0.0, model)

    def test_at_most_one(self, model):
        assert np.all(implied_efficiency(np.logspace(-6, 0, 200), model) <= 1.0)

    def test_decreasing_in_saturation(self):
        m = EhCircuitModel.powercast_logistic()
        assert implied_efficiency(0.2, m) < implied_efficiency(0.1, m)

    def test_bundled_table_peak(self):
        # the digitized curve peaks near 64 % at +10 dBm
        x, _ = EhCircuitModel.powercast_table().params
        eff = implied_efficiency(x[1:], MODELS["powercast_table"])
        assert x[1:][np.argmax(eff)] == pytest.approx(1e-2)
        assert eff.max() == pytest.approx(0.64)


class TestConstruction:
    @pytest.mark.parametrize("eta", [0.0, 1.5, -0.1])
    def test_linear_bounds(self, eta):
        with pytest.raises(DomainError):
            EhCircuitModel.linear(eta)

    @pytest.mark.parametrize("args", [(0.0, 1.0, 0.0), (1.0, -1.0, 0.0), (1.0, 1.0, math.nan)])
    def test_logistic_bounds(self, args):
        with pytest.raises(DomainError):
            EhCircuitModel.logistic(*args)

    @pytest.mark.parametrize(
        "p_rf,p_dc",
        [
            ([1e-3, 1e-3], [1e-4, 2e-4]),
            ([2e-3, 1e-3], [1e-4, 2e-4]),
            ([1e-3, 2e-3], [2e-4, 1e-4]),
            ([1e-3], [2e-3]),
            ([0.0, 1e-3], [1e-5, 2e-4]),
            ([], []),
        ],
    )
    def test_bad_tables(self, p_rf, p_dc):
        with pytest.raises(DomainError):
            EhCircuitModel.table(p_rf, p_dc)

    def test_csv_round_trip(self, tmp_path):
        path = write_table(tmp_path / "t.csv", [(1e-3, 1e-4), (1e-2, 3e-3)])
        m = EhCircuitModel.from_csv(path)
        assert m.kind is EhModelKind.TABLE
        assert harvested_power(1e-2, m) == pytest.approx(3e-3)

    def test_csv_bad_header(self, tmp_path):
        path = write_table(tmp_path / "t.csv", [(1e-3, 1e-4)], header="rf,dc")
        with pytest.raises(DomainError):
            EhCircuitModel.from_csv(path)

    def test_csv_unsorted(self, tmp_path):
        path = write_table(tmp_path / "t.csv", [(1e-2, 1e-4), (1e-3, 1e-4)])
        with pytest.raises(DomainError):
            EhCircuitModel.from_csv(path)

    def test_table_read_only(self):
        x, _ = EhCircuitModel.powercast_table().params
        with pytest.raises(ValueError):
            x[0] = 1.0


class TestRankingPreserved:
    @pytest.mark.parametrize("seed", range(5))
    def test_top_candidate(self, model, seed):
        rng = np.random.default_rng(seed)
        h = generate_channel(2, 2, 0.05, seed)
        dec = decompose(h)
        p_re = []
        for _ in range(100):
            p1 = rng.uniform(0.0, 10.0)
            rho = rng.uniform(0.0, 1.0)
            p_re.append(rho * trace_received(h.entries, eigen_covariance(dec.V, [p1, 10.0 - p1])))
        p_re = np.array(p_re)
        p_h = harvested_power(p_re, model)
        best = int(np.argmax(p_re))
        # a nondecreasing map keeps the best candidate on top
        assert p_h[best] == p_h.max()
        slope = harvested_power(p_re[best] * 1.001, model) - p_h[best]
        if slope > 0:
            assert int(np.argmax(p_h)) == best

    @pytest.mark.parametrize("seed", [7, 8])
    def test_harvest_nonincreasing_near_max_rate(self, model, seed):
        dec = decompose(generate_channel(2, 2, 0.05, seed))
        params = SystemParams(10.0, 1e-10)
        r_max = max_rate(dec, params)
        p_re = [solve_op1(dec, params.with_rate(f * r_max)).p_re for f in np.linspace(0.7, 1.0, 12)]
        assert np.all(np.diff(harvested_power(np.array(p_re), model)) <= 0)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.0, 1.0), b=st.floats(0.0, 1.0), name=st.sampled_from(MODEL_IDS))
def test_monotone_pairs(a, b, name):
    lo, hi = sorted((a, b))
    m = MODELS[name]
    assert harvested_power(lo, m) <= harvested_power(hi, m)
