import itertools

import numpy as np
import pytest

from rxprobe.autodiff import Tape, Tensor, finite_diff, ops, rel_error
from rxprobe.linksim import (
    ChannelProfile,
    ScenarioParams,
    SignalConfig,
    apply_channel,
    axis_table,
    build_grid,
    channel_response,
    constellation,
    demap_nearest,
    generate_payload,
    get_profile,
    load_profiles,
    map_symbols,
    pilot_grid,
    sample_realization,
    tap_gains,
    transmit_batch,
)

CFG = SignalConfig()


class TestPayload:
    def test_deterministic(self):
        np.testing.assert_array_equal(generate_payload(7, CFG, 3), generate_payload(7, CFG, 3))
        assert not np.array_equal(generate_payload(7, CFG, 1), generate_payload(8, CFG, 1))

    def test_bit_mean(self):
        bits = generate_payload(1, CFG, 40)
        assert bits.size >= 1e5
        assert 0.49 <= bits.mean() <= 0.51

    @pytest.mark.parametrize("modulation,m", [("QPSK", 2), ("16QAM", 4), ("64QAM", 6)])
    def test_count(self, modulation, m):
        bits = generate_payload(0, CFG.with_modulation(modulation), 5)
        assert bits.size == 5 * (14 - 2) * 72 * m

    def test_items_independent_of_batch(self):
        a = generate_payload(3, CFG, 2)
        b = generate_payload(3, CFG, 4)
        np.testing.assert_array_equal(a, b[:2])
        np.testing.assert_array_equal(generate_payload(3, CFG, 2, first_item=2), b[2:])


class TestModulation:
    def test_qpsk_zero_bits(self):
        assert map_symbols(np.array([0, 0]), "QPSK")[0] == pytest.approx((1 + 1j) / np.sqrt(2))

    @pytest.mark.parametrize("modulation", ["QPSK", "16QAM", "64QAM"])
    def test_unit_power(self, modulation):
        points, _ = constellation(modulation)
        assert np.mean(np.abs(points) ** 2) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("modulation,m", [("QPSK", 2), ("16QAM", 4), ("64QAM", 6)])
    def test_exhaustive_round_trip(self, modulation, m):
        # every bit pattern, decoded by brute-force nearest point over all patterns
        patterns = np.array(list(itertools.product([0, 1], repeat=m)), dtype=np.int8)
        symbols = map_symbols(patterns.reshape(-1), modulation)
        assert len(np.unique(np.round(symbols, 12))) == 2**m
        d = np.abs(symbols[:, None] - symbols[None, :])
        nearest = patterns[np.argmin(d, axis=1)]
        np.testing.assert_array_equal(nearest, patterns)
        np.testing.assert_array_equal(demap_nearest(symbols, modulation).reshape(-1, m), patterns)

    @pytest.mark.parametrize("modulation", ["16QAM", "64QAM"])
    def test_gray_neighbours_differ_in_one_bit(self, modulation):
        levels, labels = axis_table(modulation)
        order = np.argsort(levels)
        for a, b in zip(order[:-1], order[1:]):
            assert np.sum(labels[a] != labels[b]) == 1

    def test_rejects_ragged_bits(self):
        with pytest.raises(ValueError):
            map_symbols(np.zeros(5, dtype=np.int8), "16QAM")


class TestGrid:
    def test_pilot_mask(self):
        _, tx, pilots, mask = transmit_batch(0, CFG, 2)
        assert mask.sum() == 2 * 72
        np.testing.assert_array_equal(tx[:, mask], np.broadcast_to(pilots[mask], (2, 144)))
        assert np.all(pilots[~mask] == 0)

    def test_pilots_fixed_qpsk(self):
        p = pilot_grid(CFG)[CFG.pilot_mask]
        np.testing.assert_allclose(np.abs(p), 1.0, atol=1e-15)
        np.testing.assert_array_equal(p, pilot_grid(CFG)[CFG.pilot_mask])

    def test_qpsk_grid_power_exact(self):
        _, tx, _, _ = transmit_batch(0, CFG.with_modulation("QPSK"), 2)
        assert np.mean(np.abs(tx) ** 2) == pytest.approx(1.0, abs=1e-9)

    def test_qam_grid_power(self):
        _, tx, _, _ = transmit_batch(0, CFG.with_modulation("64QAM"), 50)
        assert np.mean(np.abs(tx) ** 2) == pytest.approx(1.0, abs=0.02)

    def test_build_grid_rejects_wrong_count(self):
        with pytest.raises(ValueError):
            build_grid(np.zeros((1, 10), complex), CFG)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SignalConfig(pilot_symbols=(2, 14))
        with pytest.raises(ValueError):
            SignalConfig(modulation="8PSK")
        assert SignalConfig.from_dict(CFG.to_dict()) == CFG


class TestProfiles:
    @pytest.mark.parametrize("name", ["TDL-B", "TDL-C", "TDL-D"])
    def test_power_and_delays(self, name):
        p = get_profile(name)
        assert sum(p.powers) == pytest.approx(1.0, abs=1e-12)
        assert p.delays[0] == 0.0 and min(p.delays) >= 0.0

    def test_los_only_for_d(self):
        assert get_profile("TDL-D").los and not get_profile("TDL-B").los

    def test_rejects_bad_table(self):
        with pytest.raises(ValueError):
            ChannelProfile("X", (0.0, 1.0), (0.5, 0.4))
        with pytest.raises(ValueError):
            ChannelProfile("X", (0.1, 1.0), (0.5, 0.5))

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text('{"profiles": [{"name": "TWO", "delays": [0, 1.5], "powers_db": [0, -3]}]}')
        prof = load_profiles(path)["TWO"]
        assert prof.n_taps == 2 and sum(prof.powers) == pytest.approx(1.0)


class TestRealization:
    def test_same_seed_same_draws(self):
        a, b = sample_realization(5, 3), sample_realization(5, 3)
        for f in ("gains", "doppler_cos", "los_phase", "noise"):
            np.testing.assert_array_equal(getattr(a, f), getattr(b, f))

    def test_gain_variance(self):
        r = sample_realization(2, 125, "TDL-B")
        g = r.gains.reshape(-1)
        assert g.size >= 1e4
        assert 0.95 <= np.mean(np.abs(g) ** 2) <= 1.05

    def test_item_stable_when_batch_grows(self):
        for i in range(3):
            a, b = sample_realization(9, i + 1), sample_realization(9, i + 2)
            np.testing.assert_array_equal(a.gains[i], b.gains[i])
            np.testing.assert_array_equal(a.noise[i], b.noise[i])

    def test_min_sinusoids(self):
        with pytest.raises(ValueError):
            sample_realization(0, 1, n_sinusoids=4)


def _h(params, batch=4, profile="TDL-D", seed=0):
    real = sample_realization(seed, batch, profile)
    return channel_response(real, params, get_profile(profile), CFG).data


class TestChannel:
    def test_zero_delay_spread_flat_in_frequency(self):
        h = _h(ScenarioParams(12.0, 0.0, -10.0))
        np.testing.assert_allclose(h, np.broadcast_to(h[..., :1], h.shape), atol=1e-12)

    def test_zero_speed_constant_in_time(self):
        h = _h(ScenarioParams(0.0, 300.0, -10.0))
        np.testing.assert_allclose(h, np.broadcast_to(h[:, :1], h.shape), atol=1e-12)

    def test_noise_variance_at_zero_dbm(self):
        real = sample_realization(4, 10)
        _, tx, _, _ = transmit_batch(4, CFG, 10)
        params = ScenarioParams(5.0, 100.0, 0.0)
        rx, h = apply_channel(tx, real, params, "TDL-D", CFG)
        resid = rx.data - h.data * tx
        assert resid.size >= 1e4
        assert np.var(resid) == pytest.approx(1.0, rel=0.05)

    @pytest.mark.parametrize("profile", ["TDL-B", "TDL-C", "TDL-D"])
    def test_unit_average_gain(self, profile):
        h = _h(ScenarioParams(10.0, 200.0, -10.0), batch=2000, profile=profile, seed=11)
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.05)

    def test_delay_spread_increases_selectivity(self):
        real = sample_realization(3, 1000, "TDL-C")
        prof = get_profile("TDL-C")
        sel = []
        for ds in np.linspace(0.0, 400.0, 5):
            h = channel_response(real, ScenarioParams(0.0, ds, -10.0), prof, CFG).data
            sel.append(np.mean(np.var(np.abs(h) ** 2, axis=-1)))
        inversions = sum(b < a for a, b in zip(sel[:-1], sel[1:]))
        assert inversions <= 1 and sel[-1] > sel[0]

    def test_speed_decorrelates_taps(self):
        real = sample_realization(8, 1000, "TDL-B")
        prof = get_profile("TDL-B")
        corr = []
        for speed in (0.0, 15.0, 30.0):
            g = tap_gains(real, speed, prof, CFG).data  # (B, P, T)
            c = np.mean(g[..., 0] * np.conj(g[..., -1])) / np.mean(np.abs(g[..., 0]) ** 2)
            corr.append(c.real)
        assert corr[0] == pytest.approx(1.0)
        assert corr[0] > corr[1] > corr[2]

    def test_deterministic_rx(self):
        def rx():
            real = sample_realization(1, 2)
            _, tx, _, _ = transmit_batch(1, CFG, 2)
            return apply_channel(tx, real, ScenarioParams(3.0, 50.0, -5.0))[0].data

        np.testing.assert_array_equal(rx(), rx())

    def test_rejects_out_of_range(self):
        real = sample_realization(1, 1)
        _, tx, _, _ = transmit_batch(1, CFG, 1)
        with pytest.raises(ValueError, match="speed"):
            apply_channel(tx, real, ScenarioParams(31.0, 50.0, -5.0))

    def test_rejects_profile_mismatch(self):
        real = sample_realization(1, 1, "TDL-B")
        with pytest.raises(ValueError):
            channel_response(real, ScenarioParams(1.0, 1.0, 1.0), get_profile("TDL-C"), CFG)

    def test_per_item_parameters(self):
        real = sample_realization(1, 2)
        both = channel_response(real, ScenarioParams(np.array([0.0, 20.0]), np.array([0.0, 300.0]), -5.0),
                                get_profile("TDL-D"), CFG).data
        single = channel_response(real, ScenarioParams(20.0, 300.0, -5.0), get_profile("TDL-D"), CFG).data
        np.testing.assert_allclose(both[1], single[1], atol=1e-12)


def test_gradient_through_channel_matches_finite_differences():
    """d(real scalar of S_r)/d(speed, delay spread, noise) at a frozen realization."""
    real = sample_realization(6, 2)
    _, tx, _, _ = transmit_batch(6, CFG, 2)
    weights = np.random.default_rng(0).standard_normal(tx.shape)

    def f(s, d, n):
        rx, _ = apply_channel(tx, real, ScenarioParams(s, d, n))
        return ops.tsum(ops.abs2(rx) * weights)

    x0 = [np.array(12.3), np.array(187.0), np.array(-7.5)]
    leaves = [Tensor(v, requires_grad=True) for v in x0]
    with Tape() as tape:
        loss = f(*leaves)
    tape.backward(loss)
    num = finite_diff(lambda *xs: f(*[Tensor(x) for x in xs]).item(), x0, eps=1e-5)
    for leaf, n in zip(leaves, num):
        assert rel_error(leaf.grad, n) < 1e-3
