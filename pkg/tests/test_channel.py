import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ntn_handover.channel import (
    DENSE_URBAN,
    Branch,
    ChannelConfig,
    EnvironmentLookup,
    EnvironmentRow,
    basic_path_loss,
    correlate_across_satellites,
    eirp_per_prb_dbm,
    environment_params,
    fspl,
    link_samples,
    lookup_environment,
    mix_fading,
    rss,
    scintillation_loss,
    serving_sinr_db,
    sinr,
    total_path_loss,
    validate_environment,
)
from ntn_handover.errors import ConfigError, DomainError
from ntn_handover.geometry import slant_range_m

# dense-urban LoS probability (%), SF sigmas and clutter loss, typed in independently of the package
REFERENCE_ROWS = {
    10: (28.2, 3.5, 15.5, 34.3),
    20: (33.1, 3.4, 13.9, 30.9),
    30: (39.8, 2.9, 12.4, 29.0),
    40: (46.8, 3.0, 11.7, 27.7),
    50: (53.7, 3.1, 10.6, 26.8),
    60: (61.2, 2.7, 10.5, 26.2),
    70: (73.8, 2.5, 10.1, 25.8),
    80: (82.0, 2.3, 9.2, 25.5),
    90: (98.1, 1.2, 9.2, 25.5),
}


def oracle_fspl(d_m, fc_ghz):
    return 32.45 + 20 * math.log10(fc_ghz) + 20 * math.log10(d_m)


def oracle_db_sum(*dbm):
    return 10 * math.log10(sum(10 ** (x / 10) for x in dbm))


class TestTable:
    @pytest.mark.parametrize("bucket", sorted(REFERENCE_ROWS))
    def test_rows_match_table(self, bucket):
        row = lookup_environment(float(bucket))
        p, s_los, s_nlos, cl = REFERENCE_ROWS[bucket]
        assert row.elevation_bucket == bucket
        assert row.los_probability == pytest.approx(p / 100, abs=1e-12)
        assert (row.sigma_sf_los, row.sigma_sf_nlos, row.clutter_loss) == (s_los, s_nlos, cl)

    def test_nearest_bucket(self):
        assert lookup_environment(34.0).elevation_bucket == 30
        assert lookup_environment(35.0).elevation_bucket == 40  # ties round up
        assert lookup_environment(3.0).elevation_bucket == 10
        assert lookup_environment(85.0).elevation_bucket == 90

    @pytest.mark.parametrize("bad", [0.0, -5.0, 90.5])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            lookup_environment(bad)

    def test_linear_lookup_hits_rows_and_interpolates(self):
        p, *_ = environment_params(np.array([80.0, 85.0, 90.0]), EnvironmentLookup.LINEAR)
        assert p == pytest.approx([0.82, (0.82 + 0.981) / 2, 0.981])
        p, *_ = environment_params(np.array([5.0]), EnvironmentLookup.LINEAR)
        assert p == pytest.approx([0.282])

    def test_vector_nearest_matches_scalar(self):
        el = np.linspace(0.5, 90, 300)
        p, s_los, s_nlos, cl = environment_params(el)
        for e, pv, cv in zip(el, p, cl):
            row = lookup_environment(float(e))
            assert (pv, cv) == (row.los_probability, row.clutter_loss)

    def test_validation(self):
        rows = list(DENSE_URBAN)
        validate_environment(rows)
        with pytest.raises(ConfigError):
            validate_environment(rows[:-1])
        rows[3] = EnvironmentRow(40, 0.2, 3.0, 11.7, 27.7)
        with pytest.raises(ConfigError):
            validate_environment(rows)


class TestLoss:
    def test_fspl_golden(self):
        assert fspl(600_000, 2.0) == pytest.approx(154.03, abs=0.01)
        assert fspl(600_000, 2.0) == pytest.approx(oracle_fspl(600_000, 2.0), abs=1e-12)
        assert fspl(1.0, 1.0) == pytest.approx(32.45)
        assert fspl(1_932_000, 2.0) == pytest.approx(164.2, abs=0.05)

    @pytest.mark.parametrize("d,fc", [(0, 2), (-1, 2), (100, 0)])
    def test_fspl_domain(self, d, fc):
        with pytest.raises(DomainError):
            fspl(d, fc)

    def test_basic_path_loss(self):
        row90 = lookup_environment(90.0)
        assert basic_path_loss(600_000, row90, Branch.LOS, 0.0) == pytest.approx(154.03, abs=0.01)
        assert basic_path_loss(600_000, row90, "nlos", 0.0) == pytest.approx(179.53, abs=0.01)
        assert basic_path_loss(600_000, row90, "los", 3.5) == pytest.approx(157.53, abs=0.01)

    def test_scintillation(self):
        assert scintillation_loss(11.0) == pytest.approx(7.778, abs=0.001)

    def test_total_overhead(self):
        expected = 0.981 * oracle_fspl(6e5, 2) + 0.019 * (oracle_fspl(6e5, 2) + 25.5) + 11 / math.sqrt(2)
        got = total_path_loss(600_000, 90.0, 0.0, 0.0, ChannelConfig())
        assert got == pytest.approx(expected, abs=1e-9)
        assert got == pytest.approx(162.29, abs=0.01)

    def test_total_low_elevation(self):
        d = slant_range_m(10.0, 600_000)
        got = total_path_loss(d, 10.0, 0.0, 0.0, ChannelConfig())
        assert got == pytest.approx(196.6, abs=0.1)

    def test_full_los_weight(self):
        rows = list(DENSE_URBAN)
        rows[8] = EnvironmentRow(90, 1.0, 1.2, 9.2, 25.5)
        cfg = ChannelConfig(environment=tuple(rows))
        assert total_path_loss(6e5, 90.0, 1.0, 50.0, cfg) == pytest.approx(fspl(6e5, 2) + 1.0 + 11 / math.sqrt(2))

    @pytest.mark.parametrize("lookup", ["nearest", "linear"])
    def test_increases_as_elevation_drops(self, lookup):
        el = np.linspace(90, 10, 400)
        pl = total_path_loss(slant_range_m(el, 600_000), el, 0.0, 0.0, ChannelConfig(environment_lookup=lookup))
        assert np.all(np.diff(pl) > 0)

    def test_deterministic_without_fading(self):
        a = total_path_loss(np.array([7e5, 8e5]), np.array([60.0, 50.0]), 0.0, 0.0, ChannelConfig())
        b = total_path_loss(np.array([7e5, 8e5]), np.array([60.0, 50.0]), 0.0, 0.0, ChannelConfig())
        assert a.tobytes() == b.tobytes()


class TestLinkBudget:
    def test_eirp(self):
        assert eirp_per_prb_dbm(ChannelConfig()) == pytest.approx(56.55, abs=0.01)
        assert eirp_per_prb_dbm(ChannelConfig()) == pytest.approx(34 + 10 * math.log10(0.18) + 30)

    def test_rss(self):
        cfg = ChannelConfig()
        assert rss(162.29, cfg) == pytest.approx(-105.74, abs=0.01)
        assert rss(0.0, cfg) == eirp_per_prb_dbm(cfg)

    @given(st.floats(-300, 300))
    def test_rss_inverse(self, pl):
        cfg = ChannelConfig()
        assert rss(pl, cfg) + pl == pytest.approx(eirp_per_prb_dbm(cfg))

    def test_sinr_noise_only(self):
        assert sinr(-100.0, [], -121.4) == pytest.approx(21.4, abs=0.01)

    def test_sinr_equal_interferer(self):
        assert sinr(-80.0, [-80.0], -200.0) == pytest.approx(0.0, abs=1e-6)

    def test_sinr_brute_force(self):
        expected = -105.74 - oracle_db_sum(-120.0, -125.0, -121.4)
        assert sinr(-105.74, [-120.0, -125.0], -121.4) == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize("bad", [None, float("nan"), []])
    def test_sinr_needs_serving(self, bad):
        with pytest.raises(DomainError):
            sinr(bad, [-100.0], -121.4)

    def test_serving_sinr_matrix(self):
        q = np.array([[-100.0, -110.0, -120.0], [-115.0, -105.0, -109.0]])
        got = serving_sinr_db(q, np.array([0, 2]), -121.4)
        assert got[0] == pytest.approx(sinr(-100.0, [-110.0, -120.0], -121.4))
        assert got[1] == pytest.approx(sinr(-109.0, [-115.0, -105.0], -121.4))

    def test_link_samples(self):
        d = slant_range_m(np.array([90.0, 85.0, 80.0]), 600_000)
        out = link_samples(d, [90.0, 85.0, 80.0], np.zeros(3), np.zeros(3), ChannelConfig())
        assert len(out) == 3
        for s in out:
            assert s.rss == pytest.approx(eirp_per_prb_dbm(ChannelConfig()) - s.pl_total)
        assert out[0].sinr > out[2].sinr


class TestConfig:
    @pytest.mark.parametrize("fc", [0.0, 6.0, 28.0])
    def test_frequency_range(self, fc):
        with pytest.raises(ConfigError):
            ChannelConfig(carrier_frequency=fc)

    def test_enum_coercion(self):
        cfg = ChannelConfig(shadow_fading_mode="per_step", environment_lookup="linear")
        assert cfg.environment_lookup is EnvironmentLookup.LINEAR

    @pytest.mark.parametrize("kw", [{"sf_fast_fraction": 1.5}, {"sf_satellite_correlation": -0.1}])
    def test_fading_parameters(self, kw):
        with pytest.raises(ConfigError):
            ChannelConfig(**kw)


class TestFadingDraws:
    def test_sample_std_matches_sigma(self):
        rng = np.random.default_rng(1)
        for sigma in (1.2, 3.5, 15.5):
            draws = sigma * rng.standard_normal(100_000)
            assert abs(draws.std() / sigma - 1) < 0.02

    def test_mix_keeps_unit_variance(self):
        rng = np.random.default_rng(2)
        z = mix_fading(rng.standard_normal(200_000), rng.standard_normal(200_000), 0.3)
        assert z.std() == pytest.approx(1.0, abs=0.01)

    def test_satellite_correlation(self):
        rng = np.random.default_rng(3)
        z = correlate_across_satellites(rng.standard_normal((200_000, 3)), rng.standard_normal(200_000), 0.75)
        c = np.corrcoef(z.T)
        assert c[0, 1] == pytest.approx(0.75, abs=0.01)
        assert c[1, 2] == pytest.approx(0.75, abs=0.01)
        assert z.std(axis=0) == pytest.approx([1, 1, 1], abs=0.01)

    def test_zero_correlation_is_identity(self):
        z = np.arange(6.0).reshape(2, 3)
        assert np.array_equal(correlate_across_satellites(z, np.ones(2), 0.0), z)
