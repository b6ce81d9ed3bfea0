import numpy as np
import pytest
from scipy.stats import norm

from coopcdma.cdma import NoiseModel, apply_channel, generate_sequence, spread
from coopcdma.coop import (
    PartnerCandidate,
    PartnerLinkState,
    SelectionConfig,
    draw_candidates,
    measure_partner_pe,
    partner_detect,
    relay_symbol,
    select_partner,
)
from coopcdma.fading import make_ricean


class TestSelection:
    def test_single_candidate(self):
        only = PartnerCandidate(4, 2.0)
        assert select_partner([only]) is only

    def test_argmax(self):
        chosen = select_partner([PartnerCandidate(0, 3.0), PartnerCandidate(1, 8.0),
                                 PartnerCandidate(2, 5.0)])
        assert chosen.id == 1

    def test_tie_goes_to_lowest_id(self):
        chosen = select_partner([PartnerCandidate(3, 7.0), PartnerCandidate(1, 7.0)])
        assert chosen.id == 1

    def test_empty(self):
        with pytest.raises(ValueError):
            select_partner([])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            PartnerCandidate(0, float("nan"))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SelectionConfig(set_size=0)
        assert SelectionConfig(set_size=None).candidate_count(50) == 50
        assert SelectionConfig(set_size=10).candidate_count(50) == 10

    def test_candidate_statistics(self):
        k = [c.k_factor_db for c in draw_candidates(SelectionConfig(20_000, 6.0, 10.0), 0)]
        assert np.mean(k) == pytest.approx(6.0, abs=0.1)
        assert np.var(k) == pytest.approx(10.0, rel=0.05)

    def test_order_statistics(self):
        rng = np.random.default_rng(1)

        def mean_selected(size, population=50):
            cfg = SelectionConfig(size, 6.0, 5.0)
            return np.mean([select_partner(draw_candidates(cfg, rng, population)).k_factor_db
                            for _ in range(10_000)])

        one, ten, unlimited = mean_selected(1), mean_selected(10), mean_selected(None)
        assert ten > one + 1.0
        assert unlimited >= ten
        # expected maximum of ten standard normals is 1.5388
        assert ten == pytest.approx(6.0 + 1.5388 * np.sqrt(5.0), abs=0.05)


class TestDetection:
    seq = generate_sequence(50, 0)

    def test_noiseless(self):
        for h in (1.0, -1.0, 1j, 0.3 - 2j):
            r = spread(np.array([1.0, -1.0]), self.seq)
            block = h * r
            np.testing.assert_array_equal(partner_detect(block, np.full(2, h), self.seq), [1.0, -1.0])

    def test_tie_is_plus_one(self):
        assert partner_detect(np.zeros(50), 1.0, self.seq) == 1.0

    def test_antenna_axis(self):
        r = spread(np.array([-1.0, -1.0, 1.0]), self.seq)[:, None, :]
        np.testing.assert_array_equal(partner_detect(r, np.ones(3), self.seq), [-1, -1, 1])

    @pytest.mark.parametrize("gamma_db", [0.0, 4.0])
    @pytest.mark.parametrize("h", [1.0, 0.6 + 0.5j])
    def test_error_rate_matches_q_function(self, gamma_db, h):
        rng = np.random.default_rng(2)
        gamma = 10 ** (gamma_db / 10)
        n = 100_000
        d = 1.0 - 2.0 * rng.integers(0, 2, n)
        hs = np.full(n, h, dtype=complex)
        r = apply_channel(spread(d, self.seq), hs[:, None], NoiseModel(1 / gamma, 0, 50), rng)
        measured = np.mean(partner_detect(r, hs, self.seq) != d)
        expected = norm.sf(np.sqrt(2 * gamma * abs(h) ** 2))
        stderr = np.sqrt(expected * (1 - expected) / n)
        assert abs(measured - expected) < 3 * stderr


class TestRelay:
    seq = generate_sequence(16, 3)

    def test_plus_minus(self):
        np.testing.assert_array_equal(relay_symbol(1.0, self.seq), self.seq.chips)
        np.testing.assert_array_equal(relay_symbol(-1.0, self.seq), -self.seq.chips)

    def test_noiseless_frame(self):
        rng = np.random.default_rng(4)
        s1 = generate_sequence(16, rng)
        d = 1.0 - 2.0 * rng.integers(0, 2, 200)
        link = make_ricean(6.0, 0.02, rng)
        h = link.run(200)
        r = apply_channel(spread(d, s1), h[:, None], NoiseModel(0.0, 0, 16), rng)
        np.testing.assert_array_equal(relay_symbol(partner_detect(r, h, s1), self.seq),
                                      spread(d, self.seq))

    def test_forwards_exactly_where_correct(self):
        rng = np.random.default_rng(5)
        s1 = generate_sequence(16, rng)
        d = 1.0 - 2.0 * rng.integers(0, 2, 2000)
        h = make_ricean(0.0, 0.04, rng).run(2000)
        r = apply_channel(spread(d, s1), h[:, None], NoiseModel(1.0, 10, 16), rng)
        d_hat = partner_detect(r, h, s1)
        relayed = relay_symbol(d_hat, self.seq)
        correct = d_hat == d
        assert 0 < correct.sum() < d.size
        np.testing.assert_array_equal(relayed[correct], spread(d, self.seq)[correct])
        np.testing.assert_array_equal(relayed[~correct], -spread(d, self.seq)[~correct])


class TestMeasurePe:
    seq = generate_sequence(50, 6)

    def test_noiseless(self):
        state = PartnerLinkState(make_ricean(3.0, 0.04, 0), NoiseModel(0.0, 0, 50))
        pe, (low, high) = measure_partner_pe(state, self.seq, 5000, 1)
        assert pe == 0.0 and low == 0.0 and high < 1e-3

    def test_strong_los_high_snr(self):
        state = PartnerLinkState(make_ricean(30.0, 0.01, 0), NoiseModel(0.1, 0, 50))
        pe, _ = measure_partner_pe(state, self.seq, 20_000, 2)
        # |h| stays near one, so Q(sqrt(2 * 10)) bounds the rate
        assert norm.sf(np.sqrt(20.0)) < 1e-5
        assert pe < 1e-3

    def test_coin_flip_limit(self):
        state = PartnerLinkState(make_ricean(6.0, 0.04, 0), NoiseModel(1e8, 0, 50))
        pe, (low, high) = measure_partner_pe(state, self.seq, 20_000, 3)
        assert low <= 0.5 <= high
        assert low < pe < high

    def test_minimum_sample_size(self):
        state = PartnerLinkState(make_ricean(6.0, 0.04, 0), NoiseModel(1.0, 0, 50))
        with pytest.raises(ValueError):
            measure_partner_pe(state, self.seq, 999)
