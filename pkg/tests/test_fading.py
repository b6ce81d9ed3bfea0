import math

import numpy as np
import pytest
import scipy.linalg

from coopcdma.fading import (
    ArModel,
    DegenerateModelError,
    FadingProcess,
    fit_ar,
    jakes_autocorrelation,
    make_ricean,
)


def bessel_j0_series(x, terms=30):
    """J0 from its power series; independent of scipy."""
    return sum((-1) ** m * (x / 2) ** (2 * m) / math.factorial(m) ** 2 for m in range(terms))


def empirical_autocorrelation(h, max_lag):
    power = np.mean(np.abs(h) ** 2)
    return np.array([np.mean(h[k:] * np.conj(h[: h.size - k])).real / power
                     for k in range(max_lag + 1)])


class TestJakesAutocorrelation:
    def test_zero_lag(self):
        assert jakes_autocorrelation(0.04, 0) == 1.0

    def test_static_channel(self):
        assert jakes_autocorrelation(0.0, 17) == 1.0

    def test_matches_power_series(self):
        x = 2 * math.pi * 0.04
        assert bessel_j0_series(x) == pytest.approx(0.98427, abs=1e-5)
        assert jakes_autocorrelation(0.04, 1) == pytest.approx(bessel_j0_series(x), abs=1e-12)

    def test_range(self):
        values = jakes_autocorrelation(np.linspace(0, 0.5, 200)[:, None], np.arange(50))
        assert values.min() >= -0.4028 and values.max() <= 1.0


class TestFitAr:
    def test_first_order(self):
        model = fit_ar(0.04, 1)
        assert model.coefficients[0] == pytest.approx(0.98427, abs=1e-5)
        assert abs(model.coefficients[0] - jakes_autocorrelation(0.04, 1)) < 1e-12
        assert model.noise_variance == pytest.approx(1 - model.coefficients[0] ** 2, abs=1e-12)
        assert model.noise_variance == pytest.approx(0.03121, abs=1e-5)

    def test_frozen(self):
        model = fit_ar(0.0, 1)
        assert model.coefficients[0] == 1.0
        assert model.noise_variance == 0.0

    def test_second_order_matches_dense_solve(self):
        r = [bessel_j0_series(2 * math.pi * 0.02 * k) for k in range(3)]
        dense = np.linalg.solve(np.array([[r[0], r[1]], [r[1], r[0]]]), np.array(r[1:]))
        np.testing.assert_allclose(fit_ar(0.02, 2).coefficients, dense, atol=1e-10)

    def test_degenerate_static_channel(self):
        with pytest.raises(DegenerateModelError):
            fit_ar(0.0, 2)

    @pytest.mark.parametrize("fdt", [0.005, 0.01, 0.02, 0.04])
    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_residual_power_in_unit_interval(self, fdt, order):
        model = fit_ar(fdt, order)
        assert 0.0 <= model.noise_variance <= 1.0
        assert model.coefficients.size == order

    def test_faster_doppler_gives_smaller_alpha(self):
        alphas = [fit_ar(f, 1).coefficients[0] for f in (0.005, 0.01, 0.02, 0.04)]
        assert all(a > b for a, b in zip(alphas, alphas[1:]))

    @pytest.mark.parametrize("fdt,order", [(0.04, 1), (0.02, 2), (0.04, 3), (0.01, 2)])
    def test_stationary_power_is_unity(self, fdt, order):
        model = fit_ar(fdt, order)
        # companion-form Lyapunov equation gives the stationary covariance
        companion = np.zeros((order, order))
        companion[0] = model.coefficients
        companion[1:, :-1] = np.eye(order - 1)
        q = np.zeros((order, order))
        q[0, 0] = model.noise_variance
        cov = scipy.linalg.solve_discrete_lyapunov(companion, q)
        assert cov[0, 0] == pytest.approx(1.0, abs=1e-9)

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            fit_ar(0.01, 0)

    def test_model_validates_length(self):
        with pytest.raises(ValueError):
            ArModel(2, [0.5], 0.1, 0.01)


class TestFadingProcess:
    def test_frozen_channel_repeats_state(self):
        process = FadingProcess(fit_ar(0.0, 1), 1, np.random.default_rng(0), state=[[0.3 - 0.4j]])
        for _ in range(5):
            assert process.step()[0] == 0.3 - 0.4j

    def test_run_matches_step(self):
        a = FadingProcess(fit_ar(0.02, 2), 3, np.random.default_rng(5))
        b = FadingProcess(fit_ar(0.02, 2), 3, np.random.default_rng(5))
        batch = np.vstack([a.run(4), a.run(1), a.run(7)])
        stepped = np.array([b.step() for _ in range(12)])
        np.testing.assert_allclose(batch, stepped, atol=1e-12)
        np.testing.assert_allclose(a.state, b.state, atol=1e-12)

    def test_lag_one_correlation_matches_jakes(self):
        h = FadingProcess.from_doppler(0.04, 1, rng=1).run(100_000)[:, 0]
        acf = empirical_autocorrelation(h, 1)
        assert acf[1] == pytest.approx(jakes_autocorrelation(0.04, 1), abs=0.02)

    @pytest.mark.parametrize("fdt", [0.01, 0.04])
    def test_first_order_autocorrelation_is_geometric(self, fdt):
        # an AR(1) recursion can only reproduce alpha ** k beyond lag 1
        process = FadingProcess.from_doppler(fdt, 64, rng=2)
        h = process.run(20_000)
        lags = np.arange(21)
        acf = np.array([np.mean(h[k:] * np.conj(h[: h.shape[0] - k])).real for k in lags])
        np.testing.assert_allclose(acf / acf[0], process.model.coefficients[0] ** lags, atol=0.02)

    def test_higher_order_matches_jakes_up_to_model_order(self):
        process = FadingProcess.from_doppler(0.04, 64, rng=3, order=3)
        h = process.run(20_000)
        acf = np.array([np.mean(h[k:] * np.conj(h[: h.shape[0] - k])).real for k in range(4)])
        np.testing.assert_allclose(acf, jakes_autocorrelation(0.04, np.arange(4)), atol=0.02)

    @pytest.mark.parametrize("fdt,order", [(0.01, 1), (0.04, 1), (0.04, 2), (0.3, 1)])
    def test_unit_power(self, fdt, order):
        # stationary start: an ensemble of independent runs averages out slow fades
        h = FadingProcess.from_doppler(fdt, 20_000, rng=4, order=order).run(5)
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.02)

    def test_long_run_unit_power(self):
        h = FadingProcess.from_doppler(0.3, 1, rng=5).run(100_000)
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.02)

    def test_dimensions_independent(self):
        h = FadingProcess.from_doppler(0.04, 3, rng=3).run(100_000)
        for i in range(3):
            for j in range(i + 1, 3):
                assert abs(np.mean(h[:, i] * np.conj(h[:, j]))) < 0.02

    def test_order_fallback_for_static_channel(self):
        process = FadingProcess.from_doppler(0.0, 1, rng=0, order=3)
        assert process.model.order == 1


class TestRicean:
    def test_pure_los(self):
        link = make_ricean(np.inf, 0.04, rng=0)
        h = link.run(1000)
        np.testing.assert_allclose(np.abs(h) ** 2, 1.0, atol=1e-9)

    def test_capped_k_factor(self):
        assert make_ricean(400.0, 0.01, rng=0).k_factor_db == pytest.approx(100.0)
        assert make_ricean(-400.0, 0.01, rng=0).k_factor_db == pytest.approx(-100.0)

    def test_pure_nlos(self):
        link = make_ricean(-np.inf, 0.3, rng=1)
        assert link.los_power < 1e-9
        h = link.run(100_000)
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.02)

    def test_power_split(self):
        for k_db in (-3.0, 0.0, 5.0, 12.0):
            link = make_ricean(k_db, 0.01, rng=2)
            assert link.los_power + link.nlos_power == pytest.approx(1.0, abs=1e-12)
            assert link.k_factor_db == pytest.approx(k_db, abs=1e-9)

    def test_measured_k_factor(self):
        link = make_ricean(10.0, 0.25, rng=3)
        h = link.run(100_000)
        scattered = h - link.los_component
        measured = link.los_power / np.mean(np.abs(scattered) ** 2)
        assert measured == pytest.approx(10.0, abs=0.3)
