"""Unit tests for mixup_optimal.mixing."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from mixup_optimal.exceptions import (
    ContractError,
    InvalidDistributionError,
    UnsupportedDistributionWarning,
)
from mixup_optimal.mixing import (
    MixingDistribution,
    alpha_threshold,
    betainc,
    load_density_csv,
)

# ---------------------------------------------------------------------------
# Incomplete beta function
# ---------------------------------------------------------------------------


class TestBetainc:
    @pytest.mark.parametrize("a,b", [(0.5, 0.5), (1.0, 1.0), (2.0, 3.0), (33.0, 32.0)])
    def test_matches_scipy(self, a: float, b: float) -> None:
        xs = np.linspace(0.0, 1.0, 41)
        expected = special.betainc(a, b, xs)
        np.testing.assert_allclose(betainc(a, b, xs), expected, atol=1e-12)

    def test_large_parameters(self) -> None:
        xs = np.array([0.45, 0.49, 0.5, 0.51, 0.55])
        np.testing.assert_allclose(
            betainc(2048.0, 2048.0, xs), special.betainc(2048.0, 2048.0, xs), atol=1e-11
        )

    def test_clamps_outside_unit_interval(self) -> None:
        assert betainc(2.0, 2.0, -0.5) == 0.0
        assert betainc(2.0, 2.0, 1.5) == 1.0


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


class TestConstruction:
    @pytest.mark.parametrize("alpha", [0.0, -1.0, math.inf, math.nan])
    def test_beta_rejects_bad_alpha(self, alpha: float) -> None:
        with pytest.raises(InvalidDistributionError):
            MixingDistribution.beta(alpha)

    def test_small_alpha_warns(self) -> None:
        with pytest.warns(UnsupportedDistributionWarning):
            MixingDistribution.beta(0.3)

    def test_tabulated_rejects_negative_density(self) -> None:
        with pytest.raises(InvalidDistributionError, match="negative"):
            MixingDistribution.tabulated([0.0, 0.5, 1.0], [1.0, -0.1, 1.0])

    def test_tabulated_rejects_unsorted_grid(self) -> None:
        with pytest.raises(InvalidDistributionError):
            MixingDistribution.tabulated([0.0, 0.7, 0.5, 1.0], [1.0, 1.0, 1.0, 1.0])

    def test_tabulated_is_renormalised(self) -> None:
        dist = MixingDistribution.tabulated([0.0, 1.0], [2.0, 2.0])
        assert dist.renormalization == pytest.approx(0.5)
        assert dist.interval_mass(0.0, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_tabulated_symmetry_detection(self) -> None:
        tent = MixingDistribution.tabulated([0.0, 0.5, 1.0], [0.0, 2.0, 0.0])
        ramp = MixingDistribution.tabulated([0.0, 1.0], [0.0, 2.0])
        assert tent.symmetric
        assert not ramp.symmetric

    def test_from_spec(self) -> None:
        assert MixingDistribution.from_spec("beta", 4.0).alpha == 4.0
        assert MixingDistribution.from_spec("uniform").label == "uniform"
        with pytest.raises(InvalidDistributionError):
            MixingDistribution.from_spec("beta")
        with pytest.raises(InvalidDistributionError):
            MixingDistribution.from_spec("gamma", 1.0)

    def test_load_density_csv(self, tmp_path: Path) -> None:
        path = tmp_path / "tent.csv"
        path.write_text("lambda,density\n0,0\n0.5,4\n1,0\n")
        dist = load_density_csv(path)
        assert dist.renormalization == pytest.approx(0.5)
        assert dist.cdf(0.5) == pytest.approx(0.5)

    def test_load_density_csv_names_bad_line(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.csv"
        path.write_text("lambda,density\n0,1\nx,1\n")
        with pytest.raises(InvalidDistributionError, match=":3:"):
            load_density_csv(path)


# ---------------------------------------------------------------------------
# CDF and interval queries
# ---------------------------------------------------------------------------


class TestCdf:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 32.0, 1024.0])
    def test_beta_median_is_half(self, alpha: float) -> None:
        assert MixingDistribution.beta(alpha).cdf(0.5) == pytest.approx(0.5, abs=1e-12)

    def test_uniform_identity(self, uniform: MixingDistribution) -> None:
        assert uniform.cdf(0.3) == pytest.approx(0.3)

    def test_beta2_closed_form(self) -> None:
        cdf = MixingDistribution.beta(2.0).cdf(0.25)
        assert cdf == pytest.approx(0.15625, abs=1e-12)

    def test_end_points_and_monotone(self, beta32: MixingDistribution) -> None:
        xs = np.linspace(0.0, 1.0, 201)
        values = beta32.cdf(xs)
        assert values[0] == 0.0
        assert values[-1] == pytest.approx(1.0)
        assert np.all(np.diff(values) >= 0.0)

    def test_rejects_out_of_range(self, uniform: MixingDistribution) -> None:
        with pytest.raises(ContractError):
            uniform.cdf(1.2)

    def test_agrees_with_reference_on_random_pairs(self) -> None:
        rng = np.random.default_rng(7)
        alphas = np.exp(rng.uniform(math.log(0.5), math.log(2048.0), 100))
        xs = rng.uniform(0.0, 1.0, 100)
        for alpha, x in zip(alphas, xs):
            dist = MixingDistribution.beta(float(alpha))
            assert dist.cdf(float(x)) == pytest.approx(
                stats.beta.cdf(x, alpha, alpha), abs=1e-8
            )


class TestIntervalMass:
    def test_uniform(self, uniform: MixingDistribution) -> None:
        assert uniform.interval_mass(0.45, 0.55) == pytest.approx(0.1)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 32.0, 2048.0])
    def test_total_mass(self, alpha: float) -> None:
        assert MixingDistribution.beta(alpha).interval_mass(0.0, 1.0) == pytest.approx(
            1.0, abs=1e-10
        )

    def test_beta32_against_numeric_integration(
        self, beta32: MixingDistribution
    ) -> None:
        expected, _ = integrate.quad(
            lambda lam: stats.beta.pdf(lam, 32.0, 32.0), 0.45, 0.55, epsabs=1e-13
        )
        assert beta32.interval_mass(0.45, 0.55) == pytest.approx(expected, abs=1e-8)

    def test_clamped_and_reversed(self, uniform: MixingDistribution) -> None:
        assert uniform.interval_mass(-1.0, 0.2) == pytest.approx(0.2)
        assert uniform.interval_mass(0.6, 0.4) == 0.0

    def test_vectorised(self, uniform: MixingDistribution) -> None:
        out = uniform.interval_mass(np.array([0.0, 0.5]), np.array([0.1, 0.7]))
        np.testing.assert_allclose(out, [0.1, 0.2])

    @pytest.mark.parametrize("alpha", [1.0, 2.0, 32.0])
    def test_variance_by_quadrature(self, alpha: float) -> None:
        nodes, weights = MixingDistribution.beta(alpha).quadrature(64)
        variance = float(np.sum(weights * (nodes - 0.5) ** 2))
        assert variance == pytest.approx(1.0 / (8.0 * alpha + 4.0), abs=1e-8)
        assert MixingDistribution.beta(alpha).variance == pytest.approx(variance)


class TestFirstMoment:
    def test_uniform_examples(self, uniform: MixingDistribution) -> None:
        assert uniform.interval_first_moment(0.0, 0.1) == pytest.approx(0.005)
        assert uniform.interval_first_moment(0.9, 1.0) == pytest.approx(0.095)

    def test_beta_mean(self) -> None:
        assert MixingDistribution.beta(2.0).interval_first_moment(0.0, 1.0) == (
            pytest.approx(0.5, abs=1e-12)
        )

    def test_tabulated_exact(self) -> None:
        ramp = MixingDistribution.tabulated([0.0, 1.0], [0.0, 2.0])
        # ∫_0^1 2λ² dλ
        assert ramp.interval_first_moment(0.0, 1.0) == pytest.approx(2.0 / 3.0)

    @settings(max_examples=60, deadline=None)
    @given(
        alpha=st.floats(0.5, 512.0),
        a=st.floats(0.0, 1.0),
        width=st.floats(0.0, 1.0),
    )
    def test_bounds_and_mirror(self, alpha: float, a: float, width: float) -> None:
        dist = MixingDistribution.beta(alpha)
        b = min(1.0, a + width)
        mass = dist.interval_mass(a, b)
        moment = dist.interval_first_moment(a, b)
        assert a * mass - 1e-12 <= moment <= b * mass + 1e-12
        assert 0.0 <= moment <= mass + 1e-12
        assert dist.interval_mass(1.0 - b, 1.0 - a) == pytest.approx(mass, abs=1e-10)
        assert dist.interval_first_moment(1.0 - b, 1.0 - a) == pytest.approx(
            mass - moment, abs=1e-10
        )


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


class TestSampling:
    def test_uniform_mean(self, uniform: MixingDistribution) -> None:
        draws = uniform.samples(np.random.default_rng(1), 100_000)
        assert abs(draws.mean() - 0.5) < 0.005

    def test_beta1024_variance(self) -> None:
        dist = MixingDistribution.beta(1024.0)
        draws = dist.samples(np.random.default_rng(2), 100_000)
        assert draws.var() == pytest.approx(1.0 / 8196.0, rel=0.2)

    def test_beta1_is_uniform(self) -> None:
        draws = MixingDistribution.beta(1.0).samples(np.random.default_rng(3), 100_000)
        assert stats.kstest(draws, "uniform").statistic < 0.01

    def test_reproducible(self, beta32: MixingDistribution) -> None:
        first = beta32.samples(np.random.default_rng(9), 50)
        second = beta32.samples(np.random.default_rng(9), 50)
        np.testing.assert_array_equal(first, second)

    def test_prefix_stable(self, beta32: MixingDistribution) -> None:
        long = beta32.samples(np.random.default_rng(4), 20)
        short = beta32.samples(np.random.default_rng(4), 5)
        np.testing.assert_array_equal(long[:5], short)

    def test_tabulated_sampling_mean(self) -> None:
        ramp = MixingDistribution.tabulated([0.0, 1.0], [0.0, 2.0])
        draws = ramp.samples(np.random.default_rng(5), 100_000)
        assert draws.mean() == pytest.approx(2.0 / 3.0, abs=0.005)

    def test_sample_scalar(self, uniform: MixingDistribution) -> None:
        assert 0.0 <= uniform.sample(np.random.default_rng(0)) <= 1.0


# ---------------------------------------------------------------------------
# Alpha threshold
# ---------------------------------------------------------------------------


class TestAlphaThreshold:
    def test_values(self) -> None:
        assert alpha_threshold(0.1) == pytest.approx(68.8147, abs=1e-4)
        assert alpha_threshold(1.0) == pytest.approx(0.1931, abs=1e-4)

    def test_concentration_above_threshold(self) -> None:
        assert alpha_threshold(0.1) < 70.0
        assert MixingDistribution.beta(70.0).interval_mass(0.4, 0.6) > 0.5

    def test_rejects_non_positive(self) -> None:
        with pytest.raises(ContractError):
            alpha_threshold(0.0)
