"""Unit tests for mixup_optimal.oracle."""

from __future__ import annotations

import math

import numpy as np
import pytest

from mixup_optimal import datasets
from mixup_optimal.exceptions import (
    AsymmetricDistributionError,
    ContractError,
    DimensionMismatchError,
    OracleDomainError,
)
from mixup_optimal.mixing import MixingDistribution, alpha_threshold
from mixup_optimal.models.dataset import LabeledDataset
from mixup_optimal.models.oracle import ClassProbs, GridSpec
from mixup_optimal.oracle import (
    boundary_grid,
    default_tol_line,
    estimate_xi_monte_carlo,
    find_crossover_alpha,
    h_epsilon,
    h_epsilon_symmetric,
    h_limit,
    segment_ball_interval,
    segment_hits,
    xi_table,
)

# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------


class TestSegmentBallInterval:
    def test_scalar_segment(self) -> None:
        assert segment_ball_interval(0.0, 2.0, 1.0, 0.1) == (
            pytest.approx(0.45),
            pytest.approx(0.55),
        )

    def test_degenerate_pair(self) -> None:
        interval = segment_ball_interval([1.0, 1.0], [1.0, 1.0], [1.0, 1.0], 0.3)
        assert interval == (0.0, 1.0)
        assert segment_ball_interval([1.0, 1.0], [1.0, 1.0], [2.0, 1.0], 0.3) is None

    def test_miss(self) -> None:
        assert segment_ball_interval([0.0, 1.0], [0.0, -1.0], [1.0, 0.0], 0.5) is None

    def test_clipped_at_end_point(self) -> None:
        # x = q: the ball covers λ ∈ [0, 0.1] only.
        assert segment_ball_interval(0.0, 1.0, 1.0, 0.1) == (
            pytest.approx(0.0),
            pytest.approx(0.1),
        )

    def test_zero_radius_through_point(self) -> None:
        assert segment_ball_interval(0.0, 2.0, 1.0, 0.0) == (
            pytest.approx(0.5),
            pytest.approx(0.5),
        )

    def test_dimension_mismatch(self) -> None:
        with pytest.raises(DimensionMismatchError):
            segment_ball_interval([0.0, 1.0], [1.0], [0.0, 0.0], 0.1)

    def test_negative_radius(self) -> None:
        with pytest.raises(ContractError):
            segment_ball_interval(0.0, 1.0, 0.5, -0.1)


# ---------------------------------------------------------------------------
# ξ tables
# ---------------------------------------------------------------------------


class TestXiTable:
    def test_x3k2_hand_enumeration(
        self, x3k2: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        table = xi_table(x3k2, uniform, [1.0], 0.1)
        assert table.xi[0, 0] == pytest.approx(2 / 9 * 0.1)
        assert table.xi[1, 1] == pytest.approx(1 / 9)
        assert table.xi_lambda[0, 1] == pytest.approx(2 / 9 * 0.005)
        assert table.xi_lambda[1, 0] == pytest.approx(2 / 9 * 0.095)
        assert table.in_xmix

    def test_cross_origin(
        self, cross: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        table = xi_table(cross, uniform, [0.0, 0.0], 0.1)
        assert table.xi[0, 0] == pytest.approx(0.0125)
        assert table.xi[1, 1] == pytest.approx(0.0125)
        assert table.xi[0, 1] == 0.0
        assert table.xi[1, 0] == 0.0

    def test_far_probe(
        self, cross: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        table = xi_table(cross, uniform, [5.0, 5.0], 0.1)
        assert not table.in_xmix
        assert table.total == 0.0

    def test_invariants(self, beta32: MixingDistribution) -> None:
        ds = datasets.two_moons(6, 0.3, 0.2, seed=4)
        rng = np.random.default_rng(0)
        for x in rng.uniform(-1.0, 2.0, size=(20, 2)):
            table = xi_table(ds, beta32, x, 0.3)
            assert np.all(table.xi_lambda >= 0.0)
            assert np.all(table.xi_lambda <= table.xi + 1e-15)
            assert table.total <= 1.0 + 1e-12

    def test_rejects_non_positive_eps(
        self, x3k2: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        with pytest.raises(ContractError):
            xi_table(x3k2, uniform, [1.0], 0.0)

    def test_probe_dimension(
        self, x3k2: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        with pytest.raises(DimensionMismatchError):
            xi_table(x3k2, uniform, [1.0, 0.0], 0.1)


class TestMonteCarloAgreement:
    @pytest.mark.parametrize(
        "spec,probe,eps",
        [("x3k2", [1.0], 0.1), ("cross", [0.0, 0.3], 0.2), ("x5k3", [2.4], 0.3)],
    )
    def test_sampling_matches_exact(
        self, spec: str, probe: list[float], eps: float
    ) -> None:
        ds = datasets.from_spec(spec)
        dist = MixingDistribution.beta(2.0)
        exact = xi_table(ds, dist, probe, eps)
        estimate, se, se_lambda = estimate_xi_monte_carlo(
            ds, dist, probe, eps, 200_000, np.random.default_rng(11)
        )
        assert np.all(np.abs(estimate.xi - exact.xi) <= 5 * se + 1e-4)
        lambda_gap = np.abs(estimate.xi_lambda - exact.xi_lambda)
        assert np.all(lambda_gap <= 5 * se_lambda + 1e-4)

    def test_reproducible(
        self, x3k2: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        first, _, _ = estimate_xi_monte_carlo(
            x3k2, uniform, [1.0], 0.1, 1000, np.random.default_rng(3)
        )
        second, _, _ = estimate_xi_monte_carlo(
            x3k2, uniform, [1.0], 0.1, 1000, np.random.default_rng(3)
        )
        np.testing.assert_array_equal(first.xi, second.xi)


# ---------------------------------------------------------------------------
# Fixed-radius classifier
# ---------------------------------------------------------------------------


class TestHEpsilon:
    def test_x3k2_uniform(
        self, x3k2: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        probs = h_epsilon(x3k2, uniform, [1.0], 0.1)
        assert probs[1] == pytest.approx(0.1375, abs=1e-9)
        assert probs[2] == pytest.approx(0.8625, abs=1e-9)
        assert probs.argmax == 2

    def test_x3k2_fails_above_threshold(self, x3k2: LabeledDataset) -> None:
        alpha = math.ceil(alpha_threshold(0.1)) + 1
        assert alpha == 70
        probs = h_epsilon(x3k2, MixingDistribution.beta(alpha), [1.0], 0.1)
        assert probs[1] > 0.5

    @pytest.mark.parametrize("eps", [0.01, 0.1, 0.3, 0.49])
    def test_cross_origin_tie(
        self, cross: LabeledDataset, uniform: MixingDistribution, eps: float
    ) -> None:
        probs = h_epsilon(cross, uniform, [0.0, 0.0], eps)
        np.testing.assert_allclose(probs.probs, [0.5, 0.5], atol=1e-12)
        assert probs.is_tied
        assert probs.argmax == 1

    def test_outside_xmix(
        self, cross: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        with pytest.raises(OracleDomainError):
            h_epsilon(cross, uniform, [5.0, 5.0], 0.1)

    def test_single_class_neighbourhood_is_one_hot(
        self, cross: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        assert h_epsilon(cross, uniform, [0.0, 0.5], 0.1).is_one_hot
        assert h_epsilon_symmetric(cross, uniform, [0.0, 0.5], 0.1).is_one_hot

    def test_continuity_at_data_points(self, uniform: MixingDistribution) -> None:
        ds = datasets.four_point_cross()
        for x, label in zip(ds.points, ds.labels):
            gaps = []
            for eps in (0.1, 0.05, 0.01, 0.001):
                probs = h_epsilon(ds, uniform, x, eps)
                gaps.append(1.0 - probs[int(label)])
            assert gaps == sorted(gaps, reverse=True)
            assert gaps[-1] < 0.01


class TestHEpsilonSymmetric:
    def test_matches_general_form(self) -> None:
        rng = np.random.default_rng(21)
        makers = [
            lambda s: datasets.two_moons(4, 0.2, 0.3, seed=s),
            lambda s: datasets.alternating_line(int(3 + s % 6), int(2 + s % 2)),
            lambda s: datasets.gaussian_binary(6, int(2 + s % 2), seed=s),
        ]
        checked = 0
        for trial in range(200):
            ds = makers[trial % 3](trial)
            dist = MixingDistribution.beta(float(rng.uniform(0.5, 64.0)))
            p, q = ds.points[rng.choice(ds.m, 2, replace=False)]
            lam = rng.uniform(0.2, 0.8)
            x = lam * p + (1.0 - lam) * q + rng.normal(0.0, 0.02, ds.n)
            eps = float(rng.uniform(0.05, 0.5))
            try:
                general = h_epsilon(ds, dist, x, eps)
            except OracleDomainError:
                continue
            simplified = h_epsilon_symmetric(ds, dist, x, eps)
            np.testing.assert_allclose(simplified.probs, general.probs, atol=1e-9)
            checked += 1
        assert checked >= 150

    def test_x3k2_value(
        self, x3k2: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        probs = h_epsilon_symmetric(x3k2, uniform, [1.0], 0.1)
        assert probs[1] == pytest.approx(0.1375)

    def test_asymmetric_rejected(self, x3k2: LabeledDataset) -> None:
        ramp = MixingDistribution.tabulated([0.0, 1.0], [0.0, 2.0])
        with pytest.raises(AsymmetricDistributionError):
            h_epsilon_symmetric(x3k2, ramp, [1.0], 0.1)


# ---------------------------------------------------------------------------
# Limit classifier
# ---------------------------------------------------------------------------


class TestHLimit:
    def test_cross_origin(
        self, cross: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        probs = h_limit(cross, uniform, [0.0, 0.0])
        assert probs is not None
        np.testing.assert_allclose(probs.probs, [0.5, 0.5], atol=1e-9)

    def test_cross_on_class1_segment(
        self, cross: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        probs = h_limit(cross, uniform, [0.0, 0.5])
        assert probs is not None
        np.testing.assert_allclose(probs.probs, [1.0, 0.0], atol=1e-9)

    def test_data_point_is_one_hot(
        self, x3k2: LabeledDataset, beta32: MixingDistribution
    ) -> None:
        probs = h_limit(x3k2, beta32, [1.0])
        assert probs is not None
        np.testing.assert_array_equal(probs.probs, [0.0, 1.0])

    def test_every_moons_point_is_one_hot(
        self, clean_moons: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        for x, label in zip(clean_moons.points, clean_moons.labels):
            probs = h_limit(clean_moons, uniform, x)
            assert probs is not None
            assert probs[int(label)] == 1.0

    def test_off_segments_is_undefined(
        self, cross: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        assert h_limit(cross, uniform, [0.3, 0.2]) is None

    def test_x3k2_between_points(
        self, x3k2: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        # At 0.5 the pairs (0,1), (1,0), (0,2), (2,0) all pass through.
        probs = h_limit(x3k2, uniform, [0.5])
        assert probs is not None
        assert probs.probs.sum() == pytest.approx(1.0)
        assert probs[1] > 0.5

    def test_default_tolerance_scales_with_diameter(self, x3k2: LabeledDataset) -> None:
        assert default_tol_line(x3k2) == pytest.approx(2e-9)


class TestSegmentHits:
    def test_near_class1_end(self, cross: LabeledDataset) -> None:
        hits = segment_hits(cross, [0.0, 0.9], 0.05)
        assert hits
        assert all(1 in hit.classes for hit in hits)

    def test_lambda_star_on_through_segments(self, cross: LabeledDataset) -> None:
        hits = segment_hits(cross, [0.0, 0.0], 0.1)
        through = [h for h in hits if h.lambda_star is not None]
        assert {h.classes for h in through} == {(1, 1), (2, 2)}
        assert all(h.lambda_star == pytest.approx(0.5) for h in through)


# ---------------------------------------------------------------------------
# Grids and crossover
# ---------------------------------------------------------------------------


class TestBoundaryGrid:
    def test_cross_origin_near_tie(
        self, cross: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        spec = GridSpec(-1.5, 1.5, -1.5, 1.5, 101, 101)
        grid = boundary_grid(cross, uniform, spec)
        centre = grid.probs[50, 50]
        assert abs(centre[0] - centre[1]) < 1e-6
        assert grid.labels[50, 50] == 1
        assert grid.labels[0, 0] == 0

    def test_outside_everything(
        self, cross: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        spec = GridSpec(4.0, 5.0, 4.0, 5.0, 5, 5)
        grid = boundary_grid(cross, uniform, spec, eps=0.1)
        assert np.all(grid.labels == 0)
        assert np.all(np.isnan(grid.probs))

    def test_fixed_radius_grid(
        self, cross: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        spec = GridSpec(-1.0, 1.0, -1.0, 1.0, 5, 5)
        grid = boundary_grid(cross, uniform, spec, eps=0.3)
        # Cell (0, 0.5) lies on the class-1 segment only.
        assert grid.labels[3, 2] == 1
        rows = grid.rows()
        assert len(rows) == 25
        assert set(rows[0]) == {"x", "y", "label", "p1", "p2"}

    def test_needs_two_dimensions(
        self, x3k2: LabeledDataset, uniform: MixingDistribution
    ) -> None:
        with pytest.raises(DimensionMismatchError):
            boundary_grid(x3k2, uniform, GridSpec(0.0, 1.0, 0.0, 1.0, 3, 3))


class TestCrossover:
    def test_between_one_and_threshold(self, x3k2: LabeledDataset) -> None:
        alpha = find_crossover_alpha(x3k2, [1.0], 0.1, cls=1)
        assert 1.0 < alpha < 70.0
        probs = h_epsilon(x3k2, MixingDistribution.beta(alpha), [1.0], 0.1)
        assert probs[1] == pytest.approx(0.5, abs=1e-4)

    def test_class_from_data_point(self, x3k2: LabeledDataset) -> None:
        # Class 2 at its own point crosses the same α from above.
        assert find_crossover_alpha(x3k2, [1.0], 0.1) == pytest.approx(
            find_crossover_alpha(x3k2, [1.0], 0.1, cls=1), rel=1e-4
        )

    def test_needs_class_off_data(self, x3k2: LabeledDataset) -> None:
        with pytest.raises(ContractError):
            find_crossover_alpha(x3k2, [0.5], 0.1)


class TestClassProbs:
    def test_rejects_non_simplex(self) -> None:
        with pytest.raises(ContractError):
            ClassProbs(np.array([0.7, 0.7]))

    def test_to_dict(self) -> None:
        assert ClassProbs(np.array([0.25, 0.75])).to_dict() == {
            "probs": [0.25, 0.75],
            "argmax": 2,
        }
