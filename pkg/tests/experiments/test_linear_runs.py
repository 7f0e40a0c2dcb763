"""Reproduction runs for the linear Mixup minimiser and gradient checks."""

from __future__ import annotations

import numpy as np
import pytest

from mixup_optimal import datasets
from mixup_optimal.linear import (
    cosine,
    estimate_k,
    margin_residual,
    min_norm_interpolator,
    minimize_mixup_linear,
    mixup_linear_loss,
)
from mixup_optimal.mixing import MixingDistribution
from mixup_optimal.training import init_mlp, loss_and_grad

N_POINTS = 20
DIMENSION = 650
SEEDS = range(50)
ALPHAS = (1.0, 32.0)


class TestOverparameterisedGaussian:
    def test_mixup_finds_the_max_margin_direction(self) -> None:
        max_margin = 0
        for seed in SEEDS:
            ds = datasets.gaussian_binary(N_POINTS, DIMENSION, seed)
            interpolator, certificate = min_norm_interpolator(ds)
            if not certificate.is_max_margin:
                continue
            max_margin += 1
            for alpha in ALPHAS:
                fit = minimize_mixup_linear(
                    ds, MixingDistribution.beta(alpha), same_class_terms=False
                )
                theta = fit.classifier.theta
                k = float(np.mean(fit.classifier.margins(ds.points, ds.signed_labels)))
                assert cosine(theta, interpolator.theta) >= 0.99
                assert margin_residual(theta, ds, k) <= 1e-3 * k
        assert max_margin / len(SEEDS) >= 0.8

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_margin_constant_is_positive(self, alpha: float) -> None:
        assert estimate_k(MixingDistribution.beta(alpha)) > 0.0


def _relative_error(numeric: np.ndarray, analytic: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(numeric)), float(np.linalg.norm(analytic)), 1e-12)
    return float(np.linalg.norm(numeric - analytic)) / scale


class TestGradientSuite:
    @pytest.mark.parametrize("seed", range(20))
    def test_mlp_loss(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        n_in = int(rng.integers(1, 5))
        hidden = int(rng.integers(2, 7))
        k = int(rng.integers(2, 5))
        model = init_mlp([n_in, hidden, k], seed)
        inputs = rng.normal(size=(6, n_in))
        targets = rng.dirichlet(np.ones(k), size=6)
        _, grads = loss_and_grad(model, inputs, targets)
        params = model.params()
        step = 1e-6
        for idx, p in enumerate(params):
            numeric = np.zeros_like(p)
            for pos in np.ndindex(p.shape):
                shifted = [q.copy() for q in params]
                shifted[idx][pos] += step
                up, _ = loss_and_grad(model.with_params(shifted), inputs, targets)
                shifted[idx][pos] -= 2 * step
                down, _ = loss_and_grad(model.with_params(shifted), inputs, targets)
                numeric[pos] = (up - down) / (2 * step)
            assert _relative_error(numeric, grads[idx]) <= 1e-5

    @pytest.mark.parametrize("seed", range(20))
    def test_linear_mixup_loss(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 8))
        ds = datasets.gaussian_binary(int(rng.integers(2, 9)), d, seed)
        dist = MixingDistribution.beta(float(rng.uniform(0.5, 64.0)))
        same_class_terms = bool(seed % 2)
        theta = rng.standard_normal(d)
        _, grad = mixup_linear_loss(theta, ds, dist, same_class_terms=same_class_terms)
        numeric = np.zeros(d)
        step = 1e-6
        for c in range(d):
            e = np.zeros(d)
            e[c] = step
            up, _ = mixup_linear_loss(
                theta + e, ds, dist, same_class_terms=same_class_terms
            )
            down, _ = mixup_linear_loss(
                theta - e, ds, dist, same_class_terms=same_class_terms
            )
            numeric[c] = (up - down) / (2 * step)
        assert _relative_error(numeric, grad) <= 1e-5
