"""Linear classifiers on high-dimensional two-class data.

For n < d points in general position every labeling can be interpolated.
This module compares three solutions that live in span(X):

- the minimum-norm interpolator of the margins (θᵀx_i y_i = 1), with a dual
  sign certificate telling whether it is also the hard-margin SVM;
- an exhaustive active-set hard-margin solver used to check that
  certificate on small problems;
- the minimiser of the linear Mixup loss, which for symmetric mixing
  distributions points in the max-margin direction with common margin
  k(P_f) (see :func:`estimate_k`).
"""

from __future__ import annotations

import logging
import math
from itertools import combinations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq
from scipy.special import expit

from mixup_optimal.constants import (
    ARMIJO_C,
    BACKTRACK_FACTOR,
    DEFAULT_QUADRATURE_NODES,
    LINEAR_GRAD_TOL,
    LINEAR_MAX_ITERS,
    MAX_ACTIVE_SET_POINTS,
)
from mixup_optimal.exceptions import (
    AsymmetricDistributionError,
    ContractError,
    ConvergenceError,
    DegenerateObjectiveError,
    DimensionMismatchError,
    SingularGramError,
    SizeError,
)
from mixup_optimal.mixing import MixingDistribution
from mixup_optimal.models.dataset import LabeledDataset
from mixup_optimal.models.linear import (
    InterpolationCertificate,
    LinearClassifier,
    LinearFit,
)

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


def _span_basis(points: FloatArray) -> FloatArray:
    q, _ = np.linalg.qr(points.T)
    return q


# ---------------------------------------------------------------------------
# Interpolation and max margin
# ---------------------------------------------------------------------------


def min_norm_interpolator(
    ds: LabeledDataset,
) -> tuple[LinearClassifier, InterpolationCertificate]:
    """Solve Gβ = y with G = XXᵀ and return θ = Xᵀβ.

    The margins y_i θᵀx_i all equal 1.  θ is the hard-margin solution
    exactly when y_i β_i > 0 for every i; otherwise the offending indices
    are listed in ``sign_violations``.

    Raises
    ------
    SingularGramError
        If the points are linearly dependent.
    """
    x = ds.points
    y = ds.signed_labels
    gram = x @ x.T
    rank = int(np.linalg.matrix_rank(gram))
    if rank < ds.m:
        raise SingularGramError(
            f"Gram matrix has rank {rank} < {ds.m}; points are not independent",
            rank=rank,
        )
    beta = np.linalg.solve(gram, y)
    theta = x.T @ beta
    violations = tuple(int(i) for i in np.flatnonzero(y * beta <= 0.0))
    certificate = InterpolationCertificate(
        k=1.0,
        dual_coeffs=beta,
        is_max_margin=not violations,
        sign_violations=violations,
    )
    logger.debug(
        "%s: interpolator is max-margin: %s", ds.name, certificate.is_max_margin
    )
    return LinearClassifier(theta=theta, span_basis=_span_basis(x)), certificate


def hard_margin_active_set(ds: LabeledDataset, *, tol: float = 1e-9) -> FloatArray:
    """Hard-margin SVM without bias by enumerating active sets.

    For each subset S of the points, solve Q_SS α = 1 (Q_ij = y_i y_j x_iᵀx_j)
    and keep the solutions with α ≥ 0 whose θ = Σ α_i y_i x_i satisfies
    every constraint y_i θᵀx_i ≥ 1.  The smallest such θ is returned.

    Raises
    ------
    SizeError
        If more than ``MAX_ACTIVE_SET_POINTS`` points are given.
    ContractError
        If no feasible active set exists (the data is not separable).
    """
    if ds.m > MAX_ACTIVE_SET_POINTS:
        raise SizeError(
            f"active-set enumeration supports n <= {MAX_ACTIVE_SET_POINTS}, got {ds.m}"
        )
    x = ds.points
    y = ds.signed_labels
    signed = y[:, None] * x
    q = signed @ signed.T
    best: FloatArray | None = None
    best_norm = math.inf
    for size in range(1, ds.m + 1):
        for subset in combinations(range(ds.m), size):
            idx = list(subset)
            try:
                alpha = np.linalg.solve(q[np.ix_(idx, idx)], np.ones(size))
            except np.linalg.LinAlgError:
                continue
            if np.any(alpha < -tol):
                continue
            theta = signed[idx].T @ alpha
            if np.any(signed @ theta < 1.0 - tol):
                continue
            norm = float(np.linalg.norm(theta))
            if norm < best_norm:
                best, best_norm = theta, norm
    if best is None:
        raise ContractError(f"{ds.name}: no separating hyperplane through the origin")
    return best


def cosine(a: ArrayLike, b: ArrayLike) -> float:
    """Cosine of the angle between two non-zero vectors."""
    u = np.asarray(a, dtype=np.float64).ravel()
    v = np.asarray(b, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise DimensionMismatchError(f"vectors of length {u.size} and {v.size}")
    denom = float(np.linalg.norm(u) * np.linalg.norm(v))
    if denom == 0.0:
        raise ContractError("cosine is undefined for a zero vector")
    return float(u @ v) / denom


def margin_residual(theta: ArrayLike, ds: LabeledDataset, k: float) -> float:
    """max_i |y_i θᵀx_i − k|."""
    margins = ds.signed_labels * (ds.points @ np.asarray(theta, dtype=np.float64))
    return float(np.max(np.abs(margins - k)))


# ---------------------------------------------------------------------------
# Linear Mixup loss
# ---------------------------------------------------------------------------


def _pair_weights(y: FloatArray, same_class_terms: bool) -> FloatArray:
    n = y.size
    if same_class_terms:
        return np.full((n, n), 1.0 / n**2)
    cross = (y[:, None] != y[None, :]).astype(np.float64)
    n_pos = int(np.count_nonzero(y > 0))
    return cross / (2.0 * n_pos * (n - n_pos))


def _loss_from_scores(
    scores: FloatArray,
    y: FloatArray,
    nodes: FloatArray,
    weights: FloatArray,
    pair_weights: FloatArray,
) -> tuple[float, FloatArray]:
    """Loss and its gradient with respect to the scores a = Xθ."""
    lam = nodes[None, None, :]
    u = lam * scores[:, None, None] + (1.0 - lam) * scores[None, :, None]
    pos = (y > 0).astype(np.float64)
    target = lam * pos[:, None, None] + (1.0 - lam) * pos[None, :, None]
    per_node = target * np.logaddexp(0.0, -u) + (1.0 - target) * np.logaddexp(0.0, u)
    loss = float(np.sum(pair_weights * (per_node @ weights)))
    residual = expit(u) - target
    toward_s = residual @ (weights * nodes)
    toward_t = residual @ (weights * (1.0 - nodes))
    grad = (pair_weights * toward_s).sum(axis=1) + (pair_weights * toward_t).sum(axis=0)
    return loss, grad


def mixup_linear_loss(
    theta: ArrayLike,
    ds: LabeledDataset,
    dist: MixingDistribution,
    quadrature_nodes: int = DEFAULT_QUADRATURE_NODES,
    same_class_terms: bool = True,
) -> tuple[float, FloatArray]:
    """Expected logistic Mixup loss of θ and its gradient.

    Averages over ordered pairs (s, t) the quantity
    E_λ[π log(1 + e^{−u}) + (1 − π) log(1 + e^{u})] with u = θᵀ(λs + (1−λ)t)
    and π the mixed weight on the positive class.  λ-expectations use
    Gauss–Legendre quadrature against *dist*.

    With ``same_class_terms=False`` only cross-class pairs are averaged;
    that objective's interpolating minimiser has every margin equal to
    k(P_f).
    """
    th = np.asarray(theta, dtype=np.float64)
    if th.shape != (ds.n,):
        raise DimensionMismatchError(f"theta has shape {th.shape}, expected ({ds.n},)")
    nodes, weights = dist.quadrature(quadrature_nodes)
    y = ds.signed_labels
    loss, score_grad = _loss_from_scores(
        ds.points @ th, y, nodes, weights, _pair_weights(y, same_class_terms)
    )
    return loss, ds.points.T @ score_grad


def minimize_mixup_linear(
    ds: LabeledDataset,
    dist: MixingDistribution,
    max_iters: int = LINEAR_MAX_ITERS,
    grad_tol: float = LINEAR_GRAD_TOL,
    *,
    quadrature_nodes: int = DEFAULT_QUADRATURE_NODES,
    same_class_terms: bool = True,
) -> LinearFit:
    """Minimise :func:`mixup_linear_loss` over span(X).

    Gradient descent in coordinates of an orthonormal span basis, with a
    Barzilai–Borwein trial step and Armijo backtracking.  Stops when the
    gradient norm drops to *grad_tol*.

    Raises
    ------
    AsymmetricDistributionError
        If *dist* is not symmetric about ½.
    ConvergenceError
        If *max_iters* iterations do not reach *grad_tol*.
    """
    if not dist.symmetric:
        raise AsymmetricDistributionError(
            f"{dist.label} is not symmetric; the minimiser is only characterised "
            "for symmetric mixing distributions"
        )
    basis = _span_basis(ds.points)
    features = ds.points @ basis
    y = ds.signed_labels
    nodes, weights = dist.quadrature(quadrature_nodes)
    pair_weights = _pair_weights(y, same_class_terms)

    def objective(w: FloatArray) -> tuple[float, FloatArray]:
        loss, score_grad = _loss_from_scores(
            features @ w, y, nodes, weights, pair_weights
        )
        return loss, features.T @ score_grad

    w = np.zeros(basis.shape[1])
    loss, grad = objective(w)
    grad_norm = float(np.linalg.norm(grad))
    step = 1.0 / max(float(np.linalg.norm(features, 2)) ** 2, 1e-300)
    iteration = 0
    while grad_norm > grad_tol and iteration < max_iters:
        iteration += 1
        t = step
        slack = 4.0 * np.finfo(float).eps * abs(loss)
        while True:
            w_new = w - t * grad
            loss_new, grad_new = objective(w_new)
            if loss_new <= loss - ARMIJO_C * t * grad_norm**2 + slack or t < 1e-30:
                break
            t *= BACKTRACK_FACTOR
        s = w_new - w
        dy = grad_new - grad
        curvature = float(s @ dy)
        step = float(s @ s) / curvature if curvature > 0.0 else t
        w, loss, grad = w_new, loss_new, grad_new
        grad_norm = float(np.linalg.norm(grad))
    if grad_norm > grad_tol:
        raise ConvergenceError(
            f"gradient norm {grad_norm:.3g} after {iteration} iterations",
            grad_norm=grad_norm,
            iterations=iteration,
        )
    logger.info(
        "%s: mixup minimiser after %d iterations, |grad| %.3g",
        ds.name,
        iteration,
        grad_norm,
    )
    return LinearFit(
        classifier=LinearClassifier(theta=basis @ w, span_basis=basis),
        loss=loss,
        grad_norm=grad_norm,
        iterations=iteration,
        converged=True,
    )


# ---------------------------------------------------------------------------
# Margin constant
# ---------------------------------------------------------------------------


def _phi_prime(u: float, nodes: FloatArray, weights: FloatArray) -> float:
    c = 1.0 - 2.0 * nodes
    terms = nodes * c * expit(c * u) - (1.0 - nodes) * c * expit(-c * u)
    return float(terms @ weights)


def estimate_k(
    dist: MixingDistribution,
    tol: float = 1e-12,
    quadrature_nodes: int = DEFAULT_QUADRATURE_NODES,
) -> float:
    """Margin k(P_f) minimising the one-dimensional Mixup loss

    φ(u) = E_λ[λ log(1 + e^{(1−2λ)u}) + (1−λ) log(1 + e^{(2λ−1)u})].

    φ is convex with φ'(0) = −2 E[(λ − ½)²] < 0, so the root of φ' is found
    by doubling an upper bracket and then ``brentq``.

    Raises
    ------
    AsymmetricDistributionError
        If *dist* is not symmetric about ½.
    DegenerateObjectiveError
        If φ is flat (all mass at λ = ½).
    """
    if not dist.symmetric:
        raise AsymmetricDistributionError(f"{dist.label} is not symmetric about 1/2")
    nodes, weights = dist.quadrature(quadrature_nodes)
    slope0 = _phi_prime(0.0, nodes, weights)
    if slope0 > -1e-12:
        raise DegenerateObjectiveError(
            f"objective is flat for {dist.label} (slope at 0 is {slope0:.3g})"
        )
    hi = 1.0
    while _phi_prime(hi, nodes, weights) < 0.0:
        hi *= 2.0
        if hi > 1e8:
            raise DegenerateObjectiveError(f"no minimiser found for {dist.label}")
    k = float(brentq(_phi_prime, 0.0, hi, args=(nodes, weights), xtol=tol))
    logger.debug("k(%s) = %.10g", dist.label, k)
    return k
