"""Closed-form Mixup-optimal classifier on finite datasets.

For a probe point x and radius ε the oracle enumerates every ordered pair
(p, q) of support points (the diagonal p = q included), finds the λ
interval on which λp + (1−λ)q stays inside the ball B_ε(x), and integrates
the mixing density over it.  Those masses fill the ξ tables, and the
classifier is

    h^i(x) ∝ ξ^{i,i} + Σ_{j≠i} (ξ_λ^{i,j} + ξ^{j,i} − ξ_λ^{j,i}).

:func:`h_limit` evaluates the ε → 0 limit directly: a segment passing
through x at parameter λ* contributes weight f(λ*) / (m²‖p − q‖).

Usage::

    from mixup_optimal.datasets import alternating_line
    from mixup_optimal.mixing import MixingDistribution
    from mixup_optimal.oracle import h_epsilon

    probs = h_epsilon(alternating_line(3, 2), MixingDistribution.uniform(), [1.0], 0.1)
    probs[1]  # ≈ 0.1375
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize

from mixup_optimal.constants import GRID_LOG_EVERY, TOL_LINE_SCALE
from mixup_optimal.exceptions import (
    AsymmetricDistributionError,
    ContractError,
    DimensionMismatchError,
    OracleDomainError,
)
from mixup_optimal.mixing import MixingDistribution, alpha_threshold
from mixup_optimal.models.dataset import LabeledDataset
from mixup_optimal.models.oracle import (
    BoundaryGrid,
    ClassProbs,
    GridSpec,
    SegmentHit,
    XiTable,
)

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


# ---------------------------------------------------------------------------
# Segment / ball geometry
# ---------------------------------------------------------------------------


def _as_vector(v: ArrayLike) -> FloatArray:
    return np.atleast_1d(np.asarray(v, dtype=np.float64)).ravel()


def segment_ball_interval(
    p: ArrayLike, q: ArrayLike, x: ArrayLike, eps: float
) -> tuple[float, float] | None:
    """λ-interval on which λp + (1−λ)q lies in the closed ball B_ε(x).

    Parameters
    ----------
    p, q:
        Segment end points; λ weights *p*.
    x:
        Ball centre.
    eps:
        Ball radius (≥ 0).

    Returns
    -------
    tuple[float, float] | None:
        ``(a, b)`` with ``0 <= a <= b <= 1``, or ``None`` when the segment
        misses the ball.  For ``p == q`` the interval is ``(0, 1)`` when
        ‖p − x‖ ≤ ε.

    Raises
    ------
    DimensionMismatchError
        If the vectors differ in dimension.
    """
    pv, qv, xv = _as_vector(p), _as_vector(q), _as_vector(x)
    if not (pv.shape == qv.shape == xv.shape):
        raise DimensionMismatchError(
            f"dimension mismatch: p{pv.shape}, q{qv.shape}, x{xv.shape}"
        )
    if eps < 0:
        raise ContractError(f"eps must be >= 0, got {eps}")
    lo, hi, valid = _intervals(
        (pv - qv)[None, :], (qv - xv)[None, :], eps
    )
    if not valid[0]:
        return None
    return float(lo[0]), float(hi[0])


def _intervals(
    diff: FloatArray, w: FloatArray, eps: float
) -> tuple[FloatArray, FloatArray, NDArray[np.bool_]]:
    """Vectorised ball/segment intersection.

    ``diff`` rows are p − q and ``w`` rows are q − x.
    """
    sq = np.einsum("ij,ij->i", diff, diff)
    degenerate = sq == 0.0
    safe = np.where(degenerate, 1.0, sq)
    centre = np.where(degenerate, 0.5, -np.einsum("ij,ij->i", w, diff) / safe)
    closest = w + centre[:, None] * diff
    perp2 = np.einsum("ij,ij->i", closest, closest)
    eps2 = eps * eps
    half = np.sqrt(np.maximum(eps2 - perp2, 0.0) / safe)
    half = np.where(degenerate, np.inf, half)
    start = centre - half
    stop = centre + half
    valid = (perp2 <= eps2) & (start <= 1.0) & (stop >= 0.0)
    return np.clip(start, 0.0, 1.0), np.clip(stop, 0.0, 1.0), valid


@dataclass(frozen=True, eq=False)
class _Pairs:
    """All m² ordered pairs of a dataset, flattened p-major."""

    p_idx: NDArray[np.intp]
    q_idx: NDArray[np.intp]
    diff: FloatArray
    norm: FloatArray
    cls_p: NDArray[np.intp]
    cls_q: NDArray[np.intp]

    @classmethod
    def of(cls, ds: LabeledDataset) -> _Pairs:
        m = ds.m
        p_idx = np.repeat(np.arange(m), m)
        q_idx = np.tile(np.arange(m), m)
        diff = ds.points[p_idx] - ds.points[q_idx]
        labels0 = ds.labels.astype(np.intp) - 1
        return cls(
            p_idx=p_idx,
            q_idx=q_idx,
            diff=diff,
            norm=np.sqrt(np.einsum("ij,ij->i", diff, diff)),
            cls_p=labels0[p_idx],
            cls_q=labels0[q_idx],
        )


def _check_probe(ds: LabeledDataset, x: ArrayLike) -> FloatArray:
    xv = _as_vector(x)
    if xv.shape[0] != ds.n:
        raise DimensionMismatchError(
            f"probe has dimension {xv.shape[0]}, dataset has {ds.n}"
        )
    return xv


def default_tol_line(ds: LabeledDataset) -> float:
    """1e−9 × dataset diameter (1e−9 for a single point)."""
    return TOL_LINE_SCALE * (ds.diameter if ds.diameter > 0 else 1.0)


# ---------------------------------------------------------------------------
# ξ tables
# ---------------------------------------------------------------------------


def _xi_arrays(
    pairs: _Pairs,
    ds: LabeledDataset,
    dist: MixingDistribution,
    x: FloatArray,
    eps: float,
) -> tuple[FloatArray, FloatArray]:
    w = ds.points[pairs.q_idx] - x
    lo, hi, valid = _intervals(pairs.diff, w, eps)
    xi = np.zeros((ds.k, ds.k))
    xi_lambda = np.zeros((ds.k, ds.k))
    if np.any(valid):
        scale = 1.0 / (ds.m * ds.m)
        mass = np.asarray(dist.interval_mass(lo[valid], hi[valid])) * scale
        moment = np.asarray(dist.interval_first_moment(lo[valid], hi[valid])) * scale
        rows, cols = pairs.cls_p[valid], pairs.cls_q[valid]
        np.add.at(xi, (rows, cols), mass)
        np.add.at(xi_lambda, (rows, cols), moment)
    return xi, xi_lambda


def xi_table(
    ds: LabeledDataset, dist: MixingDistribution, x: ArrayLike, eps: float
) -> XiTable:
    """Exact ξ^{i,j} and ξ_λ^{i,j} at probe *x* for radius *eps*.

    Every ordered pair (p, q) ∈ X_i × X_j contributes m⁻² times the P_f
    mass (and first moment) of its λ interval inside B_ε(x).

    Raises
    ------
    ContractError
        If ``eps <= 0``.
    """
    if not eps > 0:
        raise ContractError(f"eps must be positive, got {eps}")
    xv = _check_probe(ds, x)
    xi, xi_lambda = _xi_arrays(_Pairs.of(ds), ds, dist, xv, eps)
    return XiTable(xi=xi, xi_lambda=xi_lambda, epsilon=float(eps), probe=xv)


def _coefficients(
    xi: FloatArray, xi_lambda: FloatArray, *, symmetric: bool = False
) -> FloatArray:
    diag = np.diag(xi)
    diag_lambda = np.diag(xi_lambda)
    row_lambda = xi_lambda.sum(axis=1) - diag_lambda
    if symmetric:
        coef = diag + 2.0 * row_lambda
    else:
        col_xi = xi.sum(axis=0) - diag
        col_lambda = xi_lambda.sum(axis=0) - diag_lambda
        coef = diag + row_lambda + col_xi - col_lambda
    return np.maximum(coef, 0.0)


def h_from_table(table: XiTable, *, symmetric: bool = False) -> ClassProbs:
    """Class probabilities from the optimal-prediction coefficients of *table*.

    Classes with a zero coefficient receive probability 0.

    Raises
    ------
    OracleDomainError
        If the table carries no mass (x outside the ε-inflated X_mix).
    """
    if not table.in_xmix:
        raise OracleDomainError(
            f"x outside ε-inflated X_mix (x={table.probe.tolist()}, ε={table.epsilon})"
        )
    coef = _coefficients(table.xi, table.xi_lambda, symmetric=symmetric)
    total = coef.sum()
    if total <= 0.0:
        raise OracleDomainError("prediction coefficients vanish at this probe")
    return ClassProbs(coef / total)


def h_epsilon(
    ds: LabeledDataset, dist: MixingDistribution, x: ArrayLike, eps: float
) -> ClassProbs:
    """Mixup-optimal class probabilities at *x* for a fixed radius *eps*.

    Raises
    ------
    OracleDomainError
        If no mixture mass reaches B_ε(x).
    """
    return h_from_table(xi_table(ds, dist, x, eps))


def h_epsilon_symmetric(
    ds: LabeledDataset, dist: MixingDistribution, x: ArrayLike, eps: float
) -> ClassProbs:
    """Symmetric-P_f form: h^i ∝ ξ^{i,i} + 2 Σ_{j≠i} ξ_λ^{i,j}.

    Raises
    ------
    AsymmetricDistributionError
        If *dist* is not symmetric about ½.
    OracleDomainError
        If no mixture mass reaches B_ε(x).
    """
    if not dist.symmetric:
        raise AsymmetricDistributionError(
            f"{dist.label} is not symmetric; use h_epsilon instead"
        )
    return h_from_table(xi_table(ds, dist, x, eps), symmetric=True)


# ---------------------------------------------------------------------------
# ε → 0 limit
# ---------------------------------------------------------------------------


def _limit_probs(
    pairs: _Pairs,
    ds: LabeledDataset,
    dist: MixingDistribution,
    x: FloatArray,
    tol: float,
) -> FloatArray | None:
    gaps = np.linalg.norm(ds.points - x, axis=1)
    nearest = int(np.argmin(gaps))
    if gaps[nearest] <= tol:
        out = np.zeros(ds.k)
        out[ds.labels[nearest] - 1] = 1.0
        return out

    moving = pairs.norm > 0.0
    diff = pairs.diff[moving]
    w = ds.points[pairs.q_idx[moving]] - x
    sq = pairs.norm[moving] ** 2
    lam = -np.einsum("ij,ij->i", w, diff) / sq
    residual = np.linalg.norm(w + lam[:, None] * diff, axis=1)
    hit = (lam > 0.0) & (lam < 1.0) & (residual <= tol)
    if not np.any(hit):
        return None
    lam_hit = lam[hit]
    weight = np.asarray(dist.density(lam_hit)) / (ds.m * ds.m * pairs.norm[moving][hit])
    rows = pairs.cls_p[moving][hit]
    cols = pairs.cls_q[moving][hit]
    xi = np.zeros((ds.k, ds.k))
    xi_lambda = np.zeros((ds.k, ds.k))
    np.add.at(xi, (rows, cols), weight)
    np.add.at(xi_lambda, (rows, cols), lam_hit * weight)
    coef = _coefficients(xi, xi_lambda)
    total = coef.sum()
    if not total > 0.0:
        return None
    return coef / total


def h_limit(
    ds: LabeledDataset,
    dist: MixingDistribution,
    x: ArrayLike,
    tol_line: float | None = None,
) -> ClassProbs | None:
    """ε → 0 limit of the Mixup-optimal classifier at *x*.

    Returns the one-hot vector of x's class when x is a data point;
    otherwise the prediction coefficients of the segments passing through x, each
    weighted by f(λ*) / (m²‖p − q‖).  Returns ``None`` when no segment
    passes through x (x ∉ X_mix).

    Parameters
    ----------
    tol_line:
        Distance under which x counts as on a segment or at a point.
        Defaults to 1e−9 × the dataset diameter.
    """
    xv = _check_probe(ds, x)
    tol = default_tol_line(ds) if tol_line is None else tol_line
    probs = _limit_probs(_Pairs.of(ds), ds, dist, xv, tol)
    return None if probs is None else ClassProbs(probs)


def segment_hits(
    ds: LabeledDataset,
    x: ArrayLike,
    eps: float,
    tol_line: float | None = None,
) -> list[SegmentHit]:
    """Every ordered pair whose segment meets B_ε(x), with its λ interval.

    ``lambda_star`` is set when the segment passes within *tol_line* of x.
    """
    xv = _check_probe(ds, x)
    tol = default_tol_line(ds) if tol_line is None else tol_line
    pairs = _Pairs.of(ds)
    w = ds.points[pairs.q_idx] - xv
    lo, hi, valid = _intervals(pairs.diff, w, eps)
    hits: list[SegmentHit] = []
    for idx in np.flatnonzero(valid):
        norm = float(pairs.norm[idx])
        lam_star: float | None = None
        if norm > 0.0:
            d = pairs.diff[idx]
            lam = float(-(w[idx] @ d) / (norm * norm))
            if 0.0 <= lam <= 1.0 and np.linalg.norm(w[idx] + lam * d) <= tol:
                lam_star = lam
        elif np.linalg.norm(w[idx]) <= tol:
            lam_star = 0.5
        hits.append(
            SegmentHit(
                p_index=int(pairs.p_idx[idx]),
                q_index=int(pairs.q_idx[idx]),
                classes=(int(pairs.cls_p[idx]) + 1, int(pairs.cls_q[idx]) + 1),
                lambda_interval=(float(lo[idx]), float(hi[idx])),
                lambda_star=lam_star,
                pair_norm=norm,
            )
        )
    return hits


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


def boundary_grid(
    ds: LabeledDataset,
    dist: MixingDistribution,
    grid: GridSpec,
    eps: float | None = None,
    tol_line: float | None = None,
) -> BoundaryGrid:
    """Evaluate the oracle on every cell of *grid*.

    With ``eps=None`` the limit classifier is used; otherwise the fixed-radius oracle at
    radius *eps*.  Cells where the classifier is undefined get label 0.

    Raises
    ------
    DimensionMismatchError
        If the dataset is not two-dimensional.
    """
    if ds.n != 2:
        raise DimensionMismatchError(f"boundary grids need 2-D data, got n={ds.n}")
    if eps is not None and not eps > 0:
        raise ContractError(f"eps must be positive, got {eps}")
    pairs = _Pairs.of(ds)
    tol = default_tol_line(ds) if tol_line is None else tol_line
    cells = grid.cells()
    probs = np.full((cells.shape[0], ds.k), np.nan)
    for idx, x in enumerate(cells):
        if eps is None:
            row = _limit_probs(pairs, ds, dist, x, tol)
        else:
            xi, xi_lambda = _xi_arrays(pairs, ds, dist, x, eps)
            coef = _coefficients(xi, xi_lambda)
            row = coef / coef.sum() if coef.sum() > 0 else None
        if row is not None:
            probs[idx] = row
        if (idx + 1) % GRID_LOG_EVERY == 0:
            logger.debug("boundary grid: %d/%d cells", idx + 1, len(cells))
    defined = ~np.isnan(probs[:, 0])
    labels = np.zeros(cells.shape[0], dtype=np.int64)
    labels[defined] = np.argmax(probs[defined], axis=1) + 1
    return BoundaryGrid(
        spec=grid,
        labels=labels.reshape(grid.ny, grid.nx),
        probs=probs.reshape(grid.ny, grid.nx, ds.k),
        epsilon=eps,
        meta={"dataset": ds.name, "mixing": dist.label},
    )


# ---------------------------------------------------------------------------
# Independent estimators
# ---------------------------------------------------------------------------


def estimate_xi_monte_carlo(
    ds: LabeledDataset,
    dist: MixingDistribution,
    x: ArrayLike,
    eps: float,
    n_samples: int,
    rng: np.random.Generator,
    *,
    chunk: int = 100_000,
) -> tuple[XiTable, FloatArray, FloatArray]:
    """Sampling estimate of the ξ tables.

    Draws (s, t, λ) with s, t uniform over the points and λ ~ P_f, and
    averages the indicators of λs + (1−λ)t ∈ B_ε(x) (times λ for ξ_λ).

    Returns
    -------
    tuple:
        ``(table, se_xi, se_xi_lambda)`` — the estimate and the standard
        error of every entry.
    """
    xv = _check_probe(ds, x)
    k = ds.k
    sums = np.zeros((2, k, k))
    squares = np.zeros((2, k, k))
    labels0 = ds.labels - 1
    done = 0
    while done < n_samples:
        size = min(chunk, n_samples - done)
        s = rng.integers(0, ds.m, size)
        t = rng.integers(0, ds.m, size)
        lam = dist.samples(rng, size)
        z = lam[:, None] * ds.points[s] + (1.0 - lam[:, None]) * ds.points[t]
        inside = np.linalg.norm(z - xv, axis=1) <= eps
        cell = labels0[s] * k + labels0[t]
        for which, value in enumerate((inside.astype(np.float64), inside * lam)):
            counts = np.bincount(cell, weights=value, minlength=k * k)
            sums[which] += counts.reshape(k, k)
            squares[which] += np.bincount(
                cell, weights=value * value, minlength=k * k
            ).reshape(k, k)
        done += size
    means = sums / n_samples
    var = np.maximum(squares / n_samples - means**2, 0.0)
    se = np.sqrt(var / n_samples)
    table = XiTable(xi=means[0], xi_lambda=means[1], epsilon=float(eps), probe=xv)
    return table, se[0], se[1]


def find_crossover_alpha(
    ds: LabeledDataset,
    x: ArrayLike,
    eps: float,
    *,
    cls: int | None = None,
    lo: float = 1.0,
    hi: float | None = None,
    xtol: float = 1e-6,
) -> float:
    """Beta(α, α) parameter at which h_ε^{cls}(x) crosses ½.

    *cls* defaults to the class of the data point at *x*; *hi* defaults to
    ⌈alpha_threshold(ε)⌉ + 1.

    Raises
    ------
    ContractError
        If *x* is not a data point and *cls* is omitted, or h_ε^{cls} − ½
        has the same sign at both ends of the bracket.
    """
    xv = _check_probe(ds, x)
    if cls is None:
        gaps = np.linalg.norm(ds.points - xv, axis=1)
        nearest = int(np.argmin(gaps))
        if gaps[nearest] > default_tol_line(ds):
            raise ContractError("cls is required when x is not a data point")
        cls = int(ds.labels[nearest])
    if hi is None:
        hi = math.ceil(alpha_threshold(eps)) + 1.0
    pairs = _Pairs.of(ds)

    def gap(alpha: float) -> float:
        xi, xi_lambda = _xi_arrays(pairs, ds, MixingDistribution.beta(alpha), xv, eps)
        coef = _coefficients(xi, xi_lambda)
        return float(coef[cls - 1] / coef.sum()) - 0.5

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo * g_hi > 0:
        raise ContractError(
            f"h^{cls} - 1/2 does not change sign on [{lo}, {hi}] "
            f"({g_lo:+.4f}, {g_hi:+.4f})"
        )
    root = float(optimize.brentq(gap, lo, hi, xtol=xtol))
    logger.info("crossover alpha for class %d at eps=%g: %.6f", cls, eps, root)
    return root
