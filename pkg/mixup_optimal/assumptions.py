"""Checks of the geometric conditions under which Mixup recovers the labels.

- :func:`check_assumption1` — no support point lies strictly inside a
  segment that ends in a different class (no collinearity);
- :func:`check_assumption2` — a pointwise margin condition at a probe;
- :func:`estimate_epsilon` — sampled distance between Mixup points and
  classes not involved in the mix;
- :func:`margin_radius` — half the distance from a class to the nearest
  other class.
"""

from __future__ import annotations

import csv
import logging
import warnings
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike
from scipy.spatial.distance import cdist

from mixup_optimal.exceptions import (
    ContractError,
    DimensionMismatchError,
    NoEligibleReferenceWarning,
)
from mixup_optimal.mixing import MixingDistribution
from mixup_optimal.models.assumptions import Assumption2Report, CollinearityViolation
from mixup_optimal.models.dataset import LabeledDataset
from mixup_optimal.oracle import segment_hits, xi_table

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# No-collinearity check
# ---------------------------------------------------------------------------


def check_assumption1(
    ds: LabeledDataset, tol: float = 1e-9, *, block: int = 1 << 22
) -> list[CollinearityViolation]:
    """Triples (x ∈ X_i, u ∈ X, v ∈ X_j, j ≠ i) with x inside segment (u, v).

    A triple is reported when some λ ∈ (0, 1) puts λu + (1−λ)v within *tol*
    of x.  An empty list means the condition holds at tolerance *tol*.
    Work arrays hold at most about *block* floats.
    """
    if tol < 0:
        raise ContractError(f"tol must be >= 0, got {tol}")
    points = ds.points
    step = max(1, block // max(ds.m * ds.n, 1))
    violations: list[CollinearityViolation] = []
    for xi in range(ds.m):
        x = points[xi]
        all_others = np.flatnonzero(ds.labels != ds.labels[xi])
        for start in range(0, all_others.size, step):
            others = all_others[start : start + step]
            v = points[others]
            diff = points[None, :, :] - v[:, None, :]  # u − v, shape (|V|, m, n)
            sq = np.einsum("vun,vun->vu", diff, diff)
            gap = x - v  # x − v, shape (|V|, n)
            with np.errstate(divide="ignore", invalid="ignore"):
                lam = np.einsum("vun,vn->vu", diff, gap) / sq
            closest = v[:, None, :] + lam[:, :, None] * diff
            residual = np.linalg.norm(closest - x, axis=-1)
            hit = (sq > 0.0) & (lam > 0.0) & (lam < 1.0) & (residual <= tol)
            for vi, ui in zip(*np.nonzero(hit)):
                violations.append(
                    CollinearityViolation(
                        x_index=xi,
                        u_index=int(ui),
                        v_index=int(others[vi]),
                        lam=float(lam[vi, ui]),
                        residual=float(residual[vi, ui]),
                    )
                )
    logger.info(
        "%s: %d collinearity violations at tol=%g", ds.name, len(violations), tol
    )
    return violations


def write_violations_csv(
    path: str | Path, violations: list[CollinearityViolation]
) -> None:
    """Write violations as ``x_idx,u_idx,v_idx,lambda,residual``."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["x_idx", "u_idx", "v_idx", "lambda", "residual"]
        )
        writer.writeheader()
        for violation in violations:
            writer.writerow(violation.to_row())


# ---------------------------------------------------------------------------
# Distance estimation
# ---------------------------------------------------------------------------


def estimate_epsilon(
    ds_train: LabeledDataset,
    dist: MixingDistribution,
    n_samples: int | None = None,
    reference: LabeledDataset | None = None,
    seed: int = 0,
    *,
    chunk: int = 512,
) -> float:
    """Minimum distance from sampled Mixup points to uninvolved classes.

    Draws *n_samples* mixed points z = λs + (1−λ)t (s, t uniform over
    *ds_train*, λ ~ *dist*) and, for each with class(s) ≠ class(t), the
    distance to the nearest *reference* point whose class is neither.  The
    minimum over all samples estimates the ε of the no-collinearity
    condition.

    Parameters
    ----------
    n_samples:
        Number of mixed points; defaults to one epoch (``ds_train.m``).
        Pair indices and λ come from separate child streams of *seed*, so
        a larger *n_samples* extends the same sample set.
    reference:
        Points to measure against; defaults to *ds_train*.

    Returns
    -------
    float:
        The minimum distance, or ``inf`` (with a
        :class:`~mixup_optimal.exceptions.NoEligibleReferenceWarning`) when
        no sample has an eligible reference point.
    """
    ref = ds_train if reference is None else reference
    if ref.n != ds_train.n:
        raise DimensionMismatchError(
            f"reference dimension {ref.n} differs from training dimension {ds_train.n}"
        )
    n = ds_train.m if n_samples is None else n_samples
    if n < 1:
        raise ContractError(f"n_samples must be >= 1, got {n}")

    s_stream, t_stream, lam_stream = (
        np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(3)
    )
    s = s_stream.integers(0, ds_train.m, n)
    t = t_stream.integers(0, ds_train.m, n)
    lam = dist.samples(lam_stream, n)

    best = np.inf
    for start in range(0, n, chunk):
        sl = slice(start, min(start + chunk, n))
        cs = ds_train.labels[s[sl]][:, None]
        ct = ds_train.labels[t[sl]][:, None]
        # Only cross-class mixtures count.
        eligible = (
            (cs != ct)
            & (ref.labels[None, :] != cs)
            & (ref.labels[None, :] != ct)
        )
        if not np.any(eligible):
            continue
        lam_c = lam[sl, None]
        z = lam_c * ds_train.points[s[sl]] + (1.0 - lam_c) * ds_train.points[t[sl]]
        d2 = cdist(z, ref.points, "sqeuclidean")
        best = min(best, float(np.min(np.where(eligible, d2, np.inf))))
    if not np.isfinite(best):
        msg = f"{ds_train.name}: no reference point outside the mixed classes"
        warnings.warn(msg, NoEligibleReferenceWarning, stacklevel=2)
        logger.warning(msg)
        return float("inf")
    result = float(np.sqrt(max(best, 0.0)))
    logger.info("%s: estimated epsilon %.6g over %d samples", ds_train.name, result, n)
    return result


# ---------------------------------------------------------------------------
# Pointwise margin condition
# ---------------------------------------------------------------------------


def check_assumption2(
    ds: LabeledDataset,
    x: ArrayLike,
    i: int,
    eps: float,
    delta: float,
    tol_line: float | None = None,
    dist: MixingDistribution | None = None,
) -> Assumption2Report:
    """Pointwise margin condition for class *i* at probe *x*.

    Holds when, at radius *eps*:

    (a) every X_i → X_j segment (j ≠ i) meets B_ε(x) only for λ > 1 − δ,
        i.e. within δ of its X_i end;
    (b) no segment between two points outside X_i meets B_ε(x);
    (c) ξ^{i,j} ≥ ξ^{j,i} for every j ≠ i (under *dist*, uniform by default).

    "Meets" means on a λ interval of positive length.  With no segment in
    the ball the check holds vacuously and ``in_xmix`` is ``False``.
    """
    if not 0.0 < delta < 0.5:
        raise ContractError(f"delta must lie in (0, 1/2), got {delta}")
    if not eps > 0:
        raise ContractError(f"eps must be positive, got {eps}")
    if not 1 <= i <= ds.k:
        raise ContractError(f"class {i} outside 1..{ds.k}")
    dist = MixingDistribution.uniform() if dist is None else dist

    witnesses = []
    reasons: list[str] = []
    hits = segment_hits(ds, x, eps, tol_line)
    for hit in hits:
        a, b = hit.classes
        assert hit.lambda_interval is not None
        lo, hi = hit.lambda_interval
        if a == i and b != i and min(hi, 1.0 - delta) - lo > 0.0:
            witnesses.append(hit)
            reasons.append(
                f"pair ({hit.p_index}, {hit.q_index}) reaches x at λ={lo:.6g} ≤ 1−δ"
            )
        elif a != i and b != i and (hi > lo or hit.pair_norm == 0.0):
            witnesses.append(hit)
            reasons.append(
                f"pair ({hit.p_index}, {hit.q_index}) of classes {hit.classes} "
                "meets B_ε(x)"
            )

    table = xi_table(ds, dist, x, eps)
    for j in range(1, ds.k + 1):
        if j == i:
            continue
        forward = table.xi[i - 1, j - 1]
        backward = table.xi[j - 1, i - 1]
        if forward < backward - 1e-12 * max(backward, 1e-300):
            reasons.append(f"ξ^({i},{j})={forward:.6g} < ξ^({j},{i})={backward:.6g}")

    return Assumption2Report(
        holds=not reasons,
        cls=i,
        epsilon=float(eps),
        delta=float(delta),
        in_xmix=table.in_xmix,
        witnesses=witnesses,
        reasons=reasons,
    )


def margin_radius(ds: LabeledDataset, i: int) -> float:
    """½ · min_{j≠i} d(X_i, X_j)."""
    if ds.k < 2:
        raise ContractError("margin radius needs at least two classes")
    if not 1 <= i <= ds.k:
        raise ContractError(f"class {i} outside 1..{ds.k}")
    own = ds.class_points(i)
    rest = ds.points[ds.labels != i]
    return 0.5 * float(cdist(own, rest).min())
