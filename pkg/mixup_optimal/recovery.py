"""Recovering data points from their pairwise midpoints.

With λ = ½ every Mixup point is the midpoint of two data points.  Given all
C(m,2) midpoints *with* their pair labels the points follow from a linear
system with the Mixup matrix A; without labels, uniqueness hinges on the
rank of [A, PA] for row permutations P that are not column relabelings.

Ranks are computed exactly in integer arithmetic.
"""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Iterable, Sequence
from itertools import combinations
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from mixup_optimal.constants import MAX_UNLABELED_POINTS, MIDPOINT_RESIDUAL_TOL
from mixup_optimal.exceptions import (
    ContractError,
    DatasetParseError,
    DimensionMismatchError,
    InconsistentMidpointsError,
    SizeError,
    UnderdeterminedError,
)
from mixup_optimal.models.recovery import MixupMatrix, RankTrialReport, RecoveryResult

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
Midpoint = tuple[tuple[int, int], FloatArray]

# Smallest m for which every non-relabeling P gives rank [A, PA] > m
_RANK_GUARANTEE_MIN_M = 7


# ---------------------------------------------------------------------------
# Mixup matrix and exact rank
# ---------------------------------------------------------------------------


def mixup_matrix(m: int) -> MixupMatrix:
    """Mixup matrix for *m* points, rows ``(i, j)``, ``i < j``, lexicographic."""
    return MixupMatrix(m)


def exact_rank(matrix: ArrayLike | Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination.

    Every intermediate value stays an exact Python integer.
    """
    rows = [[int(v) for v in row] for row in np.asarray(matrix, dtype=np.int64)]
    if not rows:
        return 0
    n_rows, n_cols = len(rows), len(rows[0])
    rank = 0
    prev_pivot = 1
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        head = rows[rank]
        for r in range(rank + 1, n_rows):
            row = rows[r]
            factor = row[col]
            for c in range(col + 1, n_cols):
                row[c] = (row[c] * head[col] - factor * head[c]) // prev_pivot
            row[col] = 0
        prev_pivot = head[col]
        rank += 1
        if rank == n_rows:
            break
    return rank


def _check_row_perm(n_rows: int, perm: Sequence[int]) -> list[int]:
    out = [int(p) for p in perm]
    if len(out) != n_rows or sorted(out) != list(range(n_rows)):
        raise ContractError(
            f"expected a permutation of {n_rows} rows, got length {len(out)}"
        )
    return out


def rank_concat(m: int, perm: Sequence[int]) -> int:
    """Exact rank of [A, PA] where row r of PA is row ``perm[r]`` of A."""
    a = mixup_matrix(m).as_array()
    p = _check_row_perm(a.shape[0], perm)
    return exact_rank(np.hstack([a, a[p]]))


def is_column_permutation(a: ArrayLike, pa: ArrayLike) -> bool:
    """``True`` when *pa* equals *a* up to a reordering of its columns."""
    a_arr = np.asarray(a)
    pa_arr = np.asarray(pa)
    if a_arr.shape != pa_arr.shape:
        return False
    return sorted(map(tuple, a_arr.T.tolist())) == sorted(map(tuple, pa_arr.T.tolist()))


def induced_row_permutation(m: int, point_perm: Sequence[int]) -> list[int]:
    """Row permutation of A produced by relabeling point i as ``point_perm[i]``."""
    sigma = [int(p) for p in point_perm]
    if sorted(sigma) != list(range(m)):
        raise ContractError(f"expected a permutation of {m} points")
    matrix = mixup_matrix(m)
    index = matrix.row_index()
    return [index[tuple(sorted((sigma[i], sigma[j])))] for i, j in matrix.rows]


def permutation_rank_trial(
    m: int, n_trials: int, seed: int, *, include_identity: bool = False
) -> RankTrialReport:
    """Sample random row permutations and record the rank of [A, PA].

    Each permutation is classified as a column relabeling or not; the report
    carries the smallest rank seen among the others.  The rank-above-m
    guarantee only applies for m ≥ 7.
    """
    if n_trials < 1:
        raise ContractError(f"n_trials must be >= 1, got {n_trials}")
    if m < _RANK_GUARANTEE_MIN_M:
        logger.info("m=%d is below the range where rank > m is guaranteed", m)
    a = mixup_matrix(m).as_array()
    n_rows = a.shape[0]
    rng = np.random.default_rng(seed)

    ranks: list[int] = []
    column_perm_count = 0
    low: int | None = None
    high: int | None = None
    for trial in range(n_trials):
        if include_identity and trial == 0:
            perm = np.arange(n_rows)
        else:
            perm = rng.permutation(n_rows)
        pa = a[perm]
        rank = exact_rank(np.hstack([a, pa]))
        ranks.append(rank)
        if is_column_permutation(a, pa):
            column_perm_count += 1
            high = rank if high is None else max(high, rank)
        else:
            low = rank if low is None else min(low, rank)
    report = RankTrialReport(
        m=m,
        trials=n_trials,
        column_perm_count=column_perm_count,
        min_rank_among_non_column_perms=low,
        max_rank_among_column_perms=high,
        ranks=ranks,
    )
    logger.info(
        "m=%d: %d trials, %d column perms, min non-column rank %s",
        m, n_trials, column_perm_count, low,
    )
    return report


# ---------------------------------------------------------------------------
# Labeled recovery
# ---------------------------------------------------------------------------


def _as_points(points: ArrayLike) -> FloatArray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ContractError(
            f"points must be a vector or an (m, d) array, got {arr.shape}"
        )
    return arr


def form_midpoints(points: ArrayLike) -> list[Midpoint]:
    """All C(m,2) labeled midpoints ``((i, j), (x_i + x_j) / 2)``, i < j."""
    pts = _as_points(points)
    pairs = combinations(range(len(pts)), 2)
    return [((i, j), 0.5 * (pts[i] + pts[j])) for i, j in pairs]


def recover_labeled(
    midpoints: Iterable[tuple[tuple[int, int], ArrayLike]],
    m: int,
    tol: float = MIDPOINT_RESIDUAL_TOL,
) -> RecoveryResult:
    """Solve A w = 2b for the points given every labeled midpoint.

    Pair labels are 0-based and unordered.  The residual ‖Aw − 2b‖∞ is
    compared against ``tol · max(1, ‖2b‖∞)``.

    Raises
    ------
    UnderdeterminedError
        If a pair is missing or ``m < 3`` (A then has rank below m).
    InconsistentMidpointsError
        If the residual exceeds the tolerance.
    """
    matrix = mixup_matrix(m)
    index = matrix.row_index()
    rhs: dict[int, FloatArray] = {}
    dim: int | None = None
    for (i, j), value in midpoints:
        pair = (min(i, j), max(i, j))
        if pair not in index:
            raise ContractError(
                f"pair {pair} is not a pair of distinct indices below {m}"
            )
        vec = np.atleast_1d(np.asarray(value, dtype=np.float64))
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise DimensionMismatchError(
                f"midpoint {pair} has dimension {vec.size}, expected {dim}"
            )
        row = index[pair]
        if row in rhs:
            raise ContractError(f"pair {pair} given twice")
        rhs[row] = vec
    missing = [pair for pair in matrix.rows if index[pair] not in rhs]
    if missing:
        raise UnderdeterminedError(
            f"{len(missing)} of {matrix.n_rows} midpoints missing", missing=missing
        )
    if m < 3:
        raise UnderdeterminedError(
            "two points cannot be recovered from one midpoint", missing=[]
        )

    a = matrix.as_array().astype(np.float64)
    b = 2.0 * np.vstack([rhs[r] for r in range(matrix.n_rows)])
    w, *_ = np.linalg.lstsq(a, b, rcond=None)
    residual = float(np.max(np.abs(a @ w - b)))
    scale = max(1.0, float(np.max(np.abs(b))))
    if residual > tol * scale:
        raise InconsistentMidpointsError(
            f"midpoints are inconsistent (residual {residual:.3g})", residual=residual
        )
    logger.debug("recovered %d points, residual %.3g", m, residual)
    return RecoveryResult(points=w, residual=residual)


# ---------------------------------------------------------------------------
# Unlabeled recovery (1-D)
# ---------------------------------------------------------------------------


def _take(remaining: list[float], value: float, tol: float) -> bool:
    for idx, candidate in enumerate(remaining):
        if abs(candidate - value) <= tol:
            del remaining[idx]
            return True
    return False


def _extend(
    sums: list[float], first_three: tuple[float, float, float], m: int, tol: float
) -> list[float] | None:
    placed = list(first_three)
    remaining = list(sums)
    for a, b in combinations(placed, 2):
        if not _take(remaining, a + b, tol):
            return None
    while len(placed) < m:
        nxt = min(remaining) - placed[0]
        for p in placed:
            if not _take(remaining, p + nxt, tol):
                return None
        placed.append(nxt)
    return placed


def _regenerates(points: list[float], target: FloatArray, tol: float) -> bool:
    mids = np.sort([0.5 * (a + b) for a, b in combinations(points, 2)])
    return bool(np.all(np.abs(mids - target) <= tol))


def recover_unlabeled_bruteforce(values: ArrayLike, m: int) -> list[FloatArray]:
    """Every ascending point multiset whose pairwise midpoints equal *values*.

    Points are fixed in ascending order, so x₁ + x₂ and x₁ + x₃ are the two
    smallest pair sums; each candidate for x₂ + x₃ fixes the first three
    points, and each further point is the smallest unexplained sum minus
    x₁.  Every returned multiset regenerates the input exactly (within a
    relative 1e-9).

    Raises
    ------
    SizeError
        If ``m > 7`` or ``m < 3``.
    ContractError
        If *values* does not hold exactly C(m,2) numbers.
    """
    if m > MAX_UNLABELED_POINTS:
        raise SizeError(
            f"unlabeled search supports m <= {MAX_UNLABELED_POINTS}, got {m}"
        )
    if m < 3:
        raise SizeError(f"unlabeled search needs m >= 3, got {m}")
    target = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if target.size != math.comb(m, 2):
        raise ContractError(
            f"expected {math.comb(m, 2)} midpoints for m={m}, got {target.size}"
        )
    tol = 1e-9 * max(1.0, float(np.max(np.abs(target))))
    sums = (2.0 * target).tolist()
    s12, s13 = sums[0], sums[1]

    found: list[FloatArray] = []
    tried: list[float] = []
    for c in sums[2:]:
        if any(abs(c - t) <= 2 * tol for t in tried):
            continue
        tried.append(c)
        x1 = 0.5 * (s12 + s13 - c)
        placed = _extend(sums, (x1, s12 - x1, s13 - x1), m, 2 * tol)
        if placed is None:
            continue
        candidate = np.sort(np.asarray(placed))
        if not _regenerates(candidate.tolist(), target, tol):
            continue
        if not any(np.allclose(candidate, f, rtol=0.0, atol=tol) for f in found):
            found.append(candidate)
    logger.info("m=%d: %d consistent multisets", m, len(found))
    return found


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def write_midpoints_csv(
    path: str | Path, midpoints: Sequence[Midpoint] | ArrayLike, *, labeled: bool = True
) -> None:
    """Write ``i,j,coord0,...`` rows (labeled) or ``coord0,...`` rows."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        if labeled:
            items = list(midpoints)  # type: ignore[arg-type]
            dim = np.atleast_1d(items[0][1]).size if items else 0
            writer.writerow(["i", "j", *(f"coord{c}" for c in range(dim))])
            for (i, j), vec in items:
                writer.writerow([i, j, *(repr(float(v)) for v in np.atleast_1d(vec))])
        else:
            arr = _as_points(midpoints)  # type: ignore[arg-type]
            writer.writerow([f"coord{c}" for c in range(arr.shape[1])])
            for row in arr:
                writer.writerow([repr(float(v)) for v in row])


def _read_rows(path: Path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetParseError("empty midpoint file", path=str(path), line=1)
        rows = [(n, row) for n, row in enumerate(reader, start=2) if row]
    return [h.strip() for h in header], rows


def load_labeled_midpoints(path: str | Path) -> list[Midpoint]:
    """Read an ``i,j,coord0,...`` midpoint CSV."""
    p = Path(path)
    header, rows = _read_rows(p)
    if header[:2] != ["i", "j"] or len(header) < 3:
        raise DatasetParseError(
            "labeled midpoint header must start with i,j", path=str(p), line=1
        )
    out: list[Midpoint] = []
    for line, row in rows:
        if len(row) != len(header):
            raise DatasetParseError(
                f"expected {len(header)} fields", path=str(p), line=line
            )
        try:
            pair = (int(row[0]), int(row[1]))
            vec = np.array([float(v) for v in row[2:]])
        except ValueError as exc:
            raise DatasetParseError(str(exc), path=str(p), line=line) from exc
        out.append((pair, vec))
    return out


def load_unlabeled_midpoints(path: str | Path) -> FloatArray:
    """Read a ``coord0,...`` midpoint CSV into an (N, d) array."""
    p = Path(path)
    header, rows = _read_rows(p)
    values: list[list[float]] = []
    for line, row in rows:
        if len(row) != len(header):
            raise DatasetParseError(
                f"expected {len(header)} fields", path=str(p), line=line
            )
        try:
            values.append([float(v) for v in row])
        except ValueError as exc:
            raise DatasetParseError(str(exc), path=str(p), line=line) from exc
    return np.asarray(values, dtype=np.float64).reshape(len(values), len(header))
