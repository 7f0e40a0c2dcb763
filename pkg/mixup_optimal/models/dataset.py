"""Labeled datasets: finite class supports with the normalized counting measure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import pdist

from mixup_optimal.exceptions import DatasetError


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Points in R^n with 1-based class labels.

    Each point carries mass 1/m under P_X.  Arrays are stored read-only so a
    dataset can be shared freely between threads and worker processes.

    Parameters
    ----------
    points:
        ``(m, n)`` array of support points.
    labels:
        ``(m,)`` integer array of class indices in ``1..k``.
    k:
        Number of classes; every class must own at least one point.
    name:
        Free-form identifier used in file names and plots.

    Raises
    ------
    DatasetError
        If shapes disagree, a label is out of range, a class is empty, or
        the same point appears with two different labels.
    """

    points: NDArray[np.float64]
    labels: NDArray[np.int64]
    k: int
    name: str = ""
    _diameter: float = field(default=0.0, init=False, repr=False)

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        labels = np.array(self.labels, dtype=np.int64, copy=True).ravel()
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise DatasetError(
                f"points must be a non-empty (m, n) array, got {pts.shape}"
            )
        if labels.shape[0] != pts.shape[0]:
            raise DatasetError(
                f"{labels.shape[0]} labels for {pts.shape[0]} points"
            )
        if not np.all(np.isfinite(pts)):
            raise DatasetError("points contain non-finite coordinates")
        if self.k < 1:
            raise DatasetError(f"k must be positive, got {self.k}")
        if labels.min() < 1 or labels.max() > self.k:
            raise DatasetError(f"labels must lie in 1..{self.k}")
        counts = np.bincount(labels, minlength=self.k + 1)[1:]
        for cls_idx, count in enumerate(counts, start=1):
            if count == 0:
                raise DatasetError(f"class {cls_idx} empty")
        _check_disjoint(pts, labels)

        pts.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_diameter", _diameter(pts))

    # ------------------------------------------------------------------
    # Computed properties
    # ------------------------------------------------------------------

    @property
    def m(self) -> int:
        """Total number of points."""
        return int(self.points.shape[0])

    @property
    def n(self) -> int:
        """Ambient dimension."""
        return int(self.points.shape[1])

    @property
    def mass(self) -> float:
        """P_X mass of a single point."""
        return 1.0 / self.m

    @property
    def diameter(self) -> float:
        """Largest pairwise distance between points."""
        return self._diameter

    @property
    def signed_labels(self) -> NDArray[np.float64]:
        """±1 view of a two-class dataset: class 1 → +1, class 2 → −1."""
        if self.k != 2:
            raise DatasetError(f"signed labels need exactly 2 classes, got {self.k}")
        return np.where(self.labels == 1, 1.0, -1.0)

    def class_indices(self, i: int) -> NDArray[np.intp]:
        """Row indices of the points in class *i*."""
        return np.flatnonzero(self.labels == i)

    def class_points(self, i: int) -> NDArray[np.float64]:
        """The support X_i as an ``(m_i, n)`` array."""
        return self.points[self.labels == i]

    def one_hot(self) -> NDArray[np.float64]:
        """``(m, k)`` one-hot label matrix."""
        out = np.zeros((self.m, self.k))
        out[np.arange(self.m), self.labels - 1] = 1.0
        return out

    # ------------------------------------------------------------------
    # Comparison / serialisation
    # ------------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            self.k == other.k
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LabeledDataset:
        return cls(
            points=np.asarray(data["points"], dtype=np.float64),
            labels=np.asarray(data["labels"], dtype=np.int64),
            k=int(data["k"]),
            name=data.get("name", ""),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "k": self.k,
            "points": self.points.tolist(),
            "labels": self.labels.tolist(),
        }

    @classmethod
    def from_arrays(
        cls,
        points: ArrayLike,
        labels: ArrayLike,
        *,
        k: int | None = None,
        name: str = "",
    ) -> LabeledDataset:
        """Build a dataset inferring ``k`` as the largest label when omitted."""
        lab = np.asarray(labels, dtype=np.int64)
        return cls(
            points=np.asarray(points, dtype=np.float64),
            labels=lab,
            k=int(lab.max()) if k is None else k,
            name=name,
        )


def _check_disjoint(points: NDArray[np.float64], labels: NDArray[np.int64]) -> None:
    seen: dict[bytes, int] = {}
    for row, label in zip(points, labels):
        key = np.ascontiguousarray(row + 0.0).tobytes()
        prev = seen.setdefault(key, int(label))
        if prev != label:
            raise DatasetError(
                f"point {row.tolist()} appears in classes {prev} and {int(label)}"
            )


def _diameter(points: NDArray[np.float64]) -> float:
    if points.shape[0] < 2:
        return 0.0
    if points.shape[0] > 2000:
        # Bounding-box diagonal is within a factor √n of the true diameter.
        span = points.max(axis=0) - points.min(axis=0)
        return float(np.linalg.norm(span))
    return float(pdist(points).max())
