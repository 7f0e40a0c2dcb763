"""Value types produced by the Mixup-optimal classifier oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from mixup_optimal.exceptions import ContractError


@dataclass(frozen=True)
class SegmentHit:
    """An ordered pair whose mixing segment meets the probe's ε-ball.

    ``p_index`` is the point weighted by λ, ``q_index`` the point weighted
    by 1 − λ.  Class indices are 1-based.
    """

    p_index: int
    q_index: int
    classes: tuple[int, int]
    lambda_interval: tuple[float, float] | None = None
    lambda_star: float | None = None  # parameter where the segment passes through x
    pair_norm: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "p_index": self.p_index,
            "q_index": self.q_index,
            "classes": list(self.classes),
            "lambda_interval": (
                list(self.lambda_interval) if self.lambda_interval is not None else None
            ),
            "lambda_star": self.lambda_star,
            "pair_norm": self.pair_norm,
        }


@dataclass(frozen=True, eq=False)
class XiTable:
    """The k×k tables of ξ^{i,j} and ξ_λ^{i,j} at one probe point.

    Row index i is the class of the λ-weighted point, column j the class of
    the (1 − λ)-weighted point; both are stored 0-based in the arrays.
    """

    xi: NDArray[np.float64]
    xi_lambda: NDArray[np.float64]
    epsilon: float
    probe: NDArray[np.float64]

    @property
    def k(self) -> int:
        return int(self.xi.shape[0])

    @property
    def in_xmix(self) -> bool:
        """``True`` iff some mixture mass lands in the ε-ball."""
        return bool(np.any(self.xi > 0.0))

    @property
    def total(self) -> float:
        return float(self.xi.sum())

    def to_dict(self) -> dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "probe": self.probe.tolist(),
            "xi": self.xi.tolist(),
            "xi_lambda": self.xi_lambda.tolist(),
            "in_xmix": self.in_xmix,
        }


@dataclass(frozen=True, eq=False)
class ClassProbs:
    """A probability vector over k classes.

    ``argmax`` breaks ties toward the lowest class index.
    """

    probs: NDArray[np.float64]

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size == 0:
            raise ContractError("class probabilities must be a non-empty vector")
        if np.any(probs < 0.0) or abs(float(probs.sum()) - 1.0) > 1e-10:
            raise ContractError(f"class probabilities must sum to 1, got {probs}")
        object.__setattr__(self, "probs", probs)

    def __getitem__(self, cls_idx: int) -> float:
        """Probability of 1-based class *cls_idx*."""
        return float(self.probs[cls_idx - 1])

    @property
    def argmax(self) -> int:
        """Predicted 1-based class (first maximum wins)."""
        return int(np.argmax(self.probs)) + 1

    @property
    def is_tied(self) -> bool:
        top = float(self.probs.max())
        return int(np.sum(np.isclose(self.probs, top, rtol=0.0, atol=1e-12))) > 1

    @property
    def is_one_hot(self) -> bool:
        return bool(np.max(self.probs) == 1.0)

    def to_dict(self) -> dict[str, Any]:
        return {"probs": self.probs.tolist(), "argmax": self.argmax}


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned rectangle sampled on an ``nx × ny`` lattice."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int = 101
    ny: int = 101

    def __post_init__(self) -> None:
        if self.nx < 2 or self.ny < 2:
            raise ContractError("grid resolution must be at least 2×2")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ContractError("grid rectangle must have positive extent")

    @property
    def xs(self) -> NDArray[np.float64]:
        return np.linspace(self.xmin, self.xmax, self.nx)

    @property
    def ys(self) -> NDArray[np.float64]:
        return np.linspace(self.ymin, self.ymax, self.ny)

    def cells(self) -> NDArray[np.float64]:
        """``(ny * nx, 2)`` cell centres in row-major (y outer) order."""
        gx, gy = np.meshgrid(self.xs, self.ys)
        return np.column_stack([gx.ravel(), gy.ravel()])

    @classmethod
    def around(
        cls, points: NDArray[np.float64], *, margin: float = 0.5, resolution: int = 101
    ) -> GridSpec:
        """Bounding box of *points* padded by *margin* on every side."""
        lo = points.min(axis=0) - margin
        hi = points.max(axis=0) + margin
        return cls(
            float(lo[0]),
            float(hi[0]),
            float(lo[1]),
            float(hi[1]),
            resolution,
            resolution,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "xmin": self.xmin,
            "xmax": self.xmax,
            "ymin": self.ymin,
            "ymax": self.ymax,
            "nx": self.nx,
            "ny": self.ny,
        }


@dataclass(frozen=True, eq=False)
class BoundaryGrid:
    """Argmax labels and class probabilities over a :class:`GridSpec`.

    ``labels`` is ``(ny, nx)`` with 0 marking cells where the classifier is
    undefined; ``probs`` is ``(ny, nx, k)`` with NaN rows for those cells.
    """

    spec: GridSpec
    labels: NDArray[np.int64]
    probs: NDArray[np.float64]
    epsilon: float | None = None  # None means limit mode
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return int(self.probs.shape[-1])

    def rows(self) -> list[dict[str, Any]]:
        """CSV rows ``x,y,label,p1..pk`` in row-major order."""
        out: list[dict[str, Any]] = []
        xs, ys = self.spec.xs, self.spec.ys
        for iy, y in enumerate(ys):
            for ix, x in enumerate(xs):
                row: dict[str, Any] = {
                    "x": float(x),
                    "y": float(y),
                    "label": int(self.labels[iy, ix]),
                }
                for c in range(self.k):
                    value = float(self.probs[iy, ix, c])
                    row[f"p{c + 1}"] = "" if np.isnan(value) else value
                out.append(row)
        return out
