"""Value types for midpoint recovery."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

import numpy as np
from numpy.typing import NDArray

from mixup_optimal.exceptions import ContractError


@dataclass(frozen=True)
class MixupMatrix:
    """The C(m,2)×m 0/1 matrix whose row (i, j) averages points i and j.

    Rows are the 0-based pairs ``i < j`` in lexicographic order.
    """

    m: int
    rows: tuple[tuple[int, int], ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ContractError(f"a Mixup matrix needs m >= 2, got {self.m}")
        if not self.rows:
            object.__setattr__(self, "rows", tuple(combinations(range(self.m), 2)))

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def as_array(self) -> NDArray[np.int64]:
        out = np.zeros((self.n_rows, self.m), dtype=np.int64)
        for r, (i, j) in enumerate(self.rows):
            out[r, i] = 1
            out[r, j] = 1
        return out

    def row_index(self) -> dict[tuple[int, int], int]:
        return {pair: r for r, pair in enumerate(self.rows)}


@dataclass
class RecoveryResult:
    """Points recovered from labeled midpoints and the ∞-norm residual."""

    points: NDArray[np.float64]
    residual: float

    def to_dict(self) -> dict[str, Any]:
        return {"points": self.points.tolist(), "residual": self.residual}


@dataclass
class RankTrialReport:
    """Summary of random row permutations P and the ranks of [A, PA]."""

    m: int
    trials: int
    column_perm_count: int
    min_rank_among_non_column_perms: int | None
    max_rank_among_column_perms: int | None = None
    ranks: list[int] = field(default_factory=list, repr=False)

    @property
    def certified(self) -> bool:
        """``True`` when every non-column permutation raised the rank above m."""
        low = self.min_rank_among_non_column_perms
        return low is None or low > self.m

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "trials": self.trials,
            "column_perm_count": self.column_perm_count,
            "min_rank_among_non_column_perms": self.min_rank_among_non_column_perms,
            "max_rank_among_column_perms": self.max_rank_among_column_perms,
            "certified": self.certified,
        }
