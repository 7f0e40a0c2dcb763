"""Value types produced by the assumption checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from mixup_optimal.models.oracle import SegmentHit


@dataclass(frozen=True)
class CollinearityViolation:
    """Support point ``x`` lying (within tolerance) inside segment (u, v).

    ``v`` belongs to a class other than ``x``'s; ``lam`` is the weight on ``u``.
    """

    x_index: int
    u_index: int
    v_index: int
    lam: float
    residual: float

    def to_row(self) -> dict[str, Any]:
        return {
            "x_idx": self.x_index,
            "u_idx": self.u_index,
            "v_idx": self.v_index,
            "lambda": self.lam,
            "residual": self.residual,
        }


@dataclass
class Assumption2Report:
    """Outcome of a pointwise margin check at probe ``x`` for class ``cls``.

    ``holds`` is vacuously ``True`` when no segment meets the ε-ball; the
    ``in_xmix`` flag distinguishes that case.
    """

    holds: bool
    cls: int
    epsilon: float
    delta: float
    in_xmix: bool
    witnesses: list[SegmentHit] = field(default_factory=list)
    reasons: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict[str, Any]:
        return {
            "holds": self.holds,
            "class": self.cls,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "in_xmix": self.in_xmix,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "reasons": list(self.reasons),
        }
