"""Linear classifier types for the high-dimensional Gaussian experiments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class LinearClassifier:
    """θ for the score θᵀx, kept inside the span of the training points.

    ``span_basis`` holds an orthonormal basis of span(X) as columns.
    """

    theta: FloatArray
    span_basis: FloatArray

    @property
    def off_span_norm(self) -> float:
        """‖θ − Π_span θ‖."""
        proj = self.span_basis @ (self.span_basis.T @ self.theta)
        return float(np.linalg.norm(self.theta - proj))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.theta))

    def margins(self, points: FloatArray, signed_labels: FloatArray) -> FloatArray:
        """y_i θᵀx_i for every point."""
        return signed_labels * (points @ self.theta)


@dataclass(frozen=True, eq=False)
class InterpolationCertificate:
    """Common margin, Gram-solve dual coefficients and the max-margin verdict."""

    k: float
    dual_coeffs: FloatArray
    is_max_margin: bool
    sign_violations: tuple[int, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "dual_coeffs": self.dual_coeffs.tolist(),
            "is_max_margin": self.is_max_margin,
            "sign_violations": list(self.sign_violations),
        }


@dataclass(frozen=True, eq=False)
class LinearFit:
    """Result of minimising the linear Mixup loss."""

    classifier: LinearClassifier
    loss: float
    grad_norm: float
    iterations: int
    converged: bool
