"""Network, optimizer and history types for the training module."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from mixup_optimal.constants import ADAM_BETA1, ADAM_BETA2, ADAM_EPS, ADAM_LR

FloatArray = NDArray[np.float64]


@dataclass
class MlpModel:
    """Fully connected ReLU network with a softmax output.

    ``weights[l]`` has shape ``(fan_in, fan_out)`` and ``biases[l]`` shape
    ``(fan_out,)``.
    """

    layer_sizes: tuple[int, ...]
    weights: list[FloatArray]
    biases: list[FloatArray]

    # ------------------------------------------------------------------
    # Computed properties
    # ------------------------------------------------------------------

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_classes(self) -> int:
        return self.layer_sizes[-1]

    @property
    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    # ------------------------------------------------------------------
    # Parameter views
    # ------------------------------------------------------------------

    def params(self) -> list[FloatArray]:
        """Parameters as ``[W0, b0, W1, b1, ...]``."""
        out: list[FloatArray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def with_params(self, params: list[FloatArray]) -> MlpModel:
        """Return a model sharing this architecture with new parameters."""
        return MlpModel(
            layer_sizes=self.layer_sizes,
            weights=list(params[0::2]),
            biases=list(params[1::2]),
        )

    def copy(self) -> MlpModel:
        return self.with_params([p.copy() for p in self.params()])

    # ------------------------------------------------------------------
    # Forward pass
    # ------------------------------------------------------------------

    def logits(self, inputs: FloatArray) -> FloatArray:
        h = np.asarray(inputs, dtype=np.float64)
        last = len(self.weights) - 1
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if layer < last:
                h = np.maximum(h, 0.0)
        return h

    def forward(self, inputs: FloatArray) -> FloatArray:
        """Class probabilities, one row per input."""
        z = self.logits(inputs)
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict[str, Any]:
        return {
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MlpModel:
        return cls(
            layer_sizes=tuple(int(s) for s in data["layer_sizes"]),
            weights=[np.asarray(w, dtype=np.float64) for w in data["weights"]],
            biases=[np.asarray(b, dtype=np.float64) for b in data["biases"]],
        )


@dataclass
class AdamState:
    """First/second moment accumulators with the usual Adam defaults."""

    m: list[FloatArray]
    v: list[FloatArray]
    step: int = 0
    lr: float = ADAM_LR
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    @classmethod
    def zeros_like(cls, params: list[FloatArray], **hyper: float) -> AdamState:
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            **hyper,  # type: ignore[arg-type]
        )


@dataclass(frozen=True, eq=False)
class MixedBatch:
    """Mixup inputs z = λ s + (1 − λ) t with soft labels λ e_i + (1 − λ) e_j."""

    inputs: FloatArray
    soft_labels: FloatArray
    s_idx: NDArray[np.int64]
    t_idx: NDArray[np.int64]
    lambdas: FloatArray

    @property
    def size(self) -> int:
        return int(self.inputs.shape[0])


@dataclass
class Evaluation:
    """Per-point class probabilities and correctness on a labeled dataset."""

    probs: FloatArray
    predictions: NDArray[np.int64]
    correct: NDArray[np.bool_]

    @property
    def accuracy(self) -> float:
        return float(self.correct.mean())

    @property
    def error(self) -> float:
        return 1.0 - self.accuracy


@dataclass
class TrainingHistory:
    """Per-epoch loss and train error on the original points."""

    mode: str
    seed: int
    losses: list[float] = field(default_factory=list)
    train_errors: list[float] = field(default_factory=list)
    model: MlpModel | None = field(default=None, repr=False)

    @property
    def epochs(self) -> int:
        return len(self.losses)

    @property
    def final_error(self) -> float:
        return self.train_errors[-1] if self.train_errors else float("nan")

    def rows(self) -> list[dict[str, Any]]:
        """CSV rows ``epoch,loss,train_error`` (1-based epochs)."""
        return [
            {"epoch": e, "loss": loss, "train_error": err}
            for e, (loss, err) in enumerate(
                zip(self.losses, self.train_errors), start=1
            )
        ]
