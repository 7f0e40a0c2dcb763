"""Small ReLU networks trained with ERM or Mixup, gradients by hand.

Everything runs on numpy: :func:`loss_and_grad` backpropagates mean
cross-entropy against hard or soft labels, :func:`adam_step` applies one
bias-corrected Adam update, and :func:`train` drives either objective while
recording the training error on the *original* points.
"""

from __future__ import annotations

import logging
import math
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import log_softmax

from mixup_optimal.constants import MIXUP_SAMPLES_PER_STEP, SIMPLEX_TOL
from mixup_optimal.exceptions import ContractError, DimensionMismatchError
from mixup_optimal.mixing import MixingDistribution
from mixup_optimal.models.dataset import LabeledDataset
from mixup_optimal.models.oracle import GridSpec
from mixup_optimal.models.training import (
    AdamState,
    Evaluation,
    MixedBatch,
    MlpModel,
    TrainingHistory,
)

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


class TrainingMode(str, Enum):
    ERM = "erm"
    MIXUP = "mixup"


# ---------------------------------------------------------------------------
# Model construction
# ---------------------------------------------------------------------------


def init_mlp(layer_sizes: ArrayLike, seed: int) -> MlpModel:
    """Weights ~ U(−1/√fan_in, 1/√fan_in), zero biases.

    Raises
    ------
    ContractError
        If fewer than two layer sizes are given or a size is not positive.
    """
    sizes = tuple(int(s) for s in np.atleast_1d(np.asarray(layer_sizes)))
    if len(sizes) < 2:
        raise ContractError(f"an MLP needs at least two layer sizes, got {sizes}")
    if any(s < 1 for s in sizes):
        raise ContractError(f"layer sizes must be positive, got {sizes}")
    rng = np.random.default_rng(seed)
    weights: list[FloatArray] = []
    biases: list[FloatArray] = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / math.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(layer_sizes=sizes, weights=weights, biases=biases)


# ---------------------------------------------------------------------------
# Loss and gradients
# ---------------------------------------------------------------------------


def _targets(targets: ArrayLike, k: int, batch: int) -> FloatArray:
    y = np.asarray(targets)
    if y.ndim == 1 and np.issubdtype(y.dtype, np.integer):
        if y.shape[0] != batch:
            raise DimensionMismatchError(f"{y.shape[0]} labels for {batch} inputs")
        if y.size and (y.min() < 1 or y.max() > k):
            raise ContractError(f"class labels must lie in 1..{k}")
        return np.eye(k)[y - 1]
    y = y.astype(np.float64)
    if y.shape != (batch, k):
        raise DimensionMismatchError(
            f"soft labels have shape {y.shape}, expected {(batch, k)}"
        )
    if np.any(y < -SIMPLEX_TOL) or np.any(np.abs(y.sum(axis=1) - 1.0) > SIMPLEX_TOL):
        raise ContractError("soft labels must lie in the probability simplex")
    return y


def loss_and_grad(
    model: MlpModel, inputs: ArrayLike, targets: ArrayLike
) -> tuple[float, list[FloatArray]]:
    """Mean cross-entropy and its gradient with respect to ``model.params()``.

    *targets* is either a vector of 1-based class labels or a ``(B, k)``
    array of soft labels.  At the logits the gradient is ``(p − y) / B``.
    """
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_inputs:
        raise DimensionMismatchError(
            f"inputs have shape {x.shape}, model expects {model.n_inputs} features"
        )
    batch = x.shape[0]
    y = _targets(targets, model.n_classes, batch)

    # Forward, keeping pre-activations for the ReLU masks.
    activations = [x]
    pre: list[FloatArray] = []
    last = len(model.weights) - 1
    h = x
    for layer, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if layer < last else z
        activations.append(h)
    log_p = log_softmax(pre[-1], axis=1)
    loss = float(-np.sum(y * log_p) / batch)

    # Backward.
    delta = (np.exp(log_p) - y) / batch
    grads: list[FloatArray] = [np.empty(0)] * (2 * len(model.weights))
    for layer in range(last, -1, -1):
        grads[2 * layer] = activations[layer].T @ delta
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ model.weights[layer].T) * (pre[layer - 1] > 0.0)
    return loss, grads


# ---------------------------------------------------------------------------
# Mixup sampling
# ---------------------------------------------------------------------------


def mixup_batch(
    ds: LabeledDataset,
    dist: MixingDistribution,
    batch_size: int,
    rng: np.random.Generator,
) -> MixedBatch:
    """Draw *batch_size* mixed examples with s, t i.i.d. uniform over the data.

    Draw order is s indices, t indices, then λ.  Pairs with s = t keep the
    original point and its one-hot label exactly.
    """
    if batch_size < 1:
        raise ContractError(f"batch_size must be >= 1, got {batch_size}")
    s = rng.integers(0, ds.m, batch_size)
    t = rng.integers(0, ds.m, batch_size)
    lam = dist.samples(rng, batch_size)
    one_hot = ds.one_hot()
    lam_col = lam[:, None]
    inputs = lam_col * ds.points[s] + (1.0 - lam_col) * ds.points[t]
    soft = lam_col * one_hot[s] + (1.0 - lam_col) * one_hot[t]
    same = s == t
    inputs[same] = ds.points[s[same]]
    soft[same] = one_hot[s[same]]
    return MixedBatch(inputs=inputs, soft_labels=soft, s_idx=s, t_idx=t, lambdas=lam)


def count_original_points(batch: MixedBatch) -> int:
    """Number of draws in *batch* that are unmixed data points (s = t)."""
    return int(np.count_nonzero(batch.s_idx == batch.t_idx))


# ---------------------------------------------------------------------------
# Optimiser
# ---------------------------------------------------------------------------


def adam_step(
    state: AdamState, params: list[FloatArray], grads: list[FloatArray]
) -> tuple[list[FloatArray], AdamState]:
    """One bias-corrected Adam update; inputs are not modified."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ContractError(
            f"{len(params)} params, {len(grads)} grads, {len(state.m)} moment slots"
        )
    for idx, (p, g, mom) in enumerate(zip(params, grads, state.m)):
        if p.shape != g.shape or p.shape != mom.shape:
            raise ContractError(
                f"shape mismatch at slot {idx}: param {p.shape}, grad {g.shape}, "
                f"moment {mom.shape}"
            )
    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_m = [b1 * m + (1.0 - b1) * g for m, g in zip(state.m, grads)]
    new_v = [b2 * v + (1.0 - b2) * g * g for v, g in zip(state.v, grads)]
    c1 = 1.0 - b1**step
    c2 = 1.0 - b2**step
    new_params = [
        p - state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
        for p, m, v in zip(params, new_m, new_v)
    ]
    new_state = AdamState(
        m=new_m,
        v=new_v,
        step=step,
        lr=state.lr,
        beta1=b1,
        beta2=b2,
        eps=state.eps,
    )
    return new_params, new_state


# ---------------------------------------------------------------------------
# Training and evaluation
# ---------------------------------------------------------------------------


def evaluate(model: MlpModel, ds: LabeledDataset) -> Evaluation:
    """Per-point probabilities and correctness; ties go to the lowest class."""
    if ds.n != model.n_inputs:
        raise DimensionMismatchError(
            f"dataset dimension {ds.n} differs from model input {model.n_inputs}"
        )
    probs = model.forward(ds.points)
    predictions = np.argmax(probs, axis=1).astype(np.int64) + 1
    return Evaluation(
        probs=probs, predictions=predictions, correct=predictions == ds.labels
    )


def _step_sizes(m: int, batch_size: int | None) -> list[int]:
    if batch_size is None or batch_size >= m:
        return [m]
    if batch_size < 1:
        raise ContractError(f"batch_size must be >= 1, got {batch_size}")
    full, rest = divmod(m, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def train(
    model: MlpModel,
    ds: LabeledDataset,
    mode: TrainingMode | str,
    dist: MixingDistribution | None = None,
    epochs: int = 3000,
    batch_size: int | None = None,
    seed: int = 0,
    mixup_samples: int | None = None,
) -> TrainingHistory:
    """Train a copy of *model* and return its per-epoch history.

    ERM visits the m original points once per epoch, shuffled when
    *batch_size* < m.  Full-batch Mixup takes one step per epoch on
    *mixup_samples* fresh mixed examples (default
    ``max(m, MIXUP_SAMPLES_PER_STEP)``); minibatch Mixup draws
    *batch_size* examples per step.  The train error is measured on the
    original points after every epoch.  Runs with equal arguments give
    identical histories.

    Raises
    ------
    ContractError
        If the mode is unknown, Mixup is requested without *dist*, or
        ``epochs < 1`` or ``mixup_samples < 1``.
    """
    try:
        mode = TrainingMode(mode)
    except ValueError as exc:
        raise ContractError(f"unknown training mode {mode!r}") from exc
    if mode is TrainingMode.MIXUP and dist is None:
        raise ContractError("mixup training needs a mixing distribution")
    if epochs < 1:
        raise ContractError(f"epochs must be >= 1, got {epochs}")
    if mixup_samples is None:
        mixup_samples = max(ds.m, MIXUP_SAMPLES_PER_STEP)
    elif mixup_samples < 1:
        raise ContractError(f"mixup_samples must be >= 1, got {mixup_samples}")
    if ds.n != model.n_inputs or ds.k != model.n_classes:
        raise DimensionMismatchError(
            f"model {model.layer_sizes} does not fit data with n={ds.n}, k={ds.k}"
        )

    rng = np.random.default_rng(seed)
    sizes = _step_sizes(ds.m, batch_size)
    params = [p.copy() for p in model.params()]
    state = AdamState.zeros_like(params)
    current = model.with_params(params)
    history = TrainingHistory(mode=mode.value, seed=seed)

    for epoch in range(1, epochs + 1):
        shuffle = mode is TrainingMode.ERM and len(sizes) > 1
        order = rng.permutation(ds.m) if shuffle else None
        start = 0
        epoch_loss = 0.0
        for size in sizes:
            if mode is TrainingMode.ERM:
                if order is None:
                    idx = np.arange(ds.m)
                else:
                    idx = order[start : start + size]
                start += size
                loss, grads = loss_and_grad(current, ds.points[idx], ds.labels[idx])
            else:
                assert dist is not None
                n_mix = size if len(sizes) > 1 else mixup_samples
                batch = mixup_batch(ds, dist, n_mix, rng)
                loss, grads = loss_and_grad(current, batch.inputs, batch.soft_labels)
            params, state = adam_step(state, params, grads)
            current = model.with_params(params)
            epoch_loss += loss * size
        history.losses.append(epoch_loss / ds.m)
        history.train_errors.append(evaluate(current, ds).error)
        if epoch % 500 == 0 or epoch == epochs:
            logger.debug(
                "%s seed=%d epoch %d: loss %.6f, train error %.4f",
                mode.value, seed, epoch, history.losses[-1], history.train_errors[-1],
            )
    history.model = current
    logger.info(
        "%s seed=%d: %d epochs, final train error %.4f",
        mode.value, seed, epochs, history.final_error,
    )
    return history


def probability_grid(model: MlpModel, grid: GridSpec) -> FloatArray:
    """Class probabilities on every grid cell, shape ``(ny, nx, k)``."""
    if model.n_inputs != 2:
        raise DimensionMismatchError("probability grids need a 2-D model input")
    probs = model.forward(grid.cells())
    return probs.reshape(grid.ny, grid.nx, model.n_classes)
