"""Mixup-optimal classifiers, their assumptions, and the experiments around them.

Quick-start::

    from mixup_optimal import MixingDistribution, datasets, h_epsilon

    ds = datasets.alternating_line(3, 2)
    probs = h_epsilon(ds, MixingDistribution.beta(1.0), [1.0], 0.1)
    print(probs.argmax, probs[1])

Command line::

    mixup-optimal oracle --dataset x3k2 --alpha 1 --eps 0.1 --probe 1
"""

__version__ = "0.1.0"

from mixup_optimal import datasets
from mixup_optimal.assumptions import (
    check_assumption1,
    check_assumption2,
    estimate_epsilon,
    margin_radius,
)
from mixup_optimal.config import ExperimentConfig
from mixup_optimal.exceptions import (
    ConfigError,
    ContractError,
    ConvergenceError,
    DatasetError,
    MixupError,
    NumericalError,
    OracleDomainError,
    RecoveryError,
)
from mixup_optimal.linear import (
    estimate_k,
    min_norm_interpolator,
    minimize_mixup_linear,
    mixup_linear_loss,
)
from mixup_optimal.mixing import MixingDistribution
from mixup_optimal.models import (
    Assumption2Report,
    BoundaryGrid,
    ClassProbs,
    GridSpec,
    LabeledDataset,
    MlpModel,
    RecoveryResult,
    TrainingHistory,
    XiTable,
)
from mixup_optimal.oracle import boundary_grid, h_epsilon, h_limit, xi_table
from mixup_optimal.recovery import (
    form_midpoints,
    permutation_rank_trial,
    recover_labeled,
    recover_unlabeled_bruteforce,
)
from mixup_optimal.training import TrainingMode, init_mlp, mixup_batch, train

__all__ = [
    "datasets",
    # Mixing
    "MixingDistribution",
    # Oracle
    "boundary_grid",
    "h_epsilon",
    "h_limit",
    "xi_table",
    # Assumptions
    "check_assumption1",
    "check_assumption2",
    "estimate_epsilon",
    "margin_radius",
    # Recovery
    "form_midpoints",
    "permutation_rank_trial",
    "recover_labeled",
    "recover_unlabeled_bruteforce",
    # Training
    "TrainingMode",
    "init_mlp",
    "mixup_batch",
    "train",
    # Linear
    "estimate_k",
    "min_norm_interpolator",
    "minimize_mixup_linear",
    "mixup_linear_loss",
    # Configuration
    "ExperimentConfig",
    # Exceptions
    "MixupError",
    "ConfigError",
    "ContractError",
    "ConvergenceError",
    "DatasetError",
    "NumericalError",
    "OracleDomainError",
    "RecoveryError",
    # Models
    "Assumption2Report",
    "BoundaryGrid",
    "ClassProbs",
    "GridSpec",
    "LabeledDataset",
    "MlpModel",
    "RecoveryResult",
    "TrainingHistory",
    "XiTable",
]
