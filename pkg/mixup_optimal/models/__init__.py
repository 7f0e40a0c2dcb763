"""Dataclasses returned by the mixup-optimal modules.

Import them directly from here or from the ``mixup_optimal`` top-level package:

    from mixup_optimal.models import LabeledDataset, XiTable
    from mixup_optimal import LabeledDataset  # same thing
"""

from mixup_optimal.models.assumptions import Assumption2Report, CollinearityViolation
from mixup_optimal.models.dataset import LabeledDataset
from mixup_optimal.models.linear import (
    InterpolationCertificate,
    LinearClassifier,
    LinearFit,
)
from mixup_optimal.models.oracle import (
    BoundaryGrid,
    ClassProbs,
    GridSpec,
    SegmentHit,
    XiTable,
)
from mixup_optimal.models.recovery import MixupMatrix, RankTrialReport, RecoveryResult
from mixup_optimal.models.training import (
    AdamState,
    Evaluation,
    MixedBatch,
    MlpModel,
    TrainingHistory,
)

__all__ = [
    # data
    "LabeledDataset",
    # oracle
    "BoundaryGrid",
    "ClassProbs",
    "GridSpec",
    "SegmentHit",
    "XiTable",
    # assumptions
    "Assumption2Report",
    "CollinearityViolation",
    # recovery
    "MixupMatrix",
    "RankTrialReport",
    "RecoveryResult",
    # training
    "AdamState",
    "Evaluation",
    "MixedBatch",
    "MlpModel",
    "TrainingHistory",
    # linear
    "InterpolationCertificate",
    "LinearClassifier",
    "LinearFit",
]
