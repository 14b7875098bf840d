from .core import (
    ClassifierEnsembleManager,
    WorkerEnsembles,
    binarization_threshold,
    classifier_majority,
    train_worker_ensemble,
)
from .forest import SeededForest
from .constants import EnsembleConstants

__all__ = [
    'ClassifierEnsembleManager',
    'WorkerEnsembles',
    'SeededForest',
    'EnsembleConstants',
    'binarization_threshold',
    'classifier_majority',
    'train_worker_ensemble',
]
