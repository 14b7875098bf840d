"""Per-worker classifier ensembles: training, binarization and persistence."""

import json
import logging
import os
from dataclasses import asdict
from typing import Any, Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed
from sklearn.metrics import roc_curve

from crowdcertain.models.domain import EnsemblePredictions, ForestConfig
from crowdcertain.utils.error_handler import EnsembleError, ValidationError
from crowdcertain.utils.validation_service import ValidationService
from .constants import EnsembleConstants
from .forest import SeededForest

logger = logging.getLogger(__name__)


def train_worker_ensemble(train_features: np.ndarray, worker_labels: np.ndarray,
                          cfg: ForestConfig, g: int) -> SeededForest:
    """Train the g-th seeded forest on one worker's labels for one class."""
    worker_labels = np.asarray(worker_labels)
    if worker_labels.size == 0:
        raise EnsembleError("Training set is empty")
    ValidationService.require(ValidationService.validate_binary(worker_labels, 'worker labels'), EnsembleError)
    return SeededForest(cfg, seed=g).fit(train_features, worker_labels)


def binarization_threshold(probs: np.ndarray, labels: np.ndarray, mode: str = 'roc_youden') -> float:
    """Threshold turning predicted probabilities into labels under the strict ``p > theta`` rule.

    ``roc_youden`` finds the unique predicted probability that maximizes
    TPR - FPR when scores at or above it count as positive (largest such
    candidate on ties), then returns the midpoint between it and the next
    lower distinct probability, so that ``p > theta`` reproduces the same
    split. ``fixed_half`` returns 0.5. Single-class labels fall back to 0.5.
    """
    probs = np.asarray(probs, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    if probs.size == 0:
        raise ValidationError("Cannot choose a threshold from empty input")
    ValidationService.require(ValidationService.validate_choice(mode, EnsembleConstants.THRESHOLD_MODES, 'threshold mode'))
    ValidationService.require(ValidationService.validate_probabilities(probs))
    ValidationService.require(ValidationService.validate_binary(labels))

    if mode == 'fixed_half' or np.unique(labels).size < 2:
        return EnsembleConstants.FALLBACK_THRESHOLD

    fpr, tpr, thresholds = roc_curve(labels, probs, drop_intermediate=False)
    # thresholds[0] is the +inf sentinel; the rest are the unique scores, descending
    candidates = thresholds[1:]
    best = int(np.argmax(tpr[1:] - fpr[1:]))
    below = candidates[best + 1] if best + 1 < candidates.size else 0.0
    return float((candidates[best] + below) / 2.0)


def classifier_majority(votes) -> int:
    """Majority over the G binarized votes; an exact tie goes to the positive class."""
    votes = np.asarray(votes, dtype=float)
    if votes.size == 0:
        raise ValidationError("At least one vote is required")
    return int(votes.mean() >= EnsembleConstants.MAJORITY_CUTOFF)


class WorkerEnsembles:
    """M x K x G trained forests plus their binarization thresholds."""

    def __init__(self, config: ForestConfig, forests: List[List[List[SeededForest]]], thresholds: np.ndarray):
        self.config = config
        self.forests = forests
        self.thresholds = thresholds

    @property
    def n_workers(self) -> int:
        return len(self.forests)

    @property
    def n_classes(self) -> int:
        return len(self.forests[0]) if self.forests else 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'format': EnsembleConstants.MODEL_FORMAT,
            'version': EnsembleConstants.MODEL_VERSION,
            'config': asdict(self.config),
            'thresholds': self.thresholds.tolist(),
            'forests': [[[forest.to_dict() for forest in per_class] for per_class in per_worker]
                        for per_worker in self.forests],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'WorkerEnsembles':
        if data.get('format') != EnsembleConstants.MODEL_FORMAT:
            raise EnsembleError("Not a crowdcertain ensemble dump")
        if data.get('version') != EnsembleConstants.MODEL_VERSION:
            raise EnsembleError(f"Unsupported ensemble dump version {data.get('version')}")
        config = ForestConfig(**data['config'])
        forests = [[[SeededForest.from_dict(f, config) for f in per_class] for per_class in per_worker]
                   for per_worker in data['forests']]
        return cls(config, forests, np.asarray(data['thresholds'], dtype=float))


class ClassifierEnsembleManager:
    """Trains and applies one seeded forest ensemble per (worker, class)."""

    def __init__(self, config: Optional[ForestConfig] = None, jobs: int = 1, logger=None):
        self.config = config or ForestConfig()
        self.jobs = jobs
        self.logger = logger or logging.getLogger(__name__)
        if self.config.threshold_mode not in EnsembleConstants.THRESHOLD_MODES:
            raise EnsembleError(f"Unknown threshold mode '{self.config.threshold_mode}'")

    def _fit_one(self, features: np.ndarray, labels: np.ndarray, g: int):
        forest = train_worker_ensemble(features, labels, self.config, g)
        theta = binarization_threshold(forest.predict_proba(features), labels, self.config.threshold_mode)
        return forest, theta

    def fit(self, train_features: np.ndarray, worker_labels: np.ndarray) -> WorkerEnsembles:
        """Train G forests per (worker, class) on the workers' training labels.

        Args:
            train_features: N_train x F features
            worker_labels: N_train x M x K worker labels

        Returns:
            WorkerEnsembles with thresholds computed on the training rows
        """
        train_features = np.asarray(train_features, dtype=float)
        worker_labels = np.asarray(worker_labels)
        if worker_labels.ndim != 3 or worker_labels.shape[0] != train_features.shape[0]:
            raise EnsembleError(f"Worker labels shape {worker_labels.shape} does not match "
                                f"{train_features.shape[0]} training rows")

        _, m, k = worker_labels.shape
        g_count = self.config.g_ensembles
        cells = [(a, c, g) for a in range(m) for c in range(k) for g in range(g_count)]
        self.logger.info(f"Training {len(cells)} forests ({m} workers x {k} classes x {g_count} seeds)")

        results = Parallel(n_jobs=self.jobs)(
            delayed(self._fit_one)(train_features, worker_labels[:, a, c], g) for a, c, g in cells
        )

        forests = [[[None] * g_count for _ in range(k)] for _ in range(m)]
        thresholds = np.empty((m, k, g_count))
        for (a, c, g), (forest, theta) in zip(cells, results):
            forests[a][c][g] = forest
            thresholds[a, c, g] = theta
        return WorkerEnsembles(self.config, forests, thresholds)

    def predict(self, ensembles: WorkerEnsembles, features: np.ndarray) -> EnsemblePredictions:
        """Probabilities, binarized labels and ensemble-majority labels for new rows."""
        features = np.asarray(features, dtype=float)
        m, k, g_count = ensembles.thresholds.shape
        probs = np.empty((features.shape[0], m, k, g_count))
        for a in range(m):
            for c in range(k):
                for g in range(g_count):
                    probs[:, a, c, g] = ensembles.forests[a][c][g].predict_proba(features)

        labels = (probs > ensembles.thresholds[None, ...]).astype(np.int8)
        eta = (labels.mean(axis=-1) >= EnsembleConstants.MAJORITY_CUTOFF).astype(np.int8)
        return EnsemblePredictions(probs=probs, thresholds=ensembles.thresholds, labels=labels, eta=eta)

    @staticmethod
    def save_json(ensembles: WorkerEnsembles, path: str):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, 'w', encoding='utf-8') as fh:
            json.dump(ensembles.to_dict(), fh)
        logger.info(f"Saved ensemble dump to {path}")

    @staticmethod
    def load_json(path: str) -> WorkerEnsembles:
        if not os.path.isfile(path):
            raise EnsembleError(f"Ensemble dump not found: {path}")
        with open(path, encoding='utf-8') as fh:
            return WorkerEnsembles.from_dict(json.load(fh))
