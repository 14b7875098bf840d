"""Uncertainty-weighted soft majority voting.

Consistency (1 - uncertainty, optionally zeroed where a worker's predicted
label disagrees with the crowd), per-class reliability, normalized weights and
the aggregated label. ``CrowdCertainModel`` wires these to the classifier
ensembles so that weights learnt once can label new instances without crowd
labels.
"""

import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from crowdcertain.models.domain import (
    AggregationResult,
    ConfidenceScores,
    ConsistencyScores,
    EnsemblePredictions,
    ForestConfig,
    UncertaintyScores,
    WorkerWeights,
)
from crowdcertain.utils.classifier_ensemble import ClassifierEnsembleManager, WorkerEnsembles
from crowdcertain.utils.confidence_service import ConfidenceService
from crowdcertain.utils.error_handler import AggregationError, EnsembleError, ValidationError
from crowdcertain.utils.uncertainty_service import UncertaintyService
from crowdcertain.utils.validation_service import ValidationService

logger = logging.getLogger(__name__)

STRATEGIES = ('no_penalty', 'penalized')
PENALTY_REFERENCES = ('eta', 'z')
DECISION_CUTOFF = 0.5


def crowd_majority(votes: np.ndarray) -> np.ndarray:
    """Across-worker majority of an N x M x K vote tensor; ties go to 0."""
    votes = np.asarray(votes)
    m = votes.shape[1]
    return (votes.sum(axis=1) > m / 2.0).astype(np.int8)


def consistency(delta: UncertaintyScores, eta: np.ndarray, mode: str = 'no_penalty',
                reference: Optional[np.ndarray] = None) -> ConsistencyScores:
    """Consistency scores c = 1 - delta, zeroed in penalized mode where eta disagrees with the crowd.

    Args:
        delta: Normalized uncertainty scores (N x M x K)
        eta: Predicted labels (N x M x K)
        mode: 'no_penalty' or 'penalized'
        reference: Votes whose across-worker majority defines agreement;
            defaults to ``eta`` (pass the raw crowd labels for the z variant)

    Returns:
        ConsistencyScores in [0, 1]
    """
    mode = mode.replace('-', '_')
    ValidationService.require(ValidationService.validate_choice(mode, STRATEGIES, 'strategy'))
    values = np.asarray(delta.delta, dtype=float)
    eta = np.asarray(eta)
    if values.shape != eta.shape:
        raise AggregationError(f"Uncertainty shape {values.shape} does not match predicted labels {eta.shape}")
    if values.size and (values.max() > 1.0 or values.min() < 0.0):
        raise ValidationError("Uncertainty must be normalized to [0, 1] before computing consistency")

    c = 1.0 - values
    if mode == 'penalized':
        votes = eta if reference is None else np.asarray(reference)
        if votes.shape != eta.shape:
            raise AggregationError(f"Penalty reference shape {votes.shape} does not match {eta.shape}")
        agrees = eta == crowd_majority(votes)[:, None, :]
        c = np.where(agrees, c, 0.0)
    return ConsistencyScores(c=c, mode=mode)


def reliability(scores: ConsistencyScores):
    """Per-class reliability psi (M x K) and overall reliability (M), both arithmetic means."""
    c = np.asarray(scores.c, dtype=float)
    if c.shape[0] < 1:
        raise ValidationError("Reliability needs at least one instance")
    psi = c.mean(axis=0)
    return psi, psi.mean(axis=1)


def weights(psi: np.ndarray) -> np.ndarray:
    """Normalize reliabilities over workers per class; all-zero columns become uniform."""
    psi = np.asarray(psi, dtype=float)
    if np.any(psi < 0):
        raise ValidationError("Reliability values must be non-negative")
    totals = psi.sum(axis=0)
    m = psi.shape[0]
    degenerate = totals <= 0
    if degenerate.any():
        logger.warning(f"Zero total reliability for {int(degenerate.sum())} class(es); using uniform weights")
    safe = np.where(degenerate, 1.0, totals)
    return np.where(degenerate[None, :], 1.0 / m, psi / safe[None, :])


def aggregate(eta: np.ndarray, omega: np.ndarray, worker_weights: Optional[WorkerWeights] = None) -> AggregationResult:
    """Weighted soft vote of predicted labels; nu = 1 iff the weighted score is strictly above 0.5."""
    eta = np.asarray(eta)
    omega = np.asarray(omega, dtype=float)
    if eta.ndim != 3 or omega.shape != eta.shape[1:]:
        raise AggregationError(f"Weights shape {omega.shape} does not match predicted labels {eta.shape}")
    ValidationService.require(ValidationService.validate_normalized_weights(omega), AggregationError)

    score = np.einsum('imk,mk->ik', eta.astype(float), omega)
    nu = (score > DECISION_CUTOFF).astype(np.int8)
    if worker_weights is None:
        worker_weights = WorkerWeights(psi=omega, psi_overall=omega.mean(axis=1), omega=omega)
    return AggregationResult(nu=nu, weighted_score=score, weights=worker_weights)


@dataclass
class CrowdCertainOutput:
    predictions: EnsemblePredictions
    aggregation: AggregationResult
    confidence: ConfidenceScores


class CrowdCertainModel:
    """Fit per-worker ensembles and weights on labelled data, then label new instances.

    Weights are learnt once on the fitting rows; ``predict`` only needs the
    features of new instances.
    """

    def __init__(self, forest_config: Optional[ForestConfig] = None, measure: str = 'std_dev',
                 strategy: str = 'penalized', penalty_reference: str = 'eta', gamma: float = 0.95,
                 conformal_threshold: float = 0.5, jobs: int = 1):
        self.forest_config = forest_config or ForestConfig()
        self.measure = UncertaintyService.measure_from_flag(measure)
        self.strategy = strategy.replace('-', '_')
        ValidationService.require(ValidationService.validate_choice(self.strategy, STRATEGIES, 'strategy'))
        ValidationService.require(
            ValidationService.validate_choice(penalty_reference, PENALTY_REFERENCES, 'penalty reference'))
        self.penalty_reference = penalty_reference
        self.gamma = gamma
        self.conformal_threshold = conformal_threshold
        self.manager = ClassifierEnsembleManager(self.forest_config, jobs=jobs)
        self.ensembles: Optional[WorkerEnsembles] = None
        self.worker_weights: Optional[WorkerWeights] = None
        self.consistency_scores: Optional[ConsistencyScores] = None

    def fit(self, features: np.ndarray, worker_labels: np.ndarray,
            ensembles: Optional[WorkerEnsembles] = None) -> 'CrowdCertainModel':
        """Train ensembles on the workers' labels and estimate per-class weights.

        Args:
            features: N x F training features
            worker_labels: N x M x K crowd labels for the same rows
            ensembles: Ensembles already trained on these rows; skips training

        Returns:
            self
        """
        if ensembles is not None and ensembles.n_workers != np.asarray(worker_labels).shape[1]:
            raise EnsembleError(f"Ensembles cover {ensembles.n_workers} workers, labels have "
                                f"{np.asarray(worker_labels).shape[1]}")
        self.ensembles = ensembles if ensembles is not None else self.manager.fit(features, worker_labels)
        predictions = self.manager.predict(self.ensembles, features)
        delta = UncertaintyService.compute(
            predictions, self.measure, gamma=self.gamma, conformal_threshold=self.conformal_threshold)

        reference = worker_labels if self.penalty_reference == 'z' else None
        self.consistency_scores = consistency(delta, predictions.eta, self.strategy, reference=reference)
        psi, psi_overall = reliability(self.consistency_scores)
        self.worker_weights = WorkerWeights(psi=psi, psi_overall=psi_overall, omega=weights(psi))
        logger.info(f"Fitted crowd-certain ({self.strategy}, {self.measure}): "
                    f"weights {np.round(self.worker_weights.omega[:, 0], 4).tolist()}")
        return self

    def predict(self, features: np.ndarray) -> CrowdCertainOutput:
        """Aggregated labels and confidence scores for new instances."""
        if self.ensembles is None or self.worker_weights is None:
            raise EnsembleError("Model has not been fitted")
        predictions = self.manager.predict(self.ensembles, features)
        result = aggregate(predictions.eta, self.worker_weights.omega, self.worker_weights)
        confidence = ConfidenceService.compute(predictions.eta, self.worker_weights.omega, result.nu)
        return CrowdCertainOutput(predictions=predictions, aggregation=result, confidence=confidence)

    def to_dict(self) -> Dict[str, Any]:
        if self.ensembles is None or self.worker_weights is None:
            raise EnsembleError("Model has not been fitted")
        return {
            'measure': self.measure,
            'strategy': self.strategy,
            'penalty_reference': self.penalty_reference,
            'gamma': self.gamma,
            'conformal_threshold': self.conformal_threshold,
            'psi': self.worker_weights.psi.tolist(),
            'omega': self.worker_weights.omega.tolist(),
            'ensembles': self.ensembles.to_dict(),
        }

    def save_json(self, path: str):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, 'w', encoding='utf-8') as fh:
            json.dump(self.to_dict(), fh)
        logger.info(f"Saved crowd-certain model to {path}")

    @classmethod
    def load_json(cls, path: str) -> 'CrowdCertainModel':
        if not os.path.isfile(path):
            raise EnsembleError(f"Model file not found: {path}")
        with open(path, encoding='utf-8') as fh:
            data = json.load(fh)
        ensembles = WorkerEnsembles.from_dict(data['ensembles'])
        model = cls(forest_config=ensembles.config, measure=data['measure'], strategy=data['strategy'],
                    penalty_reference=data['penalty_reference'], gamma=data['gamma'],
                    conformal_threshold=data['conformal_threshold'])
        psi = np.asarray(data['psi'], dtype=float)
        model.ensembles = ensembles
        model.worker_weights = WorkerWeights(psi=psi, psi_overall=psi.mean(axis=1),
                                             omega=np.asarray(data['omega'], dtype=float))
        return model

    @staticmethod
    def export_weights_csv(worker_weights: WorkerWeights, path: str):
        """Write worker_id, class_id, psi, omega rows."""
        m, k = worker_weights.omega.shape
        frame = pd.DataFrame([
            {'worker_id': a, 'class_id': c,
             'psi': float(worker_weights.psi[a, c]), 'omega': float(worker_weights.omega[a, c])}
            for a in range(m) for c in range(k)
        ])
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        frame.to_csv(path, index=False)
