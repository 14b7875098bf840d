"""Evaluation metrics for aggregated labels and their confidence scores."""

import logging
from typing import Any, Dict, List, Optional

import numpy as np
from sklearn.metrics import accuracy_score, f1_score, roc_auc_score

from crowdcertain.models.domain import ConfidenceScores, MetricRow
from crowdcertain.utils.error_handler import ValidationError
from crowdcertain.utils.validation_service import ValidationService

logger = logging.getLogger(__name__)


def _paired(nu, y):
    nu = np.asarray(nu)
    y = np.asarray(y)
    if nu.shape != y.shape:
        raise ValidationError(f"Label shapes differ: {nu.shape} vs {y.shape}")
    if nu.size == 0:
        raise ValidationError("Cannot evaluate empty labels")
    return nu.ravel().astype(np.int8), y.ravel().astype(np.int8)


def accuracy(nu, y) -> float:
    nu, y = _paired(nu, y)
    return float(accuracy_score(y, nu))


def f1(nu, y) -> float:
    """Binary F1 over all (instance, class) pairs; 0 when there are no true positives."""
    nu, y = _paired(nu, y)
    return float(f1_score(y, nu, zero_division=0))


def auc_roc(scores, y) -> Optional[float]:
    """Mann-Whitney AUC (ties count one half); None when y holds a single class."""
    scores = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(y).ravel()
    if scores.shape != y.shape:
        raise ValidationError(f"Scores shape {scores.shape} does not match labels {y.shape}")
    if np.unique(y).size < 2:
        logger.warning("AUC undefined for single-class ground truth; reporting it as missing")
        return None
    return float(roc_auc_score(y, scores))


def brier(f, y) -> float:
    """Mean squared gap between confidence and ground truth (lower is better)."""
    f = np.asarray(f, dtype=float)
    y = np.asarray(y, dtype=float)
    if f.shape != y.shape:
        raise ValidationError(f"Confidence shape {f.shape} does not match labels {y.shape}")
    ValidationService.require(ValidationService.validate_probabilities(f, 'confidence'))
    return float(np.mean((f - y) ** 2))


def _bin_index(f: np.ndarray, bins: int) -> np.ndarray:
    # (lo, hi] intervals with 0 assigned to the first bin
    edges = np.linspace(0.0, 1.0, bins + 1)
    return np.digitize(f, edges[1:-1], right=True)


def reliability_bins(f, y, nu, bins: int = 10) -> List[Dict[str, Any]]:
    """Per-bin count, accuracy (agreement of nu with y) and mean confidence."""
    ValidationService.require(ValidationService.validate_positive_int(bins, 'bins'))
    f = np.asarray(f, dtype=float).ravel()
    correct = (np.asarray(nu).ravel() == np.asarray(y).ravel()).astype(float)
    if f.shape != correct.shape:
        raise ValidationError(f"Confidence shape {f.shape} does not match labels {correct.shape}")

    index = _bin_index(f, bins)
    table = []
    for b in range(bins):
        members = index == b
        count = int(members.sum())
        table.append({
            'bin': b,
            'lower': b / bins,
            'upper': (b + 1) / bins,
            'count': count,
            'accuracy': float(correct[members].mean()) if count else None,
            'confidence': float(f[members].mean()) if count else None,
        })
    return table


def ece(f, y, nu, bins: int = 10) -> float:
    """Expected calibration error over equal-width bins; empty bins contribute nothing."""
    table = reliability_bins(f, y, nu, bins)
    n = sum(row['count'] for row in table)
    if n == 0:
        raise ValidationError("Cannot compute calibration error on empty input")
    return float(sum(row['count'] / n * abs(row['accuracy'] - row['confidence'])
                     for row in table if row['count']))


class MetricsService:
    """Evaluate one method's labels and confidence on a set of instances."""

    @staticmethod
    def evaluate(nu: np.ndarray, y: np.ndarray, scores: Optional[np.ndarray] = None,
                 confidence: Optional[ConfidenceScores] = None, bins: int = 10) -> MetricRow:
        """Compute every metric for one (method, fold).

        Args:
            nu: N x K aggregated labels
            y: N x K ground truth
            scores: N x K soft scores ranked for AUC (falls back to nu)
            confidence: Freq/Beta confidence; calibration metrics are None without it
            bins: ECE bin count

        Returns:
            MetricRow
        """
        ranked = nu if scores is None else scores
        row = {
            'accuracy': accuracy(nu, y),
            'f1': f1(nu, y),
            'auc': auc_roc(ranked, y),
            'brier_mse_freq': None,
            'brier_mse_beta': None,
            'ece_freq': None,
            'ece_beta': None,
        }
        if confidence is not None:
            row['brier_mse_freq'] = brier(confidence.f_freq, y)
            row['brier_mse_beta'] = brier(confidence.f_beta, y)
            row['ece_freq'] = ece(confidence.f_freq, y, nu, bins)
            row['ece_beta'] = ece(confidence.f_beta, y, nu, bins)
        return MetricRow(n_instances=int(np.asarray(nu).shape[0]), bins=bins, **row)
