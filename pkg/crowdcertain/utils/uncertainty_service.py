"""Ensemble-disagreement uncertainty measures.

Scalar functions take the G ensemble outputs for one (instance, worker, class)
cell; ``UncertaintyService.compute`` applies the chosen measure to every cell
of an ``EnsemblePredictions`` and rescales it to [0, 1].
"""

import logging
import math

import numpy as np
from scipy.special import entr

from crowdcertain.models.domain import EnsemblePredictions, UncertaintyScores
from crowdcertain.utils.error_handler import ValidationError
from crowdcertain.utils.validation_service import ValidationService

logger = logging.getLogger(__name__)


def _require_members(g: int, minimum: int = 2):
    if g < minimum:
        raise ValidationError(f"At least {minimum} ensemble members are required (got {g})")


def _interval_indices(g: int, gamma: float):
    lower = math.ceil((g / 2.0) * (1.0 - gamma))
    upper = math.floor((g / 2.0) * (1.0 + gamma))
    return min(max(lower, 1), g), min(max(upper, 1), g)


def std_dev(votes) -> float:
    """Sample standard deviation (divisor G-1) of binarized ensemble votes."""
    votes = np.asarray(votes, dtype=float)
    _require_members(votes.size)
    return float(np.std(votes, ddof=1))


def entropy(probs) -> float:
    """-sum p ln p over ensemble members, with 0 ln 0 = 0."""
    probs = np.asarray(probs, dtype=float)
    ValidationService.require(ValidationService.validate_probabilities(probs))
    return float(entr(probs).sum())


def committee_variance(probs) -> float:
    """Sample variance (divisor G-1) of ensemble probabilities."""
    probs = np.asarray(probs, dtype=float)
    _require_members(probs.size)
    return float(np.var(probs, ddof=1))


def predictive_interval(probs, gamma: float = 0.95) -> float:
    """Width Q_U - Q_L of the central predictive interval of the sorted probabilities.

    L = ceil(G/2 (1 - gamma)) and U = floor(G/2 (1 + gamma)) are 1-based
    indices into the ascending sort, clamped to [1, G].
    """
    if not 0.0 < gamma < 1.0:
        raise ValidationError(f"Interval confidence level must lie in (0, 1) (got {gamma})")
    probs = np.sort(np.asarray(probs, dtype=float))
    _require_members(probs.size)
    lower, upper = _interval_indices(probs.size, gamma)
    return float(max(probs[upper - 1] - probs[lower - 1], 0.0))


def conformal_pvalue(probs, reference_label: int, threshold: float = 0.5) -> float:
    """Fraction of members whose nonconformity |p - reference| is at least ``threshold``."""
    if threshold < 0:
        raise ValidationError(f"Conformal threshold must be non-negative (got {threshold})")
    probs = np.asarray(probs, dtype=float)
    return float(np.mean(np.abs(probs - reference_label) >= threshold))


class UncertaintyService:
    """Service computing per-cell uncertainty tensors from ensemble outputs."""

    MEASURES = ('std_dev', 'entropy', 'committee_variance', 'predictive_interval', 'conformal')
    FLAG_TO_MEASURE = {
        'std-dev': 'std_dev',
        'entropy': 'entropy',
        'committee-var': 'committee_variance',
        'pred-interval': 'predictive_interval',
        'conformal': 'conformal',
    }

    @staticmethod
    def measure_from_flag(flag: str) -> str:
        if flag in UncertaintyService.MEASURES:
            return flag
        ValidationService.require(
            ValidationService.validate_choice(flag, UncertaintyService.FLAG_TO_MEASURE, 'uncertainty measure'))
        return UncertaintyService.FLAG_TO_MEASURE[flag]

    @staticmethod
    def max_value(measure: str, g: int) -> float:
        """Upper bound of a measure over G members, used to rescale it into [0, 1]."""
        if measure == 'std_dev':
            return 0.5 * math.sqrt(g / (g - 1))
        if measure == 'entropy':
            # -p ln p peaks at p = 1/e with value 1/e
            return g / math.e
        if measure == 'committee_variance':
            return g / (4.0 * (g - 1))
        return 1.0

    @staticmethod
    def compute(predictions: EnsemblePredictions, measure: str = 'std_dev', gamma: float = 0.95,
                conformal_threshold: float = 0.5, normalize: bool = True) -> UncertaintyScores:
        """Uncertainty for every (instance, worker, class) cell.

        Args:
            predictions: Ensemble outputs with a trailing G axis
            measure: One of MEASURES (CLI flag spellings are accepted too)
            gamma: Confidence level for the predictive interval
            conformal_threshold: Nonconformity threshold T
            normalize: Divide by the measure's maximum so values lie in [0, 1]

        Returns:
            UncertaintyScores with an N x M x K delta tensor
        """
        measure = UncertaintyService.measure_from_flag(measure)
        probs = np.asarray(predictions.probs, dtype=float)
        g = probs.shape[-1]
        _require_members(g)

        if measure == 'std_dev':
            delta = np.std(predictions.labels.astype(float), axis=-1, ddof=1)
        elif measure == 'entropy':
            ValidationService.require(ValidationService.validate_probabilities(probs))
            delta = entr(probs).sum(axis=-1)
        elif measure == 'committee_variance':
            delta = np.var(probs, axis=-1, ddof=1)
        elif measure == 'predictive_interval':
            if not 0.0 < gamma < 1.0:
                raise ValidationError(f"Interval confidence level must lie in (0, 1) (got {gamma})")
            ordered = np.sort(probs, axis=-1)
            lower, upper = _interval_indices(g, gamma)
            delta = np.maximum(ordered[..., upper - 1] - ordered[..., lower - 1], 0.0)
        else:
            if conformal_threshold < 0:
                raise ValidationError(f"Conformal threshold must be non-negative (got {conformal_threshold})")
            scores = np.abs(probs - predictions.eta[..., None])
            delta = np.mean(scores >= conformal_threshold, axis=-1)

        if normalize:
            delta = np.clip(delta / UncertaintyService.max_value(measure, g), 0.0, 1.0)

        logger.debug(f"Computed {measure} uncertainty, mean {float(delta.mean()):.4f}")
        return UncertaintyScores(delta=delta, measure=measure, normalized=normalize)
