"""Confidence scores for aggregated labels: weighted agreement and Beta-CDF."""

import logging

import numpy as np
from scipy.stats import binom

from crowdcertain.models.domain import ConfidenceScores
from crowdcertain.utils.error_handler import AggregationError, ValidationError

logger = logging.getLogger(__name__)

_SHAPE_TOLERANCE = 1e-9


def _broadcast_weights(votes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Per-worker weights as an N x M x K array (accepts M x K or N x M x K)."""
    weights = np.asarray(weights, dtype=float)
    if weights.ndim == 2:
        weights = weights[None, :, :]
    try:
        return np.broadcast_to(weights, votes.shape)
    except ValueError as e:
        raise AggregationError(f"Weights shape {weights.shape} does not match votes {votes.shape}") from e


def _agreement(votes, weights, nu):
    votes = np.asarray(votes)
    nu = np.asarray(nu)
    if votes.ndim != 3 or nu.shape != (votes.shape[0], votes.shape[2]):
        raise AggregationError(f"Aggregated labels shape {nu.shape} does not match votes {votes.shape}")
    w = _broadcast_weights(votes, weights)
    agree = votes == nu[:, None, :]
    return (w * agree).sum(axis=1), (w * ~agree).sum(axis=1)


def round_half_away(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def freq_confidence(votes, weights, nu) -> np.ndarray:
    """Total weight of the workers whose vote equals the aggregated label, clipped to [0, 1].

    Normalized weights can sum to slightly above 1 in floating point.
    """
    agreeing, _ = _agreement(votes, weights, nu)
    return np.clip(agreeing, 0.0, 1.0)


def beta_shape(votes, weights, nu):
    """Beta shape parameters l = 1 + agreeing weight, u = 1 + disagreeing weight."""
    agreeing, disagreeing = _agreement(votes, weights, nu)
    return 1.0 + agreeing, 1.0 + disagreeing


def beta_confidence(l, u) -> np.ndarray:
    """I_0.5(l, u) evaluated as a binomial tail after rounding.

    T = round(l + u) and the lower summation limit is round(l) (half away
    from zero); the sum over t in [round(l), T - 1] of C(T-1, t) 0.5^(T-1) is
    zero when round(l) > T - 1.
    """
    l = np.asarray(l, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(l < 1.0 - _SHAPE_TOLERANCE) or np.any(u < 1.0 - _SHAPE_TOLERANCE):
        raise ValidationError("Beta shape parameters must be at least 1")
    total = round_half_away(l + u)
    lower = round_half_away(l)
    return binom.sf(lower - 1, total - 1, 0.5)


class ConfidenceService:
    """Service computing both confidence scores for a set of aggregated labels."""

    @staticmethod
    def compute(votes: np.ndarray, weights: np.ndarray, nu: np.ndarray) -> ConfidenceScores:
        """Freq and Beta confidence for every (instance, class).

        Args:
            votes: N x M x K labels the aggregation was built from
                (predicted labels for crowd-certain, crowd labels for baselines)
            weights: M x K or N x M x K worker weights
            nu: N x K aggregated labels

        Returns:
            ConfidenceScores
        """
        shape_l, shape_u = beta_shape(votes, weights, nu)
        f_freq = freq_confidence(votes, weights, nu)
        f_beta = beta_confidence(shape_l, shape_u)
        return ConfidenceScores(
            f_freq=f_freq,
            f_beta=f_beta,
            shape_l=shape_l,
            shape_u=shape_u,
        )
