"""Voting-based aggregators over raw crowd labels (N x M x K tensors)."""

import logging

import numpy as np

from crowdcertain.models.domain import BaselineResult, ConfidenceScores
from crowdcertain.utils.confidence_service import ConfidenceService, beta_confidence, beta_shape, freq_confidence
from crowdcertain.utils.error_handler import AggregationError, ValidationError
from crowdcertain.utils.random_state import make_rng
from crowdcertain.utils.validation_service import ValidationService
from .constants import BaselineConstants

logger = logging.getLogger(__name__)


def _as_votes(z) -> np.ndarray:
    z = np.asarray(z)
    if z.ndim != 3:
        raise AggregationError(f"Crowd labels must be N x M x K (got shape {z.shape})")
    ValidationService.require(ValidationService.validate_binary(z, 'crowd labels'))
    return z.astype(np.int8)


def normalize_skills(skills: np.ndarray) -> np.ndarray:
    """Column-normalize non-negative M x K skills; all-zero columns become uniform."""
    skills = np.clip(np.asarray(skills, dtype=float), 0.0, None)
    totals = skills.sum(axis=0)
    m = skills.shape[0]
    safe = np.where(totals > 0, totals, 1.0)
    return np.where(totals[None, :] > 0, skills / safe[None, :], 1.0 / m)


def majority_vote(z) -> np.ndarray:
    """1 iff strictly more than half of the workers voted 1; ties give 0."""
    z = _as_votes(z)
    return (z.sum(axis=1) > z.shape[1] / 2.0).astype(np.int8)


def baseline_aggregate(z, weights) -> np.ndarray:
    """nu = 1 iff sum_a w_a z_a > 0.5 for normalized weights (M x K or N x M x K)."""
    z = _as_votes(z)
    weights = np.asarray(weights, dtype=float)
    per_instance = weights.ndim == 3
    expected = z.shape if per_instance else z.shape[1:]
    ValidationService.require(ValidationService.validate_shape(weights, expected, 'weights'), AggregationError)
    ValidationService.require(
        ValidationService.validate_normalized_weights(weights, axis=1 if per_instance else 0), AggregationError)

    w = weights if per_instance else weights[None, :, :]
    score = (w * z).sum(axis=1)
    return (score > BaselineConstants.DECISION_CUTOFF).astype(np.int8)


def weighted_majority(z, weights: np.ndarray):
    """Weighted vote allowing signed weights: 1 iff weight on 1 exceeds weight on 0.

    Returns:
        (labels N x K, share of total absolute weight voting 1 as soft score)
    """
    z = _as_votes(z).astype(float)
    w = np.asarray(weights, dtype=float)[None, :, :]
    for_one = (w * z).sum(axis=1)
    for_zero = (w * (1.0 - z)).sum(axis=1)
    nu = (for_one > for_zero).astype(np.int8)
    total = np.abs(w).sum(axis=1)
    soft = 0.5 + 0.5 * (for_one - for_zero) / np.where(total > 0, total, 1.0)
    return nu, soft


def agreement_skills(z, labels: np.ndarray, per_class: bool = True) -> np.ndarray:
    """Fraction of instances on which each worker matches ``labels``."""
    z = np.asarray(z)
    agree = z == np.asarray(labels)[:, None, :]
    if per_class:
        return agree.mean(axis=0)
    return np.repeat(agree.mean(axis=(0, 2))[:, None], z.shape[2], axis=1)


def mv(z) -> BaselineResult:
    z = _as_votes(z)
    nu = majority_vote(z)
    m = z.shape[1]
    return BaselineResult(
        method='mv',
        nu=nu,
        worker_scores=np.ones((m, z.shape[2])),
        scores=z.mean(axis=1),
        iterations_run=1,
    )


def sheng(z) -> BaselineResult:
    """Majority vote with confidence computed as if every worker were equally capable."""
    z = _as_votes(z)
    _, m, k = z.shape
    nu = majority_vote(z)
    unit = np.ones((m, k))
    shape_l, shape_u = beta_shape(z, unit, nu)
    confidence = ConfidenceScores(
        f_freq=freq_confidence(z, unit / m, nu),
        f_beta=beta_confidence(shape_l, shape_u),
        shape_l=shape_l,
        shape_u=shape_u,
    )
    return BaselineResult(
        method='sheng',
        nu=nu,
        worker_scores=unit,
        confidence=confidence,
        scores=z.mean(axis=1),
        iterations_run=1,
    )


def wawa(z) -> BaselineResult:
    """Skills = agreement with majority vote, then a skill-weighted vote."""
    z = _as_votes(z)
    skills = agreement_skills(z, majority_vote(z), per_class=False)
    omega = normalize_skills(skills)
    nu, soft = weighted_majority(z, omega)
    return BaselineResult(method='wawa', nu=nu, worker_scores=skills, scores=soft, weights=omega, iterations_run=1)


def zero_based_skill(z, max_iters: int = 100) -> BaselineResult:
    """Alternate skill-weighted voting and skill re-estimation until the labels stop changing."""
    ValidationService.require(ValidationService.validate_positive_int(max_iters, 'max iterations'))
    z = _as_votes(z)
    _, m, k = z.shape

    skills = np.ones((m, k))
    nu, soft = weighted_majority(z, normalize_skills(skills))
    iterations = 0
    while iterations < max_iters:
        iterations += 1
        skills = agreement_skills(z, nu, per_class=False)
        new_nu, soft = weighted_majority(z, normalize_skills(skills))
        if np.array_equal(new_nu, nu):
            break
        nu = new_nu
    logger.debug(f"Zero-based skill stopped after {iterations} iteration(s)")
    return BaselineResult(method='zbs', nu=nu, worker_scores=skills, scores=soft,
                          weights=normalize_skills(skills), iterations_run=iterations)


def gold_majority_vote(z, truth: np.ndarray, gold_indices: np.ndarray) -> BaselineResult:
    """Weighted vote with weights = each worker's accuracy on a gold calibration subset."""
    z = _as_votes(z)
    gold_indices = np.asarray(gold_indices, dtype=np.int64)
    if gold_indices.size == 0:
        raise ValidationError("Gold majority vote needs at least one gold instance")
    skills = (z[gold_indices] == np.asarray(truth)[gold_indices][:, None, :]).mean(axis=0)
    omega = normalize_skills(skills)
    nu, soft = weighted_majority(z, omega)
    return BaselineResult(method='gold_mv', nu=nu, worker_scores=skills, scores=soft, weights=omega, iterations_run=1)


def draw_gold_indices(candidates: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    """Seeded gold subset of ``candidates`` (at least one instance)."""
    candidates = np.asarray(candidates, dtype=np.int64)
    size = max(1, int(round(fraction * candidates.size)))
    return np.sort(make_rng(seed, 'gold').choice(candidates, size=size, replace=False))


def crowd_confidence(z, weights, nu) -> ConfidenceScores:
    """Confidence of baseline labels built from crowd votes with the baseline's own weights."""
    return ConfidenceService.compute(_as_votes(z), weights, nu)
