"""Worker skills from a rank-one completion of the worker agreement matrix."""

import logging

import numpy as np

from crowdcertain.models.domain import BaselineResult
from crowdcertain.utils.error_handler import ValidationError
from crowdcertain.utils.validation_service import ValidationService
from .constants import BaselineConstants
from .voting import _as_votes, weighted_majority

logger = logging.getLogger(__name__)

N_LABELS = 2


def agreement_target(votes: np.ndarray) -> np.ndarray:
    """Target matrix (L/(L-1)) C - 1/(L-1) from pairwise agreement rates C, diagonal zeroed."""
    agree = (votes[:, :, None] == votes[:, None, :]).mean(axis=0)
    target = (N_LABELS / (N_LABELS - 1)) * agree - 1.0 / (N_LABELS - 1)
    np.fill_diagonal(target, 0.0)
    return target


def rank_one_completion(target: np.ndarray, iters: int = 100, tol: float = 1e-10) -> np.ndarray:
    """s with s_a s_b ~ target[a, b] off the diagonal.

    The unknown diagonal is refilled with s_a^2 from the current estimate and
    the leading eigenpair is refreshed by power iteration each round.
    """
    m = target.shape[0]
    filled = target.copy()
    off_diag = target.sum(axis=1) / max(m - 1, 1)
    np.fill_diagonal(filled, np.clip(off_diag, 0.0, None))

    vector = np.ones(m) / np.sqrt(m)
    s = np.zeros(m)
    for iteration in range(iters):
        product = filled @ vector
        norm = np.linalg.norm(product)
        if norm == 0:
            break
        vector = product / norm
        eigenvalue = float(vector @ filled @ vector)
        new_s = np.sqrt(max(eigenvalue, 0.0)) * vector
        # Orient so that workers are on average better than chance
        if new_s.sum() < 0:
            new_s, vector = -new_s, -vector
        np.fill_diagonal(filled, new_s ** 2)
        delta = float(np.abs(new_s - s).max())
        s = new_s
        if delta < tol:
            logger.debug(f"Rank-one completion converged after {iteration + 1} rounds")
            break
    return s


def mmsr(z, iters: int = 100) -> BaselineResult:
    """Skill-weighted vote with log-odds weights from the completed agreement structure."""
    ValidationService.require(ValidationService.validate_positive_int(iters, 'MMSR iterations'))
    z = _as_votes(z)
    n, m, k = z.shape
    if m < 3:
        raise ValidationError("MMSR needs at least three workers")

    eps = BaselineConstants.MMSR_EPS
    skills = np.empty((m, k))
    for c in range(k):
        s = rank_one_completion(agreement_target(z[:, :, c]), iters=iters)
        # Convert the centred skill back to a probability of answering correctly
        skills[:, c] = np.clip((s * (N_LABELS - 1) + 1.0) / N_LABELS, eps, 1.0 - eps)

    log_odds = np.log((N_LABELS - 1) * skills / (1.0 - skills))
    nu, soft = weighted_majority(z, log_odds)
    return BaselineResult(method='mmsr', nu=nu, worker_scores=skills, scores=soft, iterations_run=iters)
