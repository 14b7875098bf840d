"""Message-passing inference on the task-worker graph with +/-1 answers."""

import logging

import numpy as np

from crowdcertain.models.domain import BaselineResult
from crowdcertain.utils.random_state import make_rng
from crowdcertain.utils.validation_service import ValidationService
from .voting import _as_votes

logger = logging.getLogger(__name__)


def _rescale(messages: np.ndarray) -> np.ndarray:
    # Only signs matter; keep magnitudes bounded across rounds
    peak = np.abs(messages).max()
    return messages / peak if peak > 0 else messages


def kos_single_class(answers: np.ndarray, iters: int, rng: np.random.Generator):
    """Run the updates on one N x M matrix of +/-1 answers.

    Returns:
        (decision scores per task, final worker-to-task messages)
    """
    y = rng.normal(loc=1.0, scale=1.0, size=answers.shape)
    for round_ in range(iters):
        weighted = answers * y
        x = weighted.sum(axis=1, keepdims=True) - weighted  # x[i, a] = sum over other workers
        weighted = answers * x
        y = _rescale(weighted.sum(axis=0, keepdims=True) - weighted)  # y[i, a] = sum over other tasks
        logger.debug(f"KOS round {round_ + 1}: mean |y| {float(np.abs(y).mean()):.4f}")
    return (answers * y).sum(axis=1), y


def kos(z, iters: int = 10, seed: int = 0) -> BaselineResult:
    """nu = 1 iff sum_a A[i, a] y[a -> i] > 0 after ``iters`` rounds (ties give 0).

    Tasks whose score is exactly zero (no information reached them, e.g. a
    single worker or a single task) fall back to the majority of their answers.
    """
    ValidationService.require(ValidationService.validate_positive_int(iters, 'KOS iterations'))
    z = _as_votes(z)
    n, m, k = z.shape
    rng = make_rng(seed, 'kos')

    nu = np.zeros((n, k), dtype=np.int8)
    scores = np.zeros((n, k))
    worker_scores = np.zeros((m, k))
    for c in range(k):
        answers = 2.0 * z[:, :, c] - 1.0
        decision, y = kos_single_class(answers, iters, rng)
        silent = decision == 0
        decision = np.where(silent, answers.sum(axis=1), decision)
        nu[:, c] = (decision > 0).astype(np.int8)
        scores[:, c] = decision
        worker_scores[:, c] = y.mean(axis=0)

    return BaselineResult(method='kos', nu=nu, worker_scores=worker_scores, scores=scores, iterations_run=iters)
