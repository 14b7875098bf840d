"""Tao-style per-instance worker weights from label similarity and cross-validated self-consistency."""

import logging
from typing import Optional

import numpy as np

from crowdcertain.models.domain import BaselineResult, FoldPlan, ForestConfig
from crowdcertain.utils.classifier_ensemble import SeededForest
from crowdcertain.utils.dataset_service import DatasetService
from crowdcertain.utils.error_handler import AggregationError, ValidationError
from .constants import BaselineConstants
from .voting import _as_votes, baseline_aggregate, crowd_confidence

logger = logging.getLogger(__name__)


def similarity(z: np.ndarray) -> np.ndarray:
    """s[i, a, k]: fraction of the other workers giving the same label as worker a on (i, k)."""
    m = z.shape[1]
    ones = z.sum(axis=1, keepdims=True)
    same = np.where(z == 1, ones, m - ones) - 1
    return same / (m - 1)


def cross_validated_quality(features: np.ndarray, labels: np.ndarray, folds: FoldPlan,
                            config: ForestConfig, seed: int) -> float:
    """Mean held-out accuracy of classifiers trained with the worker's labels as truth."""
    accuracies = []
    for fold in range(folds.k_folds):
        train, test = folds.train_indices(fold), folds.test_indices(fold)
        if train.size == 0 or test.size == 0:
            continue
        forest = SeededForest(config, seed=seed + fold).fit(features[train], labels[train])
        predicted = (forest.predict_proba(features[test]) > 0.5).astype(np.int8)
        accuracies.append(float(np.mean(predicted == labels[test])))
    if not accuracies:
        raise AggregationError("No usable folds for cross-validated worker quality")
    return float(np.mean(accuracies))


def tao(z, features: np.ndarray, folds: Optional[FoldPlan] = None, seed: int = 0,
        config: Optional[ForestConfig] = None) -> BaselineResult:
    """Aggregate with gamma = tau * (1 + s^2), normalized over workers per (instance, class).

    Args:
        z: N x M x K crowd labels
        features: N x F features the quality classifiers are trained on
        folds: Fold plan for tau (10 folds by default, fewer on tiny inputs)
        seed: Seed for the default fold plan and the classifiers
        config: Forest recipe for the quality classifiers

    Returns:
        BaselineResult with tau (M x K) as worker scores and Freq/Beta confidence
    """
    z = _as_votes(z)
    n, m, k = z.shape
    if m < 2:
        raise ValidationError("Tao weighting needs at least two workers")
    features = np.asarray(features, dtype=float)
    if features.shape[0] != n:
        raise AggregationError(f"Feature rows ({features.shape[0]}) do not match crowd labels ({n})")

    if folds is None:
        try:
            folds = DatasetService.make_folds(n, min(BaselineConstants.TAO_FOLDS, n), seed)
        except ValidationError as e:
            raise AggregationError(f"Could not build folds for Tao quality estimation: {e}") from e
    config = config or ForestConfig(g_ensembles=1)

    tau = np.empty((m, k))
    for a in range(m):
        for c in range(k):
            tau[a, c] = cross_validated_quality(features, z[:, a, c], folds, config, seed)
    logger.debug(f"Tao worker qualities: {np.round(tau[:, 0], 4).tolist()}")

    gamma = tau[None, :, :] * (1.0 + similarity(z) ** 2)
    totals = gamma.sum(axis=1, keepdims=True)
    gamma = np.where(totals > 0, gamma / np.where(totals > 0, totals, 1.0), 1.0 / m)

    nu = baseline_aggregate(z, gamma)
    return BaselineResult(
        method='tao',
        nu=nu,
        worker_scores=tau,
        confidence=crowd_confidence(z, gamma, nu),
        scores=(gamma * z).sum(axis=1),
        weights=gamma.mean(axis=0),
        iterations_run=1,
    )
