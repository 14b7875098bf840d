"""Synthetic crowd: per-worker accuracy thresholds and label synthesis from ground truth."""

import logging
import os
from typing import Tuple

import numpy as np
import pandas as pd

from crowdcertain.models.domain import Dataset, WorkerPanel
from crowdcertain.utils.error_handler import SimulationError, ValidationError
from crowdcertain.utils.random_state import make_rng
from crowdcertain.utils.validation_service import ValidationService

logger = logging.getLogger(__name__)


class SimulationService:
    """Service for synthesizing fictitious worker label sets."""

    RHO_MODES = ('shared', 'per_worker')

    @staticmethod
    def draw_thresholds(m: int, k: int, threshold_range: Tuple[float, float] = (0.4, 1.0),
                        seed: int = 0) -> np.ndarray:
        """Draw an M x K matrix of worker accuracy thresholds, i.i.d. uniform on the range.

        Args:
            m: Number of workers
            k: Number of classes
            threshold_range: (lo, hi) with 0 <= lo < hi <= 1
            seed: Run seed

        Returns:
            M x K threshold matrix
        """
        lo, hi = threshold_range
        ValidationService.require(ValidationService.validate_threshold_range(lo, hi))
        ValidationService.require(ValidationService.validate_positive_int(m, 'worker count'))
        ValidationService.require(ValidationService.validate_positive_int(k, 'class count'))
        return make_rng(seed, 'thresholds').uniform(lo, hi, size=(m, k))

    @staticmethod
    def synthesize_labels(dataset: Dataset, thresholds: np.ndarray, seed: int = 0,
                          rho_mode: str = 'shared') -> WorkerPanel:
        """Generate each worker's labels from the ground truth.

        A worker keeps the true label of instance i and class k when
        rho_i <= pi_(worker, k) and reports the opposite label otherwise.

        Args:
            dataset: Dataset with ground truth
            thresholds: M x K accuracy thresholds
            seed: Run seed
            rho_mode: 'shared' draws one rho per instance for all workers,
                'per_worker' draws one per (instance, worker)

        Returns:
            WorkerPanel holding thresholds, rho draws and the N x M x K label tensor
        """
        thresholds = np.asarray(thresholds, dtype=float)
        if thresholds.ndim != 2 or thresholds.shape[1] != dataset.n_classes:
            raise SimulationError(
                f"Threshold matrix shape {thresholds.shape} does not match "
                f"{dataset.n_classes} class(es) of '{dataset.name}'"
            )
        ValidationService.require(ValidationService.validate_choice(rho_mode, SimulationService.RHO_MODES, 'rho mode'))

        n, m = dataset.n_instances, thresholds.shape[0]
        if rho_mode == 'shared':
            rho = make_rng(seed, 'rho').uniform(0.0, 1.0, size=n)
            keep = rho[:, None, None] <= thresholds[None, :, :]
        else:
            rho = make_rng(seed, 'rho-per-worker').uniform(0.0, 1.0, size=(n, m))
            keep = rho[:, :, None] <= thresholds[None, :, :]

        truth = dataset.truth[:, None, :].astype(np.int8)
        labels = np.where(keep, truth, 1 - truth).astype(np.int8)

        logger.info(f"Synthesized {m} workers on '{dataset.name}' ({rho_mode} rho, seed {seed})")
        return WorkerPanel(thresholds=thresholds, rho=rho, labels=labels, seed=seed, rho_mode=rho_mode)

    @staticmethod
    def simulate(dataset: Dataset, m: int, threshold_range: Tuple[float, float] = (0.4, 1.0),
                 seed: int = 0, rho_mode: str = 'shared') -> WorkerPanel:
        """Draw thresholds and synthesize labels in one call."""
        thresholds = SimulationService.draw_thresholds(m, dataset.n_classes, threshold_range, seed)
        return SimulationService.synthesize_labels(dataset, thresholds, seed, rho_mode)

    @staticmethod
    def worker_accuracy(panel: WorkerPanel, truth: np.ndarray) -> np.ndarray:
        """Empirical M x K accuracy of each worker's labels against the truth."""
        if panel.labels.shape[0] != truth.shape[0]:
            raise ValidationError("Panel and truth have different instance counts")
        return (panel.labels == truth[:, None, :]).mean(axis=0)

    @staticmethod
    def export_csv(panel: WorkerPanel, path: str):
        """Write the panel in long format: instance_id, worker_id, class_id, label."""
        n, m, k = panel.labels.shape
        instance_id, worker_id, class_id = np.meshgrid(np.arange(n), np.arange(m), np.arange(k), indexing='ij')
        frame = pd.DataFrame({
            'instance_id': instance_id.ravel(),
            'worker_id': worker_id.ravel(),
            'class_id': class_id.ravel(),
            'label': panel.labels.ravel().astype(int),
        })
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        frame.to_csv(path, index=False)
        logger.info(f"Exported worker panel ({n} x {m} x {k}) to {path}")
