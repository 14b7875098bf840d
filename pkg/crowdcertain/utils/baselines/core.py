"""Single entry point for running any comparison aggregator by name."""

import logging
from typing import Any, Dict, Optional

import numpy as np

from crowdcertain.models.domain import BaselineResult, ForestConfig
from crowdcertain.utils.error_handler import AggregationError, ValidationError
from crowdcertain.utils.validation_service import ValidationService
from .constants import BaselineConstants
from .em_models import dawid_skene, glad, mace
from .kos import kos
from .mmsr import mmsr
from .tao import tao
from .voting import gold_majority_vote, mv, sheng, wawa, zero_based_skill


class BaselineRunner:
    """Dispatch baseline methods with shared hyperparameters."""

    DEFAULTS = {
        'em_iters': 100,
        'em_tol': 1e-6,
        'kos_iters': 10,
        'glad_step': 0.01,
    }

    def __init__(self, hyperparameters: Optional[Dict[str, Any]] = None, tao_forest: Optional[ForestConfig] = None,
                 logger=None):
        self.hyperparameters = {**self.DEFAULTS, **(hyperparameters or {})}
        self.tao_forest = tao_forest
        self.logger = logger or logging.getLogger(__name__)

    @staticmethod
    def normalize_name(method: str) -> str:
        """Accept CLI spellings (``dawid-skene``) as well as internal names."""
        name = BaselineConstants.FLAG_TO_METHOD.get(method, method)
        ValidationService.require(ValidationService.validate_choice(name, BaselineConstants.METHODS, 'baseline method'))
        return name

    def run(self, method: str, z: np.ndarray, features: Optional[np.ndarray] = None,
            truth: Optional[np.ndarray] = None, gold_indices: Optional[np.ndarray] = None,
            seed: int = 0) -> BaselineResult:
        """Run one baseline on crowd labels ``z`` (N x M x K).

        ``features`` is required by tao; ``truth`` and ``gold_indices`` by gold_mv.
        """
        name = self.normalize_name(method)
        hp = self.hyperparameters

        if name == 'mv':
            result = mv(z)
        elif name == 'sheng':
            result = sheng(z)
        elif name == 'wawa':
            result = wawa(z)
        elif name == 'zbs':
            result = zero_based_skill(z, max_iters=hp['em_iters'])
        elif name == 'kos':
            result = kos(z, iters=hp['kos_iters'], seed=seed)
        elif name == 'mmsr':
            result = mmsr(z, iters=hp['em_iters'])
        elif name == 'mace':
            result = mace(z, em_iters=hp['em_iters'], seed=seed)
        elif name == 'glad':
            result = glad(z, em_iters=hp['em_iters'], step=hp['glad_step'])
        elif name == 'dawid_skene':
            result = dawid_skene(z, em_iters=hp['em_iters'], tol=hp['em_tol'])
        elif name == 'tao':
            if features is None:
                raise ValidationError("Tao weighting needs instance features")
            result = tao(z, features, seed=seed, config=self.tao_forest)
        elif name == 'gold_mv':
            if truth is None or gold_indices is None:
                raise ValidationError("Gold majority vote needs ground truth and gold indices")
            result = gold_majority_vote(z, truth, gold_indices)
        else:
            raise AggregationError(f"No implementation registered for {name}")

        self.logger.debug(f"Baseline {name} finished after {result.iterations_run} iteration(s)")
        return result
