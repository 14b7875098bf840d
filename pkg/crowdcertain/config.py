import os
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import yaml

from crowdcertain.utils.error_handler import ValidationError
from crowdcertain.utils.validation_service import ValidationService


class Config:
    """Library-wide configuration settings"""
    # Logging configuration
    LOG_LEVEL = os.environ.get('CROWDCERTAIN_LOG_LEVEL', 'INFO')
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    LOG_FILE = os.environ.get('CROWDCERTAIN_LOG_FILE')

    # Output and parallelism
    OUTPUT_DIR = os.environ.get('CROWDCERTAIN_OUTPUT_DIR', 'results')
    JOBS = int(os.environ.get('CROWDCERTAIN_JOBS', '1'))

    # Evaluation protocol
    K_FOLDS = int(os.environ.get('CROWDCERTAIN_K_FOLDS', '5'))
    ECE_BINS = int(os.environ.get('CROWDCERTAIN_ECE_BINS', '10'))
    THRESHOLD_RANGE = (0.4, 1.0)
    WORKER_COUNTS = [3, 4, 5, 6, 7]
    SEEDS = [0, 1, 2]

    # Uncertainty measures
    CONFORMAL_T = float(os.environ.get('CROWDCERTAIN_CONFORMAL_T', '0.5'))
    PI_GAMMA = float(os.environ.get('CROWDCERTAIN_PI_GAMMA', '0.95'))

    # Iterative baselines (not fixed by the method description; recorded in report metadata)
    EM_ITERS = int(os.environ.get('CROWDCERTAIN_EM_ITERS', '100'))
    EM_TOL = float(os.environ.get('CROWDCERTAIN_EM_TOL', '1e-6'))
    KOS_ITERS = int(os.environ.get('CROWDCERTAIN_KOS_ITERS', '10'))
    GLAD_STEP = float(os.environ.get('CROWDCERTAIN_GLAD_STEP', '0.01'))
    GOLD_FRACTION = 0.1

    @staticmethod
    def init_logging(level: Optional[str] = None):
        """Configure root logging for the CLI and scripts"""
        log_level = getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO)
        handlers = [logging.StreamHandler()]
        if Config.LOG_FILE:
            handlers.append(logging.FileHandler(Config.LOG_FILE))
        logging.basicConfig(
            level=log_level,
            format=Config.LOG_FORMAT,
            handlers=handlers,
            force=True
        )

    @staticmethod
    def baseline_hyperparameters() -> Dict[str, Any]:
        """Hyperparameters of the iterative baselines, echoed into report metadata."""
        return {
            'em_iters': Config.EM_ITERS,
            'em_tol': Config.EM_TOL,
            'kos_iters': Config.KOS_ITERS,
            'glad_step': Config.GLAD_STEP,
            'gold_fraction': Config.GOLD_FRACTION,
        }


@dataclass
class EnsembleSettings:
    g_ensembles: int = 10
    trees_per_forest: int = 4
    max_depth: int = 4
    min_leaf: int = 1
    threshold_mode: str = 'roc_youden'


@dataclass
class RunConfig:
    """One benchmark sweep: datasets x methods x worker counts x seeds."""
    datasets: List[str] = field(default_factory=lambda: ['two-gaussian', 'xor-grid', 'iris', 'breast-cancer'])
    methods: List[str] = field(default_factory=lambda: ['all'])
    worker_counts: List[int] = field(default_factory=lambda: list(Config.WORKER_COUNTS))
    seeds: List[int] = field(default_factory=lambda: list(Config.SEEDS))
    threshold_range: Tuple[float, float] = Config.THRESHOLD_RANGE
    uncertainty: str = 'std-dev'
    strategy: str = 'penalized'
    penalty_reference: str = 'eta'
    rho_mode: str = 'shared'
    folds: int = Config.K_FOLDS
    ece_bins: int = Config.ECE_BINS
    jobs: int = Config.JOBS
    out: str = Config.OUTPUT_DIR
    ensemble: EnsembleSettings = field(default_factory=EnsembleSettings)
    label_column: Optional[str] = None
    positive_values: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['threshold_range'] = list(self.threshold_range)
        return data

    def validate(self):
        """Raise ValidationError on the first invalid field."""
        checks = [
            ValidationService.validate_non_empty(self.datasets, 'datasets'),
            ValidationService.validate_method_names(self.methods),
            ValidationService.validate_worker_counts(self.worker_counts),
            ValidationService.validate_non_empty(self.seeds, 'seeds'),
            ValidationService.validate_threshold_range(*self.threshold_range),
            ValidationService.validate_choice(self.uncertainty, ValidationService.UNCERTAINTY_FLAGS, 'uncertainty'),
            ValidationService.validate_choice(self.strategy, ValidationService.STRATEGY_FLAGS, 'strategy'),
            ValidationService.validate_choice(self.penalty_reference, ('eta', 'z'), 'penalty reference'),
            ValidationService.validate_choice(self.rho_mode, ('shared', 'per_worker'), 'rho mode'),
            ValidationService.validate_fold_args(max(2 * self.folds, 2), self.folds),
            ValidationService.validate_positive_int(self.ece_bins, 'ECE bins'),
            ValidationService.validate_positive_int(self.jobs, 'jobs'),
        ]
        for is_valid, message in checks:
            if not is_valid:
                raise ValidationError(message)

    @classmethod
    def from_yaml(cls, path: str, overrides: Optional[Dict[str, Any]] = None) -> 'RunConfig':
        """Load a sectioned YAML config; non-None overrides (CLI flags) win.

        Args:
            path: Path to the YAML file
            overrides: Flat mapping of RunConfig field names to values

        Returns:
            RunConfig instance
        """
        if not os.path.exists(path):
            raise ValidationError(f"Config file not found: {path}")

        with open(path, encoding='utf-8') as fh:
            raw = yaml.safe_load(fh) or {}

        # Sections only group keys for readability: flatten everything but 'ensemble'
        flat: Dict[str, Any] = {}
        for key, value in raw.items():
            if isinstance(value, dict) and key != 'ensemble':
                flat.update(value)
            else:
                flat[key] = value
        return cls.from_mapping(flat, overrides)

    @classmethod
    def from_mapping(cls, values: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> 'RunConfig':
        merged = dict(values)
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[key] = value

        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(merged) - known)
        if unknown:
            raise ValidationError(f"Unknown config keys: {', '.join(unknown)}")

        ensemble = merged.pop('ensemble', None)
        if isinstance(ensemble, dict):
            unknown = sorted(set(ensemble) - set(EnsembleSettings.__dataclass_fields__))
            if unknown:
                raise ValidationError(f"Unknown ensemble config keys: {', '.join(unknown)}")
            merged['ensemble'] = EnsembleSettings(**ensemble)
        elif isinstance(ensemble, EnsembleSettings):
            merged['ensemble'] = ensemble
        if 'threshold_range' in merged:
            merged['threshold_range'] = tuple(float(v) for v in merged['threshold_range'])

        cfg = cls(**merged)
        cfg.validate()
        return cfg
