"""Domain models shared by every stage of the aggregation pipeline.

Arrays follow one axis convention throughout: instances (N), workers (M),
classes (K), ensemble members (G), in that order.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class Dataset:
    name: str
    features: np.ndarray  # N x F
    truth: np.ndarray  # N x K
    feature_names: Tuple[str, ...] = ()
    class_names: Tuple[str, ...] = ()

    @property
    def n_instances(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def n_classes(self) -> int:
        return int(self.truth.shape[1])

    def describe(self) -> Dict[str, Any]:
        positives = int(self.truth[:, 0].sum())
        return {
            'dataset': self.name,
            'features': self.n_features,
            'samples': self.n_instances,
            'positives': positives,
            'negatives': self.n_instances - positives,
            'classes': self.n_classes,
        }


@dataclass(frozen=True)
class FoldPlan:
    k_folds: int
    assignments: np.ndarray  # length N, values in [0, k_folds)
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def fold_sizes(self) -> List[int]:
        return np.bincount(self.assignments, minlength=self.k_folds).tolist()


@dataclass(frozen=True)
class WorkerPanel:
    thresholds: np.ndarray  # M x K
    rho: np.ndarray  # N (shared) or N x M (per_worker)
    labels: np.ndarray  # N x M x K
    seed: int
    rho_mode: str = 'shared'

    @property
    def n_workers(self) -> int:
        return int(self.thresholds.shape[0])

    @property
    def n_classes(self) -> int:
        return int(self.thresholds.shape[1])


@dataclass(frozen=True)
class ForestConfig:
    g_ensembles: int = 10
    trees_per_forest: int = 4
    max_depth: int = 4
    split_criterion: str = 'gini'
    min_leaf: int = 1
    threshold_mode: str = 'roc_youden'


@dataclass(frozen=True)
class EnsemblePredictions:
    probs: np.ndarray  # N x M x K x G
    thresholds: np.ndarray  # M x K x G
    labels: np.ndarray  # N x M x K x G
    eta: np.ndarray  # N x M x K


@dataclass(frozen=True)
class UncertaintyScores:
    delta: np.ndarray  # N x M x K
    measure: str
    normalized: bool = False


@dataclass(frozen=True)
class ConsistencyScores:
    c: np.ndarray  # N x M x K
    mode: str


@dataclass(frozen=True)
class WorkerWeights:
    psi: np.ndarray  # M x K
    psi_overall: np.ndarray  # M
    omega: np.ndarray  # M x K


@dataclass(frozen=True)
class AggregationResult:
    nu: np.ndarray  # N x K
    weighted_score: np.ndarray  # N x K
    weights: WorkerWeights


@dataclass(frozen=True)
class ConfidenceScores:
    f_freq: np.ndarray  # N x K
    f_beta: np.ndarray  # N x K
    shape_l: np.ndarray  # N x K
    shape_u: np.ndarray  # N x K


@dataclass(frozen=True)
class BaselineResult:
    method: str
    nu: np.ndarray  # N x K
    worker_scores: np.ndarray  # M (or M x K)
    confidence: Optional[ConfidenceScores] = None
    iterations_run: int = 0
    scores: Optional[np.ndarray] = None  # N x K soft scores used for AUC
    weights: Optional[np.ndarray] = None  # M x K effective per-class weights
    log_likelihoods: List[float] = field(default_factory=list)


@dataclass(frozen=True)
class MetricRow:
    accuracy: float
    f1: float
    auc: Optional[float]
    brier_mse_freq: Optional[float]
    brier_mse_beta: Optional[float]
    ece_freq: Optional[float]
    ece_beta: Optional[float]
    n_instances: int
    bins: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'accuracy': self.accuracy,
            'f1': self.f1,
            'auc': self.auc,
            'brier_mse_freq': self.brier_mse_freq,
            'brier_mse_beta': self.brier_mse_beta,
            'ece_freq': self.ece_freq,
            'ece_beta': self.ece_beta,
            'n_instances': self.n_instances,
            'bins': self.bins,
        }


@dataclass
class BenchmarkReport:
    rows: List[Dict[str, Any]]
    metadata: Dict[str, Any]
    weights: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok_rows(self) -> List[Dict[str, Any]]:
        return [row for row in self.rows if row.get('status', 'ok') == 'ok']

    @property
    def error_rows(self) -> List[Dict[str, Any]]:
        return [row for row in self.rows if row.get('status') == 'error']
