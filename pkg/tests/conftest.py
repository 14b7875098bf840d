import numpy as np
import pytest

from crowdcertain.models.domain import Dataset, ForestConfig
from crowdcertain.utils.dataset_service import DatasetService
from crowdcertain.utils.simulation_service import SimulationService


def independent_panel(truth: np.ndarray, accuracies, seed: int = 0) -> np.ndarray:
    """N x M x K crowd labels where each worker errs independently with probability 1 - accuracy."""
    rng = np.random.default_rng(seed)
    truth = np.asarray(truth)
    n, k = truth.shape
    columns = []
    for accuracy in accuracies:
        keep = rng.uniform(size=(n, k)) < accuracy
        columns.append(np.where(keep, truth, 1 - truth))
    return np.stack(columns, axis=1).astype(np.int8)


@pytest.fixture
def small_forest():
    return ForestConfig(g_ensembles=3, trees_per_forest=3, max_depth=4)


@pytest.fixture
def two_gaussian():
    return DatasetService.two_gaussian(n=200, seed=0)


@pytest.fixture
def balanced_truth():
    rng = np.random.default_rng(7)
    return rng.integers(0, 2, size=(300, 1)).astype(np.int8)


@pytest.fixture
def random_panel(two_gaussian):
    return SimulationService.simulate(two_gaussian, 5, (0.55, 0.95), seed=3, rho_mode='per_worker')


@pytest.fixture
def separable_toy():
    """20 points, two clusters far apart on both features."""
    offsets = np.linspace(-0.5, 0.5, 10)
    negatives = np.column_stack([-3.0 + offsets, -3.0 - offsets])
    positives = np.column_stack([3.0 + offsets, 3.0 - offsets])
    features = np.vstack([negatives, positives])
    truth = np.concatenate([np.zeros(10), np.ones(10)]).astype(np.int8).reshape(-1, 1)
    return Dataset(name='toy', features=features, truth=truth, feature_names=('a', 'b'), class_names=('label',))
