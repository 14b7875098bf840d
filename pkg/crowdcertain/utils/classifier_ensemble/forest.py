"""Small seeded random forest with Laplace-smoothed leaves.

Each tree is grown by scikit-learn on a bootstrap sample; the fitted split
structure is then copied into plain arrays so prediction, persistence and
reloading all go through the same traversal.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
from sklearn.tree import DecisionTreeClassifier

from crowdcertain.models.domain import ForestConfig
from crowdcertain.utils.error_handler import EnsembleError
from .constants import EnsembleConstants

logger = logging.getLogger(__name__)

_LEAF = -1


@dataclass
class TreeArrays:
    children_left: np.ndarray
    children_right: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    leaf_prob: np.ndarray

    def apply(self, features: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row (left branch when x <= threshold)."""
        node = np.zeros(features.shape[0], dtype=np.int64)
        rows = np.arange(features.shape[0])
        while True:
            internal = self.children_left[node] != _LEAF
            if not internal.any():
                return node
            idx = rows[internal]
            current = node[idx]
            go_left = features[idx, self.feature[current]] <= self.threshold[current]
            node[idx] = np.where(go_left, self.children_left[current], self.children_right[current])

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return self.leaf_prob[self.apply(features)]

    def to_dict(self) -> Dict[str, List]:
        return {
            'children_left': self.children_left.tolist(),
            'children_right': self.children_right.tolist(),
            'feature': self.feature.tolist(),
            'threshold': self.threshold.tolist(),
            'leaf_prob': self.leaf_prob.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, List]) -> 'TreeArrays':
        return cls(
            children_left=np.asarray(data['children_left'], dtype=np.int64),
            children_right=np.asarray(data['children_right'], dtype=np.int64),
            feature=np.asarray(data['feature'], dtype=np.int64),
            threshold=np.asarray(data['threshold'], dtype=float),
            leaf_prob=np.asarray(data['leaf_prob'], dtype=float),
        )


class SeededForest:
    """Probabilistic forest whose every random choice is determined by its seed."""

    def __init__(self, config: ForestConfig, seed: int):
        if config.split_criterion not in EnsembleConstants.SPLIT_CRITERIA:
            raise EnsembleError(f"Unsupported split criterion '{config.split_criterion}'")
        if min(config.g_ensembles, config.trees_per_forest, config.max_depth, config.min_leaf) < 1:
            raise EnsembleError("Forest counts must all be at least 1")
        self.config = config
        self.seed = int(seed)
        self.trees: List[TreeArrays] = []
        self.constant: Optional[float] = None

    def fit(self, features: np.ndarray, labels: np.ndarray, bootstrap: bool = True,
            max_features: Optional[str] = EnsembleConstants.MAX_FEATURES) -> 'SeededForest':
        """Grow ``trees_per_forest`` trees on bootstrap samples of the training rows.

        Single-class labels produce a constant classifier returning that class
        probability exactly.
        """
        features = np.asarray(features, dtype=float)
        labels = np.asarray(labels).astype(np.int64).ravel()
        if features.shape[0] == 0:
            raise EnsembleError("Cannot train on an empty training set")
        if features.shape[0] != labels.shape[0]:
            raise EnsembleError("Feature and label row counts differ")

        self.trees = []
        classes = np.unique(labels)
        if classes.size == 1:
            self.constant = float(classes[0])
            logger.warning(f"Single-class labels for seed {self.seed}: constant probability {self.constant}")
            return self
        self.constant = None

        rng = np.random.default_rng(self.seed)
        n = features.shape[0]
        for _ in range(self.config.trees_per_forest):
            rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
            tree = DecisionTreeClassifier(
                criterion=self.config.split_criterion,
                max_depth=self.config.max_depth,
                min_samples_leaf=self.config.min_leaf,
                max_features=max_features,
                random_state=int(rng.integers(0, 2**31 - 1)),
            )
            tree.fit(features[rows], labels[rows])
            self.trees.append(self._to_arrays(tree, features[rows], labels[rows]))
        return self

    @staticmethod
    def _to_arrays(tree: DecisionTreeClassifier, features: np.ndarray, labels: np.ndarray) -> TreeArrays:
        structure = tree.tree_
        leaves = tree.apply(features)
        positives = np.bincount(leaves, weights=labels, minlength=structure.node_count)
        totals = np.bincount(leaves, minlength=structure.node_count)
        leaf_prob = (positives + EnsembleConstants.LEAF_PRIOR_POSITIVE) / (totals + EnsembleConstants.LEAF_PRIOR_TOTAL)
        return TreeArrays(
            children_left=structure.children_left.astype(np.int64),
            children_right=structure.children_right.astype(np.int64),
            feature=np.where(structure.children_left == _LEAF, 0, structure.feature).astype(np.int64),
            threshold=structure.threshold.astype(float),
            leaf_prob=leaf_prob,
        )

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        """Positive-class probability: mean of smoothed leaf frequencies across trees."""
        features = np.asarray(features, dtype=float)
        if self.constant is not None:
            return np.full(features.shape[0], self.constant)
        if not self.trees:
            raise EnsembleError("Forest has not been fitted")
        return np.mean([tree.predict_proba(features) for tree in self.trees], axis=0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'constant': self.constant,
            'trees': [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], config: ForestConfig) -> 'SeededForest':
        forest = cls(config, data['seed'])
        forest.constant = data.get('constant')
        forest.trees = [TreeArrays.from_dict(tree) for tree in data.get('trees', [])]
        return forest
