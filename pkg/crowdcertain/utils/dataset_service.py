"""Dataset ingestion, bundled desk-scale datasets and k-fold planning."""

import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from sklearn.datasets import load_breast_cancer, load_iris, make_blobs

from crowdcertain.models.domain import Dataset, FoldPlan
from crowdcertain.utils.error_handler import DatasetError
from crowdcertain.utils.random_state import derive_seed, make_rng
from crowdcertain.utils.validation_service import ValidationService

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ColumnSpec:
    """Which CSV columns hold labels and features, and how to binarize labels.

    ``positive_values`` maps raw label text to 1 and everything else to 0.
    When ``negative_values`` is also given, rows whose label is in neither
    set are dropped, which restricts a multi-class table to two classes.
    """
    label_columns: List[str]
    feature_columns: Optional[List[str]] = None
    positive_values: List[str] = field(default_factory=list)
    negative_values: List[str] = field(default_factory=list)


class DatasetService:
    """Service for loading datasets and planning folds."""

    CSV_FLOAT_FORMAT = '%.17g'

    @staticmethod
    def load_csv(path: str, schema: ColumnSpec, name: Optional[str] = None) -> Dataset:
        """Load a binary-labelled dataset from a UTF-8 CSV file with a header row.

        Args:
            path: CSV file path
            schema: Label/feature column specification
            name: Dataset name (defaults to the file stem)

        Returns:
            Dataset with rows in file order
        """
        if not os.path.isfile(path):
            raise DatasetError(f"Dataset file not found: {path}")

        try:
            frame = pd.read_csv(path, sep=',', dtype=str, keep_default_na=False, encoding='utf-8')
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise DatasetError(f"Could not parse {path}: {e}") from e

        name = name or os.path.splitext(os.path.basename(path))[0]
        return DatasetService.from_frame(frame, schema, name)

    @staticmethod
    def from_frame(frame: pd.DataFrame, schema: ColumnSpec, name: str) -> Dataset:
        """Build a Dataset from a string-typed DataFrame."""
        if frame.empty:
            raise DatasetError(f"Dataset '{name}' is empty")

        missing = [c for c in schema.label_columns if c not in frame.columns]
        if not schema.label_columns or missing:
            raise DatasetError(f"Label column(s) not found in '{name}': {missing or 'none given'}")

        feature_columns = schema.feature_columns
        if feature_columns is None:
            feature_columns = [c for c in frame.columns if c not in schema.label_columns]
        missing = [c for c in feature_columns if c not in frame.columns]
        if not feature_columns or missing:
            raise DatasetError(f"Feature column(s) not found in '{name}': {missing or 'none given'}")

        raw_labels = frame[schema.label_columns].apply(lambda col: col.str.strip())
        if schema.negative_values:
            known = set(schema.positive_values) | set(schema.negative_values)
            keep = raw_labels.isin(known).all(axis=1).to_numpy()
            dropped = int((~keep).sum())
            if dropped:
                logger.info(f"Dropping {dropped} rows of '{name}' outside the declared label values")
            frame = frame.loc[keep].reset_index(drop=True)
            raw_labels = raw_labels.loc[keep].reset_index(drop=True)
            if frame.empty:
                raise DatasetError(f"Dataset '{name}' is empty after restricting labels")

        truth = DatasetService._binarize_labels(raw_labels, schema.positive_values, name)
        features = DatasetService._parse_features(frame[feature_columns], name)

        dataset = Dataset(
            name=name,
            features=features,
            truth=truth,
            feature_names=tuple(feature_columns),
            class_names=tuple(schema.label_columns),
        )
        logger.info(f"Loaded dataset '{name}': {dataset.n_instances} rows, "
                    f"{dataset.n_features} features, {dataset.n_classes} class(es)")
        return dataset

    @staticmethod
    def _binarize_labels(raw_labels: pd.DataFrame, positive_values: List[str], name: str) -> np.ndarray:
        if positive_values:
            return raw_labels.isin(set(positive_values)).to_numpy().astype(np.int8)

        numeric = raw_labels.apply(pd.to_numeric, errors='coerce')
        bad = ~numeric.isin([0, 1])
        if bad.to_numpy().any():
            row, col = np.argwhere(bad.to_numpy())[0]
            raise DatasetError(
                f"Label outside {{0,1}} in '{name}' at row {row}, column "
                f"'{raw_labels.columns[col]}': '{raw_labels.iat[row, col]}' (supply positive values to binarize)"
            )
        return numeric.to_numpy().astype(np.int8)

    @staticmethod
    def _parse_features(raw: pd.DataFrame, name: str) -> np.ndarray:
        numeric = raw.apply(lambda col: pd.to_numeric(col.str.strip(), errors='coerce'))
        values = numeric.to_numpy(dtype=float)
        bad = ~np.isfinite(values)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise DatasetError(
                f"Non-numeric or non-finite feature in '{name}' at row {row}, "
                f"column '{raw.columns[col]}': '{raw.iat[row, col]}'"
            )
        return values

    @staticmethod
    def write_csv(dataset: Dataset, path: str):
        """Write a dataset so that ``load_csv`` reads it back unchanged."""
        feature_names = list(dataset.feature_names) or [f"f{j}" for j in range(dataset.n_features)]
        class_names = list(dataset.class_names) or [f"label{k}" for k in range(dataset.n_classes)]
        frame = pd.DataFrame(dataset.features, columns=feature_names)
        for k, label in enumerate(class_names):
            frame[label] = dataset.truth[:, k].astype(int)
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        frame.to_csv(path, index=False, float_format=DatasetService.CSV_FLOAT_FORMAT, encoding='utf-8')

    @staticmethod
    def make_folds(n: int, k: int, seed: int) -> FoldPlan:
        """Deterministic k-fold partition of ``range(n)``.

        Args:
            n: Number of instances
            k: Number of folds
            seed: Seed for the permutation

        Returns:
            FoldPlan whose folds hold floor(n/k) or ceil(n/k) instances
        """
        ValidationService.require(ValidationService.validate_fold_args(n, k))

        permutation = make_rng(seed, 'folds').permutation(n)
        assignments = np.empty(n, dtype=np.int64)
        for fold, chunk in enumerate(np.array_split(permutation, k)):
            assignments[chunk] = fold
        return FoldPlan(k_folds=k, assignments=assignments, seed=seed)

    # ===== BUNDLED DATASETS =====

    @staticmethod
    def two_gaussian(n: int = 400, seed: int = 0, n_features: int = 4) -> Dataset:
        """Two well separated isotropic Gaussian blobs."""
        features, y = make_blobs(
            n_samples=n,
            n_features=n_features,
            centers=[np.full(n_features, -2.0), np.full(n_features, 2.0)],
            cluster_std=1.0,
            random_state=derive_seed(seed, 'two-gaussian'),
        )
        return Dataset(
            name='two-gaussian',
            features=features,
            truth=y.reshape(-1, 1).astype(np.int8),
            feature_names=tuple(f"x{j}" for j in range(n_features)),
            class_names=('label',),
        )

    @staticmethod
    def xor_grid(n: int = 400, seed: int = 0) -> Dataset:
        """Points on [-1, 1]^2 labelled by the sign of x*y, with a margin around the axes."""
        rng = make_rng(seed, 'xor-grid')
        points = rng.uniform(0.1, 1.0, size=(n, 2)) * rng.choice([-1.0, 1.0], size=(n, 2))
        y = (points[:, 0] * points[:, 1] > 0).astype(np.int8)
        return Dataset(
            name='xor-grid',
            features=points,
            truth=y.reshape(-1, 1),
            feature_names=('x0', 'x1'),
            class_names=('label',),
        )

    @staticmethod
    def iris() -> Dataset:
        """Iris restricted to setosa (1) versus versicolor (0)."""
        bunch = load_iris()
        keep = bunch.target < 2
        y = (bunch.target[keep] == 0).astype(np.int8)
        return Dataset(
            name='iris',
            features=bunch.data[keep],
            truth=y.reshape(-1, 1),
            feature_names=tuple(bunch.feature_names),
            class_names=('setosa',),
        )

    @staticmethod
    def breast_cancer() -> Dataset:
        bunch = load_breast_cancer()
        return Dataset(
            name='breast-cancer',
            features=bunch.data,
            truth=bunch.target.reshape(-1, 1).astype(np.int8),
            feature_names=tuple(bunch.feature_names),
            class_names=('benign',),
        )

    @staticmethod
    def bundled_names() -> List[str]:
        return sorted(_BUNDLED)

    @staticmethod
    def resolve(name_or_path: str, schema: Optional[ColumnSpec] = None) -> Dataset:
        """Return a bundled dataset by name, or load a CSV path with ``schema``."""
        if name_or_path in _BUNDLED:
            return _BUNDLED[name_or_path]()
        if schema is None:
            raise DatasetError(
                f"'{name_or_path}' is not a bundled dataset ({', '.join(sorted(_BUNDLED))}) "
                f"and no label column was given for CSV ingestion"
            )
        return DatasetService.load_csv(name_or_path, schema)


_BUNDLED: Dict[str, Callable[[], Dataset]] = {
    'two-gaussian': DatasetService.two_gaussian,
    'xor-grid': DatasetService.xor_grid,
    'iris': DatasetService.iris,
    'breast-cancer': DatasetService.breast_cancer,
}
