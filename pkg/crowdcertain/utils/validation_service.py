"""Unified validation service for library operations.

Validators return ``(is_valid, error_message)`` tuples; operations turn a
failed check into a ``ValidationError`` through ``ValidationService.require``.
"""

import math
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from crowdcertain.utils.error_handler import ValidationError


class ValidationService:
    """Service class for all validation operations."""

    METHOD_NAMES = (
        'crowd-certain', 'crowd-certain-penalized', 'crowd-certain-no-penalty',
        'mv', 'gold-mv', 'sheng', 'tao', 'wawa', 'zbs', 'kos', 'mace', 'mmsr', 'glad', 'dawid-skene'
    )
    UNCERTAINTY_FLAGS = ('std-dev', 'entropy', 'committee-var', 'pred-interval', 'conformal')
    STRATEGY_FLAGS = ('no-penalty', 'penalized')

    @staticmethod
    def require(check: Tuple[bool, Optional[str]], error_cls=ValidationError):
        """Raise ``error_cls`` with the validator's message when the check failed."""
        is_valid, message = check
        if not is_valid:
            raise error_cls(message)

    @staticmethod
    def validate_positive_int(value: Any, name: str) -> Tuple[bool, Optional[str]]:
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            return False, f'{name.capitalize()} must be an integer'
        if value < 1:
            return False, f'{name.capitalize()} must be at least 1'
        return True, None

    @staticmethod
    def validate_non_empty(values: Sequence, name: str) -> Tuple[bool, Optional[str]]:
        if values is None or len(values) == 0:
            return False, f'{name.capitalize()} must not be empty'
        return True, None

    @staticmethod
    def validate_choice(value: str, choices: Iterable[str], name: str) -> Tuple[bool, Optional[str]]:
        choices = tuple(choices)
        if value not in choices:
            return False, f'Unknown {name} "{value}" (expected one of: {", ".join(choices)})'
        return True, None

    @staticmethod
    def validate_fold_args(n: int, k: int) -> Tuple[bool, Optional[str]]:
        """Validate k-fold arguments.

        Args:
            n: Number of instances
            k: Number of folds

        Returns:
            Tuple of (is_valid, error_message)
        """
        if k < 2:
            return False, f'Fold count must be at least 2 (got {k})'
        if n < k:
            return False, f'Instance count {n} is smaller than fold count {k}'
        return True, None

    @staticmethod
    def validate_threshold_range(lo: float, hi: float) -> Tuple[bool, Optional[str]]:
        if not (math.isfinite(lo) and math.isfinite(hi)):
            return False, 'Threshold range bounds must be finite'
        if not 0.0 <= lo < hi <= 1.0:
            return False, f'Threshold range must satisfy 0 <= lo < hi <= 1 (got [{lo}, {hi}])'
        return True, None

    @staticmethod
    def validate_probabilities(values: np.ndarray, name: str = 'probabilities') -> Tuple[bool, Optional[str]]:
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(values)):
            return False, f'{name.capitalize()} must be finite'
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            return False, f'{name.capitalize()} must lie in [0, 1]'
        return True, None

    @staticmethod
    def validate_binary(values: np.ndarray, name: str = 'labels') -> Tuple[bool, Optional[str]]:
        values = np.asarray(values)
        if values.size and not np.all((values == 0) | (values == 1)):
            return False, f'{name.capitalize()} must contain only 0 and 1'
        return True, None

    @staticmethod
    def validate_shape(array: np.ndarray, expected: Tuple[int, ...], name: str) -> Tuple[bool, Optional[str]]:
        if tuple(np.shape(array)) != tuple(expected):
            return False, f'{name.capitalize()} has shape {tuple(np.shape(array))}, expected {tuple(expected)}'
        return True, None

    @staticmethod
    def validate_normalized_weights(weights: np.ndarray, axis: int = 0, tol: float = 1e-9) -> Tuple[bool, Optional[str]]:
        """Weights must be non-negative and sum to one along the worker axis."""
        weights = np.asarray(weights, dtype=float)
        if np.any(weights < 0):
            return False, 'Weights must be non-negative'
        if not np.allclose(weights.sum(axis=axis), 1.0, atol=tol):
            return False, 'Weights must sum to 1 over workers'
        return True, None

    @staticmethod
    def validate_method_names(methods: List[str]) -> Tuple[bool, Optional[str]]:
        if not methods:
            return False, 'Methods must not be empty'
        unknown = [m for m in methods if m != 'all' and m not in ValidationService.METHOD_NAMES]
        if unknown:
            return False, f'Unknown methods: {", ".join(unknown)}'
        return True, None

    @staticmethod
    def validate_worker_counts(counts: List[int]) -> Tuple[bool, Optional[str]]:
        if not counts:
            return False, 'Worker counts must not be empty'
        if any(int(c) < 1 for c in counts):
            return False, 'Worker counts must all be at least 1'
        return True, None
