"""Exception hierarchy and benchmark error handling."""

import logging
import traceback
import uuid
from typing import Any, Dict, Optional


class CrowdCertainError(Exception):
    """Base class for every error raised by the library."""


class ValidationError(CrowdCertainError):
    """An argument or configuration value is outside its allowed domain."""


class DatasetError(CrowdCertainError):
    """A dataset file or in-memory table could not be ingested."""


class SimulationError(CrowdCertainError):
    """Worker label synthesis failed."""


class EnsembleError(CrowdCertainError):
    """Classifier training or model persistence failed."""


class AggregationError(CrowdCertainError):
    """Weights or aggregated labels could not be computed."""


class BenchmarkError(CrowdCertainError):
    """A benchmark run or report operation failed."""


class BenchmarkErrorHandler:
    """Centralized error handling for benchmark cells.

    A failing cell is logged with an error id and turned into an error row so
    the sweep can record the failure and continue.
    """

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)

    def handle_cell_failure(self, error: BaseException, context: Dict[str, Any]) -> Dict[str, Any]:
        """Log a cell failure and build its error row.

        Args:
            error: The exception raised by the cell
            context: Cell coordinates (dataset, method, workers, seed, fold)

        Returns:
            Error row carrying the coordinates, error id and message
        """
        error_id = self._log_error(error, 'Benchmark Cell Error', context)
        row = dict(context)
        row.update({
            'status': 'error',
            'error_id': error_id,
            'error': f"{type(error).__name__}: {error}",
        })
        return row

    def _log_error(self, error: BaseException, error_type: str, context: Dict[str, Any]) -> str:
        """Log error with context information and return error ID."""
        error_id = str(uuid.uuid4())[:8]

        cell = ', '.join(f"{key}={value}" for key, value in context.items())
        log_message = f"{error_type} [{error_id}] ({cell}): {error}"
        details = {
            'error_id': error_id,
            'error_type': error_type,
            'error_message': str(error),
            'traceback': ''.join(traceback.format_exception(type(error), error, error.__traceback__)),
        }

        self.logger.error(log_message, extra=details)

        return error_id
