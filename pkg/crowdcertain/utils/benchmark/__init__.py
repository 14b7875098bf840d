from .report_service import PLOT_KINDS, ReportService
from .runner import BenchmarkRunner, expand_methods, run_benchmark

__all__ = [
    'BenchmarkRunner',
    'ReportService',
    'PLOT_KINDS',
    'expand_methods',
    'run_benchmark',
]
