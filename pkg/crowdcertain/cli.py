"""Command-line front end: bench, describe, simulate and plot-data."""

import argparse
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from crowdcertain.config import Config, RunConfig
from crowdcertain.utils.benchmark import PLOT_KINDS, ReportService, run_benchmark
from crowdcertain.utils.dataset_service import ColumnSpec, DatasetService
from crowdcertain.utils.error_handler import CrowdCertainError, ValidationError
from crowdcertain.utils.simulation_service import SimulationService
from crowdcertain.utils.validation_service import ValidationService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CELL_ERRORS = 2


def _split(value: Optional[str]) -> Optional[List[str]]:
    if value is None:
        return None
    return [item.strip() for item in value.split(',') if item.strip()]


def parse_range(value: str) -> Tuple[float, float]:
    """'lo:hi' -> (lo, hi)."""
    try:
        lo, hi = (float(part) for part in value.split(':'))
    except ValueError as e:
        raise ValidationError(f"Expected a range like 0.4:1 (got '{value}')") from e
    return lo, hi


def parse_workers(value: Optional[str]) -> Optional[List[int]]:
    """'3:7' -> [3, 4, 5, 6, 7]; '3,5' -> [3, 5]; '4' -> [4]."""
    if value is None:
        return None
    try:
        if ':' in value:
            lo, hi = (int(part) for part in value.split(':'))
            return list(range(lo, hi + 1))
        return [int(item) for item in _split(value)]
    except ValueError as e:
        raise ValidationError(f"Invalid worker counts '{value}'") from e


def parse_seeds(value: Optional[str]) -> Optional[List[int]]:
    """A single integer N means seeds 0..N-1; a comma list names the seeds."""
    if value is None:
        return None
    try:
        if ',' in value:
            return [int(item) for item in _split(value)]
        return list(range(int(value)))
    except ValueError as e:
        raise ValidationError(f"Invalid seeds '{value}'") from e


def _schema(label_column: Optional[str], positive_values: Optional[str]) -> Optional[ColumnSpec]:
    if not label_column:
        return None
    return ColumnSpec(label_columns=[label_column], positive_values=_split(positive_values) or [])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='crowdcertain',
        description="Uncertainty-weighted crowd label aggregation and benchmarks.",
    )
    parser.add_argument('--log-level', default=None, help="Logging level (default from CROWDCERTAIN_LOG_LEVEL).")
    commands = parser.add_subparsers(dest='command', required=True)

    bench = commands.add_parser('bench', help="Run a benchmark sweep.")
    bench.add_argument('--config', help="YAML run configuration; flags below override it.")
    bench.add_argument('--dataset', action='append', dest='datasets',
                       help="Bundled dataset name or CSV path (repeatable).")
    bench.add_argument('--methods', help="Comma-separated methods, or 'all'.")
    bench.add_argument('--workers', help="Worker counts: '3:7' or '3,5'.")
    bench.add_argument('--seeds', help="Seed count N (seeds 0..N-1) or a comma list of seeds.")
    bench.add_argument('--threshold-range', help="Worker accuracy range 'lo:hi'.")
    bench.add_argument('--uncertainty', choices=ValidationService.UNCERTAINTY_FLAGS)
    bench.add_argument('--strategy', choices=ValidationService.STRATEGY_FLAGS)
    bench.add_argument('--penalty-reference', choices=('eta', 'z'))
    bench.add_argument('--rho-mode', choices=SimulationService.RHO_MODES)
    bench.add_argument('--folds', type=int)
    bench.add_argument('--ece-bins', type=int)
    bench.add_argument('--jobs', type=int)
    bench.add_argument('--out', help="Output directory.")
    bench.add_argument('--label-column', help="Label column for CSV datasets.")
    bench.add_argument('--positive-values', help="Comma-separated label values mapped to 1.")

    describe = commands.add_parser('describe', help="Print per-dataset feature/sample/class counts.")
    describe.add_argument('--dataset', action='append', dest='datasets')
    describe.add_argument('--label-column')
    describe.add_argument('--positive-values')
    describe.add_argument('--out', help="Also write the table to this CSV file.")

    simulate = commands.add_parser('simulate', help="Synthesize a worker panel and export it as CSV.")
    simulate.add_argument('--dataset', required=True)
    simulate.add_argument('--workers', type=int, default=3)
    simulate.add_argument('--seed', type=int, default=0)
    simulate.add_argument('--threshold-range', default='0.4:1')
    simulate.add_argument('--rho-mode', choices=SimulationService.RHO_MODES, default='shared')
    simulate.add_argument('--label-column')
    simulate.add_argument('--positive-values')
    simulate.add_argument('--out', required=True, help="CSV path for the panel.")

    plot = commands.add_parser('plot-data', help="Emit a tidy plot-data CSV from a persisted report.")
    plot.add_argument('--report', required=True, help="Directory written by 'bench'.")
    plot.add_argument('--kind', required=True, choices=PLOT_KINDS)
    plot.add_argument('--out', help="Output directory (defaults to the report directory).")
    return parser


def bench_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """RunConfig fields set on the command line (None means 'not given')."""
    overrides = {
        'datasets': args.datasets,
        'methods': _split(args.methods),
        'worker_counts': parse_workers(args.workers),
        'seeds': parse_seeds(args.seeds),
        'threshold_range': parse_range(args.threshold_range) if args.threshold_range else None,
        'uncertainty': args.uncertainty,
        'strategy': args.strategy,
        'penalty_reference': args.penalty_reference,
        'rho_mode': args.rho_mode,
        'folds': args.folds,
        'ece_bins': args.ece_bins,
        'jobs': args.jobs,
        'out': args.out,
        'label_column': args.label_column,
        'positive_values': _split(args.positive_values),
    }
    return {key: value for key, value in overrides.items() if value is not None}


def cmd_bench(args: argparse.Namespace) -> int:
    overrides = bench_overrides(args)
    if args.config:
        cfg = RunConfig.from_yaml(args.config, overrides)
    else:
        cfg = RunConfig.from_mapping({}, overrides)

    report = run_benchmark(cfg)
    failed = len(report.error_rows)
    logger.info(f"Benchmark finished: {len(report.ok_rows)} row(s) ok, {failed} failed; results in {cfg.out}")
    return EXIT_CELL_ERRORS if failed else EXIT_OK


def cmd_describe(args: argparse.Namespace) -> int:
    schema = _schema(args.label_column, args.positive_values)
    names = args.datasets or DatasetService.bundled_names()
    table = pd.DataFrame([DatasetService.resolve(name, schema).describe() for name in names])
    print(table.to_string(index=False))
    if args.out:
        os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
        table.to_csv(args.out, index=False)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    dataset = DatasetService.resolve(args.dataset, _schema(args.label_column, args.positive_values))
    panel = SimulationService.simulate(dataset, args.workers, parse_range(args.threshold_range),
                                       args.seed, args.rho_mode)
    SimulationService.export_csv(panel, args.out)
    accuracy = SimulationService.worker_accuracy(panel, dataset.truth)
    for a in range(panel.n_workers):
        logger.info(f"worker {a}: pi={panel.thresholds[a, 0]:.4f} accuracy={accuracy[a, 0]:.4f}")
    return EXIT_OK


def cmd_plot_data(args: argparse.Namespace) -> int:
    report = ReportService.load(args.report)
    path = ReportService.emit_plot_data(report, args.kind, args.out or args.report)
    print(path)
    return EXIT_OK


COMMANDS = {
    'bench': cmd_bench,
    'describe': cmd_describe,
    'simulate': cmd_simulate,
    'plot-data': cmd_plot_data,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    Config.init_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except CrowdCertainError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILURE
