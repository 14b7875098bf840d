"""Persistence of benchmark reports and tidy plot-data tables."""

import json
import logging
import os
from typing import Dict, List

import pandas as pd

from crowdcertain.models.domain import BenchmarkReport
from crowdcertain.utils.error_handler import BenchmarkError
from crowdcertain.utils.validation_service import ValidationService

logger = logging.getLogger(__name__)

KEY_COLUMNS = ['dataset', 'method', 'workers', 'seed', 'fold']
METRIC_COLUMNS = ['accuracy', 'f1', 'auc', 'brier_mse_freq', 'brier_mse_beta', 'ece_freq', 'ece_beta']
ROW_COLUMNS = KEY_COLUMNS + METRIC_COLUMNS + ['n_instances', 'bins', 'runtime_ms', 'status', 'error_id', 'error']
WEIGHT_COLUMNS = ['dataset', 'workers', 'seed', 'method', 'worker', 'class', 'pi', 'omega']
PLOT_KINDS = ('weights_vs_threshold', 'metric_boxplot', 'calibration_heatmap')
CALIBRATION_METRICS = ['brier_mse_freq', 'brier_mse_beta', 'ece_freq', 'ece_beta']

RAW_ROWS_FILE = 'raw_rows.csv'
SUMMARY_FILE = 'summary.csv'
WEIGHTS_FILE = 'weights.csv'
METADATA_FILE = 'metadata.json'


class ReportService:
    """Service for writing, reading and reshaping benchmark reports."""

    @staticmethod
    def rows_frame(report: BenchmarkReport) -> pd.DataFrame:
        frame = pd.DataFrame(report.rows)
        for column in ROW_COLUMNS:
            if column not in frame.columns:
                frame[column] = None
        return frame[ROW_COLUMNS]

    @staticmethod
    def summary_frame(report: BenchmarkReport) -> pd.DataFrame:
        """Mean of every metric over seeds and folds per (dataset, method, workers)."""
        ok = pd.DataFrame(report.ok_rows)
        if ok.empty:
            return pd.DataFrame(columns=['dataset', 'method', 'workers', 'rows'] + METRIC_COLUMNS + ['runtime_ms'])
        numeric = METRIC_COLUMNS + ['runtime_ms']
        ok[numeric] = ok[numeric].apply(pd.to_numeric, errors='coerce')
        grouped = ok.groupby(['dataset', 'method', 'workers'], sort=False)
        summary = grouped[numeric].mean()
        summary.insert(0, 'rows', grouped.size())
        return summary.reset_index()

    @staticmethod
    def write(report: BenchmarkReport, out_dir: str) -> Dict[str, str]:
        """Write raw rows, the seed-averaged summary, worker weights and metadata.

        Args:
            report: Report to persist
            out_dir: Output directory (created when missing)

        Returns:
            Mapping of table name to written path
        """
        os.makedirs(out_dir, exist_ok=True)
        paths = {
            'raw_rows': os.path.join(out_dir, RAW_ROWS_FILE),
            'summary': os.path.join(out_dir, SUMMARY_FILE),
            'weights': os.path.join(out_dir, WEIGHTS_FILE),
            'metadata': os.path.join(out_dir, METADATA_FILE),
        }
        ReportService.rows_frame(report).to_csv(paths['raw_rows'], index=False)
        ReportService.summary_frame(report).to_csv(paths['summary'], index=False)
        pd.DataFrame(report.weights, columns=WEIGHT_COLUMNS).to_csv(paths['weights'], index=False)
        with open(paths['metadata'], 'w', encoding='utf-8') as fh:
            json.dump(report.metadata, fh, indent=2, sort_keys=True)

        logger.info(f"Wrote {len(report.rows)} row(s) to {out_dir}")
        return paths

    @staticmethod
    def load(out_dir: str) -> BenchmarkReport:
        """Rebuild a report from a directory written by :meth:`write`."""
        rows_path = os.path.join(out_dir, RAW_ROWS_FILE)
        if not os.path.isfile(rows_path):
            raise BenchmarkError(f"No benchmark rows found in {out_dir}")

        rows = pd.read_csv(rows_path).astype(object)
        rows = rows.where(pd.notna(rows), None)
        weights_path = os.path.join(out_dir, WEIGHTS_FILE)
        weights: List[Dict] = []
        if os.path.isfile(weights_path):
            weights = pd.read_csv(weights_path).to_dict('records')
        metadata: Dict = {}
        metadata_path = os.path.join(out_dir, METADATA_FILE)
        if os.path.isfile(metadata_path):
            with open(metadata_path, encoding='utf-8') as fh:
                metadata = json.load(fh)
        return BenchmarkReport(rows=rows.to_dict('records'), metadata=metadata, weights=weights)

    # ===== PLOT DATA =====

    @staticmethod
    def plot_frame(report: BenchmarkReport, kind: str) -> pd.DataFrame:
        """Long-format table for one plot kind."""
        ValidationService.require(ValidationService.validate_choice(kind, PLOT_KINDS, 'plot kind'))
        if not report.ok_rows:
            raise BenchmarkError("Report has no successful rows to plot")

        if kind == 'weights_vs_threshold':
            if not report.weights:
                raise BenchmarkError("Report carries no worker weights")
            return pd.DataFrame(report.weights, columns=WEIGHT_COLUMNS)

        ok = pd.DataFrame(report.ok_rows)
        ok[METRIC_COLUMNS] = ok[METRIC_COLUMNS].apply(pd.to_numeric, errors='coerce')
        if kind == 'metric_boxplot':
            per_seed = ok.groupby(['dataset', 'method', 'workers', 'seed'], sort=False)[METRIC_COLUMNS].mean()
            long = per_seed.reset_index().melt(
                id_vars=['dataset', 'method', 'workers', 'seed'], var_name='metric', value_name='value')
            return long.dropna(subset=['value']).reset_index(drop=True)

        per_cell = ok.groupby(['dataset', 'method', 'workers'], sort=False)[CALIBRATION_METRICS].mean()
        long = per_cell.reset_index().melt(
            id_vars=['dataset', 'method', 'workers'], var_name='metric', value_name='value')
        return long.dropna(subset=['value']).reset_index(drop=True)

    @staticmethod
    def emit_plot_data(report: BenchmarkReport, kind: str, out_dir: str) -> str:
        """Write ``<kind>.csv`` under ``out_dir``; nothing is written when the report is empty."""
        frame = ReportService.plot_frame(report, kind)
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, f"{kind}.csv")
        frame.to_csv(path, index=False)
        logger.info(f"Wrote {len(frame)} {kind} row(s) to {path}")
        return path
