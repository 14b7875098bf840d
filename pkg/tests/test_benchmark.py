import json
import os

import numpy as np
import pandas as pd
import pytest

from crowdcertain.config import EnsembleSettings, RunConfig
from crowdcertain.models.domain import BenchmarkReport
from crowdcertain.utils.benchmark import BenchmarkRunner, ReportService, expand_methods, run_benchmark
from crowdcertain.utils.error_handler import BenchmarkError, ValidationError


def _config(tmp_path, **overrides):
    values = {
        'datasets': ['iris'],
        'methods': ['mv'],
        'worker_counts': [3],
        'seeds': [0],
        'folds': 5,
        'jobs': 1,
        'out': str(tmp_path / 'results'),
        'ensemble': EnsembleSettings(g_ensembles=3, trees_per_forest=2),
    }
    values.update(overrides)
    return RunConfig.from_mapping(values)


class TestExpandMethods:

    def test_all(self):
        methods = expand_methods(['all'])
        assert methods[:2] == ['crowd-certain-penalized', 'crowd-certain-no-penalty']
        assert len(methods) == 13

    def test_bare_alias_follows_strategy(self):
        assert expand_methods(['crowd-certain', 'mv'], 'no_penalty') == ['crowd-certain-no-penalty', 'mv']

    def test_duplicates_dropped(self):
        assert expand_methods(['mv', 'mv', 'kos']) == ['mv', 'kos']


class TestBenchmarkRunner:

    def test_one_row_per_fold_and_files(self, tmp_path):
        cfg = _config(tmp_path)
        report = run_benchmark(cfg)

        assert len(report.rows) == 5
        assert {row['fold'] for row in report.rows} == set(range(5))
        assert all(row['status'] == 'ok' for row in report.rows)
        for name in ('raw_rows.csv', 'summary.csv', 'weights.csv', 'metadata.json'):
            assert os.path.isfile(os.path.join(cfg.out, name))

        summary = pd.read_csv(os.path.join(cfg.out, 'summary.csv'))
        assert len(summary) == 1
        assert summary.loc[0, 'rows'] == 5
        assert summary.loc[0, 'accuracy'] == pytest.approx(np.mean([row['accuracy'] for row in report.rows]))

    def test_perfect_workers(self, tmp_path):
        cfg = _config(tmp_path, methods=['mv', 'crowd-certain'], threshold_range=(0.999999, 1.0),
                      ensemble=EnsembleSettings())
        report = run_benchmark(cfg, persist=False)

        by_method = pd.DataFrame(report.rows).groupby('method')['accuracy'].mean()
        assert by_method['mv'] == pytest.approx(1.0)
        assert by_method['crowd-certain-penalized'] == pytest.approx(1.0)

    def test_rerun_is_identical(self, tmp_path):
        first = run_benchmark(_config(tmp_path, methods=['mv', 'dawid-skene', 'kos']), persist=False)
        second = run_benchmark(_config(tmp_path, methods=['mv', 'dawid-skene', 'kos']), persist=False)

        strip = [{key: value for key, value in row.items() if key != 'runtime_ms'} for row in first.rows]
        again = [{key: value for key, value in row.items() if key != 'runtime_ms'} for row in second.rows]
        assert strip == again
        assert first.weights == second.weights
        assert json.dumps(first.metadata, sort_keys=True) == json.dumps(second.metadata, sort_keys=True)

    def test_failing_method_becomes_error_rows(self, tmp_path):
        report = run_benchmark(_config(tmp_path, methods=['mmsr', 'mv'], worker_counts=[2]), persist=False)

        assert len(report.error_rows) == 1
        error = report.error_rows[0]
        assert error['method'] == 'mmsr'
        assert 'ValidationError' in error['error']
        assert len(report.ok_rows) == 5

    def test_crowd_certain_weight_records(self, tmp_path):
        report = run_benchmark(_config(tmp_path, methods=['crowd-certain-penalized'], folds=2), persist=False)

        records = pd.DataFrame(report.weights)
        assert len(records) == 3
        assert records['omega'].sum() == pytest.approx(1.0)
        assert set(records['method']) == {'crowd-certain-penalized'}

    def test_metadata_echoes_configuration(self, tmp_path):
        runner = BenchmarkRunner(_config(tmp_path))
        metadata = runner.metadata(runner.load_datasets())
        assert metadata['methods'] == ['mv']
        assert metadata['config']['folds'] == 5
        assert metadata['hyperparameters']['forest']['g_ensembles'] == 3
        assert metadata['datasets'][0]['samples'] == 100


class TestReportService:

    def test_load_reads_written_report(self, tmp_path):
        cfg = _config(tmp_path, methods=['mv', 'wawa'])
        report = run_benchmark(cfg)
        loaded = ReportService.load(cfg.out)

        assert len(loaded.rows) == len(report.rows)
        assert len(loaded.weights) == len(report.weights)
        assert loaded.metadata['methods'] == ['mv', 'wawa']

    def test_weights_vs_threshold(self, tmp_path):
        report = run_benchmark(_config(tmp_path, methods=['wawa', 'zbs']), persist=False)
        frame = ReportService.plot_frame(report, 'weights_vs_threshold')
        assert len(frame) == 2 * 3
        assert list(frame.columns) == ['dataset', 'workers', 'seed', 'method', 'worker', 'class', 'pi', 'omega']

    def test_metric_boxplot_and_file(self, tmp_path):
        report = run_benchmark(_config(tmp_path, methods=['mv', 'sheng'], seeds=[0, 1]), persist=False)
        path = ReportService.emit_plot_data(report, 'metric_boxplot', str(tmp_path / 'plots'))

        frame = pd.read_csv(path)
        assert os.path.basename(path) == 'metric_boxplot.csv'
        accuracy = frame[frame.metric == 'accuracy']
        assert len(accuracy) == 2 * 2

    def test_calibration_heatmap_skips_methods_without_confidence(self, tmp_path):
        report = run_benchmark(_config(tmp_path, methods=['mv', 'sheng']), persist=False)
        frame = ReportService.plot_frame(report, 'calibration_heatmap')
        assert set(frame['method']) == {'sheng'}

    def test_empty_report_writes_nothing(self, tmp_path):
        out = tmp_path / 'plots'
        with pytest.raises(BenchmarkError):
            ReportService.emit_plot_data(BenchmarkReport(rows=[], metadata={}), 'metric_boxplot', str(out))
        assert not out.exists()

    def test_unknown_kind(self):
        report = BenchmarkReport(rows=[{'status': 'ok'}], metadata={})
        with pytest.raises(ValidationError):
            ReportService.plot_frame(report, 'pie_chart')

    def test_load_missing_directory(self, tmp_path):
        with pytest.raises(BenchmarkError):
            ReportService.load(str(tmp_path / 'nothing'))
