import os

import pandas as pd
import pytest

from crowdcertain.cli import (
    EXIT_CELL_ERRORS,
    EXIT_FAILURE,
    EXIT_OK,
    main,
    parse_range,
    parse_seeds,
    parse_workers,
)
from crowdcertain.utils.error_handler import ValidationError


class TestParsers:

    def test_worker_range(self):
        assert parse_workers('3:7') == [3, 4, 5, 6, 7]
        assert parse_workers('3,5') == [3, 5]
        assert parse_workers('4') == [4]

    def test_seeds(self):
        assert parse_seeds('3') == [0, 1, 2]
        assert parse_seeds('4,9') == [4, 9]

    def test_range(self):
        assert parse_range('0.4:1') == (0.4, 1.0)

    def test_bad_range(self):
        with pytest.raises(ValidationError):
            parse_range('0.4-1')


class TestCommands:

    def test_bench_writes_results(self, tmp_path):
        out = str(tmp_path / 'bench')
        code = main(['bench', '--dataset', 'iris', '--methods', 'mv,wawa', '--workers', '3',
                     '--seeds', '1', '--folds', '2', '--out', out])

        assert code == EXIT_OK
        rows = pd.read_csv(os.path.join(out, 'raw_rows.csv'))
        assert set(rows['method']) == {'mv', 'wawa'}
        assert len(rows) == 4

    def test_bench_with_failed_cells(self, tmp_path):
        code = main(['bench', '--dataset', 'iris', '--methods', 'mmsr', '--workers', '2',
                     '--seeds', '1', '--folds', '2', '--out', str(tmp_path / 'bench')])
        assert code == EXIT_CELL_ERRORS

    def test_bench_with_invalid_config(self, tmp_path):
        code = main(['bench', '--dataset', 'iris', '--methods', 'mv', '--folds', '1', '--out', str(tmp_path)])
        assert code == EXIT_FAILURE

    def test_bench_reads_yaml(self, tmp_path):
        config = tmp_path / 'run.yaml'
        config.write_text("data:\n  datasets: [iris]\nmethods: [mv]\ncrowd:\n  worker_counts: [3]\n"
                          "seeds: [0]\nevaluation:\n  folds: 2\n", encoding='utf-8')
        out = str(tmp_path / 'bench')
        assert main(['bench', '--config', str(config), '--out', out]) == EXIT_OK
        assert os.path.isfile(os.path.join(out, 'metadata.json'))

    def test_describe(self, tmp_path, capsys):
        out = str(tmp_path / 'describe.csv')
        assert main(['describe', '--dataset', 'iris', '--out', out]) == EXIT_OK
        assert 'iris' in capsys.readouterr().out
        table = pd.read_csv(out)
        assert table.loc[0, 'samples'] == 100

    def test_describe_unknown_dataset(self):
        assert main(['describe', '--dataset', 'missing.csv']) == EXIT_FAILURE

    def test_simulate(self, tmp_path):
        out = str(tmp_path / 'panel.csv')
        assert main(['simulate', '--dataset', 'iris', '--workers', '4', '--out', out]) == EXIT_OK
        assert len(pd.read_csv(out)) == 100 * 4

    def test_plot_data(self, tmp_path):
        report = str(tmp_path / 'bench')
        main(['bench', '--dataset', 'iris', '--methods', 'wawa', '--workers', '3',
              '--seeds', '1', '--folds', '2', '--out', report])

        assert main(['plot-data', '--report', report, '--kind', 'weights_vs_threshold']) == EXIT_OK
        assert os.path.isfile(os.path.join(report, 'weights_vs_threshold.csv'))

    def test_plot_data_without_report(self, tmp_path):
        assert main(['plot-data', '--report', str(tmp_path), '--kind', 'metric_boxplot']) == EXIT_FAILURE
