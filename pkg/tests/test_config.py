import logging

import pytest
import yaml

from crowdcertain.config import Config, EnsembleSettings, RunConfig
from crowdcertain.utils.error_handler import BenchmarkErrorHandler, ValidationError


def _write_yaml(tmp_path, data):
    path = tmp_path / 'run.yaml'
    path.write_text(yaml.safe_dump(data), encoding='utf-8')
    return str(path)


class TestRunConfig:

    def test_defaults_are_valid(self):
        cfg = RunConfig()
        cfg.validate()
        assert cfg.methods == ['all']
        assert cfg.threshold_range == (0.4, 1.0)

    def test_sectioned_yaml_is_flattened(self, tmp_path):
        path = _write_yaml(tmp_path, {
            'data': {'datasets': ['iris', 'xor-grid']},
            'crowd': {'worker_counts': [3, 5], 'threshold_range': [0.5, 0.9], 'rho_mode': 'per_worker'},
            'evaluation': {'folds': 4, 'ece_bins': 15},
            'ensemble': {'g_ensembles': 6, 'max_depth': 3},
        })
        cfg = RunConfig.from_yaml(path)

        assert cfg.datasets == ['iris', 'xor-grid']
        assert cfg.worker_counts == [3, 5]
        assert cfg.threshold_range == (0.5, 0.9)
        assert cfg.folds == 4
        assert cfg.ensemble == EnsembleSettings(g_ensembles=6, max_depth=3)

    def test_overrides_win_and_none_is_ignored(self, tmp_path):
        path = _write_yaml(tmp_path, {'evaluation': {'folds': 4}, 'methods': ['mv']})
        cfg = RunConfig.from_yaml(path, {'folds': 3, 'methods': None})
        assert cfg.folds == 3
        assert cfg.methods == ['mv']

    def test_unknown_key(self):
        with pytest.raises(ValidationError, match='colour'):
            RunConfig.from_mapping({'colour': 'blue'})

    @pytest.mark.parametrize('field,value', [
        ('strategy', 'lenient'),
        ('uncertainty', 'variance'),
        ('methods', ['mv', 'snorkel']),
        ('worker_counts', [0]),
        ('folds', 1),
        ('threshold_range', (0.9, 0.4)),
        ('seeds', []),
    ])
    def test_invalid_values(self, field, value):
        with pytest.raises(ValidationError):
            RunConfig.from_mapping({field: value})

    def test_unknown_ensemble_key(self, tmp_path):
        path = _write_yaml(tmp_path, {'ensemble': {'g_ensembles': 4, 'n_estimators': 100}})
        with pytest.raises(ValidationError, match='n_estimators'):
            RunConfig.from_yaml(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            RunConfig.from_yaml(str(tmp_path / 'absent.yaml'))

    def test_to_dict_is_plain(self):
        data = RunConfig().to_dict()
        assert data['threshold_range'] == [0.4, 1.0]
        assert data['ensemble']['g_ensembles'] == 10


class TestConfig:

    def test_init_logging_sets_level(self):
        Config.init_logging('debug')
        assert logging.getLogger().level == logging.DEBUG
        Config.init_logging('warning')
        assert logging.getLogger().level == logging.WARNING

    def test_baseline_hyperparameters(self):
        hp = Config.baseline_hyperparameters()
        assert set(hp) == {'em_iters', 'em_tol', 'kos_iters', 'glad_step', 'gold_fraction'}


def test_cell_failure_row(caplog):
    handler = BenchmarkErrorHandler(logging.getLogger('test'))
    context = {'dataset': 'iris', 'method': 'mmsr', 'workers': 2, 'seed': 0, 'fold': None}
    with caplog.at_level(logging.ERROR):
        row = handler.handle_cell_failure(ValidationError('too few workers'), context)

    assert row['status'] == 'error'
    assert row['error'] == 'ValidationError: too few workers'
    assert len(row['error_id']) == 8
    assert row['error_id'] in caplog.text
    record = caplog.records[-1]
    assert record.levelno == logging.ERROR
    assert record.error_id == row['error_id']
    assert 'ValidationError' in record.traceback
