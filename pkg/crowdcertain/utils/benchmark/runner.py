"""Benchmark sweeps: dataset x worker count x seed cells, every method evaluated per held-out fold."""

import logging
import time
from dataclasses import asdict, replace
from typing import Any, Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed

from crowdcertain import __version__
from crowdcertain.config import Config, RunConfig
from crowdcertain.models.domain import (
    BaselineResult,
    BenchmarkReport,
    ConfidenceScores,
    Dataset,
    FoldPlan,
    ForestConfig,
    MetricRow,
    WorkerPanel,
)
from crowdcertain.utils.baselines import BaselineConstants, BaselineRunner, draw_gold_indices
from crowdcertain.utils.baselines.voting import normalize_skills
from crowdcertain.utils.crowd_certain_service import CrowdCertainModel
from crowdcertain.utils.dataset_service import ColumnSpec, DatasetService
from crowdcertain.utils.error_handler import BenchmarkErrorHandler
from crowdcertain.utils.metrics_service import MetricsService
from crowdcertain.utils.simulation_service import SimulationService
from .report_service import ReportService

CROWD_CERTAIN_VARIANTS = {
    'crowd-certain-penalized': 'penalized',
    'crowd-certain-no-penalty': 'no_penalty',
}


def expand_methods(methods: List[str], strategy: str = 'penalized') -> List[str]:
    """Resolve 'all' and the bare 'crowd-certain' alias into row method names, keeping order."""
    expanded: List[str] = []
    for method in methods:
        if method == 'all':
            names = list(CROWD_CERTAIN_VARIANTS) + list(BaselineConstants.FLAG_TO_METHOD)
        elif method == 'crowd-certain':
            names = [f"crowd-certain-{strategy.replace('_', '-')}"]
        else:
            names = [method]
        expanded.extend(name for name in names if name not in expanded)
    return expanded


def slice_confidence(confidence: Optional[ConfidenceScores], indices: np.ndarray) -> Optional[ConfidenceScores]:
    if confidence is None:
        return None
    return ConfidenceScores(
        f_freq=confidence.f_freq[indices],
        f_beta=confidence.f_beta[indices],
        shape_l=confidence.shape_l[indices],
        shape_u=confidence.shape_u[indices],
    )


class BenchmarkRunner:
    """Runs one RunConfig and assembles its BenchmarkReport."""

    def __init__(self, cfg: RunConfig, logger=None):
        cfg.validate()
        self.cfg = cfg
        self.logger = logger or logging.getLogger(__name__)
        self.error_handler = BenchmarkErrorHandler(self.logger)
        self.methods = expand_methods(cfg.methods, cfg.strategy)
        self.forest_config = ForestConfig(
            g_ensembles=cfg.ensemble.g_ensembles,
            trees_per_forest=cfg.ensemble.trees_per_forest,
            max_depth=cfg.ensemble.max_depth,
            min_leaf=cfg.ensemble.min_leaf,
            threshold_mode=cfg.ensemble.threshold_mode,
        )
        self.baselines = BaselineRunner(
            Config.baseline_hyperparameters(),
            tao_forest=replace(self.forest_config, g_ensembles=1),
            logger=self.logger,
        )

    # ===== SWEEP =====

    def load_datasets(self) -> List[Dataset]:
        schema = None
        if self.cfg.label_column:
            schema = ColumnSpec(label_columns=[self.cfg.label_column], positive_values=list(self.cfg.positive_values))
        datasets = [DatasetService.resolve(name, schema) for name in self.cfg.datasets]
        for dataset in datasets:
            self.logger.info(f"Loaded dataset '{dataset.name}' ({dataset.n_instances} x {dataset.n_features})")
        return datasets

    def run(self) -> BenchmarkReport:
        datasets = self.load_datasets()
        cells = [(dataset, m, seed) for dataset in datasets
                 for m in self.cfg.worker_counts for seed in self.cfg.seeds]
        self.logger.info(f"Running {len(cells)} cell(s) x {len(self.methods)} method(s) with {self.cfg.jobs} job(s)")

        outputs = Parallel(n_jobs=self.cfg.jobs)(
            delayed(self.run_cell)(dataset, int(m), int(seed)) for dataset, m, seed in cells
        )

        rows: List[Dict[str, Any]] = []
        weights: List[Dict[str, Any]] = []
        for cell_rows, cell_weights in outputs:
            rows.extend(cell_rows)
            weights.extend(cell_weights)

        report = BenchmarkReport(rows=rows, metadata=self.metadata(datasets), weights=weights)
        if report.error_rows:
            self.logger.warning(f"{len(report.error_rows)} of {len(rows)} row(s) failed")
        return report

    def run_cell(self, dataset: Dataset, m: int, seed: int):
        """Every method on one synthesized panel; failures become error rows."""
        context = {'dataset': dataset.name, 'workers': m, 'seed': seed}
        try:
            panel = SimulationService.simulate(dataset, m, self.cfg.threshold_range, seed, self.cfg.rho_mode)
            folds = DatasetService.make_folds(dataset.n_instances, self.cfg.folds, seed)
        except Exception as e:
            return [self.error_handler.handle_cell_failure(e, self._context(context, method, None))
                    for method in self.methods], []

        rows: List[Dict[str, Any]] = []
        weights: List[Dict[str, Any]] = []
        variants = [method for method in self.methods if method in CROWD_CERTAIN_VARIANTS]
        if variants:
            cell_rows, cell_weights = self._run_crowd_certain(dataset, panel, folds, variants, context)
            rows.extend(cell_rows)
            weights.extend(cell_weights)

        for method in self.methods:
            if method in CROWD_CERTAIN_VARIANTS:
                continue
            try:
                cell_rows, cell_weights = self._run_baseline(method, dataset, panel, folds, context)
            except Exception as e:
                rows.append(self.error_handler.handle_cell_failure(e, self._context(context, method, None)))
                continue
            rows.extend(cell_rows)
            weights.extend(cell_weights)

        self.logger.info(f"Finished cell {dataset.name} M={m} seed={seed}")
        return rows, weights

    # ===== METHODS =====

    def _crowd_certain_model(self, strategy: str) -> CrowdCertainModel:
        return CrowdCertainModel(
            forest_config=self.forest_config,
            measure=self.cfg.uncertainty,
            strategy=strategy,
            penalty_reference=self.cfg.penalty_reference,
            gamma=Config.PI_GAMMA,
            conformal_threshold=Config.CONFORMAL_T,
        )

    def _run_crowd_certain(self, dataset: Dataset, panel: WorkerPanel, folds: FoldPlan,
                           variants: List[str], context: Dict[str, Any]):
        """Weights learnt on each training fold, applied to its held-out fold."""
        rows: List[Dict[str, Any]] = []
        omegas: Dict[str, List[np.ndarray]] = {method: [] for method in variants}
        for fold in range(folds.k_folds):
            train, test = folds.train_indices(fold), folds.test_indices(fold)
            ensembles = None
            for method in variants:
                try:
                    start = time.perf_counter()
                    model = self._crowd_certain_model(CROWD_CERTAIN_VARIANTS[method])
                    model.fit(dataset.features[train], panel.labels[train], ensembles=ensembles)
                    ensembles = model.ensembles
                    output = model.predict(dataset.features[test])
                    metrics = MetricsService.evaluate(
                        output.aggregation.nu,
                        dataset.truth[test],
                        scores=output.aggregation.weighted_score,
                        confidence=output.confidence,
                        bins=self.cfg.ece_bins,
                    )
                    rows.append(self._row(context, method, fold, metrics, start))
                    omegas[method].append(model.worker_weights.omega)
                except Exception as e:
                    rows.append(self.error_handler.handle_cell_failure(e, self._context(context, method, fold)))

        weights = []
        for method, fold_omegas in omegas.items():
            if fold_omegas:
                weights.extend(self._weight_records(context, method, panel, np.mean(fold_omegas, axis=0)))
        return rows, weights

    def _run_baseline(self, method: str, dataset: Dataset, panel: WorkerPanel, folds: FoldPlan,
                      context: Dict[str, Any]):
        """Baselines see the crowd labels of every instance and are scored per held-out fold."""
        seed = context['seed']
        rows: List[Dict[str, Any]] = []
        if method == 'gold-mv':
            fold_weights = []
            for fold in range(folds.k_folds):
                start = time.perf_counter()
                gold = draw_gold_indices(folds.train_indices(fold), Config.GOLD_FRACTION, seed)
                result = self.baselines.run(method, panel.labels, truth=dataset.truth, gold_indices=gold, seed=seed)
                rows.append(self._evaluate_baseline(result, dataset, folds, fold, context, method, start))
                fold_weights.append(result.weights)
            return rows, self._weight_records(context, method, panel, np.mean(fold_weights, axis=0))

        start = time.perf_counter()
        result = self.baselines.run(method, panel.labels, features=dataset.features, seed=seed)
        for fold in range(folds.k_folds):
            rows.append(self._evaluate_baseline(result, dataset, folds, fold, context, method, start))
        return rows, self._weight_records(context, method, panel, self._effective_weights(result, panel))

    def _evaluate_baseline(self, result: BaselineResult, dataset: Dataset, folds: FoldPlan, fold: int,
                           context: Dict[str, Any], method: str, start: float) -> Dict[str, Any]:
        test = folds.test_indices(fold)
        scores = result.scores[test] if result.scores is not None else None
        metrics = MetricsService.evaluate(
            result.nu[test],
            dataset.truth[test],
            scores=scores,
            confidence=slice_confidence(result.confidence, test),
            bins=self.cfg.ece_bins,
        )
        return self._row(context, method, fold, metrics, start)

    @staticmethod
    def _effective_weights(result: BaselineResult, panel: WorkerPanel) -> Optional[np.ndarray]:
        if result.weights is not None:
            return result.weights
        scores = np.asarray(result.worker_scores, dtype=float)
        if scores.shape != panel.thresholds.shape:
            return None
        return normalize_skills(scores)

    # ===== ROWS =====

    @staticmethod
    def _context(context: Dict[str, Any], method: str, fold: Optional[int]) -> Dict[str, Any]:
        return {
            'dataset': context['dataset'],
            'method': method,
            'workers': context['workers'],
            'seed': context['seed'],
            'fold': fold,
        }

    def _row(self, context: Dict[str, Any], method: str, fold: int, metrics: MetricRow,
             start: float) -> Dict[str, Any]:
        row = self._context(context, method, fold)
        row.update(metrics.to_dict())
        row['runtime_ms'] = round((time.perf_counter() - start) * 1000.0, 3)
        row['status'] = 'ok'
        return row

    @staticmethod
    def _weight_records(context: Dict[str, Any], method: str, panel: WorkerPanel,
                        omega: Optional[np.ndarray]) -> List[Dict[str, Any]]:
        if omega is None:
            return []
        m, k = panel.thresholds.shape
        return [
            {
                'dataset': context['dataset'],
                'workers': context['workers'],
                'seed': context['seed'],
                'method': method,
                'worker': a,
                'class': c,
                'pi': float(panel.thresholds[a, c]),
                'omega': float(omega[a, c]),
            }
            for a in range(m) for c in range(k)
        ]

    def metadata(self, datasets: List[Dataset]) -> Dict[str, Any]:
        """Everything needed to re-run the sweep; no timestamps so reruns compare byte for byte."""
        return {
            'version': __version__,
            'config': self.cfg.to_dict(),
            'methods': self.methods,
            'hyperparameters': {
                'baselines': dict(self.baselines.hyperparameters),
                'forest': asdict(self.forest_config),
                'conformal_threshold': Config.CONFORMAL_T,
                'pi_gamma': Config.PI_GAMMA,
            },
            'datasets': [dataset.describe() for dataset in datasets],
        }


def run_benchmark(cfg: RunConfig, persist: bool = True, logger=None) -> BenchmarkReport:
    """Run the sweep and, unless ``persist`` is False, write its tables under ``cfg.out``."""
    report = BenchmarkRunner(cfg, logger=logger).run()
    if persist:
        ReportService.write(report, cfg.out)
    return report
