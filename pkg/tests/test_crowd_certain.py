import itertools

import numpy as np
import pandas as pd
import pytest

from crowdcertain.models.domain import UncertaintyScores
from crowdcertain.utils.crowd_certain_service import (
    CrowdCertainModel,
    aggregate,
    consistency,
    crowd_majority,
    reliability,
    weights,
)
from crowdcertain.utils.error_handler import AggregationError, EnsembleError, ValidationError
from crowdcertain.utils.simulation_service import SimulationService


def _delta(values):
    return UncertaintyScores(delta=np.asarray(values, dtype=float), measure='std_dev', normalized=True)


class TestConsistency:

    def test_no_penalty_is_complement(self):
        delta = np.array([[[0.2], [0.5], [1.0]]])
        eta = np.array([[[1], [1], [0]]])
        scores = consistency(_delta(delta), eta, 'no_penalty')
        np.testing.assert_allclose(scores.c, 1.0 - delta)

    def test_penalized_zeroes_dissenting_workers(self):
        delta = np.array([[[0.2], [0.1], [0.4]]])
        eta = np.array([[[1], [1], [0]]])
        scores = consistency(_delta(delta), eta, 'penalized')
        np.testing.assert_allclose(scores.c[0, :, 0], [0.8, 0.9, 0.0])

    def test_penalized_never_exceeds_no_penalty(self):
        rng = np.random.default_rng(0)
        delta = rng.uniform(size=(50, 4, 2))
        eta = rng.integers(0, 2, size=(50, 4, 2))
        penalized = consistency(_delta(delta), eta, 'penalized').c
        plain = consistency(_delta(delta), eta, 'no-penalty').c
        assert np.all(penalized <= plain)

    def test_crowd_labels_as_penalty_reference(self):
        delta = np.zeros((1, 3, 1))
        eta = np.array([[[1], [1], [0]]])
        crowd = np.array([[[0], [0], [0]]])
        scores = consistency(_delta(delta), eta, 'penalized', reference=crowd)
        np.testing.assert_allclose(scores.c[0, :, 0], [0.0, 0.0, 1.0])

    def test_rejects_unnormalized_uncertainty(self):
        with pytest.raises(ValidationError):
            consistency(_delta(np.full((2, 2, 1), 1.5)), np.zeros((2, 2, 1)))

    def test_shape_mismatch(self):
        with pytest.raises(AggregationError):
            consistency(_delta(np.zeros((2, 2, 1))), np.zeros((2, 3, 1)))

    def test_crowd_majority_ties_go_to_zero(self):
        votes = np.array([[[1], [0]], [[1], [1]]])
        np.testing.assert_array_equal(crowd_majority(votes)[:, 0], [0, 1])


class TestWeights:

    def test_reliability_is_mean_over_instances(self):
        c = np.array([[[1.0], [0.0]], [[0.5], [0.5]]])
        psi, overall = reliability(consistency(_delta(1.0 - c), np.ones_like(c, dtype=int), 'no_penalty'))
        np.testing.assert_allclose(psi[:, 0], [0.75, 0.25])
        np.testing.assert_allclose(overall, [0.75, 0.25])

    def test_normalization(self):
        omega = weights(np.array([[0.6], [0.2], [0.2]]))
        np.testing.assert_allclose(omega[:, 0], [0.6, 0.2, 0.2])
        np.testing.assert_allclose(weights(np.array([[2.0], [2.0]]))[:, 0], [0.5, 0.5])

    def test_all_zero_reliability_is_uniform(self):
        np.testing.assert_allclose(weights(np.zeros((4, 2))), 0.25)

    def test_scale_invariance(self):
        psi = np.array([[0.3, 0.9], [0.1, 0.4], [0.5, 0.2]])
        np.testing.assert_allclose(weights(psi), weights(7.5 * psi))

    def test_negative_reliability_rejected(self):
        with pytest.raises(ValidationError):
            weights(np.array([[0.5], [-0.1]]))


class TestAggregate:

    def test_weighted_vote(self):
        eta = np.array([[[1], [0], [0]], [[0], [1], [1]]])
        omega = np.array([[0.6], [0.2], [0.2]])
        result = aggregate(eta, omega)
        np.testing.assert_allclose(result.weighted_score[:, 0], [0.6, 0.4])
        np.testing.assert_array_equal(result.nu[:, 0], [1, 0])

    def test_exact_half_is_negative(self):
        eta = np.array([[[1], [0]]])
        result = aggregate(eta, np.array([[0.5], [0.5]]))
        assert result.nu[0, 0] == 0

    @pytest.mark.parametrize('m', [1, 2, 3, 4, 5])
    def test_equal_weights_reduce_to_majority(self, m):
        votes = np.array(list(itertools.product([0, 1], repeat=m)))[:, :, None]
        result = aggregate(votes, np.full((m, 1), 1.0 / m))
        np.testing.assert_array_equal(result.nu, crowd_majority(votes))

    def test_unnormalized_weights_rejected(self):
        with pytest.raises(AggregationError):
            aggregate(np.zeros((2, 2, 1)), np.array([[0.5], [0.6]]))

    def test_shape_mismatch(self):
        with pytest.raises(AggregationError):
            aggregate(np.zeros((2, 3, 1)), np.array([[0.5], [0.5]]))


class TestCrowdCertainModel:

    def test_perfect_workers_recover_truth(self, two_gaussian, small_forest):
        panel = SimulationService.synthesize_labels(two_gaussian, np.ones((3, 1)), seed=0)
        model = CrowdCertainModel(small_forest).fit(two_gaussian.features, panel.labels)
        output = model.predict(two_gaussian.features)

        assert np.mean(output.aggregation.nu == two_gaussian.truth) >= 0.95
        np.testing.assert_allclose(model.worker_weights.omega.sum(axis=0), 1.0)
        assert output.confidence.f_beta.shape == (two_gaussian.n_instances, 1)

    def test_accurate_worker_outweighs_noisy_one(self, two_gaussian, small_forest):
        thresholds = np.array([[0.98], [0.95], [0.55]])
        panel = SimulationService.synthesize_labels(two_gaussian, thresholds, seed=1, rho_mode='per_worker')
        model = CrowdCertainModel(small_forest, strategy='no_penalty').fit(two_gaussian.features, panel.labels)
        omega = model.worker_weights.omega[:, 0]
        assert omega[0] > omega[2]
        assert omega[1] > omega[2]

    def test_reuses_given_ensembles(self, two_gaussian, small_forest):
        panel = SimulationService.simulate(two_gaussian, 3, seed=2)
        first = CrowdCertainModel(small_forest, strategy='penalized').fit(two_gaussian.features, panel.labels)
        second = CrowdCertainModel(small_forest, strategy='no_penalty').fit(
            two_gaussian.features, panel.labels, ensembles=first.ensembles)
        assert second.ensembles is first.ensembles

    def test_ensemble_worker_count_mismatch(self, two_gaussian, small_forest):
        panel = SimulationService.simulate(two_gaussian, 3, seed=2)
        model = CrowdCertainModel(small_forest).fit(two_gaussian.features, panel.labels)
        with pytest.raises(EnsembleError):
            CrowdCertainModel(small_forest).fit(two_gaussian.features, panel.labels[:, :2], ensembles=model.ensembles)

    def test_predict_before_fit(self, two_gaussian):
        with pytest.raises(EnsembleError):
            CrowdCertainModel().predict(two_gaussian.features)

    def test_saved_model_labels_identically(self, tmp_path, two_gaussian, small_forest):
        panel = SimulationService.simulate(two_gaussian, 3, seed=4)
        model = CrowdCertainModel(small_forest, measure='entropy').fit(two_gaussian.features, panel.labels)
        path = str(tmp_path / 'model.json')
        model.save_json(path)

        reloaded = CrowdCertainModel.load_json(path)
        np.testing.assert_array_equal(reloaded.predict(two_gaussian.features).aggregation.nu,
                                      model.predict(two_gaussian.features).aggregation.nu)
        assert reloaded.measure == 'entropy'

    def test_weight_export(self, tmp_path, two_gaussian, small_forest):
        panel = SimulationService.simulate(two_gaussian, 4, seed=0)
        model = CrowdCertainModel(small_forest).fit(two_gaussian.features, panel.labels)
        path = str(tmp_path / 'weights.csv')
        CrowdCertainModel.export_weights_csv(model.worker_weights, path)

        frame = pd.read_csv(path)
        assert list(frame.columns) == ['worker_id', 'class_id', 'psi', 'omega']
        assert frame['omega'].sum() == pytest.approx(1.0)

    def test_invalid_strategy(self):
        with pytest.raises(ValidationError):
            CrowdCertainModel(strategy='lenient')
