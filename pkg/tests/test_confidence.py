import itertools

import numpy as np
import pytest

from crowdcertain.utils.confidence_service import (
    ConfidenceService,
    beta_confidence,
    beta_shape,
    freq_confidence,
    round_half_away,
)
from crowdcertain.utils.error_handler import AggregationError, ValidationError


class TestBetaConfidence:

    @pytest.mark.parametrize('l,u,expected', [
        (3, 1, 0.125),
        (1, 3, 0.875),
        (2, 2, 0.5),
        (1, 1, 0.5),
        (4, 1, 0.0625),
    ])
    def test_examples(self, l, u, expected):
        assert float(beta_confidence(l, u)) == pytest.approx(expected)

    def test_symmetry_on_integer_shapes(self):
        for l in range(1, 15):
            for u in range(1, 15):
                assert float(beta_confidence(l, u) + beta_confidence(u, l)) == pytest.approx(1.0)

    def test_rounding_half_away_from_zero(self):
        np.testing.assert_array_equal(round_half_away([0.5, 1.5, 2.5, 2.4999]), [1.0, 2.0, 3.0, 2.0])
        # l = 1.5 rounds to 2 and l + u = 2.5 rounds to 3
        assert float(beta_confidence(1.5, 1.0)) == pytest.approx(0.25)

    def test_shapes_below_one_rejected(self):
        with pytest.raises(ValidationError):
            beta_confidence(0.5, 2.0)


class TestWeightedAgreement:

    def test_freq_is_agreeing_weight(self):
        votes = np.array([[[1], [1], [0]]])
        omega = np.array([[0.5], [0.3], [0.2]])
        nu = np.array([[1]])
        assert freq_confidence(votes, omega, nu)[0, 0] == pytest.approx(0.8)

        l, u = beta_shape(votes, omega, nu)
        assert l[0, 0] == pytest.approx(1.8)
        assert u[0, 0] == pytest.approx(1.2)

    def test_strict_majority_confidence_above_half(self):
        for m in range(1, 6):
            votes = np.array(list(itertools.product([0, 1], repeat=m)))[:, :, None]
            nu = (votes.sum(axis=1) > m / 2.0).astype(int)
            agreeing = votes == nu[:, None, :]
            decided = agreeing.sum(axis=1)[:, 0] != m / 2.0
            confidence = freq_confidence(votes, np.full((m, 1), 1.0 / m), nu)[:, 0]
            assert np.all(confidence[decided] > 0.5)

    def test_per_instance_weights(self):
        votes = np.array([[[1], [0]], [[1], [0]]])
        omega = np.array([[[0.9], [0.1]], [[0.2], [0.8]]])
        nu = np.array([[1], [0]])
        np.testing.assert_allclose(freq_confidence(votes, omega, nu)[:, 0], [0.9, 0.8])

    def test_freq_clipped_to_unit_interval(self):
        votes = np.array([[[1], [1]]])
        omega = np.array([[0.6], [0.4 + 1e-12]])
        assert freq_confidence(votes, omega, np.array([[1]]))[0, 0] == 1.0

    def test_beta_constant_under_normalized_weighted_majority(self):
        # l + u = 3 and the majority side holds at least half the weight, so round(l) = 2
        rng = np.random.default_rng(4)
        votes = rng.integers(0, 2, size=(200, 5, 1))
        omega = rng.dirichlet(np.ones(5))[:, None]
        nu = ((votes * omega[None]).sum(axis=1) > 0.5).astype(int)

        l, u = beta_shape(votes, omega, nu)
        np.testing.assert_allclose(l + u, 3.0)
        np.testing.assert_allclose(beta_confidence(l, u), 0.25)

    def test_label_shape_mismatch(self):
        with pytest.raises(AggregationError):
            freq_confidence(np.zeros((2, 3, 1)), np.full((3, 1), 1 / 3), np.zeros((3, 1)))


def test_service_bundles_both_scores():
    votes = np.array([[[1], [1], [1]], [[1], [0], [0]]])
    omega = np.full((3, 1), 1.0 / 3)
    nu = np.array([[1], [0]])
    scores = ConfidenceService.compute(votes, omega, nu)

    np.testing.assert_allclose(scores.f_freq[:, 0], [1.0, 2.0 / 3])
    # l = 2, u = 1 -> P(Bin(2, 0.5) >= 2); l = 1 + 2/3 rounds to 2 and l + u = 3
    np.testing.assert_allclose(scores.f_beta[:, 0], [0.25, 0.25])
