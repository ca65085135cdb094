import numpy as np
import pytest

from conftest import random_density, random_pom_elements, random_pure_ensemble
from oracles import rayleigh_max_confidence
from discrimkit.core import INCONCLUSIVE, DiscriminationError, Pom, StateEnsemble, validate_pom
from discrimkit.ensembles import trine, two_pure
from discrimkit.maxconf import (
    ZeroProbabilityOutcome,
    confidence,
    max_confidence_pom,
    max_confidence_value,
    no_signaling_confidence_oracle,
    weighted_average_confidence,
)
from discrimkit.minerror import check_optimality, guess_pom, helstrom_two_pure, square_root_measurement, success_probability
from discrimkit.unambiguous import unamb_two_pure


class TestConfidence:
    def test_orthogonal_projective(self):
        e = StateEnsemble.from_kets([[1, 0], [0, 1]], [0.3, 0.7])
        pom = Pom((np.diag([1, 0]), np.diag([0, 1])))
        assert confidence(e, pom, 0) == pytest.approx(1.0)
        assert confidence(e, pom, 1) == pytest.approx(1.0)

    @pytest.mark.parametrize("deg", [5, 20, 30, 40])
    def test_trine_min_error(self, deg):
        th = np.radians(deg)
        e = trine(th)
        pom = square_root_measurement(e)
        assert max(check_optimality(e, pom)) <= 1e-9
        for i in range(3):
            assert confidence(e, pom, i) == pytest.approx((1 + np.sin(2 * th)) / 3, abs=1e-12)

    def test_identity_gives_prior(self):
        e = two_pure(0.3, 0.2)
        pom = Pom((np.eye(2), np.zeros((2, 2))))
        assert confidence(e, pom, 0) == pytest.approx(0.2)

    def test_zero_probability_outcome(self):
        e = two_pure(0.3)
        with pytest.raises(ZeroProbabilityOutcome):
            confidence(e, Pom((np.eye(2), np.zeros((2, 2)))), 1)


class TestMaxConfidenceValue:
    @pytest.mark.parametrize("deg", [1, 10, 30, 44])
    def test_trine(self, deg):
        e = trine(np.radians(deg))
        assert all(max_confidence_value(e, i) == pytest.approx(2 / 3, abs=1e-12) for i in range(3))

    def test_orthogonal(self):
        e = StateEnsemble.from_kets([[1, 0], [0, 1]])
        assert max_confidence_value(e, 0) == pytest.approx(1.0)

    def test_independent_pair(self):
        e = two_pure(np.pi / 6)
        assert max_confidence_value(e, 0) == pytest.approx(1.0)

    def test_rayleigh_oracle(self, rng):
        for _ in range(3):
            e = StateEnsemble(tuple(random_density(rng, 2) for _ in range(3)), rng.dirichlet(np.ones(3)))
            for i in range(3):
                oracle = rayleigh_max_confidence(e.states[i], e.priors[i], e.average(), points=200)
                assert oracle <= max_confidence_value(e, i) + 1e-12
                assert oracle == pytest.approx(max_confidence_value(e, i), abs=2e-4)

    def test_filtration_invariance(self, rng):
        for _ in range(20):
            e = StateEnsemble(tuple(random_density(rng, 3, 2) for _ in range(4)), rng.dirichlet(np.ones(4)))
            rest = sum(e.weighted(j) for j in range(1, 4))
            merged = StateEnsemble((e.states[0], rest / (1 - e.priors[0])), [e.priors[0], 1 - e.priors[0]])
            assert max_confidence_value(merged, 0) == pytest.approx(max_confidence_value(e, 0), abs=1e-9)


class TestMaxConfidencePom:
    @pytest.mark.parametrize("deg", range(1, 45))
    def test_trine_family(self, deg):
        th = np.radians(deg)
        res = max_confidence_pom(trine(th))
        assert validate_pom(res.pom).passed
        assert res.per_outcome_confidence == pytest.approx((2 / 3,) * 3, abs=1e-9)
        expected = (1 - np.tan(th) ** 2) * np.diag([1.0, 0.0])
        assert np.abs(res.pom.element(INCONCLUSIVE) - expected).max() <= 1e-9
        for i in range(3):
            assert np.trace(res.pom.element(i)).real * 3 * np.cos(th) ** 2 == pytest.approx(1.0, abs=1e-9)

    def test_equatorial_trine_is_srm(self):
        e = trine(np.pi / 4)
        res = max_confidence_pom(e)
        assert res.p_inconclusive == pytest.approx(0.0, abs=1e-9)
        srm = square_root_measurement(e)
        for i in range(3):
            assert np.allclose(res.pom.element(i), srm.element(i), atol=1e-9)
        conclusive = Pom(tuple(res.pom.element(i) + (res.pom.element(INCONCLUSIVE) if i == 0 else 0) for i in range(3)))
        assert max(check_optimality(e, conclusive)) <= 1e-9

    def test_independent_pair_is_unambiguous(self):
        res = max_confidence_pom(two_pure(np.pi / 6))
        target = unamb_two_pure(np.pi / 6, 0.5)
        for label in (0, 1, INCONCLUSIVE):
            assert np.abs(res.pom.element(label) - target.pom.element(label)).max() <= 1e-9

    def test_random_ensembles_attain_limit(self, rng):
        for _ in range(20):
            dim = int(rng.integers(2, 4))
            e = StateEnsemble(tuple(random_density(rng, dim, 1 + int(rng.integers(dim))) for _ in range(3)), rng.dirichlet(np.ones(3)))
            res = max_confidence_pom(e)
            assert validate_pom(res.pom).passed
            for got, limit in zip(res.per_outcome_confidence, res.max_confidence):
                assert got == pytest.approx(limit, abs=1e-9)

    def test_scaling_leaves_confidence_unchanged(self, rng):
        e = random_pure_ensemble(rng, 2, 3)
        res = max_confidence_pom(e)
        for i in range(3):
            for c in (1.0, 0.5, 0.01):
                elements = [c * el if lab == i else el for lab, el in zip(res.pom.labels, res.pom.elements)]
                elements[-1] = np.eye(2) - sum(elements[:-1])
                scaled = Pom(tuple(elements), res.pom.labels)
                assert confidence(e, scaled, i) == pytest.approx(res.per_outcome_confidence[i], abs=1e-9)


def test_random_poms_never_exceed_limit(rng):
    for _ in range(10):
        e = random_pure_ensemble(rng, 2, 3)
        limits = [max_confidence_value(e, i) for i in range(3)]
        for _ in range(100):
            pom = Pom(tuple(random_pom_elements(rng, 2, 3)))
            for i in range(3):
                assert confidence(e, pom, i) <= limits[i] + 1e-9


class TestWeightedAverage:
    def test_trine_equatorial(self):
        e = trine(np.pi / 4)
        assert weighted_average_confidence(e, square_root_measurement(e)) == pytest.approx(2 / 3, abs=1e-12)

    def test_identity_guess(self):
        e = two_pure(0.3, 0.7)
        assert weighted_average_confidence(e, guess_pom(e)) == pytest.approx(0.7)

    def test_equals_success_probability(self, rng):
        e = random_pure_ensemble(rng, 3, 4)
        pom = Pom(tuple(random_pom_elements(rng, 3, 4)))
        assert weighted_average_confidence(e, pom) == pytest.approx(success_probability(e, pom), abs=1e-12)

    def test_random_poms_below_helstrom(self, rng):
        for _ in range(3):
            theta, p0 = rng.uniform(0.05, 0.7), rng.uniform(0.1, 0.9)
            e = two_pure(theta, p0)
            best = helstrom_two_pure(*e.kets, p0).p_correct
            for _ in range(1000):
                pom = Pom(tuple(random_pom_elements(rng, 2, 2)))
                assert weighted_average_confidence(e, pom) <= best + 1e-12

    def test_rejects_inconclusive(self):
        with pytest.raises(DiscriminationError):
            weighted_average_confidence(trine(0.3), max_confidence_pom(trine(0.3)).pom)


class TestNoSignalingOracle:
    def test_trine(self):
        assert no_signaling_confidence_oracle(trine()) == pytest.approx((2 / 3,) * 3, abs=1e-9)

    def test_independent_set(self, rng):
        e = random_pure_ensemble(rng, 3, 3)
        assert no_signaling_confidence_oracle(e) == pytest.approx((1.0,) * 3, abs=1e-9)

    def test_single_state(self):
        assert no_signaling_confidence_oracle(StateEnsemble.from_kets([[0, 1]])) == pytest.approx((1.0,))

    def test_matches_limit_on_random_qubit_ensembles(self, rng):
        for _ in range(100):
            n = int(rng.integers(3, 6))
            e = random_pure_ensemble(rng, 2, n)
            bounds = no_signaling_confidence_oracle(e)
            for i in range(n):
                assert bounds[i] == pytest.approx(max_confidence_value(e, i), abs=1e-9)

    def test_needs_pure_states(self):
        with pytest.raises(DiscriminationError):
            no_signaling_confidence_oracle(StateEnsemble((np.eye(2) / 2,), [1.0]))
