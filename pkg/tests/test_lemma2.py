from collections import Counter
from fractions import Fraction

import pytest

from experiments import lemma2
from experiments.lemma2 import (
    ExactDistribution,
    ExperimentOutcome,
    compare_distributions,
    exact_distribution_reconstruct,
    exact_distribution_refresh,
    exp_reconstruct_refresh,
    exp_refresh,
    marginal_summary,
    monte_carlo_lemma2,
    verify_lemma2,
)
from experiments.stats import total_variation
from lrs.encoding import Encoding, nonzero_vectors
from lrs.rng import SeededRng
from models.schemas import FieldParams
from protocols.reconstructor import check_reconstruction_constraints
from protocols.refresh import views_consistent
from utils.errors import EnumerationTooLargeError


@pytest.fixture
def small(p5n1):
    return Encoding.of((2,), (4,), p5n1)


def test_exact_refresh_conditions_on_acceptance(small):
    dist = exact_distribution_refresh(small)
    assert dist.total() == 1
    # 80 C1-C3 tuples, 16 of them hit R' = 0 at step 4
    assert dist.weight == 64
    assert len(dist) == 64
    assert set(dist.probabilities.values()) == {Fraction(1, 64)}


def test_exact_reconstruct_distribution(small):
    dist = exact_distribution_reconstruct(small)
    assert dist.total() == 1
    # 4 encodings of 3 times 16 choices of (V, V~)
    assert dist.weight == 64


def test_all_small_inputs_match(p5n1):
    for L in nonzero_vectors(p5n1):
        for R in nonzero_vectors(p5n1):
            report = verify_lemma2(Encoding(L, R, p5n1))
            assert report.equal, report.first_discrepancy
            assert report.outcomes_refresh == report.outcomes_reconstruct
            assert report.raw_tuples == 400


def test_p11_instance_matches():
    enc = Encoding.of((3,), (7,), FieldParams(p=11, n=1))
    report = verify_lemma2(enc, threads=2)
    assert report.equal
    assert report.accepted_tuples == report.outcomes_refresh


def test_marginals(small):
    dist = exact_distribution_refresh(small)
    a = marginal_summary(dist, "A")
    assert a["uniform"] and a["support"] == 4
    for name in ("L_prime", "R_prime", "V", "V_tilde"):
        assert marginal_summary(dist, name)["uniform"]
    # B is not uniform once acceptance is conditioned on
    b = dist.marginal("B")
    assert b[(0,)] == Fraction(1, 4)
    assert all(b[(value,)] == Fraction(3, 16) for value in range(1, 5))
    assert not marginal_summary(dist, "B")["uniform"]


def test_outcomes_are_consistent(small):
    for key in exact_distribution_reconstruct(small).probabilities:
        L_prime, R_prime, view_L_key, view_R_key = key
        assert (L_prime[0] * R_prime[0]) % 5 == 3
        assert view_L_key[0] == (2,) and view_R_key[0] == (4,)


def test_sharding_does_not_change_the_result(small):
    serial = exact_distribution_refresh(small)
    sharded = exact_distribution_refresh(small, shards=3, threads=2)
    assert compare_distributions(serial, sharded) is None


def test_compare_reports_first_difference():
    left = ExactDistribution({("a",): Fraction(1, 2), ("b",): Fraction(1, 2)}, 2)
    right = ExactDistribution({("a",): Fraction(1)}, 1)
    assert compare_distributions(left, right).startswith("outcome=('a',)")


def test_enumeration_guard(p11n2):
    enc = Encoding.of((2, 3), (1, 4), p11n2)
    with pytest.raises(EnumerationTooLargeError) as info:
        verify_lemma2(enc)
    assert info.value.size == 10 ** 4 * 11 ** 4
    assert info.value.exit_status == 3
    with pytest.raises(EnumerationTooLargeError):
        exact_distribution_reconstruct(enc, limit=10 ** 3)


def test_single_experiments_produce_valid_outcomes(p11n2, rng):
    enc = Encoding.of((2, 3), (1, 4), p11n2)
    for experiment in (exp_refresh, exp_reconstruct_refresh):
        outcome = experiment(enc, rng)
        new = Encoding(outcome.L_prime.nonzero(), outcome.R_prime.nonzero(), p11n2)
        assert views_consistent(enc, new, outcome.view_L, outcome.view_R)
        assert check_reconstruction_constraints(outcome.view_L, outcome.view_R)


def test_empirical_refresh_matches_exact(small):
    exact = exact_distribution_refresh(small)
    expected = {key: int(prob * exact.weight) for key, prob in exact.probabilities.items()}
    rng = SeededRng(17, "conditioning")
    observed = Counter(exp_refresh(small, rng).key() for _ in range(8_000))
    assert set(observed) <= set(expected)
    assert total_variation(observed, expected) < 0.1


def test_monte_carlo_small(small):
    report = monte_carlo_lemma2(small, 10_000, SeededRng(3, "mc"))
    assert report.tv_full < 0.1 and report.baseline_full < 0.1
    assert all(tv < 0.05 for tv in report.marginal_tv.values())
    assert set(report.joint_tv) == {"A,B", "A_tilde,B_tilde", "L_prime,V", "R_prime,V_tilde"}
    assert all(tv < 0.1 for tv in report.joint_tv.values())


def test_monte_carlo_catches_broken_joint_law(small, monkeypatch):
    honest = lemma2.exp_reconstruct_refresh

    def spliced(enc, rng):
        # each half is right on its own, but A and B no longer come from one run
        first, second = honest(enc, rng), honest(enc, rng)
        return ExperimentOutcome(first.L_prime, first.R_prime, first.view_L, second.view_R)

    monkeypatch.setattr(lemma2, "exp_reconstruct_refresh", spliced)
    report = monte_carlo_lemma2(small, 10_000, SeededRng(3, "mc"))
    assert report.marginal_tv["A"] < 0.05 and report.marginal_tv["B"] < 0.05
    assert report.joint_tv["A,B"] > 3 * report.joint_baseline["A,B"]
    assert not report.passed


def test_monte_carlo_independent_of_threads(small, monkeypatch):
    monkeypatch.setattr(lemma2, "MC_CHUNK", 500)
    serial = monte_carlo_lemma2(small, 1_500, SeededRng(8, "mc"), threads=1)
    threaded = monte_carlo_lemma2(small, 1_500, SeededRng(8, "mc"), threads=3)
    assert serial == threaded


@pytest.mark.slow
def test_monte_carlo_p11_n2(p11n2):
    rng = SeededRng(11, "mc-p11")
    enc = Encoding.of((2, 3), (1, 4), p11n2)
    report = monte_carlo_lemma2(enc, 100_000, rng, threads=2)
    assert report.tv_full <= 3 * report.baseline_full
