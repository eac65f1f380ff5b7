from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from experiments.stats import uniformity_pvalue
from lrs.encoding import (
    REJECTION_MAX_P,
    Encoding,
    decode,
    encode,
    enumerate_constraint_set,
    sample_encoding_pair_with_secret,
)
from lrs.field import FieldElement, NonZeroVector
from lrs.rng import SeededRng
from models.schemas import FieldParams, RunConfig
from utils.errors import ConfigurationError, DomainError, EmptyConstraintSetError


def test_field_params_regime():
    assert FieldParams(p=11, n=2).mode == "standard"
    with pytest.raises(ConfigurationError, match="p >= 4n"):
        FieldParams(p=5, n=2)
    assert FieldParams(p=5, n=2, relaxed=True).mode == "relaxed"
    with pytest.raises(ConfigurationError, match="not prime"):
        FieldParams(p=15, n=1)
    with pytest.raises(ConfigurationError):
        FieldParams(p=11, n=0)
    assert FieldParams(p=11, n=1).coord_bits == 4


def test_run_config_checks_every_dimension():
    config = RunConfig(p=65537, n=64, n_values=(64, 128, 256))
    assert config.dimensions() == (64, 128, 256)
    assert config.as_record()["config.n_values"] == "64,128,256"
    with pytest.raises(ConfigurationError):
        RunConfig(p=101, n=8, n_values=(8, 64))
    with pytest.raises(ConfigurationError, match="seed"):
        RunConfig(p=11, n=2, seed=-1)


@pytest.mark.parametrize(
    "L, R, expected",
    [((2, 3), (1, 4), 3), ((1, 1), (1, 1), 2), ((1, 5), (9, 1), 3)],
)
def test_decode_examples(p11n2, L, R, expected):
    assert decode(Encoding.of(L, R, p11n2)) == FieldElement(expected, 11)


def test_encoding_rejects_zero_coordinates(p11n2):
    with pytest.raises(DomainError):
        Encoding.of((0, 3), (1, 4), p11n2)
    with pytest.raises(DomainError):
        Encoding.of((1, 3, 4), (1, 4, 1), p11n2)


def test_encode_lands_in_constraint_set(p5n1, rng):
    allowed = {((1,), (3,)), ((2,), (4,)), ((3,), (1,)), ((4,), (2,))}
    assert {(e.L.coords, e.R.coords) for e in enumerate_constraint_set(3, p5n1)} == allowed
    for _ in range(500):
        enc = encode(3, p5n1, rng)
        assert (enc.L.coords, enc.R.coords) in allowed


def test_encode_uniform_on_constraint_set(p5n1, rng):
    counts = Counter((e.L.coords, e.R.coords) for e in (encode(3, p5n1, rng) for _ in range(20_000)))
    support = [(e.L.coords, e.R.coords) for e in enumerate_constraint_set(3, p5n1)]
    assert uniformity_pvalue(counts, support) > 1e-4


@pytest.mark.parametrize("mode", ["auto", "exact", "constructive"])
@pytest.mark.parametrize("p, n", [(11, 2), (101, 8), (65537, 64)])
def test_roundtrip(mode, p, n, rng):
    params = FieldParams(p=p, n=n)
    if mode == "exact" and p > REJECTION_MAX_P:
        with pytest.raises(ConfigurationError, match="rejection encode"):
            encode(1, params, rng, mode=mode)
        return
    for s in range(1, 40):
        enc = encode(s, params, rng, mode=mode)
        assert decode(enc) == FieldElement(s % p, p)
        assert enc.L.is_nonzero() and enc.R.is_nonzero()


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6), st.integers(min_value=2, max_value=6))
def test_constructive_roundtrip_any_secret(secret, n):
    params = FieldParams(p=101, n=n)
    enc = encode(secret, params, SeededRng(secret, "roundtrip"), mode="constructive")
    assert decode(enc).value == secret % 101


def test_large_prime_encodes_without_rejection(rng):
    params = FieldParams(p=2147483647, n=2)
    enc = encode(3, params, rng)
    assert decode(enc).value == 3
    assert enc.L.is_nonzero() and enc.R.is_nonzero()
    assert decode(sample_encoding_pair_with_secret(5, params, rng)).value == 5
    with pytest.raises(ConfigurationError, match="rejection encode"):
        encode(3, params, rng, mode="exact")


def test_constructive_uniform_on_constraint_set(rng):
    params = FieldParams(p=5, n=2, relaxed=True)
    support = [(e.L.coords, e.R.coords) for e in enumerate_constraint_set(3, params)]
    counts = Counter()
    for _ in range(30_000):
        enc = encode(3, params, rng, mode="constructive")
        counts[(enc.L.coords, enc.R.coords)] += 1
    assert set(counts) == set(support)
    assert uniformity_pvalue(counts, support) > 1e-4


def test_empty_constraint_set(p5n1, rng):
    with pytest.raises(EmptyConstraintSetError, match="empty constraint set"):
        sample_encoding_pair_with_secret(0, p5n1, rng)
    with pytest.raises(EmptyConstraintSetError):
        encode(FieldElement(0, 5), p5n1, rng)


def test_zero_secret_with_two_coordinates(rng):
    params = FieldParams(p=5, n=2, relaxed=True)
    enc = sample_encoding_pair_with_secret(0, params, rng)
    assert decode(enc).value == 0
    assert isinstance(enc.L, NonZeroVector) and isinstance(enc.R, NonZeroVector)


def test_secret_from_other_field(p11n2, rng):
    with pytest.raises(ConfigurationError):
        encode(FieldElement(3, 13), p11n2, rng)
    with pytest.raises(ConfigurationError, match="encode mode"):
        encode(3, p11n2, rng, mode="fast")


@pytest.mark.slow
def test_pair_with_secret_uniform_p11(p11n2):
    rng = SeededRng(5, "pair-uniformity")
    support = [(e.L.coords, e.R.coords) for e in enumerate_constraint_set(3, p11n2)]
    counts = Counter()
    for _ in range(200_000):
        enc = sample_encoding_pair_with_secret(3, p11n2, rng)
        counts[(enc.L.coords, enc.R.coords)] += 1
    assert uniformity_pvalue(counts, support) > 1e-6
