from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from experiments.stats import uniformity_pvalue
from lrs.field import (
    FieldElement,
    FieldVector,
    NonZeroVector,
    OpCounter,
    add,
    charge,
    counting,
    hadamard,
    inner_product,
    inv,
    mul,
    neg,
    sample_nonzero,
    sample_nonzero_vector,
    sample_uniform,
    sample_vector,
    sub,
    uncounted,
    vec_add,
    vec_inv,
    vec_sub,
)
from lrs.primes import is_prime
from lrs.rng import SeededRng
from models.schemas import FieldParams
from utils.errors import ConfigurationError, DomainError

PRIMES = [5, 11, 101, 2 ** 31 - 1]


def el(value, p=11):
    return FieldElement(value, p)


@st.composite
def triples(draw):
    p = draw(st.sampled_from(PRIMES))
    a, b, c = (draw(st.integers(0, p - 1)) for _ in range(3))
    return FieldElement(a, p), FieldElement(b, p), FieldElement(c, p)


@pytest.mark.parametrize("a, b, p, expected", [(9, 4, 11, 2), (0, 7, 11, 7), (4, 4, 5, 3)])
def test_add_examples(a, b, p, expected):
    assert add(el(a, p), el(b, p)) == el(expected, p)


@pytest.mark.parametrize("a, b, expected", [(6, 5, 8), (1, 9, 9)])
def test_mul_examples(a, b, expected):
    assert mul(el(a), el(b)) == el(expected)


@pytest.mark.parametrize("a, expected", [(3, 4), (1, 1), (9, 5)])
def test_inv_examples(a, expected):
    assert inv(el(a)) == el(expected)


def test_inverse_of_zero():
    with pytest.raises(DomainError, match="inverse of zero"):
        inv(el(0))
    with pytest.raises(DomainError, match="inverse of zero"):
        vec_inv(FieldVector((3, 0), 11))


def test_sub_and_neg_wrap():
    assert sub(el(0), el(1)) == el(10)
    assert neg(el(5)) + el(5) == el(0)
    assert neg(el(0)) == el(0)


def test_mismatched_moduli():
    with pytest.raises(ConfigurationError):
        add(el(1, 11), el(1, 13))
    with pytest.raises(ConfigurationError):
        hadamard(FieldVector((1,), 11), FieldVector((1,), 13))


@pytest.mark.parametrize(
    "u, v, expected",
    [((2, 3), (1, 4), 3), ((1, 1), (0, 0), 0), ((1, 2), (5, 1), 7)],
)
def test_inner_product_examples(u, v, expected):
    assert inner_product(FieldVector(u, 11), FieldVector(v, 11)) == el(expected)


def test_inner_product_dimension_mismatch():
    with pytest.raises(DomainError, match="dimension mismatch"):
        inner_product(FieldVector((1, 2), 11), FieldVector((1, 2, 3), 11))


@pytest.mark.parametrize("n", [1, 2, 7, 64])
def test_inner_product_op_count(n):
    u = FieldVector.of(range(1, n + 1), 101)
    with counting() as ops:
        inner_product(u, u)
    assert (ops.muls, ops.adds, ops.invs) == (n, n - 1, 0)


def test_vector_ops_count_per_coordinate():
    u, v = FieldVector((1, 2, 3), 11), FieldVector((4, 5, 6), 11)
    with counting() as ops:
        assert vec_add(u, v) == FieldVector((5, 7, 9), 11)
        assert vec_sub(u, v) == FieldVector((8, 8, 8), 11)
        assert hadamard(u, v) == FieldVector((4, 10, 7), 11)
        assert vec_inv(u) == FieldVector((1, 6, 4), 11)
    assert ops == OpCounter(adds=6, muls=3, invs=3)


def test_uncounted_and_charge():
    with counting() as outer:
        with uncounted():
            mul(el(2), el(3))
        with counting() as inner:
            add(el(1), el(1))
        assert outer.total == 0
        charge(inner)
    assert outer == OpCounter(adds=1)


def test_counter_arithmetic():
    a, b = OpCounter(1, 2, 3), OpCounter(1, 1, 1)
    assert a + b == OpCounter(2, 3, 4)
    assert (a + b).total == 9
    assert a.as_record("x") == {"x.adds": 1, "x.muls": 2, "x.invs": 3, "x.total": 6}


def test_nonzero_vector_refinement():
    with pytest.raises(DomainError, match="index 1"):
        NonZeroVector((3, 0), 11)
    assert NonZeroVector((3, 4), 11) == FieldVector((3, 4), 11)
    assert FieldVector((3, 4), 11).nonzero() == NonZeroVector((3, 4), 11)
    with pytest.raises(DomainError):
        FieldVector((11,), 11)


@settings(max_examples=500, deadline=None)
@given(triples())
def test_field_axioms(triple):
    a, b, c = triple
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a - a == FieldElement(0, a.p)
    if a.value:
        assert a * a.inverse() == FieldElement(1, a.p)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(PRIMES), st.data())
def test_inner_product_symmetric(p, data):
    n = data.draw(st.integers(1, 8))
    u = FieldVector(tuple(data.draw(st.lists(st.integers(0, p - 1), min_size=n, max_size=n))), p)
    v = FieldVector(tuple(data.draw(st.lists(st.integers(0, p - 1), min_size=n, max_size=n))), p)
    assert inner_product(u, v) == inner_product(v, u)


def test_large_modulus_products():
    p = 18446744073709551557  # largest prime below 2**64
    assert is_prime(p)
    a = FieldElement(p - 1, p)
    assert a * a == FieldElement(1, p)


@pytest.mark.parametrize("candidate, expected", [(2, True), (9, False), (65537, True), (2 ** 31 - 1, True), (3215031751, False)])
def test_is_prime(candidate, expected):
    assert is_prime(candidate) is expected


def test_sampling_is_reproducible():
    params = FieldParams(p=11, n=2)
    first = [sample_uniform(SeededRng(7, "x"), params) for _ in range(3)]
    again = [sample_uniform(SeededRng(7, "x"), params) for _ in range(3)]
    assert first == again
    assert sample_vector(SeededRng(7, "x"), params) == sample_vector(SeededRng(7, "x"), params)
    assert sample_vector(SeededRng(7, "x"), params) != sample_vector(SeededRng(7, "y"), params)


def test_streams_depend_only_on_seed_and_label():
    a = SeededRng(3).stream("oracle").stream("chunk-0")
    b = SeededRng(3, "root/oracle").stream("chunk-0")
    assert a.below_many(2 ** 40, 8) == b.below_many(2 ** 40, 8)


def test_sample_nonzero_never_zero(rng):
    params = FieldParams(p=5, n=1)
    assert all(sample_nonzero(rng, params).value != 0 for _ in range(20_000))
    vectors = [sample_nonzero_vector(rng, FieldParams(p=5, n=8, relaxed=True)) for _ in range(2_000)]
    assert all(v.is_nonzero() for v in vectors)


def test_sample_nonzero_uniform(rng):
    params = FieldParams(p=11, n=1)
    counts = Counter(sample_nonzero(rng, params).value for _ in range(50_000))
    assert uniformity_pvalue(counts, range(1, 11)) > 1e-4


@pytest.mark.slow
def test_sample_nonzero_uniform_full_scale():
    draws = SeededRng(11, "nonzero").below_many(11, 1_100_000)
    counts = Counter(d for d in draws if d)
    assert uniformity_pvalue(counts, range(1, 11)) > 1e-6
