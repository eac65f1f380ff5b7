"""Inner-product leakage-resilient storage: S = <L, R> with L, R in (F \\ {0})^n."""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, Union

from lrs.field import (
    FieldElement,
    NonZeroVector,
    inner_product,
    sample_nonzero_vector,
    uncounted,
)
from lrs.rng import SeededRng
from models.schemas import FieldParams
from utils.errors import ConfigurationError, DomainError, EmptyConstraintSetError

logger = logging.getLogger(__name__)

ENCODE_MODES = ("auto", "exact", "constructive")

# above this, rejection over whole pairs (about p draws) is refused
REJECTION_MAX_P = 1 << 12

Secret = Union[FieldElement, int]


@dataclass(frozen=True)
class Encoding:
    L: NonZeroVector
    R: NonZeroVector
    params: FieldParams

    def __post_init__(self):
        for name, share in (("L", self.L), ("R", self.R)):
            if not isinstance(share, NonZeroVector):
                raise DomainError(f"share {name} must be a nonzero-coordinate vector")
            share.check_params(self.params)

    @classmethod
    def of(cls, L, R, params: FieldParams) -> "Encoding":
        return cls(NonZeroVector.of(L, params.p), NonZeroVector.of(R, params.p), params)


def _secret_value(s: Secret, params: FieldParams) -> int:
    if isinstance(s, FieldElement):
        if s.p != params.p:
            raise ConfigurationError(f"secret lives in F_{s.p}, params say p={params.p}")
        return s.value
    return s % params.p


def _check_nonempty(value: int, params: FieldParams) -> None:
    # for n = 1 the product of two nonzero residues is never 0
    if params.n == 1 and value == 0:
        raise EmptyConstraintSetError("empty constraint set: n=1 and s=0 admit no nonzero shares")


def decode(e: Encoding) -> FieldElement:
    return inner_product(e.L, e.R)


def _encode_exact(value: int, params: FieldParams, rng: SeededRng) -> Encoding:
    if params.p > REJECTION_MAX_P:
        raise ConfigurationError(
            f"rejection encode needs about p draws, p={params.p} exceeds {REJECTION_MAX_P} (use auto or constructive)"
        )
    draws = 0
    with uncounted():
        while True:
            draws += 1
            L = sample_nonzero_vector(rng, params)
            R = sample_nonzero_vector(rng, params)
            if inner_product(L, R).value == value:
                logger.debug("encode mode=exact draws=%d", draws)
                return Encoding(L, R, params)


def _encode_constructive(value: int, params: FieldParams, rng: SeededRng) -> Encoding:
    p = params.p
    while True:
        L = sample_nonzero_vector(rng, params)
        tail = sample_nonzero_vector(rng, params).coords[1:]
        rest = sum(l * r for l, r in zip(L.coords[1:], tail))
        first = pow(L.coords[0], -1, p) * (value - rest) % p
        if first != 0:
            return Encoding(L, NonZeroVector((first,) + tail, p), params)


def _encode_uniform(value: int, params: FieldParams, rng: SeededRng) -> Encoding:
    if params.p <= REJECTION_MAX_P:
        return _encode_exact(value, params, rng)
    return _encode_constructive(value, params, rng)


def encode(s: Secret, params: FieldParams, rng: SeededRng, mode: str = "auto") -> Encoding:
    """Encode secret ``s`` as a pair of nonzero-coordinate shares.

    ``exact`` rejects uniform pairs until <L, R> = s (about p draws, refused
    above REJECTION_MAX_P). ``constructive`` draws L and R_2..R_n, solves for
    R_1 and retries only when R_1 = 0; (L, R_2..R_n) -> R_1 is a bijection onto
    the constraint set, so it is exactly uniform too, at O(n) cost. ``auto``
    picks ``exact`` for small p and ``constructive`` otherwise.
    """
    value = _secret_value(s, params)
    _check_nonempty(value, params)
    if mode == "auto":
        return _encode_uniform(value, params, rng)
    if mode == "exact":
        return _encode_exact(value, params, rng)
    if mode == "constructive":
        return _encode_constructive(value, params, rng)
    raise ConfigurationError(f"unknown encode mode {mode!r}, expected one of {ENCODE_MODES}")


def sample_encoding_pair_with_secret(s: Secret, params: FieldParams, rng: SeededRng) -> Encoding:
    """Uniform sample from {(L', R') in ((F \\ {0})^n)^2 : <L', R'> = s}."""
    value = _secret_value(s, params)
    _check_nonempty(value, params)
    return _encode_uniform(value, params, rng)


def nonzero_vectors(params: FieldParams) -> Iterator[NonZeroVector]:
    for coords in itertools.product(range(1, params.p), repeat=params.n):
        yield NonZeroVector(coords, params.p)


def enumerate_constraint_set(s: Secret, params: FieldParams) -> Iterator[Encoding]:
    """Brute-force listing of every nonzero-coordinate encoding of ``s``."""
    value = _secret_value(s, params)
    p = params.p
    left = list(nonzero_vectors(params))
    for L in left:
        for R in left:
            if sum(l * r for l, r in zip(L.coords, R.coords)) % p == value:
                yield Encoding(L, R, params)
