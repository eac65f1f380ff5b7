"""The leak-free component O'.

O' hands out ((A, A~), (B, B~)) uniformly at random subject to
  C1: <A, B> + <A~, B~> = 0
  C2: every A_i != 0
  C3: every B~_i != 0
It is a local trusted sampler; nothing it computes internally is ever exposed
to a leakage query.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Protocol

from lrs.field import (
    FieldElement,
    FieldVector,
    NonZeroVector,
    inner_product,
    sample_nonzero_vector,
    sample_vector,
    uncounted,
)
from lrs.rng import SeededRng
from models.schemas import FieldParams
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleSample:
    A: FieldVector
    A_tilde: FieldVector
    B: FieldVector
    B_tilde: FieldVector
    params: FieldParams

    @property
    def alpha(self) -> FieldElement:
        with uncounted():
            return inner_product(self.A, self.B)

    def key(self) -> tuple:
        return (self.A.coords, self.A_tilde.coords, self.B.coords, self.B_tilde.coords)


class OracleSampler(Protocol):
    def sample(self, params: FieldParams, rng: SeededRng) -> OracleSample: ...


def verify(sample: OracleSample) -> bool:
    """True iff the sample satisfies C1, C2 and C3."""
    params = sample.params
    vectors = (sample.A, sample.A_tilde, sample.B, sample.B_tilde)
    if any(v.p != params.p or len(v) != params.n for v in vectors):
        return False
    if not sample.A.is_nonzero() or not sample.B_tilde.is_nonzero():
        return False
    with uncounted():
        total = inner_product(sample.A, sample.B) + inner_product(sample.A_tilde, sample.B_tilde)
    return total.value == 0


class UniformOracle:
    """Hyperplane sampler.

    A, A~, B~ and B_2..B_n are drawn uniformly and B_1 is solved from C1. For
    every fixed (A, A~, B~) the admissible B form an affine hyperplane with
    p^(n-1) points, so the joint output is uniform on the C1-C3 set.
    """

    def sample(self, params: FieldParams, rng: SeededRng) -> OracleSample:
        p = params.p
        with uncounted():
            A = sample_nonzero_vector(rng, params)
            A_tilde = sample_vector(rng, params)
            B_tilde = sample_nonzero_vector(rng, params)
            tail = sample_vector(rng, params).coords[1:]
            target = -inner_product(A_tilde, B_tilde).value
            rest = sum(a * b for a, b in zip(A.coords[1:], tail))
            first = pow(A.coords[0], -1, p) * (target - rest) % p
        return OracleSample(A, A_tilde, FieldVector((first,) + tail, p), B_tilde, params)


class ForcedOracle:
    """Replays explicit samples in order, then defers to ``fallback`` if given."""

    def __init__(self, samples: Iterable[OracleSample], fallback: Optional[OracleSampler] = None):
        self._samples = list(samples)
        for i, forced in enumerate(self._samples):
            if not verify(forced):
                raise ConfigurationError(f"forced oracle sample #{i} violates C1-C3")
        self._next = 0
        self._fallback = fallback

    @property
    def remaining(self) -> int:
        return len(self._samples) - self._next

    def sample(self, params: FieldParams, rng: SeededRng) -> OracleSample:
        if self._next < len(self._samples):
            forced = self._samples[self._next]
            self._next += 1
            if forced.params.p != params.p or forced.params.n != params.n:
                raise ConfigurationError("forced oracle sample does not match the field parameters")
            return forced
        if self._fallback is None:
            raise ConfigurationError("forced oracle exhausted and no fallback sampler configured")
        logger.debug("forced oracle exhausted, using fallback")
        return self._fallback.sample(params, rng)


def raw_space_size(params: FieldParams) -> int:
    """Number of raw (A, A~, B, B~) tuples before filtering by C1."""
    p, n = params.p, params.n
    return (p - 1) ** (2 * n) * p ** (2 * n)


def enumerate_oracle_space(params: FieldParams) -> Iterator[OracleSample]:
    """Every tuple satisfying C1-C3, found by filtering the raw space."""
    p, n = params.p, params.n
    nonzero = [NonZeroVector(c, p) for c in itertools.product(range(1, p), repeat=n)]
    anything = [FieldVector(c, p) for c in itertools.product(range(p), repeat=n)]
    for A in nonzero:
        for B in anything:
            ab = sum(a * b for a, b in zip(A.coords, B.coords))
            for A_tilde in anything:
                for B_tilde in nonzero:
                    if (ab + sum(x * y for x, y in zip(A_tilde.coords, B_tilde.coords))) % p == 0:
                        yield OracleSample(A, A_tilde, B, B_tilde, params)


uniform_oracle = UniformOracle()


def sample(params: FieldParams, rng: SeededRng) -> OracleSample:
    return uniform_oracle.sample(params, rng)
