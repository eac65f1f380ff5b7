"""Prime field F_p arithmetic over scalars and length-n vectors.

Scalars are ``FieldElement`` values, vectors store plain residues in a tuple.
Python integers are unbounded, so products of residues below 2**64 never
overflow before reduction.

Every arithmetic operation reports to the ``OpCounter`` installed by the
innermost ``counting()`` scope of the current context. Scopes live in a
``ContextVar``, so concurrent runs in different threads never share one.
"""

from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from lrs.rng import SeededRng
from models.schemas import FieldParams
from utils.errors import ConfigurationError, DomainError


@dataclass
class OpCounter:
    adds: int = 0
    muls: int = 0
    invs: int = 0

    @property
    def total(self) -> int:
        return self.adds + self.muls + self.invs

    def __add__(self, other: OpCounter) -> OpCounter:
        return OpCounter(self.adds + other.adds, self.muls + other.muls, self.invs + other.invs)

    def as_record(self, prefix: str = "ops") -> dict:
        return {
            f"{prefix}.adds": self.adds,
            f"{prefix}.muls": self.muls,
            f"{prefix}.invs": self.invs,
            f"{prefix}.total": self.total,
        }


_active_counter: ContextVar[Optional[OpCounter]] = ContextVar("lrs_op_counter", default=None)


@contextmanager
def counting(counter: Optional[OpCounter] = None) -> Iterator[OpCounter]:
    """Install a counting scope; operations inside it tally into ``counter``."""
    scope = counter if counter is not None else OpCounter()
    token = _active_counter.set(scope)
    try:
        yield scope
    finally:
        _active_counter.reset(token)


@contextmanager
def uncounted() -> Iterator[None]:
    token = _active_counter.set(None)
    try:
        yield
    finally:
        _active_counter.reset(token)


def _tally(adds: int = 0, muls: int = 0, invs: int = 0) -> None:
    counter = _active_counter.get()
    if counter is not None:
        counter.adds += adds
        counter.muls += muls
        counter.invs += invs


def charge(ops: OpCounter) -> None:
    """Report operations tallied in a nested scope to the enclosing one."""
    _tally(ops.adds, ops.muls, ops.invs)


@dataclass(frozen=True)
class FieldElement:
    value: int
    p: int

    def __post_init__(self):
        if not 0 <= self.value < self.p:
            raise DomainError(f"residue {self.value} outside [0, {self.p})")

    @classmethod
    def of(cls, value: int, p: int) -> FieldElement:
        return cls(value % p, p)

    def __add__(self, other: FieldElement) -> FieldElement:
        return add(self, other)

    def __sub__(self, other: FieldElement) -> FieldElement:
        return sub(self, other)

    def __mul__(self, other: FieldElement) -> FieldElement:
        return mul(self, other)

    def __neg__(self) -> FieldElement:
        return neg(self)

    def inverse(self) -> FieldElement:
        return inv(self)

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.p})"


@dataclass(frozen=True, eq=False)
class FieldVector:
    coords: tuple[int, ...]
    p: int

    # NonZeroVector is a refinement, so equality ignores the subclass
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldVector):
            return NotImplemented
        return self.p == other.p and self.coords == other.coords

    def __hash__(self) -> int:
        return hash((self.coords, self.p))

    def __post_init__(self):
        for c in self.coords:
            if not 0 <= c < self.p:
                raise DomainError(f"coordinate {c} outside [0, {self.p})")

    @classmethod
    def of(cls, values: Iterable[int], p: int) -> FieldVector:
        return cls(tuple(v % p for v in values), p)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coords)

    def __getitem__(self, index: int) -> int:
        return self.coords[index]

    def is_nonzero(self) -> bool:
        return 0 not in self.coords

    def nonzero(self) -> NonZeroVector:
        return NonZeroVector(self.coords, self.p)

    def check_params(self, params: FieldParams) -> None:
        if self.p != params.p:
            raise ConfigurationError(f"vector modulus {self.p} does not match p={params.p}")
        if len(self.coords) != params.n:
            raise DomainError(f"vector dimension {len(self.coords)} does not match n={params.n}")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({list(self.coords)}, p={self.p})"


@dataclass(frozen=True, eq=False)
class NonZeroVector(FieldVector):
    def __post_init__(self):
        super().__post_init__()
        if 0 in self.coords:
            raise DomainError(f"zero coordinate at index {self.coords.index(0)} in a nonzero vector")


def _same_field(a: FieldElement, b: FieldElement) -> int:
    if a.p != b.p:
        raise ConfigurationError(f"mismatched moduli {a.p} and {b.p}")
    return a.p


def _same_shape(u: FieldVector, v: FieldVector) -> int:
    if u.p != v.p:
        raise ConfigurationError(f"mismatched moduli {u.p} and {v.p}")
    if len(u.coords) != len(v.coords):
        raise DomainError(f"dimension mismatch: {len(u.coords)} != {len(v.coords)}")
    return u.p


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    p = _same_field(a, b)
    _tally(adds=1)
    return FieldElement((a.value + b.value) % p, p)


def sub(a: FieldElement, b: FieldElement) -> FieldElement:
    p = _same_field(a, b)
    _tally(adds=1)
    return FieldElement((a.value - b.value) % p, p)


def neg(a: FieldElement) -> FieldElement:
    _tally(adds=1)
    return FieldElement(-a.value % a.p, a.p)


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    p = _same_field(a, b)
    _tally(muls=1)
    return FieldElement(a.value * b.value % p, p)


def inv(a: FieldElement) -> FieldElement:
    if a.value == 0:
        raise DomainError("inverse of zero")
    _tally(invs=1)
    return FieldElement(pow(a.value, -1, a.p), a.p)


def inner_product(u: FieldVector, v: FieldVector) -> FieldElement:
    p = _same_shape(u, v)
    n = len(u.coords)
    _tally(adds=max(n - 1, 0), muls=n)
    return FieldElement(sum(x * y for x, y in zip(u.coords, v.coords)) % p, p)


def vec_add(u: FieldVector, v: FieldVector) -> FieldVector:
    p = _same_shape(u, v)
    _tally(adds=len(u.coords))
    return FieldVector(tuple((x + y) % p for x, y in zip(u.coords, v.coords)), p)


def vec_sub(u: FieldVector, v: FieldVector) -> FieldVector:
    p = _same_shape(u, v)
    _tally(adds=len(u.coords))
    return FieldVector(tuple((x - y) % p for x, y in zip(u.coords, v.coords)), p)


def hadamard(u: FieldVector, v: FieldVector) -> FieldVector:
    """Coordinate-wise product."""
    p = _same_shape(u, v)
    _tally(muls=len(u.coords))
    return FieldVector(tuple(x * y % p for x, y in zip(u.coords, v.coords)), p)


def vec_inv(u: FieldVector) -> FieldVector:
    """Coordinate-wise inverse; every coordinate must be nonzero."""
    if 0 in u.coords:
        raise DomainError("inverse of zero")
    p = u.p
    _tally(invs=len(u.coords))
    return FieldVector(tuple(pow(x, -1, p) for x in u.coords), p)


def sample_uniform(rng: SeededRng, params: FieldParams) -> FieldElement:
    return FieldElement(rng.below(params.p), params.p)


def sample_nonzero(rng: SeededRng, params: FieldParams) -> FieldElement:
    # rejection from [0, p) keeps the result exactly uniform on F \ {0}
    while True:
        value = rng.below(params.p)
        if value != 0:
            return FieldElement(value, params.p)


def sample_vector(rng: SeededRng, params: FieldParams) -> FieldVector:
    return FieldVector(tuple(rng.below_many(params.p, params.n)), params.p)


def sample_nonzero_vector(rng: SeededRng, params: FieldParams) -> NonZeroVector:
    coords = rng.below_many(params.p, params.n)
    missing = [i for i, c in enumerate(coords) if c == 0]
    while missing:
        redraw = rng.below_many(params.p, len(missing))
        for i, value in zip(missing, redraw):
            coords[i] = value
        missing = [i for i in missing if coords[i] == 0]
    return NonZeroVector(tuple(coords), params.p)
