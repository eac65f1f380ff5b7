"""The lambda-leakage game.

Memory parts M_1..M_l are bit-strings of equal length c. An adaptive adversary
sends queries (x, f) to the leakage oracle, which answers f(M_x) as long as the
total number of bits retrieved from part x stays within lambda. Encoded shares
are kept in separate parts so each leaks independently.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Protocol

from experiments.stats import bootstrap_tv_interval, total_variation
from leakage.functions import LeakageFunction
from lrs.encoding import Encoding, Secret, encode
from lrs.field import NonZeroVector
from lrs.rng import SeededRng
from models.schemas import DistinguishingReport, FieldParams, QueryRecord
from utils.errors import BudgetExceededError, DomainError, QueryCapExceededError

logger = logging.getLogger(__name__)

DEFAULT_MAX_QUERIES = 1000


@dataclass(frozen=True)
class MemoryParts:
    parts: tuple[str, ...]
    coord_bits: int = 1

    def __post_init__(self):
        if not self.parts:
            raise DomainError("a leakage game needs at least one memory part")
        if len({len(part) for part in self.parts}) != 1:
            raise DomainError("all memory parts must have the same length")
        if any(ch not in "01" for part in self.parts for ch in part):
            raise DomainError("memory parts must be bit-strings")

    @property
    def count(self) -> int:
        return len(self.parts)

    @property
    def part_bits(self) -> int:
        return len(self.parts[0])


@dataclass(frozen=True)
class LeakageQuery:
    part: int
    function: LeakageFunction

    @property
    def output_bits(self) -> int:
        return self.function.width


@dataclass
class Budget:
    lam: int
    consumed: list[int]

    @classmethod
    def fresh(cls, lam: int, parts: int) -> "Budget":
        if lam < 0:
            raise DomainError(f"leakage budget must be >= 0, got {lam}")
        return cls(lam, [0] * parts)

    def allows(self, part: int, bits: int) -> bool:
        return self.consumed[part - 1] + bits <= self.lam


class LeakageOracle:
    """Answers f(M_x) while no part ever gives away more than lambda bits."""

    def __init__(self, memory: MemoryParts, lam: int):
        self.memory = memory
        self.budget = Budget.fresh(lam, memory.count)

    def query(self, q: LeakageQuery) -> str:
        if not 1 <= q.part <= self.memory.count:
            raise DomainError(f"part index {q.part} outside 1..{self.memory.count}")
        width = q.output_bits
        if width > self.budget.lam or not self.budget.allows(q.part, width):
            raise BudgetExceededError(q.part, self.budget.consumed[q.part - 1], width, self.budget.lam)
        answer = q.function.evaluate(self.memory.parts[q.part - 1], self.memory.coord_bits)
        if len(answer) != width:
            raise DomainError(f"{q.function.describe()} declared {width} bits, produced {len(answer)}")
        self.budget.consumed[q.part - 1] += width
        return answer


def query(oracle: LeakageOracle, q: LeakageQuery) -> str:
    return oracle.query(q)


class AdversaryStrategy(Protocol):
    def next_query(self, log: list[QueryRecord]) -> Optional[LeakageQuery]: ...

    def output(self, log: list[QueryRecord]) -> Any: ...


@dataclass
class GameResult:
    output: Any
    log: list[QueryRecord] = field(default_factory=list)
    consumed: list[int] = field(default_factory=list)


def run_game(
    memories: MemoryParts,
    adversary: AdversaryStrategy,
    lam: int,
    max_queries: int = DEFAULT_MAX_QUERIES,
) -> GameResult:
    """Drive the adaptive query loop; answer i is logged before query i+1 is requested."""
    oracle = LeakageOracle(memories, lam)
    log: list[QueryRecord] = []
    clock = 0
    while True:
        q = adversary.next_query(log)
        if q is None:
            break
        if len(log) >= max_queries:
            raise QueryCapExceededError(max_queries, log)
        clock += 1
        try:
            answer = oracle.query(q)
            refused = False
        except BudgetExceededError as exc:
            logger.debug("leakage refusal part=%d requested=%d consumed=%d", exc.part, exc.requested, exc.consumed)
            answer, refused = None, True
        log.append(QueryRecord(
            index=len(log) + 1,
            seq=clock,
            part=q.part,
            descriptor=q.function.describe(),
            width=q.output_bits,
            answer=answer,
            refused=refused,
            consumed=oracle.budget.consumed[q.part - 1],
        ))
    return GameResult(adversary.output(log), log, list(oracle.budget.consumed))


def audit_budget(log: list[QueryRecord], lam: int, parts: int) -> bool:
    """Recompute retrieved bits from the log alone; True iff no part exceeds lambda."""
    retrieved = [0] * parts
    last_seq = 0
    for record in log:
        if record.seq <= last_seq:
            return False
        last_seq = record.seq
        if record.refused:
            if record.answer is not None:
                return False
            continue
        if record.answer is None or len(record.answer) != record.width:
            return False
        retrieved[record.part - 1] += len(record.answer)
    return all(bits <= lam for bits in retrieved)


def format_log(log: list[QueryRecord]) -> list[str]:
    """One JSON line per query: index, part, descriptor, width, answer, cumulative budget."""
    return [record.model_dump_json() for record in log]


def serialize_shares_to_memory(enc: Encoding) -> MemoryParts:
    """L goes to part 1 and R to part 2, fixed-width big-endian per coordinate."""
    width = enc.params.coord_bits
    return MemoryParts(
        parts=(
            "".join(format(c, f"0{width}b") for c in enc.L.coords),
            "".join(format(c, f"0{width}b") for c in enc.R.coords),
        ),
        coord_bits=width,
    )


def parse_shares(memory: MemoryParts, params: FieldParams) -> Encoding:
    width = params.coord_bits
    if memory.count != 2 or memory.part_bits != width * params.n:
        raise DomainError("memory layout does not match the field parameters")

    def coords(bits: str) -> tuple[int, ...]:
        return tuple(int(bits[i:i + width], 2) for i in range(0, len(bits), width))

    return Encoding(
        NonZeroVector(coords(memory.parts[0]), params.p),
        NonZeroVector(coords(memory.parts[1]), params.p),
        params,
    )


def lemma1_budget(params: FieldParams) -> int:
    """Default lambda: floor(0.49 * log2 |F^n| - 1), never negative."""
    return max(0, math.floor(0.49 * params.n * math.log2(params.p) - 1))


def estimate_distinguishing_advantage(
    params: FieldParams,
    adversary_factory: Callable[[], AdversaryStrategy],
    secret0: Secret,
    secret1: Secret,
    samples: int,
    rng: SeededRng,
    lam: Optional[int] = None,
) -> DistinguishingReport:
    """Monte Carlo estimate of Delta(A <-> Enc(S0); A <-> Enc(S1)) for one adversary."""
    budget = lemma1_budget(params) if lam is None else lam
    histograms = []
    for label, secret in (("s0", secret0), ("s1", secret1)):
        stream = rng.stream(f"distinguish-{label}")
        counts: Counter = Counter()
        for _ in range(samples):
            memory = serialize_shares_to_memory(encode(secret, params, stream))
            counts[_hashable(run_game(memory, adversary_factory(), budget).output)] += 1
        histograms.append(counts)
    estimate = total_variation(histograms[0], histograms[1])
    low, high = bootstrap_tv_interval(histograms[0], histograms[1], rng.stream("distinguish-bootstrap"))
    logger.info("distinguishing samples=%d lambda=%d tv=%.5f", samples, budget, estimate)
    return DistinguishingReport(
        samples=samples,
        lambda_bits=budget,
        lemma1_lambda=lemma1_budget(params),
        estimate=estimate,
        ci_low=low,
        ci_high=high,
    )


def _hashable(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_hashable(v) for v in value)
    return value
