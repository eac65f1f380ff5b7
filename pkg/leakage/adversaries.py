from typing import Any, Callable, Optional, Sequence

from leakage.functions import BitSelection, FieldProjection, ParityOfSubset, parse_descriptor
from leakage.game import LeakageQuery
from lrs.rng import SeededRng
from models.schemas import QueryRecord
from utils.errors import ParseError


class SilentAdversary:
    """Makes no queries and outputs its a-priori guess."""

    def __init__(self, prior: Any = None):
        self.prior = prior

    def next_query(self, log: list[QueryRecord]) -> Optional[LeakageQuery]:
        return None

    def output(self, log: list[QueryRecord]) -> Any:
        return self.prior


class ScriptedAdversary:
    """Issues a fixed list of queries; outputs the tuple of answers (None when refused)."""

    def __init__(self, queries: Sequence[LeakageQuery]):
        self.queries = list(queries)

    def next_query(self, log: list[QueryRecord]) -> Optional[LeakageQuery]:
        if len(log) < len(self.queries):
            return self.queries[len(log)]
        return None

    def output(self, log: list[QueryRecord]) -> Any:
        return tuple(record.answer for record in log)


class AdaptiveAdversary:
    """Delegates query choice to ``policy``, which sees every answer so far."""

    def __init__(
        self,
        policy: Callable[[list[QueryRecord]], Optional[LeakageQuery]],
        decide: Optional[Callable[[list[QueryRecord]], Any]] = None,
    ):
        self.policy = policy
        self.decide = decide

    def next_query(self, log: list[QueryRecord]) -> Optional[LeakageQuery]:
        return self.policy(log)

    def output(self, log: list[QueryRecord]) -> Any:
        if self.decide is not None:
            return self.decide(log)
        return tuple(record.answer for record in log)


class RandomAdversary:
    """Random queries of random width, deliberately overshooting the budget."""

    def __init__(self, rng: SeededRng, parts: int, part_bits: int, coord_bits: int, lam: int, queries: int):
        self.rng = rng
        self.parts = parts
        self.part_bits = part_bits
        self.coord_bits = coord_bits
        self.lam = lam
        self.queries = queries

    def _function(self):
        kind = self.rng.below(3)
        if kind == 0:
            width = 1 + self.rng.below(self.lam + 2)
            return BitSelection(positions=tuple(self.rng.below_many(self.part_bits, width)))
        if kind == 1:
            subset = 1 + self.rng.below(self.part_bits)
            return ParityOfSubset(indices=tuple(self.rng.below_many(self.part_bits, subset)))
        coordinates = self.part_bits // self.coord_bits
        return FieldProjection(coordinate=self.rng.below(coordinates), bits=1 + self.rng.below(self.coord_bits))

    def next_query(self, log: list[QueryRecord]) -> Optional[LeakageQuery]:
        if len(log) >= self.queries:
            return None
        return LeakageQuery(part=1 + self.rng.below(self.parts), function=self._function())

    def output(self, log: list[QueryRecord]) -> Any:
        return tuple(record.answer for record in log)


def parse_adversary(text: str) -> ScriptedAdversary:
    """Parse ``[part@]descriptor;...``, e.g. ``1@bit-select:0,2;2@parity:0,1``; part defaults to 1."""
    queries = []
    column = 1
    for chunk in text.split(";"):
        if not chunk.strip():
            column += len(chunk) + 1
            continue
        part_text, sep, descriptor = chunk.partition("@")
        if sep:
            try:
                part = int(part_text)
            except ValueError:
                raise ParseError(f"bad part index {part_text!r}", 1, column, "<adversary>")
            offset = column + len(part_text) + 1
        else:
            part, descriptor, offset = 1, chunk, column
        queries.append(LeakageQuery(part=part, function=parse_descriptor(descriptor, 1, offset)))
        column += len(chunk) + 1
    return ScriptedAdversary(queries)
