"""Leakage function descriptors.

The serializable family covers the CLI and replayable logs; ``Callback``
wraps an arbitrary in-process function for property tests.
"""

from typing import Annotated, Callable, Literal, Union

from pydantic import BaseModel, ConfigDict, Field

from utils.errors import DomainError, ParseError


def _check_bits(bits: str) -> None:
    if any(ch not in "01" for ch in bits):
        raise DomainError("memory contents must be a bit-string")


class BitSelection(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["bit-select"] = "bit-select"
    positions: tuple[int, ...]

    @property
    def width(self) -> int:
        return len(self.positions)

    def evaluate(self, bits: str, coord_bits: int) -> str:
        if any(not 0 <= i < len(bits) for i in self.positions):
            raise DomainError(f"bit position out of range for a {len(bits)}-bit part")
        return "".join(bits[i] for i in self.positions)

    def describe(self) -> str:
        return f"bit-select:{','.join(str(i) for i in self.positions)}"


class ParityOfSubset(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["parity"] = "parity"
    indices: tuple[int, ...]

    @property
    def width(self) -> int:
        return 1

    def evaluate(self, bits: str, coord_bits: int) -> str:
        if any(not 0 <= i < len(bits) for i in self.indices):
            raise DomainError(f"parity index out of range for a {len(bits)}-bit part")
        return str(sum(bits[i] == "1" for i in set(self.indices)) % 2)

    def describe(self) -> str:
        return f"parity:{','.join(str(i) for i in self.indices)}"


class FieldProjection(BaseModel):
    """Low ``bits`` bits of one serialized coordinate."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["proj"] = "proj"
    coordinate: int
    bits: int

    @property
    def width(self) -> int:
        return self.bits

    def evaluate(self, bits: str, coord_bits: int) -> str:
        if self.bits < 0 or self.bits > coord_bits:
            raise DomainError(f"projection of {self.bits} bits from a {coord_bits}-bit coordinate")
        start = self.coordinate * coord_bits
        if self.coordinate < 0 or start + coord_bits > len(bits):
            raise DomainError(f"coordinate {self.coordinate} out of range")
        if self.bits == 0:
            return ""
        return bits[start:start + coord_bits][-self.bits:]

    def describe(self) -> str:
        return f"proj:{self.coordinate}:{self.bits}"


class Callback(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["callback"] = "callback"
    fn: Callable[[str], str]
    output_bits: int
    name: str = "callback"

    @property
    def width(self) -> int:
        return self.output_bits

    def evaluate(self, bits: str, coord_bits: int) -> str:
        answer = self.fn(bits)
        if not isinstance(answer, str) or len(answer) != self.output_bits:
            raise DomainError(f"callback {self.name} declared {self.output_bits} bits, returned {answer!r}")
        _check_bits(answer)
        return answer

    def describe(self) -> str:
        return f"callback:{self.name}"


LeakageFunction = Annotated[
    Union[BitSelection, ParityOfSubset, FieldProjection, Callback],
    Field(discriminator="kind"),
]


def _int_list(text: str, line: int, column: int) -> tuple[int, ...]:
    if not text:
        return ()
    values = []
    offset = column
    for token in text.split(","):
        try:
            values.append(int(token))
        except ValueError:
            raise ParseError(f"expected an integer, got {token!r}", line, offset, "<descriptor>")
        offset += len(token) + 1
    return tuple(values)


def parse_descriptor(text: str, line: int = 1, column: int = 1):
    """Parse ``bit-select:0,2``, ``parity:0,1,3`` or ``proj:<coordinate>:<bits>``."""
    kind, sep, args = text.strip().partition(":")
    if not sep:
        raise ParseError(f"missing ':' in leakage descriptor {text!r}", line, column, "<descriptor>")
    arg_column = column + len(kind) + 1
    if kind == "bit-select":
        return BitSelection(positions=_int_list(args, line, arg_column))
    if kind == "parity":
        return ParityOfSubset(indices=_int_list(args, line, arg_column))
    if kind == "proj":
        values = _int_list(args.replace(":", ","), line, arg_column)
        if len(values) != 2:
            raise ParseError("proj takes <coordinate>:<bits>", line, arg_column, "<descriptor>")
        return FieldProjection(coordinate=values[0], bits=values[1])
    raise ParseError(f"unknown leakage function kind {kind!r}", line, column, "<descriptor>")
