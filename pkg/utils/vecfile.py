"""Line-oriented vector files.

A block is a header ``lrs-vec v1 p=<p> n=<n>`` (optionally `` name=<label>``)
followed by n lines holding one decimal coordinate each. A file holds one or
more blocks; blank lines and ``#`` comments are ignored.
"""

from pathlib import Path
from typing import Optional, Sequence

from lrs.field import FieldVector
from utils.errors import ParseError

MAGIC = "lrs-vec"
VERSION = "v1"


def format_vector(vec: FieldVector, name: Optional[str] = None) -> str:
    header = f"{MAGIC} {VERSION} p={vec.p} n={len(vec)}"
    if name:
        header += f" name={name}"
    return "\n".join([header, *(str(c) for c in vec.coords)]) + "\n"


def format_blocks(blocks: Sequence[tuple[Optional[str], FieldVector]]) -> str:
    return "".join(format_vector(vec, name) for name, vec in blocks)


def write_vectors(path: Path, blocks: Sequence[tuple[Optional[str], FieldVector]]) -> None:
    path.write_text(format_blocks(blocks), encoding="utf-8")


def _parse_header(line: str, lineno: int, source: str) -> tuple[int, int, Optional[str]]:
    tokens = line.split()
    if len(tokens) < 4 or tokens[0] != MAGIC:
        raise ParseError(f"expected '{MAGIC} {VERSION} p=<p> n=<n>' header", lineno, 1, source)
    if tokens[1] != VERSION:
        raise ParseError(f"unsupported format version {tokens[1]!r}", lineno, len(tokens[0]) + 2, source)

    fields = {}
    column = len(tokens[0]) + len(tokens[1]) + 3
    for token in tokens[2:]:
        key, sep, value = token.partition("=")
        if not sep or key not in ("p", "n", "name"):
            raise ParseError(f"unexpected header field {token!r}", lineno, column, source)
        if key in ("p", "n"):
            try:
                fields[key] = int(value)
            except ValueError:
                raise ParseError(f"{key} must be an integer, got {value!r}", lineno, column + len(key) + 1, source)
        else:
            fields[key] = value
        column += len(token) + 1
    if "p" not in fields or "n" not in fields:
        raise ParseError("header must declare p and n", lineno, 1, source)
    if fields["p"] < 2 or fields["n"] < 1:
        raise ParseError("header declares an invalid p or n", lineno, 1, source)
    return fields["p"], fields["n"], fields.get("name")


def _parse_blocks(text: str, source: str) -> list[tuple[Optional[str], FieldVector, int]]:
    lines = [
        (lineno, raw.rstrip("\n"))
        for lineno, raw in enumerate(text.splitlines(), start=1)
        if raw.strip() and not raw.lstrip().startswith("#")
    ]
    blocks = []
    i = 0
    while i < len(lines):
        lineno, header = lines[i]
        p, n, name = _parse_header(header, lineno, source)
        coords = []
        for offset in range(1, n + 1):
            if i + offset >= len(lines):
                raise ParseError(f"expected {n} coordinates, found {len(coords)}", lineno, 1, source)
            line_no, raw = lines[i + offset]
            stripped = raw.strip()
            column = len(raw) - len(raw.lstrip()) + 1
            if stripped.startswith(MAGIC):
                raise ParseError(f"expected {n} coordinates, found {len(coords)}", line_no, column, source)
            try:
                value = int(stripped)
            except ValueError:
                raise ParseError(f"expected a decimal coordinate, got {stripped!r}", line_no, column, source)
            if not 0 <= value < p:
                raise ParseError(f"coordinate {value} outside [0, {p})", line_no, column, source)
            coords.append(value)
        blocks.append((name, FieldVector(tuple(coords), p), lineno))
        i += n + 1
    if not blocks:
        raise ParseError("no vector block found", 1, 1, source)
    return blocks


def parse_vectors(text: str, source: str = "<input>") -> list[tuple[Optional[str], FieldVector]]:
    return [(name, vec) for name, vec, _ in _parse_blocks(text, source)]


def _read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", 0, 0, str(path))


def read_vectors(path: Path) -> list[tuple[Optional[str], FieldVector]]:
    return parse_vectors(_read_text(path), str(path))


def read_vector(path: Path) -> FieldVector:
    blocks = read_vectors(path)
    if len(blocks) != 1:
        raise ParseError(f"expected exactly one vector block, found {len(blocks)}", 1, 1, str(path))
    return blocks[0][1]


def parse_named_groups(text: str, names: Sequence[str], source: str = "<input>") -> list[dict[str, FieldVector]]:
    """Split consecutive blocks into groups named exactly ``names``, in order.

    A forced-oracle file, for instance, repeats ``A``, ``A_tilde``, ``B``,
    ``B_tilde`` once per sample.
    """
    blocks = _parse_blocks(text, source)
    groups = []
    for start in range(0, len(blocks), len(names)):
        chunk = blocks[start:start + len(names)]
        group = {}
        for index, expected in enumerate(names):
            if index >= len(chunk):
                raise ParseError(f"missing block name={expected}", chunk[-1][2], 1, source)
            name, vec, lineno = chunk[index]
            if name != expected:
                raise ParseError(f"expected block name={expected}, got name={name}", lineno, 1, source)
            group[name] = vec
        groups.append(group)
    return groups


def read_named_groups(path: Path, names: Sequence[str]) -> list[dict[str, FieldVector]]:
    return parse_named_groups(_read_text(path), names, str(path))
