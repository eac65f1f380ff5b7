import json

import pytest

from lrs.field import FieldVector
from models.schemas import RunConfig
from utils.errors import ParseError
from utils.report import Report
from utils.vecfile import format_blocks, format_vector, parse_named_groups, parse_vectors, read_vector, write_vectors


def test_format_single_vector():
    assert format_vector(FieldVector((2, 3), 11)) == "lrs-vec v1 p=11 n=2\n2\n3\n"
    assert format_vector(FieldVector((2,), 11), name="A") == "lrs-vec v1 p=11 n=1 name=A\n2\n"


def test_write_then_read(tmp_path):
    vec = FieldVector((1, 65536, 0), 65537)
    write_vectors(tmp_path / "v.vec", [(None, vec)])
    assert read_vector(tmp_path / "v.vec") == vec


def test_comments_and_blank_lines():
    text = "# shares\nlrs-vec v1 p=11 n=2\n\n  2\n3\n"
    assert parse_vectors(text) == [(None, FieldVector((2, 3), 11))]


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("lrs-vec v2 p=11 n=2\n1\n2\n", 1, 9),
        ("lrs-vec v1 p=eleven n=2\n1\n2\n", 1, 14),
        ("lrs-vec v1 p=11 n=2\n1\n", 1, 1),
        ("lrs-vec v1 p=11 n=2\n1\n  x\n", 3, 3),
        ("lrs-vec v1 p=11 n=2\n1\n11\n", 3, 1),
        ("vector 1 2\n", 1, 1),
        ("", 1, 1),
    ],
)
def test_parse_errors_carry_position(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_vectors(text, "f.vec")
    assert (info.value.line, info.value.column) == (line, column)
    assert str(info.value).startswith(f"f.vec:{line}:{column}:")
    assert info.value.exit_status == 2


def test_named_groups():
    blocks = [("A", FieldVector((1, 2), 11)), ("B", FieldVector((5, 1), 11))] * 2
    groups = parse_named_groups(format_blocks(blocks), ("A", "B"))
    assert len(groups) == 2 and groups[1]["B"] == FieldVector((5, 1), 11)


def test_named_groups_wrong_order():
    text = format_blocks([("B", FieldVector((1,), 11)), ("A", FieldVector((1,), 11))])
    with pytest.raises(ParseError) as info:
        parse_named_groups(text, ("A", "B"))
    assert info.value.line == 1


def test_missing_file(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        read_vector(tmp_path / "absent.vec")


def test_report_embeds_config(tmp_path):
    report = Report("bench", RunConfig(p=11, n=2, seed=7))
    report.add("ok", True)
    report.add("ratio", 2.0)
    report.add("missing", None)
    report.add("L", (1, 5))
    report.status(True)
    report.write(tmp_path)

    text = (tmp_path / "report.txt").read_text()
    assert text.splitlines()[:3] == ["format=lrs-report v1", "command=bench", "config.p=11"]
    assert "config.seed=7\n" in text and "L=1 5\n" in text and text.endswith("status=PASS\n")
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["ok"] == "true" and summary["ratio"] == 2.0 and summary["missing"] == "none"
    assert list(summary)[-1] == "status"
