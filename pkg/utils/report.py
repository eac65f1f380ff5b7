"""Run reports: ``key=value`` text for humans and one flat JSON summary for CI.

Both embed the full RunConfig and the format version; keys keep insertion
order, so identical runs produce byte-identical files.
"""

import json
from pathlib import Path
from typing import Any

from models.schemas import FORMAT_VERSION, RunConfig


def _scalar(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float, str)):
        return value
    if isinstance(value, (tuple, list)):
        return " ".join(str(_scalar(v)) for v in value)
    if value is None:
        return "none"
    return str(value)


class Report:
    def __init__(self, command: str, config: RunConfig):
        self.records: dict[str, Any] = {"format": FORMAT_VERSION, "command": command}
        self.records.update(config.as_record())

    def add(self, key: str, value: Any) -> None:
        self.records[key] = _scalar(value)

    def update(self, values: dict[str, Any], prefix: str = "") -> None:
        for key, value in values.items():
            self.add(f"{prefix}{key}", value)

    def status(self, passed: bool) -> None:
        self.records["status"] = "PASS" if passed else "FAIL"

    def to_text(self) -> str:
        return "".join(f"{key}={value}\n" for key, value in self.records.items())

    def to_json(self) -> str:
        return json.dumps(self.records, indent=2) + "\n"

    def write(self, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.txt").write_text(self.to_text(), encoding="utf-8")
        (out_dir / "summary.json").write_text(self.to_json(), encoding="utf-8")
