"""Tabular result container with deterministic CSV/JSON serialization.

Every sweep and report in the package is a :class:`Dataset`: an ordered
metadata mapping plus named columns of rows.  Serialization is byte-stable:
metadata appears as ``#``-prefixed comment lines (CSV) or a ``meta`` object
(JSON) in insertion order, floats are printed with 12 significant digits in
CSV, missing values become ``nan``/``null``, and files are written atomically
(temp file in the target directory, then rename).
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

__all__ = ["Dataset"]


def _format_cell(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _jsonable(value):
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value
    return str(value)


@dataclass
class Dataset:
    meta: dict = field(default_factory=dict)
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def append(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]

    def to_csv_text(self) -> str:
        lines = [f"# {key} = {_format_cell(value)}" for key, value in self.meta.items()]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_format_cell(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_json_text(self) -> str:
        payload = {
            "meta": {k: _jsonable(v) for k, v in self.meta.items()},
            "rows": [
                {col: _jsonable(v) for col, v in zip(self.columns, row)}
                for row in self.rows
            ],
        }
        return json.dumps(payload, indent=2) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv_text()
        if fmt == "json":
            return self.to_json_text()
        raise ValueError(f"unknown format {fmt!r}")

    def write(self, path: str | None, fmt: str = "csv") -> None:
        """Write to ``path`` atomically, or to stdout when path is None."""
        text = self.render(fmt)
        if path is None:
            sys.stdout.write(text)
            return
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-dataset-")
        try:
            with os.fdopen(fd, "w") as handle:
                handle.write(text)
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise
