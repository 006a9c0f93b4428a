"""Parsing of caption-contest vote tables and persistence of experiment outputs.

The contest CSV schema varies between published contest files, so the four
required columns (caption text plus 1/2/3-star vote counts) are configurable
by name.  Experiment outputs round-trip through CSV (metadata as '#' comment
lines, then a header and rows) or JSON (one object with "metadata",
"columns" and "rows").
"""

from __future__ import annotations

import csv
import json
import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any

DEFAULT_CONTEST_COLUMNS = ("caption", "unfunny", "somewhat_funny", "funny")


@dataclass(frozen=True)
class Caption:
    """One caption with its 1/2/3-star vote counts."""

    text: str
    star_counts: tuple[int, int, int]

    def __post_init__(self) -> None:
        if len(self.star_counts) != 3 or any(c < 0 for c in self.star_counts):
            raise ValueError("star_counts must be three non-negative integers")
        if sum(self.star_counts) < 1:
            raise ValueError(f"caption {self.text!r} retained with zero votes")


@dataclass(frozen=True)
class ContestDataset:
    """Parsed vote counts for one contest."""

    contest_id: int
    captions: tuple[Caption, ...]

    def __post_init__(self) -> None:
        if len(self.captions) < 2:
            raise ValueError("a contest dataset needs at least 2 captions")


def parse_contest_csv(
    path,
    columns: tuple[str, str, str, str] = DEFAULT_CONTEST_COLUMNS,
    contest_id: int | None = None,
) -> ContestDataset:
    """Parse a comma-separated vote table with a header row.

    ``columns`` names the caption-text column and the 1/2/3-star count
    columns, in that order.  Rows whose three counts sum to zero are dropped
    with a warning reporting how many were removed.  When ``contest_id`` is
    not given it is taken from the first run of digits in the file name
    (0 if there is none).
    """
    path = Path(path)
    text_col, one_col, two_col, three_col = columns
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise ValueError(f"{path}: missing required column(s): {', '.join(missing)}")
        captions = []
        dropped = 0
        for lineno, row in enumerate(reader, start=2):
            counts = []
            for col in (one_col, two_col, three_col):
                raw = (row[col] or "").strip()
                try:
                    counts.append(int(raw))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-integer vote count {raw!r} in column "
                        f"{col!r} on line {lineno}"
                    ) from None
            if any(c < 0 for c in counts):
                raise ValueError(f"{path}: negative vote count on line {lineno}")
            if sum(counts) == 0:
                dropped += 1
                continue
            captions.append(Caption(text=row[text_col], star_counts=tuple(counts)))
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} zero-vote caption row(s)")
    if len(captions) < 2:
        raise ValueError(f"{path}: fewer than 2 captions with votes")
    if contest_id is None:
        match = re.search(r"\d+", path.stem)
        contest_id = int(match.group()) if match else 0
    return ContestDataset(contest_id=contest_id, captions=tuple(captions))


@dataclass(frozen=True)
class ExperimentOutput:
    """A plot-ready table with run metadata.

    Rows are tuples matching ``columns``; they must already be sorted by
    their first element (snapshot counts, arm indices, ...).
    """

    metadata: dict[str, Any]
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("every row must match the column count")
        firsts = [row[0] for row in self.rows]
        for a, b in zip(firsts, firsts[1:]):
            try:
                if b < a:
                    raise ValueError("rows must be sorted by their first column")
            except TypeError:
                pass


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        s = f"{value:.15g}"
        # keep the float/int distinction through a text round-trip
        if not any(ch in s for ch in ".eE") and s not in ("inf", "-inf", "nan"):
            s += ".0"
        return s
    return str(value)


def _parse_cell(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_output(out: ExperimentOutput, path, format: str = "csv") -> None:
    """Persist an ExperimentOutput as CSV or JSON.

    CSV carries the metadata as leading '# key = <json>' comment lines;
    numbers are written with 15 significant digits.  I/O failures propagate
    as OSError carrying the path.
    """
    path = Path(path)
    if format == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            for key, value in out.metadata.items():
                fh.write(f"# {key} = {json.dumps(value)}\n")
            writer = csv.writer(fh)
            writer.writerow(out.columns)
            for row in out.rows:
                writer.writerow([_format_cell(v) for v in row])
    elif format == "json":
        payload = {
            "metadata": out.metadata,
            "columns": list(out.columns),
            "rows": [list(row) for row in out.rows],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")


def read_output(path, format: str = "csv") -> ExperimentOutput:
    """Inverse of write_output (within float round-trip precision for CSV)."""
    path = Path(path)
    if format == "csv":
        metadata: dict[str, Any] = {}
        rows = []
        columns: tuple[str, ...] = ()
        with open(path, newline="", encoding="utf-8") as fh:
            data_lines = []
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].partition("=")
                    metadata[key.strip()] = json.loads(value)
                else:
                    data_lines.append(line)
            reader = csv.reader(data_lines)
            table = list(reader)
        if table:
            columns = tuple(table[0])
            rows = [tuple(_parse_cell(c) for c in row) for row in table[1:] if row]
        return ExperimentOutput(metadata=metadata, columns=columns, rows=tuple(rows))
    if format == "json":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        return ExperimentOutput(
            metadata=payload["metadata"],
            columns=tuple(payload["columns"]),
            rows=tuple(tuple(row) for row in payload["rows"]),
        )
    raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
