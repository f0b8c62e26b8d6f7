"""Thread-safe RFC-4180 CSV tables."""

from __future__ import annotations

import csv
import threading
from pathlib import Path
from typing import Iterable, List, Sequence


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


class TableWriter:
    """Append-only CSV writer: header first, CRLF line endings, minimal quoting.

    All public methods are thread-safe.
    """

    def __init__(self, path: Path, header: Sequence[str]):
        self._path = path
        self._lock = threading.Lock()
        self.header: List[str] = list(header)
        path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._file, lineterminator="\r\n")
        self._writer.writerow(self.header)
        self._file.flush()

    @property
    def path(self) -> Path:
        return self._path

    def write_row(self, values: Sequence) -> None:
        """Append one row (thread-safe)."""
        if len(values) != len(self.header):
            raise ValueError(f"row has {len(values)} cells for {len(self.header)} columns")
        with self._lock:
            self._writer.writerow([_cell(v) for v in values])
            self._file.flush()

    def write_rows(self, rows: Iterable[Sequence]) -> None:
        for row in rows:
            self.write_row(row)

    def close(self) -> None:
        with self._lock:
            if not self._file.closed:
                self._file.close()

    def __enter__(self) -> "TableWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with TableWriter(path, header) as writer:
        writer.write_rows(rows)
    return path
