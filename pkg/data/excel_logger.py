"""Excel mirror of report tables using openpyxl."""

from __future__ import annotations

import logging
import threading
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from openpyxl.utils import get_column_letter

logger = logging.getLogger(__name__)


class ExcelMirror:
    """Keeps an .xlsx copy of a CSV table, one sheet, header in row 1.

    The workbook is saved after every write.  Tables stay authoritative;
    the mirror is for reading runs in a spreadsheet.
    """

    def __init__(self, path: Path, header: Sequence[str], title: str = "Table"):
        self._path = path
        self._lock = threading.Lock()
        self.header: List[str] = list(header)
        self._wb: Optional[object] = None
        self._ws: Optional[object] = None
        self._init_workbook(title)

    def _init_workbook(self, title: str) -> None:
        try:
            from openpyxl import Workbook
            self._wb = Workbook()
            self._ws = self._wb.active
            self._ws.title = title[:31]
            self._ws.append(self.header)
            for col_idx, header in enumerate(self.header, 1):
                self._ws.column_dimensions[get_column_letter(col_idx)].width = max(len(header) + 2, 12)
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._wb.save(str(self._path))
        except OSError as e:
            logger.warning("Excel mirror %s unavailable: %s", self._path, e)
            self._wb = None
            self._ws = None

    def append_rows(self, rows: Iterable[Sequence]) -> None:
        """Append rows and save once."""
        if self._ws is None:
            return
        with self._lock:
            for row in rows:
                self._ws.append([v if isinstance(v, (int, float, str)) or v is None else str(v) for v in row])
            self._wb.save(str(self._path))


def mirror_table(path: Path, header: Sequence[str], rows: Iterable[Sequence], title: str = "Table") -> ExcelMirror:
    mirror = ExcelMirror(path, header, title)
    mirror.append_rows(rows)
    return mirror
