"""Cross-run monitoring Excel log."""

from __future__ import annotations

import logging
from datetime import datetime
from pathlib import Path

from openpyxl.utils import get_column_letter

logger = logging.getLogger(__name__)

MONITOR_FILE = "run_monitor.xlsx"


class RunMonitor:
    """Creates/updates run_monitor.xlsx in the output base directory.

    Appends one row per run; the file persists across runs and is never
    overwritten.
    """

    HEADER = [
        "Date",
        "Start Time",
        "End Time",
        "Status",
        "Experiment",
        "Config Checksum",
        "Output Run Folder",
    ]

    def __init__(self, output_base_dir: str):
        self._path = Path(output_base_dir) / MONITOR_FILE

    @property
    def path(self) -> Path:
        return self._path

    def log_run(
        self,
        start_time: datetime,
        end_time: datetime,
        status: str,
        experiment: str,
        checksum: str,
        run_folder: str,
    ) -> None:
        """Append a run summary row to the monitoring workbook."""
        try:
            from openpyxl import Workbook, load_workbook

            if self._path.exists():
                wb = load_workbook(str(self._path))
                ws = wb.active
            else:
                self._path.parent.mkdir(parents=True, exist_ok=True)
                wb = Workbook()
                ws = wb.active
                ws.title = "Run Monitor"
                ws.append(self.HEADER)
                for col_idx, header in enumerate(self.HEADER, 1):
                    ws.column_dimensions[get_column_letter(col_idx)].width = max(len(header) + 2, 18)

            ws.append([
                start_time.strftime("%Y-%m-%d"),
                start_time.strftime("%H:%M:%S"),
                end_time.strftime("%H:%M:%S"),
                status,
                experiment,
                checksum,
                run_folder,
            ])

            wb.save(str(self._path))
            logger.info("Run logged to %s", self._path)

        except Exception as e:
            logger.error("Failed to log run to monitor: %s", e)
