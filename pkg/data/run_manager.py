"""Run output folders and deterministic JSON artifacts."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from config.settings import ExperimentConfig

REPORT_SCHEMA = "dglab-report/1"


def dump_json(data: Any, path: Path) -> None:
    """Write *data* as sorted, indented JSON with a trailing newline."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")


class RunManager:
    """Creates and manages the output directory of one run.

    Layout::

        <output_base_dir>/<experiment>_<checksum[:12]>/
            config.json
            report.json
            <table>.csv / <table>.xlsx
            progress.json
            run.log

    Equal configs map to the same folder, so a rerun overwrites its
    predecessor with identical content.
    """

    def __init__(self, config: ExperimentConfig, experiment: str = ""):
        self.config = config
        self.experiment = experiment or config.experiment
        self.checksum = config.checksum()
        self.run_dir = Path(config.output_base_dir) / f"{self.experiment}_{self.checksum[:12]}"

    def create(self) -> Path:
        """Create the run folder and save the config snapshot."""
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.config.save(self.run_dir / "config.json")
        return self.run_dir

    def path(self, name: str) -> Path:
        return self.run_dir / name

    def write_report(self, report: dict, name: str = "report.json") -> Path:
        path = self.path(name)
        dump_json({"schema": REPORT_SCHEMA, **report}, path)
        return path

    # --- progress file ---

    def save_progress(self, progress: dict) -> None:
        dump_json(progress, self.path("progress.json"))
