"""Per-run file + console logging configuration."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

RUN_LOG = "run.log"


def setup_logging(run_dir: Path | None = None, level: int = logging.INFO) -> None:
    """Configure root logger with console + optional file handler.

    Args:
        run_dir: If provided, a ``run.log`` file handler is added there
            (replacing the handler of a previous run).
        level: Logging level for both handlers.
    """
    root = logging.getLogger()
    root.setLevel(level)

    fmt = logging.Formatter(
        "%(asctime)s | %(levelname)-8s | %(name)-25s | %(message)s",
        datefmt="%H:%M:%S",
    )

    # Console handler (only add once)
    if not any(isinstance(h, logging.StreamHandler) and h.stream is sys.stdout
               for h in root.handlers):
        console = logging.StreamHandler(sys.stdout)
        console.setLevel(level)
        console.setFormatter(fmt)
        root.addHandler(console)
    for h in root.handlers:
        h.setLevel(level)

    if run_dir is not None:
        for h in list(root.handlers):
            if isinstance(h, logging.FileHandler) and Path(h.baseFilename).name == RUN_LOG:
                root.removeHandler(h)
                h.close()
        run_dir.mkdir(parents=True, exist_ok=True)
        fh = logging.FileHandler(run_dir / RUN_LOG, encoding="utf-8")
        fh.setLevel(level)
        fh.setFormatter(fmt)
        root.addHandler(fh)
