"""Wall-clock timing for report rows.

Timings never enter a report unless ``record_timings`` is enabled, so
runs with equal configs stay byte-identical.
"""

from __future__ import annotations

import time
from typing import Optional


def perf_timestamp() -> float:
    """Return a high-resolution monotonic timestamp (seconds)."""
    return time.perf_counter()


class Stopwatch:
    """Context manager measuring elapsed milliseconds.

    ``enabled=False`` turns it into a no-op whose ``elapsed_ms`` is None.
    """

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self._start: Optional[float] = None
        self.elapsed_ms: Optional[float] = None

    def __enter__(self) -> "Stopwatch":
        if self.enabled:
            self._start = perf_timestamp()
        return self

    def __exit__(self, *exc) -> None:
        if self.enabled and self._start is not None:
            self.elapsed_ms = round((perf_timestamp() - self._start) * 1000.0, 3)
