"""Ordered queue of the steps that make up one run."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence


@dataclass
class QueueItem:
    """One step of a run, e.g. a chain build or a witness at one scale."""
    name: str
    detail: str = ""
    completed: bool = False

    @property
    def label(self) -> str:
        return f"{self.name} ({self.detail})" if self.detail else self.name


class RunQueue:
    """Steps in execution order with a cursor.

    The progress dict written after each step records which steps
    finished, so an interrupted run shows where it stopped.
    """

    def __init__(self, steps: Sequence[QueueItem]):
        self._items: List[QueueItem] = list(steps)
        self._index = 0

    @property
    def items(self) -> List[QueueItem]:
        return list(self._items)

    @property
    def current(self) -> Optional[QueueItem]:
        if self._index < len(self._items):
            return self._items[self._index]
        return None

    @property
    def current_index(self) -> int:
        return self._index

    @property
    def total(self) -> int:
        return len(self._items)

    @property
    def is_done(self) -> bool:
        return self._index >= len(self._items)

    def advance(self) -> Optional[QueueItem]:
        """Mark current item completed and move to next. Returns new current or None."""
        if self._index < len(self._items):
            self._items[self._index].completed = True
            self._index += 1
        return self.current

    def to_progress_dict(self) -> dict:
        return {
            "index": self._index,
            "total": self.total,
            "items": [
                {"name": item.name, "detail": item.detail, "completed": item.completed}
                for item in self._items
            ],
        }
