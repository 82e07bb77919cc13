# common.py
#
# Common utility functions
#
# Date: 2026-09-14

from typing import Optional
import logging
import os

__all__ = [
    "VERSION",
    "KahanSum",
    "worker_count",
]

logger = logging.getLogger(__name__)

VERSION = "0.1.0"

WORKERS_VARIABLE = "MARIMBA_THREADS"


class KahanSum:
    """Compensated running sum."""
    __slots__ = ("total", "compensation")

    total: float
    compensation: float

    def __init__(self, start: float = 0.0):
        self.total = start
        self.compensation = 0.0

    def add(self, value: float) -> float:
        y = value - self.compensation
        t = self.total + y
        self.compensation = (t - self.total) - y
        self.total = t
        return t


def worker_count(requested: Optional[int] = None) -> int:
    """Number of worker processes: the requested count, the
    `MARIMBA_THREADS` environment variable or the CPU count."""
    if requested is not None:
        return max(1, requested)
    value = os.environ.get(WORKERS_VARIABLE)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            logger.warning("Ignoring %s=%r: not an integer", WORKERS_VARIABLE, value)
    return os.cpu_count() or 1
