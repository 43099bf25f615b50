"""Monotonic millisecond clocks.

Session timing (heartbeats, dedup windows, reconnect windows) runs off an
injectable clock so replays and tests can drive time explicitly.
"""

from __future__ import annotations

import time
from typing import Callable

Clock = Callable[[], float]


def monotonic_ms() -> float:
    """Default clock: process-monotonic milliseconds."""
    return time.monotonic() * 1000.0


class ManualClock:
    """Hand-driven clock for deterministic replay and tests."""

    def __init__(self, start_ms: float = 0.0):
        self._now = float(start_ms)

    def __call__(self) -> float:
        return self._now

    def set(self, now_ms: float) -> None:
        if now_ms < self._now:
            raise ValueError(f"clock cannot run backwards: {now_ms} < {self._now}")
        self._now = float(now_ms)

    def advance(self, delta_ms: float) -> None:
        if delta_ms < 0:
            raise ValueError("negative advance")
        self._now += delta_ms
