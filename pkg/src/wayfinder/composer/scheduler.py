"""Dedup and pacing: which candidate instructions actually get spoken.

A navigation aid that repeats itself every frame is unusable, so each
dedup key is silenced for a window after it fires unless the situation
changed (distance moved more than 20%, or the news got more urgent).
Utterances are also spaced out by a minimum gap; cautions ignore the gap
because a hazard can't wait its turn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from wayfinder.composer.templates import Instruction, Priority

DEFAULT_DEDUP_WINDOW_MS = 5000.0
DEFAULT_MIN_GAP_MS = 2000.0
DISTANCE_CHANGE_FRACTION = 0.2


@dataclass
class DedupEntry:
    last_emitted_ms: float
    distance_m: float | None
    priority: Priority


@dataclass
class DedupMemory:
    """Per-session emission history; survives reconnects inside the window."""

    entries: dict[str, DedupEntry] = field(default_factory=dict)
    last_dispatch_ms: float | None = None


def _situation_changed(candidate: Instruction, entry: DedupEntry) -> bool:
    if candidate.priority > entry.priority:
        return True
    old, new = entry.distance_m, candidate.distance_m
    if old is None and new is None:
        return False
    if old is None or new is None:
        return True  # distance appeared or vanished: different statement
    return abs(new - old) > DISTANCE_CHANGE_FRACTION * old


def filter_and_schedule(
    candidates: Sequence[Instruction],
    memory: DedupMemory,
    now: float,
    dedup_window_ms: float = DEFAULT_DEDUP_WINDOW_MS,
    min_gap_ms: float = DEFAULT_MIN_GAP_MS,
) -> list[Instruction]:
    """Pick the candidates to dispatch at `now`, updating `memory` for them.

    Recently-fired keys are dropped unless the situation changed; survivors
    are ordered priority-high-first (ties: nearer first, then input order);
    non-caution items go only when the utterance gap has elapsed, cautions
    always go. Only dispatched items touch the memory.
    """
    survivors = []
    for candidate in candidates:
        entry = memory.entries.get(candidate.dedup_key)
        if (
            entry is not None
            and (now - entry.last_emitted_ms) < dedup_window_ms
            and not _situation_changed(candidate, entry)
        ):
            continue
        survivors.append(candidate)
    survivors.sort(
        key=lambda c: (
            -int(c.priority),
            c.distance_m if c.distance_m is not None else math.inf,
        )
    )
    gap_open = (
        memory.last_dispatch_ms is None or (now - memory.last_dispatch_ms) >= min_gap_ms
    )
    dispatched: list[Instruction] = []
    batch_entries: dict[str, DedupEntry] = {}
    for candidate in survivors:
        if candidate.priority is not Priority.CAUTION and not gap_open:
            continue
        pending = batch_entries.get(candidate.dedup_key)
        if pending is not None and not _situation_changed(candidate, pending):
            continue  # same key already firing in this batch
        dispatched.append(candidate)
        batch_entries[candidate.dedup_key] = DedupEntry(
            last_emitted_ms=now,
            distance_m=candidate.distance_m,
            priority=candidate.priority,
        )
    if dispatched:
        memory.entries.update(batch_entries)
        memory.last_dispatch_ms = now
    return dispatched
