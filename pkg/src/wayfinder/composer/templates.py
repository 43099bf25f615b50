"""Deterministic instruction templates.

The grammar is fixed: guidance reads "There's a(n) {class phrase}
{distance phrase} on your {direction}" (or "... straight ahead"), and the
stairs caution reads "Caution: stairs approaching in {n} steps". Rounding
is half-up because "about ten feet" spoken aloud beats false precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import IntEnum
from typing import Iterable, Sequence

from wayfinder.interpreter.cues import Direction, NavCue
from wayfinder.interpreter.lexicon import SignClass

FEET_PER_METER = 3.2808
STEP_LENGTH_M = 0.7  # average adult pace


class Priority(IntEnum):
    INFO = 0
    GUIDANCE = 1
    CAUTION = 2


CLASS_PHRASES: dict[SignClass, str] = {
    SignClass.EXIT_DOOR: "exit door",
    SignClass.STAIRS: "stairs",
    SignClass.ELEVATOR: "elevator",
    SignClass.RESTROOM: "restroom",
    SignClass.DOOR: "door",
    SignClass.OBSTACLE: "obstacle",
    SignClass.UNKNOWN_SIGN: "sign",
}

_VOWELS = "aeiou"


@dataclass(frozen=True)
class Instruction:
    text: str
    priority: Priority
    dedup_key: str  # "class:direction", stable across phrasings
    distance_m: float | None
    frame_seq: int
    rewritten: bool = False

    def __post_init__(self):
        if not self.text:
            raise ValueError("instruction text must be non-empty")
        if self.distance_m is not None and not self.distance_m > 0:
            raise ValueError(f"distance_m {self.distance_m} must be positive")


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves away from zero upward."""
    return int(Decimal(repr(value)).quantize(Decimal("1"), rounding=ROUND_HALF_UP))


def dedup_key_for(cue: NavCue) -> str:
    return f"{cue.sign_class.value}:{cue.direction.value}"


def _distance_phrase(distance_m: float, units: str) -> str:
    if units == "feet":
        return f"{round_half_up(distance_m * FEET_PER_METER)} feet ahead"
    return f"{round_half_up(distance_m)} meters ahead"


def _direction_suffix(direction: Direction) -> str:
    if direction is Direction.AHEAD:
        return "straight ahead"
    return f"on your {direction.value}"


def step_count(distance_m: float) -> int:
    return max(1, round_half_up(distance_m / STEP_LENGTH_M))


def compose_one(cue: NavCue, units: str, frame_seq: int) -> Instruction:
    """One instruction per cue; cautions for hazards, guidance otherwise."""
    phrase = CLASS_PHRASES[cue.sign_class]
    if cue.hazard:
        if cue.sign_class is SignClass.STAIRS and cue.distance_m is not None:
            text = f"Caution: stairs approaching in {step_count(cue.distance_m)} steps"
        else:
            parts = [f"Caution: {phrase}"]
            if cue.distance_m is not None:
                parts.append(_distance_phrase(cue.distance_m, units))
            parts.append(_direction_suffix(cue.direction))
            text = " ".join(parts)
        priority = Priority.CAUTION
    else:
        article = "an" if phrase[0] in _VOWELS else "a"
        parts = [f"There's {article} {phrase}"]
        if cue.distance_m is not None:
            parts.append(_distance_phrase(cue.distance_m, units))
        parts.append(_direction_suffix(cue.direction))
        text = " ".join(parts)
        priority = Priority.GUIDANCE
    return Instruction(
        text=text,
        priority=priority,
        dedup_key=dedup_key_for(cue),
        distance_m=cue.distance_m,
        frame_seq=frame_seq,
    )


def compose(cues: Iterable[NavCue], units: str = "feet", frame_seq: int = 0) -> list[Instruction]:
    """Unfiltered candidates, one per cue, in cue order."""
    if units not in ("feet", "meters"):
        raise ValueError(f"units must be 'feet' or 'meters', got {units!r}")
    return [compose_one(cue, units, frame_seq) for cue in cues]


def instruction_facts(instruction: Instruction) -> dict:
    """Structured facts for the rewriter; recoverable from the instruction."""
    class_name, _, direction = instruction.dedup_key.partition(":")
    return {
        "class": class_name,
        "direction": direction,
        "distance_m": instruction.distance_m,
        "hazard": instruction.priority == Priority.CAUTION,
    }
