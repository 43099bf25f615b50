"""Observation -> navigational cues: class, bearing, range, hazard flag.

Direction comes from a thirds split of the image, distance from a pinhole
model with per-class known sign heights. Both are deliberately crude; the
camera is a phone on a lanyard, not a survey instrument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from wayfinder.backends.base import Quad, RawObservation, TextRegion
from wayfinder.interpreter.lexicon import SignClass, classify_signage

MIN_TRUSTED_HEIGHT_PX = 4.0

DEFAULT_FOCAL_LENGTH_PX = 800.0  # 640x480 phone camera, typical lens
DEFAULT_REAL_HEIGHTS_M = {SignClass.EXIT_DOOR: 0.19}  # US exit-sign letter height

HAZARD_CLASSES = frozenset({SignClass.STAIRS, SignClass.OBSTACLE})

# VQA summary phrases that flag something standing in the path.
OBSTACLE_TRIGGERS = ("person", "chair", "cart")

EXIT_QUESTION_MARKER = "exit sign"
LABEL_QUESTION = "label"


class Direction(Enum):
    LEFT = "left"
    AHEAD = "ahead"
    RIGHT = "right"


@dataclass(frozen=True)
class NavCue:
    """One actionable fact about the scene.

    hazard is derived, never passed in: stairs and obstacles are hazards,
    nothing else is.
    """

    sign_class: SignClass
    direction: Direction
    distance_m: float | None
    confidence: float
    source_region: TextRegion | None = None
    hazard: bool = field(init=False)

    def __post_init__(self):
        if self.distance_m is not None and not self.distance_m > 0:
            raise ValueError(f"distance_m {self.distance_m} must be positive")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        object.__setattr__(self, "hazard", self.sign_class in HAZARD_CLASSES)


@dataclass(frozen=True)
class Calibration:
    """Pinhole projection constants: d = focal_length_px * H_real / h_px."""

    focal_length_px: float = DEFAULT_FOCAL_LENGTH_PX
    real_heights_m: dict[SignClass, float] = field(
        default_factory=lambda: dict(DEFAULT_REAL_HEIGHTS_M)
    )

    def __post_init__(self):
        if not self.focal_length_px > 0:
            raise ValueError(f"focal_length_px {self.focal_length_px} must be positive")
        for sign_class, height in self.real_heights_m.items():
            if not height > 0:
                raise ValueError(f"real height for {sign_class.value} must be positive")


def quad_centroid(quad: Quad) -> tuple[float, float]:
    xs = sum(x for x, _ in quad) / len(quad)
    ys = sum(y for _, y in quad) / len(quad)
    return xs, ys


def estimate_direction(quad: Quad, image_width: float) -> Direction:
    """Thirds rule on the centroid: left third, middle, right third.

    Centroids exactly on a boundary count as AHEAD.
    """
    if not image_width > 0:
        raise ValueError(f"image_width {image_width} must be positive")
    cx, _ = quad_centroid(quad)
    if cx < image_width / 3:
        return Direction.LEFT
    if cx > 2 * image_width / 3:
        return Direction.RIGHT
    return Direction.AHEAD


def quad_height_px(quad: Quad) -> float:
    """Apparent height: mean of the left and right edge lengths.

    Vertex order is top-left, top-right, bottom-right, bottom-left.
    """
    (x0, y0), (x1, y1), (x2, y2), (x3, y3) = quad
    left = math.hypot(x0 - x3, y0 - y3)
    right = math.hypot(x1 - x2, y1 - y2)
    return (left + right) / 2.0


def estimate_distance(
    quad: Quad, sign_class: SignClass, cal: Calibration
) -> float | None:
    """Pinhole range, or None when the class is uncalibrated or the quad is
    too small (under 4 px) to trust."""
    real_height = cal.real_heights_m.get(sign_class)
    if real_height is None:
        return None
    h_px = quad_height_px(quad)
    if h_px < MIN_TRUSTED_HEIGHT_PX:
        return None
    return cal.focal_length_px * real_height / h_px


def _is_affirmative(answer: str) -> bool:
    return answer.casefold().strip().startswith("yes")


def interpret(
    obs: RawObservation,
    image_dims: tuple[int, int],
    cal: Calibration,
    lexicon: dict[str, SignClass],
) -> list[NavCue]:
    """Fuse text regions and VQA answers into cues.

    Region evidence: one cue per region whose text classifies to a known
    class; cue confidence is region score x classification confidence.
    VQA evidence: an affirmative exit-sign answer adds an EXIT_DOOR cue
    anchored at the highest-scoring region (or AHEAD with no distance when
    the frame has none); a non-affirmative exit-sign answer challenges
    region EXIT_DOOR cues and wins only at strictly higher confidence, so
    ties go to the text region. Obstacle trigger words in any answer add a
    single OBSTACLE cue at the highest triggering confidence.
    """
    width, _ = image_dims
    cues: list[NavCue] = []

    region_exit_cues: list[NavCue] = []
    for region in obs.text_regions:
        if region.text is None:
            continue  # localized but unread: nothing to classify
        sign_class, match_conf = classify_signage(region.text, lexicon)
        if sign_class is SignClass.UNKNOWN_SIGN:
            continue
        cue = NavCue(
            sign_class=sign_class,
            direction=estimate_direction(region.quad, width),
            distance_m=estimate_distance(region.quad, sign_class, cal),
            confidence=region.score * match_conf,
            source_region=region,
        )
        cues.append(cue)
        if sign_class is SignClass.EXIT_DOOR:
            region_exit_cues.append(cue)

    dominant: TextRegion | None = None
    if obs.text_regions:
        dominant = max(obs.text_regions, key=lambda r: r.score)

    challenges: list[float] = []
    obstacle_conf: float | None = None
    for answer in obs.vqa_answers:
        q = answer.question.casefold()
        text = answer.answer.casefold()
        if EXIT_QUESTION_MARKER in q:
            if _is_affirmative(answer.answer):
                if not region_exit_cues:  # region evidence already covers it
                    if dominant is not None:
                        cues.append(
                            NavCue(
                                sign_class=SignClass.EXIT_DOOR,
                                direction=estimate_direction(dominant.quad, width),
                                distance_m=estimate_distance(
                                    dominant.quad, SignClass.EXIT_DOOR, cal
                                ),
                                confidence=answer.confidence,
                                source_region=dominant,
                            )
                        )
                    else:
                        cues.append(
                            NavCue(
                                sign_class=SignClass.EXIT_DOOR,
                                direction=Direction.AHEAD,
                                distance_m=None,
                                confidence=answer.confidence,
                            )
                        )
            else:
                challenges.append(answer.confidence)
        if any(trigger in text for trigger in OBSTACLE_TRIGGERS):
            if obstacle_conf is None or answer.confidence > obstacle_conf:
                obstacle_conf = answer.confidence

    if challenges:
        strongest = max(challenges)
        cues = [
            cue
            for cue in cues
            if not (cue.sign_class is SignClass.EXIT_DOOR and strongest > cue.confidence)
        ]

    if obstacle_conf is not None:
        cues.append(
            NavCue(
                sign_class=SignClass.OBSTACLE,
                direction=Direction.AHEAD,
                distance_m=None,
                confidence=obstacle_conf,
            )
        )

    return cues
