"""Scene interpretation: signage classification, bearing, range, hazards."""

from wayfinder.interpreter.cues import (
    DEFAULT_FOCAL_LENGTH_PX,
    DEFAULT_REAL_HEIGHTS_M,
    HAZARD_CLASSES,
    MIN_TRUSTED_HEIGHT_PX,
    OBSTACLE_TRIGGERS,
    Calibration,
    Direction,
    NavCue,
    estimate_direction,
    estimate_distance,
    interpret,
    quad_centroid,
    quad_height_px,
)
from wayfinder.interpreter.lexicon import (
    CONFIDENCE_EXACT,
    CONFIDENCE_NEAR,
    SignClass,
    classify_signage,
    levenshtein,
    load_lexicon,
    parse_lexicon,
)

__all__ = [
    "DEFAULT_FOCAL_LENGTH_PX",
    "DEFAULT_REAL_HEIGHTS_M",
    "HAZARD_CLASSES",
    "MIN_TRUSTED_HEIGHT_PX",
    "OBSTACLE_TRIGGERS",
    "Calibration",
    "Direction",
    "NavCue",
    "estimate_direction",
    "estimate_distance",
    "interpret",
    "quad_centroid",
    "quad_height_px",
    "CONFIDENCE_EXACT",
    "CONFIDENCE_NEAR",
    "SignClass",
    "classify_signage",
    "levenshtein",
    "load_lexicon",
    "parse_lexicon",
]
