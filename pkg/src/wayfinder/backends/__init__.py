"""Perception backends: uniform analyze() over stub, EAST, VQA, remote."""

from wayfinder.backends.base import (
    DEFAULT_TIMEOUT_MS,
    BackendError,
    BackendProtocolError,
    BackendTimeout,
    BackendUnavailable,
    PerceptionBackend,
    Quad,
    RawObservation,
    TextRegion,
    VqaAnswer,
)
from wayfinder.backends.east import (
    DEFAULT_IOU_THRESHOLD,
    DEFAULT_SCORE_THRESHOLD,
    DEFAULT_STRIDE,
    EastBackend,
    EastTensors,
    InputShapeError,
    east_decode,
    locality_aware_nms,
    tensors_from_json,
    tensors_to_json,
)
from wayfinder.backends.geometry import clip_polygon, polygon_area, quad_iou
from wayfinder.backends.remote import (
    API_KEY_ENV_VAR,
    DEFAULT_UNIT_COST_USD,
    CostLedger,
    RemoteBackend,
)
from wayfinder.backends.stub import StubBackend, load_stub_script, parse_stub_script
from wayfinder.backends.vqa import DEFAULT_QUESTIONS, VqaBackend

__all__ = [
    "DEFAULT_TIMEOUT_MS",
    "BackendError",
    "BackendProtocolError",
    "BackendTimeout",
    "BackendUnavailable",
    "PerceptionBackend",
    "Quad",
    "RawObservation",
    "TextRegion",
    "VqaAnswer",
    "DEFAULT_IOU_THRESHOLD",
    "DEFAULT_SCORE_THRESHOLD",
    "DEFAULT_STRIDE",
    "EastBackend",
    "EastTensors",
    "InputShapeError",
    "east_decode",
    "locality_aware_nms",
    "tensors_from_json",
    "tensors_to_json",
    "clip_polygon",
    "polygon_area",
    "quad_iou",
    "API_KEY_ENV_VAR",
    "DEFAULT_UNIT_COST_USD",
    "CostLedger",
    "RemoteBackend",
    "StubBackend",
    "load_stub_script",
    "parse_stub_script",
    "DEFAULT_QUESTIONS",
    "VqaBackend",
]
