"""EAST text-detector post-processing: tensor decode and locality-aware NMS.

Inference itself runs outside the gateway (an HTTP sidecar, or fixture
tensors on disk for offline runs); this module turns its output grids into
merged text regions. This is the one real algorithm implemented in-process.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from wayfinder.backends.base import (
    DEFAULT_TIMEOUT_MS,
    BackendProtocolError,
    BackendUnavailable,
    PerceptionBackend,
    Quad,
    RawObservation,
    TextRegion,
    bounded_wait,
)
from wayfinder.frames import Frame

DEFAULT_SCORE_THRESHOLD = 0.8
DEFAULT_IOU_THRESHOLD = 0.2
DEFAULT_STRIDE = 4.0

# geometry_map channel order
CH_TOP, CH_RIGHT, CH_BOTTOM, CH_LEFT, CH_THETA = range(5)


class InputShapeError(ValueError):
    """Score and geometry grids disagree, or a tensor has the wrong rank."""


@dataclass(frozen=True)
class EastTensors:
    """Detector output grids.

    score_map: (H, W) in [0, 1]. geometry_map: (H, W, 5) with channels
    (d_top, d_right, d_bottom, d_left, theta); distances are original-image
    pixels >= 0, |theta| <= pi/2. stride maps grid cells to pixels.
    """

    score_map: np.ndarray
    geometry_map: np.ndarray
    stride: float = DEFAULT_STRIDE

    def __post_init__(self):
        score = np.asarray(self.score_map, dtype=np.float64)
        geo = np.asarray(self.geometry_map, dtype=np.float64)
        if score.ndim != 2:
            raise InputShapeError(f"score_map must be 2-D, got shape {score.shape}")
        if geo.ndim != 3 or geo.shape[2] != 5:
            raise InputShapeError(f"geometry_map must be (H, W, 5), got shape {geo.shape}")
        if score.shape != geo.shape[:2]:
            raise InputShapeError(
                f"score grid {score.shape} != geometry grid {geo.shape[:2]}"
            )
        if self.stride <= 0:
            raise ValueError(f"stride must be positive, got {self.stride}")
        if score.size:
            if score.min() < 0.0 or score.max() > 1.0:
                raise ValueError("score_map values outside [0, 1]")
            if geo[:, :, :CH_THETA].min() < 0.0:
                raise ValueError("geometry distances must be non-negative")
            if np.abs(geo[:, :, CH_THETA]).max() > math.pi / 2 + 1e-9:
                raise ValueError("|theta| must be <= pi/2")
        object.__setattr__(self, "score_map", score)
        object.__setattr__(self, "geometry_map", geo)


def east_decode(tensors: EastTensors, score_threshold: float = DEFAULT_SCORE_THRESHOLD) -> list[TextRegion]:
    """Reconstruct one rotated rectangle per cell scoring >= threshold.

    The cell anchors the box at p = (stride*x, stride*y); the four corners
    sit at the signed offsets (d_left, d_top, d_right, d_bottom) from p and
    are rotated by theta about p. Emission order is row-major over cells.
    """
    if not 0.0 < score_threshold < 1.0:
        raise ValueError(f"score_threshold {score_threshold} outside (0, 1)")
    score = tensors.score_map
    geo = tensors.geometry_map
    stride = tensors.stride
    ys, xs = np.nonzero(score >= score_threshold)  # row-major by construction
    regions: list[TextRegion] = []
    for y, x in zip(ys.tolist(), xs.tolist()):
        px = stride * x
        py = stride * y
        d_top, d_right, d_bottom, d_left, theta = geo[y, x].tolist()
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)
        offsets = (
            (-d_left, -d_top),
            (d_right, -d_top),
            (d_right, d_bottom),
            (-d_left, d_bottom),
        )
        quad = tuple(
            (px + dx * cos_t - dy * sin_t, py + dx * sin_t + dy * cos_t)
            for dx, dy in offsets
        )
        regions.append(TextRegion(quad=quad, score=float(score[y, x]), text=None))
    return regions


def _weighted_merge(a: TextRegion, b: TextRegion) -> TextRegion:
    """Score-weighted vertex average; merged score saturates at 1.0."""
    wa, wb = a.score, b.score
    total = wa + wb
    quad: Quad = tuple(
        (
            (wa * a.quad[i][0] + wb * b.quad[i][0]) / total,
            (wa * a.quad[i][1] + wb * b.quad[i][1]) / total,
        )
        for i in range(4)
    )
    text = a.text if wa >= wb else b.text
    if text is None:
        text = a.text if a.text is not None else b.text
    return TextRegion(quad=quad, score=min(1.0, total), text=text)


def _standard_nms(regions: list[TextRegion], iou_threshold: float) -> list[TextRegion]:
    from wayfinder.backends.geometry import quad_iou

    order = sorted(range(len(regions)), key=lambda i: (-regions[i].score, i))
    kept: list[TextRegion] = []
    for i in order:
        cand = regions[i]
        if all(quad_iou(cand.quad, k.quad) < iou_threshold for k in kept):
            kept.append(cand)
    return kept


def locality_aware_nms(
    regions: Sequence[TextRegion], iou_threshold: float = DEFAULT_IOU_THRESHOLD
) -> list[TextRegion]:
    """Two-phase suppression tuned for row-major detector output.

    Phase 1 walks the regions once in the given order, merging each into the
    running candidate whenever their IoU >= threshold (merge = score-weighted
    vertex average, score = min(1.0, sum)). Phase 2 is standard
    descending-score NMS over the phase-1 pool. Idempotent; the survivors are
    pairwise below the threshold.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold {iou_threshold} outside (0, 1)")
    from wayfinder.backends.geometry import quad_iou

    pool: list[TextRegion] = []
    current: TextRegion | None = None
    for region in regions:
        if current is None:
            current = region
        elif quad_iou(current.quad, region.quad) >= iou_threshold:
            current = _weighted_merge(current, region)
        else:
            pool.append(current)
            current = region
    if current is not None:
        pool.append(current)
    return _standard_nms(pool, iou_threshold)


def tensors_to_json(tensors: EastTensors) -> dict:
    """Sidecar/fixture schema: flat row-major lists plus grid dims."""
    h, w = tensors.score_map.shape
    return {
        "h": h,
        "w": w,
        "stride": tensors.stride,
        "score": [round(v, 9) for v in tensors.score_map.reshape(-1).tolist()],
        "geometry": [round(v, 9) for v in tensors.geometry_map.reshape(-1).tolist()],
    }


def tensors_from_json(obj: object, source: str = "east sidecar") -> EastTensors:
    """Parse the sidecar/fixture JSON schema; violations -> BackendProtocolError."""
    if not isinstance(obj, dict):
        raise BackendProtocolError("east", f"{source}: expected JSON object")
    try:
        h = int(obj["h"])
        w = int(obj["w"])
        stride = float(obj.get("stride", DEFAULT_STRIDE))
        score = np.asarray(obj["score"], dtype=np.float64)
        geometry = np.asarray(obj["geometry"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise BackendProtocolError("east", f"{source}: {exc}") from exc
    if h < 0 or w < 0 or score.size != h * w or geometry.size != h * w * 5:
        raise BackendProtocolError(
            "east",
            f"{source}: dims {h}x{w} do not match score[{score.size}] / geometry[{geometry.size}]",
        )
    try:
        return EastTensors(
            score_map=score.reshape(h, w),
            geometry_map=geometry.reshape(h, w, 5),
            stride=stride,
        )
    except (InputShapeError, ValueError) as exc:
        raise BackendProtocolError("east", f"{source}: {exc}") from exc


class EastBackend(PerceptionBackend):
    """Text localization via sidecar inference (or fixture tensors on disk).

    Exactly one of sidecar_url / fixture_dir must be given. Fixture files are
    named `<frame_seq>.json`; a missing file means no detections for that
    frame. Questions are ignored: this backend only localizes text.
    """

    name = "east"

    def __init__(
        self,
        sidecar_url: str | None = None,
        fixture_dir: str | Path | None = None,
        score_threshold: float = DEFAULT_SCORE_THRESHOLD,
        iou_threshold: float = DEFAULT_IOU_THRESHOLD,
        timeout_ms: float = DEFAULT_TIMEOUT_MS,
        http_client=None,
    ):
        if (sidecar_url is None) == (fixture_dir is None):
            raise ValueError("exactly one of sidecar_url / fixture_dir required")
        self._url = sidecar_url
        self._dir = Path(fixture_dir) if fixture_dir is not None else None
        self._score_threshold = score_threshold
        self._iou_threshold = iou_threshold
        self._timeout_ms = timeout_ms
        self._client = http_client
        self._owns_client = False

    async def analyze(self, frame: Frame, questions: Sequence[str] = ()) -> RawObservation:
        start = time.perf_counter()
        if self._dir is not None:
            tensors = self._load_fixture(frame.sequence)
        else:
            payload = await bounded_wait(self._call_sidecar(frame), self._timeout_ms, self.name)
            tensors = tensors_from_json(payload)
        regions = ()
        if tensors is not None:
            decoded = east_decode(tensors, self._score_threshold)
            regions = tuple(locality_aware_nms(decoded, self._iou_threshold))
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        return RawObservation(
            frame_seq=frame.sequence,
            text_regions=regions,
            backend_name=self.name,
            inference_ms=elapsed_ms,
        )

    def _load_fixture(self, seq: int) -> EastTensors | None:
        path = self._dir / f"{seq}.json"
        if not path.exists():
            return None
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise BackendProtocolError(self.name, f"fixture {path.name}: {exc}") from exc
        return tensors_from_json(obj, source=f"fixture {path.name}")

    async def _call_sidecar(self, frame: Frame) -> object:
        client = await self._ensure_client()
        try:
            resp = await client.post(
                self._url,
                files={"image": ("frame.jpg", frame.jpeg, "image/jpeg")},
            )
        except Exception as exc:  # httpx transport errors
            raise BackendUnavailable(self.name, f"sidecar unreachable: {exc}") from exc
        if resp.status_code // 100 != 2:
            raise BackendUnavailable(self.name, f"sidecar HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise BackendProtocolError(self.name, f"sidecar body not JSON: {exc}") from exc

    async def _ensure_client(self):
        if self._client is None:
            import httpx

            self._client = httpx.AsyncClient()
            self._owns_client = True
        return self._client

    async def aclose(self) -> None:
        if self._owns_client and self._client is not None:
            await self._client.aclose()
            self._client = None
