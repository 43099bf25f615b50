"""Shared backend abstraction: observation types, error taxonomy, timeouts.

A perception backend turns one camera frame into a RawObservation. Four
flavors exist: the scripted stub (test oracle), the EAST text detector fed
by an inference sidecar or fixture tensors, the VQA adapter, and the
metered remote-API adapter.
"""

from __future__ import annotations

import asyncio
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Sequence

from wayfinder.frames import Frame

DEFAULT_TIMEOUT_MS = 2000.0

Quad = tuple[tuple[float, float], ...]  # 4 vertices, clockwise, image pixels


class BackendError(Exception):
    """Base for analyze() failures; `retryable` tells the caller whether a
    later frame may succeed without operator intervention."""

    retryable = False

    def __init__(self, backend_name: str, detail: str):
        self.backend_name = backend_name
        self.detail = detail
        super().__init__(f"{backend_name}: {detail}")


class BackendTimeout(BackendError):
    retryable = True


class BackendUnavailable(BackendError):
    retryable = True


class BackendProtocolError(BackendError):
    """The backend answered, but not in the agreed shape. Not retryable."""

    retryable = False


@dataclass(frozen=True)
class TextRegion:
    """A located piece of signage text.

    quad: 4 vertices in original-image pixel coordinates, clockwise.
    text is None when the backend localizes but does not read.
    """

    quad: Quad
    score: float
    text: str | None = None

    def __post_init__(self):
        if len(self.quad) != 4:
            raise ValueError(f"quad needs 4 vertices, got {len(self.quad)}")
        for x, y in self.quad:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"quad vertex ({x}, {y}) is not finite")
        if not 0.0 < self.score <= 1.0:
            raise ValueError(f"score {self.score} outside (0, 1]")


@dataclass(frozen=True)
class VqaAnswer:
    question: str
    answer: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class RawObservation:
    frame_seq: int
    text_regions: tuple[TextRegion, ...] = ()
    vqa_answers: tuple[VqaAnswer, ...] = ()
    backend_name: str = ""
    inference_ms: float = 0.0

    def __post_init__(self):
        if self.inference_ms < 0:
            raise ValueError(f"inference_ms {self.inference_ms} negative")

    @property
    def empty(self) -> bool:
        return not self.text_regions and not self.vqa_answers


class PerceptionBackend(ABC):
    """One analyze() call per frame; implementations own their concurrency cap."""

    name: str = "backend"

    @abstractmethod
    async def analyze(self, frame: Frame, questions: Sequence[str] = ()) -> RawObservation:
        """Analyze a frame. Must not block past the configured timeout.

        Raises BackendTimeout, BackendUnavailable, or BackendProtocolError.
        """

    async def aclose(self) -> None:
        return None


async def bounded_wait(coro, timeout_ms: float, backend_name: str):
    """Await `coro` with a hard deadline; deadline overrun -> BackendTimeout."""
    try:
        return await asyncio.wait_for(coro, timeout=timeout_ms / 1000.0)
    except asyncio.TimeoutError:
        raise BackendTimeout(backend_name, f"no answer within {timeout_ms:g} ms") from None
