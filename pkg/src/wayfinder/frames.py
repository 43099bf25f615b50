"""A single captured camera frame moving through the gateway."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

from PIL import Image


@dataclass
class Frame:
    session_id: bytes
    sequence: int
    timestamp_ms: int
    jpeg: bytes
    # perf_counter() stamp set by the gateway when the frame is accepted;
    # end-to-end latency is measured from here.
    received_perf: float = 0.0
    _dims: tuple[int, int] | None = field(default=None, repr=False, compare=False)

    def dimensions(self) -> tuple[int, int]:
        """(width, height) in pixels, read from the JPEG header."""
        if self._dims is None:
            with Image.open(io.BytesIO(self.jpeg)) as im:
                self._dims = im.size
        return self._dims
