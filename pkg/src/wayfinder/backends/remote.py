"""Metered remote recognition API adapter.

The remote service is paid per processed image, so the ledger counts in
exact decimal arithmetic and only counts calls that actually produced a
usable observation; timeouts, transport failures, non-2xx statuses, and
unparseable bodies cost nothing.

Expected response JSON:

    {"labels": [{"name": "person", "confidence": 0.97}, ...],
     "text_regions": [{"quad": [[x,y]x4], "score": 0.9, "text": "EXIT"}, ...]}

Both keys optional. Labels are folded into vqa_answers under the synthetic
question "label" so downstream consumers see one observation shape.
"""

from __future__ import annotations

import asyncio
import threading
import time
from decimal import Decimal
from typing import Sequence

from wayfinder.backends.base import (
    DEFAULT_TIMEOUT_MS,
    BackendProtocolError,
    BackendUnavailable,
    PerceptionBackend,
    RawObservation,
    TextRegion,
    VqaAnswer,
    bounded_wait,
)
from wayfinder.frames import Frame

DEFAULT_UNIT_COST_USD = "0.001"  # 1 dollar per 1000 processed images
API_KEY_ENV_VAR = "WAYFINDER_REMOTE_API_KEY"
LABEL_QUESTION = "label"


class CostLedger:
    """Exact running spend: total is always count x unit cost, no float drift."""

    def __init__(self, unit_cost_usd: str | Decimal = DEFAULT_UNIT_COST_USD):
        self._unit = Decimal(str(unit_cost_usd))
        if self._unit < 0:
            raise ValueError(f"unit cost {self._unit} negative")
        self._count = 0
        self._lock = threading.Lock()

    def record_success(self) -> None:
        with self._lock:
            self._count += 1

    @property
    def images_processed(self) -> int:
        return self._count

    @property
    def unit_cost_usd(self) -> Decimal:
        return self._unit

    @property
    def total_usd(self) -> Decimal:
        with self._lock:
            return self._unit * self._count

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "images_processed": self._count,
                "unit_cost_usd": str(self._unit),
                "total_usd": str(self._unit * self._count),
            }


class RemoteBackend(PerceptionBackend):
    name = "remote"
    max_in_flight = 4

    def __init__(
        self,
        url: str,
        api_key: str,
        ledger: CostLedger | None = None,
        timeout_ms: float = DEFAULT_TIMEOUT_MS,
        http_client=None,
    ):
        if not api_key:
            raise ValueError("remote backend requires an API key")
        self._url = url
        self._api_key = api_key
        self.ledger = ledger if ledger is not None else CostLedger()
        self._timeout_ms = timeout_ms
        self._client = http_client
        self._owns_client = False
        self._gate = asyncio.Semaphore(self.max_in_flight)

    async def analyze(self, frame: Frame, questions: Sequence[str] = ()) -> RawObservation:
        start = time.perf_counter()
        async with self._gate:
            body = await bounded_wait(self._call(frame), self._timeout_ms, self.name)
        observation = self._parse(frame.sequence, body, start)
        self.ledger.record_success()  # billed only once the reply parsed
        return observation

    async def _call(self, frame: Frame) -> object:
        client = await self._ensure_client()
        try:
            resp = await client.post(
                self._url,
                content=frame.jpeg,
                headers={
                    "Authorization": f"Bearer {self._api_key}",
                    "Content-Type": "image/jpeg",
                },
            )
        except Exception as exc:
            raise BackendUnavailable(self.name, f"endpoint unreachable: {exc}") from exc
        if resp.status_code // 100 != 2:
            raise BackendUnavailable(self.name, f"HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise BackendProtocolError(self.name, f"body not JSON: {exc}") from exc

    def _parse(self, frame_seq: int, body: object, start: float) -> RawObservation:
        if not isinstance(body, dict):
            raise BackendProtocolError(self.name, "body must be a JSON object")
        answers: list[VqaAnswer] = []
        for label in body.get("labels", []):
            if not isinstance(label, dict):
                raise BackendProtocolError(self.name, "label entries must be objects")
            name = label.get("name")
            confidence = label.get("confidence")
            if not isinstance(name, str) or isinstance(confidence, bool) or not isinstance(
                confidence, (int, float)
            ):
                raise BackendProtocolError(self.name, f"bad label entry {label!r}")
            try:
                answers.append(
                    VqaAnswer(question=LABEL_QUESTION, answer=name, confidence=float(confidence))
                )
            except ValueError as exc:
                raise BackendProtocolError(self.name, str(exc)) from exc
        regions: list[TextRegion] = []
        for entry in body.get("text_regions", []):
            if not isinstance(entry, dict) or "quad" not in entry:
                raise BackendProtocolError(self.name, f"bad text region {entry!r}")
            try:
                quad = tuple((float(p[0]), float(p[1])) for p in entry["quad"])
                regions.append(
                    TextRegion(
                        quad=quad,
                        score=float(entry.get("score", 1.0)),
                        text=entry.get("text"),
                    )
                )
            except (TypeError, ValueError, IndexError) as exc:
                raise BackendProtocolError(self.name, f"bad text region: {exc}") from exc
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        return RawObservation(
            frame_seq=frame_seq,
            text_regions=tuple(regions),
            vqa_answers=tuple(answers),
            backend_name=self.name,
            inference_ms=elapsed_ms,
        )

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
