"""Visual question answering through the inference sidecar.

One POST per question against /v1/vqa (multipart: image + question), JSON
reply {"answer": str, "confidence": 0..1}. The sidecar hosts whatever VQA
model the operator chose; this adapter treats it as a black box. At most
one request in flight at a time: small VQA models are memory-bound and the
sidecar is assumed single-worker.
"""

from __future__ import annotations

import asyncio
import time
from typing import Sequence

from wayfinder.backends.base import (
    DEFAULT_TIMEOUT_MS,
    BackendProtocolError,
    BackendUnavailable,
    PerceptionBackend,
    RawObservation,
    VqaAnswer,
    bounded_wait,
)
from wayfinder.frames import Frame

# The two stock prompts; per-deployment question lists go in the config.
DEFAULT_QUESTIONS = (
    "Is this an exit sign?",
    "Give a summary of the image",
)


class VqaBackend(PerceptionBackend):
    name = "vqa"
    max_in_flight = 1

    def __init__(
        self,
        sidecar_url: str,
        timeout_ms: float = DEFAULT_TIMEOUT_MS,
        http_client=None,
    ):
        self._url = sidecar_url
        self._timeout_ms = timeout_ms
        self._client = http_client
        self._owns_client = False
        self._gate = asyncio.Semaphore(self.max_in_flight)

    async def analyze(self, frame: Frame, questions: Sequence[str] = ()) -> RawObservation:
        if not questions:
            questions = DEFAULT_QUESTIONS
        start = time.perf_counter()
        async with self._gate:
            answers = []
            for question in questions:
                answers.append(
                    await bounded_wait(
                        self._ask(frame, question), self._timeout_ms, self.name
                    )
                )
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        return RawObservation(
            frame_seq=frame.sequence,
            vqa_answers=tuple(answers),
            backend_name=self.name,
            inference_ms=elapsed_ms,
        )

    async def _ask(self, frame: Frame, question: str) -> VqaAnswer:
        client = await self._ensure_client()
        try:
            resp = await client.post(
                self._url,
                files={"image": ("frame.jpg", frame.jpeg, "image/jpeg")},
                data={"question": question},
            )
        except Exception as exc:
            raise BackendUnavailable(self.name, f"sidecar unreachable: {exc}") from exc
        if resp.status_code // 100 != 2:
            raise BackendUnavailable(self.name, f"sidecar HTTP {resp.status_code}")
        try:
            body = resp.json()
        except ValueError as exc:
            raise BackendProtocolError(self.name, f"body not JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise BackendProtocolError(self.name, "body must be a JSON object")
        answer = body.get("answer")
        confidence = body.get("confidence")
        if not isinstance(answer, str):
            raise BackendProtocolError(self.name, "missing string field 'answer'")
        if isinstance(confidence, bool) or not isinstance(confidence, (int, float)):
            raise BackendProtocolError(self.name, "missing numeric field 'confidence'")
        try:
            return VqaAnswer(question=question, answer=answer, confidence=float(confidence))
        except ValueError as exc:
            raise BackendProtocolError(self.name, str(exc)) from exc

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
