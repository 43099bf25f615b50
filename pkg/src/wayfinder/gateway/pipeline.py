"""The per-frame processing step: perceive, interpret, compose, schedule.

Timing discipline: the step measures its own cost (overhead) separately
from backend inference, so the gateway's contribution to latency is
visible no matter which backend is plugged in. Overhead uses the real
performance counter even when the scheduling clock is a manual test clock.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

from wayfinder.backends.base import BackendError, PerceptionBackend
from wayfinder.clock import Clock
from wayfinder.composer import compose, filter_and_schedule, llm_rewrite
from wayfinder.composer.templates import Instruction
from wayfinder.frames import Frame
from wayfinder.gateway.sessions import Session
from wayfinder.interpreter import Calibration, SignClass, interpret
from wayfinder.protocol.payloads import ErrorPayload, InstructionPayload

_ERROR_CODES = {
    "BackendTimeout": "backend_timeout",
    "BackendUnavailable": "backend_unavailable",
    "BackendProtocolError": "backend_protocol",
}


@dataclass
class PipelineDeps:
    backend: PerceptionBackend
    lexicon: dict[str, SignClass]
    calibration: Calibration
    questions: Sequence[str]
    clock: Clock  # scheduling time (ms); injectable for replay
    dedup_window_ms: float
    min_gap_ms: float
    rewriter_url: str | None = None
    rewriter_client: object | None = None
    rewriter_timeout_ms: float = 300.0


@dataclass
class StepResult:
    frame_seq: int
    instructions: list[tuple[Instruction, InstructionPayload]]
    error: ErrorPayload | None
    overhead_ms: float
    backend_ms: float
    total_ms: float


def _payload_for(instruction: Instruction) -> InstructionPayload:
    _, _, direction = instruction.dedup_key.partition(":")
    return InstructionPayload(
        text=instruction.text,
        priority=int(instruction.priority),
        dedup_key=instruction.dedup_key,
        frame_seq=instruction.frame_seq,
        distance_m=instruction.distance_m,
        direction=direction if direction in ("left", "ahead", "right") else None,
    )


async def run_pipeline_step(session: Session, frame: Frame, deps: PipelineDeps) -> StepResult:
    """Process one frame end to end; backend trouble becomes an ERROR
    payload, never an exception, and the session stays usable."""
    t_start = time.perf_counter()
    backend_ms = 0.0
    b_start = time.perf_counter()
    try:
        obs = await deps.backend.analyze(frame, deps.questions)
    except BackendError as exc:
        backend_ms = (time.perf_counter() - b_start) * 1000.0
        session.counters.backend_errors += 1
        total_ms = (time.perf_counter() - t_start) * 1000.0
        error = ErrorPayload(
            code=_ERROR_CODES.get(type(exc).__name__, "backend_error"),
            detail=exc.detail,
            retryable=exc.retryable,
        )
        return StepResult(
            frame_seq=frame.sequence,
            instructions=[],
            error=error,
            overhead_ms=total_ms - backend_ms,
            backend_ms=backend_ms,
            total_ms=total_ms,
        )
    backend_ms = (time.perf_counter() - b_start) * 1000.0

    try:
        dims = frame.dimensions()
    except Exception as exc:
        total_ms = (time.perf_counter() - t_start) * 1000.0
        return StepResult(
            frame_seq=frame.sequence,
            instructions=[],
            error=ErrorPayload(code="bad_frame", detail=f"undecodable JPEG: {exc}"),
            overhead_ms=total_ms - backend_ms,
            backend_ms=backend_ms,
            total_ms=total_ms,
        )

    cues = interpret(obs, dims, deps.calibration, deps.lexicon)
    candidates = compose(cues, units=session.units, frame_seq=frame.sequence)
    dispatched = filter_and_schedule(
        candidates,
        session.dedup_memory,
        now=deps.clock(),
        dedup_window_ms=deps.dedup_window_ms,
        min_gap_ms=deps.min_gap_ms,
    )
    if deps.rewriter_url and deps.rewriter_client is not None and dispatched:
        dispatched = [
            await llm_rewrite(
                item, deps.rewriter_client, deps.rewriter_url, deps.rewriter_timeout_ms
            )
            for item in dispatched
        ]
    session.counters.analyses += 1
    session.counters.instructions_dispatched += len(dispatched)
    total_ms = (time.perf_counter() - t_start) * 1000.0
    return StepResult(
        frame_seq=frame.sequence,
        instructions=[(item, _payload_for(item)) for item in dispatched],
        error=None,
        overhead_ms=total_ms - backend_ms,
        backend_ms=backend_ms,
        total_ms=total_ms,
    )
