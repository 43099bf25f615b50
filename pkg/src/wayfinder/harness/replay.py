"""Replay recordings through an in-process loopback client and score them.

The loopback client exchanges the same encoded wire bytes a TCP client
would, but hands them straight to the gateway object. Replay time comes
from a manual clock stepped to each frame's recorded timestamp, which
makes stub-backed replays exactly deterministic; --fast simply skips the
real sleeps between steps.
"""

from __future__ import annotations

import asyncio
import json
from collections import Counter
from dataclasses import dataclass
from typing import Callable

from wayfinder.backends.base import PerceptionBackend
from wayfinder.clock import ManualClock
from wayfinder.gateway.config import GatewayConfig, _calibration_from_table
from wayfinder.gateway.service import ClientConnection, Gateway
from wayfinder.harness.recording import INSTRUCTIONS_NAME, Recording
from wayfinder.harness.report import EvalReport, percentile
from wayfinder.protocol import Message, MsgType, decode_exact
from wayfinder.protocol.payloads import (
    HelloAckPayload,
    HelloPayload,
    InstructionPayload,
    PRIORITY_CAUTION,
)

MIN_DRILL_FRAMES = 10
DEFAULT_RESUME_DELAY_MS = 2000.0


class LoopbackClient:
    """A protocol-faithful client with no socket underneath."""

    def __init__(self, gateway: Gateway):
        self.gateway = gateway
        self.received: list[Message] = []
        self.conn = ClientConnection(self._send, self._close)

    async def _send(self, data: bytes) -> None:
        self.received.append(decode_exact(data))

    async def _close(self) -> None:
        pass

    async def hello(
        self,
        client_name: str = "replay-harness",
        units: str | None = None,
        resume_session_id: str | None = None,
        fps_hint: float = 2.0,
    ) -> HelloAckPayload:
        payload = HelloPayload(
            client_name=client_name,
            fps_hint=fps_hint,
            units=units,
            resume_session_id=resume_session_id,
        )
        await self.gateway.on_message(
            self.conn, Message(MsgType.HELLO, payload=payload.encode())
        )
        ack_msg = self.received[-1]
        if ack_msg.msg_type != MsgType.HELLO_ACK:
            raise RuntimeError(f"expected HELLO_ACK, got {ack_msg.msg_type!r}")
        return HelloAckPayload.decode(ack_msg.payload)

    async def send_frame(self, sequence: int, timestamp_ms: int, jpeg: bytes) -> None:
        session = self.conn.session
        await self.gateway.on_message(
            self.conn,
            Message(
                MsgType.FRAME,
                session_id=session.session_id,
                sequence=sequence,
                timestamp_ms=timestamp_ms,
                payload=jpeg,
            ),
        )
        await self.gateway.drain_session(session)

    async def disconnect(self) -> None:
        await self.gateway.on_disconnect(self.conn)

    def instructions(self) -> list[InstructionPayload]:
        return [
            InstructionPayload.decode(m.payload)
            for m in self.received
            if m.msg_type == MsgType.INSTRUCTION
        ]


def config_for_recording(recording: Recording, **overrides) -> GatewayConfig:
    """Gateway settings implied by the recording's own metadata."""
    kwargs: dict = {}
    cal_doc = recording.metadata.get("calibration")
    if cal_doc:
        kwargs["calibration"] = _calibration_from_table(cal_doc, str(recording.root))
    kwargs.update(overrides)
    return GatewayConfig(**kwargs)


def _score(recording: Recording, dispatched: list[InstructionPayload]):
    labeled = [
        (label.sequence, cue.key)
        for label in recording.labels.values()
        for cue in label.cues
    ]
    detected = sum(
        1
        for seq, key in labeled
        if any(p.frame_seq == seq and p.dedup_key == key for p in dispatched)
    )
    correct = 0
    for p in dispatched:
        label = recording.labels.get(p.frame_seq)
        if label is not None and any(cue.key == p.dedup_key for cue in label.cues):
            correct += 1
    return len(labeled), detected, len(dispatched), correct


def _repetition_rate(dispatched: list[InstructionPayload]) -> float | None:
    if not dispatched:
        return None
    seen: set[str] = set()
    repeats = 0
    for p in dispatched:
        if p.dedup_key in seen:
            repeats += 1
        seen.add(p.dedup_key)
    return repeats / len(dispatched)


async def _run_recording(
    gateway: Gateway,
    client: LoopbackClient,
    clock: ManualClock,
    recording: Recording,
    entries,
    shift_ms: float = 0.0,
    fast: bool = True,
) -> None:
    previous_ts: int | None = None
    for entry in entries:
        if not fast and previous_ts is not None:
            await asyncio.sleep((entry.timestamp_ms - previous_ts) / 1000.0)
        previous_ts = entry.timestamp_ms
        clock.set(entry.timestamp_ms + shift_ms)
        await client.send_frame(
            entry.sequence, entry.timestamp_ms, recording.frame_bytes(entry)
        )


async def replay_async(
    recording: Recording,
    backend: PerceptionBackend,
    config: GatewayConfig | None = None,
    *,
    fast: bool = True,
    units: str | None = None,
    write_instructions: bool = False,
) -> EvalReport:
    if config is None:
        config = config_for_recording(recording)
    start_ms = recording.frames[0].timestamp_ms if recording.frames else 0
    clock = ManualClock(start_ms)
    gateway = Gateway(config, backend=backend, clock=clock)
    client = LoopbackClient(gateway)
    try:
        await client.hello(units=units)
        session = client.conn.session
        await _run_recording(gateway, client, clock, recording, recording.frames, fast=fast)
        counters = session.counters
        dispatched = client.instructions()
    finally:
        await gateway.aclose()

    if write_instructions:
        lines = [
            json.dumps(
                {
                    "frame_seq": p.frame_seq,
                    "text": p.text,
                    "priority": p.priority,
                    "dedup_key": p.dedup_key,
                    "distance_m": p.distance_m,
                    "direction": p.direction,
                },
                sort_keys=True,
            )
            for p in dispatched
        ]
        (recording.root / INSTRUCTIONS_NAME).write_text(
            "".join(line + "\n" for line in lines), "utf-8"
        )

    labeled, detected, emitted, correct = _score(recording, dispatched)
    overhead = gateway.metrics.overhead_samples()
    e2e = gateway.metrics.e2e_samples()
    return EvalReport(
        completeness=None if labeled == 0 else detected / labeled,
        correctness=None if emitted == 0 else correct / emitted,
        labeled_cues=labeled,
        detected_cues=detected,
        emitted=emitted,
        correct=correct,
        overhead_p50_ms=percentile(overhead, 50),
        overhead_p95_ms=percentile(overhead, 95),
        e2e_p50_ms=percentile(e2e, 50),
        e2e_p95_ms=percentile(e2e, 95),
        repetition_rate=_repetition_rate(dispatched),
        profiles=[
            f"backend={backend.name}",
            "transport=loopback",
            f"units={units or config.units}",
            "timing=fast" if fast else "timing=recorded",
        ],
        frames_total=len(recording.frames),
        frames_analyzed=counters.analyses,
        drops_stale=counters.frames_stale,
        supersessions=counters.frames_superseded,
        backend_errors=counters.backend_errors,
    )


def replay(recording, backend, config=None, **kwargs) -> EvalReport:
    return asyncio.run(replay_async(recording, backend, config, **kwargs))


@dataclass
class RecoverabilityResult:
    passed: bool
    detail: str
    resumed: bool
    oracle_cautions: dict[str, int]
    drill_cautions: dict[str, int]

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"


def _cautions(dispatched: list[InstructionPayload]) -> Counter:
    return Counter(p.dedup_key for p in dispatched if p.priority == PRIORITY_CAUTION)


async def recoverability_drill_async(
    recording: Recording,
    backend_factory: Callable[[], PerceptionBackend],
    config: GatewayConfig | None = None,
    resume_delay_ms: float = DEFAULT_RESUME_DELAY_MS,
) -> RecoverabilityResult:
    """Drop the connection after frame n//2, resume, and check that the
    caution record matches an uninterrupted run exactly."""
    if len(recording) < MIN_DRILL_FRAMES:
        raise ValueError(
            f"recoverability drill needs at least {MIN_DRILL_FRAMES} frames, "
            f"got {len(recording)}"
        )
    if config is None:
        config = config_for_recording(recording)

    # oracle: the same walk with no interruption
    oracle_backend = backend_factory()
    oracle_gateway = Gateway(
        config, backend=oracle_backend, clock=ManualClock(recording.frames[0].timestamp_ms)
    )
    oracle_client = LoopbackClient(oracle_gateway)
    try:
        await oracle_client.hello()
        await _run_recording(
            oracle_gateway,
            oracle_client,
            oracle_gateway.clock,
            recording,
            recording.frames,
        )
        oracle = _cautions(oracle_client.instructions())
    finally:
        await oracle_gateway.aclose()

    # drill: drop after frame n//2, resume resume_delay_ms later; the
    # remaining frames arrive with their original spacing, shifted
    mid = len(recording) // 2
    clock = ManualClock(recording.frames[0].timestamp_ms)
    gateway = Gateway(config, backend=backend_factory(), clock=clock)
    first = LoopbackClient(gateway)
    try:
        ack = await first.hello()
        await _run_recording(gateway, first, clock, recording, recording.frames[:mid])
        await first.disconnect()

        clock.advance(resume_delay_ms)
        second = LoopbackClient(gateway)
        ack2 = await second.hello(resume_session_id=ack.session_id)
        await _run_recording(
            gateway,
            second,
            clock,
            recording,
            recording.frames[mid:],
            shift_ms=resume_delay_ms,
        )
        drill = _cautions(first.instructions()) + _cautions(second.instructions())
        resumed = ack2.resumed
    finally:
        await gateway.aclose()

    lost = oracle - drill
    duplicated = drill - oracle
    if not lost and not duplicated:
        return RecoverabilityResult(
            passed=True,
            detail=f"cautions preserved across reconnect (resumed={resumed})",
            resumed=resumed,
            oracle_cautions=dict(oracle),
            drill_cautions=dict(drill),
        )
    parts = []
    if duplicated:
        parts.append(
            f"duplicated cautions (dedup state lost): {sorted(duplicated.elements())}"
        )
    if lost:
        parts.append(f"lost cautions: {sorted(lost.elements())}")
    return RecoverabilityResult(
        passed=False,
        detail="; ".join(parts) + f" (resumed={resumed})",
        resumed=resumed,
        oracle_cautions=dict(oracle),
        drill_cautions=dict(drill),
    )


def recoverability_drill(recording, backend_factory, config=None, **kw) -> RecoverabilityResult:
    return asyncio.run(
        recoverability_drill_async(recording, backend_factory, config, **kw)
    )


def run_evaluation(
    recording: Recording,
    backend_factory: Callable[[], PerceptionBackend],
    config: GatewayConfig | None = None,
    *,
    fast: bool = True,
    drill: bool = True,
    units: str | None = None,
    write_instructions: bool = False,
) -> EvalReport:
    """Full evaluation: scored replay plus the recoverability drill."""
    report = replay(
        recording,
        backend_factory(),
        config,
        fast=fast,
        units=units,
        write_instructions=write_instructions,
    )
    if drill and len(recording) >= MIN_DRILL_FRAMES:
        result = recoverability_drill(recording, backend_factory, config)
        report.recoverability = result.status
        report.recoverability_detail = result.detail
    elif drill:
        report.recoverability = "not run"
        report.recoverability_detail = (
            f"recording has {len(recording)} frames; drill needs {MIN_DRILL_FRAMES}"
        )
    return report
