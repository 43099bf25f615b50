"""Connection-agnostic gateway core.

Transports (TCP, WebSocket, in-process loopback) decode wire bytes into
Messages and hand them here; everything after that point is identical
regardless of how the bytes arrived. Each session gets a single worker
task so frames are processed one at a time while the mailbox applies
latest-wins admission.
"""

from __future__ import annotations

import asyncio
import logging
import time
from dataclasses import dataclass, field
from typing import Awaitable, Callable

from wayfinder.clock import Clock, monotonic_ms
from wayfinder.frames import Frame
from wayfinder.gateway.config import GatewayConfig, make_backend
from wayfinder.gateway.pipeline import PipelineDeps, StepResult, run_pipeline_step
from wayfinder.gateway.sessions import Session, SessionPhase, SessionRegistry, SubmitResult
from wayfinder.protocol import (
    FormatError,
    Message,
    MsgType,
    encode_message,
    validate_frame_payload,
)
from wayfinder.protocol.payloads import ErrorPayload, HelloPayload

log = logging.getLogger(__name__)

SendBytes = Callable[[bytes], Awaitable[None]]


def _wall_ms() -> int:
    return int(time.time() * 1000)


@dataclass
class FrameMetric:
    frame_seq: int
    overhead_ms: float
    backend_ms: float
    e2e_ms: float


@dataclass
class GatewayMetrics:
    frames: list[FrameMetric] = field(default_factory=list)

    def record(self, result: StepResult, e2e_ms: float) -> None:
        self.frames.append(
            FrameMetric(result.frame_seq, result.overhead_ms, result.backend_ms, e2e_ms)
        )

    def overhead_samples(self) -> list[float]:
        return [m.overhead_ms for m in self.frames]

    def e2e_samples(self) -> list[float]:
        return [m.e2e_ms for m in self.frames]


class ClientConnection:
    """One transport-level connection. A connection is bound to at most
    one session (by the HELLO handshake); a session may outlive its
    connection and be picked up by a later one."""

    def __init__(self, send_bytes: SendBytes, close: Callable[[], Awaitable[None]]):
        self._send_bytes = send_bytes
        self._close = close
        self.session: Session | None = None
        self.closed = False

    async def send_message(self, message: Message) -> None:
        if self.closed:
            return
        await self._send_bytes(encode_message(message))

    async def close(self) -> None:
        if not self.closed:
            self.closed = True
            await self._close()


class SessionWorker:
    """Drains one session's mailbox, one frame at a time."""

    def __init__(self, gateway: "Gateway", session: Session):
        self._gateway = gateway
        self.session = session
        self._wake = asyncio.Event()
        self._idle = asyncio.Event()
        self._idle.set()
        self._stopped = False
        self._task = asyncio.create_task(self._run())

    def wake(self) -> None:
        self._idle.clear()
        self._wake.set()

    async def drain(self) -> None:
        """Wait until the mailbox is empty and no frame is mid-flight."""
        await self._idle.wait()

    async def stop(self) -> None:
        self._stopped = True
        self._wake.set()
        await self._task

    async def _run(self) -> None:
        while True:
            frame = self.session.take_frame()
            if frame is None:
                self._idle.set()
                if self._stopped:
                    return
                await self._wake.wait()
                self._wake.clear()
                if self._stopped and self.session.take_frame() is None:
                    self._idle.set()
                    return
                continue
            try:
                if self._gateway.recorder is not None:
                    self._gateway.recorder.on_frame(frame)
                result = await run_pipeline_step(self.session, frame, self._gateway.deps)
                await self._gateway.dispatch_result(self.session, frame, result)
            except Exception:
                log.exception("pipeline step failed for frame %d", frame.sequence)


class Gateway:
    """Session lifecycle + message routing. One instance per process."""

    def __init__(
        self,
        config: GatewayConfig,
        backend=None,
        clock: Clock | None = None,
    ):
        self.config = config
        self.clock: Clock = clock or monotonic_ms
        self.backend = backend if backend is not None else make_backend(config)
        self.registry = SessionRegistry(
            session_timeout_ms=config.session_timeout_ms,
            reconnect_window_ms=config.reconnect_window_ms,
        )
        self.metrics = GatewayMetrics()
        self.deps = PipelineDeps(
            backend=self.backend,
            lexicon=config.load_lexicon_table(),
            calibration=config.calibration,
            questions=config.vqa_questions,
            clock=self.clock,
            dedup_window_ms=config.dedup_window_ms,
            min_gap_ms=config.min_utterance_gap_ms,
            rewriter_url=config.rewriter_url,
            rewriter_timeout_ms=config.rewriter_timeout_ms,
        )
        if config.rewriter_url:
            import httpx

            self.deps.rewriter_client = httpx.AsyncClient()
        self._workers: dict[bytes, SessionWorker] = {}
        # session id -> connection currently bound to it (for dispatch)
        self._conns: dict[bytes, ClientConnection] = {}
        self._sweeper: asyncio.Task | None = None
        # anything with on_frame(frame) / on_instruction(frame_seq, dict);
        # fed post-mailbox, so superseded frames are never recorded
        self.recorder = None

    # -- connection event handlers (called by transports) ----------------

    async def on_message(self, conn: ClientConnection, message: Message) -> None:
        if message.msg_type == MsgType.HELLO:
            await self._handle_hello(conn, message)
        elif message.msg_type == MsgType.FRAME:
            await self._handle_frame(conn, message)
        elif message.msg_type == MsgType.HEARTBEAT:
            if conn.session is not None:
                self.registry.touch(conn.session, self.clock())
        elif message.msg_type == MsgType.BYE:
            await self._handle_bye(conn)
        else:
            # HELLO_ACK / INSTRUCTION / ERROR only flow server -> client
            await self._send_error(
                conn,
                ErrorPayload(
                    code="unexpected_type",
                    detail=f"clients do not send msg_type {int(message.msg_type)}",
                ),
            )

    async def on_disconnect(self, conn: ClientConnection) -> None:
        session = conn.session
        conn.session = None
        if session is None:
            return
        if self._conns.get(session.session_id) is conn:
            del self._conns[session.session_id]
        self.registry.mark_disconnected(session, self.clock())

    # -- message handlers -------------------------------------------------

    async def _handle_hello(self, conn: ClientConnection, message: Message) -> None:
        try:
            hello = HelloPayload.decode(message.payload)
        except FormatError as exc:
            await self._send_error(conn, ErrorPayload(code="bad_hello", detail=str(exc)))
            return
        session, ack = self.registry.open_session(
            hello, default_units=self.config.units, now=self.clock()
        )
        conn.session = session
        self._conns[session.session_id] = conn
        if session.session_id not in self._workers:
            self._workers[session.session_id] = SessionWorker(self, session)
        await conn.send_message(
            Message(
                MsgType.HELLO_ACK,
                session_id=session.session_id,
                sequence=session.next_out_seq(),
                timestamp_ms=_wall_ms(),
                payload=ack.encode(),
            )
        )

    async def _handle_frame(self, conn: ClientConnection, message: Message) -> None:
        session = conn.session
        if session is None:
            await self._send_error(
                conn, ErrorPayload(code="no_session", detail="FRAME before HELLO")
            )
            return
        try:
            validate_frame_payload(message.payload)
        except FormatError as exc:
            await self._send_error(conn, ErrorPayload(code="bad_frame", detail=str(exc)))
            return
        now = self.clock()
        self.registry.touch(session, now)
        frame = Frame(
            session_id=session.session_id,
            sequence=message.sequence,
            timestamp_ms=message.timestamp_ms,
            jpeg=message.payload,
            received_perf=time.perf_counter(),
        )
        outcome = self.registry.submit_frame(session, frame, now)
        if outcome != SubmitResult.STALE:
            worker = self._workers.get(session.session_id)
            if worker is not None:
                worker.wake()

    async def _handle_bye(self, conn: ClientConnection) -> None:
        session = conn.session
        conn.session = None
        if session is not None:
            self._conns.pop(session.session_id, None)
            self.registry.close_session(session)
            worker = self._workers.pop(session.session_id, None)
            if worker is not None:
                await worker.stop()
        await conn.close()

    # -- dispatch ----------------------------------------------------------

    async def dispatch_result(self, session: Session, frame: Frame, result: StepResult) -> None:
        conn = self._conns.get(session.session_id)
        if result.error is not None:
            if conn is not None:
                await self._send_error(conn, result.error, session=session)
        for _, payload in result.instructions:
            msg = Message(
                MsgType.INSTRUCTION,
                session_id=session.session_id,
                sequence=session.next_out_seq(),
                timestamp_ms=_wall_ms(),
                payload=payload.encode(),
            )
            if self.recorder is not None:
                self.recorder.on_instruction(
                    payload.frame_seq,
                    {
                        "text": payload.text,
                        "priority": payload.priority,
                        "dedup_key": payload.dedup_key,
                        "distance_m": payload.distance_m,
                        "direction": payload.direction,
                    },
                )
            if conn is not None:
                try:
                    await conn.send_message(msg)
                except Exception:
                    log.warning("dropped instruction: connection write failed")
        e2e_ms = (time.perf_counter() - frame.received_perf) * 1000.0
        self.metrics.record(result, e2e_ms)

    async def _send_error(
        self,
        conn: ClientConnection,
        payload: ErrorPayload,
        session: Session | None = None,
    ) -> None:
        bound = session or conn.session
        msg = Message(
            MsgType.ERROR,
            session_id=bound.session_id if bound else b"\x00" * 16,
            sequence=bound.next_out_seq() if bound else 0,
            timestamp_ms=_wall_ms(),
            payload=payload.encode(),
        )
        try:
            await conn.send_message(msg)
        except Exception:
            log.warning("dropped error report: connection write failed")

    # -- lifecycle ---------------------------------------------------------

    def start_sweeper(self, interval_ms: float | None = None) -> None:
        if self._sweeper is None:
            period = (interval_ms or self.config.heartbeat_interval_ms) / 1000.0
            self._sweeper = asyncio.create_task(self._sweep_loop(period))

    async def _sweep_loop(self, period_s: float) -> None:
        while True:
            await asyncio.sleep(period_s)
            await self.sweep_expired()

    async def sweep_expired(self) -> None:
        for session_id in self.registry.expire_sessions(self.clock()):
            self._conns.pop(session_id, None)
            worker = self._workers.pop(session_id, None)
            if worker is not None:
                await worker.stop()

    async def drain_session(self, session: Session) -> None:
        worker = self._workers.get(session.session_id)
        if worker is not None:
            await worker.drain()

    async def aclose(self) -> None:
        if self._sweeper is not None:
            self._sweeper.cancel()
            try:
                await self._sweeper
            except asyncio.CancelledError:
                pass
            self._sweeper = None
        for worker in list(self._workers.values()):
            await worker.stop()
        self._workers.clear()
        if self.deps.rewriter_client is not None:
            await self.deps.rewriter_client.aclose()
        await self.backend.aclose()
