"""Session lifecycle and the latest-wins frame mailbox.

State machine: ACTIVE -> (silence beyond session_timeout) DISCONNECTED ->
(beyond reconnect_window) EXPIRED and removed. A client resuming a
DISCONNECTED session inside the window gets its dedup memory and sequence
high-water mark back, so nothing is re-spoken after a Wi-Fi blip.

All timestamps are milliseconds from one injected monotonic clock, which
is what makes replay-driven tests deterministic.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from enum import Enum

from wayfinder.composer.scheduler import DedupMemory
from wayfinder.frames import Frame
from wayfinder.protocol.payloads import HelloAckPayload, HelloPayload


class SessionPhase(Enum):
    ACTIVE = "active"
    DISCONNECTED = "disconnected"
    EXPIRED = "expired"


class SubmitResult(Enum):
    ACCEPTED = "accepted"  # mailbox was empty
    SUPERSEDED = "superseded"  # accepted, displacing an unprocessed frame
    STALE = "stale"  # sequence not newer than the high-water mark


@dataclass
class SessionCounters:
    frames_accepted: int = 0
    frames_superseded: int = 0
    frames_stale: int = 0
    analyses: int = 0
    backend_errors: int = 0
    instructions_dispatched: int = 0


@dataclass
class Session:
    session_id: bytes
    client_name: str
    units: str
    accepted_fps: float
    last_seen_ms: float
    phase: SessionPhase = SessionPhase.ACTIVE
    disconnected_at_ms: float | None = None
    highest_frame_seq: int | None = None  # None until the first frame
    mailbox: Frame | None = None
    dedup_memory: DedupMemory = field(default_factory=DedupMemory)
    counters: SessionCounters = field(default_factory=SessionCounters)
    out_seq: int = 0  # sequence numbers for gateway-to-client messages

    @property
    def session_id_hex(self) -> str:
        return self.session_id.hex()

    def next_out_seq(self) -> int:
        self.out_seq += 1
        return self.out_seq

    def take_frame(self) -> Frame | None:
        frame, self.mailbox = self.mailbox, None
        return frame


class SessionRegistry:
    """The single authority over all sessions; connection handlers share
    mutable state only through it."""

    def __init__(self, session_timeout_ms: float, reconnect_window_ms: float):
        self._session_timeout_ms = session_timeout_ms
        self._reconnect_window_ms = reconnect_window_ms
        self._sessions: dict[bytes, Session] = {}

    def __len__(self) -> int:
        return len(self._sessions)

    def get(self, session_id: bytes) -> Session | None:
        return self._sessions.get(session_id)

    def open_session(
        self, hello: HelloPayload, default_units: str, now: float
    ) -> tuple[Session, HelloAckPayload]:
        """Create a session, or revive the named DISCONNECTED one when the
        resume arrives inside its reconnect window. A dead or unknown resume
        target silently becomes a fresh session: the user should never have
        to care."""
        resumed = False
        session: Session | None = None
        if hello.resume_session_id:
            try:
                wanted = bytes.fromhex(hello.resume_session_id)
            except ValueError:
                wanted = b""
            candidate = self._sessions.get(wanted)
            if (
                candidate is not None
                and candidate.phase is SessionPhase.DISCONNECTED
                and candidate.disconnected_at_ms is not None
                and (now - candidate.disconnected_at_ms) <= self._reconnect_window_ms
            ):
                candidate.phase = SessionPhase.ACTIVE
                candidate.disconnected_at_ms = None
                candidate.last_seen_ms = now
                if hello.units is not None:
                    candidate.units = hello.units
                candidate.accepted_fps = hello.fps_hint
                session = candidate
                resumed = True
        if session is None:
            session = Session(
                session_id=uuid.uuid4().bytes,
                client_name=hello.client_name,
                units=hello.units or default_units,
                accepted_fps=hello.fps_hint,
                last_seen_ms=now,
            )
            self._sessions[session.session_id] = session
        ack = HelloAckPayload(
            session_id=session.session_id_hex,
            accepted_fps=session.accepted_fps,
            resumed=resumed,
        )
        return session, ack

    def touch(self, session: Session, now: float) -> None:
        session.last_seen_ms = now

    def submit_frame(self, session: Session, frame: Frame, now: float) -> SubmitResult:
        """Latest-wins: the mailbox holds at most one frame, and sequence
        numbers never move backwards."""
        session.last_seen_ms = now
        if (
            session.highest_frame_seq is not None
            and frame.sequence <= session.highest_frame_seq
        ):
            session.counters.frames_stale += 1
            return SubmitResult.STALE
        session.highest_frame_seq = frame.sequence
        displaced = session.mailbox is not None
        session.mailbox = frame
        if displaced:
            session.counters.frames_superseded += 1
            return SubmitResult.SUPERSEDED
        session.counters.frames_accepted += 1
        return SubmitResult.ACCEPTED

    def mark_disconnected(self, session: Session, now: float) -> None:
        if session.phase is SessionPhase.ACTIVE:
            session.phase = SessionPhase.DISCONNECTED
            session.disconnected_at_ms = now

    def close_session(self, session: Session) -> None:
        """Graceful BYE: the session is finished, not resumable."""
        session.phase = SessionPhase.EXPIRED
        self._sessions.pop(session.session_id, None)

    def expire_sessions(self, now: float) -> list[bytes]:
        """Sweep: silence turns ACTIVE into DISCONNECTED; overstaying the
        reconnect window turns DISCONNECTED into EXPIRED (removed)."""
        expired: list[bytes] = []
        for session in list(self._sessions.values()):
            if (
                session.phase is SessionPhase.ACTIVE
                and (now - session.last_seen_ms) > self._session_timeout_ms
            ):
                session.phase = SessionPhase.DISCONNECTED
                session.disconnected_at_ms = now
            if (
                session.phase is SessionPhase.DISCONNECTED
                and session.disconnected_at_ms is not None
                and (now - session.disconnected_at_ms) > self._reconnect_window_ms
            ):
                session.phase = SessionPhase.EXPIRED
                del self._sessions[session.session_id]
                expired.append(session.session_id)
        return expired
