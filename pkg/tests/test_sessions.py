"""Session registry: lifecycle transitions, resume, and the frame mailbox."""

import pytest

from wayfinder.composer.scheduler import DedupEntry
from wayfinder.frames import Frame
from wayfinder.gateway.sessions import (
    SessionPhase,
    SessionRegistry,
    SubmitResult,
)
from wayfinder.protocol.payloads import HelloPayload

TIMEOUT = 15000.0
WINDOW = 60000.0


def registry() -> SessionRegistry:
    return SessionRegistry(session_timeout_ms=TIMEOUT, reconnect_window_ms=WINDOW)


def hello(**kw) -> HelloPayload:
    kw.setdefault("client_name", "cane-client")
    return HelloPayload(**kw)


def frame(seq: int, ts: int = 0) -> Frame:
    return Frame(session_id=b"\x00" * 16, sequence=seq, timestamp_ms=ts, jpeg=b"\xff\xd8x")


class TestOpen:
    def test_fresh_session_is_active_with_16_byte_id(self):
        reg = registry()
        session, ack = reg.open_session(hello(fps_hint=2.0), "feet", now=100.0)
        assert session.phase is SessionPhase.ACTIVE
        assert len(session.session_id) == 16
        assert ack.session_id == session.session_id.hex()
        assert ack.resumed is False
        assert ack.accepted_fps == 2.0
        assert session.last_seen_ms == 100.0
        assert len(reg) == 1

    def test_units_default_applies_only_when_client_is_silent(self):
        reg = registry()
        s1, _ = reg.open_session(hello(), "meters", now=0.0)
        s2, _ = reg.open_session(hello(units="feet"), "meters", now=0.0)
        assert s1.units == "meters"
        assert s2.units == "feet"

    def test_ids_are_unique(self):
        reg = registry()
        ids = {reg.open_session(hello(), "feet", now=0.0)[0].session_id for _ in range(50)}
        assert len(ids) == 50


class TestMailbox:
    def test_accept_then_supersede_then_stale(self):
        reg = registry()
        session, _ = reg.open_session(hello(), "feet", now=0.0)
        assert reg.submit_frame(session, frame(1), now=1.0) is SubmitResult.ACCEPTED
        assert reg.submit_frame(session, frame(2), now=2.0) is SubmitResult.SUPERSEDED
        assert session.mailbox.sequence == 2
        # high-water is 2 even though frame 1 was never processed
        assert reg.submit_frame(session, frame(1), now=3.0) is SubmitResult.STALE
        assert reg.submit_frame(session, frame(2), now=4.0) is SubmitResult.STALE
        c = session.counters
        assert (c.frames_accepted, c.frames_superseded, c.frames_stale) == (1, 1, 2)

    def test_take_frame_empties_the_mailbox(self):
        reg = registry()
        session, _ = reg.open_session(hello(), "feet", now=0.0)
        reg.submit_frame(session, frame(7), now=0.0)
        taken = session.take_frame()
        assert taken.sequence == 7
        assert session.take_frame() is None
        # next submit is ACCEPTED again, not SUPERSEDED
        assert reg.submit_frame(session, frame(8), now=1.0) is SubmitResult.ACCEPTED

    def test_sequence_zero_is_a_valid_first_frame(self):
        reg = registry()
        session, _ = reg.open_session(hello(), "feet", now=0.0)
        assert session.highest_frame_seq is None
        assert reg.submit_frame(session, frame(0), now=0.0) is SubmitResult.ACCEPTED
        assert session.highest_frame_seq == 0

    def test_submit_refreshes_liveness(self):
        reg = registry()
        session, _ = reg.open_session(hello(), "feet", now=0.0)
        reg.submit_frame(session, frame(1), now=9000.0)
        assert session.last_seen_ms == 9000.0


class TestResume:
    def open_and_drop(self, reg, now_open=0.0, now_drop=1000.0):
        session, _ = reg.open_session(hello(), "feet", now=now_open)
        reg.submit_frame(session, frame(5), now=now_open)
        session.take_frame()
        session.dedup_memory.entries["exit_door:right"] = DedupEntry(
            last_emitted_ms=now_open, distance_m=3.0, priority=1
        )
        reg.mark_disconnected(session, now=now_drop)
        return session

    def test_resume_within_window_restores_state(self):
        reg = registry()
        old = self.open_and_drop(reg, now_drop=1000.0)
        resumed, ack = reg.open_session(
            hello(resume_session_id=old.session_id.hex(), fps_hint=3.0, units="meters"),
            "feet",
            now=1000.0 + WINDOW,  # boundary is inclusive
        )
        assert resumed is old
        assert ack.resumed is True
        assert ack.session_id == old.session_id.hex()
        assert resumed.phase is SessionPhase.ACTIVE
        assert resumed.disconnected_at_ms is None
        assert resumed.highest_frame_seq == 5
        assert "exit_door:right" in resumed.dedup_memory.entries
        assert resumed.units == "meters"
        assert resumed.accepted_fps == 3.0
        assert len(reg) == 1

    def test_resume_after_window_gets_a_fresh_session(self):
        reg = registry()
        old = self.open_and_drop(reg, now_drop=1000.0)
        fresh, ack = reg.open_session(
            hello(resume_session_id=old.session_id.hex()),
            "feet",
            now=1000.0 + WINDOW + 1,
        )
        assert fresh is not old
        assert ack.resumed is False
        assert fresh.highest_frame_seq is None

    def test_resume_of_active_session_is_refused(self):
        # a second client quoting a live session id must not steal it
        reg = registry()
        session, _ = reg.open_session(hello(), "feet", now=0.0)
        other, ack = reg.open_session(
            hello(resume_session_id=session.session_id.hex()), "feet", now=1.0
        )
        assert other is not session
        assert ack.resumed is False
        assert session.phase is SessionPhase.ACTIVE

    def test_resume_with_unknown_or_garbage_id_is_fresh(self):
        reg = registry()
        for bogus in ("00" * 16, "not-hex", ""):
            session, ack = reg.open_session(
                hello(resume_session_id=bogus or None), "feet", now=0.0
            )
            assert ack.resumed is False

    def test_resume_after_bye_is_fresh(self):
        reg = registry()
        session, _ = reg.open_session(hello(), "feet", now=0.0)
        reg.close_session(session)
        assert len(reg) == 0
        fresh, ack = reg.open_session(
            hello(resume_session_id=session.session_id.hex()), "feet", now=1.0
        )
        assert fresh is not session
        assert ack.resumed is False


class TestExpiry:
    def test_silence_beyond_timeout_disconnects(self):
        reg = registry()
        session, _ = reg.open_session(hello(), "feet", now=0.0)
        assert reg.expire_sessions(now=TIMEOUT) == []  # boundary: still active
        assert session.phase is SessionPhase.ACTIVE
        assert reg.expire_sessions(now=TIMEOUT + 1) == []
        assert session.phase is SessionPhase.DISCONNECTED
        assert session.disconnected_at_ms == TIMEOUT + 1
        assert len(reg) == 1  # still resumable

    def test_heartbeat_defers_disconnect(self):
        reg = registry()
        session, _ = reg.open_session(hello(), "feet", now=0.0)
        reg.touch(session, now=14000.0)
        reg.expire_sessions(now=TIMEOUT + 1)
        assert session.phase is SessionPhase.ACTIVE

    def test_disconnected_beyond_window_expires_and_is_removed(self):
        reg = registry()
        session, _ = reg.open_session(hello(), "feet", now=0.0)
        reg.mark_disconnected(session, now=100.0)
        assert reg.expire_sessions(now=100.0 + WINDOW) == []  # boundary holds
        expired = reg.expire_sessions(now=100.0 + WINDOW + 1)
        assert expired == [session.session_id]
        assert session.phase is SessionPhase.EXPIRED
        assert len(reg) == 0

    def test_one_sweep_never_jumps_straight_to_expired(self):
        # the reconnect window starts at the sweep that noticed the silence
        reg = registry()
        session, _ = reg.open_session(hello(), "feet", now=0.0)
        expired = reg.expire_sessions(now=TIMEOUT + WINDOW + 1000.0)
        assert expired == []
        assert session.phase is SessionPhase.DISCONNECTED

    def test_mark_disconnected_is_idempotent(self):
        reg = registry()
        session, _ = reg.open_session(hello(), "feet", now=0.0)
        reg.mark_disconnected(session, now=50.0)
        reg.mark_disconnected(session, now=999.0)
        assert session.disconnected_at_ms == 50.0


def test_out_seq_is_monotonic():
    reg = registry()
    session, _ = reg.open_session(hello(), "feet", now=0.0)
    seqs = [session.next_out_seq() for _ in range(5)]
    assert seqs == sorted(seqs)
    assert len(set(seqs)) == 5


def test_manual_clock_guards_against_running_backwards():
    from wayfinder.clock import ManualClock

    clock = ManualClock(10.0)
    clock.advance(5.0)
    assert clock() == 15.0
    with pytest.raises(ValueError):
        clock.set(1.0)
