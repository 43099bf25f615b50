"""JSON payload schemas carried inside the binary messages.

HELLO, HELLO_ACK, INSTRUCTION, and ERROR carry UTF-8 JSON; FRAME carries a
raw JPEG; HEARTBEAT and BYE carry nothing. Encoding is canonical (sorted
keys, no whitespace) so equal payloads produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

JPEG_SOI = b"\xff\xd8"

FPS_HINT_MIN = 0.1
FPS_HINT_MAX = 30.0

PRIORITY_INFO = 0
PRIORITY_GUIDANCE = 1
PRIORITY_CAUTION = 2

_DIRECTIONS = ("left", "ahead", "right")
_UNITS = ("feet", "meters")


class FormatError(ValueError):
    """Payload is malformed for its message type; the message is rejected
    with an ERROR reply but the connection stays open."""


def _dumps(obj: dict) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _loads(payload: bytes, what: str) -> dict:
    try:
        obj = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{what}: not valid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise FormatError(f"{what}: expected a JSON object, got {type(obj).__name__}")
    return obj


@dataclass(frozen=True)
class HelloPayload:
    client_name: str
    fps_hint: float = 1.0
    units: str | None = None  # None: take the gateway's configured default
    resume_session_id: str | None = None  # UUID hex string when resuming

    def encode(self) -> bytes:
        obj: dict = {
            "client_name": self.client_name,
            "fps_hint": self.fps_hint,
            "units": self.units,
            "resume_session_id": self.resume_session_id,
        }
        return _dumps(obj)

    @classmethod
    def decode(cls, payload: bytes) -> "HelloPayload":
        obj = _loads(payload, "HELLO")
        client_name = obj.get("client_name")
        if not isinstance(client_name, str) or not client_name:
            raise FormatError("HELLO: client_name must be a non-empty string")
        fps_hint = obj.get("fps_hint", 1.0)
        if isinstance(fps_hint, bool) or not isinstance(fps_hint, (int, float)):
            raise FormatError("HELLO: fps_hint must be a number")
        fps_hint = float(fps_hint)
        if not FPS_HINT_MIN <= fps_hint <= FPS_HINT_MAX:
            raise FormatError(
                f"HELLO: fps_hint {fps_hint} outside [{FPS_HINT_MIN}, {FPS_HINT_MAX}]"
            )
        units = obj.get("units")
        if units is not None and units not in _UNITS:
            raise FormatError(f"HELLO: units must be one of {_UNITS} or null")
        resume = obj.get("resume_session_id")
        if resume is not None and not isinstance(resume, str):
            raise FormatError("HELLO: resume_session_id must be a string")
        return cls(
            client_name=client_name,
            fps_hint=fps_hint,
            units=units,
            resume_session_id=resume,
        )


@dataclass(frozen=True)
class HelloAckPayload:
    session_id: str  # UUID hex string, matches the header session_id
    accepted_fps: float
    resumed: bool = False

    def encode(self) -> bytes:
        return _dumps(
            {
                "accepted_fps": self.accepted_fps,
                "resumed": self.resumed,
                "session_id": self.session_id,
            }
        )

    @classmethod
    def decode(cls, payload: bytes) -> "HelloAckPayload":
        obj = _loads(payload, "HELLO_ACK")
        session_id = obj.get("session_id")
        if not isinstance(session_id, str):
            raise FormatError("HELLO_ACK: session_id must be a string")
        accepted_fps = obj.get("accepted_fps")
        if isinstance(accepted_fps, bool) or not isinstance(accepted_fps, (int, float)):
            raise FormatError("HELLO_ACK: accepted_fps must be a number")
        if not accepted_fps > 0:
            raise FormatError("HELLO_ACK: accepted_fps must be positive")
        resumed = obj.get("resumed", False)
        if not isinstance(resumed, bool):
            raise FormatError("HELLO_ACK: resumed must be a boolean")
        return cls(session_id=session_id, accepted_fps=float(accepted_fps), resumed=resumed)


@dataclass(frozen=True)
class InstructionPayload:
    text: str
    priority: int  # 0 info, 1 guidance, 2 caution
    dedup_key: str
    frame_seq: int  # FRAME sequence this instruction derives from
    distance_m: float | None = None
    direction: str | None = None  # "left" | "ahead" | "right"

    def encode(self) -> bytes:
        return _dumps(
            {
                "dedup_key": self.dedup_key,
                "direction": self.direction,
                "distance_m": self.distance_m,
                "frame_seq": self.frame_seq,
                "priority": self.priority,
                "text": self.text,
            }
        )

    @classmethod
    def decode(cls, payload: bytes) -> "InstructionPayload":
        obj = _loads(payload, "INSTRUCTION")
        text = obj.get("text")
        if not isinstance(text, str) or not text:
            raise FormatError("INSTRUCTION: text must be a non-empty string")
        priority = obj.get("priority")
        if isinstance(priority, bool) or priority not in (0, 1, 2):
            raise FormatError("INSTRUCTION: priority must be 0, 1, or 2")
        dedup_key = obj.get("dedup_key")
        if not isinstance(dedup_key, str) or not dedup_key:
            raise FormatError("INSTRUCTION: dedup_key must be a non-empty string")
        frame_seq = obj.get("frame_seq")
        if isinstance(frame_seq, bool) or not isinstance(frame_seq, int) or frame_seq < 0:
            raise FormatError("INSTRUCTION: frame_seq must be a non-negative integer")
        distance = obj.get("distance_m")
        if distance is not None:
            if isinstance(distance, bool) or not isinstance(distance, (int, float)):
                raise FormatError("INSTRUCTION: distance_m must be a number or null")
            distance = float(distance)
        direction = obj.get("direction")
        if direction is not None and direction not in _DIRECTIONS:
            raise FormatError(f"INSTRUCTION: direction must be one of {_DIRECTIONS} or null")
        return cls(
            text=text,
            priority=priority,
            dedup_key=dedup_key,
            frame_seq=frame_seq,
            distance_m=distance,
            direction=direction,
        )


@dataclass(frozen=True)
class ErrorPayload:
    code: str  # stable machine-readable identifier, e.g. "bad_frame"
    detail: str
    retryable: bool = False

    def encode(self) -> bytes:
        return _dumps({"code": self.code, "detail": self.detail, "retryable": self.retryable})

    @classmethod
    def decode(cls, payload: bytes) -> "ErrorPayload":
        obj = _loads(payload, "ERROR")
        code = obj.get("code")
        detail = obj.get("detail")
        retryable = obj.get("retryable", False)
        if not isinstance(code, str) or not code:
            raise FormatError("ERROR: code must be a non-empty string")
        if not isinstance(detail, str):
            raise FormatError("ERROR: detail must be a string")
        if not isinstance(retryable, bool):
            raise FormatError("ERROR: retryable must be a boolean")
        return cls(code=code, detail=detail, retryable=retryable)


def validate_frame_payload(payload: bytes) -> None:
    """Reject FRAME payloads that are empty or not JPEG (SOI marker check)."""
    if not payload:
        raise FormatError("FRAME: empty payload")
    if payload[:2] != JPEG_SOI:
        raise FormatError("FRAME: payload does not start with JPEG SOI marker")
