"""Binary framing for the client<->gateway link.

Every protocol message is a fixed 40-byte header followed by an opaque
payload:

    offset  size  field
    0       2     magic "WF" (0x57 0x46)
    2       1     version (=1)
    3       1     msg_type
    4       16    session_id (UUID bytes; all zero in HELLO)
    20      8     sequence, unsigned big-endian
    28      8     timestamp_ms, unsigned big-endian (client wall clock)
    36      4     payload_len, unsigned big-endian (<= 8 MiB)

The same bytes ride either a TCP stream (length-delimited by payload_len)
or a binary WebSocket message (one message = one protocol frame).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import IntEnum

MAGIC = b"WF"
VERSION = 1
HEADER_SIZE = 40
MAX_PAYLOAD_LEN = 8 * 1024 * 1024  # bounds per-connection memory

ZERO_SESSION_ID = bytes(16)

_HEADER = struct.Struct(">2sBB16sQQI")
assert _HEADER.size == HEADER_SIZE


class MsgType(IntEnum):
    HELLO = 1
    HELLO_ACK = 2
    FRAME = 3
    INSTRUCTION = 4
    HEARTBEAT = 5
    ERROR = 6
    BYE = 7


_VALID_TYPES = frozenset(int(t) for t in MsgType)


class EncodeError(ValueError):
    """Message cannot be put on the wire (oversize payload, bad field)."""


class ProtocolError(Exception):
    """Fatal wire violation; the connection must be closed afterwards.

    `field` names the violated header field: magic, version, msg_type,
    payload_len, or framing.
    """

    def __init__(self, field: str, detail: str):
        self.field = field
        super().__init__(f"{field}: {detail}")


@dataclass(frozen=True)
class Message:
    msg_type: MsgType
    session_id: bytes = ZERO_SESSION_ID
    sequence: int = 0
    timestamp_ms: int = 0
    payload: bytes = b""


def encode_message(msg: Message) -> bytes:
    """Serialize a message; deterministic (equal messages -> identical bytes)."""
    if int(msg.msg_type) not in _VALID_TYPES:
        raise EncodeError(f"unknown msg_type {msg.msg_type!r}")
    if len(msg.session_id) != 16:
        raise EncodeError(f"session_id must be 16 bytes, got {len(msg.session_id)}")
    if len(msg.payload) > MAX_PAYLOAD_LEN:
        raise EncodeError(f"payload {len(msg.payload)} bytes exceeds cap {MAX_PAYLOAD_LEN}")
    if not 0 <= msg.sequence < 2**64:
        raise EncodeError(f"sequence {msg.sequence} out of unsigned 64-bit range")
    if not 0 <= msg.timestamp_ms < 2**64:
        raise EncodeError(f"timestamp_ms {msg.timestamp_ms} out of unsigned 64-bit range")
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        int(msg.msg_type),
        msg.session_id,
        msg.sequence,
        msg.timestamp_ms,
        len(msg.payload),
    )
    return header + msg.payload


def decode_message(buffer: bytes | bytearray | memoryview) -> tuple[Message, int] | None:
    """Decode one message from the front of `buffer`.

    Returns (message, bytes_consumed) on success, or None when the buffer
    holds a valid-so-far prefix that needs more bytes. A prefix that already
    violates magic/version/msg_type/payload_len raises ProtocolError even
    before the full header is in.
    """
    buf = bytes(buffer[:HEADER_SIZE])
    n = len(buf)
    for i in range(min(n, 2)):
        if buf[i] != MAGIC[i]:
            raise ProtocolError("magic", f"expected {MAGIC!r}, got {buf[:2]!r}")
    if n >= 3 and buf[2] != VERSION:
        raise ProtocolError("version", f"unsupported version {buf[2]}")
    if n >= 4 and buf[3] not in _VALID_TYPES:
        raise ProtocolError("msg_type", f"unknown msg_type {buf[3]}")
    if n < HEADER_SIZE:
        return None
    _, _, raw_type, session_id, sequence, timestamp_ms, payload_len = _HEADER.unpack(buf)
    if payload_len > MAX_PAYLOAD_LEN:
        raise ProtocolError("payload_len", f"{payload_len} exceeds cap {MAX_PAYLOAD_LEN}")
    total = HEADER_SIZE + payload_len
    if len(buffer) < total:
        return None
    payload = bytes(buffer[HEADER_SIZE:total])
    msg = Message(
        msg_type=MsgType(raw_type),
        session_id=session_id,
        sequence=sequence,
        timestamp_ms=timestamp_ms,
        payload=payload,
    )
    return msg, total


def decode_exact(data: bytes) -> Message:
    """Decode a buffer that must hold exactly one whole message (WebSocket path)."""
    decoded = decode_message(data)
    if decoded is None:
        raise ProtocolError("framing", f"truncated message ({len(data)} bytes)")
    msg, consumed = decoded
    if consumed != len(data):
        raise ProtocolError("framing", f"{len(data) - consumed} trailing bytes after message")
    return msg


class StreamDecoder:
    """Incremental decoder for one stream connection; not shareable."""

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[Message]:
        """Append bytes and return every now-complete message, in order.

        After a ProtocolError the decoder is poisoned and the connection
        must be dropped.
        """
        self._buf += data
        out: list[Message] = []
        while True:
            decoded = decode_message(self._buf)
            if decoded is None:
                return out
            msg, consumed = decoded
            del self._buf[:consumed]
            out.append(msg)

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)
