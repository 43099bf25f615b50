"""Regenerate test/golden.json from the gateway's own codec.

Run from the repository root after any wire change:

    python3 frontend/scripts/gen_golden.py

The browser client's codec tests decode these exact bytes and re-encode
them, so the two implementations can never drift apart silently.
"""

import json
from pathlib import Path

from wayfinder.protocol import (
    ErrorPayload,
    HelloAckPayload,
    HelloPayload,
    InstructionPayload,
    Message,
    MsgType,
    encode_message,
)

SESSION = bytes(range(16))

VECTORS = [
    {
        "name": "hello",
        "message": Message(
            MsgType.HELLO,
            payload=HelloPayload(
                client_name="browser", fps_hint=2.5, units="feet"
            ).encode(),
        ),
    },
    {
        "name": "hello_resume",
        "message": Message(
            MsgType.HELLO,
            payload=HelloPayload(
                client_name="browser",
                fps_hint=2.5,
                units=None,
                resume_session_id=SESSION.hex(),
            ).encode(),
        ),
    },
    {
        "name": "hello_ack",
        "message": Message(
            MsgType.HELLO_ACK,
            session_id=SESSION,
            sequence=1,
            timestamp_ms=1_700_000_000_000,
            payload=HelloAckPayload(
                session_id=SESSION.hex(),
                accepted_fps=2.5,
                resumed=False,
            ).encode(),
        ),
    },
    {
        "name": "frame",
        "message": Message(
            MsgType.FRAME,
            session_id=SESSION,
            sequence=7,
            timestamp_ms=123456,
            payload=bytes.fromhex("ffd8ffe000104a464946"),
        ),
    },
    {
        "name": "instruction",
        "message": Message(
            MsgType.INSTRUCTION,
            session_id=SESSION,
            sequence=3,
            timestamp_ms=1_700_000_000_123,
            payload=InstructionPayload(
                text="There's an exit door 10 feet ahead on your right",
                priority=1,
                dedup_key="EXIT_DOOR:right",
                frame_seq=5,
                distance_m=3.04,
                direction="right",
            ).encode(),
        ),
    },
    {
        "name": "heartbeat",
        "message": Message(
            MsgType.HEARTBEAT, session_id=SESSION, sequence=9, timestamp_ms=42
        ),
    },
    {
        "name": "error",
        "message": Message(
            MsgType.ERROR,
            session_id=SESSION,
            sequence=2,
            timestamp_ms=99,
            payload=ErrorPayload(
                code="backend_timeout", detail="no reply in 1500ms", retryable=True
            ).encode(),
        ),
    },
    {
        "name": "bye",
        "message": Message(MsgType.BYE, session_id=SESSION, sequence=11, timestamp_ms=0),
    },
]


def main() -> None:
    out = []
    for vec in VECTORS:
        msg = vec["message"]
        out.append(
            {
                "name": vec["name"],
                "hex": encode_message(msg).hex(),
                "msg_type": int(msg.msg_type),
                "session_id": msg.session_id.hex(),
                "sequence": msg.sequence,
                "timestamp_ms": msg.timestamp_ms,
                "payload_utf8": None
                if msg.msg_type == MsgType.FRAME
                else msg.payload.decode("utf-8"),
            }
        )
    path = Path(__file__).resolve().parent.parent / "test" / "golden.json"
    path.write_text(json.dumps(out, indent=2) + "\n", "utf-8")
    print(f"wrote {len(out)} vectors to {path}")


if __name__ == "__main__":
    main()
