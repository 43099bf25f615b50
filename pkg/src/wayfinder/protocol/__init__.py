"""Wire protocol: binary framing plus JSON payload schemas."""

from wayfinder.protocol.codec import (
    HEADER_SIZE,
    MAGIC,
    MAX_PAYLOAD_LEN,
    VERSION,
    ZERO_SESSION_ID,
    EncodeError,
    Message,
    MsgType,
    ProtocolError,
    StreamDecoder,
    decode_exact,
    decode_message,
    encode_message,
)
from wayfinder.protocol.payloads import (
    PRIORITY_CAUTION,
    PRIORITY_GUIDANCE,
    PRIORITY_INFO,
    ErrorPayload,
    FormatError,
    HelloAckPayload,
    HelloPayload,
    InstructionPayload,
    validate_frame_payload,
)

__all__ = [
    "HEADER_SIZE",
    "MAGIC",
    "MAX_PAYLOAD_LEN",
    "VERSION",
    "ZERO_SESSION_ID",
    "EncodeError",
    "Message",
    "MsgType",
    "ProtocolError",
    "StreamDecoder",
    "decode_exact",
    "decode_message",
    "encode_message",
    "PRIORITY_CAUTION",
    "PRIORITY_GUIDANCE",
    "PRIORITY_INFO",
    "ErrorPayload",
    "FormatError",
    "HelloAckPayload",
    "HelloPayload",
    "InstructionPayload",
    "validate_frame_payload",
]
