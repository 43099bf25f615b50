/**
 * Binary wire codec, twin of the gateway's Python implementation.
 *
 * Header, big-endian, 40 bytes:
 *   magic "WF" | version u8 | msg_type u8 | session_id 16B |
 *   sequence u64 | timestamp_ms u64 | payload_len u32
 * One message per WebSocket binary frame; control payloads are canonical
 * JSON (sorted keys, no whitespace) so encodes are byte-reproducible.
 */

export const HEADER_SIZE = 40;
export const PROTOCOL_VERSION = 1;
export const MAX_PAYLOAD_LEN = 8 * 1024 * 1024;

const MAGIC_0 = 0x57; // "W"
const MAGIC_1 = 0x46; // "F"

export enum MsgType {
  HELLO = 1,
  HELLO_ACK = 2,
  FRAME = 3,
  INSTRUCTION = 4,
  HEARTBEAT = 5,
  ERROR = 6,
  BYE = 7,
}

export class ProtocolError extends Error {
  constructor(public field: string, message: string) {
    super(message);
    this.name = "ProtocolError";
  }
}

export interface Message {
  msgType: MsgType;
  sessionId: Uint8Array; // always 16 bytes
  sequence: number;
  timestampMs: number;
  payload: Uint8Array;
}

export const ZERO_SESSION = new Uint8Array(16);

function checkU64(name: string, value: number): void {
  if (!Number.isInteger(value) || value < 0 || value > Number.MAX_SAFE_INTEGER) {
    throw new ProtocolError(name, `${name} out of range: ${value}`);
  }
}

export function encodeMessage(msg: Message): Uint8Array {
  if (msg.sessionId.length !== 16) {
    throw new ProtocolError("session_id", `session_id must be 16 bytes, got ${msg.sessionId.length}`);
  }
  checkU64("sequence", msg.sequence);
  checkU64("timestamp_ms", msg.timestampMs);
  if (msg.payload.length > MAX_PAYLOAD_LEN) {
    throw new ProtocolError("payload_len", `payload ${msg.payload.length} exceeds ${MAX_PAYLOAD_LEN}`);
  }
  const out = new Uint8Array(HEADER_SIZE + msg.payload.length);
  const view = new DataView(out.buffer);
  out[0] = MAGIC_0;
  out[1] = MAGIC_1;
  out[2] = PROTOCOL_VERSION;
  out[3] = msg.msgType;
  out.set(msg.sessionId, 4);
  view.setBigUint64(20, BigInt(msg.sequence));
  view.setBigUint64(28, BigInt(msg.timestampMs));
  view.setUint32(36, msg.payload.length);
  out.set(msg.payload, HEADER_SIZE);
  return out;
}

/** Decode a buffer that must hold exactly one message (the WS transport
 * delivers one message per binary frame). */
export function decodeExact(data: Uint8Array): Message {
  if (data.length < HEADER_SIZE) {
    throw new ProtocolError("header", `short message: ${data.length} bytes`);
  }
  if (data[0] !== MAGIC_0 || data[1] !== MAGIC_1) {
    throw new ProtocolError("magic", "bad magic bytes");
  }
  if (data[2] !== PROTOCOL_VERSION) {
    throw new ProtocolError("version", `unsupported version ${data[2]}`);
  }
  const typeByte = data[3] as number;
  if (!(typeByte in MsgType)) {
    throw new ProtocolError("msg_type", `unknown message type ${typeByte}`);
  }
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const sequence = view.getBigUint64(20);
  const timestampMs = view.getBigUint64(28);
  const payloadLen = view.getUint32(36);
  if (payloadLen > MAX_PAYLOAD_LEN) {
    throw new ProtocolError("payload_len", `payload ${payloadLen} exceeds ${MAX_PAYLOAD_LEN}`);
  }
  if (data.length !== HEADER_SIZE + payloadLen) {
    throw new ProtocolError("payload_len", `expected ${HEADER_SIZE + payloadLen} bytes, got ${data.length}`);
  }
  if (sequence > BigInt(Number.MAX_SAFE_INTEGER) || timestampMs > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new ProtocolError("sequence", "counter exceeds safe integer range");
  }
  return {
    msgType: typeByte as MsgType,
    sessionId: data.slice(4, 20),
    sequence: Number(sequence),
    timestampMs: Number(timestampMs),
    payload: data.slice(HEADER_SIZE),
  };
}

// ---------------------------------------------------------------------------
// control payloads (canonical JSON)

const utf8 = new TextEncoder();
const utf8dec = new TextDecoder("utf-8", { fatal: true });

/** JSON.stringify with object keys sorted at every level; matches the
 * gateway's canonical form byte for byte. */
export function canonicalJson(value: unknown): string {
  return JSON.stringify(sortKeys(value));
}

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortKeys);
  if (value !== null && typeof value === "object") {
    const src = value as Record<string, unknown>;
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(src).sort()) out[key] = sortKeys(src[key]);
    return out;
  }
  return value;
}

export interface Hello {
  clientName: string;
  fpsHint: number;
  units: string | null;
  resumeSessionId: string | null;
}

export function encodeHello(h: Hello): Uint8Array {
  return utf8.encode(
    canonicalJson({
      client_name: h.clientName,
      fps_hint: h.fpsHint,
      units: h.units,
      resume_session_id: h.resumeSessionId,
    }),
  );
}

export interface HelloAck {
  sessionId: string; // 32-char hex
  acceptedFps: number;
  resumed: boolean;
}

export interface Instruction {
  text: string;
  priority: number; // 0 info, 1 guidance, 2 caution
  dedupKey: string;
  frameSeq: number;
  distanceM: number | null;
  direction: string | null;
}

export interface ErrorInfo {
  code: string;
  detail: string;
  retryable: boolean;
}

function parseJson(payload: Uint8Array, what: string): Record<string, unknown> {
  let doc: unknown;
  try {
    doc = JSON.parse(utf8dec.decode(payload));
  } catch (err) {
    throw new ProtocolError(what, `payload is not valid JSON: ${err}`);
  }
  if (doc === null || typeof doc !== "object" || Array.isArray(doc)) {
    throw new ProtocolError(what, "payload must be a JSON object");
  }
  return doc as Record<string, unknown>;
}

function need<T>(doc: Record<string, unknown>, key: string, kind: string, what: string): T {
  const value = doc[key];
  if (typeof value !== kind) {
    throw new ProtocolError(what, `field ${key} must be ${kind}`);
  }
  return value as T;
}

export function decodeHelloAck(payload: Uint8Array): HelloAck {
  const doc = parseJson(payload, "hello_ack");
  return {
    sessionId: need<string>(doc, "session_id", "string", "hello_ack"),
    acceptedFps: need<number>(doc, "accepted_fps", "number", "hello_ack"),
    resumed: need<boolean>(doc, "resumed", "boolean", "hello_ack"),
  };
}

export function decodeInstruction(payload: Uint8Array): Instruction {
  const doc = parseJson(payload, "instruction");
  const distance = doc["distance_m"];
  const direction = doc["direction"];
  return {
    text: need<string>(doc, "text", "string", "instruction"),
    priority: need<number>(doc, "priority", "number", "instruction"),
    dedupKey: need<string>(doc, "dedup_key", "string", "instruction"),
    frameSeq: need<number>(doc, "frame_seq", "number", "instruction"),
    distanceM: typeof distance === "number" ? distance : null,
    direction: typeof direction === "string" ? direction : null,
  };
}

export function decodeError(payload: Uint8Array): ErrorInfo {
  const doc = parseJson(payload, "error");
  return {
    code: need<string>(doc, "code", "string", "error"),
    detail: need<string>(doc, "detail", "string", "error"),
    retryable: doc["retryable"] === true,
  };
}

export function hexToBytes(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || /[^0-9a-fA-F]/.test(hex)) {
    throw new ProtocolError("session_id", `bad hex string: ${hex}`);
  }
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(i * 2, i * 2 + 2), 16);
  }
  return out;
}

export function bytesToHex(bytes: Uint8Array): string {
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}
