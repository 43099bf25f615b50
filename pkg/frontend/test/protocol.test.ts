// Codec twin tests: every vector in golden.json was emitted by the
// gateway's Python encoder. Decoding it and re-encoding it byte-exactly
// proves both implementations speak the same bytes.

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  HEADER_SIZE,
  MAX_PAYLOAD_LEN,
  MsgType,
  ProtocolError,
  bytesToHex,
  canonicalJson,
  decodeError,
  decodeExact,
  decodeHelloAck,
  decodeInstruction,
  encodeHello,
  encodeMessage,
  hexToBytes,
} from "../src/protocol.js";

interface Golden {
  name: string;
  hex: string;
  msg_type: number;
  session_id: string;
  sequence: number;
  timestamp_ms: number;
  payload_utf8: string | null;
}

const GOLDEN: Golden[] = JSON.parse(
  readFileSync(new URL("./golden.json", import.meta.url), "utf-8"),
);

function vector(name: string): Golden {
  const v = GOLDEN.find((g) => g.name === name);
  if (!v) throw new Error(`no golden vector ${name}`);
  return v;
}

describe("golden vectors", () => {
  it.each(GOLDEN.map((g) => [g.name, g] as const))("decodes %s", (_name, g) => {
    const msg = decodeExact(hexToBytes(g.hex));
    expect(msg.msgType).toBe(g.msg_type);
    expect(bytesToHex(msg.sessionId)).toBe(g.session_id);
    expect(msg.sequence).toBe(g.sequence);
    expect(msg.timestampMs).toBe(g.timestamp_ms);
    if (g.payload_utf8 !== null) {
      expect(new TextDecoder().decode(msg.payload)).toBe(g.payload_utf8);
    }
  });

  it.each(GOLDEN.map((g) => [g.name, g] as const))("re-encodes %s byte-exactly", (_name, g) => {
    const msg = decodeExact(hexToBytes(g.hex));
    expect(bytesToHex(encodeMessage(msg))).toBe(g.hex);
  });

  it("encodes HELLO payloads byte-identically to the gateway", () => {
    const fresh = vector("hello");
    expect(
      bytesToHex(
        encodeHello({ clientName: "browser", fpsHint: 2.5, units: "feet", resumeSessionId: null }),
      ),
    ).toBe(bytesToHex(hexToBytes(fresh.hex).slice(HEADER_SIZE)));

    const resume = vector("hello_resume");
    expect(
      bytesToHex(
        encodeHello({
          clientName: "browser",
          fpsHint: 2.5,
          units: null,
          resumeSessionId: "000102030405060708090a0b0c0d0e0f",
        }),
      ),
    ).toBe(bytesToHex(hexToBytes(resume.hex).slice(HEADER_SIZE)));
  });

  it("decodes the instruction payload fields", () => {
    const msg = decodeExact(hexToBytes(vector("instruction").hex));
    const instruction = decodeInstruction(msg.payload);
    expect(instruction.text).toBe("There's an exit door 10 feet ahead on your right");
    expect(instruction.priority).toBe(1);
    expect(instruction.dedupKey).toBe("EXIT_DOOR:right");
    expect(instruction.frameSeq).toBe(5);
    expect(instruction.distanceM).toBeCloseTo(3.04, 9);
    expect(instruction.direction).toBe("right");
  });

  it("decodes the ack and error payloads", () => {
    const ack = decodeHelloAck(decodeExact(hexToBytes(vector("hello_ack").hex)).payload);
    expect(ack).toEqual({
      sessionId: "000102030405060708090a0b0c0d0e0f",
      acceptedFps: 2.5,
      resumed: false,
    });

    const err = decodeError(decodeExact(hexToBytes(vector("error").hex)).payload);
    expect(err).toEqual({ code: "backend_timeout", detail: "no reply in 1500ms", retryable: true });
  });
});

describe("header rules", () => {
  const ok = () => decodeExact(hexToBytes(vector("heartbeat").hex));

  it("accepts the 40-byte header exactly", () => {
    expect(hexToBytes(vector("heartbeat").hex).length).toBe(HEADER_SIZE);
    expect(ok().msgType).toBe(MsgType.HEARTBEAT);
  });

  it("rejects a short buffer", () => {
    expect(() => decodeExact(new Uint8Array(HEADER_SIZE - 1))).toThrow(ProtocolError);
  });

  it("rejects bad magic", () => {
    const bytes = hexToBytes(vector("heartbeat").hex);
    bytes[0] = 0x58;
    expect(() => decodeExact(bytes)).toThrow(/magic/);
  });

  it("rejects an unknown version", () => {
    const bytes = hexToBytes(vector("heartbeat").hex);
    bytes[2] = 9;
    expect(() => decodeExact(bytes)).toThrow(/version/);
  });

  it("rejects an unknown message type", () => {
    const bytes = hexToBytes(vector("heartbeat").hex);
    bytes[3] = 0;
    expect(() => decodeExact(bytes)).toThrow(/type/);
    bytes[3] = 8;
    expect(() => decodeExact(bytes)).toThrow(/type/);
  });

  it("rejects a length field that disagrees with the buffer", () => {
    const bytes = hexToBytes(vector("frame").hex);
    expect(() => decodeExact(bytes.slice(0, bytes.length - 1))).toThrow(/expected \d+ bytes/);
    const extra = new Uint8Array(bytes.length + 1);
    extra.set(bytes);
    expect(() => decodeExact(extra)).toThrow(/expected \d+ bytes/);
  });

  it("rejects an oversized declared payload", () => {
    const bytes = hexToBytes(vector("heartbeat").hex);
    new DataView(bytes.buffer).setUint32(36, MAX_PAYLOAD_LEN + 1);
    expect(() => decodeExact(bytes)).toThrow(/exceeds/);
  });

  it("refuses to encode a wrong-size session id", () => {
    expect(() =>
      encodeMessage({
        msgType: MsgType.BYE,
        sessionId: new Uint8Array(8),
        sequence: 0,
        timestampMs: 0,
        payload: new Uint8Array(0),
      }),
    ).toThrow(/session_id/);
  });

  it("refuses non-integer counters", () => {
    expect(() =>
      encodeMessage({
        msgType: MsgType.BYE,
        sessionId: new Uint8Array(16),
        sequence: 1.5,
        timestampMs: 0,
        payload: new Uint8Array(0),
      }),
    ).toThrow(/sequence/);
  });

  it("round-trips random frames through a DataView offset slice", () => {
    // a message arriving inside a larger ArrayBuffer must decode the same
    const wire = hexToBytes(vector("instruction").hex);
    const padded = new Uint8Array(wire.length + 8);
    padded.set(wire, 8);
    const slice = padded.subarray(8);
    expect(bytesToHex(encodeMessage(decodeExact(slice)))).toBe(vector("instruction").hex);
  });
});

describe("canonical json", () => {
  it("sorts keys at every level", () => {
    expect(canonicalJson({ b: 1, a: { d: 2, c: [{ f: 3, e: 4 }] } })).toBe(
      '{"a":{"c":[{"e":4,"f":3}],"d":2},"b":1}',
    );
  });

  it("keeps nulls (the gateway distinguishes null from absent)", () => {
    expect(canonicalJson({ units: null })).toBe('{"units":null}');
  });
});

describe("hex helpers", () => {
  it("round-trips", () => {
    const bytes = new Uint8Array([0, 1, 0xab, 0xff]);
    expect(hexToBytes(bytesToHex(bytes))).toEqual(bytes);
  });

  it("rejects odd-length and non-hex input", () => {
    expect(() => hexToBytes("abc")).toThrow(ProtocolError);
    expect(() => hexToBytes("zz")).toThrow(ProtocolError);
  });
});
