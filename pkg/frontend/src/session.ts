/**
 * Gateway connection: handshake, frame numbering, heartbeats, and
 * automatic resume.
 *
 * The session id from HELLO_ACK is kept in sessionStorage so a page
 * reload inside the reconnect window resumes with dedup state intact.
 * Unexpected drops reconnect with exponential backoff; a deliberate
 * bye() never reconnects. Frame timestamps are forced strictly
 * increasing so a fast steering burst can never look stale to the
 * gateway.
 */

import {
  ErrorInfo,
  HelloAck,
  Instruction,
  MsgType,
  ProtocolError,
  ZERO_SESSION,
  decodeError,
  decodeExact,
  decodeHelloAck,
  decodeInstruction,
  encodeHello,
  encodeMessage,
  hexToBytes,
} from "./protocol.js";

export type ConnState = "idle" | "connecting" | "connected" | "reconnecting" | "closed";

export interface WsLike {
  binaryType: string;
  send(data: Uint8Array): void;
  close(code?: number, reason?: string): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface ClientEvents {
  onState?: (state: ConnState) => void;
  onAck?: (ack: HelloAck, rttMs: number) => void;
  onInstruction?: (instruction: Instruction) => void;
  onError?: (error: ErrorInfo) => void;
}

export interface ClientOptions {
  url: string;
  units?: string | null;
  clientName?: string;
  fpsHint?: number;
  makeSocket?: (url: string) => WsLike;
  storage?: StorageLike | null;
  now?: () => number; // wall clock ms; injectable for tests
  events?: ClientEvents;
}

export const HEARTBEAT_MS = 5000;
export const SESSION_KEY = "wayfinder.session";
const BACKOFF_MS = [500, 1000, 2000, 4000, 8000, 10000];

function defaultSocket(url: string): WsLike {
  return new WebSocket(url) as unknown as WsLike;
}

function defaultStorage(): StorageLike | null {
  try {
    return typeof sessionStorage === "undefined" ? null : sessionStorage;
  } catch {
    return null; // storage can be walled off in private browsing
  }
}

export class GatewayClient {
  state: ConnState = "idle";
  ack: HelloAck | null = null;
  framesSent = 0;
  retries = 0;

  private ws: WsLike | null = null;
  private units: string | null;
  private sessionBytes: Uint8Array = ZERO_SESSION;
  private lastFrameTs = 0;
  private helloSentAt = 0;
  private heartbeatTimer: ReturnType<typeof setInterval> | null = null;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private closedByUser = false;

  private readonly url: string;
  private readonly clientName: string;
  private readonly fpsHint: number;
  private readonly makeSocket: (url: string) => WsLike;
  private readonly storage: StorageLike | null;
  private readonly now: () => number;
  private readonly events: ClientEvents;

  constructor(opts: ClientOptions) {
    this.url = opts.url;
    this.units = opts.units ?? null;
    this.clientName = opts.clientName ?? "browser";
    this.fpsHint = opts.fpsHint ?? 2.0;
    this.makeSocket = opts.makeSocket ?? defaultSocket;
    this.storage = opts.storage === undefined ? defaultStorage() : opts.storage;
    this.now = opts.now ?? Date.now;
    this.events = opts.events ?? {};
  }

  connect(): void {
    if (this.state === "connecting" || this.state === "connected") return;
    this.closedByUser = false;
    this.setState(this.retries > 0 ? "reconnecting" : "connecting");
    const sock = this.makeSocket(this.url);
    this.ws = sock;
    sock.binaryType = "arraybuffer";
    sock.onopen = () => {
      if (this.ws !== sock) return;
      this.helloSentAt = this.now();
      sock.send(
        encodeMessage({
          msgType: MsgType.HELLO,
          sessionId: ZERO_SESSION,
          sequence: 0,
          timestampMs: this.wallMs(),
          payload: encodeHello({
            clientName: this.clientName,
            fpsHint: this.fpsHint,
            units: this.units,
            resumeSessionId: this.storage?.getItem(SESSION_KEY) ?? null,
          }),
        }),
      );
    };
    sock.onmessage = (ev) => {
      if (this.ws !== sock) return;
      this.route(ev.data);
    };
    sock.onclose = () => {
      if (this.ws !== sock) return;
      this.dropped();
    };
    sock.onerror = () => {
      // onclose follows; nothing to do here
    };
  }

  /** Send one JPEG frame. Returns false (and sends nothing) unless the
   * session is established. */
  sendFrame(jpeg: Uint8Array): boolean {
    if (this.state !== "connected" || this.ws === null) return false;
    this.framesSent += 1;
    this.lastFrameTs = Math.max(this.wallMs(), this.lastFrameTs + 1);
    this.ws.send(
      encodeMessage({
        msgType: MsgType.FRAME,
        sessionId: this.sessionBytes,
        sequence: this.framesSent,
        timestampMs: this.lastFrameTs,
        payload: jpeg,
      }),
    );
    return true;
  }

  /** Graceful goodbye: the gateway forgets the session, we never reconnect. */
  bye(): void {
    this.closedByUser = true;
    this.clearTimers();
    this.storage?.removeItem(SESSION_KEY);
    if (this.ws !== null && this.state === "connected") {
      try {
        this.ws.send(this.controlMessage(MsgType.BYE));
      } catch {
        // socket already dying; close below still applies
      }
    }
    this.ws?.close(1000, "bye");
    this.ws = null;
    this.setState("closed");
  }

  /** Units apply per session, so switching means: end this session, start
   * a fresh one with the new units. Dedup memory starts over; that is the
   * honest trade and the operator asked for it. */
  setUnits(units: string): void {
    this.units = units;
    if (this.state !== "connected") return;
    const sock = this.ws;
    this.clearTimers();
    this.storage?.removeItem(SESSION_KEY);
    if (sock !== null) {
      try {
        sock.send(this.controlMessage(MsgType.BYE));
      } catch {
        // fine: the close below forces the same outcome
      }
      this.ws = null; // detach so its onclose can't double-schedule
      sock.close(1000, "units change");
    }
    this.state = "idle";
    this.ack = null;
    this.connect();
  }

  private controlMessage(msgType: MsgType): Uint8Array {
    return encodeMessage({
      msgType,
      sessionId: this.sessionBytes,
      sequence: 0,
      timestampMs: this.wallMs(),
      payload: new Uint8Array(0),
    });
  }

  private wallMs(): number {
    return Math.max(0, Math.round(this.now()));
  }

  private setState(state: ConnState): void {
    this.state = state;
    this.events.onState?.(state);
  }

  private route(data: unknown): void {
    let bytes: Uint8Array;
    if (data instanceof ArrayBuffer) bytes = new Uint8Array(data);
    else if (data instanceof Uint8Array) bytes = data;
    else return; // the gateway never sends text frames
    let msg;
    try {
      msg = decodeExact(bytes);
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.events.onError?.({ code: "protocol", detail: err.message, retryable: false });
        return;
      }
      throw err;
    }
    switch (msg.msgType) {
      case MsgType.HELLO_ACK: {
        const ack = decodeHelloAck(msg.payload);
        this.ack = ack;
        this.sessionBytes = hexToBytes(ack.sessionId);
        this.storage?.setItem(SESSION_KEY, ack.sessionId);
        this.retries = 0;
        this.setState("connected");
        this.startHeartbeat();
        this.events.onAck?.(ack, this.now() - this.helloSentAt);
        break;
      }
      case MsgType.INSTRUCTION:
        this.events.onInstruction?.(decodeInstruction(msg.payload));
        break;
      case MsgType.ERROR:
        this.events.onError?.(decodeError(msg.payload));
        break;
      default:
        // FRAME/HELLO/HEARTBEAT/BYE never flow server -> client; ignore
        break;
    }
  }

  private startHeartbeat(): void {
    this.stopHeartbeat();
    this.heartbeatTimer = setInterval(() => {
      if (this.state === "connected" && this.ws !== null) {
        this.ws.send(this.controlMessage(MsgType.HEARTBEAT));
      }
    }, HEARTBEAT_MS);
  }

  private stopHeartbeat(): void {
    if (this.heartbeatTimer !== null) {
      clearInterval(this.heartbeatTimer);
      this.heartbeatTimer = null;
    }
  }

  private clearTimers(): void {
    this.stopHeartbeat();
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
  }

  private dropped(): void {
    this.stopHeartbeat();
    this.ws = null;
    if (this.closedByUser) {
      this.setState("closed");
      return;
    }
    const delay = BACKOFF_MS[Math.min(this.retries, BACKOFF_MS.length - 1)] as number;
    this.retries += 1;
    this.setState("reconnecting");
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      this.state = "idle"; // let connect() proceed
      this.connect();
    }, delay);
  }
}
