/**
 * Operator panel view-model: everything the page shows, held as plain
 * state with string renderers. DOM wiring stays in main.ts; tests drive
 * this directly.
 */

import { ErrorInfo, HelloAck, Instruction } from "./protocol.js";
import { ConnState } from "./session.js";

export type Mode = "live" | "walkthrough";

export interface LogEntry {
  n: number; // arrival order, 1-based
  text: string;
  priority: number;
  frameSeq: number;
  distanceM: number | null;
  atMs: number;
}

const BADGES: Record<number, string> = { 0: "info", 1: "guidance", 2: "caution" };

export function priorityBadge(priority: number): string {
  return BADGES[priority] ?? `p${priority}`;
}

export class SessionView {
  state: ConnState = "idle";
  ack: HelloAck | null = null;
  rttMs: number | null = null;
  mode: Mode = "walkthrough";
  cursor = -1;
  walkLength = 0;
  paused = false;
  framesSent = 0;
  speechOk = true;
  lastError: ErrorInfo | null = null;
  log: LogEntry[] = [];

  constructor(private now: () => number = Date.now) {}

  addInstruction(instruction: Instruction): LogEntry {
    const entry: LogEntry = {
      n: this.log.length + 1,
      text: instruction.text,
      priority: instruction.priority,
      frameSeq: instruction.frameSeq,
      distanceM: instruction.distanceM,
      atMs: this.now(),
    };
    this.log.push(entry); // arrival order, append-only
    return entry;
  }

  statusLine(): string {
    const parts = [this.state as string];
    if (this.ack !== null) {
      parts.push(this.ack.resumed ? "resumed" : "new session");
      parts.push(`${this.ack.acceptedFps} fps accepted`);
    }
    if (this.rttMs !== null) parts.push(`rtt ${this.rttMs.toFixed(0)} ms`);
    if (this.paused) parts.push("PAUSED");
    return parts.join(" | ");
  }

  walkLine(): string {
    if (this.mode !== "walkthrough" || this.walkLength === 0) return "";
    const at = this.cursor < 0 ? "start" : `${this.cursor + 1}/${this.walkLength}`;
    return `frame ${at}`;
  }

  renderLogHtml(): string {
    // newest first; every spoken instruction is in here by construction
    return this.log
      .slice()
      .reverse()
      .map((e) => {
        const badge = priorityBadge(e.priority);
        return (
          `<li class="entry ${badge}"><span class="badge">${badge}</span>` +
          `<span class="text">${escapeHtml(e.text)}</span>` +
          `<span class="meta">#${e.n} · frame ${e.frameSeq}</span></li>`
        );
      })
      .join("");
  }
}

export function escapeHtml(s: string): string {
  return s
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
