/**
 * Recorded-walkthrough frame source.
 *
 * Loads a recording's manifest over HTTP (the gateway serves it under
 * /app when the corpus sits inside the static directory) and turns
 * steering actions into frames: every action yields exactly one image,
 * with the cursor clamped to the recording bounds, so an operator can
 * walk forward, back up, and replay a segment to probe how guidance
 * reacts.
 */

export interface WalkEntry {
  file: string;
  timestampMs: number;
}

type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  arrayBuffer(): Promise<ArrayBuffer>;
}>;

export class Walkthrough {
  /** Index of the frame most recently handed out; -1 before any step. */
  cursor = -1;

  private cache = new Map<string, Uint8Array>();

  private constructor(
    readonly entries: WalkEntry[],
    private baseUrl: string,
    private fetchImpl: FetchLike,
  ) {}

  static async load(baseUrl: string, fetchImpl?: FetchLike): Promise<Walkthrough> {
    const doFetch = fetchImpl ?? (fetch.bind(globalThis) as FetchLike);
    const base = baseUrl.endsWith("/") ? baseUrl : baseUrl + "/";
    const resp = await doFetch(base + "manifest.json");
    if (!resp.ok) throw new Error(`manifest fetch failed: HTTP ${resp.status}`);
    const doc = (await resp.json()) as { frames?: unknown };
    if (!Array.isArray(doc.frames)) throw new Error("manifest has no frames array");
    const entries = doc.frames.map((raw, i) => {
      const entry = raw as { file?: unknown; timestamp_ms?: unknown };
      if (typeof entry.file !== "string" || typeof entry.timestamp_ms !== "number") {
        throw new Error(`manifest frame ${i + 1} is malformed`);
      }
      return { file: entry.file, timestampMs: entry.timestamp_ms };
    });
    if (entries.length === 0) throw new Error("recording has no frames");
    return new Walkthrough(entries, base, doFetch);
  }

  get length(): number {
    return this.entries.length;
  }

  /** Step toward the end; at the last frame the same image is handed out
   * again (a steering action always produces a frame). */
  forward(): Promise<Uint8Array> {
    return this.jump(this.cursor + 1);
  }

  /** Step back toward the start, clamped at frame 0. */
  back(): Promise<Uint8Array> {
    return this.jump(this.cursor - 1);
  }

  async jump(index: number): Promise<Uint8Array> {
    this.cursor = Math.min(Math.max(index, 0), this.entries.length - 1);
    const entry = this.entries[this.cursor] as WalkEntry;
    const hit = this.cache.get(entry.file);
    if (hit !== undefined) return hit;
    const resp = await this.fetchImpl(this.baseUrl + entry.file);
    if (!resp.ok) throw new Error(`frame fetch failed: HTTP ${resp.status}`);
    const bytes = new Uint8Array(await resp.arrayBuffer());
    this.cache.set(entry.file, bytes);
    return bytes;
  }
}
