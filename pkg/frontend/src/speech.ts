/**
 * Spoken instruction presenter.
 *
 * Rules, in order of importance: the visual log gets every instruction
 * before any audio happens (audio is never the sole record); cautions cut
 * off whatever is being spoken and flush stale queued guidance; a missing
 * or broken speech engine degrades to visual-only, never to a crash.
 */

export const PRIORITY_INFO = 0;
export const PRIORITY_GUIDANCE = 1;
export const PRIORITY_CAUTION = 2;

export interface UtteranceLike {
  text: string;
  rate: number;
  onend: (() => void) | null;
  onerror: (() => void) | null;
}

export interface SynthLike {
  speak(u: UtteranceLike): void;
  cancel(): void;
}

export interface SpokenItem {
  text: string;
  priority: number;
}

export class SpeechPresenter {
  readonly available: boolean;
  /** True once speech failed or was missing; the UI shows a notice. */
  visualOnly = false;
  speaking = false;

  private queue: SpokenItem[] = [];

  constructor(
    private log: (item: SpokenItem) => void,
    private synth: SynthLike | null,
    private makeUtterance: (text: string) => UtteranceLike,
    private rate = 1.1,
  ) {
    this.available = synth !== null;
    if (!this.available) this.visualOnly = true;
  }

  present(item: SpokenItem): void {
    this.log(item); // before any speech path can fail
    if (!this.available || this.synth === null) return;
    if (item.priority >= PRIORITY_CAUTION) {
      // preempt: stale guidance must not delay a hazard
      this.queue = [];
      this.synth.cancel();
      this.speaking = false;
      this.speakNow(item);
      return;
    }
    if (this.speaking) {
      this.queue.push(item);
      return;
    }
    this.speakNow(item);
  }

  private speakNow(item: SpokenItem): void {
    if (this.synth === null) return;
    const utterance = this.makeUtterance(item.text);
    utterance.rate = this.rate;
    const advance = () => {
      this.speaking = false;
      const next = this.queue.shift();
      if (next) this.speakNow(next);
    };
    utterance.onend = advance;
    utterance.onerror = advance;
    this.speaking = true;
    try {
      this.synth.speak(utterance);
    } catch {
      this.speaking = false;
      this.visualOnly = true;
    }
  }
}

/** The browser's speech engine, or null when the platform lacks one. */
export function browserSynth(): SynthLike | null {
  if (typeof window === "undefined" || !("speechSynthesis" in window)) return null;
  const synth = window.speechSynthesis;
  // safe: the presenter only feeds it utterances from browserUtterance
  return {
    speak: (u) => synth.speak(u as unknown as SpeechSynthesisUtterance),
    cancel: () => synth.cancel(),
  };
}

export function browserUtterance(text: string): UtteranceLike {
  return new SpeechSynthesisUtterance(text) as unknown as UtteranceLike;
}
