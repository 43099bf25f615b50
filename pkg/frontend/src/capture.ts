/**
 * Live-mode frame source: webcam to JPEG bytes on a fixed cadence.
 *
 * The ticker never lets grabs overlap (a slow encode skips ticks instead
 * of piling up) and pause stops emission completely, including a frame
 * whose grab was already in flight when pause hit.
 */

export class FrameTicker {
  paused = false;

  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;

  constructor(
    private grab: () => Promise<Uint8Array | null>,
    private send: (jpeg: Uint8Array) => void,
  ) {}

  start(fps: number): void {
    this.stop();
    if (fps <= 0) throw new RangeError(`fps must be positive, got ${fps}`);
    this.timer = setInterval(() => void this.tick(), 1000 / fps);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  pause(): void {
    this.paused = true;
  }

  resume(): void {
    this.paused = false;
  }

  private async tick(): Promise<void> {
    if (this.paused || this.inFlight) return;
    this.inFlight = true;
    try {
      const jpeg = await this.grab();
      // re-check: pause() may have happened mid-grab
      if (jpeg !== null && !this.paused) this.send(jpeg);
    } finally {
      this.inFlight = false;
    }
  }
}

export async function openWebcam(
  video: HTMLVideoElement,
  width = 640,
  height = 480,
): Promise<MediaStream> {
  const stream = await navigator.mediaDevices.getUserMedia({
    video: { width, height },
    audio: false,
  });
  video.srcObject = stream;
  await video.play();
  return stream;
}

/** JPEG grabber drawing the current video frame through a canvas. */
export function canvasGrabber(
  video: HTMLVideoElement,
  canvas: HTMLCanvasElement,
  quality = 0.8,
): () => Promise<Uint8Array | null> {
  return async () => {
    if (video.videoWidth === 0) return null; // camera not delivering yet
    canvas.width = video.videoWidth;
    canvas.height = video.videoHeight;
    const ctx = canvas.getContext("2d");
    if (ctx === null) return null;
    ctx.drawImage(video, 0, 0);
    const blob = await new Promise<Blob | null>((resolve) =>
      canvas.toBlob(resolve, "image/jpeg", quality),
    );
    if (blob === null) return null;
    return new Uint8Array(await blob.arrayBuffer());
  };
}
