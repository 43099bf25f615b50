/**
 * Page glue: binds the session client, frame sources, speech, and the
 * operator panel to the DOM. All state lives in the modules; this file
 * only moves events around.
 */

import { FrameTicker, canvasGrabber, openWebcam } from "./capture.js";
import { SessionView } from "./panel.js";
import { GatewayClient } from "./session.js";
import {
  PRIORITY_CAUTION,
  PRIORITY_INFO,
  SpeechPresenter,
  browserSynth,
  browserUtterance,
} from "./speech.js";
import { Walkthrough } from "./walkthrough.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

const statusEl = el<HTMLElement>("status");
const walkEl = el<HTMLElement>("walk-pos");
const logEl = el<HTMLUListElement>("log");
const noticeEl = el<HTMLElement>("notice");
const video = el<HTMLVideoElement>("camera");
const canvas = el<HTMLCanvasElement>("scratch");

const view = new SessionView();
const speech = new SpeechPresenter(
  (item) => {
    // the log is the ground truth; speech happens after this returns
    view.addInstruction({
      text: item.text,
      priority: item.priority,
      dedupKey: "",
      frameSeq: view.framesSent,
      distanceM: null,
      direction: null,
    });
    logEl.innerHTML = view.renderLogHtml();
  },
  browserSynth(),
  browserUtterance,
);

let client: GatewayClient | null = null;
let walkthrough: Walkthrough | null = null;
const ticker = new FrameTicker(
  canvasGrabber(video, canvas),
  (jpeg) => void client?.sendFrame(jpeg),
);

function refresh(): void {
  view.framesSent = client?.framesSent ?? 0;
  statusEl.textContent = view.statusLine();
  walkEl.textContent = view.walkLine();
  noticeEl.textContent = speech.visualOnly ? "speech unavailable: visual only" : "";
}
setInterval(refresh, 1000); // stats tick at least once a second

function defaultWsUrl(): string {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}/`;
}

el<HTMLInputElement>("ws-url").value = defaultWsUrl();

el<HTMLButtonElement>("connect").onclick = () => {
  client?.bye();
  const units = el<HTMLSelectElement>("units").value;
  client = new GatewayClient({
    url: el<HTMLInputElement>("ws-url").value,
    units,
    events: {
      onState: (state) => {
        view.state = state;
        view.ack = client?.ack ?? null;
        refresh();
      },
      onAck: (ack, rttMs) => {
        view.ack = ack;
        view.rttMs = rttMs;
        speech.present({
          text: ack.resumed ? "Reconnected" : "Connected",
          priority: PRIORITY_INFO,
        });
        refresh();
        if (view.mode === "live" && !view.paused) ticker.start(ack.acceptedFps);
      },
      onInstruction: (instruction) => speech.present(instruction),
      onError: (error) => {
        view.lastError = error;
        noticeEl.textContent = `gateway error: ${error.code} (${error.detail})`;
      },
    },
  });
  client.connect();
};

el<HTMLSelectElement>("units").onchange = (ev) => {
  const units = (ev.target as HTMLSelectElement).value;
  client?.setUnits(units);
};

el<HTMLButtonElement>("pause").onclick = (ev) => {
  view.paused = !view.paused;
  (ev.target as HTMLButtonElement).textContent = view.paused ? "resume" : "pause";
  if (view.paused) ticker.pause();
  else ticker.resume();
  refresh();
};

async function sendWalkFrame(bytes: Uint8Array): Promise<void> {
  if (view.paused || walkthrough === null) return;
  view.cursor = walkthrough.cursor;
  client?.sendFrame(bytes);
  refresh();
}

el<HTMLButtonElement>("step-back").onclick = async () => {
  if (walkthrough) await sendWalkFrame(await walkthrough.back());
};
el<HTMLButtonElement>("step-fwd").onclick = async () => {
  if (walkthrough) await sendWalkFrame(await walkthrough.forward());
};
document.addEventListener("keydown", async (ev) => {
  if (view.mode !== "walkthrough" || walkthrough === null) return;
  if (ev.key === "ArrowRight" || ev.key === "ArrowUp") {
    ev.preventDefault();
    await sendWalkFrame(await walkthrough.forward());
  } else if (ev.key === "ArrowLeft" || ev.key === "ArrowDown") {
    ev.preventDefault();
    await sendWalkFrame(await walkthrough.back());
  }
});

el<HTMLButtonElement>("load-walk").onclick = async () => {
  try {
    walkthrough = await Walkthrough.load(el<HTMLInputElement>("walk-url").value);
    view.mode = "walkthrough";
    view.walkLength = walkthrough.length;
    view.cursor = -1;
    ticker.stop();
    noticeEl.textContent = "";
    refresh();
  } catch (err) {
    noticeEl.textContent = `walkthrough load failed: ${err}`;
  }
};

el<HTMLButtonElement>("go-live").onclick = async () => {
  try {
    await openWebcam(video);
    view.mode = "live";
    refresh();
    if (client?.state === "connected" && !view.paused) {
      ticker.start(client.ack?.acceptedFps ?? 2);
    }
  } catch (err) {
    // camera denied: walkthrough mode stays available
    noticeEl.textContent = `camera unavailable (${err}); use walkthrough mode`;
    view.mode = "walkthrough";
    refresh();
  }
};

el<HTMLButtonElement>("replay-seg").onclick = async () => {
  // probe: re-run the last few steps so the operator can compare guidance
  if (walkthrough === null || view.paused) return;
  const from = Math.max(0, walkthrough.cursor - 4);
  for (let i = from; i <= Math.max(from, walkthrough.cursor); i++) {
    await sendWalkFrame(await walkthrough.jump(i));
  }
};

// caution badge legend doubles as a speech self-test button
el<HTMLButtonElement>("test-voice").onclick = () =>
  speech.present({ text: "Caution: this is a test", priority: PRIORITY_CAUTION });
