"""Recorded walkthroughs: the corpus format replays and drills run on.

Layout on disk:
    <dir>/manifest.json       frame list + camera metadata
    <dir>/frames/NNNN.jpg     one JPEG per analyzed frame
    <dir>/labels.jsonl        ground truth, one JSON object per labeled frame
    <dir>/instructions.jsonl  what a replay dispatched (output, optional)

A recording is valid only if timestamps strictly increase and every
labeled frame exists; load() refuses anything else so a replay can trust
its input completely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from wayfinder.errors import ConfigError
from wayfinder.frames import Frame
from wayfinder.interpreter import Direction, SignClass

MANIFEST_NAME = "manifest.json"
LABELS_NAME = "labels.jsonl"
FRAMES_DIR = "frames"
INSTRUCTIONS_NAME = "instructions.jsonl"


@dataclass(frozen=True)
class FrameEntry:
    sequence: int  # 1-based manifest position, used as the wire frame_seq
    file: str  # path relative to the recording root
    timestamp_ms: int


@dataclass(frozen=True)
class LabeledCue:
    sign_class: str
    direction: str
    caution: bool = False

    def __post_init__(self):
        SignClass(self.sign_class)  # raises ValueError on unknown class
        Direction(self.direction)

    @property
    def key(self) -> str:
        return f"{self.sign_class}:{self.direction}"


@dataclass(frozen=True)
class FrameLabel:
    sequence: int
    cues: tuple[LabeledCue, ...]


@dataclass
class Recording:
    root: Path
    frames: list[FrameEntry]
    labels: dict[int, FrameLabel]
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frames)

    def frame_bytes(self, entry: FrameEntry) -> bytes:
        return (self.root / entry.file).read_bytes()

    @property
    def labeled_cue_count(self) -> int:
        return sum(len(label.cues) for label in self.labels.values())


def _bad(source: Path, detail: str) -> ConfigError:
    return ConfigError(f"recording {source}: {detail}")


def load_recording(root: str | Path) -> Recording:
    root = Path(root)
    manifest_path = root / MANIFEST_NAME
    try:
        doc = json.loads(manifest_path.read_text("utf-8"))
    except OSError as exc:
        raise _bad(root, f"cannot read {MANIFEST_NAME}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _bad(root, f"malformed {MANIFEST_NAME}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("frames"), list):
        raise _bad(root, f"{MANIFEST_NAME} must be an object with a 'frames' list")

    frames: list[FrameEntry] = []
    last_ts: int | None = None
    for i, raw in enumerate(doc["frames"], start=1):
        if not isinstance(raw, dict):
            raise _bad(root, f"frame entry {i} must be an object")
        file = raw.get("file")
        ts = raw.get("timestamp_ms")
        if not isinstance(file, str):
            raise _bad(root, f"frame entry {i}: missing file")
        if isinstance(ts, bool) or not isinstance(ts, int):
            raise _bad(root, f"frame entry {i}: timestamp_ms must be an integer")
        if last_ts is not None and ts <= last_ts:
            raise _bad(root, f"frame entry {i}: timestamps must strictly increase")
        last_ts = ts
        if not (root / file).is_file():
            raise _bad(root, f"frame entry {i}: {file} does not exist")
        frames.append(FrameEntry(sequence=i, file=file, timestamp_ms=ts))

    labels: dict[int, FrameLabel] = {}
    labels_path = root / LABELS_NAME
    if labels_path.is_file():
        for line_no, line in enumerate(labels_path.read_text("utf-8").splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise _bad(root, f"{LABELS_NAME} line {line_no}: {exc}") from exc
            seq = obj.get("sequence")
            if isinstance(seq, bool) or not isinstance(seq, int):
                raise _bad(root, f"{LABELS_NAME} line {line_no}: sequence must be an integer")
            if not 1 <= seq <= len(frames):
                raise _bad(
                    root,
                    f"{LABELS_NAME} line {line_no}: labeled frame {seq} not in manifest",
                )
            if seq in labels:
                raise _bad(root, f"{LABELS_NAME} line {line_no}: duplicate label for frame {seq}")
            raw_cues = obj.get("cues", [])
            if not isinstance(raw_cues, list):
                raise _bad(root, f"{LABELS_NAME} line {line_no}: cues must be a list")
            cues = []
            for raw_cue in raw_cues:
                try:
                    cues.append(
                        LabeledCue(
                            sign_class=raw_cue["sign_class"],
                            direction=raw_cue["direction"],
                            caution=bool(raw_cue.get("caution", False)),
                        )
                    )
                except (TypeError, KeyError, ValueError) as exc:
                    raise _bad(root, f"{LABELS_NAME} line {line_no}: {exc}") from exc
            labels[seq] = FrameLabel(sequence=seq, cues=tuple(cues))

    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise _bad(root, "metadata must be an object")
    return Recording(root=root, frames=frames, labels=labels, metadata=metadata)


class Recorder:
    """Captures analyzed frames and dispatched instructions from a live
    gateway into the recording layout. Superseded frames never reach it:
    it is fed from the worker, after the mailbox.

    Disk trouble stops the recording cleanly; the session keeps running.
    """

    def __init__(self, out_dir: str | Path):
        self.root = Path(out_dir)
        (self.root / FRAMES_DIR).mkdir(parents=True, exist_ok=True)
        self.entries: list[dict] = []
        self.failed: str | None = None
        self._last_ts: int | None = None
        self._skipped_nonmonotonic = 0
        self._instructions_path = self.root / INSTRUCTIONS_NAME
        self._dims: tuple[int, int] | None = None

    def on_frame(self, frame: Frame) -> None:
        if self.failed:
            return
        if self._last_ts is not None and frame.timestamp_ms <= self._last_ts:
            # a client with a broken clock must not poison the recording
            self._skipped_nonmonotonic += 1
            return
        name = f"{FRAMES_DIR}/{len(self.entries) + 1:04d}.jpg"
        try:
            (self.root / name).write_bytes(frame.jpeg)
        except OSError as exc:
            self.failed = str(exc)
            return
        if self._dims is None:
            try:
                self._dims = frame.dimensions()
            except Exception:
                self._dims = None
        self._last_ts = frame.timestamp_ms
        self.entries.append({"file": name, "timestamp_ms": frame.timestamp_ms})

    def on_instruction(self, frame_seq: int, payload_obj: dict) -> None:
        if self.failed:
            return
        record = {"frame_seq": frame_seq, **payload_obj}
        try:
            with self._instructions_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        except OSError as exc:
            self.failed = str(exc)

    def finalize(self, extra_metadata: dict | None = None) -> Path:
        metadata: dict = dict(extra_metadata or {})
        if self._dims is not None:
            metadata.setdefault("width", self._dims[0])
            metadata.setdefault("height", self._dims[1])
        if self._skipped_nonmonotonic:
            metadata["skipped_nonmonotonic_frames"] = self._skipped_nonmonotonic
        manifest = {"metadata": metadata, "frames": self.entries}
        path = self.root / MANIFEST_NAME
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")
        labels = self.root / LABELS_NAME
        if not labels.exists():
            labels.write_text("", "utf-8")  # annotate by hand later
        return path
