"""Scripted backend: canned observations keyed by frame sequence.

The replay harness and the test suite use this as their oracle: whatever
the script says for a sequence number is exactly what analyze() returns.
Script validation happens entirely at load time so a bad script can never
surface as a mid-stream failure.

Script file schema (JSON):

    {
      "5": {
        "text_regions": [{"quad": [[x,y],[x,y],[x,y],[x,y]], "score": 0.95,
                          "text": "EXIT"}],
        "vqa_answers": [["Is this an exit sign?", "yes", 0.9]],
        "delay_ms": 0
      }
    }
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path
from typing import Sequence

from wayfinder.backends.base import (
    PerceptionBackend,
    RawObservation,
    TextRegion,
    VqaAnswer,
)
from wayfinder.errors import ConfigError
from wayfinder.frames import Frame


def _region_from_obj(obj: object, where: str) -> TextRegion:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: text region must be an object")
    quad = obj.get("quad")
    if not isinstance(quad, list) or len(quad) != 4:
        raise ConfigError(f"{where}: quad must be a list of 4 [x, y] pairs")
    try:
        vertices = tuple((float(p[0]), float(p[1])) for p in quad)
        region = TextRegion(
            quad=vertices,
            score=float(obj.get("score", 1.0)),
            text=obj.get("text"),
        )
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    if region.text is not None and not isinstance(region.text, str):
        raise ConfigError(f"{where}: text must be a string or null")
    return region


def _answer_from_obj(obj: object, where: str) -> VqaAnswer:
    if not isinstance(obj, (list, tuple)) or len(obj) != 3:
        raise ConfigError(f"{where}: vqa answer must be [question, answer, confidence]")
    question, answer, confidence = obj
    if not isinstance(question, str) or not isinstance(answer, str):
        raise ConfigError(f"{where}: question and answer must be strings")
    try:
        return VqaAnswer(question=question, answer=answer, confidence=float(confidence))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _reject_duplicate_keys(pairs: list[tuple[str, object]]) -> dict:
    seen: dict[str, object] = {}
    for key, value in pairs:
        if key in seen:
            raise ConfigError(f"duplicate script key {key!r}")
        seen[key] = value
    return seen


class StubBackend(PerceptionBackend):
    """Returns the scripted observation for a frame's sequence number;
    sequences absent from the script yield an empty observation."""

    name = "stub"

    def __init__(self, script: dict[int, dict]):
        self._script = script

    async def analyze(self, frame: Frame, questions: Sequence[str] = ()) -> RawObservation:
        entry = self._script.get(frame.sequence)
        if entry is None:
            return RawObservation(frame_seq=frame.sequence, backend_name=self.name)
        delay_ms = entry["delay_ms"]
        if delay_ms:
            await asyncio.sleep(delay_ms / 1000.0)
        return RawObservation(
            frame_seq=frame.sequence,
            text_regions=entry["text_regions"],
            vqa_answers=entry["vqa_answers"],
            backend_name=self.name,
            inference_ms=float(delay_ms),
        )


def parse_stub_script(raw: str, source: str = "stub script") -> StubBackend:
    """Validate and compile a script; any defect raises ConfigError now."""
    try:
        doc = json.loads(raw, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be an object keyed by sequence")
    script: dict[int, dict] = {}
    for key, entry in doc.items():
        try:
            seq = int(key)
        except ValueError:
            raise ConfigError(f"{source}: key {key!r} is not an integer sequence") from None
        if seq < 0:
            raise ConfigError(f"{source}: sequence {seq} is negative")
        if not isinstance(entry, dict):
            raise ConfigError(f"{source}: entry for seq {seq} must be an object")
        where = f"{source} seq {seq}"
        regions = tuple(
            _region_from_obj(r, where) for r in entry.get("text_regions", [])
        )
        answers = tuple(_answer_from_obj(a, where) for a in entry.get("vqa_answers", []))
        delay_ms = entry.get("delay_ms", 0)
        if isinstance(delay_ms, bool) or not isinstance(delay_ms, (int, float)) or delay_ms < 0:
            raise ConfigError(f"{where}: delay_ms must be a non-negative number")
        script[seq] = {
            "text_regions": regions,
            "vqa_answers": answers,
            "delay_ms": float(delay_ms),
        }
    return StubBackend(script)


def load_stub_script(path: str | Path) -> StubBackend:
    """Load a script file; missing or malformed file raises ConfigError."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"stub script {path}: {exc}") from exc
    return parse_stub_script(raw, source=f"stub script {path.name}")
