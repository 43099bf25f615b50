"""Builds the bundled 20-frame synthetic walkthrough corpus.

Script, labels, and frame images are authored together from one schedule
table, so the expected replay outcome is known exactly: six labeled cues,
six emitted instructions, every in-between frame suppressed by the dedup
window or empty. The walk passes an exit door (announced, then glimpsed
on the right, later on the left), a staircase, a contradicting VQA answer
that loses to strong scene text, and finally a person blocking the way.
"""

from __future__ import annotations

import json
from pathlib import Path

from PIL import Image, ImageDraw

from wayfinder.harness.recording import (
    FRAMES_DIR,
    LABELS_NAME,
    MANIFEST_NAME,
    Recording,
    load_recording,
)

WIDTH, HEIGHT = 640, 480
STUB_SCRIPT_NAME = "stub_script.json"

EXIT_QUESTION = "Is this an exit sign?"
SUMMARY_QUESTION = "Give a summary of the image"

# quad heights are load-bearing: 50 px -> 3.04 m -> 10 ft, 34 px -> 5 steps,
# 80 px -> 1.9 m -> 6 ft (focal 800, exit door 0.19 m, stairs riser 0.15 m)
EXIT_RIGHT = [[480, 200], [560, 200], [560, 250], [480, 250]]
STAIRS_AHEAD = [[280, 230], [360, 230], [360, 264], [280, 264]]
STAIRS_AHEAD_B = [[280, 230], [360, 230], [360, 265], [280, 265]]
EXIT_LEFT = [[60, 180], [140, 180], [140, 260], [60, 260]]


def _region(quad, score, text):
    return {"quad": quad, "score": score, "text": text}


# (timestamp_ms, script entry or None, label cues or None, drawing hints)
SCHEDULE: list[tuple[int, dict | None, list[dict] | None, dict]] = [
    # 1: the gateway's own question gets an affirmative VQA answer
    (
        0,
        {"vqa_answers": [[EXIT_QUESTION, "yes, an exit door ahead", 0.9]]},
        [{"sign_class": "EXIT_DOOR", "direction": "ahead", "caution": False}],
        {"exit_far": True},
    ),
    (500, None, None, {}),
    (1000, None, None, {}),
    (1500, None, None, {}),
    # 5: exit sign readable on the right at 3.04 m
    (
        2000,
        {"text_regions": [_region(EXIT_RIGHT, 0.9, "EXIT")]},
        [{"sign_class": "EXIT_DOOR", "direction": "right", "caution": False}],
        {"exit": EXIT_RIGHT},
    ),
    (2500, None, None, {}),
    # 7: same sign, same distance: suppressed by the dedup window
    (3000, {"text_regions": [_region(EXIT_RIGHT, 0.9, "EXIT")]}, None, {"exit": EXIT_RIGHT}),
    (3500, None, None, {}),
    # 9: staircase dead ahead, five strides out
    (
        4000,
        {"text_regions": [_region(STAIRS_AHEAD, 0.88, "STAIRS")]},
        [{"sign_class": "STAIRS", "direction": "ahead", "caution": True}],
        {"stairs": STAIRS_AHEAD},
    ),
    # 10-11: stairs persist; the tiny height change is under 20 percent
    (4500, {"text_regions": [_region(STAIRS_AHEAD, 0.88, "STAIRS")]}, None, {"stairs": STAIRS_AHEAD}),
    (5000, {"text_regions": [_region(STAIRS_AHEAD_B, 0.87, "STAIRS")]}, None, {"stairs": STAIRS_AHEAD_B}),
    (5500, None, None, {}),
    (6000, None, None, {}),
    # 14: a second exit, close by on the left
    (
        6500,
        {"text_regions": [_region(EXIT_LEFT, 0.92, "EXIT")]},
        [{"sign_class": "EXIT_DOOR", "direction": "left", "caution": False}],
        {"exit": EXIT_LEFT},
    ),
    (7000, {"text_regions": [_region(EXIT_LEFT, 0.92, "EXIT")]}, None, {"exit": EXIT_LEFT}),
    (7500, None, None, {}),
    (8000, None, None, {}),
    # 18: VQA disagrees ("stop sign", 0.6) but the read text is certain (1.0);
    # the right-side exit window has lapsed, so it is announced again
    (
        8500,
        {
            "text_regions": [_region(EXIT_RIGHT, 1.0, "EXIT")],
            "vqa_answers": [[EXIT_QUESTION, "no, that is a stop sign", 0.6]],
        },
        [{"sign_class": "EXIT_DOOR", "direction": "right", "caution": False}],
        {"exit": EXIT_RIGHT},
    ),
    (9000, None, None, {}),
    # 20: scene summary reports a person in the path
    (
        9500,
        {"vqa_answers": [[SUMMARY_QUESTION, "a person is blocking the corridor", 0.97]]},
        [{"sign_class": "OBSTACLE", "direction": "ahead", "caution": True}],
        {"person": True},
    ),
]

# what an uninterrupted replay must say, frame by frame
EXPECTED_UTTERANCES: dict[int, str] = {
    1: "There's an exit door straight ahead",
    5: "There's an exit door 10 feet ahead on your right",
    9: "Caution: stairs approaching in 5 steps",
    14: "There's an exit door 6 feet ahead on your left",
    18: "There's an exit door 10 feet ahead on your right",
    20: "Caution: obstacle straight ahead",
}

CALIBRATION = {
    "focal_length_px": 800.0,
    "real_heights_m": {"EXIT_DOOR": 0.19, "STAIRS": 0.15},
}


def _draw_frame(hints: dict) -> Image.Image:
    img = Image.new("RGB", (WIDTH, HEIGHT), (214, 210, 202))
    draw = ImageDraw.Draw(img)
    # corridor: floor below the horizon, a strip of ceiling above
    draw.rectangle([0, 300, WIDTH, HEIGHT], fill=(168, 160, 148))
    draw.rectangle([0, 0, WIDTH, 40], fill=(188, 184, 176))
    draw.line([0, 300, 320, 240], fill=(140, 134, 124), width=3)
    draw.line([WIDTH, 300, 320, 240], fill=(140, 134, 124), width=3)

    if hints.get("exit"):
        (x0, y0), _, (x1, y1), _ = hints["exit"]
        draw.rectangle([x0, y0, x1, y1], fill=(18, 112, 48), outline=(8, 60, 26), width=3)
        draw.text(((x0 + x1) / 2 - 14, (y0 + y1) / 2 - 5), "EXIT", fill=(240, 248, 240))
    if hints.get("exit_far"):
        draw.rectangle([305, 220, 335, 240], fill=(18, 112, 48))
    if hints.get("stairs"):
        (x0, y0), _, (x1, y1), _ = hints["stairs"]
        draw.rectangle([x0, y0, x1, y1], fill=(96, 92, 86), outline=(60, 58, 54), width=2)
        step = max(4, (y1 - y0) // 5)
        for y in range(y0 + step, y1, step):
            draw.line([x0, y, x1, y], fill=(140, 136, 128), width=2)
    if hints.get("person"):
        draw.ellipse([290, 180, 350, 420], fill=(70, 64, 88))
        draw.ellipse([302, 140, 338, 184], fill=(120, 100, 88))
    return img


def build_demo_corpus(out_dir: str | Path) -> Recording:
    """Write frames, manifest, labels, and the matching stub script."""
    root = Path(out_dir)
    (root / FRAMES_DIR).mkdir(parents=True, exist_ok=True)

    entries = []
    labels_lines = []
    script: dict[str, dict] = {}
    for seq, (ts, script_entry, cues, hints) in enumerate(SCHEDULE, start=1):
        name = f"{FRAMES_DIR}/{seq:04d}.jpg"
        _draw_frame(hints).save(root / name, format="JPEG", quality=85)
        entries.append({"file": name, "timestamp_ms": ts})
        if script_entry is not None:
            script[str(seq)] = script_entry
        if cues is not None:
            labels_lines.append(json.dumps({"sequence": seq, "cues": cues}, sort_keys=True))

    manifest = {
        "metadata": {
            "width": WIDTH,
            "height": HEIGHT,
            "fps": 2.0,
            "calibration": CALIBRATION,
            "description": "synthetic corridor walkthrough, authored with its stub script",
        },
        "frames": entries,
    }
    (root / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    (root / LABELS_NAME).write_text("\n".join(labels_lines) + "\n")
    (root / STUB_SCRIPT_NAME).write_text(json.dumps(script, indent=2, sort_keys=True) + "\n")
    return load_recording(root)
