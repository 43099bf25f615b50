"""Replayable recordings, the bundled corpus, and evaluation reports."""

from wayfinder.harness.corpus import (
    CALIBRATION,
    EXPECTED_UTTERANCES,
    STUB_SCRIPT_NAME,
    build_demo_corpus,
)
from wayfinder.harness.recording import (
    FrameEntry,
    FrameLabel,
    LabeledCue,
    Recorder,
    Recording,
    load_recording,
)
from wayfinder.harness.replay import (
    LoopbackClient,
    RecoverabilityResult,
    config_for_recording,
    recoverability_drill,
    recoverability_drill_async,
    replay,
    replay_async,
    run_evaluation,
)
from wayfinder.harness.report import EvalReport, emit_report, percentile, render_table

__all__ = [
    "CALIBRATION",
    "EXPECTED_UTTERANCES",
    "STUB_SCRIPT_NAME",
    "build_demo_corpus",
    "FrameEntry",
    "FrameLabel",
    "LabeledCue",
    "Recorder",
    "Recording",
    "load_recording",
    "LoopbackClient",
    "RecoverabilityResult",
    "config_for_recording",
    "recoverability_drill",
    "recoverability_drill_async",
    "replay",
    "replay_async",
    "run_evaluation",
    "EvalReport",
    "emit_report",
    "percentile",
    "render_table",
]
