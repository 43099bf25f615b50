"""Replay scoring and report emission.

Quality categories map to what a machine can actually measure: functional
stability (completeness/correctness against labels), performance
efficiency (latency percentiles), reliability (the reconnect drill), and
portability (which profiles ran). Usability needs humans; the report says
so instead of inventing a number.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path


def percentile(samples: list[float], q: float) -> float | None:
    """Nearest-rank percentile; deterministic and monotone in q."""
    if not samples:
        return None
    if not 0 < q <= 100:
        raise ValueError(f"percentile out of range: {q}")
    ordered = sorted(samples)
    rank = max(1, math.ceil(q / 100.0 * len(ordered)))
    return ordered[rank - 1]


def _rate(numerator: int, denominator: int) -> float | None:
    if denominator == 0:
        return None  # undefined, never 0: absence of labels is not failure
    value = numerator / denominator
    assert 0.0 <= value <= 1.0
    return value


@dataclass
class EvalReport:
    completeness: float | None
    correctness: float | None
    labeled_cues: int
    detected_cues: int
    emitted: int
    correct: int
    overhead_p50_ms: float | None
    overhead_p95_ms: float | None
    e2e_p50_ms: float | None
    e2e_p95_ms: float | None
    recoverability: str = "not run"  # "pass" | "fail" | "not run"
    recoverability_detail: str = ""
    usability_status: str = "requires human study"
    repetition_rate: float | None = None
    profiles: list[str] = field(default_factory=list)
    frames_total: int = 0
    frames_analyzed: int = 0
    drops_stale: int = 0
    supersessions: int = 0
    backend_errors: int = 0

    def __post_init__(self):
        for name in ("completeness", "correctness", "repetition_rate"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        for low, high in (
            (self.overhead_p50_ms, self.overhead_p95_ms),
            (self.e2e_p50_ms, self.e2e_p95_ms),
        ):
            if low is not None and high is not None and low > high:
                raise ValueError(f"p50 {low} exceeds p95 {high}")

    def to_dict(self) -> dict:
        return {
            "functional": {
                "completeness": self.completeness,
                "correctness": self.correctness,
                "labeled_cues": self.labeled_cues,
                "detected_cues": self.detected_cues,
                "instructions_emitted": self.emitted,
                "instructions_correct": self.correct,
            },
            "performance": {
                "pipeline_overhead_p50_ms": self.overhead_p50_ms,
                "pipeline_overhead_p95_ms": self.overhead_p95_ms,
                "end_to_end_p50_ms": self.e2e_p50_ms,
                "end_to_end_p95_ms": self.e2e_p95_ms,
            },
            "reliability": {
                "recoverability": self.recoverability,
                "detail": self.recoverability_detail,
            },
            "usability": {
                "status": self.usability_status,
                "instructions_emitted": self.emitted,
                "repetition_rate": self.repetition_rate,
            },
            "portability": {"profiles": self.profiles},
            "counts": {
                "frames_total": self.frames_total,
                "frames_analyzed": self.frames_analyzed,
                "drops_stale": self.drops_stale,
                "supersessions": self.supersessions,
                "backend_errors": self.backend_errors,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalReport":
        return cls(
            completeness=doc["functional"]["completeness"],
            correctness=doc["functional"]["correctness"],
            labeled_cues=doc["functional"]["labeled_cues"],
            detected_cues=doc["functional"]["detected_cues"],
            emitted=doc["functional"]["instructions_emitted"],
            correct=doc["functional"]["instructions_correct"],
            overhead_p50_ms=doc["performance"]["pipeline_overhead_p50_ms"],
            overhead_p95_ms=doc["performance"]["pipeline_overhead_p95_ms"],
            e2e_p50_ms=doc["performance"]["end_to_end_p50_ms"],
            e2e_p95_ms=doc["performance"]["end_to_end_p95_ms"],
            recoverability=doc["reliability"]["recoverability"],
            recoverability_detail=doc["reliability"]["detail"],
            usability_status=doc["usability"]["status"],
            repetition_rate=doc["usability"]["repetition_rate"],
            profiles=list(doc["portability"]["profiles"]),
            frames_total=doc["counts"]["frames_total"],
            frames_analyzed=doc["counts"]["frames_analyzed"],
            drops_stale=doc["counts"]["drops_stale"],
            supersessions=doc["counts"]["supersessions"],
            backend_errors=doc["counts"]["backend_errors"],
        )


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def render_table(report: EvalReport) -> str:
    doc = report.to_dict()
    rows: list[tuple[str, str]] = []
    for category, values in doc.items():
        for key, value in values.items():
            if isinstance(value, list):
                value = ", ".join(value) if value else "n/a"
            rows.append((f"{category}.{key}", _fmt(value)))
    width = max(len(name) for name, _ in rows)
    lines = [f"{name.ljust(width)}  {value}" for name, value in rows]
    header = "evaluation report"
    rule = "-" * max(len(header), width + 10)
    return "\n".join([header, rule, *lines]) + "\n"


def emit_report(report: EvalReport, json_path: str | Path) -> tuple[Path, Path]:
    """Write <path> as JSON and a sibling .txt table with the same numbers."""
    json_path = Path(json_path)
    table_path = json_path.with_suffix(".txt")
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=False) + "\n", "utf-8"
    )
    table_path.write_text(render_table(report), "utf-8")
    return json_path, table_path
