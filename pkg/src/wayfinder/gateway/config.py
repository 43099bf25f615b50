"""Gateway configuration: TOML file, validation, backend construction."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from wayfinder.backends import (
    DEFAULT_IOU_THRESHOLD,
    DEFAULT_QUESTIONS,
    DEFAULT_SCORE_THRESHOLD,
    DEFAULT_TIMEOUT_MS,
    DEFAULT_UNIT_COST_USD,
    EastBackend,
    PerceptionBackend,
    RemoteBackend,
    StubBackend,
    VqaBackend,
    load_stub_script,
)
from wayfinder.backends.remote import API_KEY_ENV_VAR
from wayfinder.errors import ConfigError
from wayfinder.interpreter import Calibration, SignClass, load_lexicon

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

BACKEND_NAMES = ("stub", "east", "vqa", "remote")


@dataclass
class GatewayConfig:
    listen_tcp: str | None = None  # "host:port"
    listen_ws: str | None = None
    backend: str = "stub"
    units: str = "feet"
    heartbeat_interval_ms: float = 5000.0
    session_timeout_ms: float = 15000.0
    reconnect_window_ms: float = 60000.0
    min_utterance_gap_ms: float = 2000.0
    dedup_window_ms: float = 5000.0
    backend_timeout_ms: float = DEFAULT_TIMEOUT_MS
    stub_script: str | None = None
    east_sidecar_url: str | None = None
    east_fixture_dir: str | None = None
    score_threshold: float = DEFAULT_SCORE_THRESHOLD
    iou_threshold: float = DEFAULT_IOU_THRESHOLD
    vqa_sidecar_url: str | None = None
    vqa_questions: tuple[str, ...] = DEFAULT_QUESTIONS
    remote_url: str | None = None
    remote_api_key: str | None = None
    remote_unit_cost_usd: str = DEFAULT_UNIT_COST_USD
    rewriter_url: str | None = None
    rewriter_timeout_ms: float = 300.0
    calibration: Calibration = field(default_factory=Calibration)
    lexicon_path: str | None = None
    static_dir: str | None = None  # served at /app on the WebSocket listener

    def __post_init__(self):
        for name in (
            "heartbeat_interval_ms",
            "session_timeout_ms",
            "reconnect_window_ms",
            "min_utterance_gap_ms",
            "dedup_window_ms",
            "backend_timeout_ms",
            "rewriter_timeout_ms",
        ):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.session_timeout_ms < 2 * self.heartbeat_interval_ms:
            raise ConfigError(
                "session_timeout_ms must be at least twice heartbeat_interval_ms"
            )
        if self.units not in ("feet", "meters"):
            raise ConfigError(f"units must be 'feet' or 'meters', got {self.units!r}")
        if self.backend not in BACKEND_NAMES:
            raise ConfigError(f"backend must be one of {BACKEND_NAMES}, got {self.backend!r}")

    def load_lexicon_table(self):
        return load_lexicon(self.lexicon_path)


def _calibration_from_table(table: dict, source: str) -> Calibration:
    focal = table.get("focal_length_px", 800.0)
    heights_table = table.get("real_heights_m", {})
    if not isinstance(heights_table, dict):
        raise ConfigError(f"{source}: calibration.real_heights_m must be a table")
    heights: dict[SignClass, float] = {}
    for class_name, height in heights_table.items():
        try:
            sign_class = SignClass(class_name)
        except ValueError:
            raise ConfigError(
                f"{source}: unknown sign class {class_name!r} in calibration"
            ) from None
        if isinstance(height, bool) or not isinstance(height, (int, float)):
            raise ConfigError(f"{source}: height for {class_name} must be a number")
        heights[sign_class] = float(height)
    try:
        return Calibration(focal_length_px=float(focal), real_heights_m=heights)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


_TOP_LEVEL_KEYS = {
    "listen_tcp",
    "listen_ws",
    "backend",
    "units",
    "heartbeat_interval_ms",
    "session_timeout_ms",
    "reconnect_window_ms",
    "min_utterance_gap_ms",
    "dedup_window_ms",
    "backend_timeout_ms",
    "static_dir",
    "lexicon_path",
}
_TABLES = {"stub", "east", "vqa", "remote", "rewriter", "calibration"}


def config_from_dict(doc: dict, source: str = "config") -> GatewayConfig:
    unknown = set(doc) - _TOP_LEVEL_KEYS - _TABLES
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")
    kwargs: dict = {k: doc[k] for k in _TOP_LEVEL_KEYS if k in doc}

    stub = doc.get("stub", {})
    if stub:
        _require_keys(stub, {"script"}, f"{source}: [stub]")
        kwargs["stub_script"] = stub.get("script")
    east = doc.get("east", {})
    if east:
        _require_keys(
            east, {"sidecar_url", "fixture_dir", "score_threshold", "iou_threshold"}, f"{source}: [east]"
        )
        kwargs["east_sidecar_url"] = east.get("sidecar_url")
        kwargs["east_fixture_dir"] = east.get("fixture_dir")
        if "score_threshold" in east:
            kwargs["score_threshold"] = east["score_threshold"]
        if "iou_threshold" in east:
            kwargs["iou_threshold"] = east["iou_threshold"]
    vqa = doc.get("vqa", {})
    if vqa:
        _require_keys(vqa, {"sidecar_url", "questions"}, f"{source}: [vqa]")
        kwargs["vqa_sidecar_url"] = vqa.get("sidecar_url")
        if "questions" in vqa:
            questions = vqa["questions"]
            if not isinstance(questions, list) or not all(
                isinstance(q, str) for q in questions
            ):
                raise ConfigError(f"{source}: [vqa] questions must be a list of strings")
            kwargs["vqa_questions"] = tuple(questions)
    remote = doc.get("remote", {})
    if remote:
        _require_keys(remote, {"url", "api_key", "unit_cost_usd"}, f"{source}: [remote]")
        kwargs["remote_url"] = remote.get("url")
        kwargs["remote_api_key"] = remote.get("api_key")
        if "unit_cost_usd" in remote:
            kwargs["remote_unit_cost_usd"] = str(remote["unit_cost_usd"])
    rewriter = doc.get("rewriter", {})
    if rewriter:
        _require_keys(rewriter, {"url", "timeout_ms"}, f"{source}: [rewriter]")
        kwargs["rewriter_url"] = rewriter.get("url")
        if "timeout_ms" in rewriter:
            kwargs["rewriter_timeout_ms"] = rewriter["timeout_ms"]
    calibration = doc.get("calibration", {})
    if calibration:
        kwargs["calibration"] = _calibration_from_table(calibration, source)

    # the environment always wins for the remote key: secrets do not
    # belong in config files
    env_key = os.environ.get(API_KEY_ENV_VAR)
    if env_key:
        kwargs["remote_api_key"] = env_key

    try:
        return GatewayConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def _require_keys(table: dict, allowed: set[str], source: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")


def load_config(path: str | Path) -> GatewayConfig:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"config {path}: {exc}") from exc
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"config {path}: {exc}") from exc
    return config_from_dict(doc, source=str(path))


def make_backend(config: GatewayConfig) -> PerceptionBackend:
    """Construct the configured perception backend; missing settings are
    startup errors, never runtime surprises."""
    if config.backend == "stub":
        if not config.stub_script:
            raise ConfigError("stub backend needs [stub] script = <path>")
        return load_stub_script(config.stub_script)
    if config.backend == "east":
        if bool(config.east_sidecar_url) == bool(config.east_fixture_dir):
            raise ConfigError(
                "east backend needs exactly one of [east] sidecar_url / fixture_dir"
            )
        return EastBackend(
            sidecar_url=config.east_sidecar_url,
            fixture_dir=config.east_fixture_dir,
            score_threshold=config.score_threshold,
            iou_threshold=config.iou_threshold,
            timeout_ms=config.backend_timeout_ms,
        )
    if config.backend == "vqa":
        if not config.vqa_sidecar_url:
            raise ConfigError("vqa backend needs [vqa] sidecar_url = <url>")
        return VqaBackend(config.vqa_sidecar_url, timeout_ms=config.backend_timeout_ms)
    if config.backend == "remote":
        if not config.remote_url:
            raise ConfigError("remote backend needs [remote] url = <url>")
        if not config.remote_api_key:
            raise ConfigError(
                f"remote backend needs an API key ([remote] api_key or ${API_KEY_ENV_VAR})"
            )
        from wayfinder.backends.remote import CostLedger

        return RemoteBackend(
            config.remote_url,
            api_key=config.remote_api_key,
            ledger=CostLedger(config.remote_unit_cost_usd),
            timeout_ms=config.backend_timeout_ms,
        )
    raise ConfigError(f"unknown backend {config.backend!r}")
