"""Session lifecycle, per-frame pipeline, and network front ends."""

from wayfinder.gateway.config import (
    GatewayConfig,
    config_from_dict,
    load_config,
    make_backend,
)
from wayfinder.gateway.pipeline import PipelineDeps, StepResult, run_pipeline_step
from wayfinder.gateway.service import (
    ClientConnection,
    FrameMetric,
    Gateway,
    GatewayMetrics,
    SessionWorker,
)
from wayfinder.gateway.sessions import (
    Session,
    SessionCounters,
    SessionPhase,
    SessionRegistry,
    SubmitResult,
)
from wayfinder.gateway.transports import GatewayServer, run_server

__all__ = [
    "GatewayConfig",
    "config_from_dict",
    "load_config",
    "make_backend",
    "PipelineDeps",
    "StepResult",
    "run_pipeline_step",
    "ClientConnection",
    "FrameMetric",
    "Gateway",
    "GatewayMetrics",
    "SessionWorker",
    "Session",
    "SessionCounters",
    "SessionPhase",
    "SessionRegistry",
    "SubmitResult",
    "GatewayServer",
    "run_server",
]
