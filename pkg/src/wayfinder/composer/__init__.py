"""Instruction composition: templates, dedup scheduling, LLM rephrasing."""

from wayfinder.composer.rewriter import (
    DEFAULT_REWRITER_TIMEOUT_MS,
    guard_passes,
    llm_rewrite,
    required_substrings,
)
from wayfinder.composer.scheduler import (
    DEFAULT_DEDUP_WINDOW_MS,
    DEFAULT_MIN_GAP_MS,
    DISTANCE_CHANGE_FRACTION,
    DedupEntry,
    DedupMemory,
    filter_and_schedule,
)
from wayfinder.composer.templates import (
    CLASS_PHRASES,
    FEET_PER_METER,
    STEP_LENGTH_M,
    Instruction,
    Priority,
    compose,
    compose_one,
    dedup_key_for,
    instruction_facts,
    round_half_up,
    step_count,
)

__all__ = [
    "DEFAULT_REWRITER_TIMEOUT_MS",
    "guard_passes",
    "llm_rewrite",
    "required_substrings",
    "DEFAULT_DEDUP_WINDOW_MS",
    "DEFAULT_MIN_GAP_MS",
    "DISTANCE_CHANGE_FRACTION",
    "DedupEntry",
    "DedupMemory",
    "filter_and_schedule",
    "CLASS_PHRASES",
    "FEET_PER_METER",
    "STEP_LENGTH_M",
    "Instruction",
    "Priority",
    "compose",
    "compose_one",
    "dedup_key_for",
    "instruction_facts",
    "round_half_up",
    "step_count",
]
