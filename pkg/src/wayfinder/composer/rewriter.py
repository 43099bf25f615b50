"""Optional LLM rephrasing with a hard content guard.

Everything fails open to the template: a navigation aid must never go
mute, and never gain or lose load-bearing words, because a language model
stalled or got creative. The guard demands that whatever the template
asserted (class phrase, direction word, numbers) survives the rewrite.
"""

from __future__ import annotations

import asyncio
import re
from dataclasses import replace

from wayfinder.composer.templates import CLASS_PHRASES, Instruction, instruction_facts
from wayfinder.interpreter.lexicon import SignClass

DEFAULT_REWRITER_TIMEOUT_MS = 300.0

def required_substrings(instruction: Instruction) -> list[str]:
    """Guard terms: the class phrase, the instruction's direction word when
    the template spoke it, and every number in the template."""
    class_name, _, direction = instruction.dedup_key.partition(":")
    template = instruction.text.casefold()
    required = [CLASS_PHRASES[SignClass(class_name)]]
    if direction in template:  # stairs cautions carry no direction word
        required.append(direction)
    required += re.findall(r"\d+", instruction.text)
    return required


def guard_passes(instruction: Instruction, reply_text: str) -> bool:
    folded = reply_text.casefold()
    return all(term.casefold() in folded for term in required_substrings(instruction))


async def llm_rewrite(
    instruction: Instruction,
    http_client,
    url: str,
    timeout_ms: float = DEFAULT_REWRITER_TIMEOUT_MS,
) -> Instruction:
    """POST the template and its facts to the rewriter; adopt the reply only
    when it arrives in time, parses, and passes the guard."""
    try:
        resp = await asyncio.wait_for(
            http_client.post(
                url,
                json={
                    "template": instruction.text,
                    "facts": instruction_facts(instruction),
                },
            ),
            timeout=timeout_ms / 1000.0,
        )
        if resp.status_code // 100 != 2:
            return instruction
        body = resp.json()
        text = body.get("text") if isinstance(body, dict) else None
        if not isinstance(text, str) or not text.strip():
            return instruction
        if not guard_passes(instruction, text):
            return instruction
        return replace(instruction, text=text, rewritten=True)
    except Exception:
        return instruction
