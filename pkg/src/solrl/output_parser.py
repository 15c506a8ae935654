"""Extraction and format checking for tagged model outputs.

Outputs are expected to carry stepwise reasoning in <think></think> tags
followed by code in <answer></answer> tags. Extraction is lexical and never
raises on arbitrary text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_THINK_OPEN_RE = re.compile(r"<think>", re.IGNORECASE)
_THINK_CLOSE_RE = re.compile(r"</think>", re.IGNORECASE)
_ANSWER_OPEN_RE = re.compile(r"<answer>", re.IGNORECASE)
_ANSWER_CLOSE_RE = re.compile(r"</answer>", re.IGNORECASE)

# Segment boundaries for step counting: sentence terminators, and newlines
# that introduce a bullet or a numbered item.
_SENTENCE_SPLIT_RE = re.compile(r"[.!?。]+|\n(?=\s*(?:[-*•]|\d+[.)])\s)")
_WORD_RE = re.compile(r"\w+", re.UNICODE)

INSUFFICIENT_STEPS = "insufficient reasoning steps"
MISSING_REASONING = "missing reasoning block"
MISSING_CODE = "missing code block"
EMPTY_CODE = "empty code block"


@dataclass(frozen=True)
class ParsedOutput:
    """Result of tag extraction over one raw output text."""

    reasoning: str | None
    code: str | None
    think_opened: bool
    think_closed: bool
    answer_opened: bool
    answer_closed: bool
    reasoning_step_count: int


@dataclass(frozen=True)
class FormatCheck:
    score: int
    diagnostics: tuple[str, ...] = field(default=())


def extract_think_answer(text: str) -> ParsedOutput:
    """Extract reasoning and code blocks from raw output text.

    The first well-formed <think>...</think> pair yields the reasoning; the
    first well-formed <answer>...</answer> pair after it yields the code
    (searched from the start of the text when no think pair exists). Tags are
    matched case-insensitively and block contents are trimmed of leading and
    trailing whitespace. When the reasoning and the code are both present the
    reasoning precedes the code by construction.
    """
    think_open = _THINK_OPEN_RE.search(text)
    think_close = None
    if think_open is not None:
        think_close = _THINK_CLOSE_RE.search(text, think_open.end())

    reasoning = None
    answer_base = 0
    if think_open is not None and think_close is not None:
        reasoning = text[think_open.end() : think_close.start()].strip()
        answer_base = think_close.end()

    answer_open = _ANSWER_OPEN_RE.search(text, answer_base)
    answer_close = None
    if answer_open is not None:
        answer_close = _ANSWER_CLOSE_RE.search(text, answer_open.end())

    code = None
    if answer_open is not None and answer_close is not None:
        code = text[answer_open.end() : answer_close.start()].strip()

    steps = count_reasoning_steps(reasoning) if reasoning is not None else 0
    return ParsedOutput(
        reasoning=reasoning,
        code=code,
        think_opened=think_open is not None,
        think_closed=think_close is not None,
        answer_opened=answer_open is not None,
        answer_closed=answer_close is not None,
        reasoning_step_count=steps,
    )


def count_reasoning_steps(reasoning: str) -> int:
    """Count reasoning steps in extracted reasoning text.

    Segments are split on sentence terminators (. ! ? and the CJK full stop)
    and on newlines that start a bullet (- * or a bullet dot) or a numbered
    item ("1." / "1)"). A segment counts as a step only if it contains at
    least three word tokens.
    """
    count = 0
    for segment in _SENTENCE_SPLIT_RE.split(reasoning):
        if len(_WORD_RE.findall(segment)) >= 3:
            count += 1
    return count


def check_format(parsed: ParsedOutput) -> FormatCheck:
    """Score structural compliance of a parsed output.

    The score is 1 iff the reasoning block is present, the code block is
    present and non-empty, the reasoning precedes the code (guaranteed by the
    extraction rule whenever both blocks exist), and the reasoning contains at
    least three steps. Returns the failed conditions as diagnostics.
    """
    diagnostics: list[str] = []
    if parsed.reasoning is None:
        diagnostics.append(MISSING_REASONING)
    if parsed.code is None:
        diagnostics.append(MISSING_CODE)
    elif not parsed.code:
        diagnostics.append(EMPTY_CODE)
    if parsed.reasoning is not None and parsed.reasoning_step_count < 3:
        diagnostics.append(INSUFFICIENT_STEPS)
    score = 1 if not diagnostics else 0
    return FormatCheck(score=score, diagnostics=tuple(diagnostics))
