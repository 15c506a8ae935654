"""Corpus preparation: tokenization, windowing, dedup, and doc cleaning.

Operates on lexical tokens only. Deduplication is a greedy first-seen-wins
pass over unigram Jaccard similarity; windowing produces overlapping
fixed-size slices with an end-aligned tail window.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

_TOKEN_RE = re.compile(
    r"0[xX][0-9a-fA-F]+"
    r"|[A-Za-z_$][\w$]*"
    r"|\d+(?:\.\d+)?"
    r"|==|!=|<=|>=|&&|\|\||->|=>|\+\+|--|\+=|-=|\*=|/=|%=|<<|>>"
    r"|\S"
)
_ESCAPE_RE = re.compile(r"\\[ntr]")
_CONTROL_RE = re.compile(r"[\x00-\x08\x0b-\x1f\x7f]")
_COMMENT_EDGE_RE = re.compile(r"^\s*(?:///|//|/\*\*|/\*|\*+/?)\s*|\s*\*+/\s*$")
_PARAM_TAG_RE = re.compile(r"^@param\s+(\S+)\s*(.*)$")
_TAG_RE = re.compile(r"^@\w+\s*(.*)$")
_WS_RE = re.compile(r"\s+")
_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")

DEFAULT_BOILERPLATE: tuple[str, ...] = (
    "SPDX-License-Identifier",
    "solhint-disable",
    "solium-disable",
    "Copyright",
    "All rights reserved",
    "@inheritdoc",
)

INSTRUCTION_TEMPLATE = """Implement the function `{function_name}` for the Solidity contract below.

Requirement: {description}

Contract context:
{context}

Reply with your step-by-step reasoning in <think></think> tags, then the complete function implementation in <answer></answer> tags."""


def tokenize(text: str) -> list[str]:
    """Lexical tokens: identifiers, numerals, operators, and symbols."""
    return _TOKEN_RE.findall(text)


@dataclass(frozen=True)
class TokenStream:
    origin_id: str
    tokens: tuple[str, ...]

    @classmethod
    def from_text(cls, origin_id: str, text: str) -> TokenStream:
        return cls(origin_id=origin_id, tokens=tuple(tokenize(text)))


@dataclass(frozen=True)
class CodeWindow:
    origin_id: str
    start: int
    end: int

    def slice(self, stream: TokenStream) -> tuple[str, ...]:
        return stream.tokens[self.start : self.end]


def segment_windows(
    stream: TokenStream, window: int = 2048, stride: int = 1024
) -> list[CodeWindow]:
    """Overlapping windows of `window` tokens every `stride` tokens.

    Full windows start at multiples of the stride while they fit; a final
    end-aligned window covers any tail tokens. Streams shorter than the window
    yield a single whole-stream window; empty streams yield none.
    """
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be positive")
    if stride > window:
        raise ValueError("stride must not exceed the window size")
    length = len(stream.tokens)
    if length == 0:
        return []
    if length < window:
        return [CodeWindow(stream.origin_id, 0, length)]
    windows = []
    start = 0
    while start + window <= length:
        windows.append(CodeWindow(stream.origin_id, start, start + window))
        start += stride
    if windows[-1].end < length:
        windows.append(CodeWindow(stream.origin_id, length - window, length))
    return windows


def jaccard_similarity(a: Iterable[str], b: Iterable[str]) -> float:
    """Unigram-set Jaccard similarity; two empty token sets count as identical."""
    set_a, set_b = set(a), set(b)
    if not set_a and not set_b:
        return 1.0
    union = set_a | set_b
    return len(set_a & set_b) / len(union)


@dataclass(frozen=True)
class RemovalRecord:
    removed_id: str
    matched_kept_id: str
    similarity: float

    def to_dict(self) -> dict:
        return {
            "removed_id": self.removed_id,
            "matched_kept_id": self.matched_kept_id,
            "similarity": self.similarity,
        }


def dedup(
    corpus: Sequence[TokenStream], threshold: float = 0.9
) -> tuple[list[TokenStream], list[RemovalRecord]]:
    """Greedy near-duplicate removal in corpus order.

    An item is kept iff its similarity to every previously kept item is below
    the threshold; a removed item is logged against the first kept item at or
    above it. Re-running on the kept list is a no-op.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    kept: list[TokenStream] = []
    kept_sets: list[set[str]] = []
    removals: list[RemovalRecord] = []
    for stream in corpus:
        token_set = set(stream.tokens)
        matched = None
        for other, other_set in zip(kept, kept_sets):
            similarity = jaccard_similarity(token_set, other_set)
            if similarity >= threshold:
                matched = RemovalRecord(stream.origin_id, other.origin_id, similarity)
                break
        if matched is None:
            kept.append(stream)
            kept_sets.append(token_set)
        else:
            removals.append(matched)
    return kept, removals


def clean_doc(
    raw: str, boilerplate: Sequence[str] = DEFAULT_BOILERPLATE
) -> str:
    """Normalize a raw doc comment into plain description lines.

    Strips escape sequences, comment delimiters, and boilerplate lines;
    keeps tag content, with @param rendered as "name: description" lines.
    """
    text = _ESCAPE_RE.sub(" ", raw)
    text = _CONTROL_RE.sub("", text)
    lines = []
    for line in text.split("\n"):
        line = _COMMENT_EDGE_RE.sub("", line)
        line = _COMMENT_EDGE_RE.sub("", line)  # both edges of one-line /** ... */
        if any(phrase in line for phrase in boilerplate):
            continue
        param = _PARAM_TAG_RE.match(line.strip())
        if param is not None:
            name, description = param.group(1), param.group(2)
            line = f"{name}: {description}" if description else f"{name}:"
        else:
            tag = _TAG_RE.match(line.strip())
            if tag is not None:
                line = tag.group(1)
        line = _WS_RE.sub(" ", line).strip()
        if line:
            lines.append(line)
    return "\n".join(lines)


def split_identifier(name: str) -> list[str]:
    """Lower-cased words of a camelCase/snake_case identifier."""
    parts = []
    for chunk in name.replace("_", " ").split():
        parts.extend(_CAMEL_RE.split(chunk))
    return [p.lower() for p in parts if p]


def describe_function(function_name: str) -> str:
    """Fallback description derived from the function name."""
    words = split_identifier(function_name)
    if not words:
        return "Implement the requested behavior for this contract."
    return f"Implement the `{function_name}` function: {' '.join(words)}."


def build_instruction(
    context: str,
    function_name: str,
    cleaned_doc: str,
    transform: Callable[[str], str] | None = None,
) -> str:
    """Render the generation instruction for one masked function.

    `transform` hooks in a caller-supplied text rewriter (e.g. a translator);
    an empty description after cleaning and transforming falls back to a
    name-derived one. Deterministic for fixed inputs.
    """
    description = cleaned_doc
    if transform is not None:
        description = transform(description)
    if not description.strip():
        description = describe_function(function_name)
    return INSTRUCTION_TEMPLATE.format(
        function_name=function_name, description=description, context=context
    )
