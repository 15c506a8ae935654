"""Light lexical model of Solidity source.

No AST: comment/string masking, pragma and version-constraint parsing, and
brace-matched function segmentation. Offsets into the masked text always align
with the original source (masking preserves length and newlines).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

Version = tuple[int, int, int]

_VERSION_RE = re.compile(r"(\d+)\.(\d+)\.(\d+)")
_PRAGMA_KEYWORD_RE = re.compile(r"pragma\s+solidity\b")
_PRAGMA_RE = re.compile(r"pragma\s+solidity\s*([^;{}]+);")
_COMPARATOR_RE = re.compile(
    r"(>=|<=|>|<|=|\^|~)?\s*v?(\d+)(?:\.(\d+|x|\*))?(?:\.(\d+|x|\*))?$"
)
_BLOCK_KEYWORD_RE = re.compile(
    r"\b(function|constructor|receive|fallback|modifier)\b"
)
_NAME_RE = re.compile(r"\s*([A-Za-z_$][\w$]*)?")

DEFAULT_PRAGMA = "^0.8.0"


class PragmaError(ValueError):
    """Raised for a pragma directive that cannot be parsed."""


def strip_comments(source: str) -> str:
    """Blank comments and string literals, preserving length and newlines.

    Every masked character becomes a space except newlines, so offsets and
    line numbers in the masked text match the original source exactly.
    """
    out = list(source)
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        nxt = source[i + 1] if i + 1 < n else ""
        if ch == "/" and nxt == "/":
            while i < n and source[i] != "\n":
                out[i] = " "
                i += 1
        elif ch == "/" and nxt == "*":
            out[i] = out[i + 1] = " "
            i += 2
            while i < n and not (source[i] == "*" and i + 1 < n and source[i + 1] == "/"):
                if source[i] != "\n":
                    out[i] = " "
                i += 1
            if i < n:
                out[i] = " "
                if i + 1 < n:
                    out[i + 1] = " "
                i += 2
        elif ch in "\"'":
            quote = ch
            out[i] = " "
            i += 1
            while i < n and source[i] != quote:
                if source[i] == "\\" and i + 1 < n:
                    out[i] = " "
                    i += 1
                if source[i] != "\n":
                    out[i] = " "
                i += 1
            if i < n:
                out[i] = " "
                i += 1
        else:
            i += 1
    return "".join(out)


def line_of(source: str, offset: int) -> int:
    """1-based line number of a character offset."""
    return source.count("\n", 0, offset) + 1


def parse_version(text: str) -> Version:
    """Extract an X.Y.Z version from text such as a compiler banner."""
    m = _VERSION_RE.search(text)
    if m is None:
        raise ValueError(f"no version in {text!r}")
    return (int(m.group(1)), int(m.group(2)), int(m.group(3)))


def format_version(version: Version) -> str:
    return ".".join(str(part) for part in version)


@dataclass(frozen=True)
class _Comparator:
    op: str  # one of >= <= > < =
    version: Version

    def allows(self, v: Version) -> bool:
        if self.op == ">=":
            return v >= self.version
        if self.op == "<=":
            return v <= self.version
        if self.op == ">":
            return v > self.version
        if self.op == "<":
            return v < self.version
        return v == self.version


def _expand_token(token: str) -> list[_Comparator]:
    if token in ("*", "x", "X"):
        return []
    m = _COMPARATOR_RE.match(token)
    if m is None:
        raise PragmaError(f"unparseable pragma: bad constraint token {token!r}")
    op = m.group(1)
    major = int(m.group(2))
    minor_raw, patch_raw = m.group(3), m.group(4)
    wild_minor = minor_raw in (None, "x", "*")
    wild_patch = patch_raw in (None, "x", "*")
    minor = 0 if wild_minor else int(minor_raw)
    patch = 0 if wild_patch else int(patch_raw)
    base: Version = (major, minor, patch)

    if op in (">=", "<=", ">", "<", "="):
        return [_Comparator(op, base)]
    if op == "^":
        if major > 0:
            upper: Version = (major + 1, 0, 0)
        elif minor > 0:
            upper = (0, minor + 1, 0)
        else:
            upper = (0, 0, patch + 1)
        return [_Comparator(">=", base), _Comparator("<", upper)]
    if op == "~":
        return [_Comparator(">=", base), _Comparator("<", (major, minor + 1, 0))]
    # Bare version: exact when fully specified, a range when partial.
    if wild_minor:
        return [_Comparator(">=", base), _Comparator("<", (major + 1, 0, 0))]
    if wild_patch:
        return [_Comparator(">=", base), _Comparator("<", (major, minor + 1, 0))]
    return [_Comparator("=", base)]


@dataclass(frozen=True)
class VersionConstraint:
    """Disjunction (||) of conjunctions of simple version comparators."""

    raw: str
    alternatives: tuple[tuple[_Comparator, ...], ...]

    def allows(self, version: Version) -> bool:
        return any(
            all(c.allows(version) for c in alt) for alt in self.alternatives
        )

    def lower_bound(self) -> Version:
        """Smallest version anchor: the conservative resolution of the range."""
        floors = []
        for alt in self.alternatives:
            alt_floors = [(0, 0, 0)]
            for c in alt:
                if c.op in (">=", "="):
                    alt_floors.append(c.version)
                elif c.op == ">":
                    major, minor, patch = c.version
                    alt_floors.append((major, minor, patch + 1))
            floors.append(max(alt_floors))
        return min(floors)


def parse_constraint(text: str) -> VersionConstraint:
    """Parse a pragma version expression such as "^0.6.12" or ">=0.4.22 <0.9.0"."""
    raw = " ".join(text.split())
    if not raw:
        raise PragmaError("unparseable pragma: empty constraint")
    alternatives = []
    for alt_text in raw.split("||"):
        tokens = alt_text.split()
        if not tokens:
            raise PragmaError(f"unparseable pragma: empty alternative in {raw!r}")
        comparators: list[_Comparator] = []
        for token in tokens:
            comparators.extend(_expand_token(token))
        alternatives.append(tuple(comparators))
    return VersionConstraint(raw=raw, alternatives=tuple(alternatives))


def detect_pragma(source: str, default: str = DEFAULT_PRAGMA) -> str:
    """Return the first pragma's version constraint, or the default when absent.

    The constraint is validated and whitespace-normalized. A pragma directive
    that is present but malformed raises PragmaError.
    """
    masked = strip_comments(source)
    if _PRAGMA_KEYWORD_RE.search(masked) is None:
        return default
    m = _PRAGMA_RE.search(masked)
    if m is None:
        raise PragmaError("unparseable pragma: missing terminator")
    constraint = " ".join(m.group(1).split())
    parse_constraint(constraint)
    return constraint


@dataclass(frozen=True)
class FunctionBlock:
    """One brace-delimited function, constructor, receive, fallback, or modifier."""

    name: str
    kind: str
    keyword_start: int
    params: str
    modifiers_text: str
    body_start: int
    body_end: int

    def body(self, masked: str) -> str:
        return masked[self.body_start : self.body_end]


def _match_close(masked: str, open_pos: int, open_ch: str, close_ch: str) -> int:
    depth = 0
    for i in range(open_pos, len(masked)):
        ch = masked[i]
        if ch == open_ch:
            depth += 1
        elif ch == close_ch:
            depth -= 1
            if depth == 0:
                return i
    return -1


def find_functions(masked: str) -> list[FunctionBlock]:
    """Segment masked source into function-like blocks by brace matching.

    Bodyless declarations (interfaces, abstract signatures) are skipped.
    Unterminated blocks at end of input are skipped rather than guessed at.
    """
    blocks: list[FunctionBlock] = []
    for kw in _BLOCK_KEYWORD_RE.finditer(masked):
        kind = kw.group(1)
        pos = kw.end()
        name = kind if kind != "function" and kind != "modifier" else ""
        name_match = _NAME_RE.match(masked, pos)
        if name_match and name_match.group(1):
            name = name_match.group(1)
            pos = name_match.end()
        params = ""
        paren = re.compile(r"\s*\(").match(masked, pos)
        if paren is not None:
            open_paren = paren.end() - 1
            close_paren = _match_close(masked, open_paren, "(", ")")
            if close_paren < 0:
                continue
            params = masked[open_paren + 1 : close_paren]
            pos = close_paren + 1
        elif kind in ("function", "constructor"):
            continue  # keyword without a parameter list is not a declaration
        # Scan to the body brace or a bodyless terminator, skipping the
        # parenthesised returns clause and modifier arguments.
        body_open = -1
        depth = 0
        i = pos
        while i < len(masked):
            ch = masked[i]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif depth == 0 and ch == "{":
                body_open = i
                break
            elif depth == 0 and ch == ";":
                break
            i += 1
        if body_open < 0:
            continue
        body_close = _match_close(masked, body_open, "{", "}")
        if body_close < 0:
            continue
        blocks.append(
            FunctionBlock(
                name=name,
                kind=kind,
                keyword_start=kw.start(),
                params=params,
                modifiers_text=masked[pos:body_open],
                body_start=body_open + 1,
                body_end=body_close,
            )
        )
    return blocks
