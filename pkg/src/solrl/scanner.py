"""Conservative lexical vulnerability scanner for Solidity source.

Twelve pattern rules over comment-masked source with brace-matched function
segmentation. The bias is deliberate: when a fragment is ambiguous the scanner
flags it, and fragments too broken to segment simply produce no findings for
the structure-dependent rules.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, replace

from .solidity import (
    DEFAULT_PRAGMA,
    FunctionBlock,
    PragmaError,
    Version,
    detect_pragma,
    find_functions,
    line_of,
    parse_constraint,
    strip_comments,
)


class Severity(enum.IntEnum):
    LOW = 1
    MED = 2
    HIGH = 3

    @property
    def label(self) -> str:
        return {Severity.LOW: "Low", Severity.MED: "Med", Severity.HIGH: "High"}[self]


def parse_severity(text: str) -> Severity:
    try:
        return {"High": Severity.HIGH, "Med": Severity.MED, "Low": Severity.LOW}[text]
    except KeyError:
        raise ValueError(f"severity must be exactly High, Med, or Low, got {text!r}") from None


REENTRANCY = "Reentrancy"
ARRAY_BOUNDS = "Array Bounds Unchecked"
ACCESS_CONTROL = "Access Control Missing"
STATE_VALIDATION = "State Validation Missing"
INTEGER_OVERFLOW = "Integer Overflow/Underflow"
ERROR_HANDLING = "Improper Error Handling"
TIMESTAMP = "Timestamp Dependence"
GAS_DOS = "Gas Limit DoS Risk"
VISIBILITY = "Function Visibility Issues"
TX_ORIGIN = "tx.origin Authentication"
SELFDESTRUCT = "Selfdestruct Usage"
DELEGATECALL = "Delegatecall Context Risk"

_SEVERITY_BY_CATEGORY = {
    REENTRANCY: Severity.HIGH,
    ARRAY_BOUNDS: Severity.MED,
    ACCESS_CONTROL: Severity.HIGH,
    STATE_VALIDATION: Severity.MED,
    INTEGER_OVERFLOW: Severity.MED,
    ERROR_HANDLING: Severity.MED,
    TIMESTAMP: Severity.MED,
    GAS_DOS: Severity.LOW,
    VISIBILITY: Severity.LOW,
    TX_ORIGIN: Severity.HIGH,
    SELFDESTRUCT: Severity.HIGH,
    DELEGATECALL: Severity.HIGH,
}

CATEGORIES = tuple(_SEVERITY_BY_CATEGORY)

# Suffix words dropped when normalizing category aliases.
_CATEGORY_SUFFIXES = frozenset(
    {"vulnerability", "vulnerabilities", "risk", "risks", "issue", "issues"}
)
_NORMALIZED_CATEGORIES = {}


def _normalize_category(name: str) -> str:
    words = name.lower().replace("_", " ").split()
    while words and words[-1] in _CATEGORY_SUFFIXES:
        words.pop()
    return " ".join(words)


for _cat in CATEGORIES:
    _NORMALIZED_CATEGORIES[_normalize_category(_cat)] = _cat


def classify_severity(category: str) -> Severity:
    """Map a taxonomy category (aliases tolerated) to its fixed severity."""
    canonical = _NORMALIZED_CATEGORIES.get(_normalize_category(category))
    if canonical is None:
        raise ValueError(f"unknown vulnerability category: {category!r}")
    return _SEVERITY_BY_CATEGORY[canonical]


def canonical_category(category: str) -> str:
    canonical = _NORMALIZED_CATEGORIES.get(_normalize_category(category))
    if canonical is None:
        raise ValueError(f"unknown vulnerability category: {category!r}")
    return canonical


@dataclass(frozen=True)
class VulnRule:
    id: str
    category: str
    severity: Severity
    description: str


def _rule(rule_id: str, category: str, description: str) -> VulnRule:
    return VulnRule(rule_id, category, _SEVERITY_BY_CATEGORY[category], description)


RULES: tuple[VulnRule, ...] = (
    _rule("reentrancy", REENTRANCY, "external call lexically precedes a state write in the same function"),
    _rule("txorigin", TX_ORIGIN, "tx.origin used in a comparison or require"),
    _rule("delegatecall", DELEGATECALL, "delegatecall present"),
    _rule("selfdestruct", SELFDESTRUCT, "selfdestruct or suicide present"),
    _rule("unchecked-call", ERROR_HANDLING, "low-level call/send return value neither checked nor assigned"),
    _rule("timestamp", TIMESTAMP, "block.timestamp or now in a condition or arithmetic in a transferring function"),
    _rule("overflow", INTEGER_OVERFLOW, "unchecked integer arithmetic on state below 0.8.0 without SafeMath"),
    _rule("access-control", ACCESS_CONTROL, "privileged-verb public function without modifier or sender check"),
    _rule("array-bounds", ARRAY_BOUNDS, "dynamic array index without a preceding bound check"),
    _rule("gas-dos", GAS_DOS, "loop bounded by a dynamic array length containing an external call"),
    _rule("visibility", VISIBILITY, "function without explicit visibility below 0.5.0"),
    _rule("state-validation", STATE_VALIDATION, "external call or state mutation with no require/revert guard"),
)

_RULES_BY_ID = {r.id: r for r in RULES}


@dataclass(frozen=True)
class VulnFinding:
    rule_id: str
    category: str
    severity: Severity
    line: int
    excerpt: str
    message: str

    def to_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "category": self.category,
            "severity": self.severity.label,
            "line": self.line,
            "excerpt": self.excerpt,
            "message": self.message,
        }


@dataclass(frozen=True)
class ScanReport:
    findings: tuple[VulnFinding, ...]
    secure: bool
    threshold: Severity
    version: Version

    def to_dict(self) -> dict:
        return {
            "secure": self.secure,
            "threshold": self.threshold.label,
            "version": ".".join(str(p) for p in self.version),
            "findings": [f.to_dict() for f in self.findings],
        }


def security_score(report: ScanReport, threshold: Severity | None = None) -> int:
    """1 iff the report has no finding at or above the severity threshold."""
    limit = report.threshold if threshold is None else threshold
    return 0 if any(f.severity >= limit for f in report.findings) else 1


@dataclass(frozen=True)
class ScanConfig:
    severity_threshold: Severity = Severity.LOW
    privileged_verbs: tuple[str, ...] = (
        "mint",
        "burn",
        "withdraw",
        "pause",
        "set",
        "upgrade",
        "transferOwnership",
    )


DEFAULT_CONFIG = ScanConfig()

# Receivers whose member calls are builtins, not external contract calls.
_BUILTIN_RECEIVERS = frozenset(
    {"msg", "block", "tx", "abi", "this", "super", "type", "address", "payable", "string", "bytes"}
)
# Member names that are array builtins or SafeMath-style library arithmetic.
_BUILTIN_MEMBERS = frozenset(
    {"push", "pop", "length", "add", "sub", "mul", "div", "mod",
     "call", "send", "transfer", "delegatecall", "staticcall"}
)

_VALUE_CALL_RE = re.compile(
    r"\.\s*call\s*\{[^}]*\bvalue\b[^}]*\}"
    r"|\.\s*call\s*\.\s*value\s*\("
    r"|\.\s*send\s*\("
    r"|\.\s*transfer\s*\("
)
_LOW_LEVEL_RE = re.compile(r"\.\s*(call|delegatecall|staticcall)\s*[({]")
_SEND_RE = re.compile(r"\.\s*send\s*\(")
_MEMBER_CALL_RE = re.compile(r"\b([A-Za-z_$][\w$]*)\s*\.\s*([A-Za-z_$][\w$]*)\s*[({]")
_CAST_CALL_RE = re.compile(r"\)\s*\.\s*([A-Za-z_$][\w$]*)\s*[({]")
_DELEGATECALL_RE = re.compile(r"\bdelegatecall\b")
_SELFDESTRUCT_RE = re.compile(r"\bselfdestruct\b|\bsuicide\b")
_TX_ORIGIN_RE = re.compile(r"\btx\s*\.\s*origin\b")
_TIMESTAMP_RE = re.compile(r"\bblock\s*\.\s*timestamp\b|\bnow\b")
_GUARD_RE = re.compile(r"\brequire\s*\(|\brevert\b|\bassert\s*\(")
_COND_KEYWORD_RE = re.compile(r"\b(?:require|if|assert|while|for)\s*\(")
_USING_SAFEMATH_RE = re.compile(r"\busing\s+SafeMath\b")
_MSG_SENDER_RE = re.compile(r"\bmsg\s*\.\s*sender\b")

_ASSIGN_RE = re.compile(
    r"(?:\+\+|--)\s*(?P<pre_name>[A-Za-z_$][\w$]*)"
    r"|(?P<name>[A-Za-z_$][\w$]*)\s*(?P<trail>(?:\[[^\]]*\]|\.[A-Za-z_$][\w$]*)*)\s*"
    r"(?P<op>\+\+|--|\+=|-=|\*=|/=|%=|\|=|&=|\^=|<<=|>>=|=(?!=))"
    r"|\bdelete\s+(?P<del_name>[A-Za-z_$][\w$]*)"
)
_PUSH_POP_RE = re.compile(r"\b([A-Za-z_$][\w$]*)\s*\.\s*(push|pop)\s*\(")
_RHS_ARITH_RE = re.compile(r"[\w)\]]\s*[+\-*]\s*[\w(]")
_ARITH_OPS = frozenset({"+=", "-=", "*=", "++", "--"})

_TYPE_PATTERN = (
    r"(?:mapping\s*\((?:[^()]|\([^()]*\))*\)"
    r"|uint\d*|int\d*|bool|address(?:\s+payable)?|bytes\d*|byte|string|var|[A-Z][\w$]*)"
)
_LOCAL_DECL_RE = re.compile(
    _TYPE_PATTERN
    + r"(?:\s*\[[^\]]*\])*(?:\s+(?:memory|storage|calldata|payable))*"
    + r"\s+([A-Za-z_$][\w$]*)\s*(?=[=;,)])"
)
_DYNAMIC_ARRAY_DECL_RE = re.compile(
    r"\b(?:uint\d*|int\d*|bool|address(?:\s+payable)?|bytes\d*|string|[A-Z][\w$]*)\s*\[\s*\]"
    r"(?:\s+(?:public|private|internal|constant|immutable|memory|storage|calldata))*"
    r"\s+([A-Za-z_$][\w$]*)\s*(?=[=;,)])"
)
_EMIT_RE = re.compile(r"\bemit\s+[^;]*;")
_RETURNS_CLAUSE_RE = re.compile(r"\breturns\s*\([^)]*\)")
_HEADER_KEYWORDS = frozenset(
    {"public", "private", "internal", "external", "pure", "view", "payable",
     "constant", "virtual", "override", "returns"}
)
_IDENT_RE = re.compile(r"[A-Za-z_$][\w$]*")

_DISCLAIMER_RE = re.compile(
    r"\b(?:skip|skipping|omit|omitting|without|ignore|ignoring|no need for|"
    r"bypass|disable|drop|remove)\b[^.!?\n]{0,60}?"
    r"\b(?:reentrancy|guard|access control|overflow|bounds?|checks?|validation|"
    r"require|modifier|safemath)\b",
    re.IGNORECASE,
)


def _blank_spans(text: str, spans: list[tuple[int, int]]) -> str:
    out = list(text)
    for start, end in spans:
        for i in range(start, end):
            if out[i] != "\n":
                out[i] = " "
    return "".join(out)


def _match_paren_span(masked: str, open_pos: int) -> tuple[int, int]:
    depth = 0
    for i in range(open_pos, len(masked)):
        if masked[i] == "(":
            depth += 1
        elif masked[i] == ")":
            depth -= 1
            if depth == 0:
                return (open_pos + 1, i)
    return (open_pos + 1, len(masked))


def _condition_spans(body: str) -> list[tuple[int, int]]:
    return [_match_paren_span(body, m.end() - 1) for m in _COND_KEYWORD_RE.finditer(body)]


def _in_spans(pos: int, spans: list[tuple[int, int]]) -> bool:
    return any(start <= pos < end for start, end in spans)


def _statement_span(body: str, pos: int) -> tuple[int, int]:
    start = max(body.rfind(";", 0, pos), body.rfind("{", 0, pos), body.rfind("}", 0, pos)) + 1
    end = body.find(";", pos)
    if end < 0:
        end = len(body)
    return (start, end)


def _collect_locals(block: FunctionBlock, body: str) -> frozenset[str]:
    decl_text = " ".join(
        (block.params, block.modifiers_text, _EMIT_RE.sub(lambda m: " " * len(m.group(0)), body))
    )
    return frozenset(m.group(1) for m in _LOCAL_DECL_RE.finditer(decl_text))


def _collect_writes(body: str, locals_: frozenset[str]) -> list[tuple[int, str, str]]:
    """State-write sites as (offset, base identifier, operator)."""
    writes = []
    for m in _ASSIGN_RE.finditer(body):
        if m.group("pre_name"):
            base, op = m.group("pre_name"), "++"
        elif m.group("del_name"):
            base, op = m.group("del_name"), "delete"
        else:
            base, op = m.group("name"), m.group("op")
        if base in locals_ or base in _BUILTIN_RECEIVERS:
            continue
        writes.append((m.start(), base, op))
    for m in _PUSH_POP_RE.finditer(body):
        if m.group(1) not in locals_:
            writes.append((m.start(), m.group(1), m.group(2)))
    return sorted(writes)


def _collect_external_calls(body: str) -> tuple[list[int], list[int], list[int]]:
    """Offsets of (all external calls, value-bearing calls, unchecked-return candidates)."""
    value_positions = [m.start() for m in _VALUE_CALL_RE.finditer(body)]
    low_level = [
        m.start() for m in _LOW_LEVEL_RE.finditer(body) if m.group(1) != "staticcall"
    ]
    check_candidates = sorted(
        {m.start() for m in _LOW_LEVEL_RE.finditer(body) if m.group(1) == "call"}
        | {m.start() for m in _SEND_RE.finditer(body)}
    )
    member = [
        m.start()
        for m in _MEMBER_CALL_RE.finditer(body)
        if m.group(1) not in _BUILTIN_RECEIVERS and m.group(2) not in _BUILTIN_MEMBERS
    ]
    cast = [
        m.start()
        for m in _CAST_CALL_RE.finditer(body)
        if m.group(1) not in _BUILTIN_MEMBERS
    ]
    all_calls = sorted(set(value_positions) | set(low_level) | set(member) | set(cast))
    return all_calls, sorted(set(value_positions)), check_candidates


def _header_parts(block: FunctionBlock) -> tuple[str | None, list[str]]:
    """Visibility keyword (or None) and modifier names from a function header."""
    text = _RETURNS_CLAUSE_RE.sub(" ", block.modifiers_text)
    text = re.sub(r"\([^)]*\)", " ", text)
    visibility = None
    modifiers = []
    for token in _IDENT_RE.findall(text):
        if token in ("public", "private", "internal", "external"):
            visibility = token
        elif token not in _HEADER_KEYWORDS:
            modifiers.append(token)
    return visibility, modifiers


def _excerpt(source: str, line: int, limit: int = 120) -> str:
    text = source.split("\n")[line - 1].strip()
    return text[:limit]


def find_disclaimers(reasoning: str) -> list[str]:
    """Phrases in reasoning text that explicitly disclaim a protection."""
    return [m.group(0) for m in _DISCLAIMER_RE.finditer(reasoning)]


def _resolve_version(code: str, version: Version | None, default: str) -> Version:
    if version is not None:
        return version
    try:
        constraint = detect_pragma(code, default=default)
    except PragmaError:
        constraint = default
    return parse_constraint(constraint).lower_bound()


def scan(
    code: str,
    version: Version | None = None,
    config: ScanConfig = DEFAULT_CONFIG,
) -> ScanReport:
    """Scan Solidity source (a full contract or a bare function) for findings.

    `version` is the resolved compiler version used for version-gated rules;
    when omitted it is taken from the source's pragma lower bound, defaulting
    to 0.8.0 (a malformed pragma also falls back to the default). Findings are
    ordered by (line, rule id) and `secure` reflects the configured threshold.
    """
    resolved = _resolve_version(code, version, DEFAULT_PRAGMA)
    masked = strip_comments(code)
    blocks = find_functions(masked)
    functions = [b for b in blocks if b.kind != "modifier"]

    contract_level = _blank_spans(masked, [(b.body_start, b.body_end) for b in blocks])
    state_arrays = frozenset(
        m.group(1) for m in _DYNAMIC_ARRAY_DECL_RE.finditer(contract_level)
    )
    uses_safemath = _USING_SAFEMATH_RE.search(masked) is not None

    findings: list[VulnFinding] = []

    def add(rule_id: str, offset: int, message: str) -> None:
        rule = _RULES_BY_ID[rule_id]
        line = line_of(masked, offset)
        findings.append(
            VulnFinding(
                rule_id=rule.id,
                category=rule.category,
                severity=rule.severity,
                line=line,
                excerpt=_excerpt(code, line),
                message=message,
            )
        )

    for m in _DELEGATECALL_RE.finditer(masked):
        add("delegatecall", m.start(), "delegatecall executes foreign code in this contract's storage context")
    for m in _SELFDESTRUCT_RE.finditer(masked):
        add("selfdestruct", m.start(), "contract can be destroyed, permanently disabling it")

    for block in functions:
        body = block.body(masked)
        base = block.body_start
        locals_ = _collect_locals(block, body)
        writes = _collect_writes(body, locals_)
        calls, value_calls, check_candidates = _collect_external_calls(body)
        cond_spans = _condition_spans(body)
        visibility, modifiers = _header_parts(block)
        fn_label = block.name or block.kind

        # Rule: external call lexically before a state write (reentrancy).
        for call_pos in calls:
            if any(w_pos > call_pos for w_pos, _, _ in writes):
                add(
                    "reentrancy",
                    base + call_pos,
                    f"external call in '{fn_label}' precedes a state write; "
                    "apply checks-effects-interactions",
                )

        # Rule: tx.origin in a comparison or require.
        for m in _TX_ORIGIN_RE.finditer(body):
            after = body[m.end() : m.end() + 4].lstrip()
            before = body[max(0, m.start() - 3) : m.start()].rstrip()
            comparison = after.startswith(("==", "!=")) or before.endswith(("==", "!="))
            if comparison or _in_spans(m.start(), cond_spans):
                add(
                    "txorigin",
                    base + m.start(),
                    "tx.origin authentication is phishable; use msg.sender",
                )

        # Rule: unchecked low-level call/send return value.
        for pos in check_candidates:
            if _in_spans(pos, cond_spans):
                continue
            stmt_start, _ = _statement_span(body, pos)
            prefix = body[stmt_start:pos]
            if re.search(r"(?<![<>!=+\-*/&|^%])=(?!=)", prefix):
                continue
            add(
                "unchecked-call",
                base + pos,
                "low-level call/send return value is neither checked nor assigned",
            )

        # Rule: timestamp dependence in a transferring function.
        if value_calls:
            for m in _TIMESTAMP_RE.finditer(body):
                after = body[m.end() : m.end() + 3].lstrip()
                before = body[max(0, m.start() - 3) : m.start()].rstrip()
                ops = ("+", "-", "*", "/", "%", "<", ">", "==", "!=", "<=", ">=")
                adjacent = after.startswith(ops) or before.endswith(ops)
                if adjacent or _in_spans(m.start(), cond_spans):
                    add(
                        "timestamp",
                        base + m.start(),
                        "block timestamp steers a value transfer; miners can skew it",
                    )

        # Rule: unchecked integer arithmetic on state below 0.8.0.
        if resolved < (0, 8, 0) and not uses_safemath:
            for w_pos, _, op in writes:
                if op in _ARITH_OPS:
                    arith = True
                elif op == "=":
                    _, stmt_end = _statement_span(body, w_pos)
                    arith = _RHS_ARITH_RE.search(body, w_pos, stmt_end) is not None
                else:
                    arith = False
                if arith:
                    add(
                        "overflow",
                        base + w_pos,
                        "integer arithmetic on state without SafeMath below 0.8.0",
                    )

        # Rule: privileged-verb function without access control.
        effectively_public = visibility in ("public", "external") or (
            visibility is None and resolved < (0, 5, 0)
        )
        privileged = block.name.lower().startswith(
            tuple(v.lower() for v in config.privileged_verbs)
        )
        has_sender_check = any(
            _in_spans(m.start(), cond_spans) for m in _MSG_SENDER_RE.finditer(body)
        )
        if (
            block.kind == "function"
            and privileged
            and effectively_public
            and writes
            and not modifiers
            and not has_sender_check
        ):
            add(
                "access-control",
                block.keyword_start,
                f"privileged function '{block.name}' is callable by anyone",
            )

        # Rule: dynamic array index without a preceding bound check.
        local_arrays = frozenset(
            m.group(1)
            for m in _DYNAMIC_ARRAY_DECL_RE.finditer(
                " ".join((block.params, body))
            )
        )
        for arr in sorted(state_arrays | local_arrays):
            length_positions = [
                m.start() for m in re.finditer(rf"\b{re.escape(arr)}\s*\.\s*length\b", body)
            ]
            for m in re.finditer(rf"\b{re.escape(arr)}\s*\[", body):
                if not any(p < m.start() for p in length_positions):
                    add(
                        "array-bounds",
                        base + m.start(),
                        f"index into '{arr}' without a preceding bound check",
                    )

        # Rule: loop over a dynamic array length containing an external call.
        for m in re.finditer(r"\b(for|while)\s*\(", body):
            header_start, header_end = _match_paren_span(body, m.end() - 1)
            header = body[header_start:header_end]
            bounded_by = [
                arr
                for arr in sorted(state_arrays | local_arrays)
                if re.search(rf"\b{re.escape(arr)}\s*\.\s*length\b", header)
            ]
            if not bounded_by:
                continue
            loop_body_start = header_end + 1
            brace = re.compile(r"\s*\{").match(body, loop_body_start)
            if brace is not None:
                loop_end = loop_body_start
                depth = 0
                for i in range(brace.end() - 1, len(body)):
                    if body[i] == "{":
                        depth += 1
                    elif body[i] == "}":
                        depth -= 1
                        if depth == 0:
                            loop_end = i
                            break
                loop_span = body[brace.end() : loop_end]
            else:
                stmt_end = body.find(";", loop_body_start)
                loop_span = body[loop_body_start : stmt_end if stmt_end >= 0 else len(body)]
            span_calls, span_value, _ = _collect_external_calls(loop_span)
            if span_calls or span_value:
                add(
                    "gas-dos",
                    base + m.start(),
                    f"loop over '{bounded_by[0]}' makes external calls; length growth can exhaust gas",
                )

        # Rule: missing explicit visibility below 0.5.0.
        if resolved < (0, 5, 0) and block.kind == "function" and visibility is None:
            add(
                "visibility",
                block.keyword_start,
                f"function '{fn_label}' has no explicit visibility (defaults to public)",
            )

        # Rule: effects with no guard anywhere in the function.
        has_guard = _GUARD_RE.search(body) is not None
        if (
            block.kind != "constructor"
            and (writes or calls)
            and not has_guard
            and not modifiers
        ):
            add(
                "state-validation",
                block.keyword_start,
                f"'{fn_label}' mutates state or calls out with no require/revert guard",
            )

    findings.sort(key=lambda f: (f.line, f.rule_id))
    secure = not any(f.severity >= config.severity_threshold for f in findings)
    return ScanReport(
        findings=tuple(findings),
        secure=secure,
        threshold=config.severity_threshold,
        version=resolved,
    )


def merge_external_findings(report: ScanReport, entries_json: str, source: str) -> ScanReport:
    """Merge findings from an external tool (JSON array) into a report.

    Each entry needs category, severity (exactly High|Med|Low), line, and
    message; rule_id defaults to "external". Entries are validated strictly
    and merged findings are re-sorted by (line, rule id).
    """
    entries = json.loads(entries_json)
    if not isinstance(entries, list):
        raise ValueError("external findings must be a JSON array")
    n_lines = source.count("\n") + 1
    merged = list(report.findings)
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ValueError(f"external finding {i} is not an object")
        try:
            category = canonical_category(entry["category"])
            severity = parse_severity(entry["severity"])
            line = entry["line"]
            message = entry["message"]
        except KeyError as exc:
            raise ValueError(f"external finding {i} is missing {exc}") from None
        if severity != classify_severity(category):
            raise ValueError(
                f"external finding {i}: severity {entry['severity']!r} does not "
                f"match category {category!r}"
            )
        if not isinstance(line, int) or not 1 <= line <= n_lines:
            raise ValueError(f"external finding {i}: line {line!r} outside source")
        merged.append(
            VulnFinding(
                rule_id=str(entry.get("rule_id", "external")),
                category=category,
                severity=severity,
                line=line,
                excerpt="",
                message=str(message),
            )
        )
    merged.sort(key=lambda f: (f.line, f.rule_id))
    secure = not any(f.severity >= report.threshold for f in merged)
    return replace(report, findings=tuple(merged), secure=secure)
