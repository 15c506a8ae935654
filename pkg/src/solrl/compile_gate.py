"""Contract assembly and compiler invocation.

Generated function bodies are spliced into their contract context, then fed
to a Solidity compiler over the standard-JSON interface. Compiler binaries are
discovered from a directory (flag or SOLRL_SOLC_DIR) and the PATH, and the
newest installed version satisfying the pragma constraint is used.
"""

from __future__ import annotations

import json
import os
import re
import shutil
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

from .solidity import (
    DEFAULT_PRAGMA,
    Version,
    VersionConstraint,
    detect_pragma,
    format_version,
    parse_constraint,
    parse_version,
)

PLACEHOLDER = "/*__TARGET__*/"
SOLC_DIR_ENV = "SOLRL_SOLC_DIR"

_IDENTIFIER_RE = re.compile(r"^[A-Za-z_$][\w$]*$")


class CompileGateError(Exception):
    """Base for compile-gate failures that are not compilation results."""


class AssemblyError(CompileGateError):
    """Generated code cannot be spliced into the contract context."""


class CompilerUnavailableError(CompileGateError):
    """No installed compiler satisfies the requested version constraint."""


class CompilerInvocationError(CompileGateError):
    """The compiler process produced output that cannot be interpreted."""


@dataclass(frozen=True)
class ContractContext:
    """Surrounding contract source for one generated function."""

    source: str
    target_function_name: str = "target"
    pragma_constraint: str | None = None

    def __post_init__(self) -> None:
        if not self.source.strip():
            raise ValueError("context source must be non-empty")
        if not _IDENTIFIER_RE.match(self.target_function_name):
            raise ValueError(
                f"target_function_name {self.target_function_name!r} is not a valid identifier"
            )


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int | None
    message: str

    def to_dict(self) -> dict:
        return {"severity": self.severity, "line": self.line, "message": self.message}


@dataclass(frozen=True)
class CompileResult:
    success: bool
    compiler_version: str
    diagnostics: tuple[Diagnostic, ...]
    duration_ms: float

    def __post_init__(self) -> None:
        if self.success and any(d.severity == "error" for d in self.diagnostics):
            raise ValueError("successful result cannot carry error diagnostics")

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "compiler_version": self.compiler_version,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "duration_ms": self.duration_ms,
        }


def assemble(context: ContractContext, generated_code: str) -> str:
    """Splice generated code into the contract context.

    The placeholder comment is replaced when present; otherwise the code is
    inserted before the contract's final closing brace. Assembly is pure
    string work and deterministic.
    """
    if not generated_code.strip():
        raise ValueError("generated_code must be non-empty")
    if PLACEHOLDER in context.source:
        return context.source.replace(PLACEHOLDER, generated_code, 1)
    brace = context.source.rfind("}")
    if brace < 0:
        raise AssemblyError("no insertion point: context has no placeholder or closing brace")
    return context.source[:brace] + "\n" + generated_code + "\n" + context.source[brace:]


@dataclass(frozen=True)
class CompilerBinary:
    path: Path
    version: Version


class CompilerRegistry:
    """Discovers compiler executables and resolves version constraints.

    Probes every candidate once with `--version` and caches the result for
    the registry's lifetime.
    """

    def __init__(
        self,
        solc_dir: str | os.PathLike | None = None,
        use_path: bool = True,
        env: dict | None = None,
    ) -> None:
        environ = os.environ if env is None else env
        if solc_dir is None:
            solc_dir = environ.get(SOLC_DIR_ENV)
        self.solc_dir = Path(solc_dir) if solc_dir else None
        self.use_path = use_path
        self._binaries: list[CompilerBinary] | None = None

    def _candidates(self) -> list[Path]:
        paths = []
        if self.solc_dir is not None and self.solc_dir.is_dir():
            for entry in sorted(self.solc_dir.iterdir()):
                if entry.name.startswith("solc") and entry.is_file() and os.access(entry, os.X_OK):
                    paths.append(entry)
        if self.use_path:
            found = shutil.which("solc")
            if found:
                paths.append(Path(found))
        return paths

    def discover(self) -> list[CompilerBinary]:
        if self._binaries is not None:
            return self._binaries
        binaries = []
        for path in self._candidates():
            try:
                proc = subprocess.run(
                    [str(path), "--version"],
                    capture_output=True,
                    text=True,
                    timeout=10,
                )
                version = parse_version(proc.stdout + proc.stderr)
            except (OSError, subprocess.TimeoutExpired, ValueError):
                continue
            binaries.append(CompilerBinary(path=path, version=version))
        self._binaries = binaries
        return binaries

    def resolve(self, constraint: VersionConstraint) -> CompilerBinary:
        """Newest installed compiler satisfying the constraint."""
        matching = [b for b in self.discover() if constraint.allows(b.version)]
        if not matching:
            raise CompilerUnavailableError(
                f"compiler unavailable: no installed solc satisfies {constraint.raw!r}"
            )
        return max(matching, key=lambda b: b.version)


_STANDARD_JSON_SETTINGS = {"outputSelection": {"*": {"*": []}}}


def _line_from_offset(source: str, offset: int | None) -> int | None:
    if offset is None or offset < 0 or offset > len(source):
        return None
    return source.count("\n", 0, offset) + 1


def compile_source(
    source: str,
    constraint: str | None = None,
    registry: CompilerRegistry | None = None,
    timeout: float = 30.0,
) -> CompileResult:
    """Compile source over standard JSON with a pragma-compatible compiler.

    Success is judged from the parsed diagnostics (no error-severity entry),
    never from the exit status. A timed-out process yields a failed result
    with a "timeout" diagnostic. Raises CompilerUnavailableError when no
    installed compiler satisfies the constraint and CompilerInvocationError
    when the compiler's output cannot be parsed.
    """
    if constraint is None:
        constraint = detect_pragma(source, default=DEFAULT_PRAGMA)
    parsed_constraint = parse_constraint(constraint)
    if registry is None:
        registry = CompilerRegistry()
    binary = registry.resolve(parsed_constraint)
    version_label = format_version(binary.version)

    request = {
        "language": "Solidity",
        "sources": {"contract.sol": {"content": source}},
        "settings": _STANDARD_JSON_SETTINGS,
    }
    started = time.monotonic()
    try:
        proc = subprocess.run(
            [str(binary.path), "--standard-json"],
            input=json.dumps(request),
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired:
        duration_ms = (time.monotonic() - started) * 1000.0
        return CompileResult(
            success=False,
            compiler_version=version_label,
            diagnostics=(Diagnostic("error", None, "timeout"),),
            duration_ms=duration_ms,
        )
    except OSError as exc:
        raise CompilerInvocationError(f"failed to run {binary.path}: {exc}") from exc
    duration_ms = (time.monotonic() - started) * 1000.0

    # Some compiler builds print notices before the JSON document.
    stdout = proc.stdout
    brace = stdout.find("{")
    if brace < 0:
        raise CompilerInvocationError(
            f"compiler produced no JSON output (exit {proc.returncode}): "
            f"{(stdout + proc.stderr)[:200]!r}"
        )
    try:
        output = json.loads(stdout[brace:])
    except json.JSONDecodeError as exc:
        raise CompilerInvocationError(f"unparseable compiler output: {exc}") from exc

    diagnostics = []
    for entry in output.get("errors", []):
        severity = entry.get("severity", "error")
        location = entry.get("sourceLocation") or {}
        line = _line_from_offset(source, location.get("start"))
        message = entry.get("message", "").strip()
        diagnostics.append(Diagnostic(severity=severity, line=line, message=message))
    success = not any(d.severity == "error" for d in diagnostics)
    return CompileResult(
        success=success,
        compiler_version=version_label,
        diagnostics=tuple(diagnostics),
        duration_ms=duration_ms,
    )
