"""Composite reward over generated contract code.

Three binary components: does the assembled contract compile, does the
scanner find nothing at or above the severity threshold, and does the output
follow the reasoning/answer format. The total is their weighted sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .compile_gate import CompilerRegistry, ContractContext, assemble, compile_source
from .output_parser import check_format, extract_think_answer
from .scanner import ScanConfig, Severity, find_disclaimers, scan, security_score
from .solidity import DEFAULT_PRAGMA, detect_pragma, parse_constraint

_WEIGHT_TOLERANCE = 1e-9

PRESETS: dict[str, tuple[float, float, float]] = {
    "Ours": (0.3, 0.5, 0.2),
    "Security+": (0.2, 0.6, 0.2),
    "Security++": (0.1, 0.7, 0.2),
    "Compile+": (0.4, 0.4, 0.2),
    "Compile++": (0.5, 0.3, 0.2),
    "Compile+++": (0.6, 0.2, 0.2),
    "Compile++++": (0.7, 0.1, 0.2),
}


@dataclass(frozen=True)
class RewardConfig:
    """Component weights (must be non-negative and sum to 1) and scan threshold."""

    alpha_compile: float = 0.3
    alpha_security: float = 0.5
    alpha_format: float = 0.2
    severity_threshold: Severity = Severity.LOW

    def __post_init__(self) -> None:
        weights = (self.alpha_compile, self.alpha_security, self.alpha_format)
        if any(w < 0 or w > 1 for w in weights):
            raise ValueError(f"weights must lie in [0, 1], got {weights}")
        if abs(sum(weights) - 1.0) > _WEIGHT_TOLERANCE:
            raise ValueError(f"weights must sum to 1, got {weights}")

    def total(self, r_compile: int, r_security: int, r_format: int) -> float:
        return (
            self.alpha_compile * r_compile
            + self.alpha_security * r_security
            + self.alpha_format * r_format
        )


def preset(name: str) -> RewardConfig:
    """Weight preset by name (case-insensitive on the word part)."""
    weights = PRESETS.get(name)
    if weights is None:
        lowered = {k.lower(): v for k, v in PRESETS.items()}
        weights = lowered.get(name.lower())
    if weights is None:
        raise ValueError(
            f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}"
        )
    return RewardConfig(*weights)


@dataclass(frozen=True)
class GenerationSample:
    """One model output to score, with its optional contract context."""

    sample_id: str
    output: str
    context: str | None = None
    target_function: str = "target"
    requirement: str | None = None


@dataclass(frozen=True)
class RewardBreakdown:
    sample_id: str
    r_compile: int
    r_security: int
    r_format: int
    total: float
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "r_compile": self.r_compile,
            "r_security": self.r_security,
            "r_format": self.r_format,
            "total": self.total,
            "evidence": self.evidence,
        }


def score_sample(
    sample: GenerationSample,
    config: RewardConfig | None = None,
    registry: CompilerRegistry | None = None,
    check_reasoning: bool = False,
    compile_timeout: float = 30.0,
) -> RewardBreakdown:
    """Score one sample: parse, assemble, compile, scan, and combine.

    An output with no extractable code block scores 0 on the compile and
    security components with "no code" evidence. The scan runs on the
    generated code whether or not it compiled. Compiler infrastructure errors
    (unavailable or broken compiler) propagate as exceptions rather than being
    folded into a score.

    Args:
        sample: output text plus optional surrounding contract.
        config: weights and severity threshold; defaults to the 0.3/0.5/0.2
            security-weighted configuration.
        registry: compiler discovery override, e.g. for a pinned directory.
        check_reasoning: when true, reasoning that explicitly disclaims a
            protection also zeroes the security component.
        compile_timeout: seconds before a compile attempt is failed.
    """
    if config is None:
        config = RewardConfig()

    parsed = extract_think_answer(sample.output)
    format_check = check_format(parsed)
    r_format = format_check.score
    evidence: dict = {"format": list(format_check.diagnostics)}

    if parsed.code is None or not parsed.code:
        evidence["compile"] = "no code"
        evidence["security"] = "no code"
        return RewardBreakdown(
            sample_id=sample.sample_id,
            r_compile=0,
            r_security=0,
            r_format=r_format,
            total=config.total(0, 0, r_format),
            evidence=evidence,
        )

    code = parsed.code
    if sample.context is not None and sample.context.strip():
        context = ContractContext(
            source=sample.context, target_function_name=sample.target_function
        )
        full_source = assemble(context, code)
    else:
        full_source = code

    result = compile_source(full_source, registry=registry, timeout=compile_timeout)
    r_compile = 1 if result.success else 0
    evidence["compile"] = result.to_dict()

    scan_config = ScanConfig(severity_threshold=config.severity_threshold)
    constraint = detect_pragma(full_source, default=DEFAULT_PRAGMA)
    version = parse_constraint(constraint).lower_bound()
    report = scan(code, version=version, config=scan_config)
    r_security = security_score(report)
    evidence["security"] = report.to_dict()

    if check_reasoning and parsed.reasoning:
        disclaimers = find_disclaimers(parsed.reasoning)
        if disclaimers:
            r_security = 0
            evidence["reasoning_disclaimers"] = disclaimers

    return RewardBreakdown(
        sample_id=sample.sample_id,
        r_compile=r_compile,
        r_security=r_security,
        r_format=r_format,
        total=config.total(r_compile, r_security, r_format),
        evidence=evidence,
    )
