"""Reinforcement-learning reward stack for Solidity code generation.

The pieces compose in reward order: parse the model output, assemble and
compile the code it produced, scan the result for vulnerability patterns,
then blend the three signals into a scalar reward.  Group-relative policy
optimization over a toy policy, corpus preparation utilities, and the
evaluation metrics live alongside.
"""

from __future__ import annotations

from .compile_gate import (
    AssemblyError,
    CompileGateError,
    CompileResult,
    CompilerBinary,
    CompilerInvocationError,
    CompilerRegistry,
    CompilerUnavailableError,
    ContractContext,
    Diagnostic,
    assemble,
    compile_source,
)
from .datapipe import (
    CodeWindow,
    RemovalRecord,
    TokenStream,
    build_instruction,
    clean_doc,
    dedup,
    jaccard_similarity,
    segment_windows,
    tokenize,
)
from .grpo import (
    CurvePoint,
    GrpoHyperparams,
    ObjectiveParts,
    RolloutGroup,
    StepReport,
    ToyTask,
    cei_toy_task,
    clipped_surrogate,
    curve_to_csv,
    curve_to_json,
    grpo_gradients,
    grpo_objective,
    grpo_step,
    kl_penalty,
    lm_cross_entropy,
    normalize_advantages,
    rollout_group,
    train_toy,
    with_reference,
    with_rewards,
)
from .metrics import (
    MetricsReport,
    SampleVerdict,
    compute_metrics,
    parse_verdict_line,
    render_report,
)
from .output_parser import (
    FormatCheck,
    ParsedOutput,
    check_format,
    count_reasoning_steps,
    extract_think_answer,
)
from .reward import (
    PRESETS,
    GenerationSample,
    RewardBreakdown,
    RewardConfig,
    preset,
    score_sample,
)
from .scanner import (
    DEFAULT_CONFIG,
    RULES,
    ScanConfig,
    ScanReport,
    Severity,
    VulnFinding,
    VulnRule,
    canonical_category,
    classify_severity,
    find_disclaimers,
    merge_external_findings,
    parse_severity,
    scan,
    security_score,
)
from .solidity import (
    FunctionBlock,
    PragmaError,
    VersionConstraint,
    detect_pragma,
    find_functions,
    parse_constraint,
    parse_version,
    strip_comments,
)
from .toy_policy import ToyPolicy

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "CodeWindow",
    "CompileGateError",
    "CompileResult",
    "CompilerBinary",
    "CompilerInvocationError",
    "CompilerRegistry",
    "CompilerUnavailableError",
    "ContractContext",
    "CurvePoint",
    "DEFAULT_CONFIG",
    "Diagnostic",
    "FormatCheck",
    "FunctionBlock",
    "GenerationSample",
    "GrpoHyperparams",
    "MetricsReport",
    "ObjectiveParts",
    "PRESETS",
    "ParsedOutput",
    "PragmaError",
    "RULES",
    "RemovalRecord",
    "RewardBreakdown",
    "RewardConfig",
    "RolloutGroup",
    "SampleVerdict",
    "ScanConfig",
    "ScanReport",
    "Severity",
    "StepReport",
    "TokenStream",
    "ToyPolicy",
    "ToyTask",
    "VersionConstraint",
    "VulnFinding",
    "VulnRule",
    "assemble",
    "build_instruction",
    "canonical_category",
    "cei_toy_task",
    "check_format",
    "classify_severity",
    "clean_doc",
    "clipped_surrogate",
    "compile_source",
    "compute_metrics",
    "count_reasoning_steps",
    "curve_to_csv",
    "curve_to_json",
    "dedup",
    "detect_pragma",
    "extract_think_answer",
    "find_disclaimers",
    "find_functions",
    "grpo_gradients",
    "grpo_objective",
    "grpo_step",
    "jaccard_similarity",
    "kl_penalty",
    "lm_cross_entropy",
    "merge_external_findings",
    "normalize_advantages",
    "parse_constraint",
    "parse_severity",
    "parse_verdict_line",
    "parse_version",
    "preset",
    "render_report",
    "rollout_group",
    "scan",
    "score_sample",
    "security_score",
    "segment_windows",
    "strip_comments",
    "tokenize",
    "train_toy",
    "with_reference",
    "with_rewards",
]
