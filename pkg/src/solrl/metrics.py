"""Corpus-level generation quality metrics.

Five rates over per-sample verdicts: compile pass rate, vulnerability rate
among compiled samples, compile-and-secure rate, functional rate, and the
full-pass rate. Internals are exact fractions; rendering rounds half-up to
two decimal places.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

_RATE_KEYS = ("compass", "vulrate", "safeaval", "funcrate", "fullrate")
_RATE_TITLES = ("ComPass", "VulRate", "SafeAval", "FuncRate", "FullRate")


@dataclass(frozen=True)
class SampleVerdict:
    """Outcome of one generated sample.

    `vulnerable` and `functional` are defined only for compiled samples (an
    external test runner supplies `functional`); a compiled sample with a
    missing optional verdict counts as not vulnerable / not functional.
    """

    sample_id: str
    compiled: bool
    vulnerable: bool | None = None
    functional: bool | None = None

    def __post_init__(self) -> None:
        if not self.compiled and self.vulnerable is not None:
            raise ValueError(
                f"sample {self.sample_id!r}: vulnerable verdict on uncompiled sample"
            )
        if not self.compiled and self.functional is not None:
            raise ValueError(
                f"sample {self.sample_id!r}: functional verdict on uncompiled sample"
            )


@dataclass(frozen=True)
class MetricsReport:
    n_total: int
    n_compiled: int
    n_vulnerable: int
    n_functional: int
    n_full: int
    compass: Fraction
    vulrate: Fraction
    safeaval: Fraction
    funcrate: Fraction
    fullrate: Fraction
    no_compiled_samples: bool

    def percentages(self) -> dict[str, float]:
        """Rates as percentages rounded half-up to two decimals."""
        out = {}
        for key in _RATE_KEYS:
            fraction: Fraction = getattr(self, key)
            exact = Decimal(fraction.numerator * 100) / Decimal(fraction.denominator)
            out[key] = float(exact.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))
        return out


def compute_metrics(verdicts: list[SampleVerdict]) -> MetricsReport:
    """Aggregate verdicts into a metrics report.

    Requires a non-empty corpus with unique sample ids. With zero compiled
    samples the vulnerability rate is 0 and the report is flagged.
    """
    if not verdicts:
        raise ValueError("empty corpus")
    seen = set()
    for v in verdicts:
        if v.sample_id in seen:
            raise ValueError(f"duplicate sample_id {v.sample_id!r}")
        seen.add(v.sample_id)

    n_total = len(verdicts)
    n_compiled = sum(1 for v in verdicts if v.compiled)
    n_vulnerable = sum(1 for v in verdicts if v.compiled and v.vulnerable)
    n_functional = sum(1 for v in verdicts if v.compiled and v.functional)
    n_full = sum(
        1 for v in verdicts if v.compiled and not v.vulnerable and v.functional
    )

    compass = Fraction(n_compiled, n_total)
    vulrate = Fraction(n_vulnerable, n_compiled) if n_compiled else Fraction(0)
    safeaval = Fraction(n_compiled - n_vulnerable, n_total)
    funcrate = Fraction(n_functional, n_total)
    fullrate = Fraction(n_full, n_total)
    return MetricsReport(
        n_total=n_total,
        n_compiled=n_compiled,
        n_vulnerable=n_vulnerable,
        n_functional=n_functional,
        n_full=n_full,
        compass=compass,
        vulrate=vulrate,
        safeaval=safeaval,
        funcrate=funcrate,
        fullrate=fullrate,
        no_compiled_samples=n_compiled == 0,
    )


def parse_verdict_line(line: str) -> SampleVerdict:
    """Parse one JSONL verdict object, validating the schema strictly."""
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("verdict line is not an object")
    unknown = set(obj) - {"sample_id", "compiled", "vulnerable", "functional"}
    if unknown:
        raise ValueError(f"unknown verdict fields: {sorted(unknown)}")
    try:
        sample_id = obj["sample_id"]
        compiled = obj["compiled"]
    except KeyError as exc:
        raise ValueError(f"verdict missing field {exc}") from None
    if not isinstance(sample_id, str) or not isinstance(compiled, bool):
        raise ValueError("sample_id must be a string and compiled a boolean")
    vulnerable = obj.get("vulnerable")
    functional = obj.get("functional")
    for name, value in (("vulnerable", vulnerable), ("functional", functional)):
        if value is not None and not isinstance(value, bool):
            raise ValueError(f"{name} must be a boolean when present")
    return SampleVerdict(
        sample_id=sample_id,
        compiled=compiled,
        vulnerable=vulnerable,
        functional=functional,
    )


def render_report(report: MetricsReport, format: str = "markdown") -> str:
    """Render a report as a markdown table or a JSON object."""
    pct = report.percentages()
    if format == "json":
        payload = {
            "n_total": report.n_total,
            "n_compiled": report.n_compiled,
            "n_vulnerable": report.n_vulnerable,
            "n_functional": report.n_functional,
            "n_full": report.n_full,
            **pct,
            "no_compiled_samples": report.no_compiled_samples,
        }
        return json.dumps(payload, indent=2)
    if format != "markdown":
        raise ValueError(f"unknown format {format!r}")
    header = "| " + " | ".join(_RATE_TITLES) + " |"
    rule = "|" + "|".join(["---"] * len(_RATE_TITLES)) + "|"
    row = "| " + " | ".join(f"{pct[k]:.2f}" for k in _RATE_KEYS) + " |"
    lines = [header, rule, row]
    if report.no_compiled_samples:
        lines.append("")
        lines.append("No samples compiled; VulRate reported as 0.00 by convention.")
    return "\n".join(lines)
