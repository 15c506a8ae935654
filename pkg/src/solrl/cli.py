"""Batch command-line surface over the library.

Exit-code contract shared by all commands: 0 clean, 1 findings or failed
samples present, 2 infrastructure or usage error. Outputs are line-oriented
JSON wherever a corpus flows through, and every command is deterministic for
fixed inputs, seed, and compiler.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from .compile_gate import (
    CompilerInvocationError,
    CompilerRegistry,
    CompilerUnavailableError,
)
from .datapipe import TokenStream, dedup, segment_windows
from .grpo import GrpoHyperparams, cei_toy_task, curve_to_csv, curve_to_json, train_toy
from .metrics import compute_metrics, parse_verdict_line, render_report
from .reward import GenerationSample, RewardConfig, preset, score_sample
from .scanner import (
    DEFAULT_CONFIG,
    merge_external_findings,
    parse_severity,
    scan,
)

_SEVERITY_CHOICE = click.Choice(["Low", "Med", "High"], case_sensitive=False)


def _write_text(out: Path | None, text: str) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text, encoding="utf-8")


def _reward_config(
    preset_name: str | None, weights: str | None, severity_threshold: str
) -> RewardConfig:
    if preset_name and weights:
        raise click.UsageError("--preset and --weights are mutually exclusive")
    threshold = parse_severity(severity_threshold)
    if weights:
        parts = weights.split(",")
        if len(parts) != 3:
            raise click.UsageError("--weights needs exactly three comma-separated values")
        try:
            a1, a2, a3 = (float(p) for p in parts)
        except ValueError:
            raise click.UsageError(f"--weights values must be numbers, got {weights!r}")
        try:
            return RewardConfig(a1, a2, a3, severity_threshold=threshold)
        except ValueError as exc:
            raise click.UsageError(str(exc))
    if preset_name:
        try:
            base = preset(preset_name)
        except ValueError as exc:
            raise click.UsageError(str(exc))
        return dataclasses.replace(base, severity_threshold=threshold)
    return RewardConfig(severity_threshold=threshold)


def _parse_sample(line: str) -> GenerationSample:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("sample line must be a JSON object")
    allowed = {"sample_id", "output", "context", "target_function", "requirement"}
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"unknown fields: {sorted(unknown)}")
    for field in ("sample_id", "output"):
        if field not in obj:
            raise ValueError(f"missing field {field!r}")
        if not isinstance(obj[field], str):
            raise ValueError(f"field {field!r} must be a string")
    for field in ("context", "requirement"):
        if obj.get(field) is not None and not isinstance(obj[field], str):
            raise ValueError(f"field {field!r} must be a string or null")
    target = obj.get("target_function", "target")
    if not isinstance(target, str):
        raise ValueError("field 'target_function' must be a string")
    return GenerationSample(
        sample_id=obj["sample_id"],
        output=obj["output"],
        context=obj.get("context"),
        target_function=target,
        requirement=obj.get("requirement"),
    )


def _iter_corpus(path: Path) -> list[tuple[str, str]]:
    """Load (id, source) pairs from a JSONL file ({"id", "source"}), a
    directory of .sol files, or a single source file."""
    items: list[tuple[str, str]] = []
    if path.is_dir():
        for entry in sorted(path.rglob("*.sol")):
            items.append(
                (str(entry.relative_to(path)), entry.read_text(encoding="utf-8"))
            )
        return items
    if path.suffix == ".jsonl":
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict) or "id" not in obj or "source" not in obj:
                    raise ValueError('expected {"id": ..., "source": ...}')
            except ValueError as exc:
                click.echo(f"line {lineno}: {exc}", err=True)
                sys.exit(2)
            items.append((str(obj["id"]), str(obj["source"])))
        return items
    items.append((path.name, path.read_text(encoding="utf-8")))
    return items


@click.group()
@click.version_option(package_name="solrl")
def main() -> None:
    """Reward scoring, scanning, evaluation, and toy RL training."""


@main.command()
@click.argument("samples", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write JSONL here instead of stdout.")
@click.option("--preset", "preset_name", help="Named reward-weight preset.")
@click.option("--weights", help="Explicit weights: compile,security,format (must sum to 1).")
@click.option("--severity-threshold", type=_SEVERITY_CHOICE, default="Low", show_default=True, help="Minimum severity that fails the security check.")
@click.option("--solc-dir", type=click.Path(file_okay=False, path_type=Path), help="Directory of solc binaries (overrides SOLRL_SOLC_DIR).")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True, help="Parallel scoring workers; output order still matches input order.")
@click.option("--check-reasoning", is_flag=True, help="Also scan the reasoning text for security-dismissive language.")
@click.option("--timeout", type=float, default=30.0, show_default=True, help="Per-sample compile timeout in seconds.")
def score(
    samples: Path,
    out: Path | None,
    preset_name: str | None,
    weights: str | None,
    severity_threshold: str,
    solc_dir: Path | None,
    jobs: int,
    check_reasoning: bool,
    timeout: float,
) -> None:
    """Score a JSONL file of generation samples into reward breakdowns.

    Each input line is a JSON object with "sample_id" and "output" (plus
    optional "context", "target_function", "requirement"). Malformed lines
    become error objects in the output and the command exits 1; compiler
    unavailability aborts with exit 2.
    """
    config = _reward_config(preset_name, weights, severity_threshold)
    registry = CompilerRegistry(solc_dir=solc_dir)
    lines = samples.read_text(encoding="utf-8").splitlines()

    def one(numbered: tuple[int, str]) -> dict:
        lineno, line = numbered
        try:
            sample = _parse_sample(line)
        except ValueError as exc:
            return {"line": lineno, "error": str(exc)}
        breakdown = score_sample(
            sample,
            config,
            registry=registry,
            check_reasoning=check_reasoning,
            compile_timeout=timeout,
        )
        return breakdown.to_dict()

    numbered = [(i, line) for i, line in enumerate(lines, 1) if line.strip()]
    try:
        if jobs == 1:
            results = [one(item) for item in numbered]
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(one, numbered))
    except (CompilerUnavailableError, CompilerInvocationError) as exc:
        click.echo(str(exc), err=True)
        sys.exit(2)

    rendered = "".join(json.dumps(r, sort_keys=True) + "\n" for r in results)
    _write_text(out, rendered)
    failures = sum(1 for r in results if "error" in r)
    if failures:
        click.echo(f"{failures} of {len(results)} lines failed", err=True)
        sys.exit(1)


@main.command()
@click.argument("verdicts", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["markdown", "json"]), default="markdown", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write the report here instead of stdout.")
def evaluate(verdicts: Path, fmt: str, out: Path | None) -> None:
    """Aggregate a JSONL file of per-sample verdicts into the five metrics."""
    parsed = []
    for lineno, line in enumerate(verdicts.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            parsed.append(parse_verdict_line(line))
        except ValueError as exc:
            click.echo(f"line {lineno}: {exc}", err=True)
            sys.exit(2)
    try:
        report = compute_metrics(parsed)
    except ValueError as exc:
        click.echo(str(exc), err=True)
        sys.exit(2)
    _write_text(out, render_report(report, fmt))


@main.command(name="scan")
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--severity-threshold", type=_SEVERITY_CHOICE, default="Low", show_default=True, help="Findings at or above this level mark the file insecure.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--external", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="JSON file of external-scanner findings to merge (single input file only).")
def scan_cmd(paths: tuple[Path, ...], severity_threshold: str, fmt: str, external: Path | None) -> None:
    """Scan Solidity files (or directories of them) for vulnerability patterns."""
    threshold = parse_severity(severity_threshold)
    files: list[Path] = []
    for path in paths:
        if path.is_dir():
            files.extend(sorted(path.rglob("*.sol")))
        else:
            files.append(path)
    if not files:
        click.echo("no .sol files found", err=True)
        sys.exit(2)
    if external is not None and len(files) != 1:
        raise click.UsageError("--external requires exactly one input file")

    config = dataclasses.replace(DEFAULT_CONFIG, severity_threshold=threshold)
    insecure = False
    reports = []
    for file in files:
        source = file.read_text(encoding="utf-8")
        report = scan(source, config=config)
        if external is not None:
            try:
                report = merge_external_findings(
                    report, external.read_text(encoding="utf-8"), source
                )
            except ValueError as exc:
                click.echo(f"--external: {exc}", err=True)
                sys.exit(2)
        reports.append((file, report))
        insecure = insecure or not report.secure

    if fmt == "json":
        payload = [
            {"path": str(file), **report.to_dict()} for file, report in reports
        ]
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        total = 0
        for file, report in reports:
            for f in report.findings:
                total += 1
                click.echo(
                    f"{file}:{f.line}: [{f.severity.label}] {f.category}: {f.message}"
                )
        click.echo(f"{total} finding(s) in {len(files)} file(s)")
    sys.exit(1 if insecure else 0)


@main.command(name="dedup")
@click.argument("corpus", type=click.Path(exists=True, path_type=Path))
@click.option("--threshold", type=click.FloatRange(min=0, max=1, min_open=True), default=0.9, show_default=True, help="Jaccard similarity at or above which the later item is dropped.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write kept items here instead of stdout.")
@click.option("--log", "log_path", type=click.Path(dir_okay=False, path_type=Path), help="Write removal records (JSONL) here.")
def dedup_cmd(corpus: Path, threshold: float, out: Path | None, log_path: Path | None) -> None:
    """Drop near-duplicate sources from a corpus (first occurrence wins).

    CORPUS is a JSONL file of {"id", "source"} objects, a directory of .sol
    files, or a single source file.
    """
    items = _iter_corpus(corpus)
    texts = dict(items)
    streams = [TokenStream.from_text(item_id, source) for item_id, source in items]
    kept, removals = dedup(streams, threshold=threshold)
    rendered = "".join(
        json.dumps({"id": s.origin_id, "source": texts[s.origin_id]}, sort_keys=True)
        + "\n"
        for s in kept
    )
    _write_text(out, rendered)
    if log_path is not None:
        log_path.write_text(
            "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in removals),
            encoding="utf-8",
        )
    click.echo(f"kept {len(kept)} of {len(items)}", err=True)


@main.command(name="windows")
@click.argument("corpus", type=click.Path(exists=True, path_type=Path))
@click.option("--window", type=click.IntRange(min=1), default=2048, show_default=True)
@click.option("--stride", type=click.IntRange(min=1), default=1024, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write JSONL here instead of stdout.")
def windows_cmd(corpus: Path, window: int, stride: int, out: Path | None) -> None:
    """Segment each corpus item into overlapping token windows."""
    if stride > window:
        raise click.UsageError("--stride must not exceed --window")
    streams = [
        TokenStream.from_text(item_id, source)
        for item_id, source in _iter_corpus(corpus)
    ]
    lines = []
    for stream in streams:
        for w in segment_windows(stream, window=window, stride=stride):
            lines.append(
                json.dumps(
                    {
                        "origin_id": w.origin_id,
                        "start": w.start,
                        "end": w.end,
                        "length": w.end - w.start,
                    },
                    sort_keys=True,
                )
            )
    _write_text(out, "".join(line + "\n" for line in lines))


@main.command(name="train-toy")
@click.option("--steps", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--group-size", type=click.IntRange(min=2), default=8, show_default=True)
@click.option("--beta", type=click.FloatRange(min=0), default=0.001, show_default=True, help="KL penalty coefficient.")
@click.option("--epsilon", type=click.FloatRange(min=0, min_open=True), default=0.2, show_default=True, help="Clip radius.")
@click.option("--lr", type=click.FloatRange(min=0, min_open=True), default=0.5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write the training curve here instead of stdout.")
def train_toy_cmd(
    steps: int, group_size: int, beta: float, epsilon: float, lr: float,
    seed: int, fmt: str, out: Path | None,
) -> None:
    """Train the toy policy on the plan/guard/effect task and emit the curve."""
    hp = GrpoHyperparams(
        epsilon=epsilon, beta=beta, group_size=group_size, learning_rate=lr
    )
    curve = train_toy(cei_toy_task(), hp, steps=steps, seed=seed)
    rendered = curve_to_csv(curve) if fmt == "csv" else curve_to_json(curve)
    _write_text(out, rendered)
    click.echo(
        f"mean reward {curve[0].mean_reward:.4f} -> {curve[-1].mean_reward:.4f} "
        f"over {steps} steps",
        err=True,
    )


if __name__ == "__main__":
    main()
