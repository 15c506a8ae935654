"""End-to-end command tests through click's runner.

Compile-dependent paths take the shared real-compiler fixture and are skipped
when no solc can be provisioned; everything else runs hermetically in tmp
directories.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from solrl.cli import main
from solrl.fixtures import load_fixture_corpus

THINK = (
    "<think>First we validate the input amount. "
    "Then we update the stored total. "
    "Finally we emit no events to keep it simple.</think>"
)

CLEAN_CONTRACT = (
    "pragma solidity ^0.8.0;\n"
    "contract Ledger {\n"
    "    uint256 public total;\n"
    "    function target(uint256 amount) external {\n"
    "        require(amount > 0, \"zero\");\n"
    "        total += amount;\n"
    "    }\n"
    "}"
)

TXORIGIN_CONTRACT = (
    "pragma solidity ^0.8.0;\n"
    "contract Gate {\n"
    "    address public owner;\n"
    "    function target() external {\n"
    "        require(tx.origin == owner, \"denied\");\n"
    "        owner = msg.sender;\n"
    "    }\n"
    "}"
)

NO_SOLC_ENV = {"PATH": "/nonexistent", "SOLRL_SOLC_DIR": None}


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()


def fixture_source(name: str) -> str:
    for fixture in load_fixture_corpus():
        if fixture.name == name:
            return fixture.source
    raise LookupError(name)


def sample_line(sample_id: str, output: str, **extra) -> str:
    return json.dumps({"sample_id": sample_id, "output": output, **extra})


def no_code_sample(sample_id: str) -> str:
    return sample_line(sample_id, THINK)


def solc_args(solc_registry) -> list[str]:
    if solc_registry.solc_dir is not None:
        return ["--solc-dir", str(solc_registry.solc_dir)]
    return []


def test_version_and_help(runner):
    assert "0.1.0" in runner.invoke(main, ["--version"]).output
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for command in ("score", "evaluate", "scan", "dedup", "windows", "train-toy"):
        assert command in result.output


# -- score -----------------------------------------------------------------

def test_score_samples_without_code(runner, tmp_path):
    samples = tmp_path / "samples.jsonl"
    samples.write_text(
        no_code_sample("a") + "\n\n" + no_code_sample("b") + "\n",
        encoding="utf-8",
    )
    result = runner.invoke(main, ["score", str(samples)], env=NO_SOLC_ENV)
    assert result.exit_code == 0
    rows = [json.loads(line) for line in result.stdout.splitlines()]
    assert [r["sample_id"] for r in rows] == ["a", "b"]
    for row in rows:
        assert row["r_compile"] == 0
        assert row["r_format"] == 0
        assert row["total"] == 0.0
        assert set(row) == {
            "sample_id", "r_compile", "r_security", "r_format", "total", "evidence",
        }


def test_score_reports_malformed_lines(runner, tmp_path):
    samples = tmp_path / "samples.jsonl"
    samples.write_text(
        "\n".join(
            [
                no_code_sample("good"),
                "{not json",
                json.dumps({"sample_id": "x", "output": "y", "extra": 1}),
                json.dumps({"sample_id": "z"}),
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    result = runner.invoke(main, ["score", str(samples)], env=NO_SOLC_ENV)
    assert result.exit_code == 1
    rows = [json.loads(line) for line in result.stdout.splitlines()]
    assert len(rows) == 4
    assert rows[0]["sample_id"] == "good"
    assert rows[1] == {"line": 2, "error": rows[1]["error"]}
    assert "unknown fields" in rows[2]["error"]
    assert "missing field 'output'" in rows[3]["error"]
    assert "3 of 4 lines failed" in result.stderr


def test_score_jobs_preserve_input_order(runner, tmp_path):
    ids = [f"s{i}" for i in range(12)]
    samples = tmp_path / "samples.jsonl"
    samples.write_text(
        "".join(no_code_sample(i) + "\n" for i in ids), encoding="utf-8"
    )
    result = runner.invoke(main, ["score", str(samples), "--jobs", "4"], env=NO_SOLC_ENV)
    assert result.exit_code == 0
    assert [json.loads(l)["sample_id"] for l in result.stdout.splitlines()] == ids


def test_score_preset_and_weights_conflict(runner, tmp_path):
    samples = tmp_path / "samples.jsonl"
    samples.write_text(no_code_sample("a") + "\n", encoding="utf-8")
    result = runner.invoke(
        main,
        ["score", str(samples), "--preset", "Ours", "--weights", "0.3,0.5,0.2"],
    )
    assert result.exit_code == 2
    assert "mutually exclusive" in result.stderr


@pytest.mark.parametrize(
    ("weights", "message"),
    [
        ("0.3,0.7", "exactly three"),
        ("a,b,c", "must be numbers"),
        ("0.5,0.5,0.5", "sum"),
    ],
)
def test_score_rejects_bad_weights(runner, tmp_path, weights, message):
    samples = tmp_path / "samples.jsonl"
    samples.write_text(no_code_sample("a") + "\n", encoding="utf-8")
    result = runner.invoke(main, ["score", str(samples), "--weights", weights])
    assert result.exit_code == 2
    assert message in result.stderr


def test_score_rejects_unknown_preset(runner, tmp_path):
    samples = tmp_path / "samples.jsonl"
    samples.write_text(no_code_sample("a") + "\n", encoding="utf-8")
    result = runner.invoke(main, ["score", str(samples), "--preset", "Bogus"])
    assert result.exit_code == 2
    assert "Ours" in result.stderr


def test_score_weights_change_totals(runner, tmp_path):
    samples = tmp_path / "samples.jsonl"
    # Well-formed output, no code: only the format component can score, and
    # with no code that is 0 as well; use a code-free weight check instead
    # via the security component of an empty-answer sample.
    samples.write_text(no_code_sample("a") + "\n", encoding="utf-8")
    result = runner.invoke(
        main, ["score", str(samples), "--weights", "0.2,0.6,0.2"], env=NO_SOLC_ENV
    )
    assert result.exit_code == 0
    assert json.loads(result.stdout)["total"] == 0.0


def test_score_unavailable_compiler_is_infrastructure_error(runner, tmp_path):
    samples = tmp_path / "samples.jsonl"
    samples.write_text(
        sample_line("a", f"{THINK}<answer>{CLEAN_CONTRACT}</answer>") + "\n",
        encoding="utf-8",
    )
    empty = tmp_path / "no-compilers"
    empty.mkdir()
    result = runner.invoke(
        main, ["score", str(samples), "--solc-dir", str(empty)], env=NO_SOLC_ENV
    )
    assert result.exit_code == 2
    assert result.stdout == ""


def test_score_full_pipeline_with_real_compiler(runner, tmp_path, solc_registry):
    samples = tmp_path / "samples.jsonl"
    samples.write_text(
        "\n".join(
            [
                sample_line("clean", f"{THINK}<answer>{CLEAN_CONTRACT}</answer>"),
                sample_line("txorigin", f"{THINK}<answer>{TXORIGIN_CONTRACT}</answer>"),
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    out = tmp_path / "scores.jsonl"
    result = runner.invoke(
        main,
        ["score", str(samples), "--out", str(out), *solc_args(solc_registry)],
    )
    assert result.exit_code == 0, result.output
    assert result.stdout == ""
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    clean, txorigin = rows
    assert clean["sample_id"] == "clean"
    assert (clean["r_compile"], clean["r_security"], clean["r_format"]) == (1, 1, 1)
    assert clean["total"] == 1.0
    assert txorigin["r_compile"] == 1
    assert txorigin["r_security"] == 0
    assert txorigin["total"] == 0.5


# -- evaluate ----------------------------------------------------------------

def verdict_lines(n_total: int, n_compiled: int, n_vulnerable: int) -> str:
    lines = []
    for i in range(n_total):
        compiled = i < n_compiled
        lines.append(
            json.dumps(
                {
                    "sample_id": f"s{i}",
                    "compiled": compiled,
                    "vulnerable": (i < n_vulnerable) if compiled else None,
                }
            )
        )
    return "\n".join(lines) + "\n"


def test_evaluate_markdown_headline(runner, tmp_path):
    verdicts = tmp_path / "verdicts.jsonl"
    verdicts.write_text(verdict_lines(756, 663, 57), encoding="utf-8")
    result = runner.invoke(main, ["evaluate", str(verdicts)])
    assert result.exit_code == 0
    assert "| ComPass | VulRate | SafeAval | FuncRate | FullRate |" in result.stdout
    row = result.stdout.splitlines()[2]
    assert row.startswith("| 87.70 | 8.60 | 80.16 |")


def test_evaluate_json_format(runner, tmp_path):
    verdicts = tmp_path / "verdicts.jsonl"
    verdicts.write_text(verdict_lines(10, 8, 2), encoding="utf-8")
    result = runner.invoke(main, ["evaluate", str(verdicts), "--format", "json"])
    assert result.exit_code == 0
    payload = json.loads(result.stdout)
    assert payload["n_total"] == 10
    assert payload["n_compiled"] == 8
    assert payload["compass"] == 80.0
    assert payload["vulrate"] == 25.0


def test_evaluate_bad_line(runner, tmp_path):
    verdicts = tmp_path / "verdicts.jsonl"
    verdicts.write_text(
        verdict_lines(1, 1, 0) + '{"sample_id": "x"}\n', encoding="utf-8"
    )
    result = runner.invoke(main, ["evaluate", str(verdicts)])
    assert result.exit_code == 2
    assert result.stderr.startswith("line 2:")


def test_evaluate_empty_corpus(runner, tmp_path):
    verdicts = tmp_path / "verdicts.jsonl"
    verdicts.write_text("\n", encoding="utf-8")
    result = runner.invoke(main, ["evaluate", str(verdicts)])
    assert result.exit_code == 2
    assert "empty corpus" in result.stderr


def test_evaluate_is_deterministic(runner, tmp_path):
    verdicts = tmp_path / "verdicts.jsonl"
    verdicts.write_text(verdict_lines(9, 7, 3), encoding="utf-8")
    first = runner.invoke(main, ["evaluate", str(verdicts)])
    second = runner.invoke(main, ["evaluate", str(verdicts)])
    assert first.stdout == second.stdout


def test_evaluate_out_file(runner, tmp_path):
    verdicts = tmp_path / "verdicts.jsonl"
    verdicts.write_text(verdict_lines(4, 4, 0), encoding="utf-8")
    out = tmp_path / "report.md"
    result = runner.invoke(main, ["evaluate", str(verdicts), "--out", str(out)])
    assert result.exit_code == 0
    assert result.stdout == ""
    assert "| 100.00 |" in out.read_text(encoding="utf-8")


# -- scan --------------------------------------------------------------------

def test_scan_flags_vulnerable_file(runner, tmp_path):
    target = tmp_path / "bank.sol"
    target.write_text(fixture_source("reentrancy_vulnerable"), encoding="utf-8")
    result = runner.invoke(main, ["scan", str(target)])
    assert result.exit_code == 1
    assert f"{target}:" in result.stdout
    assert "[High] Reentrancy:" in result.stdout
    assert "finding(s) in 1 file(s)" in result.stdout


def test_scan_clean_file(runner, tmp_path):
    target = tmp_path / "safe.sol"
    target.write_text(fixture_source("reentrancy_clean"), encoding="utf-8")
    result = runner.invoke(main, ["scan", str(target)])
    assert result.exit_code == 0
    assert result.stdout.strip() == "0 finding(s) in 1 file(s)"


def test_scan_directory(runner, tmp_path):
    (tmp_path / "a.sol").write_text(
        fixture_source("reentrancy_vulnerable"), encoding="utf-8"
    )
    (tmp_path / "b.sol").write_text(
        fixture_source("reentrancy_clean"), encoding="utf-8"
    )
    result = runner.invoke(main, ["scan", str(tmp_path)])
    assert result.exit_code == 1
    assert "in 2 file(s)" in result.stdout


def test_scan_empty_directory(runner, tmp_path):
    result = runner.invoke(main, ["scan", str(tmp_path)])
    assert result.exit_code == 2
    assert "no .sol files found" in result.stderr


def test_scan_json_format(runner, tmp_path):
    target = tmp_path / "bank.sol"
    target.write_text(fixture_source("reentrancy_vulnerable"), encoding="utf-8")
    result = runner.invoke(main, ["scan", str(target), "--format", "json"])
    assert result.exit_code == 1
    payload = json.loads(result.stdout)
    assert payload[0]["path"] == str(target)
    assert payload[0]["findings"]
    assert payload[0]["secure"] is False


def test_scan_threshold_gates_exit_code(runner, tmp_path):
    target = tmp_path / "payout.sol"
    target.write_text(fixture_source("gas_dos_vulnerable"), encoding="utf-8")
    low = runner.invoke(main, ["scan", str(target)])
    assert low.exit_code == 1
    high = runner.invoke(main, ["scan", str(target), "--severity-threshold", "High"])
    assert high.exit_code == 0
    assert "[Low] Gas Limit DoS Risk:" in high.stdout  # still reported


def test_scan_merges_external_findings(runner, tmp_path):
    target = tmp_path / "safe.sol"
    target.write_text(fixture_source("reentrancy_clean"), encoding="utf-8")
    external = tmp_path / "tool.json"
    external.write_text(
        json.dumps(
            [
                {
                    "category": "Reentrancy",
                    "severity": "High",
                    "line": 1,
                    "message": "flagged by fuzzer",
                }
            ]
        ),
        encoding="utf-8",
    )
    result = runner.invoke(main, ["scan", str(target), "--external", str(external)])
    assert result.exit_code == 1
    assert "flagged by fuzzer" in result.stdout


def test_scan_external_requires_single_file(runner, tmp_path):
    for name in ("a.sol", "b.sol"):
        (tmp_path / name).write_text(
            fixture_source("reentrancy_clean"), encoding="utf-8"
        )
    external = tmp_path / "tool.json"
    external.write_text("[]", encoding="utf-8")
    result = runner.invoke(main, ["scan", str(tmp_path), "--external", str(external)])
    assert result.exit_code == 2
    assert "exactly one input file" in result.stderr


def test_scan_rejects_malformed_external(runner, tmp_path):
    target = tmp_path / "safe.sol"
    target.write_text(fixture_source("reentrancy_clean"), encoding="utf-8")
    external = tmp_path / "tool.json"
    external.write_text(
        json.dumps(
            [{"category": "Reentrancy", "severity": "Low", "line": 1, "message": "x"}]
        ),
        encoding="utf-8",
    )
    result = runner.invoke(main, ["scan", str(target), "--external", str(external)])
    assert result.exit_code == 2
    assert "--external:" in result.stderr


# -- dedup ---------------------------------------------------------------------

def test_dedup_jsonl_corpus(runner, tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text(
        "\n".join(
            [
                json.dumps({"id": "a", "source": "contract A { uint x; }"}),
                json.dumps({"id": "b", "source": "contract A { uint x; }"}),
                json.dumps({"id": "c", "source": "library Math { }"}),
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    log = tmp_path / "removals.jsonl"
    result = runner.invoke(main, ["dedup", str(corpus), "--log", str(log)])
    assert result.exit_code == 0
    kept = [json.loads(line) for line in result.stdout.splitlines()]
    assert kept == [
        {"id": "a", "source": "contract A { uint x; }"},
        {"id": "c", "source": "library Math { }"},
    ]
    assert "kept 2 of 3" in result.stderr
    removals = [json.loads(line) for line in log.read_text().splitlines()]
    assert removals == [{"removed_id": "b", "matched_kept_id": "a", "similarity": 1.0}]


def test_dedup_directory_corpus(runner, tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "one.sol").write_text("contract A { uint x; }", encoding="utf-8")
    (corpus / "two.sol").write_text("contract A { uint x; }", encoding="utf-8")
    (corpus / "three.sol").write_text("interface B { }", encoding="utf-8")
    out = tmp_path / "kept.jsonl"
    result = runner.invoke(main, ["dedup", str(corpus), "--out", str(out)])
    assert result.exit_code == 0
    kept = [json.loads(line)["id"] for line in out.read_text().splitlines()]
    assert kept == ["one.sol", "three.sol"]


def test_dedup_threshold_loosens_matching(runner, tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text(
        "\n".join(
            [
                json.dumps({"id": "a", "source": "uint a; uint b; uint c;"}),
                json.dumps({"id": "b", "source": "uint a; uint b; uint d;"}),
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    strict = runner.invoke(main, ["dedup", str(corpus), "--threshold", "0.99"])
    assert len(strict.stdout.splitlines()) == 2
    loose = runner.invoke(main, ["dedup", str(corpus), "--threshold", "0.5"])
    assert len(loose.stdout.splitlines()) == 1


def test_dedup_rejects_zero_threshold(runner, tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text(json.dumps({"id": "a", "source": "x"}) + "\n", encoding="utf-8")
    result = runner.invoke(main, ["dedup", str(corpus), "--threshold", "0"])
    assert result.exit_code == 2


def test_dedup_rejects_bad_corpus_lines(runner, tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text(json.dumps({"id": "a"}) + "\n", encoding="utf-8")
    result = runner.invoke(main, ["dedup", str(corpus)])
    assert result.exit_code == 2
    assert result.stderr.startswith("line 1:")


# -- windows ---------------------------------------------------------------------

def test_windows_emits_slices(runner, tmp_path):
    source = tmp_path / "long.sol"
    source.write_text("a b c d e f", encoding="utf-8")
    result = runner.invoke(
        main, ["windows", str(source), "--window", "4", "--stride", "2"]
    )
    assert result.exit_code == 0
    rows = [json.loads(line) for line in result.stdout.splitlines()]
    assert rows == [
        {"origin_id": "long.sol", "start": 0, "end": 4, "length": 4},
        {"origin_id": "long.sol", "start": 2, "end": 6, "length": 4},
    ]


def test_windows_short_stream_single_window(runner, tmp_path):
    source = tmp_path / "short.sol"
    source.write_text("contract A { }", encoding="utf-8")
    result = runner.invoke(main, ["windows", str(source)])
    assert result.exit_code == 0
    rows = [json.loads(line) for line in result.stdout.splitlines()]
    assert len(rows) == 1
    assert rows[0]["start"] == 0
    assert rows[0]["length"] == 4


def test_windows_stride_must_fit(runner, tmp_path):
    source = tmp_path / "x.sol"
    source.write_text("a", encoding="utf-8")
    result = runner.invoke(
        main, ["windows", str(source), "--window", "4", "--stride", "8"]
    )
    assert result.exit_code == 2
    assert "--stride must not exceed --window" in result.stderr


# -- train-toy ---------------------------------------------------------------------

def test_train_toy_csv(runner):
    result = runner.invoke(main, ["train-toy", "--steps", "4", "--seed", "3"])
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0] == "epoch,mean_reward,objective,mean_kl"
    assert len(lines) == 5
    assert "over 4 steps" in result.stderr


def test_train_toy_deterministic(runner):
    args = ["train-toy", "--steps", "6", "--seed", "11"]
    assert runner.invoke(main, args).stdout == runner.invoke(main, args).stdout


def test_train_toy_json_out(runner, tmp_path):
    out = tmp_path / "curve.json"
    result = runner.invoke(
        main,
        ["train-toy", "--steps", "3", "--format", "json", "--out", str(out)],
    )
    assert result.exit_code == 0
    curve = json.loads(out.read_text(encoding="utf-8"))
    assert [p["epoch"] for p in curve] == [0, 1, 2]
    assert set(curve[0]) == {"epoch", "mean_reward", "objective", "mean_kl"}
