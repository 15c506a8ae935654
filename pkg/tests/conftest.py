"""Shared fixtures, including one-time solc provisioning.

A real compiler is looked up in this order: the SOLRL_SOLC_DIR environment
variable, a previously provisioned cache under .solc-cache/, a solc on PATH,
and finally `npm install solc` wrapped in a tiny shell shim. Tests that need
to actually compile skip when none of these pan out.
"""

from __future__ import annotations

import os
import shutil
import stat
import subprocess
from pathlib import Path

import pytest

from solrl.compile_gate import CompilerRegistry

_CACHE = Path(__file__).resolve().parent.parent / ".solc-cache"


def _write_shim(directory: Path, name: str, body: str) -> Path:
    path = directory / name
    path.write_text(body, encoding="utf-8")
    path.chmod(path.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return path


def make_fake_solc(directory: Path, name: str, version: str) -> Path:
    """Stub executable that only answers --version; never actually compiles."""
    return _write_shim(
        directory,
        name,
        "#!/bin/sh\n"
        "echo 'solc, the solidity compiler commandline interface'\n"
        f"echo 'Version: {version}+commit.0000000.Linux.g++'\n",
    )


def _provision_via_npm() -> Path | None:
    bin_dir = _CACHE / "bin"
    shim = bin_dir / "solc"
    entry = _CACHE / "node_modules" / "solc" / "solc.js"
    if shim.is_file() and entry.is_file():
        return bin_dir
    if shutil.which("npm") is None or shutil.which("node") is None:
        return None
    _CACHE.mkdir(exist_ok=True)
    try:
        subprocess.run(
            ["npm", "install", "--no-fund", "--no-audit", "solc"],
            cwd=_CACHE,
            capture_output=True,
            timeout=600,
            check=True,
        )
    except (subprocess.SubprocessError, OSError):
        return None
    if not entry.is_file():
        return None
    bin_dir.mkdir(exist_ok=True)
    _write_shim(bin_dir, "solc", f'#!/bin/sh\nexec node "{entry}" "$@"\n')
    return bin_dir


@pytest.fixture(scope="session")
def solc_registry() -> CompilerRegistry:
    """Registry over a real compiler; skips dependent tests when none exists."""
    env_dir = os.environ.get("SOLRL_SOLC_DIR")
    if env_dir:
        registry = CompilerRegistry(solc_dir=env_dir, use_path=False)
        if registry.discover():
            return registry
    registry = CompilerRegistry(solc_dir=None, use_path=True, env={})
    if registry.discover():
        return registry
    bin_dir = _provision_via_npm()
    if bin_dir is not None:
        registry = CompilerRegistry(solc_dir=bin_dir, use_path=False)
        if registry.discover():
            return registry
    pytest.skip("no Solidity compiler available (set SOLRL_SOLC_DIR or install npm)")


@pytest.fixture()
def fake_solc_dir(tmp_path: Path) -> Path:
    """Directory holding stub compilers for version-resolution tests."""
    make_fake_solc(tmp_path, "solc-0.7.6", "0.7.6")
    make_fake_solc(tmp_path, "solc-0.8.19", "0.8.19")
    make_fake_solc(tmp_path, "solc-0.8.25", "0.8.25")
    return tmp_path
