"""Labeled Solidity contracts exercising every scanner category.

Each category ships as a pair: a contract that exhibits the flaw and a
minimally different one that does not.  The clean variants are written to
produce zero findings, so they double as false-positive probes.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from ..scanner import (
    ACCESS_CONTROL,
    ARRAY_BOUNDS,
    DELEGATECALL,
    ERROR_HANDLING,
    GAS_DOS,
    INTEGER_OVERFLOW,
    REENTRANCY,
    SELFDESTRUCT,
    STATE_VALIDATION,
    TIMESTAMP,
    TX_ORIGIN,
    VISIBILITY,
)

__all__ = ["Fixture", "MANIFEST", "load_fixture_corpus"]


@dataclass(frozen=True)
class Fixture:
    """One labeled contract: its expected category and whether it is flawed."""

    name: str
    category: str
    vulnerable: bool
    source: str


# Maps fixture stem to its category; both the _vulnerable and _clean
# variants of a stem must exist as .sol files next to this module.
MANIFEST: dict[str, str] = {
    "reentrancy": REENTRANCY,
    "array_bounds": ARRAY_BOUNDS,
    "access_control": ACCESS_CONTROL,
    "state_validation": STATE_VALIDATION,
    "integer_overflow": INTEGER_OVERFLOW,
    "error_handling": ERROR_HANDLING,
    "timestamp": TIMESTAMP,
    "gas_dos": GAS_DOS,
    "visibility": VISIBILITY,
    "tx_origin": TX_ORIGIN,
    "selfdestruct": SELFDESTRUCT,
    "delegatecall": DELEGATECALL,
}


def load_fixture_corpus() -> list[Fixture]:
    """Read every fixture contract bundled with the package."""
    root = resources.files(__package__)
    corpus: list[Fixture] = []
    for stem, category in MANIFEST.items():
        for suffix, vulnerable in (("vulnerable", True), ("clean", False)):
            name = f"{stem}_{suffix}"
            source = (root / f"{name}.sol").read_text(encoding="utf-8")
            corpus.append(Fixture(name, category, vulnerable, source))
    return corpus
