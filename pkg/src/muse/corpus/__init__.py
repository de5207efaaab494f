"""Example problems and candidate solutions shipped with the package."""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path

# (problem, solution, verdict over the integers, oracle domain, verdict on that domain)
CASES = [
    ("max2.sem", "max2.sol", "valid", "-4..4", "valid"),
    ("max2.sem", "max2_swapped.sol", "invalid", "-4..4", "invalid"),
    ("loop.sem", "loop.sol", "valid", "0..6", "valid"),
    ("loop.sem", "loop_triple.sol", "invalid", "0..6", "invalid"),
    ("loop_total.sem", "loop.sol", "valid", None, None),
    ("loop_total.sem", "loop_triple.sol", "invalid", "0..6", "invalid"),
    ("loop_both.sem", "loop.sol", "valid", None, None),
    ("loop_both.sem", "loop_triple.sol", "invalid", "0..6", "invalid"),
    # commutative on non-negative inputs only: x=-1, y=0 is a counterexample
    ("loop_comm.sem", "plus.sol", "invalid", "0..4", "valid"),
    ("loop_comm.sem", "loop.sol", "invalid", "0..4", "invalid"),
    ("order_ab.sem", "unit.sol", "invalid", "-3..3", "invalid"),
    ("order_ba.sem", "unit.sol", "valid", "-3..3", "valid"),
    ("buchi.sem", "buchi.sol", "valid", "-1..6", "valid"),
    ("buchi.sem", "buchi_stay.sol", "invalid", "-1..6", "invalid"),
]


def path(name: str) -> Path:
    return Path(str(files(__name__).joinpath(name)))


def read(name: str) -> str:
    return files(__name__).joinpath(name).read_text()


def names() -> list[str]:
    return sorted(p.name for p in files(__name__).iterdir() if p.name.endswith((".sem", ".sol")))
