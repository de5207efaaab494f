"""Bounded μCLP backend for the solver adapter protocol.

Reads a μCLP file and prints ``valid`` or ``invalid`` for its goal, decided
exactly over a finite integer interval. With ``--depth`` a system whose goal
only needs least fixed points (or only greatest ones, via the dual) is
decided by derivation search with exact arithmetic instead, so witnesses may
leave the interval.

    python -m muse.oracle.backend QUERY.muclp --domain -8..8 [--depth 20]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..encode import MuclpSyntaxError, parse_muclp
from .domain import FiniteDomain, OracleError, Policy
from .fixpoint import eval_system, holds_in, needed_by
from .verify import derivation_goal_holds


def decide(text: str, domain: FiniteDomain, depth: int | None = None) -> bool:
    system = parse_muclp(text)
    if depth is not None:
        try:
            return derivation_goal_holds(system.equations, system.goal, domain, depth)
        except OracleError:
            pass  # mixed fixed points: fall back to full evaluation
    return holds_in(eval_system(needed_by(system.equations, system.goal), domain), system.goal)


def glue_values(argv: list[str], options: tuple[str, ...] = ("--domain",)) -> list[str]:
    """Rewrite ``--domain -4..4`` as ``--domain=-4..4`` so argparse does not
    mistake an interval with a negative bound for an option."""
    out: list[str] = []
    it = iter(argv)
    for a in it:
        if a in options:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="muse-bounded-muclp", description="bounded μCLP evaluation")
    ap.add_argument("file", type=Path)
    ap.add_argument("--domain", default="-8..8")
    ap.add_argument("--policy", choices=[p.value for p in Policy], default=Policy.STUCK.value)
    ap.add_argument("--depth", type=int)
    args = ap.parse_args(glue_values(sys.argv[1:] if argv is None else argv))
    try:
        domain = FiniteDomain.parse(args.domain, args.policy)
        ok = decide(args.file.read_text(), domain, args.depth)
    except (OSError, MuclpSyntaxError, OracleError) as e:
        print(f"unknown: {e}")
        return 2
    print("valid" if ok else "invalid")
    return 0


if __name__ == "__main__":
    sys.exit(main())
