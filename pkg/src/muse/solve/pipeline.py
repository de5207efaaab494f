"""From a (problem, solution) pair to a verdict: pick an encoding, emit it,
and run the configured solvers."""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..analysis import CHC, COCHC, MUCLP, SMT, SPLIT, Classification, classify
from ..core import Problem, Solution, Verdict, unknown
from ..encode import Optimizations, encode
from ..oracle import FiniteDomain, oracle_verify
from .config import SolverSet
from .runner import SolverRun, run_backend

AUTO = "auto"
KINDS = (SMT, CHC, COCHC, SPLIT, MUCLP)


@dataclass
class VerifyOptions:
    backend: str = AUTO  # an encoding kind or "auto"
    opts: Optimizations = field(default_factory=Optimizations)
    fallback_domain: FiniteDomain | None = None


def _run_kind(
    problem: Problem,
    solution: Solution,
    kind: str,
    opts: Optimizations,
    solvers: SolverSet,
    classification: Classification,
    cancel: threading.Event | None = None,
) -> SolverRun:
    if kind == SPLIT:
        return _run_split(problem, solution, opts, solvers, classification, cancel)
    config = solvers.for_encoding(kind)
    if config is None:
        return SolverRun(kind, "-", unknown(f"no backend configured for {kind}"), optimizations=tuple(opts.names))
    query = encode(problem, solution, kind, opts)
    return run_backend(query, config, cancel)


def combine_split(neg: Verdict, pos: Verdict) -> Verdict:
    """Both halves must hold."""
    if neg.kind == "invalid" or pos.kind == "invalid":
        return Verdict("invalid")
    if neg.kind == "valid" and pos.kind == "valid":
        return Verdict("valid")
    return unknown(f"split halves: {neg.kind}, {pos.kind}")


def _run_split(problem, solution, opts, solvers, classification, cancel) -> SolverRun:
    if classification.split is None:
        return SolverRun(SPLIT, "-", unknown("specification does not split"), optimizations=tuple(opts.names))
    pos_spec, neg_spec = classification.split
    start = time.monotonic()
    neg = _run_kind(problem.with_spec(neg_spec), solution, CHC, opts, solvers, classification, cancel)
    if neg.verdict.kind == "invalid":
        parts = [neg]
    else:
        pos = _run_kind(problem.with_spec(pos_spec), solution, COCHC, opts, solvers, classification, cancel)
        parts = [neg, pos]
    verdict = parts[0].verdict if len(parts) == 1 else combine_split(parts[0].verdict, parts[1].verdict)
    backend = "+".join(p.backend for p in parts)
    return SolverRun(SPLIT, backend, verdict, time.monotonic() - start, optimizations=tuple(opts.names), parts=parts)


def verify(
    problem: Problem,
    solution: Solution,
    solvers: SolverSet,
    options: VerifyOptions | None = None,
) -> SolverRun:
    """Classify, encode per the recommendation (or the forced kind) and run."""
    options = options or VerifyOptions()
    start = time.monotonic()
    cls = classify(problem, solution)
    kind = cls.recommended if options.backend == AUTO else options.backend
    run = _run_kind(problem, solution, kind, options.opts, solvers, cls)
    run.wall_s = time.monotonic() - start
    return _fallback(problem, solution, run, options)


def _fallback(problem, solution, run: SolverRun, options: VerifyOptions) -> SolverRun:
    if run.verdict.definitive or options.fallback_domain is None:
        return run
    start = time.monotonic()
    verdict = oracle_verify(problem, solution, options.fallback_domain)
    reason = f"{verdict.reason}; backend said {run.verdict.kind}"
    return SolverRun(
        run.kind,
        "oracle",
        Verdict(verdict.kind, reason, bounded=True),
        run.wall_s + time.monotonic() - start,
        run.output,
        run.optimizations,
        [run],
    )


def applicable_kinds(cls: Classification, solvers: SolverSet) -> list[str]:
    kinds = []
    for kind in cls.applicable():
        if kind == SPLIT:
            ok = solvers.for_encoding(CHC) and solvers.for_encoding(COCHC)
        else:
            ok = solvers.for_encoding(kind) is not None
        if ok:
            kinds.append(kind)
    return kinds


def portfolio(
    problem: Problem,
    solution: Solution,
    solvers: SolverSet,
    options: VerifyOptions | None = None,
) -> SolverRun:
    """Run every applicable encoding at once; the first definitive answer
    wins and the other runs are cancelled. Without a definitive answer a
    timeout is reported in preference to an unknown."""
    options = options or VerifyOptions()
    start = time.monotonic()
    cls = classify(problem, solution)
    kinds = applicable_kinds(cls, solvers)
    if not kinds:
        run = SolverRun(AUTO, "-", unknown("no applicable backend configured"), optimizations=tuple(options.opts.names))
        return _fallback(problem, solution, run, options)
    cancel = threading.Event()
    lock = threading.Lock()
    winner: list[SolverRun] = []

    def attempt(kind: str) -> SolverRun:
        try:
            run = _run_kind(problem, solution, kind, options.opts, solvers, cls, cancel)
        except ValueError as e:  # encoding not applicable after all
            run = SolverRun(kind, "-", unknown(str(e)), optimizations=tuple(options.opts.names))
        if run.verdict.definitive:
            with lock:
                if not winner:
                    winner.append(run)
                    cancel.set()
        return run

    with ThreadPoolExecutor(max_workers=len(kinds), thread_name_prefix="muse-portfolio") as pool:
        runs = list(pool.map(attempt, kinds))
    if winner:
        best = winner[0]
    else:
        best = next((r for r in runs if r.verdict.kind == "timeout"), runs[0])
    result = SolverRun(
        best.kind, best.backend, best.verdict, time.monotonic() - start, best.output, best.optimizations, runs
    )
    return _fallback(problem, solution, result, options)
