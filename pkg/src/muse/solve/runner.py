"""Running one encoded query through one external solver process."""

from __future__ import annotations

import os
import re
import signal
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..core import TIMEOUT, Verdict, unknown
from ..encode import CHC, SMT, EncodedQuery
from .config import SolverConfig

SUFFIX = {SMT: ".smt2", CHC: ".smt2"}
POLL_S = 0.02


@dataclass
class SolverRun:
    """Outcome of one solver invocation, or of a combination of several."""

    kind: str
    backend: str
    verdict: Verdict
    wall_s: float = 0.0
    output: str = ""
    optimizations: tuple[str, ...] = ()
    parts: list[SolverRun] = field(default_factory=list)

    @property
    def wall_ms(self) -> int:
        return round(self.wall_s * 1000)


def classify_output(text: str, config: SolverConfig) -> Verdict | None:
    """The verdict whose pattern matches earliest in ``text``."""
    hits = []
    for kind, rx in (("valid", config.valid_regex), ("invalid", config.invalid_regex)):
        m = re.search(rx, text, re.MULTILINE)
        if m:
            hits.append((m.start(), kind))
    if not hits:
        return None
    return Verdict(min(hits)[1])


def _flip(v: Verdict) -> Verdict:
    if v.kind == "valid":
        return Verdict("invalid", v.reason, v.bounded)
    if v.kind == "invalid":
        return Verdict("valid", v.reason, v.bounded)
    return v


def _kill(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass


def run_backend(
    query: EncodedQuery,
    config: SolverConfig,
    cancel: threading.Event | None = None,
) -> SolverRun:
    """Write ``query.text`` to a file, run the solver on it in its own process
    group, and map its output to a verdict."""
    run = SolverRun(query.kind, config.name, unknown("not run"), optimizations=tuple(query.optimizations))
    with tempfile.TemporaryDirectory(prefix="muse-") as tmp:
        path = Path(tmp) / f"query{SUFFIX.get(query.kind, '.muclp')}"
        path.write_text(query.text)
        start = time.monotonic()
        try:
            proc = subprocess.Popen(
                config.command(path),
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                stdin=subprocess.DEVNULL,
                text=True,
                start_new_session=True,
            )
        except (OSError, ValueError) as e:
            run.verdict = unknown(f"spawn: {e}")
            return run
        out = ""
        try:
            while True:
                left = config.timeout_s - (time.monotonic() - start)
                if left <= 0:
                    _kill(proc)
                    out, _ = proc.communicate()
                    run.verdict = TIMEOUT
                    break
                if cancel is not None and cancel.is_set():
                    _kill(proc)
                    out, _ = proc.communicate()
                    run.verdict = unknown("cancelled")
                    break
                try:
                    out, _ = proc.communicate(timeout=min(POLL_S, left))
                except subprocess.TimeoutExpired:
                    continue
                found = classify_output(out, config)
                if found is None:
                    run.verdict = unknown(f"unrecognized output (exit {proc.returncode}): {out.strip()[:200]}")
                else:
                    run.verdict = _flip(found) if query.falsify else found
                break
        finally:
            if proc.poll() is None:
                _kill(proc)
                proc.communicate()
            # the group may outlive its leader
            _kill(proc)
        run.wall_s = time.monotonic() - start
        run.output = out or ""
    return run
