"""Command-line interface.

Exit status: 0 valid, 1 invalid, 2 unknown, 3 timeout, 64 usage error,
65 rejected input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Callable, Sequence, TypeVar

from pydantic import BaseModel

from . import __version__, corpus
from .api import (
    BACKENDS,
    EXIT_DATAERR,
    EXIT_INVALID,
    EXIT_USAGE,
    EXIT_VALID,
    ApiError,
    ClassifyReport,
    ClassifyRequest,
    EncodeReport,
    EncodeRequest,
    OracleReport,
    OracleRequest,
    VerifyReport,
    VerifyRequest,
    do_classify,
    do_encode,
    do_oracle,
    do_verify,
)
from .oracle.backend import glue_values
from .solve import ENV_VAR, SolverSet, load_config

R = TypeVar("R", bound=BaseModel)

VALUE_OPTIONS = ("--domain", "--fallback-oracle")
EXIT_SIGPIPE = 141


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", required=True, type=Path, metavar="FILE")
    p.add_argument("--solution", required=True, type=Path, metavar="FILE")
    p.add_argument("--server", metavar="URL", help="send the request to a running `muse serve`")
    p.add_argument("--json", action="store_true", help="print a JSON report")


def _encoding(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=sorted(BACKENDS), default="auto")
    p.add_argument("--opt", metavar="LIST", help="comma list of reify, inline, qe; or none (default reify,inline)")
    p.add_argument("--dual-order", action="store_true", help="emit complement equations after their originals")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="muse", description="Verify synthesis candidates against fixed-point semantics.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="decide whether the solution satisfies the problem")
    _inputs(v)
    _encoding(v)
    v.add_argument("--portfolio", action="store_true", help="race every applicable encoding")
    v.add_argument("--fallback-oracle", metavar="LO..HI", help="bounded oracle verdict if the solvers give up")
    v.add_argument("--policy", choices=["stuck", "clamp"], default="stuck")
    v.add_argument("--timeout", type=float, metavar="SECONDS", help="override every backend's timeout")
    v.add_argument("--config", type=Path, metavar="FILE", help=f"solver config (default ${ENV_VAR} or ./solvers.toml)")

    e = sub.add_parser("encode", help="write the solver query without running it")
    _inputs(e)
    _encoding(e)
    e.add_argument("-o", "--output", type=Path, metavar="FILE")

    o = sub.add_parser("oracle", help="exact check over a finite integer interval")
    _inputs(o)
    o.add_argument("--domain", required=True, metavar="LO..HI")
    o.add_argument("--policy", choices=["stuck", "clamp"], default="stuck")
    o.add_argument("--depth", type=int, metavar="N", help="decide relations by derivations of height <= N")
    o.add_argument("--dump", action="store_true", help="print every computed relation")

    c = sub.add_parser("classify", help="show which encodings apply")
    _inputs(c)

    k = sub.add_parser("corpus", help="run the shipped examples and compare with expected verdicts")
    k.add_argument("--oracle-only", action="store_true")
    k.add_argument("--config", type=Path, metavar="FILE")
    k.add_argument("--json", action="store_true")

    s = sub.add_parser("serve", help="run the HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    return ap


# -- plumbing -----------------------------------------------------------------


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as e:
        raise ApiError(EXIT_DATAERR, f"cannot read {path}: {e.strerror}") from None


def _base(args) -> dict:
    return {
        "problem": _read(args.problem),
        "solution": _read(args.solution),
        "problem_name": str(args.problem),
        "solution_name": str(args.solution),
    }


def _call(args, route: str, req: BaseModel, local: Callable[[], R], model: type[R]) -> R:
    if not args.server:
        return local()
    import httpx

    try:
        resp = httpx.post(f"{args.server.rstrip('/')}/{route}", json=req.model_dump(), timeout=None)
    except httpx.HTTPError as e:
        raise ApiError(EXIT_USAGE, f"cannot reach {args.server}: {e}") from None
    if resp.status_code >= 400:
        try:
            body = resp.json()
            raise ApiError(int(body.get("exit_code", EXIT_DATAERR)), str(body.get("error", body)))
        except (ValueError, AttributeError):
            raise ApiError(EXIT_DATAERR, f"server answered {resp.status_code}") from None
    return model.model_validate(resp.json())


def _solvers(args) -> SolverSet | None:
    if getattr(args, "config", None) is None:
        return None
    try:
        return load_config(args.config)
    except ValueError as e:
        raise ApiError(EXIT_USAGE, str(e)) from None


def _emit_json(model: BaseModel, exclude: set[str] | None = None) -> None:
    print(json.dumps(model.model_dump(exclude=exclude), sort_keys=True))


# -- commands -----------------------------------------------------------------


def cmd_verify(args) -> int:
    req = VerifyRequest(
        **_base(args),
        backend=args.backend,
        opt=args.opt,
        dual_order=args.dual_order,
        portfolio=args.portfolio,
        fallback_domain=args.fallback_oracle,
        policy=args.policy,
        timeout_s=args.timeout,
    )
    report = _call(args, "verify", req, lambda: do_verify(req, _solvers(args)), VerifyReport)
    if args.json:
        print(report.line(), file=sys.stderr)
        _emit_json(report, {"detail", "bounded"})
    else:
        print(report.line())
    return report.exit_code


def cmd_encode(args) -> int:
    req = EncodeRequest(**_base(args), backend=args.backend, opt=args.opt, dual_order=args.dual_order)
    report = _call(args, "encode", req, lambda: do_encode(req), EncodeReport)
    cls = report.classification
    summary = f"classification: {cls.recommended} ({cls.reason}); encoded as {report.encoding_kind}"
    if args.json:
        _emit_json(report)
    elif args.output:
        args.output.write_text(report.text)
        print(summary)
    else:
        sys.stdout.write(report.text)
        print(summary, file=sys.stderr)
    if args.json and args.output:
        args.output.write_text(report.text)
    return EXIT_VALID


def cmd_oracle(args) -> int:
    req = OracleRequest(**_base(args), domain=args.domain, policy=args.policy, depth=args.depth, dump=args.dump)
    report = _call(args, "oracle", req, lambda: do_oracle(req), OracleReport)
    if args.json:
        _emit_json(report)
    else:
        print(f"{report.line()} [{report.method} on {report.domain}, {report.policy}]")
        if report.dump:
            print(report.dump)
    return report.exit_code


def cmd_classify(args) -> int:
    req = ClassifyRequest(**_base(args))
    report = _call(args, "classify", req, lambda: do_classify(req), ClassifyReport)
    if args.json:
        _emit_json(report)
        return EXIT_VALID
    print(f"recommended: {report.recommended} ({report.reason})")
    print(f"non-recursive on the candidate: {'yes' if report.non_recursive else 'no'}")
    print(f"CHC-like: {'yes' if report.chc_like else 'no'}")
    for rel, pol in report.spec_polarity.items():
        print(f"  {rel}: {pol}")
    print(f"applicable: {', '.join(report.applicable)}")
    return EXIT_VALID


def cmd_corpus(args) -> int:
    solvers = None if args.oracle_only else (_solvers(args) or load_config())
    rows = []
    for sem, sol, expected, domain, bounded_expected in corpus.CASES:
        base = {
            "problem": corpus.read(sem),
            "solution": corpus.read(sol),
            "problem_name": sem,
            "solution_name": sol,
        }
        row = {"problem": sem, "solution": sol, "expected": expected}
        ok = True
        if solvers is not None:
            rep = do_verify(VerifyRequest(**base), solvers)
            row["verify"] = rep.verdict
            ok &= rep.verdict in (expected, "unknown", "timeout")
        if domain is not None:
            orep = do_oracle(OracleRequest(**base, domain=domain))
            row["oracle"] = orep.verdict
            row["domain"] = domain
            ok &= orep.verdict == bounded_expected
        row["ok"] = ok
        rows.append(row)
        if not args.json:
            got = "  ".join(f"{k}={row[k]}" for k in ("verify", "oracle") if k in row)
            print(f"{'ok  ' if ok else 'FAIL'} {sem:15} {sol:17} expected={expected:8} {got}", flush=True)
    if args.json:
        print(json.dumps(rows, sort_keys=True))
    return EXIT_VALID if all(r["ok"] for r in rows) else EXIT_INVALID


def cmd_serve(args) -> int:
    try:
        import uvicorn
    except ImportError:
        print("muse serve needs uvicorn (pip install 'artifact[serve]')", file=sys.stderr)
        return EXIT_USAGE
    uvicorn.run("muse.service:app", host=args.host, port=args.port)
    return EXIT_VALID


COMMANDS = {
    "verify": cmd_verify,
    "encode": cmd_encode,
    "oracle": cmd_oracle,
    "classify": cmd_classify,
    "corpus": cmd_corpus,
    "serve": cmd_serve,
}


def main(argv: Sequence[str] | None = None) -> int:
    raw = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(glue_values(raw, VALUE_OPTIONS))
    except SystemExit as e:  # --help, --version and usage errors
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except ApiError as e:
        print(f"error: {e.message}", file=sys.stderr)
        return e.exit_code
    except BrokenPipeError:
        # reader went away (e.g. `| head`); keep the interpreter from
        # complaining again when it flushes stdout at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_SIGPIPE


if __name__ == "__main__":
    sys.exit(main())
