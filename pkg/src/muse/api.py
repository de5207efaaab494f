"""Request and response models shared by the HTTP service and the CLI.

Every operation is a plain function from a request model to a response
model. The service exposes them over HTTP; the CLI calls them in process or,
with ``--server``, through the service.
"""

from __future__ import annotations

import re
from typing import Literal, Optional

from pydantic import BaseModel, Field

from . import __version__
from .analysis import SPLIT, classify
from .core import Problem, Solution, Verdict
from .encode import CHC, COCHC, MUCLP, SMT, Optimizations, encode
from .frontend import parse_problem, parse_solution
from .oracle import DEFAULT_CAP, FiniteDomain, OracleError, Policy, derivation_holds, oracle_run
from .solve import AUTO, SolverSet, VerifyOptions, load_config, portfolio, verify

EXIT_VALID, EXIT_INVALID, EXIT_UNKNOWN, EXIT_TIMEOUT = 0, 1, 2, 3
EXIT_USAGE, EXIT_DATAERR = 64, 65
EXIT_FOR_VERDICT = {"valid": EXIT_VALID, "invalid": EXIT_INVALID, "unknown": EXIT_UNKNOWN, "timeout": EXIT_TIMEOUT}

BACKENDS = {"auto": AUTO, "smt": SMT, "chc": CHC, "cochc": COCHC, "split": SPLIT, "muclp": MUCLP}
BackendName = Literal["auto", "smt", "chc", "cochc", "split", "muclp"]
PolicyName = Literal["stuck", "clamp"]


class ApiError(Exception):
    """A rejected request; ``exit_code`` is 64 (usage) or 65 (bad input)."""

    def __init__(self, exit_code: int, message: str) -> None:
        super().__init__(message)
        self.exit_code = exit_code
        self.message = message


# -- requests -----------------------------------------------------------------


class Inputs(BaseModel):
    problem: str = Field(description="problem file contents")
    solution: str = Field(description="solution file contents")
    problem_name: str = "<problem>"
    solution_name: str = "<solution>"


class ClassifyRequest(Inputs):
    pass


class EncodeRequest(Inputs):
    backend: BackendName = "auto"
    opt: Optional[str] = Field(None, description='e.g. "reify,inline,qe" or "none"')
    dual_order: bool = False


class VerifyRequest(EncodeRequest):
    portfolio: bool = False
    fallback_domain: Optional[str] = Field(None, description="LO..HI for --fallback-oracle")
    policy: PolicyName = "stuck"
    timeout_s: Optional[float] = Field(None, gt=0)


class OracleRequest(Inputs):
    domain: str
    policy: PolicyName = "stuck"
    depth: Optional[int] = Field(None, ge=0)
    dump: bool = False


# -- responses ----------------------------------------------------------------


class ClassifyReport(BaseModel):
    recommended: str
    reason: str
    non_recursive: bool
    chc_like: bool
    spec_polarity: dict[str, str]
    applicable: list[str]
    splittable: bool


class EncodeReport(BaseModel):
    encoding_kind: str
    optimizations: list[str]
    falsify: bool
    text: str
    classification: ClassifyReport


class VerifyReport(BaseModel):
    verdict: str
    backend: str
    encoding_kind: str
    optimizations: list[str]
    wall_ms: int
    detail: str = ""
    bounded: bool = False

    @property
    def exit_code(self) -> int:
        return EXIT_FOR_VERDICT[self.verdict]

    def line(self) -> str:
        return str(Verdict(self.verdict, self.detail, self.bounded))


class OracleReport(BaseModel):
    verdict: str
    domain: str
    policy: str
    method: str
    bounded: bool = True
    dump: Optional[str] = None

    @property
    def exit_code(self) -> int:
        return EXIT_FOR_VERDICT[self.verdict]

    def line(self) -> str:
        return str(Verdict(self.verdict, bounded=True))


class Health(BaseModel):
    status: str = "ok"
    version: str = __version__
    backends: list[str] = []


# -- operations ---------------------------------------------------------------


def load_inputs(req: Inputs) -> tuple[Problem, Solution]:
    try:
        problem = parse_problem(req.problem, req.problem_name)
        return problem, parse_solution(req.solution, problem, req.solution_name)
    except ValueError as e:
        raise ApiError(EXIT_DATAERR, str(e)) from None


def parse_domain(text: str, policy: str = "stuck") -> FiniteDomain:
    m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", text)
    if not m:
        raise ApiError(EXIT_USAGE, f"domain must look like LO..HI, got {text!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo > hi:
        raise ApiError(EXIT_USAGE, f"empty interval {lo}..{hi}")
    try:
        return FiniteDomain(lo, hi, Policy(policy), DEFAULT_CAP)
    except OracleError as e:
        raise ApiError(EXIT_DATAERR, str(e)) from None


def parse_opts(text: str | None, dual_order: bool = False) -> Optimizations:
    try:
        opts = Optimizations.parse(text)
    except ValueError as e:
        raise ApiError(EXIT_USAGE, str(e)) from None
    if dual_order:
        opts = Optimizations(opts.reify, opts.inline, opts.qe, True)
    return opts


def classify_report(problem: Problem, solution: Solution) -> ClassifyReport:
    cls = classify(problem, solution)
    return ClassifyReport(
        recommended=cls.recommended,
        reason=cls.reason,
        non_recursive=cls.non_recursive,
        chc_like=cls.chc_like,
        spec_polarity={k: v.value for k, v in sorted(cls.spec_polarity.items())},
        applicable=cls.applicable(),
        splittable=cls.split is not None,
    )


def do_classify(req: ClassifyRequest) -> ClassifyReport:
    return classify_report(*load_inputs(req))


def do_encode(req: EncodeRequest) -> EncodeReport:
    problem, solution = load_inputs(req)
    opts = parse_opts(req.opt, req.dual_order)
    report = classify_report(problem, solution)
    kind = report.recommended if req.backend == "auto" else BACKENDS[req.backend]
    if kind == SPLIT:
        raise ApiError(EXIT_USAGE, "a split query is two files; encode each half with --backend chc / cochc")
    try:
        query = encode(problem, solution, kind, opts)
    except ValueError as e:
        raise ApiError(EXIT_DATAERR, str(e)) from None
    return EncodeReport(
        encoding_kind=kind,
        optimizations=list(query.optimizations),
        falsify=query.falsify,
        text=query.text,
        classification=report,
    )


def do_verify(req: VerifyRequest, solvers: SolverSet | None = None) -> VerifyReport:
    problem, solution = load_inputs(req)
    options = VerifyOptions(
        backend=BACKENDS[req.backend],
        opts=parse_opts(req.opt, req.dual_order),
        fallback_domain=parse_domain(req.fallback_domain, req.policy) if req.fallback_domain else None,
    )
    try:
        solvers = (solvers or load_config()).with_timeout(req.timeout_s)
        run = (portfolio if req.portfolio else verify)(problem, solution, solvers, options)
    except ValueError as e:
        raise ApiError(EXIT_DATAERR, str(e)) from None
    return VerifyReport(
        verdict=run.verdict.kind,
        backend=run.backend,
        encoding_kind=run.kind,
        optimizations=list(run.optimizations),
        wall_ms=run.wall_ms,
        detail=run.verdict.reason,
        bounded=run.verdict.bounded,
    )


def do_oracle(req: OracleRequest) -> OracleReport:
    problem, solution = load_inputs(req)
    domain = parse_domain(req.domain, req.policy)
    try:
        if req.depth is not None:
            ok = derivation_holds(problem, solution, domain, req.depth)
            return OracleReport(
                verdict="valid" if ok else "invalid",
                domain=str(domain),
                policy=domain.policy.value,
                method=f"derivation search, height <= {req.depth}",
            )
        verdict, interp = oracle_run(problem, solution, domain)
    except ValueError as e:
        raise ApiError(EXIT_DATAERR, str(e)) from None
    return OracleReport(
        verdict=verdict.kind,
        domain=str(domain),
        policy=domain.policy.value,
        method="fixed-point evaluation",
        dump=interp.dump() if req.dump else None,
    )


def health(solvers: SolverSet | None = None) -> Health:
    try:
        solvers = solvers or load_config()
    except ValueError:
        return Health(status="degraded")
    return Health(backends=[f"{b.name} ({b.kind})" for b in solvers.backends])
