"""HTTP front end: ``uvicorn muse.service:app`` or ``muse serve``."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from . import __version__
from .api import (
    EXIT_USAGE,
    ApiError,
    ClassifyReport,
    ClassifyRequest,
    EncodeReport,
    EncodeRequest,
    Health,
    OracleReport,
    OracleRequest,
    VerifyReport,
    VerifyRequest,
    do_classify,
    do_encode,
    do_oracle,
    do_verify,
    health,
)
from .solve import SolverSet


def create_app(solvers: SolverSet | None = None) -> FastAPI:
    """``solvers`` defaults to the configuration found at request time."""
    app = FastAPI(title="muse", version=__version__)

    @app.exception_handler(ApiError)
    async def _api_error(_: Request, exc: ApiError) -> JSONResponse:
        status = 400 if exc.exit_code == EXIT_USAGE else 422
        return JSONResponse({"error": exc.message, "exit_code": exc.exit_code}, status_code=status)

    @app.get("/health", response_model=Health)
    def get_health() -> Health:
        return health(solvers)

    @app.post("/classify", response_model=ClassifyReport)
    async def post_classify(req: ClassifyRequest) -> ClassifyReport:
        return await run_in_threadpool(do_classify, req)

    @app.post("/encode", response_model=EncodeReport)
    async def post_encode(req: EncodeRequest) -> EncodeReport:
        return await run_in_threadpool(do_encode, req)

    @app.post("/verify", response_model=VerifyReport)
    async def post_verify(req: VerifyRequest) -> VerifyReport:
        return await run_in_threadpool(do_verify, req, solvers)

    @app.post("/oracle", response_model=OracleReport)
    async def post_oracle(req: OracleRequest) -> OracleReport:
        return await run_in_threadpool(do_oracle, req)

    return app


app = create_app()
