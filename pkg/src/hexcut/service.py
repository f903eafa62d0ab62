"""HTTP front end for the cut-cell engine.

Thin FastAPI wrapper: every endpoint validates a job model, delegates to
``hexcut.jobs``, and returns the matching response model.  No geometry
logic lives here.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .errors import DegeneracyError, HexcutError, InputError
from .jobs import cut_response, run_compare, run_cut, run_npac, run_shell
from .schemas import (
    CompareJob,
    CompareResponse,
    CutJob,
    CutResponse,
    NpacJob,
    NpacResponse,
    ShellJob,
    ShellResponse,
)

app = FastAPI(title="hexcut", version=__version__)

_STATUS = {
    InputError: 400,
    DegeneracyError: 422,
}


@app.exception_handler(HexcutError)
async def _hexcut_error(request: Request, exc: HexcutError) -> JSONResponse:
    status = 500
    for klass, code in _STATUS.items():
        if isinstance(exc, klass):
            status = code
            break
    body = {"error": type(exc).__name__, "detail": str(exc)}
    if isinstance(exc, DegeneracyError) and exc.cell_id is not None:
        body["cell_id"] = exc.cell_id
    return JSONResponse(status_code=status, content=body)


@app.get("/health")
async def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/v1/cut", response_model=CutResponse)
async def cut(job: CutJob) -> CutResponse:
    return cut_response(run_cut(job), include_mesh=job.include_mesh)


@app.post("/v1/npac", response_model=NpacResponse)
async def npac(job: NpacJob) -> NpacResponse:
    return run_npac(job)


@app.post("/v1/shell", response_model=ShellResponse)
async def shell(job: ShellJob) -> ShellResponse:
    _, resp = run_shell(job)
    return resp


@app.post("/v1/compare", response_model=CompareResponse)
async def compare(job: CompareJob) -> CompareResponse:
    return run_compare(job)
