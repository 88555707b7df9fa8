"""FastAPI surface over the report builders, with typed request/response models.

The CLI drives the same handlers in-process through ``dispatch``; running the
app under uvicorn (``modeforge serve``) exposes them over HTTP for other
clients.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, model_validator

from . import __version__
from .errors import ModeforgeError
from . import reports


# ---------------------------------------------------------------------------
# request models
# ---------------------------------------------------------------------------

class MetrologyRequest(BaseModel):
    state: str
    generator: Literal["nlr", "tlr"] = "nlr"
    sweep: Optional[str] = None


class EntangleRequest(BaseModel):
    state: str
    bipartition: Literal["LR", "updown"] = "LR"
    measures: list[Literal["entropy", "negativity", "witness"]] = Field(
        default_factory=lambda: ["entropy", "negativity", "witness"])


class TeleportRequest(BaseModel):
    resource: str
    m: int = Field(ge=0, le=reports.MAX_SWEEP_N, alias="M")
    variant: Literal["complete", "restricted"] = "complete"
    simulate: Literal["exact", "mc"] = "exact"
    seed: Optional[int] = Field(default=None, ge=0, lt=2 ** 64)
    samples: int = Field(default=100_000, ge=1, le=10_000_000)

    model_config = {"populate_by_name": True}

    @model_validator(mode="after")
    def _seed_iff_stochastic(self):
        if self.simulate == "mc" and self.seed is None:
            raise ValueError("the Monte-Carlo path requires an explicit seed")
        if self.simulate == "exact" and self.seed is not None:
            raise ValueError("a seed is only meaningful with --simulate mc")
        return self


class ParadoxRequest(BaseModel):
    zeta: float = Field(ge=0.0, le=1.0)
    xi: float = Field(ge=0.0, le=1.0)
    eta: float = Field(ge=0.0, le=1.0)
    theta: float = 0.0
    phi: float = 0.0
    omega: float = 0.0
    n: int = Field(default=2, ge=1, le=reports.MAX_SWEEP_N)


class ReproduceAllRequest(BaseModel):
    n_max: int = Field(default=8, ge=2, le=12, alias="Nmax")

    model_config = {"populate_by_name": True}


# ---------------------------------------------------------------------------
# response models
# ---------------------------------------------------------------------------

class MetrologyRow(BaseModel):
    N: int
    family: str
    params: str
    F_numeric: float
    F_closed_form: Optional[float]
    verdict: str


class MetrologyResponse(BaseModel):
    command: str
    generator: str
    rows: list[MetrologyRow]


class EntangleRow(BaseModel):
    measure: str
    value: float
    detail: Optional[str]


class EntangleResponse(BaseModel):
    command: str
    state: str
    bipartition: str
    mode_separable: bool
    rows: list[EntangleRow]


class TeleportOutcome(BaseModel):
    ell: int
    lam: int
    p: float
    overlap: float


class McStats(BaseModel):
    value: float
    stderr: float
    samples: int
    seed: int


class TeleportResponse(BaseModel):
    command: str
    resource: str
    M: int
    N: int
    variant: str
    complete: bool
    captured_probability: float
    f_closed: float
    f_sim: float
    outcomes: list[TeleportOutcome]
    mc: Optional[McStats] = None


class ParadoxResponse(BaseModel):
    command: str
    params: dict[str, float]
    probability: float
    negativity_xr: float
    verdicts: dict[str, bool]
    residual_amplitudes: list[list[Any]]


class ReportTable(BaseModel):
    columns: list[str]
    rows: list[dict[str, Any]]


class ReproduceAllResponse(BaseModel):
    command: str
    n_max: int
    tolerance: float
    all_pass: bool
    tables: dict[str, ReportTable]


class HealthResponse(BaseModel):
    status: str
    version: str


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------

def run_metrology(req: MetrologyRequest) -> dict:
    return reports.metrology_report(req.state, req.generator, req.sweep)


def run_entangle(req: EntangleRequest) -> dict:
    return reports.entangle_report(req.state, req.bipartition, list(req.measures))


def run_teleport(req: TeleportRequest) -> dict:
    return reports.teleport_report(req.resource, req.m, req.variant,
                                   req.simulate, req.seed, req.samples)


def run_paradox(req: ParadoxRequest) -> dict:
    return reports.paradox_report(req.zeta, req.xi, req.eta,
                                  req.theta, req.phi, req.omega, req.n)


def run_reproduce_all(req: ReproduceAllRequest) -> dict:
    return reports.reproduce_all_report(req.n_max)


COMMANDS = {
    "metrology": (MetrologyRequest, run_metrology),
    "entangle": (EntangleRequest, run_entangle),
    "teleport": (TeleportRequest, run_teleport),
    "paradox": (ParadoxRequest, run_paradox),
    "reproduce-all": (ReproduceAllRequest, run_reproduce_all),
}


def dispatch(command: str, payload: dict) -> dict:
    """Validate a payload against the command's request model and run it."""
    if command not in COMMANDS:
        raise ModeforgeError(f"unknown command {command!r}")
    model, handler = COMMANDS[command]
    return handler(model.model_validate(payload))


# ---------------------------------------------------------------------------
# app
# ---------------------------------------------------------------------------

app = FastAPI(title="modeforge", version=__version__)


@app.exception_handler(ModeforgeError)
async def _domain_error_handler(_request: Request, exc: ModeforgeError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.get("/health", response_model=HealthResponse)
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/metrology", response_model=MetrologyResponse)
def metrology_endpoint(req: MetrologyRequest) -> dict:
    return run_metrology(req)


@app.post("/entangle", response_model=EntangleResponse)
def entangle_endpoint(req: EntangleRequest) -> dict:
    return run_entangle(req)


@app.post("/teleport", response_model=TeleportResponse)
def teleport_endpoint(req: TeleportRequest) -> dict:
    return run_teleport(req)


@app.post("/paradox", response_model=ParadoxResponse)
def paradox_endpoint(req: ParadoxRequest) -> dict:
    return run_paradox(req)


@app.post("/reproduce-all", response_model=ReproduceAllResponse)
def reproduce_all_endpoint(req: ReproduceAllRequest) -> dict:
    return run_reproduce_all(req)
