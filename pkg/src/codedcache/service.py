"""HTTP facade over the simulator.

The CLI talks to these endpoints in-process by default; `codedcache serve`
exposes the same app over the network.  Request validation errors surface
as 422 (model shape) or 400 (domain rules).
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from .analysis import topology_extremes
from .placement import SystemConfig
from .sweeps import MODES, SweepSpec, run_replay, run_sweep, run_verify
from .topology import topology_from_json

Scalar = int | float | str


class ConfigBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    P: int
    K: int
    N: int
    rho: int
    M_U: Scalar
    M_S: Scalar
    F: int | None = None

    def to_config(self) -> SystemConfig:
        return SystemConfig(
            P=self.P, K=self.K, N=self.N, rho=self.rho,
            M_U=self.M_U, M_S=self.M_S, F=self.F,
        )


class VerifyBody(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    config: ConfigBody
    seed: int = 0
    trials: int = 20
    enumerate_all: bool = Field(False, alias="enumerate")
    bound: int = 10_000_000
    corrupt_generator: bool = False  # fault-injection self-test
    file_bytes: int = 96


class VerifyResponse(BaseModel):
    passed: bool
    cases: int
    decode_checks: int
    decode_ok: int
    count_identity_ok: bool
    audit_ok: bool
    cover_floor_ok: bool
    failures: list[str]


class SweepBody(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    P: int
    K: int
    N: int
    rho: list[int] | int
    M_U: list[Scalar] | Scalar
    M_S: list[Scalar] | Scalar
    mode: str = "both"
    method: str = "both"
    trials: int = 100
    seed: int = 0
    enumerate_all: bool = Field(False, alias="enumerate")
    bound: int = 10_000_000

    def to_spec(self) -> SweepSpec:
        return SweepSpec.from_dict({
            "P": self.P, "K": self.K, "N": self.N,
            "rho": self.rho, "M_U": self.M_U, "M_S": self.M_S,
            "mode": self.mode, "method": self.method,
            "trials": self.trials, "seed": self.seed,
            "enumerate": self.enumerate_all, "bound": self.bound,
        })


class SweepResponse(BaseModel):
    rows: int
    csv: str


class ReplayBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    topology: dict | str  # {"Z": [[server indices]...]} or its JSON text
    config: ConfigBody


class ReplayResponse(BaseModel):
    q: list[int]
    counts_successive: list[int]
    counts_parallel: list[int]
    message_fraction: str
    T_successive: float
    T_successive_exact: str
    T_parallel: float
    T_parallel_exact: str


class ExtremesBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ConfigBody
    mode: str = "both"


class ExtremeEntry(BaseModel):
    mode: str
    best_q: list[int]
    best_T: float
    best_T_exact: str
    worst_q: list[int]
    worst_T: float
    worst_T_exact: str


class ExtremesResponse(BaseModel):
    results: list[ExtremeEntry]


def create_app() -> FastAPI:
    app = FastAPI(title="codedcache", version="0.1.0")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/verify", response_model=VerifyResponse)
    def verify(body: VerifyBody) -> VerifyResponse:
        try:
            result = run_verify(
                body.config.to_config(),
                seed=body.seed,
                trials=body.trials,
                enumerate_all=body.enumerate_all,
                bound=body.bound,
                corrupt_generator=body.corrupt_generator,
                file_bytes=body.file_bytes,
            )
        except (ValueError, TypeError) as e:
            raise HTTPException(status_code=400, detail=str(e))
        return VerifyResponse(**result.to_dict())

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(body: SweepBody) -> SweepResponse:
        try:
            result = run_sweep(body.to_spec())
        except (ValueError, TypeError) as e:
            raise HTTPException(status_code=400, detail=str(e))
        return SweepResponse(rows=len(result.rows), csv=result.csv)

    @app.post("/replay", response_model=ReplayResponse)
    def replay(body: ReplayBody) -> ReplayResponse:
        try:
            config = body.config.to_config()
            topo = topology_from_json(body.topology, config)
            report = run_replay(topo, config)
        except (ValueError, TypeError, KeyError) as e:
            raise HTTPException(status_code=400, detail=str(e))
        return ReplayResponse(**report.to_dict())

    @app.post("/extremes", response_model=ExtremesResponse)
    def extremes(body: ExtremesBody) -> ExtremesResponse:
        modes = MODES if body.mode == "both" else (body.mode,)
        try:
            config = body.config.to_config()
            entries = []
            for mode in modes:
                ext = topology_extremes(config, mode)
                entries.append(ExtremeEntry(
                    mode=mode,
                    best_q=list(ext.best_q),
                    best_T=float(ext.best_T),
                    best_T_exact=str(ext.best_T),
                    worst_q=list(ext.worst_q),
                    worst_T=float(ext.worst_T),
                    worst_T_exact=str(ext.worst_T),
                ))
        except (ValueError, TypeError) as e:
            raise HTTPException(status_code=400, detail=str(e))
        return ExtremesResponse(results=entries)

    return app


app = create_app()
