"""HTTP service wrapping the design and Monte-Carlo operations.

Every CLI subcommand maps onto one endpoint; CSV artifacts travel through
responses as opaque text so their bytes are exactly what the engine wrote.
"""

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import harness
from .harness import (
    ConfigError,
    DIST_COLUMNS,
    NMSE_COLUMNS,
    SystemConfig,
    distribution_rows,
    rows_to_csv,
)


class ConfigModel(BaseModel):
    """Request-side mirror of SystemConfig."""

    n_t: int = 64
    n_r: int = 16
    l_t: int = 8
    l_r: int = 4
    grid_multiplier: float = 1.5
    g_t: Optional[int] = None
    g_r: Optional[int] = None
    m_x: int = 4
    n_p: int = 4
    snr_db: list = [-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]
    trials: int = 500
    master_seed: int = 12345
    b_ps: int = 6
    codebook_kind: str = "proposed"
    gain_variance: float = 1.0

    def to_config(self):
        return SystemConfig(**self.model_dump())


class DesignRequest(BaseModel):
    config: ConfigModel = ConfigModel()
    workers: Optional[int] = None


class DesignResponse(BaseModel):
    n_t: int
    l_t: int
    m_x: int
    codebook_kind: str
    ordering: list
    pilot_columns: list
    coherence: float
    master_seed: int
    wall_seconds: float


class DistributionRequest(BaseModel):
    config: ConfigModel = ConfigModel()
    draws: int = 20000
    workers: Optional[int] = None


class DistributionResponse(BaseModel):
    m_x: int
    draws: int
    seed: int
    proposed: float
    mean: float
    min: float
    max: float
    csv: str


class SweepRequest(BaseModel):
    config: ConfigModel = ConfigModel()
    axis: str = "snr"
    workers: Optional[int] = None


class SweepResponse(BaseModel):
    rows: list
    csv: str


class ReproduceRequest(BaseModel):
    config: ConfigModel = ConfigModel()
    target: str
    draws: int = 20000
    workers: Optional[int] = None


class ReproduceResponse(BaseModel):
    target: str
    files: dict


def create_app():
    app = FastAPI(title="lowcoh", version=harness._package_version())

    @app.get("/health")
    def health():
        return {"status": "ok", "version": harness._package_version()}

    @app.post("/design", response_model=DesignResponse)
    def design(request: DesignRequest):
        try:
            _, report = harness.run_design(request.config.to_config(), request.workers)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return DesignResponse(**report)

    @app.post("/coherence-dist", response_model=DistributionResponse)
    def coherence_dist(request: DistributionRequest):
        try:
            dist = harness.run_coherence_distribution(
                request.config.to_config(), draws=request.draws, workers=request.workers
            )
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        csv_text = rows_to_csv(distribution_rows(dist), DIST_COLUMNS)
        return DistributionResponse(
            m_x=dist["m_x"],
            draws=dist["draws"],
            seed=dist["seed"],
            proposed=dist["proposed"],
            mean=dist["mean"],
            min=dist["min"],
            max=dist["max"],
            csv=csv_text,
        )

    @app.post("/nmse", response_model=SweepResponse)
    def nmse_sweep(request: SweepRequest):
        try:
            rows = harness.run_nmse_sweep(
                request.config.to_config(), request.axis, workers=request.workers
            )
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return SweepResponse(rows=rows, csv=rows_to_csv(rows, NMSE_COLUMNS))

    @app.post("/reproduce", response_model=ReproduceResponse)
    def reproduce(request: ReproduceRequest):
        try:
            files = harness.reproduce(
                request.target,
                request.config.to_config(),
                workers=request.workers,
                draws=request.draws,
            )
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return ReproduceResponse(target=request.target, files=files)

    return app


app = create_app()
