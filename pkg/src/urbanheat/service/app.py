"""What-if prediction HTTP service.

The model is loaded once at startup and shared immutably between requests;
prediction is pure, so identical requests always get identical responses and
the service path cannot drift from the library path the CLI uses.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..grids import BBox, GridSpec, Raster
from ..metrics import predict_grid
from ..models import load_model, model_id
from ..volume import gaussian_kernel
from .schemas import (
    GridPayload,
    ModelInfo,
    PredictRequest,
    PredictResponse,
    ScenarioIn,
    ScenarioOut,
    ScenarioSummary,
)
from .store import DuplicateScenario, ScenarioStore, UnknownScenario

logger = logging.getLogger(__name__)

DEFAULT_MAX_GRID_CELLS = 1_000_000


def payload_to_raster(grid: GridPayload) -> Raster:
    """Wire grid -> Raster; the wire format carries no origin, so use (0, 0)."""
    bbox = BBox(0.0, grid.ncols * grid.cellsize_m, 0.0, grid.nrows * grid.cellsize_m)
    spec = GridSpec(bbox=bbox, width=grid.ncols, height=grid.nrows, cell_size_m=grid.cellsize_m)
    values = np.array(grid.values, dtype=np.float64).reshape(grid.nrows, grid.ncols)
    return Raster(spec=spec, values=values, nodata=grid.nodata)


def raster_to_payload(raster: Raster) -> GridPayload:
    return GridPayload(
        ncols=raster.spec.width,
        nrows=raster.spec.height,
        cellsize_m=raster.spec.cell_size_m,
        values=[float(v) for v in raster.values.ravel()],
        nodata=raster.nodata,
    )


def create_app(
    model_path: str | Path | None = None,
    data_dir: str | Path = "scenarios",
    max_grid_cells: int = DEFAULT_MAX_GRID_CELLS,
    cors_origins: list[str] | None = None,
    default_sigma: float = 0.85,
    default_radius: int = 1,
) -> FastAPI:
    app = FastAPI(title="building-volume temperature service")
    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    model = None
    mid = None
    if model_path is not None:
        model = load_model(model_path)
        mid = model_id(model)
        logger.info("loaded %s model %s from %s", model.kind, mid, model_path)
    store = ScenarioStore(data_dir)
    app.state.model = model
    app.state.model_id = mid
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def _validation_as_400(request: Request, exc: RequestValidationError):
        # Malformed grids are client errors, reported with field-level detail.
        detail = [
            {"field": ".".join(str(p) for p in e["loc"]), "message": e["msg"]}
            for e in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.get("/model", response_model=ModelInfo)
    async def model_info():
        if model is None:
            return JSONResponse(status_code=503, content={"detail": "no model loaded"})
        params = {k: getattr(model.params, k) for k in model.params.__dataclass_fields__}
        return ModelInfo(
            id=mid,
            type=model.kind,
            params=params,
            training_cities=model.training_cities,
            feature_arity=model.feature_arity,
            n_trees=len(model.trees),
        )

    @app.post("/predict", response_model=PredictResponse)
    async def predict_endpoint(req: PredictRequest):
        if model is None:
            return JSONResponse(status_code=503, content={"detail": "no model loaded"})
        if req.grid.ncols * req.grid.nrows > max_grid_cells:
            return JSONResponse(
                status_code=413,
                content={
                    "detail": f"grid exceeds the {max_grid_cells}-cell limit"
                },
            )
        sigma = req.sigma if req.sigma is not None else default_sigma
        radius = req.radius if req.radius is not None else default_radius
        volume = payload_to_raster(req.grid)
        prediction = predict_grid(model, volume, gaussian_kernel(sigma, radius))
        return PredictResponse(
            model_id=mid,
            sigma=sigma,
            radius=radius,
            prediction=raster_to_payload(prediction),
            t_min=float(prediction.values.min()),
            t_max=float(prediction.values.max()),
        )

    @app.post("/scenarios", response_model=ScenarioOut, status_code=201)
    async def create_scenario(scenario: ScenarioIn):
        payload = {
            "name": scenario.name,
            "model_id": mid,
            "base": scenario.base.model_dump(),
            "edited": scenario.edited.model_dump(),
        }
        try:
            record = store.create(payload, scenario.id)
        except DuplicateScenario as exc:
            return JSONResponse(
                status_code=409, content={"detail": f"scenario {exc} already exists"}
            )
        except OSError as exc:
            return JSONResponse(status_code=507, content={"detail": f"storage failure: {exc}"})
        return ScenarioOut(**record)

    @app.get("/scenarios", response_model=list[ScenarioSummary])
    async def list_scenarios():
        return [
            ScenarioSummary(
                id=r["id"],
                name=r["name"],
                created_at=r["created_at"],
                ncols=r["base"]["ncols"],
                nrows=r["base"]["nrows"],
            )
            for r in store.list()
        ]

    @app.get("/scenarios/{scenario_id}", response_model=ScenarioOut)
    async def get_scenario(scenario_id: str):
        try:
            return ScenarioOut(**store.get(scenario_id))
        except UnknownScenario:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown scenario {scenario_id}"}
            )

    @app.delete("/scenarios/{scenario_id}", status_code=204)
    async def delete_scenario(scenario_id: str):
        try:
            store.delete(scenario_id)
        except UnknownScenario:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown scenario {scenario_id}"}
            )

    return app
