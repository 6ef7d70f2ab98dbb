"""Request/response models for the what-if prediction service.

Grids travel as JSON mirroring the ASCII-grid semantics: row-major values,
row 0 = north, nodata sentinel -999.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, Field, field_validator, model_validator

NODATA_DEFAULT = -999.0


class GridPayload(BaseModel):
    ncols: int = Field(gt=0)
    nrows: int = Field(gt=0)
    cellsize_m: float = Field(gt=0)
    values: list[float]
    nodata: float = NODATA_DEFAULT

    @model_validator(mode="after")
    def _check_length(self):
        if len(self.values) != self.ncols * self.nrows:
            raise ValueError(
                f"values has {len(self.values)} entries, expected "
                f"ncols*nrows = {self.ncols * self.nrows}"
            )
        return self


class VolumeGridPayload(GridPayload):
    """Volume grids additionally require finite, non-negative entries."""

    @field_validator("values")
    @classmethod
    def _check_values(cls, values):
        for i, v in enumerate(values):
            if not math.isfinite(v):
                raise ValueError(f"values[{i}] is not finite")
            if v < 0:
                raise ValueError(f"values[{i}] is negative; volumes must be >= 0")
        return values


class PredictRequest(BaseModel):
    grid: VolumeGridPayload
    sigma: float | None = Field(default=None, gt=0)
    radius: int | None = Field(default=None, ge=0)


class PredictResponse(BaseModel):
    model_id: str
    sigma: float
    radius: int
    prediction: GridPayload
    t_min: float
    t_max: float


class ScenarioIn(BaseModel):
    id: str | None = None
    name: str
    base: VolumeGridPayload
    edited: VolumeGridPayload

    @model_validator(mode="after")
    def _check_shapes(self):
        if (self.base.ncols, self.base.nrows) != (self.edited.ncols, self.edited.nrows):
            raise ValueError("base and edited grids must have identical dimensions")
        return self


class ScenarioOut(BaseModel):
    id: str
    name: str
    created_at: str
    model_id: str | None = None
    base: GridPayload
    edited: GridPayload


class ScenarioSummary(BaseModel):
    id: str
    name: str
    created_at: str
    ncols: int
    nrows: int


class ModelInfo(BaseModel):
    id: str
    type: str
    params: dict
    training_cities: list[str]
    feature_arity: int
    n_trees: int
