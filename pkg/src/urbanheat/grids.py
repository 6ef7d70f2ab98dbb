"""Planar grid geometry: bounding boxes, grid specs and the world->index transforms.

All rasters in this package are row-major with the origin at the top-left
corner: row 0 is the northmost row, column 0 the westmost column.  World
coordinates are planar meters (one projected CRS throughout; no reprojection
happens here).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DataError


def round_half_away(v):
    """Round to nearest integer, ties away from zero.

    Shared by both axis transforms so the two agree on tie handling.  Accepts
    scalars or arrays; returns int / int64 array.
    """
    v = np.asarray(v)
    out = np.where(v >= 0, np.floor(v + 0.5), np.ceil(v - 0.5)).astype(np.int64)
    if out.ndim == 0:
        return int(out)
    return out


@dataclass(frozen=True)
class BBox:
    """Axis-aligned bounding box in planar meters."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(
                f"degenerate bbox: x [{self.x_min}, {self.x_max}], "
                f"y [{self.y_min}, {self.y_max}]"
            )

    @property
    def width_m(self) -> float:
        return self.x_max - self.x_min

    @property
    def height_m(self) -> float:
        return self.y_max - self.y_min

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def overlaps(self, other: "BBox") -> bool:
        return (
            self.x_min < other.x_max
            and other.x_min < self.x_max
            and self.y_min < other.y_max
            and other.y_min < self.y_max
        )


@dataclass(frozen=True)
class GridSpec:
    """Georeferenced raster geometry: extent plus cell counts and size.

    ``width`` counts columns (west-east), ``height`` counts rows
    (north-south).  Cells are square.  The extent must agree with
    width*cell_size within one cell per axis.
    """

    bbox: BBox
    width: int
    height: int
    cell_size_m: float

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid must have >= 1 cell per axis, got {self.width}x{self.height}")
        if self.cell_size_m <= 0:
            raise ValueError(f"cell size must be positive, got {self.cell_size_m}")
        for n, extent, axis in (
            (self.width, self.bbox.width_m, "x"),
            (self.height, self.bbox.height_m, "y"),
        ):
            if abs(n * self.cell_size_m - extent) > self.cell_size_m:
                raise ValueError(
                    f"{axis} extent {extent} m disagrees with "
                    f"{n} cells of {self.cell_size_m} m by more than one cell"
                )

    @classmethod
    def from_bbox(cls, bbox: BBox, cell_size_m: float) -> "GridSpec":
        """Grid covering ``bbox`` with the extent an exact multiple of the cell size."""
        width = int(round(bbox.width_m / cell_size_m))
        height = int(round(bbox.height_m / cell_size_m))
        return cls(bbox=bbox, width=max(width, 1), height=max(height, 1), cell_size_m=cell_size_m)

    @property
    def shape(self) -> tuple[int, int]:
        """(rows, cols) for the backing array."""
        return (self.height, self.width)

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def x_centers(self) -> np.ndarray:
        """Cell-center x coordinates, west to east (index order)."""
        return self.bbox.x_min + (np.arange(self.width) + 0.5) * self.cell_size_m

    def y_centers(self) -> np.ndarray:
        """Cell-center y coordinates, north to south (index order)."""
        return self.bbox.y_max - (np.arange(self.height) + 0.5) * self.cell_size_m

    def cell_center(self, col: int, row: int) -> tuple[float, float]:
        return (
            self.bbox.x_min + (col + 0.5) * self.cell_size_m,
            self.bbox.y_max - (row + 0.5) * self.cell_size_m,
        )


def world_to_voxel_x(x, bbox: BBox, width: int):
    """Map world x (meters) to a column index in [0, width-1].

    Normalizes the coordinate over the bbox extent, scales by ``width - 1``
    and rounds half away from zero.  Coordinates outside the bbox raise:
    the bbox is derived from the same data, so out-of-range input indicates
    a pipeline bug rather than something to clamp.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < bbox.x_min) or np.any(x > bbox.x_max):
        bad = np.asarray(x)[(x < bbox.x_min) | (x > bbox.x_max)]
        raise ValueError(
            f"x coordinate {bad.flat[0]} outside bbox [{bbox.x_min}, {bbox.x_max}]"
        )
    return round_half_away((x - bbox.x_min) / (bbox.x_max - bbox.x_min) * (width - 1))


def world_to_voxel_y(y, bbox: BBox, height: int):
    """Map world y (meters) to a row index in [0, height-1].

    Row 0 corresponds to y_max: the array origin sits at the top-left corner
    while world y grows northward, so the transform flips the axis.
    """
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < bbox.y_min) or np.any(y > bbox.y_max):
        bad = np.asarray(y)[(y < bbox.y_min) | (y > bbox.y_max)]
        raise ValueError(
            f"y coordinate {bad.flat[0]} outside bbox [{bbox.y_min}, {bbox.y_max}]"
        )
    return round_half_away((bbox.y_max - y) / (bbox.y_max - bbox.y_min) * (height - 1))


class VoxelIndex(NamedTuple):
    """One grid position: column (west-east) and row (north-south)."""

    col: int
    row: int


def world_to_voxel(x: float, y: float, spec: GridSpec) -> VoxelIndex:
    """Map one world point into the grid (scalar convenience wrapper)."""
    return VoxelIndex(
        col=world_to_voxel_x(x, spec.bbox, spec.width),
        row=world_to_voxel_y(y, spec.bbox, spec.height),
    )


NODATA = -999.0


@dataclass
class Raster:
    """A georeferenced 2D value grid (row 0 = north)."""

    spec: GridSpec
    values: np.ndarray
    nodata: float = NODATA

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.spec.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match spec {self.spec.shape}"
            )

    @classmethod
    def zeros(cls, spec: GridSpec, dtype=np.float64, nodata: float = NODATA) -> "Raster":
        return cls(spec=spec, values=np.zeros(spec.shape, dtype=dtype), nodata=nodata)

    def valid_mask(self) -> np.ndarray:
        return self.values != self.nodata

    def copy(self) -> "Raster":
        return Raster(spec=self.spec, values=self.values.copy(), nodata=self.nodata)


def compute_bbox(buildings) -> BBox:
    """Tight bounds over all footprint vertices of ``buildings``."""
    if not buildings:
        raise ValueError("cannot compute bbox of an empty building list")
    xs_min = min(float(b.footprint[:, 0].min()) for b in buildings)
    xs_max = max(float(b.footprint[:, 0].max()) for b in buildings)
    ys_min = min(float(b.footprint[:, 1].min()) for b in buildings)
    ys_max = max(float(b.footprint[:, 1].max()) for b in buildings)
    return BBox(x_min=xs_min, x_max=xs_max, y_min=ys_min, y_max=ys_max)


def crop_to_bbox(grid: Raster, bbox: BBox) -> Raster:
    """Sub-grid of all cells whose centers fall inside ``bbox`` (edges inclusive).

    Georeferencing is preserved: the result's bbox is the cell-aligned extent
    of the selected block.
    """
    spec = grid.spec
    xc = spec.x_centers()
    yc = spec.y_centers()
    cols = np.nonzero((xc >= bbox.x_min) & (xc <= bbox.x_max))[0]
    rows = np.nonzero((yc >= bbox.y_min) & (yc <= bbox.y_max))[0]
    if cols.size == 0 or rows.size == 0:
        raise DataError("crop bbox does not overlap any cell center of the grid")
    c0, c1 = int(cols[0]), int(cols[-1])
    r0, r1 = int(rows[0]), int(rows[-1])
    new_bbox = BBox(
        x_min=spec.bbox.x_min + c0 * spec.cell_size_m,
        x_max=spec.bbox.x_min + (c1 + 1) * spec.cell_size_m,
        y_min=spec.bbox.y_max - (r1 + 1) * spec.cell_size_m,
        y_max=spec.bbox.y_max - r0 * spec.cell_size_m,
    )
    new_spec = GridSpec(
        bbox=new_bbox, width=c1 - c0 + 1, height=r1 - r0 + 1, cell_size_m=spec.cell_size_m
    )
    return Raster(
        spec=new_spec, values=grid.values[r0 : r1 + 1, c0 : c1 + 1].copy(), nodata=grid.nodata
    )
