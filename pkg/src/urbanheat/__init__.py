"""City-scale building voxelization and air-temperature prediction.

The package converts 3D city building data into footprint masks and 2.5D
height fields, aggregates building volume onto a coarse grid, blurs it to
carry neighborhood context, and trains tree ensembles that predict
near-surface air temperature per grid cell.  A CLI drives the batch
pipeline; an HTTP service answers what-if volume edits.
"""

from .buildings import BuildingRecord, parse_building_list, write_building_list
from .grids import BBox, GridSpec, Raster, compute_bbox, crop_to_bbox
from .voxelize import (
    HeightField,
    MatchReport,
    PatchConfig,
    building_volume,
    voxelize_oracle,
    voxelize_patch_method,
)

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "BuildingRecord",
    "GridSpec",
    "HeightField",
    "MatchReport",
    "PatchConfig",
    "Raster",
    "building_volume",
    "compute_bbox",
    "crop_to_bbox",
    "parse_building_list",
    "voxelize_oracle",
    "voxelize_patch_method",
    "write_building_list",
    "__version__",
]
