"""Raster file I/O: ESRI ASCII grids plus a fast .npy variant for fine grids.

The ASCII format is the interchange surface (header lines ncols, nrows,
xllcorner, yllcorner, cellsize, NODATA_value, then row-major values with row
0 = north).  City-scale fine grids are far too large for ASCII, so any
``.npy`` path writes the raw array next to a small JSON sidecar carrying the
georeferencing; both writers produce deterministic bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataError
from .grids import BBox, GridSpec, Raster, crop_to_bbox

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


def write_ascii_grid(grid: Raster, path: str | Path) -> None:
    """Write an ESRI ASCII grid; values use exact (round-trip) float repr."""
    spec = grid.spec
    lines = [
        f"ncols {spec.width}",
        f"nrows {spec.height}",
        f"xllcorner {spec.bbox.x_min!r}",
        f"yllcorner {spec.bbox.y_min!r}",
        f"cellsize {spec.cell_size_m!r}",
        f"NODATA_value {_fmt(grid.nodata)}",
    ]
    for row in grid.values:
        lines.append(" ".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _fmt(v) -> str:
    f = float(v)
    return repr(int(f)) if f.is_integer() else repr(f)


def read_ascii_grid(path: str | Path) -> Raster:
    """Parse an ESRI ASCII grid into a Raster; header and body must agree."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"grid file not found: {path}")
    text = path.read_text(encoding="utf-8")
    header: dict[str, float] = {}
    lines = text.splitlines()
    body_start = 0
    for i, line in enumerate(lines):
        parts = line.split()
        if len(parts) == 2 and parts[0].lower() in _HEADER_KEYS:
            header[parts[0].lower()] = float(parts[1])
            body_start = i + 1
        elif parts:
            break
    missing = [k for k in _HEADER_KEYS[:5] if k not in header]
    if missing:
        raise DataError(f"{path}: missing header line(s): {', '.join(missing)}")
    ncols = int(header["ncols"])
    nrows = int(header["nrows"])
    cell = header["cellsize"]
    nodata = header.get("nodata_value", -999.0)
    flat = np.array(" ".join(lines[body_start:]).split(), dtype=np.float64)
    if flat.size != ncols * nrows:
        raise DataError(
            f"{path}: header says {nrows}x{ncols} = {nrows * ncols} values, body has {flat.size}"
        )
    bbox = BBox(
        x_min=header["xllcorner"],
        x_max=header["xllcorner"] + ncols * cell,
        y_min=header["yllcorner"],
        y_max=header["yllcorner"] + nrows * cell,
    )
    spec = GridSpec(bbox=bbox, width=ncols, height=nrows, cell_size_m=cell)
    return Raster(spec=spec, values=flat.reshape(nrows, ncols), nodata=nodata)


def save_grid(grid: Raster, path: str | Path) -> None:
    """Write a raster; the extension picks the format (.asc text, .npy binary)."""
    path = Path(path)
    if path.suffix == ".asc":
        write_ascii_grid(grid, path)
    elif path.suffix == ".npy":
        np.save(path, grid.values)
        sidecar = {
            "xllcorner": grid.spec.bbox.x_min,
            "yllcorner": grid.spec.bbox.y_min,
            "cellsize": grid.spec.cell_size_m,
            "ncols": grid.spec.width,
            "nrows": grid.spec.height,
            "nodata": grid.nodata,
        }
        path.with_suffix(".json").write_text(
            json.dumps(sidecar, sort_keys=True) + "\n", encoding="utf-8"
        )
    else:
        raise DataError(f"unsupported grid extension: {path.suffix!r} (use .asc or .npy)")


def load_grid(path: str | Path) -> Raster:
    path = Path(path)
    if path.suffix == ".asc":
        return read_ascii_grid(path)
    if path.suffix == ".npy":
        sidecar_path = path.with_suffix(".json")
        if not sidecar_path.exists():
            raise DataError(f"{path}: missing georeferencing sidecar {sidecar_path.name}")
        meta = json.loads(sidecar_path.read_text(encoding="utf-8"))
        values = np.load(path)
        bbox = BBox(
            x_min=meta["xllcorner"],
            x_max=meta["xllcorner"] + meta["ncols"] * meta["cellsize"],
            y_min=meta["yllcorner"],
            y_max=meta["yllcorner"] + meta["nrows"] * meta["cellsize"],
        )
        spec = GridSpec(
            bbox=bbox, width=meta["ncols"], height=meta["nrows"], cell_size_m=meta["cellsize"]
        )
        return Raster(spec=spec, values=values, nodata=meta["nodata"])
    raise DataError(f"unsupported grid extension: {path.suffix!r} (use .asc or .npy)")


TEMP_PLAUSIBLE = (-60.0, 60.0)


def read_temperature_grid(path: str | Path, target_bbox: BBox | None = None) -> Raster:
    """Read an air-temperature ASCII grid, optionally cropped to ``target_bbox``.

    The crop keeps every cell whose center falls inside the bbox; nodata
    cells survive unchanged.  Non-nodata values outside the physically
    plausible range are rejected.
    """
    grid = read_ascii_grid(path)
    valid = grid.valid_mask()
    vals = grid.values[valid]
    if vals.size and (vals.min() < TEMP_PLAUSIBLE[0] or vals.max() > TEMP_PLAUSIBLE[1]):
        raise DataError(
            f"{path}: temperature values outside plausible range {TEMP_PLAUSIBLE} degC"
        )
    if target_bbox is not None:
        grid = crop_to_bbox(grid, target_bbox)
    return grid
