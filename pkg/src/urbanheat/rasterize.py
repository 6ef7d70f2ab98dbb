"""Footprint rasterization onto the fine grid.

A cell is set to 1 iff its center lies inside (or on the boundary of) any
footprint ring; everything else stays 0.  Masks are int16 with the -999
nodata sentinel reserved.  Each building is processed over its own bbox
rows/columns only, never the full grid, so cost scales with footprint area.
"""

from __future__ import annotations

import math

import numpy as np

from .buildings import BuildingRecord
from .grids import GridSpec, Raster

MASK_NODATA = -999


def ring_area(ring: np.ndarray) -> float:
    """Signed shoelace area of a closed or open ring."""
    ring = np.asarray(ring, dtype=np.float64)
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def point_in_polygon(p, ring) -> bool:
    """Even-odd containment test, boundary points counting as inside.

    Degenerate (zero-area) rings contain nothing.
    """
    ring = np.asarray(ring, dtype=np.float64)
    if ring.shape[0] >= 2 and np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    if ring.shape[0] < 3 or ring_area(ring) == 0.0:
        return False
    px, py = float(p[0]), float(p[1])
    inside = False
    n = ring.shape[0]
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        # Boundary check: p on the closed segment (x1,y1)-(x2,y2).
        cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
        if cross == 0.0 and min(x1, x2) <= px <= max(x1, x2) and min(y1, y2) <= py <= max(y1, y2):
            return True
        if (y1 > py) != (y2 > py):
            x_at = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            if px < x_at:
                inside = not inside
    return inside


def points_in_polygon(xs: np.ndarray, ys: np.ndarray, ring) -> np.ndarray:
    """Vectorized even-odd test over point arrays; same rule as the scalar form."""
    ring = np.asarray(ring, dtype=np.float64)
    if ring.shape[0] >= 2 and np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if ring.shape[0] < 3 or ring_area(ring) == 0.0:
        return np.zeros(xs.shape, dtype=bool)
    inside = np.zeros(xs.shape, dtype=bool)
    boundary = np.zeros(xs.shape, dtype=bool)
    n = ring.shape[0]
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        cross = (x2 - x1) * (ys - y1) - (y2 - y1) * (xs - x1)
        on_seg = (
            (cross == 0.0)
            & (xs >= min(x1, x2))
            & (xs <= max(x1, x2))
            & (ys >= min(y1, y2))
            & (ys <= max(y1, y2))
        )
        boundary |= on_seg
        crosses = (y1 > ys) != (y2 > ys)
        if np.any(crosses):
            with np.errstate(divide="ignore", invalid="ignore"):
                x_at = x1 + (ys - y1) * (x2 - x1) / (y2 - y1)
            inside ^= crosses & (xs < x_at)
    return inside | boundary


def _cell_range(lo: float, hi: float, origin: float, cell: float, n: int) -> tuple[int, int]:
    """Index range [i0, i1] of cells whose centers lie in [lo, hi] along one axis.

    Axis runs from ``origin`` in +cell steps; centers at origin + (i+0.5)*cell.
    """
    i0 = math.ceil((lo - origin) / cell - 0.5)
    i1 = math.floor((hi - origin) / cell - 0.5)
    return max(i0, 0), min(i1, n - 1)


def footprint_block(b: BuildingRecord, spec: GridSpec) -> tuple[int, int, int, int]:
    """(r0, r1, c0, c1) index block whose cell centers can lie in the footprint."""
    fp = b.footprint
    c0, c1 = _cell_range(
        float(fp[:, 0].min()), float(fp[:, 0].max()), spec.bbox.x_min, spec.cell_size_m, spec.width
    )
    # Rows run southward from y_max; flip to the row axis.
    rlo = (spec.bbox.y_max - float(fp[:, 1].max())) / spec.cell_size_m - 0.5
    rhi = (spec.bbox.y_max - float(fp[:, 1].min())) / spec.cell_size_m - 0.5
    r0 = max(math.ceil(rlo), 0)
    r1 = min(math.floor(rhi), spec.height - 1)
    return r0, r1, c0, c1


def burn_footprint(mask: np.ndarray, b: BuildingRecord, spec: GridSpec) -> None:
    """Set mask cells whose centers fall in the building footprint to 1 (in place)."""
    r0, r1, c0, c1 = footprint_block(b, spec)
    if r0 > r1 or c0 > c1:
        return
    xs = spec.bbox.x_min + (np.arange(c0, c1 + 1) + 0.5) * spec.cell_size_m
    ys = spec.bbox.y_max - (np.arange(r0, r1 + 1) + 0.5) * spec.cell_size_m
    gx, gy = np.meshgrid(xs, ys)
    hit = points_in_polygon(gx, gy, b.footprint)
    block = mask[r0 : r1 + 1, c0 : c1 + 1]
    block[hit] = 1


def rasterize_footprints(
    buildings: list[BuildingRecord], spec: GridSpec
) -> tuple[Raster, list[str]]:
    """Burn all footprints into a fresh 0-initialized mask.

    Buildings with any vertex outside ``spec.bbox`` are skipped; their ids are
    returned alongside the mask.  The result is the elementwise OR of the
    per-building masks, so parallel or reordered processing cannot change it.
    """
    values = np.zeros(spec.shape, dtype=np.int16)
    skipped = []
    for b in buildings:
        fp = b.footprint
        if (
            fp[:, 0].min() < spec.bbox.x_min
            or fp[:, 0].max() > spec.bbox.x_max
            or fp[:, 1].min() < spec.bbox.y_min
            or fp[:, 1].max() > spec.bbox.y_max
        ):
            skipped.append(b.id)
            continue
        burn_footprint(values, b, spec)
    return Raster(spec=spec, values=values, nodata=MASK_NODATA), skipped
