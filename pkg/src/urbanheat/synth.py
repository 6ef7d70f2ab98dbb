"""Seeded synthetic cities: desk-scale stand-ins for real CityGML + weather data.

The generator keeps its own books: it records the true per-coarse-cell
building volume from its geometry (center-in-polygon over each footprint)
and manufactures temperature as affine(blur(true volume)) + seeded noise.
Every later pipeline stage can therefore be checked against ground truth it
did not compute itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .buildings import BuildingRecord, write_building_list
from .asciigrid import write_ascii_grid
from .grids import BBox, GridSpec, Raster
from .rasterize import footprint_block, points_in_polygon
from .volume import convolve2d, gaussian_kernel


@dataclass
class SynthCity:
    name: str
    buildings: list[BuildingRecord]
    fine_spec: GridSpec
    coarse_spec: GridSpec
    true_volume: Raster
    temperature: Raster


def _random_building(rng: np.random.Generator, bid: str, cx: float, cy: float):
    """One fat axis-aligned rectangle or regular polygon around (cx, cy)."""
    height = float(rng.uniform(3.0, 30.0))
    if rng.random() < 0.6:
        w = rng.uniform(6.0, 50.0)
        h = rng.uniform(6.0, 50.0)
        fp = np.array(
            [
                [cx - w / 2, cy - h / 2],
                [cx + w / 2, cy - h / 2],
                [cx + w / 2, cy + h / 2],
                [cx - w / 2, cy + h / 2],
            ]
        )
    else:
        k = int(rng.integers(5, 9))
        radius = rng.uniform(4.0, 25.0)
        phase = rng.uniform(0, 2 * np.pi)
        ang = phase + np.arange(k) * 2 * np.pi / k
        fp = np.column_stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)])
    heights = np.full(fp.shape[0], height)
    return BuildingRecord(id=bid, footprint=fp, vertex_heights=heights)


def generate_city(
    seed: int,
    n_buildings: int,
    extent_x_m: float = 8000.0,
    extent_y_m: float = 8000.0,
    fine_cell_m: float = 1.0,
    coarse_cell_m: float = 1000.0,
    origin_x: float = 600000.0,
    origin_y: float = 5600000.0,
    base_temp_c: float = 14.0,
    temp_per_m3: float = 5e-5,
    noise_frac: float = 0.1,
    sigma: float = 0.85,
    radius: int = 1,
    name: str = "synth",
) -> SynthCity:
    """Build a non-overlapping random city with recomputable ground truth.

    Buildings are separated by a few cells so footprints stay disjoint on the
    mask.  Noise std is ``noise_frac`` times the std of the blurred-volume
    temperature signal; with zero buildings the signal is flat and the noise
    vanishes with it.
    """
    rng = np.random.default_rng(seed)
    bbox = BBox(
        x_min=origin_x,
        x_max=origin_x + extent_x_m,
        y_min=origin_y,
        y_max=origin_y + extent_y_m,
    )
    fine = GridSpec.from_bbox(bbox, fine_cell_m)
    coarse = GridSpec.from_bbox(bbox, coarse_cell_m)
    margin = 3.0 * fine_cell_m

    buildings: list[BuildingRecord] = []
    taken: list[tuple[float, float, float, float]] = []
    attempts = 0
    while len(buildings) < n_buildings and attempts < 200 * max(n_buildings, 1):
        attempts += 1
        cx = origin_x + rng.uniform(60.0, extent_x_m - 60.0)
        cy = origin_y + rng.uniform(60.0, extent_y_m - 60.0)
        b = _random_building(rng, f"b{len(buildings):04d}", cx, cy)
        x0, x1 = float(b.footprint[:, 0].min()), float(b.footprint[:, 0].max())
        y0, y1 = float(b.footprint[:, 1].min()), float(b.footprint[:, 1].max())
        if any(
            x0 - margin < tx1 and tx0 < x1 + margin and y0 - margin < ty1 and ty0 < y1 + margin
            for tx0, tx1, ty0, ty1 in taken
        ):
            continue
        taken.append((x0, x1, y0, y1))
        buildings.append(b)

    # Generator bookkeeping: fine cells covered per footprint, summed per
    # coarse cell, without going through the height-field machinery.
    fx = fine.width // coarse.width
    fy = fine.height // coarse.height
    vol = np.zeros(coarse.shape, dtype=np.float64)
    cell_area = fine_cell_m**2
    for b in buildings:
        r0, r1, c0, c1 = footprint_block(b, fine)
        if r0 > r1 or c0 > c1:
            continue
        xs = fine.bbox.x_min + (np.arange(c0, c1 + 1) + 0.5) * fine_cell_m
        ys = fine.bbox.y_max - (np.arange(r0, r1 + 1) + 0.5) * fine_cell_m
        gx, gy = np.meshgrid(xs, ys)
        hit = points_in_polygon(gx, gy, b.footprint)
        rows, cols = np.nonzero(hit)
        np.add.at(vol, ((rows + r0) // fy, (cols + c0) // fx), b.height * cell_area)

    kernel = gaussian_kernel(sigma, radius)
    signal = base_temp_c + temp_per_m3 * convolve2d(vol, kernel.weights)
    noise_std = noise_frac * float(signal.std())
    temp = signal + rng.normal(0.0, 1.0, size=signal.shape) * noise_std
    return SynthCity(
        name=name,
        buildings=buildings,
        fine_spec=fine,
        coarse_spec=coarse,
        true_volume=Raster(spec=coarse, values=vol),
        temperature=Raster(spec=coarse, values=temp),
    )


def write_city(city: SynthCity, out_dir: str | Path) -> dict[str, Path]:
    """Write buildings.json, temperature.asc and the bookkeeping volume grid."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "buildings": out / f"{city.name}_buildings.json",
        "temperature": out / f"{city.name}_temperature.asc",
        "true_volume": out / f"{city.name}_volume_true.asc",
    }
    write_building_list(city.buildings, paths["buildings"])
    write_ascii_grid(city.temperature, paths["temperature"])
    write_ascii_grid(city.true_volume, paths["true_volume"])
    return paths
