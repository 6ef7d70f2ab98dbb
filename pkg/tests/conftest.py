"""Shared test fixtures and generators."""

from __future__ import annotations

import numpy as np
import pytest

from urbanheat.buildings import BuildingRecord
from urbanheat.grids import BBox, GridSpec


@pytest.fixture
def unit_square():
    return np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def make_box_building(bid, x0, y0, w, h, height):
    """Axis-aligned rectangular building with a flat roof."""
    fp = np.array([[x0, y0], [x0 + w, y0], [x0 + w, y0 + h], [x0, y0 + h]])
    return BuildingRecord(id=bid, footprint=fp, vertex_heights=np.full(4, float(height)))


def random_convex_building(rng, bid, cx, cy, min_radius=2.5, max_radius=20.0):
    """Fat convex polygon (regular k-gon with random radius/rotation)."""
    k = int(rng.integers(5, 9))
    radius = rng.uniform(min_radius, max_radius)
    phase = rng.uniform(0, 2 * np.pi)
    ang = phase + np.arange(k) * 2 * np.pi / k
    fp = np.column_stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)])
    height = float(rng.uniform(3.0, 30.0))
    return BuildingRecord(id=bid, footprint=fp, vertex_heights=np.full(k, height))


def place_disjoint_buildings(rng, n, extent, margin=3.0, convex_only=False, max_size=40.0):
    """n non-overlapping flat-roof buildings inside (0, extent)^2 with a margin."""
    buildings = []
    taken = []
    attempts = 0
    buffer = max_size / 2 + margin + 1
    while len(buildings) < n and attempts < 500 * n:
        attempts += 1
        cx = rng.uniform(buffer, extent - buffer)
        cy = rng.uniform(buffer, extent - buffer)
        if convex_only or rng.random() < 0.5:
            b = random_convex_building(
                rng, f"b{len(buildings):03d}", cx, cy, max_radius=max_size / 2
            )
        else:
            w, h = rng.uniform(4.0, max_size), rng.uniform(4.0, max_size)
            b = make_box_building(f"b{len(buildings):03d}", cx - w / 2, cy - h / 2, w, h,
                                  rng.uniform(3.0, 30.0))
        x0, x1 = b.footprint[:, 0].min(), b.footprint[:, 0].max()
        y0, y1 = b.footprint[:, 1].min(), b.footprint[:, 1].max()
        if any(
            x0 - margin < tx1 and tx0 < x1 + margin and y0 - margin < ty1 and ty0 < y1 + margin
            for tx0, tx1, ty0, ty1 in taken
        ):
            continue
        taken.append((x0, x1, y0, y1))
        buildings.append(b)
    assert len(buildings) == n, f"could only place {len(buildings)} of {n} buildings"
    return buildings


def square_spec(extent, cell):
    bbox = BBox(0.0, float(extent), 0.0, float(extent))
    return GridSpec.from_bbox(bbox, cell)
