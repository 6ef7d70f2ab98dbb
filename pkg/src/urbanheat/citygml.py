"""CityGML subset reader: building footprints plus one height per vertex.

Only building elements with 3D coordinate posLists are read; semantic
attributes (roof type, function, appearance) are ignored since the pipeline
needs nothing beyond footprint and height.  Namespace prefixes vary between
producers, so elements are matched by local name.
"""

from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np

from .buildings import BuildingRecord
from .errors import DataError

logger = logging.getLogger(__name__)

_COORD_EPS = 1e-6


@dataclass
class CityGmlParse:
    """Parser outcome; records + skipped always add up to elements seen."""

    records: list[BuildingRecord] = field(default_factory=list)
    skipped_ids: list[str] = field(default_factory=list)

    @property
    def n_elements(self) -> int:
        # Multi-ring buildings expand into several records sharing an id stem.
        stems = {r.id.split("#", 1)[0] for r in self.records}
        return len(stems) + len(self.skipped_ids)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _byte_offset(document: bytes, line: int, column: int) -> int:
    line_starts = [0]
    for i, b in enumerate(document):
        if b == 0x0A:
            line_starts.append(i + 1)
    if line - 1 < len(line_starts):
        return line_starts[line - 1] + column
    return len(document)


def _iter_local(elem, name: str):
    for child in elem.iter():
        if _local(child.tag) == name:
            yield child


def _parse_ring(poly) -> np.ndarray | None:
    """Exterior-ring coordinates of one Polygon element as an (N, 3) array."""
    exterior = next(_iter_local(poly, "exterior"), None)
    if exterior is None:
        return None
    pos_list = next(_iter_local(exterior, "posList"), None)
    if pos_list is not None and pos_list.text:
        vals = np.array(pos_list.text.split(), dtype=np.float64)
    else:
        pts = [p.text.split() for p in _iter_local(exterior, "pos") if p.text]
        if not pts:
            return None
        vals = np.array([v for p in pts for v in p], dtype=np.float64)
    if vals.size % 3 != 0 or vals.size < 9:
        return None
    ring = vals.reshape(-1, 3)
    if np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    return ring if ring.shape[0] >= 3 else None


def parse_citygml_buildings(document: bytes) -> CityGmlParse:
    """Extract one record per building (or per ground ring for multi-part ones).

    The footprint is the exterior ring of the building's lowest horizontal
    surface.  Each footprint vertex gets the max z found anywhere in the
    building at that (x, y), minus the building's min z; a measuredHeight
    attribute, when present, overrides the geometric height.  Buildings whose
    geometry cannot be read this way are skipped and reported, never dropped
    silently.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, col = exc.position
        raise DataError(
            f"malformed XML at byte {_byte_offset(document, line, col)}: {exc}"
        ) from exc
    result = CityGmlParse()
    n_anonymous = 0
    for building in _iter_local(root, "Building"):
        bid = None
        for key, val in building.attrib.items():
            if _local(key) == "id":
                bid = val
                break
        if bid is None:
            bid = f"building_{n_anonymous}"
            n_anonymous += 1
        measured = None
        mh = next(_iter_local(building, "measuredHeight"), None)
        if mh is not None and mh.text:
            try:
                measured = float(mh.text)
            except ValueError:
                measured = None
        rings = [r for r in map(_parse_ring, _iter_local(building, "Polygon")) if r is not None]
        if not rings:
            logger.warning("building %s: no readable polygon rings, skipped", bid)
            result.skipped_ids.append(bid)
            continue
        all_coords = np.vstack(rings)
        z_min = float(all_coords[:, 2].min())
        ground_rings = [
            r
            for r in rings
            if float(r[:, 2].max() - r[:, 2].min()) <= _COORD_EPS
            and float(r[:, 2].min()) <= z_min + _COORD_EPS
        ]
        if not ground_rings:
            logger.warning("building %s: no horizontal ground surface, skipped", bid)
            result.skipped_ids.append(bid)
            continue
        made = 0
        for k, ring in enumerate(ground_rings):
            rid = bid if len(ground_rings) == 1 else f"{bid}#{k}"
            footprint = ring[:, :2]
            if measured is not None:
                heights = np.full(footprint.shape[0], measured)
                source = "measuredHeight attribute"
            else:
                heights = np.empty(footprint.shape[0])
                for j, (x, y) in enumerate(footprint):
                    near = (np.abs(all_coords[:, 0] - x) <= _COORD_EPS) & (
                        np.abs(all_coords[:, 1] - y) <= _COORD_EPS
                    )
                    heights[j] = float(all_coords[near, 2].max()) - z_min
                source = "geometry z extent"
            try:
                result.records.append(
                    BuildingRecord(id=rid, footprint=footprint, vertex_heights=heights)
                )
                made += 1
                logger.debug("building %s: height %.2f m from %s", rid, heights.max(), source)
            except ValueError as exc:
                logger.warning("building %s: %s, skipped", rid, exc)
        if made == 0:
            result.skipped_ids.append(bid)
    return result
