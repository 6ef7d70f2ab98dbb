"""Building records and the JSON building-list interchange format.

A building is a closed 2D footprint ring plus one height per vertex (meters
above local ground).  The interchange document is a JSON array of objects
with fields ``id``, ``footprint`` ([x, y] meter pairs) and ``heights``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError


@dataclass
class BuildingRecord:
    """One building: footprint polygon plus per-vertex heights.

    The footprint ring is stored open (first vertex not repeated); an
    explicitly closed input ring is normalized on construction.
    """

    id: str
    footprint: np.ndarray
    vertex_heights: np.ndarray

    def __post_init__(self):
        fp = np.asarray(self.footprint, dtype=np.float64)
        hs = np.asarray(self.vertex_heights, dtype=np.float64)
        if fp.ndim != 2 or fp.shape[1] != 2:
            raise ValueError(f"building {self.id}: footprint must be (N, 2), got {fp.shape}")
        if fp.shape[0] != hs.shape[0]:
            raise ValueError(
                f"building {self.id}: {fp.shape[0]} vertices but {hs.shape[0]} heights"
            )
        # Normalize an explicitly closed ring to the open form.
        if fp.shape[0] >= 2 and np.array_equal(fp[0], fp[-1]):
            fp = fp[:-1]
            hs = hs[:-1]
        if len(np.unique(fp, axis=0)) < 3:
            raise ValueError(f"building {self.id}: footprint needs >= 3 distinct vertices")
        if not np.all(np.isfinite(fp)):
            raise ValueError(f"building {self.id}: non-finite footprint coordinate")
        if not np.all(np.isfinite(hs)) or np.any(hs < 0):
            raise ValueError(f"building {self.id}: heights must be finite and >= 0")
        self.footprint = fp
        self.vertex_heights = hs

    @property
    def height(self) -> float:
        """Single height assigned to the building: the max over its vertices."""
        return float(self.vertex_heights.max())

    def closed_ring(self) -> np.ndarray:
        """Footprint with the first vertex repeated at the end."""
        return np.vstack([self.footprint, self.footprint[:1]])


def parse_building_list(document: bytes | str) -> list[BuildingRecord]:
    """Decode a building-list JSON document into records.

    Schema violations raise :class:`DataError` naming the offending field and
    record index.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise DataError(f"building list is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise DataError("building list document must be a JSON array")
    records = []
    for i, obj in enumerate(data):
        if not isinstance(obj, dict):
            raise DataError(f"record {i}: expected an object")
        for key in ("id", "footprint", "heights"):
            if key not in obj:
                raise DataError(f"record {i}: missing field '{key}'")
        if not isinstance(obj["id"], str):
            raise DataError(f"record {i}: field 'id' must be a string")
        fp = obj["footprint"]
        hs = obj["heights"]
        if not isinstance(fp, list) or any(
            not isinstance(p, list) or len(p) != 2 for p in fp
        ):
            raise DataError(f"record {i}: field 'footprint' must be a list of [x, y] pairs")
        if not isinstance(hs, list) or len(hs) != len(fp):
            raise DataError(
                f"record {i}: field 'heights' must be a list matching footprint length"
            )
        try:
            records.append(
                BuildingRecord(id=obj["id"], footprint=np.array(fp), vertex_heights=np.array(hs))
            )
        except ValueError as exc:
            raise DataError(f"record {i}: {exc}") from exc
    return records


def write_building_list(records: list[BuildingRecord], path: str | Path) -> None:
    """Write records as a building-list JSON document (deterministic bytes)."""
    data = [
        {
            "id": r.id,
            "footprint": [[float(x), float(y)] for x, y in r.footprint],
            "heights": [float(h) for h in r.vertex_heights],
        }
        for r in records
    ]
    Path(path).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")


def read_building_list(path: str | Path) -> list[BuildingRecord]:
    return parse_building_list(Path(path).read_bytes())
