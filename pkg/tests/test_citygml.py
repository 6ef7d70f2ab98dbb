"""CityGML subset parser tests against a synthetic LoD1 generator."""

import numpy as np
import pytest

from urbanheat.citygml import parse_citygml_buildings
from urbanheat.errors import DataError

GML_HEAD = (
    '<?xml version="1.0" encoding="UTF-8"?>\n'
    '<core:CityModel xmlns:core="http://www.opengis.net/citygml/2.0" '
    'xmlns:bldg="http://www.opengis.net/citygml/building/2.0" '
    'xmlns:gml="http://www.opengis.net/gml">\n'
)
GML_TAIL = "</core:CityModel>\n"


def _polygon(coords):
    flat = " ".join(f"{float(x)!r} {float(y)!r} {float(z)!r}" for x, y, z in coords)
    return (
        "<gml:surfaceMember><gml:Polygon><gml:exterior><gml:LinearRing>"
        f'<gml:posList srsDimension="3">{flat}</gml:posList>'
        "</gml:LinearRing></gml:exterior></gml:Polygon></gml:surfaceMember>"
    )


def lod1_box(bid, x0, y0, w, d, z0, height, measured=None):
    """All six faces of an extruded box, closed rings, like LoD1 exports."""
    x1, y1, z1 = x0 + w, y0 + d, z0 + height
    ground = [(x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0), (x0, y0, z0)]
    roof = [(x0, y0, z1), (x0, y1, z1), (x1, y1, z1), (x1, y0, z1), (x0, y0, z1)]
    walls = []
    for (ax, ay), (bx, by) in zip(
        [(x0, y0), (x1, y0), (x1, y1), (x0, y1)],
        [(x1, y0), (x1, y1), (x0, y1), (x0, y0)],
    ):
        walls.append(
            [(ax, ay, z0), (bx, by, z0), (bx, by, z1), (ax, ay, z1), (ax, ay, z0)]
        )
    mh = (
        f'<bldg:measuredHeight uom="m">{measured}</bldg:measuredHeight>'
        if measured is not None
        else ""
    )
    faces = "".join(_polygon(f) for f in [ground, roof] + walls)
    return (
        f'<core:cityObjectMember><bldg:Building gml:id="{bid}">{mh}'
        "<bldg:lod1Solid><gml:Solid><gml:exterior><gml:CompositeSurface>"
        f"{faces}"
        "</gml:CompositeSurface></gml:exterior></gml:Solid></bldg:lod1Solid>"
        "</bldg:Building></core:cityObjectMember>"
    )


def test_single_lod1_box():
    doc = (GML_HEAD + lod1_box("b1", 10, 20, 10, 10, 0, 12) + GML_TAIL).encode()
    parsed = parse_citygml_buildings(doc)
    assert len(parsed.records) == 1
    assert not parsed.skipped_ids
    r = parsed.records[0]
    assert r.id == "b1"
    assert r.footprint.shape == (4, 2)
    np.testing.assert_array_equal(r.vertex_heights, 12.0)


def test_empty_document():
    parsed = parse_citygml_buildings((GML_HEAD + GML_TAIL).encode())
    assert parsed.records == []
    assert parsed.n_elements == 0


def test_five_synthetic_boxes_roundtrip():
    rng = np.random.default_rng(7)
    params = []
    parts = []
    for i in range(5):
        x0, y0 = rng.uniform(0, 500, size=2)
        w, d = rng.uniform(5, 30, size=2)
        z0 = rng.uniform(100, 300)  # terrain elevation; height is relative
        h = rng.uniform(3, 25)
        params.append((x0, y0, w, d, h))
        parts.append(lod1_box(f"b{i}", x0, y0, w, d, z0, h))
    doc = (GML_HEAD + "".join(parts) + GML_TAIL).encode()
    parsed = parse_citygml_buildings(doc)
    assert len(parsed.records) == 5
    for r, (x0, y0, w, d, h) in zip(parsed.records, params):
        # footprint area and height equal the generator's parameters exactly
        xs, ys = r.footprint[:, 0], r.footprint[:, 1]
        area = 0.5 * abs(
            np.sum(xs * np.roll(ys, -1) - np.roll(xs, -1) * ys)
        )
        assert area == pytest.approx(w * d, rel=1e-12)
        assert r.height == pytest.approx(h, rel=1e-12)


def test_measured_height_overrides_geometry():
    doc = (GML_HEAD + lod1_box("b1", 0, 0, 10, 10, 0, 12, measured=15.5) + GML_TAIL).encode()
    parsed = parse_citygml_buildings(doc)
    assert parsed.records[0].height == 15.5


def test_malformed_xml_reports_byte_offset():
    doc = (GML_HEAD + "<bldg:Building>").encode()
    with pytest.raises(DataError, match="byte"):
        parse_citygml_buildings(doc)


def test_degenerate_building_skipped_and_counted():
    # Building with a 2-vertex "ring": unparseable geometry, must be counted.
    bad = (
        '<core:cityObjectMember><bldg:Building gml:id="bad">'
        "<bldg:lod1Solid><gml:Solid><gml:exterior><gml:CompositeSurface>"
        "<gml:surfaceMember><gml:Polygon><gml:exterior><gml:LinearRing>"
        '<gml:posList srsDimension="3">0 0 0 1 0 0</gml:posList>'
        "</gml:LinearRing></gml:exterior></gml:Polygon></gml:surfaceMember>"
        "</gml:CompositeSurface></gml:exterior></gml:Solid></bldg:lod1Solid>"
        "</bldg:Building></core:cityObjectMember>"
    )
    doc = (GML_HEAD + lod1_box("ok", 0, 0, 5, 5, 0, 4) + bad + GML_TAIL).encode()
    parsed = parse_citygml_buildings(doc)
    assert [r.id for r in parsed.records] == ["ok"]
    assert parsed.skipped_ids == ["bad"]
    assert parsed.n_elements == 2


def test_sloped_roof_vertex_heights():
    # Gable-like solid: ground square, two roof planes at different heights.
    ground = [(0, 0, 0), (10, 0, 0), (10, 10, 0), (0, 10, 0), (0, 0, 0)]
    low_edge = [(0, 0, 0), (10, 0, 0), (10, 0, 6), (0, 0, 6), (0, 0, 0)]
    high_edge = [(0, 10, 0), (10, 10, 0), (10, 10, 9), (0, 10, 9), (0, 10, 0)]
    slope = [(0, 0, 6), (10, 0, 6), (10, 10, 9), (0, 10, 9), (0, 0, 6)]
    faces = "".join(_polygon(f) for f in [ground, low_edge, high_edge, slope])
    doc = (
        GML_HEAD
        + '<core:cityObjectMember><bldg:Building gml:id="g">'
        + "<bldg:lod2Solid><gml:Solid><gml:exterior><gml:CompositeSurface>"
        + faces
        + "</gml:CompositeSurface></gml:exterior></gml:Solid></bldg:lod2Solid>"
        + "</bldg:Building></core:cityObjectMember>"
        + GML_TAIL
    ).encode()
    parsed = parse_citygml_buildings(doc)
    r = parsed.records[0]
    # per-vertex height = max z in that vertex's column
    got = {tuple(v): h for v, h in zip(r.footprint.tolist(), r.vertex_heights)}
    assert got[(0.0, 0.0)] == 6.0
    assert got[(10.0, 0.0)] == 6.0
    assert got[(10.0, 10.0)] == 9.0
    assert got[(0.0, 10.0)] == 9.0
    assert r.height == 9.0


def test_multi_ring_building_splits_with_id_suffix():
    # two disjoint ground squares under one building element -> two records
    g1 = [(0, 0, 0), (5, 0, 0), (5, 5, 0), (0, 5, 0), (0, 0, 0)]
    g2 = [(20, 0, 0), (26, 0, 0), (26, 6, 0), (20, 6, 0), (20, 0, 0)]
    r1 = [(0, 0, 7), (0, 5, 7), (5, 5, 7), (5, 0, 7), (0, 0, 7)]
    r2 = [(20, 0, 4), (20, 6, 4), (26, 6, 4), (26, 0, 4), (20, 0, 4)]
    faces = "".join(_polygon(f) for f in [g1, g2, r1, r2])
    doc = (
        GML_HEAD
        + '<core:cityObjectMember><bldg:Building gml:id="twin">'
        + "<bldg:lod1Solid><gml:Solid><gml:exterior><gml:CompositeSurface>"
        + faces
        + "</gml:CompositeSurface></gml:exterior></gml:Solid></bldg:lod1Solid>"
        + "</bldg:Building></core:cityObjectMember>"
        + GML_TAIL
    ).encode()
    parsed = parse_citygml_buildings(doc)
    assert [r.id for r in parsed.records] == ["twin#0", "twin#1"]
    assert parsed.records[0].height == 7.0
    assert parsed.records[1].height == 4.0
    assert parsed.n_elements == 1
