"""PNG rendering and colormap tests."""

import numpy as np
import pytest
from PIL import Image

from urbanheat.errors import ConfigError
from urbanheat.grids import BBox, GridSpec, Raster
from urbanheat.render import colormap_lookup, render_png


def _raster(values, nodata=-999.0):
    values = np.asarray(values, dtype=float)
    nrows, ncols = values.shape
    bbox = BBox(0.0, ncols * 1.0, 0.0, nrows * 1.0)
    spec = GridSpec(bbox=bbox, width=ncols, height=nrows, cell_size_m=1.0)
    return Raster(spec=spec, values=values, nodata=nodata)


def test_gray_mask_black_and_white(tmp_path):
    mask = _raster([[0, 1], [1, 0]])
    path = tmp_path / "mask.png"
    render_png(mask, path, colormap="gray")
    img = np.array(Image.open(path))
    assert tuple(img[0, 0]) == (0, 0, 0)
    assert tuple(img[0, 1]) == (255, 255, 255)
    assert tuple(img[1, 0]) == (255, 255, 255)


def test_colormap_endpoints_match_documented_stops():
    assert colormap_lookup("heat", np.array(0.0)).tolist() == [13, 8, 135]
    assert colormap_lookup("heat", np.array(1.0)).tolist() == [240, 249, 33]
    assert colormap_lookup("heat", np.array(0.5)).tolist() == [204, 71, 120]
    assert colormap_lookup("diverging", np.array(0.5)).tolist() == [247, 247, 247]


def test_nodata_rendered_gray(tmp_path):
    grid = _raster([[5.0, -999.0], [0.0, 10.0]])
    path = tmp_path / "g.png"
    render_png(grid, path, colormap="heat")
    img = np.array(Image.open(path))
    assert tuple(img[0, 1]) == (128, 128, 128)


def test_center_zero_diverging(tmp_path):
    grid = _raster([[-2.0, 0.0], [0.0, 1.0]])
    path = tmp_path / "d.png"
    lo, hi = render_png(grid, path, colormap="diverging", center_zero=True)
    assert lo == -2.0 and hi == 2.0
    img = np.array(Image.open(path))
    assert tuple(img[0, 1]) == (247, 247, 247)  # 0 -> middle stop


def test_legend_sidecar(tmp_path):
    grid = _raster([[1.0, 4.0], [2.0, 3.0]])
    path = tmp_path / "g.png"
    render_png(grid, path, colormap="heat")
    legend = (tmp_path / "g.png.legend.txt").read_text()
    assert "vmin 1" in legend and "vmax 4" in legend


def test_unknown_colormap(tmp_path):
    grid = _raster([[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(ConfigError, match="colormap"):
        render_png(grid, tmp_path / "x.png", colormap="viridis")


def test_scale_upsamples(tmp_path):
    grid = _raster([[0.0, 1.0], [1.0, 0.0]])
    path = tmp_path / "s.png"
    render_png(grid, path, colormap="gray", scale=10)
    assert Image.open(path).size == (20, 20)


def test_all_zero_grid_single_color(tmp_path):
    grid = _raster(np.zeros((3, 3)))
    path = tmp_path / "zero.png"
    render_png(grid, path, colormap="heat")
    img = np.array(Image.open(path))
    assert len({tuple(px) for px in img.reshape(-1, 3)}) == 1
