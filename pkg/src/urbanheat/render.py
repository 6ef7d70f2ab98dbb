"""PNG heatmap export with fixed, documented colormaps.

Color stops are part of the output contract (the browser UI mirrors them),
so they live here as plain hex lists and interpolation is piecewise linear
in RGB.  Rendering is deterministic: same grid + colormap = same bytes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ConfigError
from .grids import Raster

# Sequential map for absolute values (volume, temperature), dark to bright.
HEAT_STOPS = ["#0d0887", "#7e03a8", "#cc4778", "#f89441", "#f0f921"]
# Diverging map for difference grids, centered at 0.
DIVERGING_STOPS = ["#2166ac", "#f7f7f7", "#b2182b"]
# Binary/grayscale map (footprint masks: 0 black, 1 white).
GRAY_STOPS = ["#000000", "#ffffff"]
# Cells without data render in this flat gray.
NODATA_COLOR = "#808080"

COLORMAPS = {"heat": HEAT_STOPS, "diverging": DIVERGING_STOPS, "gray": GRAY_STOPS}


def _hex_to_rgb(h: str) -> tuple[int, int, int]:
    h = h.lstrip("#")
    return int(h[0:2], 16), int(h[2:4], 16), int(h[4:6], 16)


def colormap_lookup(name: str, t: np.ndarray) -> np.ndarray:
    """Map t in [0, 1] to uint8 RGB via the named stops (clamped outside)."""
    if name not in COLORMAPS:
        raise ConfigError(f"unknown colormap {name!r}, pick one of {sorted(COLORMAPS)}")
    stops = np.array([_hex_to_rgb(h) for h in COLORMAPS[name]], dtype=np.float64)
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    pos = t * (len(stops) - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, len(stops) - 1)
    frac = (pos - lo)[..., None]
    rgb = stops[lo] * (1 - frac) + stops[hi] * frac
    return np.round(rgb).astype(np.uint8)


def render_png(
    grid: Raster,
    path: str | Path,
    colormap: str = "heat",
    vmin: float | None = None,
    vmax: float | None = None,
    center_zero: bool = False,
    scale: int = 1,
) -> tuple[float, float]:
    """Render a raster to PNG plus a ``<name>.legend.txt`` sidecar with min/max.

    ``center_zero`` makes the value->color mapping symmetric around 0, which
    is what difference maps want with the diverging colormap.  Returns the
    (vmin, vmax) actually used.
    """
    valid = grid.valid_mask()
    vals = grid.values.astype(np.float64)
    if valid.any():
        lo = float(vals[valid].min()) if vmin is None else vmin
        hi = float(vals[valid].max()) if vmax is None else vmax
    else:
        lo, hi = 0.0, 1.0
    if center_zero:
        bound = max(abs(lo), abs(hi), 1e-30)
        lo, hi = -bound, bound
    span = hi - lo if hi > lo else 1.0
    t = (vals - lo) / span
    rgb = colormap_lookup(colormap, t)
    rgb[~valid] = _hex_to_rgb(NODATA_COLOR)
    if scale > 1:
        rgb = np.repeat(np.repeat(rgb, scale, axis=0), scale, axis=1)
    Image.fromarray(rgb, mode="RGB").save(str(path), format="PNG")
    legend = Path(str(path) + ".legend.txt")
    legend.write_text(
        f"colormap {colormap}\nvmin {lo!r}\nvmax {hi!r}\n", encoding="utf-8"
    )
    return lo, hi
