"""Coarse building-volume grids: aggregation, Gaussian blur, correlation.

The fine height field is summed into coarse cells (total volume in m^3 per
cell), then blurred with a small normalized Gaussian kernel so each cell
carries some of its neighborhood: an isolated high-volume cell should read
differently from one inside a dense district.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grids import GridSpec, Raster
from .voxelize import HeightField


@dataclass(frozen=True)
class BlurKernel:
    """Normalized isotropic Gaussian weights on a (2r+1)^2 window.

    Sigma is measured in coarse cells, not meters.
    """

    sigma: float
    radius: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        n = 2 * self.radius + 1
        if w.shape != (n, n):
            raise ValueError(f"weights must be {n}x{n}, got {w.shape}")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        object.__setattr__(self, "weights", w)


def gaussian_kernel(sigma: float = 0.85, radius: int = 1) -> BlurKernel:
    """Gaussian weights exp(-(dx^2+dy^2) / (2 sigma^2)), normalized to sum 1."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    d = np.arange(-radius, radius + 1, dtype=np.float64)
    dx, dy = np.meshgrid(d, d)
    w = np.exp(-(dx**2 + dy**2) / (2.0 * sigma**2))
    return BlurKernel(sigma=sigma, radius=radius, weights=w / w.sum())


def convolve2d(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """2D convolution with zero padding; output shape equals input shape.

    Zero padding matches the study-area semantics: there are no buildings
    outside the cropped extent.
    """
    values = np.asarray(values, dtype=np.float64)
    n = weights.shape[0]
    r = n // 2
    if r == 0:
        return values * float(weights[0, 0])
    padded = np.pad(values, r, mode="constant", constant_values=0.0)
    out = np.zeros_like(values)
    h, w = values.shape
    for dy in range(n):
        for dx in range(n):
            out += weights[dy, dx] * padded[dy : dy + h, dx : dx + w]
    return out


def gaussian_blur(grid: Raster, kernel: BlurKernel) -> Raster:
    """Blur a volume grid; dimensions and georeferencing unchanged."""
    return Raster(
        spec=grid.spec, values=convolve2d(grid.values, kernel.weights), nodata=grid.nodata
    )


def aggregate_volume(fieldin: HeightField, coarse: GridSpec) -> Raster:
    """Sum the fine height field into per-coarse-cell building volume (m^3).

    Requires the fine grid dimensions to be exact integer multiples of the
    coarse dimensions over the same bbox; anything else is a configuration
    error, since the coarse grid must stay commensurable with the voxel
    counts.  Total volume is conserved exactly (same-order summation).
    """
    fine = fieldin.spec
    if fine.bbox != coarse.bbox:
        raise ConfigError("fine and coarse grids must share one bbox")
    if fine.width % coarse.width or fine.height % coarse.height:
        raise ConfigError(
            f"fine grid {fine.width}x{fine.height} is not an integer multiple "
            f"of coarse {coarse.width}x{coarse.height}"
        )
    fx = fine.width // coarse.width
    fy = fine.height // coarse.height
    cell_area = fine.cell_size_m**2
    blocks = fieldin.values.reshape(coarse.height, fy, coarse.width, fx)
    sums = blocks.sum(axis=(1, 3), dtype=np.float64) * cell_area
    return Raster(spec=coarse, values=sums)


def pearson_correlation(a, b, valid: np.ndarray | None = None) -> float:
    """Standard Pearson r between two equally sized value sets.

    ``valid`` (when given) excludes cells pairwise, e.g. nodata positions.
    Zero variance on either side raises, since r is undefined there.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if valid is not None:
        valid = np.asarray(valid, dtype=bool).ravel()
        a, b = a[valid], b[valid]
    if a.size < 2:
        raise ValueError("need at least 2 paired values")
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt((da**2).sum() * (db**2).sum())
    if denom == 0.0:
        raise ValueError("correlation undefined: zero variance")
    return float((da * db).sum() / denom)
