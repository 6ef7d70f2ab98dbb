"""Aggregation, blur kernel and correlation tests."""

import math

import numpy as np
import pytest

from urbanheat.errors import ConfigError
from urbanheat.grids import BBox, GridSpec, Raster
from urbanheat.voxelize import HeightField
from urbanheat.volume import (
    aggregate_volume,
    convolve2d,
    gaussian_blur,
    gaussian_kernel,
    pearson_correlation,
)


class TestKernel:
    def test_radius_zero_identity(self):
        k = gaussian_kernel(0.85, 0)
        assert k.weights.shape == (1, 1)
        assert k.weights[0, 0] == 1.0

    def test_default_weights_match_direct_formula(self):
        # recomputed by direct evaluation: exp(-(dx^2+dy^2)/(2*0.85^2)), normalized
        k = gaussian_kernel(0.85, 1)
        raw = np.array(
            [
                [math.exp(-(dx * dx + dy * dy) / (2 * 0.85**2)) for dx in (-1, 0, 1)]
                for dy in (-1, 0, 1)
            ]
        )
        expected = raw / raw.sum()
        np.testing.assert_allclose(k.weights, expected, atol=1e-15)
        assert k.weights[1, 1] == pytest.approx(0.2497, abs=1e-4)
        assert k.weights[0, 1] == pytest.approx(0.1250, abs=1e-4)
        assert k.weights[0, 0] == pytest.approx(0.0626, abs=1e-4)

    def test_normalization_many_params(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            k = gaussian_kernel(float(rng.uniform(0.1, 5)), int(rng.integers(0, 5)))
            assert abs(k.weights.sum() - 1.0) < 1e-9

    def test_symmetry(self):
        k = gaussian_kernel(1.3, 2).weights
        np.testing.assert_array_equal(k, k.T)
        np.testing.assert_array_equal(k, np.rot90(k))
        np.testing.assert_array_equal(k, k[::-1, :])

    def test_sigma_domain_error(self):
        with pytest.raises(ValueError, match="sigma"):
            gaussian_kernel(0.0, 1)


def _volume_grid(values, cell=1000.0):
    values = np.asarray(values, dtype=float)
    nrows, ncols = values.shape
    bbox = BBox(0.0, ncols * cell, 0.0, nrows * cell)
    return Raster(spec=GridSpec(bbox=bbox, width=ncols, height=nrows, cell_size_m=cell),
                  values=values)


class TestBlur:
    def test_constant_interior_stays_constant(self):
        g = _volume_grid(np.full((8, 8), 7.0))
        out = gaussian_blur(g, gaussian_kernel(0.85, 1))
        np.testing.assert_allclose(out.values[1:-1, 1:-1], 7.0, atol=1e-12)

    def test_interior_impulse_stamps_kernel(self):
        k = gaussian_kernel(0.85, 1)
        vals = np.zeros((7, 7))
        vals[3, 3] = 1.0
        out = gaussian_blur(_volume_grid(vals), k)
        np.testing.assert_allclose(out.values[2:5, 2:5], k.weights, atol=1e-15)
        assert out.values.sum() == pytest.approx(1.0)

    def test_corner_impulse_loses_mass(self):
        k = gaussian_kernel(0.85, 1)
        vals = np.zeros((5, 5))
        vals[0, 0] = 1.0
        out = gaussian_blur(_volume_grid(vals), k)
        # only the 2x2 overlapping weights appear
        np.testing.assert_allclose(out.values[:2, :2], k.weights[1:, 1:], atol=1e-15)
        assert out.values.sum() == pytest.approx(float(k.weights[1:, 1:].sum()))
        assert out.values.sum() < 1.0

    def test_identity_kernel_is_identity(self):
        rng = np.random.default_rng(5)
        g = _volume_grid(rng.uniform(0, 100, size=(6, 9)))
        out = gaussian_blur(g, gaussian_kernel(0.85, 0))
        np.testing.assert_array_equal(out.values, g.values)

    def test_linearity(self):
        rng = np.random.default_rng(6)
        k = gaussian_kernel(0.85, 1)
        a = rng.uniform(0, 10, size=(10, 12))
        b = rng.uniform(0, 10, size=(10, 12))
        alpha, beta = 2.5, -1.25
        lhs = convolve2d(alpha * a + beta * b, k.weights)
        rhs = alpha * convolve2d(a, k.weights) + beta * convolve2d(b, k.weights)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)


class TestAggregate:
    def _field(self, values, cell=1.0):
        values = np.asarray(values, dtype=float)
        nrows, ncols = values.shape
        bbox = BBox(0.0, ncols * cell, 0.0, nrows * cell)
        spec = GridSpec(bbox=bbox, width=ncols, height=nrows, cell_size_m=cell)
        return HeightField(spec=spec, values=values)

    def test_uniform_partition(self):
        field = self._field(np.ones((2000, 2000)))
        coarse = GridSpec(bbox=field.spec.bbox, width=2, height=2, cell_size_m=1000.0)
        out = aggregate_volume(field, coarse)
        np.testing.assert_allclose(out.values, 1_000_000.0)

    def test_zero_field(self):
        field = self._field(np.zeros((20, 20)))
        coarse = GridSpec(bbox=field.spec.bbox, width=2, height=2, cell_size_m=10.0)
        assert not aggregate_volume(field, coarse).values.any()

    def test_blocks_match_bruteforce(self):
        rng = np.random.default_rng(9)
        field = self._field(rng.uniform(0, 40, size=(24, 36)))
        coarse = GridSpec(bbox=field.spec.bbox, width=6, height=4, cell_size_m=6.0)
        out = aggregate_volume(field, coarse)
        for R in range(4):
            for C in range(6):
                block = field.values[R * 6 : (R + 1) * 6, C * 6 : (C + 1) * 6]
                assert out.values[R, C] == pytest.approx(block.sum(), rel=1e-12)

    def test_conservation(self):
        rng = np.random.default_rng(10)
        field = self._field(rng.uniform(0, 30, size=(40, 60)), cell=2.0)
        coarse = GridSpec(bbox=field.spec.bbox, width=6, height=4, cell_size_m=20.0)
        out = aggregate_volume(field, coarse)
        total = field.values.sum(dtype=np.float64) * 4.0
        assert abs(out.values.sum() - total) <= 1e-6 * total

    def test_non_commensurable_raises(self):
        field = self._field(np.ones((10, 10)))
        coarse = GridSpec(bbox=field.spec.bbox, width=3, height=2, cell_size_m=4.0)
        with pytest.raises(ConfigError, match="integer multiple"):
            aggregate_volume(field, coarse)


class TestPearson:
    def test_identity(self):
        a = np.array([1.0, 2, 3, 4, 5])
        assert pearson_correlation(a, a) == pytest.approx(1.0)

    def test_negation(self):
        a = np.array([1.0, 2, 3, 4, 5])
        assert pearson_correlation(a, -a) == pytest.approx(-1.0)

    def test_matches_textbook_formula(self):
        a = np.array([2.1, 4.7, 0.3, 8.8, 5.5, 1.2, 9.9, 3.3, 6.6, 7.7])
        b = np.array([1.9, 5.2, 1.1, 7.4, 4.9, 2.2, 8.8, 2.9, 7.2, 6.1])
        n = len(a)
        # independent computation straight from the sum formula
        num = n * (a * b).sum() - a.sum() * b.sum()
        den = math.sqrt(n * (a**2).sum() - a.sum() ** 2) * math.sqrt(
            n * (b**2).sum() - b.sum() ** 2
        )
        assert pearson_correlation(a, b) == pytest.approx(num / den, abs=1e-12)

    def test_scale_shift_invariance(self):
        rng = np.random.default_rng(13)
        a = rng.normal(size=50)
        b = rng.normal(size=50)
        r1 = pearson_correlation(a, b)
        r2 = pearson_correlation(2 * a + 3, b)
        assert abs(r1 - r2) < 1e-12

    def test_zero_variance_raises(self):
        with pytest.raises(ValueError, match="zero variance"):
            pearson_correlation(np.ones(5), np.arange(5.0))

    def test_pairwise_valid_mask(self):
        a = np.array([1.0, 2, 3, -999, 5])
        b = np.array([2.0, 4, 6, 8, -999])
        valid = (a != -999) & (b != -999)
        r = pearson_correlation(a, b, valid=valid)
        assert r == pytest.approx(1.0)


def test_blur_raises_correlation_on_synthetic_city():
    # temperature := affine(blur(volume)) + noise reproduces the qualitative
    # effect: the blurred volume correlates at least as well as the raw one.
    rng = np.random.default_rng(77)
    k = gaussian_kernel(0.85, 1)
    wins = 0
    for trial in range(10):
        vol = rng.uniform(0, 1e5, size=(10, 8)) * (rng.random((10, 8)) < 0.4)
        blurred = convolve2d(vol, k.weights)
        signal = 14.0 + 3e-5 * blurred
        temp = signal + rng.normal(0, 0.1 * signal.std(), size=signal.shape)
        if pearson_correlation(blurred, temp) >= pearson_correlation(vol, temp):
            wins += 1
    assert wins >= 9
