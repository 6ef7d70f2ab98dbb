"""Prediction-vs-truth comparison: MSE, SSIM, difference maps, city reports.

MSE alone says little about whether spatial patterns were captured, so grids
are also compared structurally with SSIM over sliding windows.  The report
keeps a slot for an externally computed perceptual (LPIPS-style) score; that
metric needs pretrained network weights and is not computed here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .grids import Raster
from .models import predict
from .volume import BlurKernel, gaussian_blur, pearson_correlation


def _valid_pair(pred, truth, nodata):
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    if nodata is None:
        valid = np.ones(pred.shape, dtype=bool)
    else:
        valid = (pred != nodata) & (truth != nodata)
    return pred, truth, valid


def mse(pred, truth, nodata: float | None = None) -> float:
    """Mean squared difference over pairwise-valid cells."""
    pred, truth, valid = _valid_pair(pred, truth, nodata)
    if not valid.any():
        raise ValueError("no valid cell pairs to compare")
    d = pred[valid] - truth[valid]
    return float((d**2).mean())


def difference_map(pred, truth, nodata: float | None = None) -> np.ndarray:
    """Signed per-cell pred - truth; nodata cells propagate."""
    pred, truth, valid = _valid_pair(pred, truth, nodata)
    out = pred - truth
    if nodata is not None:
        out[~valid] = nodata
    return out


def ssim(pred, truth, window: int = 5, nodata: float | None = None) -> float:
    """Mean local structural similarity over all fully valid sliding windows.

    Uniform (unweighted) windows with biased moment estimates; stabilizers
    C1 = (0.01 L)^2 and C2 = (0.03 L)^2 where L is the joint observed value
    range of both grids (temperature rasters have no fixed bit depth).  Two
    identical grids score exactly 1.
    """
    pred, truth, valid = _valid_pair(pred, truth, nodata)
    h, w = pred.shape
    if h < window or w < window:
        raise ValueError(f"grids {h}x{w} smaller than the {window}x{window} window")
    if not valid.any():
        raise ValueError("no valid cells")
    joint = np.concatenate([pred[valid], truth[valid]])
    data_range = float(joint.max() - joint.min())
    if data_range == 0.0:
        if np.array_equal(pred[valid], truth[valid]):
            return 1.0
        data_range = 1.0
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    wa = sliding_window_view(pred, (window, window))
    wb = sliding_window_view(truth, (window, window))
    wv = sliding_window_view(valid, (window, window)).all(axis=(2, 3))
    if not wv.any():
        raise ValueError("no fully valid windows")
    mu_a = wa.mean(axis=(2, 3))
    mu_b = wb.mean(axis=(2, 3))
    var_a = (wa**2).mean(axis=(2, 3)) - mu_a**2
    var_b = (wb**2).mean(axis=(2, 3)) - mu_b**2
    cov = (wa * wb).mean(axis=(2, 3)) - mu_a * mu_b
    s = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    )
    return float(s[wv].mean())


@dataclass
class EvalReport:
    """Per-city comparison summary between prediction and ground truth."""

    city: str
    mse: float
    ssim: float
    pearson_r: float | None
    pred_min: float
    pred_max: float
    truth_min: float
    truth_max: float
    lpips: float | None = None  # externally computed, if at all
    difference_grid: str | None = None
    model_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "city": self.city,
            "mse": self.mse,
            "ssim": self.ssim,
            "pearson_r": self.pearson_r,
            "lpips": self.lpips,
            "prediction_range": [self.pred_min, self.pred_max],
            "truth_range": [self.truth_min, self.truth_max],
            "difference_grid": self.difference_grid,
            "model_id": self.model_id,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def to_text(self) -> str:
        rows = [
            ("city", self.city),
            ("mse [degC^2]", f"{self.mse:.6g}"),
            ("ssim", f"{self.ssim:.6g}"),
            ("pearson r", "n/a" if self.pearson_r is None else f"{self.pearson_r:.6g}"),
            ("lpips (external)", "n/a" if self.lpips is None else f"{self.lpips:.6g}"),
            ("prediction range", f"{self.pred_min:.2f} .. {self.pred_max:.2f} degC"),
            ("truth range", f"{self.truth_min:.2f} .. {self.truth_max:.2f} degC"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows) + "\n"


@dataclass
class CityEvaluation:
    report: EvalReport
    prediction: Raster
    difference: Raster


def predict_grid(model, volume: Raster, kernel: BlurKernel) -> Raster:
    """Blur the volume grid, then predict one temperature per cell."""
    blurred = gaussian_blur(volume, kernel)
    feats = blurred.values.reshape(-1, 1)
    temps = predict(model, feats)
    return Raster(spec=volume.spec, values=temps.reshape(volume.spec.shape))


def evaluate_city(
    model,
    volume: Raster,
    truth: Raster,
    kernel: BlurKernel,
    city: str = "",
    model_ref: str | None = None,
) -> CityEvaluation:
    """Run blur -> per-cell prediction and assemble the comparison report.

    A constant prediction leaves Pearson r undefined; the report then simply
    carries no correlation instead of failing the evaluation.
    """
    if volume.spec.shape != truth.spec.shape:
        raise ValueError(
            f"volume grid {volume.spec.shape} and truth {truth.spec.shape} differ"
        )
    prediction = predict_grid(model, volume, kernel)
    valid = truth.valid_mask()
    try:
        r = pearson_correlation(prediction.values, truth.values, valid=valid)
    except ValueError:
        r = None
    diff_values = difference_map(prediction.values, truth.values, nodata=truth.nodata)
    report = EvalReport(
        city=city,
        mse=mse(prediction.values, truth.values, nodata=truth.nodata),
        ssim=ssim(prediction.values, truth.values, nodata=truth.nodata),
        pearson_r=r,
        pred_min=float(prediction.values[valid].min()),
        pred_max=float(prediction.values[valid].max()),
        truth_min=float(truth.values[valid].min()),
        truth_max=float(truth.values[valid].max()),
        model_id=model_ref,
    )
    return CityEvaluation(
        report=report,
        prediction=prediction,
        difference=Raster(spec=truth.spec, values=diff_values, nodata=truth.nodata),
    )
