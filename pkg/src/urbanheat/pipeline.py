"""File-driven pipeline: ingest -> rasterize -> voxelize -> aggregate -> blur
-> train -> predict -> evaluate.

Every stage consumes and produces files under the output directory, so a run
can be resumed from any stage (``from_stage``).  Reruns with the same inputs,
config and seed produce byte-identical artifacts: all writers are
deterministic and no artifact embeds timestamps or absolute paths.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .asciigrid import load_grid, read_temperature_grid, save_grid, write_ascii_grid
from .buildings import read_building_list, write_building_list
from .citygml import parse_citygml_buildings
from .errors import ConfigError, DataError
from .grids import BBox, GridSpec, Raster, compute_bbox
from .metrics import evaluate_city
from .models import (
    AugmentParams,
    GBParams,
    RFParams,
    TrainingSet,
    augment,
    fit_gradient_boosting,
    fit_random_forest,
    load_model,
    model_id,
    save_model,
    write_training_csv,
)
from .rasterize import rasterize_footprints
from .render import render_png
from .volume import aggregate_volume, gaussian_blur, gaussian_kernel, pearson_correlation
from .voxelize import HeightField, PatchConfig, voxelize_patch_method

logger = logging.getLogger(__name__)

STAGES = [
    "ingest",
    "rasterize",
    "voxelize",
    "aggregate",
    "blur",
    "train",
    "predict",
    "evaluate",
]


@dataclass
class CityConfig:
    name: str
    buildings: Path
    temperature: Path
    role: str = "train"


@dataclass
class PipelineConfig:
    cities: list[CityConfig]
    out_dir: Path
    fine_cell_m: float = 1.0
    coarse_cell_m: float = 1000.0
    sigma: float = 0.85
    radius: int = 1
    patch_radius: int = 1
    model: str = "rf"
    n_trees: int = 200
    max_depth: int = 3
    min_samples_split: int = 4
    min_samples_leaf: int = 2
    learning_rate: float = 0.1
    augment_samples: int = 0
    augment_noise: float = 0.01
    seed: int = 0
    export_png: bool = False

    def __post_init__(self):
        if not self.cities:
            raise ConfigError("config lists no cities")
        if not any(c.role == "train" for c in self.cities):
            raise ConfigError("config needs at least one city with role 'train'")
        for c in self.cities:
            if c.role not in ("train", "test"):
                raise ConfigError(f"city {c.name}: role must be 'train' or 'test', got {c.role!r}")
        ratio = self.coarse_cell_m / self.fine_cell_m
        if abs(ratio - round(ratio)) > 1e-9 or ratio < 1:
            raise ConfigError(
                f"coarse cell {self.coarse_cell_m} m must be an integer multiple "
                f"of fine cell {self.fine_cell_m} m"
            )
        if self.model not in ("rf", "gbt"):
            raise ConfigError(f"model must be 'rf' or 'gbt', got {self.model!r}")
        names = [c.name for c in self.cities]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate city names in config")

    def city_dir(self, name: str) -> Path:
        return Path(self.out_dir) / "cities" / name


_SCALAR_KEYS = {
    "out_dir": str,
    "fine_cell_m": float,
    "coarse_cell_m": float,
    "sigma": float,
    "radius": int,
    "patch_radius": int,
    "model": str,
    "n_trees": int,
    "max_depth": int,
    "min_samples_split": int,
    "min_samples_leaf": int,
    "learning_rate": float,
    "augment_samples": int,
    "augment_noise": float,
    "seed": int,
    "export_png": bool,
}


def load_config(path: str | Path) -> PipelineConfig:
    """Parse a TOML run config; relative paths resolve against the config file."""
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    base = path.parent
    kwargs = {}
    for key, cast in _SCALAR_KEYS.items():
        if key in data:
            kwargs[key] = cast(data[key])
    unknown = set(data) - set(_SCALAR_KEYS) - {"cities"}
    if unknown:
        raise ConfigError(f"{path}: unknown config key(s): {', '.join(sorted(unknown))}")
    cities = []
    for i, c in enumerate(data.get("cities", [])):
        for req in ("name", "buildings", "temperature"):
            if req not in c:
                raise ConfigError(f"{path}: cities[{i}] missing field '{req}'")
        cities.append(
            CityConfig(
                name=c["name"],
                buildings=(base / c["buildings"]).resolve(),
                temperature=(base / c["temperature"]).resolve(),
                role=c.get("role", "train"),
            )
        )
    if "out_dir" not in kwargs:
        raise ConfigError(f"{path}: missing 'out_dir'")
    kwargs["out_dir"] = (base / kwargs["out_dir"]).resolve()
    return PipelineConfig(cities=cities, **kwargs)


def write_config(cfg: PipelineConfig, path: str | Path) -> None:
    """Emit a run config (paths written relative to the config location)."""
    path = Path(path)
    base = path.parent.resolve()

    def rel(p: Path) -> str:
        try:
            return str(Path(p).resolve().relative_to(base))
        except ValueError:
            return str(Path(p).resolve())

    lines = [f'out_dir = "{rel(cfg.out_dir)}"']
    for key in _SCALAR_KEYS:
        if key == "out_dir":
            continue
        v = getattr(cfg, key)
        if isinstance(v, bool):
            lines.append(f"{key} = {'true' if v else 'false'}")
        elif isinstance(v, str):
            lines.append(f'{key} = "{v}"')
        else:
            lines.append(f"{key} = {v!r}")
    for c in cfg.cities:
        lines += [
            "",
            "[[cities]]",
            f'name = "{c.name}"',
            f'buildings = "{rel(c.buildings)}"',
            f'temperature = "{rel(c.temperature)}"',
            f'role = "{c.role}"',
        ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_buildings_any(path: str | Path):
    """Building list from either the JSON interchange or a CityGML document."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"building file not found: {path}")
    if path.suffix.lower() in (".gml", ".xml"):
        parsed = parse_citygml_buildings(path.read_bytes())
        if parsed.skipped_ids:
            logger.warning(
                "%s: skipped %d building(s): %s",
                path.name,
                len(parsed.skipped_ids),
                ", ".join(parsed.skipped_ids[:10]),
            )
        return parsed.records
    return read_building_list(path)


def _kernel(cfg: PipelineConfig):
    return gaussian_kernel(cfg.sigma, cfg.radius)


def stage_ingest(cfg: PipelineConfig) -> None:
    for c in cfg.cities:
        cdir = cfg.city_dir(c.name)
        cdir.mkdir(parents=True, exist_ok=True)
        records = read_buildings_any(c.buildings)
        if not records:
            raise DataError(f"city {c.name}: no buildings parsed from {c.buildings}")
        bbox = compute_bbox(records)
        # Expand by half a coarse cell so every cell touching the building
        # extent keeps its center inside the crop bbox.
        pad = cfg.coarse_cell_m / 2
        crop_bbox = BBox(bbox.x_min - pad, bbox.x_max + pad, bbox.y_min - pad, bbox.y_max + pad)
        temp = read_temperature_grid(c.temperature, crop_bbox)
        write_building_list(records, cdir / "buildings.json")
        write_ascii_grid(temp, cdir / "temperature.asc")


def _city_specs(cfg: PipelineConfig, name: str) -> tuple[GridSpec, GridSpec]:
    temp = load_grid(cfg.city_dir(name) / "temperature.asc")
    coarse = temp.spec
    if abs(coarse.cell_size_m - cfg.coarse_cell_m) > 1e-9:
        raise ConfigError(
            f"city {name}: temperature grid cells are {coarse.cell_size_m} m "
            f"but the config says coarse_cell_m = {cfg.coarse_cell_m}"
        )
    ratio = int(round(cfg.coarse_cell_m / cfg.fine_cell_m))
    fine = GridSpec(
        bbox=coarse.bbox,
        width=coarse.width * ratio,
        height=coarse.height * ratio,
        cell_size_m=cfg.fine_cell_m,
    )
    return fine, coarse


def stage_rasterize(cfg: PipelineConfig) -> None:
    for c in cfg.cities:
        cdir = cfg.city_dir(c.name)
        records = read_building_list(cdir / "buildings.json")
        fine, _ = _city_specs(cfg, c.name)
        mask, skipped = rasterize_footprints(records, fine)
        save_grid(mask, cdir / "mask.npy")
        (cdir / "rasterize_report.json").write_text(
            json.dumps(
                {"n_buildings": len(records), "skipped_outside_bbox": skipped},
                sort_keys=True,
                indent=1,
            )
            + "\n",
            encoding="utf-8",
        )
        if skipped:
            logger.warning("city %s: %d building(s) outside grid bbox", c.name, len(skipped))


def stage_voxelize(cfg: PipelineConfig) -> None:
    for c in cfg.cities:
        cdir = cfg.city_dir(c.name)
        records = read_building_list(cdir / "buildings.json")
        mask = load_grid(cdir / "mask.npy")
        skipped = set(
            json.loads((cdir / "rasterize_report.json").read_text())["skipped_outside_bbox"]
        )
        usable = [b for b in records if b.id not in skipped]
        hf, report = voxelize_patch_method(
            usable, mask, mask.spec, PatchConfig(patch_radius=cfg.patch_radius)
        )
        save_grid(Raster(spec=hf.spec, values=hf.values), cdir / "heightfield.npy")
        (cdir / "match_report.json").write_text(
            json.dumps(
                {
                    "total_buildings": report.total_buildings,
                    "matched": report.matched,
                    "unmatched_ids": report.unmatched_ids,
                },
                sort_keys=True,
                indent=1,
            )
            + "\n",
            encoding="utf-8",
        )


def stage_aggregate(cfg: PipelineConfig) -> None:
    for c in cfg.cities:
        cdir = cfg.city_dir(c.name)
        hf_grid = load_grid(cdir / "heightfield.npy")
        _, coarse = _city_specs(cfg, c.name)
        hf = HeightField(spec=hf_grid.spec, values=hf_grid.values)
        volume = aggregate_volume(hf, coarse)
        write_ascii_grid(volume, cdir / "volume.asc")


def stage_blur(cfg: PipelineConfig) -> None:
    kernel = _kernel(cfg)
    for c in cfg.cities:
        cdir = cfg.city_dir(c.name)
        volume = load_grid(cdir / "volume.asc")
        write_ascii_grid(gaussian_blur(volume, kernel), cdir / "volume_blurred.asc")


def build_training_set(cfg: PipelineConfig, roles: tuple[str, ...] = ("train",)) -> TrainingSet:
    """Rows of (blurred volume, temperature, city) for cities with the given roles.

    Cells whose temperature is nodata are dropped.  Test-city rows never
    enter here when roles stays at the default, which is the train/test
    separation guarantee.
    """
    feats, targets, cities = [], [], []
    for c in cfg.cities:
        if c.role not in roles:
            continue
        cdir = cfg.city_dir(c.name)
        blurred = load_grid(cdir / "volume_blurred.asc")
        temp = load_grid(cdir / "temperature.asc")
        valid = temp.valid_mask()
        feats.append(blurred.values[valid].reshape(-1, 1))
        targets.append(temp.values[valid])
        cities.extend([c.name] * int(valid.sum()))
    if not feats:
        raise DataError("no training rows: train cities produced no valid cells")
    return TrainingSet(np.vstack(feats), np.concatenate(targets), cities)


def stage_train(cfg: PipelineConfig) -> None:
    ts = build_training_set(cfg)
    out = Path(cfg.out_dir)
    write_training_csv(ts, out / "training.csv")
    if cfg.augment_samples > 0:
        ts = augment(
            ts,
            AugmentParams(
                n_samples=cfg.augment_samples, noise_level=cfg.augment_noise, seed=cfg.seed
            ),
        )
    if cfg.model == "rf":
        model = fit_random_forest(
            ts,
            RFParams(
                n_trees=cfg.n_trees,
                max_depth=cfg.max_depth,
                min_samples_split=cfg.min_samples_split,
                min_samples_leaf=cfg.min_samples_leaf,
                seed=cfg.seed,
            ),
        )
    else:
        model = fit_gradient_boosting(
            ts,
            GBParams(
                n_trees=cfg.n_trees,
                max_depth=cfg.max_depth,
                learning_rate=cfg.learning_rate,
                seed=cfg.seed,
            ),
        )
    save_model(model, out / "model.json")


def stage_predict(cfg: PipelineConfig) -> None:
    from .metrics import predict_grid

    model = load_model(Path(cfg.out_dir) / "model.json")
    kernel = _kernel(cfg)
    for c in cfg.cities:
        cdir = cfg.city_dir(c.name)
        volume = load_grid(cdir / "volume.asc")
        prediction = predict_grid(model, volume, kernel)
        write_ascii_grid(prediction, cdir / "prediction.asc")


def stage_evaluate(cfg: PipelineConfig) -> None:
    model = load_model(Path(cfg.out_dir) / "model.json")
    mid = model_id(model)
    kernel = _kernel(cfg)
    summary = {"model_id": mid, "cities": {}}
    for c in cfg.cities:
        cdir = cfg.city_dir(c.name)
        volume = load_grid(cdir / "volume.asc")
        temp = load_grid(cdir / "temperature.asc")
        blurred = load_grid(cdir / "volume_blurred.asc")
        ev = evaluate_city(model, volume, temp, kernel, city=c.name, model_ref=mid)
        ev.report.difference_grid = "difference.asc"
        write_ascii_grid(ev.difference, cdir / "difference.asc")
        write_ascii_grid(ev.prediction, cdir / "prediction.asc")
        (cdir / "eval.json").write_text(ev.report.to_json(), encoding="utf-8")
        (cdir / "eval.txt").write_text(ev.report.to_text(), encoding="utf-8")
        if cfg.export_png:
            render_png(ev.prediction, cdir / "prediction.png", "heat")
            render_png(temp, cdir / "temperature.png", "heat")
            render_png(ev.difference, cdir / "difference.png", "diverging", center_zero=True)
            render_png(volume, cdir / "volume.png", "heat")
        valid = temp.valid_mask()

        def corr(grid):
            try:
                return pearson_correlation(grid.values, temp.values, valid=valid)
            except ValueError:
                return None

        summary["cities"][c.name] = {
            "role": c.role,
            "mse": ev.report.mse,
            "ssim": ev.report.ssim,
            "pearson_r": ev.report.pearson_r,
            "r_volume_vs_temp": corr(volume),
            "r_blurred_volume_vs_temp": corr(blurred),
        }
    (Path(cfg.out_dir) / "report.json").write_text(
        json.dumps(summary, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


_STAGE_FNS = {
    "ingest": stage_ingest,
    "rasterize": stage_rasterize,
    "voxelize": stage_voxelize,
    "aggregate": stage_aggregate,
    "blur": stage_blur,
    "train": stage_train,
    "predict": stage_predict,
    "evaluate": stage_evaluate,
}


def run_pipeline(cfg: PipelineConfig, from_stage: str = "ingest") -> Path:
    """Execute stages in order starting at ``from_stage``.

    A failing stage aborts the run with the stage name in the error; the
    INCOMPLETE marker flags partial outputs until a run finishes.
    """
    if from_stage not in STAGES:
        raise ConfigError(f"unknown stage {from_stage!r}, valid: {', '.join(STAGES)}")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / "INCOMPLETE"
    for stage in STAGES[STAGES.index(from_stage) :]:
        marker.write_text(stage + "\n", encoding="utf-8")
        logger.info("stage %s", stage)
        try:
            _STAGE_FNS[stage](cfg)
        except (ConfigError, DataError) as exc:
            raise type(exc)(f"stage {stage}: {exc}") from exc
        except Exception as exc:
            raise RuntimeError(f"stage {stage}: {exc}") from exc
    marker.unlink()
    return out / "report.json"
