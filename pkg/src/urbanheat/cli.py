"""Command-line driver for the pipeline, the synthetic generator and the service.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .asciigrid import load_grid, write_ascii_grid
from .errors import ConfigError, DataError
from .metrics import predict_grid
from .models import load_model
from .pipeline import (
    STAGES,
    CityConfig,
    PipelineConfig,
    load_config,
    run_pipeline,
    write_config,
)
from .render import COLORMAPS, render_png
from .synth import generate_city, write_city
from .volume import gaussian_kernel

logger = logging.getLogger(__name__)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="run config (TOML)")
    p.add_argument("--seed", type=int, help="master RNG seed (overrides config)")
    p.add_argument("--out-dir", type=Path, help="output directory (overrides config)")
    p.add_argument("--fine-res", type=float, help="fine cell size in meters")
    p.add_argument("--coarse-res", type=float, help="coarse cell size in meters")
    p.add_argument("--sigma", type=float, help="Gaussian blur sigma (coarse cells)")
    p.add_argument("--radius", type=int, help="Gaussian blur radius (coarse cells)")
    p.add_argument("--model", choices=["rf", "gbt"], help="ensemble type")


_OVERRIDES = {
    "seed": "seed",
    "out_dir": "out_dir",
    "fine_res": "fine_cell_m",
    "coarse_res": "coarse_cell_m",
    "sigma": "sigma",
    "radius": "radius",
    "model": "model",
}


def _config_from_args(args) -> PipelineConfig:
    if not args.config:
        raise ConfigError("this command needs --config pointing at a run config")
    cfg = load_config(args.config)
    changes = {}
    for arg_name, cfg_name in _OVERRIDES.items():
        v = getattr(args, arg_name, None)
        if v is not None:
            changes[cfg_name] = v
    return replace(cfg, **changes) if changes else cfg


def cmd_synth(args) -> int:
    out_dir = args.out_dir or Path("synth_out")
    extent_x, extent_y = (float(v) for v in args.extent.split("x"))
    fine = args.fine_res if args.fine_res is not None else 1.0
    coarse = args.coarse_res if args.coarse_res is not None else 1000.0
    seed = args.seed if args.seed is not None else 0
    sigma = args.sigma if args.sigma is not None else 0.85
    radius = args.radius if args.radius is not None else 1
    cities = []
    for i in range(args.n_cities):
        name = f"city_{i}"
        city = generate_city(
            seed=[seed, i],
            n_buildings=args.n_buildings,
            extent_x_m=extent_x,
            extent_y_m=extent_y,
            fine_cell_m=fine,
            coarse_cell_m=coarse,
            noise_frac=args.noise_frac,
            sigma=sigma,
            radius=radius,
            name=name,
        )
        paths = write_city(city, out_dir)
        role = "test" if args.n_cities > 1 and i == args.n_cities - 1 else "train"
        cities.append(
            CityConfig(
                name=name,
                buildings=paths["buildings"],
                temperature=paths["temperature"],
                role=role,
            )
        )
        logger.info("generated %s: %d buildings (%s)", name, len(city.buildings), role)
    cfg = PipelineConfig(
        cities=cities,
        out_dir=Path(out_dir) / "run",
        fine_cell_m=fine,
        coarse_cell_m=coarse,
        sigma=sigma,
        radius=radius,
        model=args.model or "rf",
        n_trees=args.n_trees,
        seed=seed,
    )
    write_config(cfg, Path(out_dir) / "run.toml")
    print(Path(out_dir) / "run.toml")
    return 0


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    report = run_pipeline(cfg, from_stage=args.from_stage)
    print(report)
    return 0


def _make_stage_cmd(stage: str):
    def handler(args) -> int:
        cfg = _config_from_args(args)
        from .pipeline import _STAGE_FNS

        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        _STAGE_FNS[stage](cfg)
        return 0

    return handler


def cmd_predict(args) -> int:
    if args.volume or args.model_path or args.out:
        if not (args.volume and args.model_path and args.out):
            raise ConfigError("file mode needs --model-path, --volume and --out together")
        model = load_model(args.model_path)
        volume = load_grid(args.volume)
        sigma = args.sigma if args.sigma is not None else 0.85
        radius = args.radius if args.radius is not None else 1
        prediction = predict_grid(model, volume, gaussian_kernel(sigma, radius))
        write_ascii_grid(prediction, args.out)
        return 0
    return _make_stage_cmd("predict")(args)


def cmd_export_png(args) -> int:
    grid = load_grid(args.grid)
    render_png(
        grid,
        args.out,
        colormap=args.colormap,
        center_zero=args.center_zero,
        scale=args.scale,
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        model_path=args.model_path,
        data_dir=args.data_dir,
        max_grid_cells=args.max_grid_cells,
        cors_origins=args.cors_origin,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urbanheat",
        description="Building-volume voxelization and air-temperature prediction pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic cities plus a ready run config")
    _add_common(p)
    p.add_argument("--n-buildings", type=int, default=200)
    p.add_argument("--n-cities", type=int, default=3)
    p.add_argument("--extent", default="8000x8000", help="city extent in meters, e.g. 8000x8000")
    p.add_argument("--noise-frac", type=float, default=0.1)
    p.add_argument("--n-trees", type=int, default=200)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("run", help="run the full pipeline from a config")
    _add_common(p)
    p.add_argument("--from", dest="from_stage", default="ingest", choices=STAGES)
    p.set_defaults(handler=cmd_run)

    for stage in STAGES:
        if stage == "predict":
            continue
        p = sub.add_parser(stage, help=f"run only the {stage} stage")
        _add_common(p)
        p.set_defaults(handler=_make_stage_cmd(stage))

    p = sub.add_parser("predict", help="predict temperatures (config mode or file mode)")
    _add_common(p)
    p.add_argument("--model-path", type=Path, help="model file (file mode)")
    p.add_argument("--volume", type=Path, help="volume grid .asc/.npy (file mode)")
    p.add_argument("--out", type=Path, help="output prediction .asc (file mode)")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("export-png", help="render a grid file to PNG")
    p.add_argument("--grid", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--colormap", choices=sorted(COLORMAPS), default="heat")
    p.add_argument("--center-zero", action="store_true")
    p.add_argument("--scale", type=int, default=1, help="integer pixel upscaling")
    p.set_defaults(handler=cmd_export_png)

    p = sub.add_parser("serve", help="start the what-if prediction service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--model-path", type=Path, required=True)
    p.add_argument("--data-dir", type=Path, default=Path("scenarios"))
    p.add_argument("--max-grid-cells", type=int, default=1_000_000)
    p.add_argument("--cors-origin", action="append", default=[])
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
