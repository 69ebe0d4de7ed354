"""Command line entry point: ``denoise``, ``bench`` and ``phantom`` subcommands."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import PipelineConfig, load_config
from .errors import ConfigError, InputError
from .image_io import read_image, write_image
from .pipeline import denoise, make_phantom, run_benchmark
from .svg import export_svg

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

log = logging.getLogger("vecdenoise")


def _config(path) -> PipelineConfig:
    if path is None:
        return PipelineConfig().validate()
    return load_config(path).validate()


def _parse_sigmas(text: str) -> list[float]:
    try:
        values = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sigma list {text!r}") from exc
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("sigmas must be a non-empty list of values >= 0")
    return values


def _dump_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _cmd_denoise(args) -> int:
    cfg = _config(args.config)
    noisy = read_image(args.input)
    art = denoise(noisy, cfg)
    h, w = noisy.shape[:2]
    out_image = Path(args.out_image) if args.out_image else Path(args.input).with_name(
        Path(args.input).stem + "_denoised.png"
    )
    out_image.parent.mkdir(parents=True, exist_ok=True)
    write_image(out_image, art.denoised)
    if args.out_svg:
        Path(args.out_svg).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out_svg).write_text(export_svg(art.scene, w, h), encoding="utf-8")
    if args.out_report:
        _dump_json(
            Path(args.out_report),
            {
                "config": cfg.to_dict(),
                "paths": len(art.scene.paths),
                "path_counts": art.path_counts,
                "final_gamma": art.gamma,
                "loss_traces": art.loss_traces,
            },
        )
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = _config(args.config)
    clean = read_image(args.clean)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    h, w = clean.shape[:2]

    def save(sigma, noisy, art):
        tag = f"{sigma:g}"
        write_image(out_dir / f"noisy_s{tag}.png", noisy)
        write_image(out_dir / f"denoised_s{tag}.png", art.denoised)
        (out_dir / f"scene_s{tag}.svg").write_text(export_svg(art.scene, w, h), encoding="utf-8")

    report = run_benchmark(clean, args.sigmas, cfg, args.seed, record_timings=args.timings, on_result=save)
    _dump_json(out_dir / "report.json", report)
    return EXIT_OK


def _cmd_phantom(args) -> int:
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_image(out, make_phantom(args.size))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vecdenoise", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-scale progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="denoise one image")
    p.add_argument("input")
    p.add_argument("--config")
    p.add_argument("--out-image")
    p.add_argument("--out-svg")
    p.add_argument("--out-report")
    p.set_defaults(func=_cmd_denoise)

    p = sub.add_parser("bench", help="add seeded noise to a clean image, denoise and score")
    p.add_argument("clean")
    p.add_argument("--sigmas", type=_parse_sigmas, default=[5.0, 10.0, 20.0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--out-dir", default="bench_out")
    p.add_argument("--timings", action="store_true", help="record wall-clock runtime_ms (breaks byte equality)")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("phantom", help="write the three-rectangle test image")
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_phantom)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, InputError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
