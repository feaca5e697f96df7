"""Command-line interface: ``masr sample|recover|roundtrip|bench``.

Exit codes: 0 success, 1 runtime failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import pipeline, recovery, sampler
from .imgcore import DimensionError, FormatError, read_pbm, read_pgm, write_pbm, write_pgm

log = logging.getLogger("masr")

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad user input; mapped to exit code 2."""


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _baseline(text: str):
    if text == "matched":
        return text
    rate = float(text)
    if not 0.0 <= rate <= 1.0:
        raise argparse.ArgumentTypeError("baseline rate must be in [0, 1] or 'matched'")
    return rate


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file of flag defaults (flags override it)")
    common.add_argument("--out-dir", type=Path, default=Path("."))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--c", type=float, default=1.3, help="random-rate gain")
    common.add_argument("--d", type=float, default=2.8, help="random-rate saturation factor")
    common.add_argument("--tau", type=float, default=0.9, help="edge-sample threshold in [0, 1]")
    common.add_argument("--zeta", type=float, default=1.05, help="per-generation kernel growth")
    common.add_argument("--rho", type=float, default=0.3, help="flatness coefficient of the post-smoother")
    common.add_argument("--omega-f", type=int, default=3, help="post-smoother window side")
    common.add_argument("--sigma-f", type=float, default=1.5, help="post-smoother kernel std")
    common.add_argument("--no-postprocess", action="store_true", help="same as --rho 0")
    common.add_argument("--noise-var", type=float, default=0.0, help="AWGN variance on the [0, 1] scale")
    common.add_argument(
        "--baseline-random", type=_baseline, default=None, metavar="RATE",
        help="use a pure random mask at RATE (fraction) or 'matched'",
    )
    common.add_argument("--snapshots", action="store_true", help="write one PGM per CA generation")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--csv", type=Path, help="also write CSV output to this file")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="masr", description="Measurement-adaptive sampling and CA recovery.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="adaptively sample a PGM image")
    p.add_argument("input", type=Path)

    p = sub.add_parser("recover", parents=[common], help="recover an image from mask + samples")
    p.add_argument("mask", type=Path, help="PBM mask")
    p.add_argument("sampled", type=Path, help="PGM subsampled image")

    p = sub.add_parser("roundtrip", parents=[common], help="sample, recover and score one image")
    p.add_argument("input", type=Path)

    p = sub.add_parser("bench", parents=[common], help="roundtrip every PGM in a directory")
    p.add_argument("corpus", type=Path)
    p.add_argument("--sweep-c", type=_floats)
    p.add_argument("--sweep-tau", type=_floats)
    p.add_argument("--sweep-rho", type=_floats)
    p.add_argument("--sweep-noise-var", type=_floats)
    parser.commands = sub.choices
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            defaults = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(defaults, dict):
            raise InputError("config file must hold a JSON object")
        defaults = {k.replace("-", "_"): v for k, v in defaults.items()}
        # re-parse so explicit flags win over the file
        for subparser in parser.commands.values():
            subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def run_config(args) -> pipeline.RunConfig:
    try:
        return pipeline.RunConfig(
            sampler=sampler.SamplerConfig(c=args.c, d=args.d, tau=args.tau, seed=args.seed),
            zeta=args.zeta,
            post=recovery.PostprocessConfig(
                rho=0.0 if args.no_postprocess else args.rho,
                omega_f=args.omega_f,
                sigma_f=args.sigma_f,
            ),
            noise_var=args.noise_var,
            baseline_rate=args.baseline_random,
            workers=args.workers,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _snapshot_writer(out_dir: Path, stem: str):
    def write(state: recovery.CaState):
        write_pgm(out_dir / f"{stem}_gen{state.generation}.pgm", state.image)

    return write


def cmd_sample(args, cfg: pipeline.RunConfig) -> int:
    img = read_pgm(args.input)
    stem = args.input.stem
    if cfg.baseline_rate is not None:
        rate = cfg.baseline_rate
        if rate == "matched":
            raise InputError("'matched' baseline needs an adaptive run; use roundtrip")
        mask = sampler.random_baseline_mask(*img.shape, rate, seed=cfg.seed)
        sampled = np.where(mask, img, 0.0)
        report = {"height": img.shape[0], "width": img.shape[1], "live": int(mask.sum()),
                  "rate_percent": 100.0 * mask.mean(), "seed": cfg.seed, "baseline": True}
    else:
        mask, sampled, rep = sampler.sample_image(img, cfg.sampler, workers=cfg.workers)
        report = rep.to_dict()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_pbm(args.out_dir / f"{stem}_mask.pbm", mask)
    write_pgm(args.out_dir / f"{stem}_sampled.pgm", sampled)
    (args.out_dir / f"{stem}_sampling.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"{stem}: rate {report['rate_percent']:.4f}%")
    return EXIT_OK


def cmd_recover(args, cfg: pipeline.RunConfig) -> int:
    mask = read_pbm(args.mask)
    sampled = read_pgm(args.sampled)
    if mask.shape != sampled.shape:
        raise InputError(f"mask {mask.shape} and image {sampled.shape} differ in size")
    if not mask.any():
        raise InputError("mask has no live cells")
    stem = args.sampled.stem.removesuffix("_sampled")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    hook = _snapshot_writer(args.out_dir, stem) if args.snapshots else None
    t0 = time.perf_counter()
    rec = recovery.recover(mask, sampled, zeta=cfg.zeta, on_generation=hook)
    final = recovery.postprocess(rec.image, mask, cfg.post)
    elapsed = time.perf_counter() - t0
    write_pgm(args.out_dir / f"{stem}_recovered.pgm", final)
    report = {"generations": rec.generations, "wall_time_s": elapsed}
    (args.out_dir / f"{stem}_recovery.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"{stem}: {rec.generations} generations")
    return EXIT_OK


def cmd_roundtrip(args, cfg: pipeline.RunConfig) -> int:
    img = read_pgm(args.input)
    stem = args.input.stem
    if args.snapshots:
        args.out_dir.mkdir(parents=True, exist_ok=True)
    hook = _snapshot_writer(args.out_dir, stem) if args.snapshots else None
    res = pipeline.roundtrip(img, cfg, name=stem, on_generation=hook)
    text = pipeline.format_csv([pipeline.csv_row(res)])
    sys.stdout.write(text)
    if args.csv is not None or args.snapshots or args.out_dir != Path("."):
        args.out_dir.mkdir(parents=True, exist_ok=True)
        write_pbm(args.out_dir / f"{stem}_mask.pbm", res.mask)
        write_pgm(args.out_dir / f"{stem}_sampled.pgm", res.sampled)
        write_pgm(args.out_dir / f"{stem}_recovered.pgm", res.recovered)
    if args.csv is not None:
        args.csv.write_text(text)
    return EXIT_OK


def cmd_bench(args, cfg: pipeline.RunConfig) -> int:
    corpus = pipeline.load_corpus(args.corpus)
    result = pipeline.bench(corpus, cfg, workers=args.workers)
    text = result.csv()
    sys.stdout.write(text)
    if args.csv is not None:
        args.csv.write_text(text)
    sweeps = {"c": args.sweep_c, "tau": args.sweep_tau, "rho": args.sweep_rho, "noise-var": args.sweep_noise_var}
    for param, values in sweeps.items():
        if not values:
            continue
        args.out_dir.mkdir(parents=True, exist_ok=True)
        out = args.out_dir / f"sweep_{param}.csv"
        out.write_text(pipeline.sweep(corpus, cfg, param, values, workers=args.workers))
        print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"sample": cmd_sample, "recover": cmd_recover, "roundtrip": cmd_roundtrip, "bench": cmd_bench}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except InputError as exc:
        print(f"masr: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        cfg = run_config(args)
        return COMMANDS[args.command](args, cfg)
    except (InputError, FormatError, DimensionError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"masr: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"masr: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
