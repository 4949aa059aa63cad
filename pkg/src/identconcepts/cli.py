"""Command-line entry point: ``identconcepts run | grad-check | render``."""

import argparse
import logging
import sys

import numpy as np

from . import generators
from .exceptions import ConfigError, DomainError
from .harness import config as config_mod
from .harness import runner
from .harness.gradcheck import VARIANTS, grad_check

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILED = 2
GRAD_TOL = 1e-5


def _cmd_run(args):
    try:
        cfg = config_mod.load_config(args.config)
        seeds = config_mod.seeds_from_env()
        if seeds:
            cfg = cfg.with_seeds(seeds)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = runner.run(cfg, jobs=args.jobs)
    path = runner.write_csv(rows, runner.output_path(cfg, args.out))
    failed = sum(row.failed for row in rows)
    for (method, noise, param), value in runner.summarize(rows).items():
        label = method
        if cfg.experiment == "noise_sweep":
            label += f" noise={noise:g}"
        if param is not None:
            label += f" param={param:g}"
        shown = "failed" if value is None else f"{value:.4f}"
        print(f"{label:32s} mean={shown}")
    print(f"wrote {len(rows)} rows to {path}")
    if failed:
        print(f"{failed} cell(s) failed", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def _cmd_grad_check(args):
    seed = args.seed
    if seed is None:
        env = config_mod.seeds_from_env()
        seed = env[0] if env else 0
    worst = 0.0
    for variant in VARIANTS:
        err = grad_check(variant, seed=[seed, 3], instances=args.instances)
        worst = max(worst, err)
        status = "ok" if err < GRAD_TOL else "FAIL"
        print(f"{variant:16s} max relative error {err:.3e}  {status}")
    return EXIT_OK if worst < GRAD_TOL else EXIT_FAILED


def _parse_z(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--z must be comma-separated numbers, got {text!r}") from exc


def _cmd_render(args):
    try:
        spec = generators.GeneratorSpec(args.generator, image_size=(args.size, args.size))
        image = generators.render(spec, args.z)
    except (ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    generators.write_pgm(image, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="identconcepts",
        description="Seeded concept-discovery experiments on synthetic generators.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log failed cells")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the JSON config")
    p_run.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    p_run.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p_run.set_defaults(func=_cmd_run)

    p_grad = sub.add_parser("grad-check", help="compare closed-form gradients with finite differences")
    p_grad.add_argument("--seed", type=int, default=None)
    p_grad.add_argument("--instances", type=int, default=20)
    p_grad.set_defaults(func=_cmd_grad_check)

    p_render = sub.add_parser("render", help="render one image as PGM")
    p_render.add_argument("--generator", default="fourbars", choices=generators.KINDS)
    p_render.add_argument("--z", required=True, type=_parse_z, help="components, e.g. 0.2,0.4,0.6,0.8")
    p_render.add_argument("--size", type=int, default=16, help="image height and width")
    p_render.add_argument("--out", required=True)
    p_render.set_defaults(func=_cmd_render)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
