"""Command line entry point: ``qkclf <subcommand> ...``.

Exit codes: 0 success, 1 runtime error, 2 invalid configuration or arguments.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import experiment, moments, noise, optim
from .errors import ConfigInvalid, QkclfError
from .noise import NoiseSpec

log = logging.getLogger("qkclf")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _common(p: argparse.ArgumentParser, config: bool = True):
    if config:
        p.add_argument("--config", required=True, type=Path, help="JSON experiment config")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--format", choices=experiment.FORMATS, help="report format (default: config or csv)")
    p.add_argument("--seed", type=_u64, help="override the config seeds with a single seed")
    p.add_argument("--shots", type=_positive, help="override the shot count")
    p.add_argument("--jobs", type=_positive, default=1, help="evaluate sweep points concurrently")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkclf", description="Kernel-based quantum classifier experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("run", help="run a config and emit the sweep report"))

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("--config", required=True, type=Path)

    p = sub.add_parser("repro-toy", help="theta sweep of the toy classifier, ancilla-only measurement")
    _common(p, config=False)
    p.add_argument("--seeds", type=_positive, default=1, help="number of consecutive seeds per theta")
    p.add_argument("--steps", type=_positive, default=41)
    p.add_argument("--depolarizing", type=float, help="optional ancilla depolarizing rate")

    p = sub.add_parser("angle-scan", help="objective over a uniform (theta0, theta1, phi) grid")
    _common(p)
    p.add_argument("--steps", type=_positive, default=33, help="grid points per angle over [0, 2pi]")

    p = sub.add_parser("noise-sweep", help="sweep the ancilla depolarizing rate")
    _common(p)
    p.add_argument("--p-max", type=float, default=0.9)
    p.add_argument("--steps", type=_positive, default=10)

    p = sub.add_parser("shots-plan", help="Chebyshev repetition count for a score")
    p.add_argument("--score", type=float, required=True, help="classification score f")
    p.add_argument("--lam", type=_positive, default=1)
    p.add_argument("--c", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=moments.DEFAULT_DELTA)
    p.add_argument("--noise-scale", type=float, help="effective noise scale s")
    p.add_argument("--depolarizing", type=float, help="ancilla depolarizing rate (sets s = 1 - p)")
    p.add_argument("--format", choices=experiment.FORMATS, default="json")
    p.add_argument("--out", type=Path)
    return parser


def _emit(text: str, out: Optional[Path]):
    if out is not None:
        out.write_text(text)
    else:
        sys.stdout.write(text)


def _load(args) -> experiment.ExperimentConfig:
    cfg = experiment.load_config(args.config)
    return experiment.with_overrides(cfg, seed=args.seed, shots=args.shots)


def _cmd_run(args) -> int:
    cfg = _load(args)
    text = experiment.render(experiment.run_rows(cfg, args.jobs), args.format or cfg.output_format)
    _emit(text, args.out or (Path(cfg.output_path) if cfg.output_path else None))
    return EXIT_OK


def _cmd_validate(args) -> int:
    path = args.config
    if not path.is_file():
        print(f"config: {path} does not exist")
        return EXIT_CONFIG
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        print(f"config: invalid JSON ({exc})")
        return EXIT_CONFIG
    diags = experiment.validate(raw, path.parent)
    for d in diags:
        print(d)
    if not diags:
        print("ok")
    return EXIT_CONFIG if diags else EXIT_OK


def _cmd_repro(args) -> int:
    base = args.seed if args.seed is not None else 0
    nz = NoiseSpec(depolarizing=args.depolarizing) if args.depolarizing is not None else None
    rows = experiment.repro_toy(
        shots=args.shots or 8192, seeds=range(base, base + args.seeds), steps=args.steps, noise_spec=nz
    )
    _emit(experiment.render(rows, args.format or "csv"), args.out)
    return EXIT_OK


def _cmd_angle_scan(args) -> int:
    cfg = _load(args)
    spec = cfg.classifier
    data = cfg.dataset.build()
    grid = optim.uniform_grid(args.steps)
    scan = optim.angle_scan(data, grid, grid, grid, spec.variant, spec.copies)
    rows = list(scan.rows())
    columns = ("theta0", "theta1", "phi", "objective", "variance")
    if (args.format or cfg.output_format) == "json":
        text = json.dumps({"columns": list(columns), "rows": rows, "best": scan.best}, indent=1) + "\n"
    else:
        text = experiment.rows_to_csv(rows, columns, lambda r: [experiment._fmt(v) for v in r])
    _emit(text, args.out)
    t0, t1, ph, best = scan.best
    log.info("grid maximum %.17g at theta0=%.6g theta1=%.6g phi=%.6g", best, t0, t1, ph)
    return EXIT_OK


def _cmd_noise_sweep(args) -> int:
    cfg = _load(args)
    if cfg.noise is not None and cfg.noise.depolarizing is None:
        raise ConfigInvalid(["noise: noise-sweep replaces the noise model with ancilla depolarizing"])
    values = [args.p_max * i / max(args.steps - 1, 1) for i in range(args.steps)]
    raw_sweep = experiment.Sweep("p", tuple(values))
    cfg = experiment.replace(cfg, sweep=raw_sweep, noise=None)
    for v in values:
        try:
            experiment._point(cfg, v)
        except (QkclfError, ValueError) as exc:
            raise ConfigInvalid([f"sweep value {v!r}: {exc}"]) from None
    text = experiment.render(experiment.run_rows(cfg, args.jobs), args.format or cfg.output_format)
    _emit(text, args.out)
    return EXIT_OK


def _cmd_shots_plan(args) -> int:
    plan = moments.plan_shots(args.score, args.lam, args.c, args.delta)
    scale = args.noise_scale
    if args.depolarizing is not None:
        scale = noise.effective_scale(NoiseSpec(depolarizing=args.depolarizing)).scale
    record = {
        "score": plan.score,
        "lam": plan.lam,
        "c": plan.c,
        "delta": plan.delta,
        "mean": plan.mean,
        "variance": plan.variance,
        "epsilon": plan.epsilon,
        "shots": plan.shots,
        "noise_scale": scale,
        "multiplier": None,
        "shots_noisy": None,
        "sign_inverted": None,
    }
    if scale is not None:
        over = noise.noise_overhead(scale, plan.shots)
        record.update(multiplier=over.multiplier, shots_noisy=over.planned_shots, sign_inverted=over.sign_inverted)
    if args.format == "json":
        text = json.dumps(record, indent=1) + "\n"
    else:
        text = experiment.rows_to_csv([record], tuple(record), lambda r: [experiment._fmt(v) for v in r.values()])
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "validate": _cmd_validate,
    "repro-toy": _cmd_repro,
    "angle-scan": _cmd_angle_scan,
    "noise-sweep": _cmd_noise_sweep,
    "shots-plan": _cmd_shots_plan,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigInvalid as exc:
        for d in exc.diagnostics:
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_CONFIG
    except (QkclfError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
