"""Command-line front end: run, converge, validate-config."""

from __future__ import annotations

import argparse
import sys

from .driver import convergence_study, run_simulation
from .exceptions import ConfigError, StefanstError
from .output import ensure_dir, write_convergence
from .scenarios import (apply_overrides, build_scenario, load_config,
                        validate_config)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def build_parser():
    p = argparse.ArgumentParser(
        prog="stefanst",
        description="Convection-coupled melting/solidification simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--steps", type=int, default=None,
                     help="override the configured step count")
    run.add_argument("--override", action="append", default=[],
                     metavar="KEY=VALUE",
                     help="override a config entry (repeatable)")

    conv = sub.add_parser("converge", help="mesh-refinement study")
    conv.add_argument("--config", required=True)
    conv.add_argument("--h", required=True,
                      help="comma-separated mesh sizes, e.g. 2e-3,1e-3,5e-4")
    conv.add_argument("--out", default=".",
                      help="directory for convergence.csv (default: cwd)")

    val = sub.add_parser("validate-config", help="check a config file")
    val.add_argument("path")
    return p


def _load(path, overrides=None):
    cfg = load_config(path)
    apply_overrides(cfg, overrides)
    return build_scenario(cfg)


def cmd_run(args):
    scenario = _load(args.config, args.override)
    try:
        result = run_simulation(scenario, out_dir=args.out, steps=args.steps)
    except StefanstError as exc:
        step = getattr(exc, "step", "?")
        print(f"error at step {step}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    last = result.records[-1] if result.records else None
    if last is not None:
        print(f"finished {result.steps_run} steps, t = {last[0]:g} s, "
              f"I = {last[2]:.6f}")
    if result.molten_step is not None:
        print(f"interface vanished at step {result.molten_step}")
    return EXIT_OK


def cmd_converge(args):
    cfg = load_config(args.config)
    try:
        h_list = [float(v) for v in args.h.split(",") if v]
    except ValueError as exc:
        raise ConfigError(f"bad --h list: {exc}") from exc
    if len(h_list) < 3:
        raise ConfigError("--h needs at least 3 mesh sizes")
    validate_config(cfg)
    try:
        rows, rate = convergence_study(cfg, h_list)
    except StefanstError as exc:
        step = getattr(exc, "step", "?")
        print(f"error at step {step}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    ensure_dir(args.out)
    path = f"{args.out}/convergence.csv"
    write_convergence(path, [(r.h, r.nodes, r.abs_err, r.rel_err)
                             for r in rows])
    for r in rows:
        print(f"h={r.h:g}  nodes={r.nodes}  abs={r.abs_err:.6g}  "
              f"rel={r.rel_err:.6g}")
    print(f"fitted rate: {rate:.3f}")
    return EXIT_OK


def cmd_validate(args):
    validate_config(load_config(args.path))
    print("config OK")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "converge":
            return cmd_converge(args)
        return cmd_validate(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StefanstError as exc:
        step = getattr(exc, "step", "?")
        print(f"error at step {step}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
