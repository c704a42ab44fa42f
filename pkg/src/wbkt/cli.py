"""Command-line entry point: ``wbkt run|convergence|list``.

Exit codes: 0 on success, 1 on a solver error, 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, SolverError, WBKTError
from .harness import CONFIG_KEYS, EXPERIMENTS, load_config, run_convergence, run_experiment


def _key_help() -> str:
    width = max(len(k) for k in CONFIG_KEYS)
    lines = ["config keys (key = value, '#' starts a comment):"]
    lines += [f"  {k:<{width}}  {v}" for k, v in CONFIG_KEYS.items()]
    return "\n".join(lines)


def _overrides(args) -> dict[str, str]:
    out = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    if getattr(args, "output_dir", None):
        out["output_dir"] = args.output_dir
    if getattr(args, "snapshot_times", None):
        out["snapshot_times"] = args.snapshot_times
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wbkt", description="Well-balanced central schemes for "
                                "2D balance laws: experiment runner.",
                                epilog=_key_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="experiment config file")
    common.add_argument("--output-dir", help="directory for output files")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key (repeatable)")

    r = sub.add_parser("run", parents=[common], help="run one experiment",
                       epilog=_key_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    r.add_argument("--snapshot-times", metavar="T1,T2,...", help="extra output times")

    c = sub.add_parser("convergence", parents=[common], help="grid convergence table",
                       epilog=_key_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    c.add_argument("--levels", default="40,80,160,320",
                   help="comma-separated resolutions; the last one is the reference")

    sub.add_parser("list", help="list built-in experiments")
    return p


def _cmd_list() -> int:
    width = max(len(n) for n in EXPERIMENTS)
    for name, exp in EXPERIMENTS.items():
        d = exp.defaults
        print(f"{name:<{width}}  {d.get('nx')}x{d.get('ny')}  t_end={d.get('t_end')}  {exp.description}")
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    rep = run_experiment(cfg)
    print(f"experiment {cfg.experiment} ({cfg.scheme}) {cfg.nx}x{cfg.ny}: "
          f"t={rep.t:.6g} after {rep.steps} steps in {rep.wall_time:.2f} s")
    for k, v in rep.errors.items():
        print(f"  {k} = {v:.3e}")
    if rep.monitor is not None:
        m = rep.monitor
        status = "no violations" if m.ok else f"{len(m.violations)} violations, first at step {m.violations[0][0]}"
        print(f"  maximum principle: {status}" + ("" if m.certified else f" (not certified: {m.reason or 'violations'})"))
    for f in rep.files:
        print(f"  wrote {f}")
    return 0


def _cmd_convergence(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    try:
        levels = [int(v) for v in args.levels.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --levels {args.levels!r}") from None
    table = run_convergence(cfg, levels, progress=lambda m: print(m, file=sys.stderr))
    print(table.format())
    out = Path(cfg.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = table.write_csv(out / f"{cfg.experiment}_convergence.csv")
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_convergence(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1
    except WBKTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
