"""Command line entry point: ``pipip {run,analyze,verify,presets}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .certify import certify_game
from .toys import toy_games


def _algorithms(text: str) -> list[str]:
    return [a.strip().upper() for a in text.split(",") if a.strip()]


def cmd_run(args) -> int:
    path = Path(args.config)
    if args.config in harness.PRESETS and not path.exists():
        config = harness.preset(args.config)
    else:
        config = harness.parse_config(path.read_text(), strict=not args.lenient, base_dir=path.parent)
    changes = {}
    if args.seeds:
        changes["seeds"] = harness.parse_seeds(args.seeds)
    if args.horizon is not None:
        changes["horizon"] = args.horizon
    if args.out:
        changes["output"] = args.out
    config = config.replace(**changes)
    algorithms = _algorithms(args.algorithm) if args.algorithm else [config.algorithm]
    summaries = []
    for algorithm in algorithms:
        arm = config.replace(algorithm=algorithm)
        if algorithm == "PIPIP" and arm.epsilon is not None:
            arm = arm.replace(epsilon=None)
        elif algorithm != "PIPIP" and arm.epsilon is None:
            raise harness.ConfigError(f"{algorithm} needs a constant epsilon in the config")
        out = Path(config.output) / algorithm if len(algorithms) > 1 else Path(config.output)
        summaries += harness.run_experiment(arm, threads=args.threads, out_dir=out)
        print(f"{algorithm}: {len(arm.seeds)} seeds written to {out}")
    print("\n".join(harness.aggregate(summaries).lines()))
    return 0


def cmd_analyze(args) -> int:
    summaries = harness.load_summaries(args.directory)
    if not summaries:
        print(f"error: no summary files under {args.directory}", file=sys.stderr)
        return 1
    print("\n".join(harness.aggregate(summaries).lines()))
    return 0


def cmd_verify(args) -> int:
    ok = True
    for game in toy_games():
        report = certify_game(game, kappa=args.kappa, seed=args.seed)
        print("\n".join(report.lines()))
        ok &= report.passed
    print("all checks passed" if ok else "some checks FAILED")
    return 0 if ok else 1


def cmd_presets(args) -> int:
    names = [args.name] if args.name else sorted(harness.PRESETS)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name in names:
            (out / f"{name}.ini").write_text(harness.preset_text(name))
            print(out / f"{name}.ini")
        return 0
    if args.name:
        sys.stdout.write(harness.preset_text(args.name))
    else:
        print("\n".join(names))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pipip", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config (or a preset name)")
    run.add_argument("config")
    run.add_argument("--seeds", help="seed list such as 0-49 or 1,5,9")
    run.add_argument("--horizon", type=int)
    run.add_argument("--algorithm", help="PIPIP, PHPIP or DISL; a comma list runs one arm each")
    run.add_argument("--out", help="output directory")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--lenient", action="store_true", help="ignore unknown config keys")
    run.set_defaults(func=cmd_run)

    analyze = sub.add_parser("analyze", help="aggregate the summaries in a directory")
    analyze.add_argument("directory")
    analyze.set_defaults(func=cmd_analyze)

    verify = sub.add_parser("verify", help="certify the learning chain on the built-in toy games")
    verify.add_argument("--kappa", type=float, default=0.5)
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(func=cmd_verify)

    presets = sub.add_parser("presets", help="list or emit the built-in experiment configs")
    presets.add_argument("name", nargs="?", choices=sorted(harness.PRESETS))
    presets.add_argument("--out", help="write <name>.ini files into this directory")
    presets.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
