"""Command-line entry point: ``collectivesim <subcommand> [flags]``.

Exit status: 0 on success, 2 on argument errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys

from . import experiments
from .errors import ParameterError, StructuralError
from .experiments import Experiment, ExperimentConfig

PRESET_HELP = "\n".join(f"  {name}: {p.summary}" for name, p in experiments.PRESETS.items())


def _common(parser: argparse.ArgumentParser, replications: bool = True) -> None:
    S = argparse.SUPPRESS
    parser.add_argument("--seed", type=int, default=S,
                        help="master seed (64-bit); a random one is drawn and printed if omitted")
    parser.add_argument("--out", metavar="FILE", default=S, help="CSV output path (default: standard output)")
    parser.add_argument("--config", metavar="FILE", default=S,
                        help="plain-text 'key = value' file; command-line flags override it")
    parser.add_argument("--with-se", action="store_true", default=S,
                        help="append a standard-error column for every statistic")
    if replications:
        parser.add_argument("--threads", type=int, default=S,
                            help="worker processes for replications (default: CPU count)")
        parser.add_argument("--scale", type=int, default=S, metavar="D",
                            help="divide the replication count by D")
        parser.add_argument("--preset", choices=sorted(experiments.PRESETS), default=S,
                            help="start from a figure configuration:\n" + PRESET_HELP)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(
        prog="collectivesim",
        description="Simulations of jury-theorem voting, vote-power propagation over trust "
                    "networks, and incentive vs incentive-free decision markets.",
        formatter_class=argparse.RawTextHelpFormatter,
        epilog="presets:\n" + PRESET_HELP,
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    fmt = argparse.RawTextHelpFormatter

    p = sub.add_parser("condorcet", help="majority-correct probability surface over (p, n)", formatter_class=fmt)
    p.add_argument("--n-min", type=int, default=S, help="smallest voter count (default 1)")
    p.add_argument("--n-max", type=int, default=S, help="largest voter count (default 100)")
    p.add_argument("--p-min", type=float, default=S, help="smallest p (default 0)")
    p.add_argument("--p-max", type=float, default=S, help="largest p (default 1)")
    p.add_argument("--p-step", type=float, default=S, help="p grid step (default 0.01)")
    p.add_argument("--tie-rule", choices=["fair-coin", "odd-only"], default=S,
                   help="even-n ties: split by a fair coin, or use odd n only (default fair-coin)")
    _common(p, replications=False)

    p = sub.add_parser("ddd", help="vote-power propagation vs direct participation sweep over k", formatter_class=fmt)
    p.add_argument("--citizens", type=int, default=S, help="citizens per network (default 100)")
    p.add_argument("--networks", type=int, default=S, help="networks (replications) per k (default 1000)")
    p.add_argument("--m", type=int, default=S, help="outgoing links per citizen (default 3)")
    p.add_argument("--beta", type=float, default=S, help="assortativity exponent (default 20)")
    p.add_argument("--k-min", type=float, default=S, help="lowest participation percentage (default 1)")
    p.add_argument("--k-max", type=float, default=S, help="highest participation percentage (default 100)")
    p.add_argument("--k-step", type=float, default=S, help="participation step (default 1)")
    p.add_argument("--epsilon", type=float, default=S, help="absorbed-power stopping target (default 1 - 1e-9)")
    p.add_argument("--max-iter", type=int, default=S, help="propagation iteration cap (default 10 * citizens)")
    _common(p)

    p = sub.add_parser("market", help="incentive vs incentive-free market sweep over p", formatter_class=fmt)
    p.add_argument("--citizens", type=int, default=S, help="citizens per market (default 1000)")
    p.add_argument("--dims", type=int, default=S, help="knowledge-space dimensions (default 50)")
    p.add_argument("--reps", type=int, default=S, help="replications per p (default 1000)")
    p.add_argument("--p-min", type=float, default=S, help="smallest p (default 0)")
    p.add_argument("--p-max", type=float, default=S, help="largest p (default 1)")
    p.add_argument("--p-step", type=float, default=S, help="p grid step (default 0.05)")
    p.add_argument("--variant", choices=["root-normalized", "mean-squared"], default=S,
                   help="distance error: sqrt of mean squared gap, or the mean squared gap (default root-normalized)")
    _common(p)

    p = sub.add_parser("market-example", help="replay the three-citizen market walkthrough", formatter_class=fmt)
    p.add_argument("--out", metavar="FILE", default=S, help="also write the result as CSV")

    p = sub.add_parser("preset", help="run a figure configuration", formatter_class=fmt,
                       description="presets:\n" + PRESET_HELP)
    p.add_argument("figure", choices=sorted(experiments.PRESETS))
    p.add_argument("--show", action="store_true", help="print the resolved configuration and exit")
    _common(p)
    return parser


_EXPERIMENT_OF = {
    "condorcet": Experiment.CONDORCET_SURFACE,
    "ddd": Experiment.DDD_SWEEP,
    "market": Experiment.MARKET_SWEEP,
    "market-example": Experiment.MARKET_EXAMPLE,
}


DEFAULT_REPLICATIONS = {
    Experiment.CONDORCET_SURFACE: 1,
    Experiment.DDD_SWEEP: 1000,
    Experiment.MARKET_SWEEP: 1000,
    Experiment.MARKET_EXAMPLE: 1,
}


def _config_args(values: dict[str, str]) -> list[str]:
    args = []
    for key, value in values.items():
        flag = "--" + key.replace("_", "-")
        if key == "with_se":
            if value.lower() in ("1", "true", "yes", "on"):
                args.append(flag)
        else:
            args += [flag, value]
    return args


def resolve(parser: argparse.ArgumentParser, argv: list[str]) -> tuple[argparse.Namespace, ExperimentConfig]:
    ns = parser.parse_args(argv)
    flags = vars(ns).copy()
    command = flags.pop("command")
    if "config" in flags:
        file_values = experiments.read_config_file(flags.pop("config"))
        base = vars(parser.parse_args([command] + ([flags["figure"]] if command == "preset" else [])
                                      + _config_args(file_values))).copy()
        base.pop("command")
        base.update(flags)
        flags = base
    flags.pop("show", None)

    figure, preset_name = flags.pop("figure", None), flags.pop("preset", None)
    preset_name = figure or preset_name
    scale = int(flags.pop("scale", 1))
    if scale < 1:
        raise ParameterError(f"--scale must be >= 1, got {scale}")
    threads = int(flags.pop("threads", os.cpu_count() or 1))
    reps = flags.pop("networks", None)
    reps = flags.pop("reps", reps)
    if preset_name:
        config = experiments.preset(preset_name, scale, threads=threads)
        if command != "preset" and config.experiment is not _EXPERIMENT_OF[command]:
            raise ParameterError(f"preset {preset_name} is not a {command} configuration")
    else:
        config = ExperimentConfig(_EXPERIMENT_OF[command], threads=threads)
        config.replications = max(1, DEFAULT_REPLICATIONS[config.experiment] // scale)
    if reps is not None:
        config.replications = max(1, int(reps) // scale)
    config.master_seed = flags.pop("seed") if "seed" in flags else secrets.randbits(64)
    config.out = flags.pop("out", None)
    config.with_se = bool(flags.pop("with_se", False))
    config.params.update(flags)
    experiments.validate(config)
    return ns, config


def _print_example(table) -> None:
    for row in table.rows:
        print(f"{row.coords['market']:>15}: market [{row.coords['point'].replace(' ', ', ')}]  "
              f"mean-squared error {row.means['e_dist_mean_squared']:.3f}  "
              f"root-normalized error {row.means['e_dist_root_normalized']:.3f}  "
              f"decision [{row.coords['decision'].replace(' ', ', ')}] "
              f"{'correct' if row.coords['correct'] else 'incorrect'}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns, config = resolve(parser, argv)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code or 0)
    except ParameterError as exc:
        parser.print_usage(sys.stderr)
        print(f"collectivesim: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"collectivesim: error: cannot read config: {exc}", file=sys.stderr)
        return 2

    print(json.dumps(config.describe(), default=str), file=sys.stderr)
    if getattr(ns, "show", False):
        return 0
    try:
        table = experiments.run_experiment(config)
    except ParameterError as exc:
        parser.print_usage(sys.stderr)
        print(f"collectivesim: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, StructuralError, RuntimeError) as exc:
        print(f"collectivesim: error: {exc}", file=sys.stderr)
        return 1

    if config.experiment is Experiment.MARKET_EXAMPLE:
        _print_example(table)
    elif not config.out:
        sys.stdout.write(table.to_csv(config.with_se))
    return 0


if __name__ == "__main__":
    sys.exit(main())
