"""Command-line front end for the experiment runners.

Exit codes: 0 when every check in the report passes, 1 when any fails,
2 when the run is inconclusive (too few usable scan points), 64 for
configuration or usage errors.  Thread count resolves as --threads,
then TWISTQFT_THREADS, then 1; reports depend only on (config,
resolution scale, seed), never on the thread count.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import RUNNERS, ConfigError, ExperimentConfig, default_config, write_report

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64

_SUBCOMMANDS = {
    "wedge-locality": "wedge_locality",
    "decay-scan": "decay_scan",
    "cluster-scan": "cluster_scan",
    "star-checks": "star_checks",
    "space-checks": "space_checks",
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> _Parser:
    parser = _Parser(prog="twistqft", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, kind in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {kind} experiment")
        p.add_argument("--config", help="JSON config path (built-in default when omitted)")
        p.add_argument("--out", default=None, help="output directory (default out-<kind>)")
        p.add_argument(
            "--resolution-scale",
            type=float,
            default=1.0,
            help="multiply quadrature panel counts and grid sizes",
        )
        p.add_argument("--threads", type=int, default=None, help="scan-point worker threads")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    kind = _SUBCOMMANDS[args.command]
    try:
        if args.config is not None:
            cfg = ExperimentConfig.load(args.config)
        else:
            cfg = ExperimentConfig.from_json(default_config(kind))
        if cfg.kind != kind:
            raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {args.command!r}")
        if args.seed is not None:
            data = dict(cfg.raw)
            data["seed"] = args.seed
            cfg = ExperimentConfig.from_json(data)
        if args.resolution_scale <= 0:
            raise ConfigError("--resolution-scale must be positive")
        report = RUNNERS[kind](cfg, scale=args.resolution_scale, threads=args.threads)
    except ConfigError as exc:
        print(f"twistqft: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out_dir = args.out if args.out is not None else f"out-{kind}"
    path = write_report(report, out_dir)
    status = report["status"]
    print(f"{args.command}: {status} (report: {path})")
    if status == "pass":
        return EXIT_PASS
    if status == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
