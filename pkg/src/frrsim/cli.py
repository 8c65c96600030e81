"""Command-line driver.

Subcommands: sweep, single, calibrate, gen-topology, gen-scenario. Options
may also come from a plain key=value config file (--config); explicit
flags win. Exit status is nonzero for configuration errors only;
simulation anomalies (undelivered flows, budget violations) are data in
the output, not failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import FrrsimError
from .experiments import (
    CLOS_PROTOCOLS,
    COMPLETE_PROTOCOLS,
    RunConfig,
    calibrate,
    make_topology,
    run_single,
    run_sweep,
    write_calibration,
)
from .protocols_complete import IntervalPartition
from .topology import (
    FailureScenario,
    fail_destination_edges,
    fail_interval_targeted,
    fail_random_fraction,
    serialize_scenario,
)


def _load_config_file(path: str) -> dict[str, str]:
    values = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _add_topology_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", choices=["complete", "clos"], default="complete")
    p.add_argument("--n", type=int, default=64, help="node count (complete)")
    p.add_argument("--k", type=int, default=8, help="port parameter (clos)")


def _size(args) -> int:
    return args.k if args.topology == "clos" else args.n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frrsim")
    parser.add_argument("--config", help="key=value file; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="p-grid sweep with repetitions, CSV output")
    _add_topology_args(sweep)
    sweep.add_argument("--protocol", required=True, choices=COMPLETE_PROTOCOLS + CLOS_PROTOCOLS)
    sweep.add_argument("--alpha", type=float, default=0.5)
    sweep.add_argument("--p-start", type=float, default=0.0)
    sweep.add_argument("--p-stop", type=float, default=0.2)
    sweep.add_argument("--p-step", type=float, default=0.02)
    sweep.add_argument("--reps", type=int, default=40)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--hop-limit", type=int, default=None)
    sweep.add_argument("--traffic", choices=["all-to-one", "gravity"], default="all-to-one")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--no-count-source", action="store_true",
                       help="exclude a flow's source from its node load")
    sweep.add_argument("--out", required=True)

    single = sub.add_parser("single", help="one run against an explicit scenario file")
    single.add_argument("--scenario", required=True)
    single.add_argument("--protocol", required=True, choices=COMPLETE_PROTOCOLS + CLOS_PROTOCOLS)
    single.add_argument("--dest", type=int, default=None)
    single.add_argument("--alpha", type=float, default=0.5)
    single.add_argument("--seed", type=int, default=0)
    single.add_argument("--hop-limit", type=int, default=None)
    single.add_argument("--trace-dump", default=None)
    single.add_argument("--detail-prefix", default=None,
                        help="also write <prefix>.nodes.csv and <prefix>.edges.csv")
    single.add_argument("--no-count-source", action="store_true")
    single.add_argument("--out", required=True)

    cal = sub.add_parser("calibrate", help="record empirical max-load distributions")
    cal.add_argument("--protocol", required=True, choices=COMPLETE_PROTOCOLS)
    cal.add_argument("--sizes", default="256,4096", help="comma-separated n values")
    cal.add_argument("--alpha", type=float, default=0.5)
    cal.add_argument("--seeds", type=int, default=50)
    cal.add_argument("--seed", type=int, default=0)
    cal.add_argument("--out", required=True)

    gt = sub.add_parser("gen-topology", help="write a topology header file")
    _add_topology_args(gt)
    gt.add_argument("--out", required=True)

    gs = sub.add_parser("gen-scenario", help="write a failure scenario file")
    _add_topology_args(gs)
    gs.add_argument("--p", type=float, default=None, help="random fraction adversary")
    gs.add_argument("--dest", type=int, default=None, help="destination-edge adversary target")
    gs.add_argument("--dest-count", type=int, default=None)
    gs.add_argument("--interval", type=int, default=None, help="interval-targeted adversary")
    gs.add_argument("--k-int", type=int, default=None, help="interval count of the partition")
    gs.add_argument("--budget", type=int, default=None)
    gs.add_argument("--selector", choices=["lowest", "seeded"], default="lowest")
    gs.add_argument("--seed", type=int, default=0)
    gs.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if known.config:
        file_values = _load_config_file(known.config)
        for action in parser._subparsers._group_actions[0].choices.values():  # noqa: SLF001
            defaults = {
                k: _coerce(action, k, v) for k, v in file_values.items()
                if any(a.dest == k for a in action._actions)
            }
            action.set_defaults(**defaults)
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except FrrsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _coerce(subparser: argparse.ArgumentParser, key: str, value: str):
    for action in subparser._actions:  # noqa: SLF001
        if action.dest == key and action.type is not None:
            return action.type(value)
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    return value


def _dispatch(args) -> int:
    if args.command == "sweep":
        config = RunConfig(
            topology_kind=args.topology,
            size=_size(args),
            protocol=args.protocol,
            alpha=args.alpha,
            p_start=args.p_start,
            p_stop=args.p_stop,
            p_step=args.p_step,
            repetitions=args.reps,
            base_seed=args.seed,
            hop_limit=args.hop_limit,
            traffic=args.traffic,
            workers=args.workers,
            count_source=not args.no_count_source,
            output=args.out,
        )
        path = run_sweep(config)
        print(f"wrote {path}")
        return 0
    if args.command == "single":
        config = RunConfig(
            protocol=args.protocol,
            alpha=args.alpha,
            base_seed=args.seed,
            hop_limit=args.hop_limit,
            count_source=not args.no_count_source,
            output=args.out,
        )
        path = run_single(
            config,
            Path(args.scenario).read_text(encoding="utf-8"),
            destination=args.dest,
            trace_dump=args.trace_dump,
            detail_prefix=args.detail_prefix,
        )
        print(f"wrote {path}")
        return 0
    if args.command == "calibrate":
        sizes = tuple(int(s) for s in args.sizes.split(","))
        result = calibrate(args.protocol, sizes, args.alpha, args.seeds, base_seed=args.seed)
        path = write_calibration(result, args.out)
        print(f"wrote {path}")
        return 0
    if args.command == "gen-topology":
        topology = make_topology(args.topology, _size(args))
        text = serialize_scenario(topology, FailureScenario(failed=frozenset()))
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
        return 0
    if args.command == "gen-scenario":
        topology = make_topology(args.topology, _size(args))
        if args.p is not None:
            scenario = fail_random_fraction(topology, args.p, seed=args.seed)
        elif args.interval is not None:
            if args.dest is None or args.budget is None or args.k_int is None:
                raise FrrsimError("interval adversary needs --dest, --budget and --k-int")
            part = IntervalPartition(topology.n, args.k_int)
            scenario = fail_interval_targeted(
                topology, args.dest, args.interval, part, args.budget,
                selector=args.selector, seed=args.seed,
            )
        elif args.dest is not None and args.dest_count is not None:
            scenario = fail_destination_edges(
                topology, args.dest, args.dest_count, selector=args.selector, seed=args.seed
            )
        else:
            raise FrrsimError("gen-scenario needs --p, or --dest/--dest-count, or interval options")
        Path(args.out).write_text(serialize_scenario(topology, scenario), encoding="utf-8")
        print(f"wrote {args.out}")
        return 0
    raise FrrsimError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
