"""Seeded experiment harness: sweeps, single runs, calibration, CSV output.

Every cell of a sweep derives its adversary, destination and protocol
seeds from (base seed, p index, repetition) through disjoint label
streams, so a fixed base seed freezes the entire experiment and cells can
be evaluated in any order or in parallel without changing output. Rows are
sorted before writing; identical configs produce byte-identical CSVs.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path
from typing import Optional

from .arborescence import ArborescenceInstance
from .clos_protocols import build_interval_clos, build_threep_clos
from .disjoint_paths import SquareOneInstance
from .engine import all_to_all, all_to_one, gravity_demands, route_flow, default_hop_limit
from .errors import InvalidParameterError
from .protocols_complete import (
    build_intervals,
    build_shared_perm,
    build_three_perm,
    params_for,
    IntervalPartition,
)
from .seeding import stable_hash, substream
from .topology import (
    BudgetMode,
    FailureScenario,
    Topology,
    TopologyKind,
    build_clos,
    build_complete,
    fail_destination_edges,
    fail_random_fraction,
    parse_scenario,
    validate_budget,
)

COMPLETE_PROTOCOLS = ("threep", "intervals", "sharedperm")
CLOS_PROTOCOLS = (
    "threep-d",
    "threep-id",
    "interval-d",
    "interval-id",
    "a-det",
    "a-prnb",
    "a-casa",
    "square1",
)

CSV_COLUMNS = [
    "protocol",
    "topology",
    "n_or_k",
    "p",
    "repetition",
    "seed",
    "max_edge_load",
    "max_node_load",
    "hop_mean",
    "hop_max",
    "undelivered",
    "loop_events",
    "interval_disconnected",
    "budget_ok",
]

_topology_cache: dict[tuple[str, int], Topology] = {}


def make_topology(kind: str, size: int) -> Topology:
    key = (kind, size)
    topo = _topology_cache.get(key)
    if topo is None:
        topo = build_complete(size) if kind == "complete" else build_clos(size)
        _topology_cache[key] = topo
    return topo


def build_protocol(
    protocol: str,
    topology: Topology,
    alpha: float = 0.5,
    seed: int = 0,
    per_destination: bool = False,
):
    """Construct any protocol instance from (topology, alpha, seed)."""
    if protocol in COMPLETE_PROTOCOLS:
        if topology.kind is not TopologyKind.COMPLETE:
            raise InvalidParameterError(f"{protocol} requires a complete topology")
        if protocol == "threep":
            return build_three_perm(topology, alpha, seed, per_destination=per_destination)
        if protocol == "intervals":
            return build_intervals(topology, alpha, seed, per_destination=per_destination)
        return build_shared_perm(
            topology, alpha, stable_hash(seed, "global"), stable_hash(seed, "local")
        )
    if protocol in CLOS_PROTOCOLS:
        if topology.kind is not TopologyKind.CLOS:
            raise InvalidParameterError(f"{protocol} requires a clos topology")
        ell = topology.k // 2
        if protocol == "threep-d":
            return build_threep_clos(topology, seed, inport_keyed=False)
        if protocol == "threep-id":
            return build_threep_clos(topology, seed, inport_keyed=True)
        if protocol == "interval-d":
            return build_interval_clos(topology, seed, inport_keyed=False)
        if protocol == "interval-id":
            return build_interval_clos(topology, seed, inport_keyed=True)
        if protocol == "square1":
            return SquareOneInstance(topology, ell)
        return ArborescenceInstance(topology, ell, seed, switch=protocol.removeprefix("a-"))
    raise InvalidParameterError(f"unknown protocol {protocol!r}")


@dataclass(frozen=True)
class RunConfig:
    """One experiment description (shared by sweep, single and calibrate)."""

    topology_kind: str = "complete"
    size: int = 64
    protocol: str = "threep"
    alpha: float = 0.5
    p_start: float = 0.0
    p_stop: float = 0.0
    p_step: float = 0.02
    repetitions: int = 1
    base_seed: int = 0
    hop_limit: Optional[int] = None
    traffic: str = "all-to-one"
    workers: int = 1
    count_source: bool = True
    output: str = "sweep.csv"

    def p_grid(self) -> list[float]:
        if self.p_step <= 0:
            raise InvalidParameterError("p grid step must be positive")
        if self.repetitions < 1:
            raise InvalidParameterError("repetitions must be >= 1")
        count = int(math.floor((self.p_stop - self.p_start) / self.p_step + 0.5)) + 1
        return [round(self.p_start + i * self.p_step, 10) for i in range(max(count, 1))]

    def validate(self) -> None:
        pool = COMPLETE_PROTOCOLS if self.topology_kind == "complete" else CLOS_PROTOCOLS
        if self.protocol not in pool:
            raise InvalidParameterError(
                f"protocol {self.protocol!r} is not available on {self.topology_kind} topologies"
            )
        self.p_grid()


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if x == int(x) and abs(x) < 1e15:
            return str(int(x))
        return f"{x:.10g}"
    return str(x)


def rows_to_csv(rows: list[dict]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col, "")) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _run_cell(args: tuple) -> dict:
    config, p_idx, p, rep = args
    topology = make_topology(config.topology_kind, config.size)
    # one recorded seed per cell; adversary, destination and protocol draw
    # from disjoint substreams of it
    cell_seed = stable_hash(config.base_seed, p_idx, rep)
    scenario = fail_random_fraction(topology, p, seed=stable_hash(cell_seed, "adv"))
    instance = build_protocol(
        config.protocol, topology, config.alpha, stable_hash(cell_seed, "proto")
    )
    if config.traffic == "gravity":
        demands = gravity_demands(topology.bottom_nodes(), stable_hash(cell_seed, "gravity"))
        report = all_to_all(
            topology, scenario, instance, demands,
            hop_limit=config.hop_limit, count_source=config.count_source,
        )
    else:
        dest = substream(cell_seed, "dest").choice(topology.bottom_nodes())
        scenario = FailureScenario(failed=scenario.failed, destination=dest)
        report = all_to_one(
            topology, scenario, instance, dest,
            hop_limit=config.hop_limit, count_source=config.count_source,
        )
    return {
        "protocol": config.protocol,
        "topology": config.topology_kind,
        "n_or_k": config.size,
        "p": p,
        "repetition": rep,
        "seed": cell_seed,
        "max_edge_load": report.max_edge_load,
        "max_node_load": report.max_node_load,
        "hop_mean": report.hop_mean,
        "hop_max": report.hop_max,
        "undelivered": report.undelivered,
        "loop_events": report.loop_events,
        "interval_disconnected": report.interval_disconnected,
        "budget_ok": "",
        "_order": (p_idx, rep),
    }


def _mean_row(config: RunConfig, p: float, rows: list[dict]) -> dict:
    def mean_of(colname):
        vals = [r[colname] for r in rows if r[colname] is not None and r[colname] != ""]
        return sum(vals) / len(vals) if vals else None

    return {
        "protocol": config.protocol,
        "topology": config.topology_kind,
        "n_or_k": config.size,
        "p": p,
        "repetition": "mean",
        "seed": "",
        "max_edge_load": mean_of("max_edge_load"),
        "max_node_load": mean_of("max_node_load"),
        "hop_mean": mean_of("hop_mean"),
        "hop_max": mean_of("hop_max"),
        "undelivered": mean_of("undelivered"),
        "loop_events": mean_of("loop_events"),
        "interval_disconnected": mean_of("interval_disconnected"),
        "budget_ok": "",
    }


def run_sweep(config: RunConfig) -> Path:
    """Run the p-grid sweep and write detail plus per-p aggregate rows."""
    config.validate()
    grid = config.p_grid()
    cells = [
        (config, p_idx, p, rep)
        for p_idx, p in enumerate(grid)
        for rep in range(config.repetitions)
    ]
    if config.workers > 1:
        with Pool(config.workers) as pool:
            rows = pool.map(_run_cell, cells)
    else:
        rows = [_run_cell(c) for c in cells]
    rows.sort(key=lambda r: r["_order"])
    for r in rows:
        del r["_order"]
    out_rows = list(rows)
    for p_idx, p in enumerate(grid):
        chunk = rows[p_idx * config.repetitions:(p_idx + 1) * config.repetitions]
        out_rows.append(_mean_row(config, p, chunk))
    path = Path(config.output)
    path.write_text(rows_to_csv(out_rows), encoding="utf-8")
    return path


def run_single(
    config: RunConfig,
    scenario_text: str,
    destination: Optional[int] = None,
    trace_dump: Optional[str] = None,
    detail_prefix: Optional[str] = None,
) -> Path:
    """One run against an explicit failure set; budget violations are data."""
    topology, scenario = parse_scenario(scenario_text)
    if destination is None:
        destination = substream(config.base_seed, "dest", 0, 0).choice(topology.bottom_nodes())
    scenario = FailureScenario(failed=scenario.failed, destination=destination, alpha=config.alpha)
    budget_ok = _budget_for_protocol(config.protocol, topology, scenario, config.alpha)
    instance = build_protocol(
        config.protocol, topology, config.alpha, stable_hash(config.base_seed, "proto", 0, 0)
    )
    hop_limit = config.hop_limit or default_hop_limit(topology, instance)
    sources = [v for v in topology.bottom_nodes() if v != destination]
    traces = [
        route_flow(topology, scenario, instance, src, destination, hop_limit)
        for src in sources
    ]
    from .engine import aggregate

    report = aggregate(traces, count_source=config.count_source)
    p_effective = len(scenario.failed) / topology.edge_count
    row = {
        "protocol": config.protocol,
        "topology": topology.kind.value,
        "n_or_k": topology.k if topology.kind is TopologyKind.CLOS else topology.n,
        "p": round(p_effective, 10),
        "repetition": 0,
        "seed": config.base_seed,
        "max_edge_load": report.max_edge_load,
        "max_node_load": report.max_node_load,
        "hop_mean": report.hop_mean,
        "hop_max": report.hop_max,
        "undelivered": report.undelivered,
        "loop_events": report.loop_events,
        "interval_disconnected": report.interval_disconnected,
        "budget_ok": budget_ok,
    }
    path = Path(config.output)
    path.write_text(rows_to_csv([row]), encoding="utf-8")
    if trace_dump:
        lines = [
            f"{tr.src} {tr.dst} {tr.status.value} {tr.hops} " + " ".join(map(str, tr.path))
            for tr in traces
        ]
        Path(trace_dump).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if detail_prefix:
        node_lines = ["node,load"] + [
            f"{v},{_fmt(load)}" for v, load in sorted(report.node_load.items())
        ]
        Path(f"{detail_prefix}.nodes.csv").write_text("\n".join(node_lines) + "\n", encoding="utf-8")
        edge_lines = ["u,v,load"] + [
            f"{u},{v},{_fmt(load)}" for (u, v), load in sorted(report.edge_load.items())
        ]
        Path(f"{detail_prefix}.edges.csv").write_text("\n".join(edge_lines) + "\n", encoding="utf-8")
    return path


def _budget_for_protocol(protocol: str, topology: Topology, scenario: FailureScenario, alpha: float):
    if protocol in ("threep", "sharedperm"):
        ok, _ = validate_budget(scenario, BudgetMode.GLOBAL_ALPHA_N, alpha, n=topology.n)
        return ok
    if protocol == "intervals":
        params = params_for(topology.n, alpha, "intervals")
        part = IntervalPartition(topology.n, params.k_int)
        ok, _ = validate_budget(scenario, BudgetMode.PER_INTERVAL_ALPHA_I, alpha, partition=part)
        return ok
    return ""


def calibrate(
    protocol: str,
    sizes: tuple[int, ...],
    alpha: float,
    seeds: int,
    base_seed: int = 0,
) -> dict:
    """Empirical max-load distributions backing the growth-ratio checks.

    The adversary matches each protocol's budget model: alpha * n failed
    destination edges for threep/sharedperm, alpha * I for intervals.
    """
    entries: dict[str, dict] = {}
    for n in sizes:
        topology = make_topology("complete", n)
        if protocol == "intervals":
            params = params_for(n, alpha, "intervals")
            budget = int(alpha * (n / params.k_int))
        else:
            budget = int(alpha * n)
        max_loads: list[float] = []
        loop_total = 0
        for s in range(seeds):
            d = substream(base_seed, "cal-dest", n, s).randrange(n)
            budget_eff = min(budget, topology.degree(d))
            scenario = fail_destination_edges(
                topology, d, budget_eff, selector="seeded",
                seed=stable_hash(base_seed, "cal-adv", n, s), alpha=alpha,
            )
            instance = build_protocol(
                protocol, topology, alpha, stable_hash(base_seed, "cal-proto", n, s)
            )
            report = all_to_one(topology, scenario, instance, d)
            max_loads.append(report.max_node_load)
            loop_total += report.loop_events
        entries[str(n)] = {
            "max_node_loads": max_loads,
            "median": statistics.median(max_loads),
            "loop_events": loop_total,
        }
    return {"protocol": protocol, "alpha": alpha, "seeds": seeds, "entries": entries}


def write_calibration(result: dict, path: str) -> Path:
    out = Path(path)
    out.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out
