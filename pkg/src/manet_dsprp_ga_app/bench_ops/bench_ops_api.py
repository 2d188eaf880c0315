# -*- coding: utf-8 -*-
# ---------------------------------------------------------
# @File             : bench_ops_api.py
# Seeded replications of the GA schemes over changing MANET topologies,
# CSV emission and aggregate summaries.
# ---------------------------------------------------------

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from filelock import FileLock
from rich.console import Console
from rich.table import Table
from setproctitle import setproctitle

from manet_dsprp_ga_app.bench_ops.experiment_config import ExperimentConfig, Scheme
from manet_dsprp_ga_app.exceptions import ConfigurationError, ConnectivityError
from manet_dsprp_ga_app.ga_ops.diversity_schemes import ElitismImmigrantsHook, RandomImmigrantsHook
from manet_dsprp_ga_app.ga_ops.ga_engine import (
    GaParams,
    Population,
    SchemeHook,
    best_index,
    evolve_one_generation,
    fitness_of,
    init_population,
    path_cost,
)
from manet_dsprp_ga_app.ga_ops.memory_scheme import EigaMegaHook, MegaHook
from manet_dsprp_ga_app.metrics_ops.oracle_metrics import (
    CSV_COLUMNS,
    GenerationRecord,
    OracleResult,
    dijkstra,
    offline_performance,
    paired_one_sided_pvalue,
    quality,
    recovery_times,
)
from manet_dsprp_ga_app.topology_ops.graph_topology import (
    TopologySnapshot,
    initial_environment,
    next_environment,
)
from manet_dsprp_ga_app.topology_ops.topology_io import load_topology, save_topology

MEMORY_TRACE_COLUMNS = ["scheme", "replication", "generation", "entry", "path", "stored_fitness", "placeholder"]


@dataclass
class ReplicationResult:
    records: List[GenerationRecord]
    memory_trace: List[Dict[str, object]] = field(default_factory=list)


@dataclass
class RunSummary:
    """Aggregates over completed replications."""

    per_generation: pd.DataFrame
    per_scheme: pd.DataFrame
    per_replication: pd.DataFrame
    recovery: Dict[str, List[int]]

    def mean_quality_table(self) -> pd.DataFrame:
        """generation x scheme mean quality, schemes in run order."""
        table = self.per_generation.pivot(index="generation", columns="scheme", values="mean_quality")
        schemes = list(dict.fromkeys(self.per_generation["scheme"]))
        return table[schemes]


@dataclass
class ExperimentResult:
    records: List[GenerationRecord]
    summary: RunSummary
    memory_trace: List[Dict[str, object]] = field(default_factory=list)
    pvalues_vs_sga: Dict[str, float] = field(default_factory=dict)


@dataclass
class StaticSolveResult:
    scheme: str
    records: List[GenerationRecord]
    best_path: Tuple[int, ...]
    best_cost: float
    optimum: OracleResult


def build_scheme_hook(
    scheme: Scheme,
    params: GaParams,
    graph: TopologySnapshot,
    s: int,
    d: int,
    rng: np.random.Generator,
) -> Optional[SchemeHook]:
    scheme = Scheme(scheme)
    if scheme is Scheme.SGA:
        return None
    if scheme is Scheme.RIGA:
        return RandomImmigrantsHook(params, s, d)
    if scheme is Scheme.EIGA:
        return ElitismImmigrantsHook(params)
    if scheme is Scheme.MEGA:
        return MegaHook(params, graph, s, d, rng)
    return EigaMegaHook(params, graph, s, d, rng)


def generation_record(
    scheme: str,
    replication: int,
    graph: TopologySnapshot,
    population: Population,
    optimum: OracleResult,
) -> GenerationRecord:
    scores = [fitness_of(graph, m) for m in population.members]
    best = population.members[best_index(graph, population.members)]
    best_cost = path_cost(graph, best.path)
    return GenerationRecord(
        scheme=scheme,
        replication=replication,
        generation=population.generation,
        env_index=graph.env_index,
        best_cost=best_cost,
        best_fitness=max(scores),
        quality=quality(best_cost, optimum.cost),
        feasible_fraction=sum(f > 0 for f in scores) / len(scores),
    )


def replication_rngs(seed: int, replication: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """(topology/dynamics stream, GA stream) for one replication."""
    topo_seq, ga_seq = np.random.SeedSequence(seed + replication).spawn(2)
    return np.random.default_rng(topo_seq), np.random.default_rng(ga_seq)


def run_replication(config: ExperimentConfig, scheme: Scheme, replication: int) -> ReplicationResult:
    scheme = Scheme(scheme)
    s, d = config.source, config.destination
    topo_rng, ga_rng = replication_rngs(config.seed, replication)
    try:
        graph, mobility = initial_environment(config.rwp, s, d, topo_rng)
    except ConnectivityError as e:
        raise ConnectivityError(f"Replication {replication} (seed {config.seed + replication}): {e}") from e

    optimum = dijkstra(graph, s, d)
    population = init_population(graph, s, d, config.ga, ga_rng)
    hook = build_scheme_hook(scheme, config.ga, graph, s, d, ga_rng)

    result = ReplicationResult(records=[])
    for t in range(1, config.generations + 1):
        if config.schedule.is_change_generation(t):
            try:
                graph, mobility = next_environment(graph, mobility, config.rwp, config.schedule, topo_rng, s, d)
            except ConnectivityError as e:
                raise ConnectivityError(
                    f"Replication {replication} (seed {config.seed + replication}), generation {t}: {e}"
                ) from e
            optimum = dijkstra(graph, s, d)
        population = evolve_one_generation(population, graph, config.ga, ga_rng, hook)
        result.records.append(generation_record(scheme.value, replication, graph, population, optimum))
        if config.trace_memory and isinstance(hook, MegaHook):
            for i, entry in enumerate(hook.memory.entries):
                result.memory_trace.append({
                    "scheme": scheme.value,
                    "replication": replication,
                    "generation": t,
                    "entry": i,
                    "path": "-".join(str(node) for node in entry.chromosome.path),
                    "stored_fitness": entry.stored_fitness,
                    "placeholder": int(entry.is_random_placeholder),
                })
    return result


def summarize(records: Sequence[GenerationRecord], generations: int) -> RunSummary:
    frame = pd.DataFrame([r.to_row() for r in records], columns=CSV_COLUMNS)
    per_generation = (
        frame.groupby(["scheme", "generation"], sort=False)["quality"]
        .agg(mean_quality="mean", median_quality="median")
        .reset_index()
    )

    runs: Dict[Tuple[str, int], List[GenerationRecord]] = {}
    for record in records:
        runs.setdefault((record.scheme, record.replication), []).append(record)

    rows, recovery = [], {}
    for (scheme, replication), run in runs.items():
        times = recovery_times(run, sentinel=generations)
        recovery.setdefault(scheme, []).extend(times)
        rows.append({
            "scheme": scheme,
            "replication": replication,
            "offline_perf": offline_performance(run),
            "median_recovery": float(np.median(times)) if times else np.nan,
        })
    per_replication = pd.DataFrame(rows, columns=["scheme", "replication", "offline_perf", "median_recovery"])

    per_scheme = pd.DataFrame(
        [
            {
                "scheme": scheme,
                "offline_perf": float(per_replication.loc[per_replication["scheme"] == scheme, "offline_perf"].mean()),
                "median_recovery": float(np.median(times)) if times else np.nan,
            }
            for scheme, times in recovery.items()
        ],
        columns=["scheme", "offline_perf", "median_recovery"],
    )
    return RunSummary(per_generation, per_scheme, per_replication, recovery)


class BenchOpsApi:
    """
    Runs replications for one or more schemes on shared seeds and writes the
    primary CSV, the summary CSV and (optionally) the memory trace.
    """

    def __init__(self, log: Optional[logging.Logger] = None):
        self.log = log or logging.getLogger(__name__)

    def _replications(self, config: ExperimentConfig, scheme: Scheme) -> List[ReplicationResult]:
        replications = range(config.replications)
        if config.workers > 1 and config.replications > 1:
            from pathos.multiprocessing import ProcessPool

            pool = ProcessPool(nodes=config.workers)
            try:
                results = pool.map(lambda r: run_replication(config, scheme, r), replications)
            finally:
                pool.close()
                pool.join()
                pool.clear()
        else:
            results = [run_replication(config, scheme, r) for r in replications]
        for r, result in enumerate(results):
            final = result.records[-1]
            self.log.info(
                f"{scheme.value} replication {r} done: final quality {final.quality:.4f}, "
                f"offline performance {offline_performance(result.records):.4f}"
            )
        return results

    def run_experiment(self, config: ExperimentConfig) -> ExperimentResult:
        scheme = config.scheme
        setproctitle(f"dsprp-bench:{scheme.value}")
        results = self._replications(config, scheme)
        records = sorted((rec for res in results for rec in res.records), key=lambda r: (r.replication, r.generation))
        trace = sorted(
            (row for res in results for row in res.memory_trace),
            key=lambda row: (row["replication"], row["generation"], row["entry"]),
        )
        return ExperimentResult(records, summarize(records, config.generations), trace)

    def compare_schemes(self, configs: Sequence[ExperimentConfig]) -> ExperimentResult:
        """Paired runs: every scheme sees the same topology and change sequence per replication."""
        if not configs:
            raise ConfigurationError("compare_schemes needs at least one config", key="scheme")
        reference = configs[0]
        for config in configs[1:]:
            if not config.same_except_scheme(reference):
                raise ConfigurationError(
                    "compare_schemes configs may differ only in 'scheme'", key="scheme"
                )
        records, trace = [], []
        seen: Dict[Scheme, None] = {}
        for config in configs:
            if config.scheme in seen:
                self.log.info(f"Scheme {config.scheme.value} listed twice; its paired run is identical and is kept once")
                continue
            seen[config.scheme] = None
            result = self.run_experiment(config)
            records.extend(result.records)
            trace.extend(result.memory_trace)
        summary = summarize(records, reference.generations)

        pvalues: Dict[str, float] = {}
        per_rep = summary.per_replication
        baseline = per_rep[per_rep["scheme"] == Scheme.SGA.value].sort_values("replication")
        if len(baseline) >= 2:
            for scheme in seen:
                name = scheme.value
                if name == Scheme.SGA.value:
                    continue
                other = per_rep[per_rep["scheme"] == name].sort_values("replication")
                pvalues[name] = paired_one_sided_pvalue(other["offline_perf"], baseline["offline_perf"])
                self.log.info(f"Paired test {name} worse than sga on offline performance: p = {pvalues[name]:.4f}")
        return ExperimentResult(records, summary, trace, pvalues)

    def generate_topology(self, config: ExperimentConfig) -> TopologySnapshot:
        """Draw replication 0's s-d connected RWP topology and save it to config.out."""
        topo_rng, _ = replication_rngs(config.seed, 0)
        graph, _ = initial_environment(config.rwp, config.source, config.destination, topo_rng)
        out = Path(config.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with FileLock(f"{out}.lock"):
            save_topology(graph, out)
        self.log.info(
            f"Saved {graph.node_count} node topology with {len(graph.edges)} links "
            f"(seed {config.seed}) to {out}"
        )
        return graph

    def solve_topology(self, config: ExperimentConfig) -> StaticSolveResult:
        if not config.topology:
            raise ConfigurationError("solve_topology needs --topology FILE", key="topology")
        scheme = config.scheme
        s, d = config.source, config.destination
        graph = load_topology(config.topology)
        optimum = dijkstra(graph, s, d)
        if not optimum.reachable:
            raise ConnectivityError(f"{s} and {d} are disconnected in {config.topology}")

        _, ga_rng = replication_rngs(config.seed, 0)
        population = init_population(graph, s, d, config.ga, ga_rng)
        hook = build_scheme_hook(scheme, config.ga, graph, s, d, ga_rng)
        records = []
        for _ in range(config.generations):
            population = evolve_one_generation(population, graph, config.ga, ga_rng, hook)
            records.append(generation_record(scheme.value, 0, graph, population, optimum))
        best = population.members[best_index(graph, population.members)]
        result = StaticSolveResult(scheme.value, records, best.path, path_cost(graph, best.path), optimum)
        self.log.info(
            f"{scheme.value} on {config.topology}: GA cost {result.best_cost:.6f}, optimum {optimum.cost:.6f}"
        )
        return result

    def print_static(self, result: StaticSolveResult, console: Optional[Console] = None) -> None:
        console = console or Console()
        table = Table(title=f"{result.scheme.upper()} vs Dijkstra")
        table.add_column("Solver")
        table.add_column("Cost", justify="right")
        table.add_column("Path")
        table.add_row(result.scheme, f"{result.best_cost:.6f}", " -> ".join(map(str, result.best_path)))
        table.add_row("dijkstra", f"{result.optimum.cost:.6f}", " -> ".join(map(str, result.optimum.path)))
        console.print(table)
        console.print(f"Final quality: {result.records[-1].quality:.6f}")

    def write_outputs(self, result: ExperimentResult, out: str) -> Dict[str, Path]:
        """Primary CSV, `<out stem>.summary.csv` and, when traced, `<out stem>.memory.csv`."""
        primary = Path(out)
        primary.parent.mkdir(parents=True, exist_ok=True)
        stem = primary.with_suffix("") if primary.suffix.lower() == ".csv" else primary
        paths = {"primary": primary, "summary": Path(f"{stem}.summary.csv")}

        frame = pd.DataFrame([r.to_row() for r in result.records], columns=CSV_COLUMNS)
        buffer = io.StringIO()
        result.summary.per_generation.to_csv(buffer, index=False, float_format="%.6f", lineterminator="\n")
        result.summary.per_scheme.to_csv(buffer, index=False, float_format="%.6f", lineterminator="\n")

        with FileLock(f"{primary}.lock"):
            frame.to_csv(primary, index=False, float_format="%.6f", lineterminator="\n")
            paths["summary"].write_text(buffer.getvalue(), encoding="utf-8")
            if result.memory_trace:
                paths["memory"] = Path(f"{stem}.memory.csv")
                pd.DataFrame(result.memory_trace, columns=MEMORY_TRACE_COLUMNS).to_csv(
                    paths["memory"], index=False, float_format="%.6f", lineterminator="\n"
                )
        for name, path in paths.items():
            self.log.info(f"Wrote {name} output to {path}")
        return paths

    def print_summary(self, result: ExperimentResult, console: Optional[Console] = None) -> None:
        console = console or Console()
        table = result.summary.mean_quality_table()
        quality_table = Table(title="Mean quality per generation")
        quality_table.add_column("Generation", justify="right")
        for scheme in table.columns:
            quality_table.add_column(str(scheme).upper(), justify="right")
        for generation, row in table.iterrows():
            quality_table.add_row(str(generation), *(f"{v:.5f}" for v in row))
        console.print(quality_table)

        scheme_table = Table(title="Per scheme")
        scheme_table.add_column("Scheme")
        scheme_table.add_column("Offline performance", justify="right")
        scheme_table.add_column("Median recovery", justify="right")
        scheme_table.add_column("p (worse than sga)", justify="right")
        for _, row in result.summary.per_scheme.iterrows():
            pvalue = result.pvalues_vs_sga.get(row["scheme"])
            scheme_table.add_row(
                row["scheme"],
                f"{row['offline_perf']:.5f}",
                "-" if pd.isna(row["median_recovery"]) else f"{row['median_recovery']:.1f}",
                "-" if pvalue is None else f"{pvalue:.4f}",
            )
        console.print(scheme_table)


def run_experiment(config: ExperimentConfig, log: Optional[logging.Logger] = None) -> ExperimentResult:
    return BenchOpsApi(log).run_experiment(config)


def compare_schemes(configs: Sequence[ExperimentConfig], log: Optional[logging.Logger] = None) -> ExperimentResult:
    return BenchOpsApi(log).compare_schemes(configs)
