# -*- coding: utf-8 -*-
# ---------------------------------------------------------
# @File             : oracle_metrics.py
# Exact shortest paths and the per-generation experiment metrics.
# ---------------------------------------------------------

import heapq
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy import stats

from manet_dsprp_ga_app.exceptions import (
    EnumerationLimitError,
    ExperimentInvariantError,
    ParameterError,
)
from manet_dsprp_ga_app.topology_ops.graph_topology import TopologySnapshot

ENUMERATION_HARD_CAP = 12
RECOVERY_THRESHOLD = 0.9


@dataclass(frozen=True)
class OracleResult:
    cost: float
    path: Tuple[int, ...]
    explored_paths: Optional[int] = None

    @property
    def reachable(self) -> bool:
        return math.isfinite(self.cost)


UNREACHABLE = OracleResult(cost=math.inf, path=())


@dataclass(frozen=True)
class GenerationRecord:
    scheme: str
    replication: int
    generation: int
    env_index: int
    best_cost: float
    best_fitness: float
    quality: float
    feasible_fraction: float

    def to_row(self) -> Dict[str, object]:
        return asdict(self)


CSV_COLUMNS = list(GenerationRecord.__dataclass_fields__)


def _path_sum(graph: TopologySnapshot, path: Sequence[int]) -> float:
    total = 0.0
    for u, v in zip(path, path[1:]):
        total += graph.edges[(u, v) if u < v else (v, u)]
    return total


def dijkstra(graph: TopologySnapshot, s: int, d: int) -> OracleResult:
    """
    Least-cost path over active edges.

    Labels are (cost, path) pairs so equal-cost alternatives resolve to the
    lexicographically smallest node sequence.
    """
    for node in (s, d):
        if not graph.active[node]:
            raise ParameterError(f"Endpoint {node} is asleep", "source")
    if s == d:
        return OracleResult(cost=0.0, path=(s,))
    settled = set()
    heap: List[Tuple[float, Tuple[int, ...]]] = [(0.0, (s,))]
    while heap:
        cost, path = heapq.heappop(heap)
        node = path[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == d:
            return OracleResult(cost=cost, path=path)
        for nxt in graph.neighbors(node):
            if nxt not in settled:
                heapq.heappush(heap, (cost + graph.edge_cost(node, nxt), path + (nxt,)))
    return UNREACHABLE


def enumerate_all_paths(
    graph: TopologySnapshot, s: int, d: int, node_cap: int = 10
) -> OracleResult:
    """Brute-force minimum over every loop-free s-d path (test oracle)."""
    if node_cap > ENUMERATION_HARD_CAP:
        raise ParameterError(f"node_cap must be <= {ENUMERATION_HARD_CAP}, got {node_cap}", "node_cap")
    if graph.node_count > node_cap:
        raise EnumerationLimitError(
            f"Refusing to enumerate paths on {graph.node_count} nodes (cap {node_cap})"
        )
    nx_graph = graph.to_networkx()
    best = UNREACHABLE
    explored = 0
    if s in nx_graph and d in nx_graph:
        for path in nx.all_simple_paths(nx_graph, s, d):
            explored += 1
            candidate = (_path_sum(graph, path), tuple(path))
            if candidate < (best.cost, best.path):
                best = OracleResult(cost=candidate[0], path=candidate[1])
    return OracleResult(cost=best.cost, path=best.path, explored_paths=explored)


def quality(best_cost: float, opt_cost: float) -> float:
    """opt/best in [0, 1]; 0 when the GA holds no feasible path."""
    if not (math.isfinite(opt_cost) and opt_cost > 0):
        raise ExperimentInvariantError(f"Optimum cost must be finite and positive, got {opt_cost}")
    if not math.isfinite(best_cost):
        return 0.0
    return min(1.0, opt_cost / best_cost)


def offline_performance(records: Sequence[GenerationRecord]) -> float:
    if not records:
        raise ParameterError("offline performance of an empty run is undefined", "records")
    return float(np.mean([r.quality for r in records]))


def recovery_times(
    records: Sequence[GenerationRecord],
    sentinel: int,
    threshold: float = RECOVERY_THRESHOLD,
) -> List[int]:
    """
    Generations from each environment change until quality >= threshold.

    A change is seen wherever env_index differs from the previous record (G_0 before the first);
    a change never recovered from reports `sentinel`.
    """
    ordered = sorted(records, key=lambda r: r.generation)
    times: List[int] = []
    previous_env = 0
    for i, record in enumerate(ordered):
        changed = record.env_index != previous_env
        previous_env = record.env_index
        if not changed:
            continue
        change_at = record.generation
        recovered = sentinel
        for later in ordered[i:]:
            if later.env_index != record.env_index:
                break
            if later.quality >= threshold:
                recovered = later.generation - change_at
                break
        times.append(recovered)
    return times


def paired_one_sided_pvalue(a: Sequence[float], b: Sequence[float]) -> float:
    """
    p-value of a paired t-test against H1: mean(a) < mean(b).

    Identical samples carry no evidence either way and return 1.0.
    """
    a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a_arr.shape != b_arr.shape or a_arr.size < 2:
        raise ParameterError("paired comparison needs two equally long samples of size >= 2", "samples")
    if np.allclose(a_arr, b_arr):
        return 1.0
    result = stats.ttest_rel(a_arr, b_arr, alternative="less")
    return 1.0 if np.isnan(result.pvalue) else float(result.pvalue)
