# -*- coding: utf-8 -*-
# ---------------------------------------------------------
# @File             : graph_topology.py
# MANET topology snapshots, random waypoint mobility and scheduled changes.
# ---------------------------------------------------------

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from manet_dsprp_ga_app.exceptions import (
    ConnectivityError,
    ParameterError,
    TopologyValidationError,
)

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class CostModel(str, Enum):
    UNIT = "unit"
    DISTANCE = "distance"
    UNIFORM_RANDOM = "uniform_random"


class ChangeMode(str, Enum):
    MOBILITY_ADVANCE = "mobility_advance"
    NODE_TOGGLE = "node_toggle"


@dataclass(frozen=True)
class RwpParams:
    """Random waypoint area, radio and link cost settings."""

    width: float = 1000.0
    height: float = 1000.0
    radio_range: float = 250.0
    speed_min: float = 1.0
    speed_max: float = 10.0
    pause_time: float = 5.0
    node_count: int = 50
    cost_model: CostModel = CostModel.DISTANCE
    cost_lo: float = 1.0
    cost_hi: float = 10.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ParameterError(f"Area must be positive, got {self.width}x{self.height}", "area")
        if not self.radio_range > 0:
            raise ParameterError(f"Radio range must be positive, got {self.radio_range}", "radio_range")
        if not 0 < self.speed_min <= self.speed_max:
            raise ParameterError(
                f"Need 0 < speed_min <= speed_max, got [{self.speed_min}, {self.speed_max}]", "speed"
            )
        if self.pause_time < 0:
            raise ParameterError(f"Pause time must be >= 0, got {self.pause_time}", "pause_time")
        if self.node_count < 1:
            raise ParameterError(f"node_count must be >= 1, got {self.node_count}", "node_count")
        if not 0 < self.cost_lo <= self.cost_hi:
            raise ParameterError(
                f"Need 0 < cost_lo <= cost_hi, got [{self.cost_lo}, {self.cost_hi}]", "cost_model"
            )
        object.__setattr__(self, "cost_model", CostModel(self.cost_model))

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)


@dataclass(frozen=True)
class DynamicsSchedule:
    change_interval: int = 10
    change_mode: ChangeMode = ChangeMode.NODE_TOGGLE
    toggle_count: int = 2
    dt: float = 10.0
    total_changes: int = 0

    def __post_init__(self):
        if self.change_interval < 1:
            raise ParameterError(
                f"change_interval must be >= 1, got {self.change_interval}", "change_interval"
            )
        if self.total_changes < 0:
            raise ParameterError(f"total_changes must be >= 0, got {self.total_changes}", "changes")
        object.__setattr__(self, "change_mode", ChangeMode(self.change_mode))
        if self.change_mode is ChangeMode.NODE_TOGGLE and self.toggle_count < 1:
            raise ParameterError(f"toggle count must be >= 1, got {self.toggle_count}", "change_mode")
        if self.change_mode is ChangeMode.MOBILITY_ADVANCE and not self.dt > 0:
            raise ParameterError(f"mobility dt must be > 0, got {self.dt}", "change_mode")

    def is_change_generation(self, t: int) -> bool:
        return t > 0 and t % self.change_interval == 0 and t // self.change_interval <= self.total_changes


@dataclass(frozen=True, eq=False)
class MobilityState:
    """Per-node RWP state: position, waypoint (m), speed (m/s), remaining pause (s)."""

    positions: np.ndarray
    waypoints: np.ndarray
    speeds: np.ndarray
    pauses: np.ndarray


@dataclass(frozen=True)
class TopologySnapshot:
    """
    One environment G_i: node positions, awake flags and cost-weighted links.

    Edges are keyed by (low_id, high_id); iteration order of `edges` is the
    sorted key order so every derived structure is deterministic.
    """

    node_count: int
    positions: Tuple[Tuple[float, float], ...]
    active: Tuple[bool, ...]
    edges: Mapping[Edge, float] = field(default_factory=dict)
    env_index: int = 0

    def __post_init__(self):
        if len(self.positions) != self.node_count or len(self.active) != self.node_count:
            raise TopologyValidationError(
                f"Expected {self.node_count} positions/flags, got "
                f"{len(self.positions)}/{len(self.active)}"
            )
        object.__setattr__(self, "active", tuple(bool(a) for a in self.active))
        object.__setattr__(self, "positions", tuple((float(x), float(y)) for x, y in self.positions))
        ordered: Dict[Edge, float] = {}
        for (u, v), cost in sorted(self.edges.items()):
            if u == v:
                raise TopologyValidationError(f"Self-loop on node {u}")
            if not (0 <= u < v < self.node_count):
                raise TopologyValidationError(f"Edge ({u}, {v}) is not a normalized pair of node IDs")
            if not (self.active[u] and self.active[v]):
                raise TopologyValidationError(f"Edge ({u}, {v}) touches a sleeping node")
            if not (math.isfinite(cost) and cost > 0):
                raise TopologyValidationError(f"Edge ({u}, {v}) has non-positive or infinite cost {cost}")
            ordered[(u, v)] = float(cost)
        object.__setattr__(self, "edges", ordered)

    @cached_property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        neighbours = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            neighbours[u].append(v)
            neighbours[v].append(u)
        return tuple(tuple(sorted(n)) for n in neighbours)

    def neighbors(self, node: int) -> Tuple[int, ...]:
        return self.adjacency[node]

    def edge_cost(self, u: int, v: int) -> Optional[float]:
        return self.edges.get(edge_key(u, v))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(i for i in range(self.node_count) if self.active[i])
        graph.add_weighted_edges_from((u, v, c) for (u, v), c in self.edges.items())
        return graph


def _positions_tuple(positions: np.ndarray) -> Tuple[Tuple[float, float], ...]:
    return tuple((float(x), float(y)) for x, y in positions)


def _range_edges(
    positions: Sequence[Tuple[float, float]],
    active: Sequence[bool],
    params: RwpParams,
    previous: Mapping[Edge, float],
    rng: Optional[np.random.Generator],
) -> Dict[Edge, float]:
    coords = np.asarray(positions, dtype=float).reshape(-1, 2)
    awake = np.asarray(active, dtype=bool)
    n = len(coords)
    if n < 2:
        return {}
    dist = np.hypot(
        coords[:, 0][:, None] - coords[:, 0][None, :],
        coords[:, 1][:, None] - coords[:, 1][None, :],
    )
    iu, ju = np.triu_indices(n, k=1)
    mask = (dist[iu, ju] <= params.radio_range) & awake[iu] & awake[ju]

    if params.cost_model is CostModel.UNIFORM_RANDOM and rng is None:
        raise ParameterError("uniform_random cost model needs a random generator", "cost_model")

    edges: Dict[Edge, float] = {}
    for u, v in zip(iu[mask].tolist(), ju[mask].tolist()):
        if params.cost_model is CostModel.UNIT:
            cost = 1.0
        elif params.cost_model is CostModel.DISTANCE:
            # coincident nodes would give a zero cost
            cost = max(float(dist[u, v]), 1e-9)
        elif (u, v) in previous:
            cost = previous[(u, v)]
        else:
            cost = float(rng.uniform(params.cost_lo, params.cost_hi))
        edges[(u, v)] = cost
    return edges


def generate_rwp_topology(
    params: RwpParams, rng: np.random.Generator
) -> Tuple[TopologySnapshot, MobilityState]:
    """Uniform initial placement, one waypoint and speed per node, range-rule links."""
    low, high = (0.0, 0.0), (params.width, params.height)
    positions = rng.uniform(low, high, size=(params.node_count, 2))
    waypoints = rng.uniform(low, high, size=(params.node_count, 2))
    speeds = rng.uniform(params.speed_min, params.speed_max, size=params.node_count)
    mobility = MobilityState(
        positions=positions,
        waypoints=waypoints,
        speeds=speeds,
        pauses=np.zeros(params.node_count),
    )
    active = (True,) * params.node_count
    pos = _positions_tuple(positions)
    snapshot = TopologySnapshot(
        node_count=params.node_count,
        positions=pos,
        active=active,
        edges=_range_edges(pos, active, params, {}, rng),
        env_index=0,
    )
    return snapshot, mobility


def advance_mobility(
    state: MobilityState, params: RwpParams, dt: float, rng: np.random.Generator
) -> MobilityState:
    """
    Move every node for `dt` seconds under the random waypoint rules.

    A node whose remaining distance is within reach this step snaps onto its
    waypoint and starts pausing with the leftover time; when a pause expires it
    draws a fresh waypoint and speed. Nodes are processed in ID order.
    """
    if not dt > 0:
        raise ParameterError(f"dt must be > 0, got {dt}", "dt")

    positions = state.positions.astype(float).copy()
    waypoints = state.waypoints.astype(float).copy()
    speeds = state.speeds.astype(float).copy()
    pauses = state.pauses.astype(float).copy()
    area = np.array([params.width, params.height])

    for i in range(len(positions)):
        remaining = dt
        while remaining > 0:
            if pauses[i] > 0:
                if pauses[i] > remaining:
                    pauses[i] -= remaining
                    remaining = 0.0
                    break
                remaining -= pauses[i]
                pauses[i] = 0.0
                waypoints[i] = rng.uniform((0.0, 0.0), area)
                speeds[i] = rng.uniform(params.speed_min, params.speed_max)
                continue

            gap = waypoints[i] - positions[i]
            distance = float(np.hypot(gap[0], gap[1]))
            reach = speeds[i] * remaining
            if distance <= reach:
                positions[i] = waypoints[i]
                remaining -= distance / speeds[i]
                if params.pause_time > 0:
                    pauses[i] = params.pause_time
                else:
                    waypoints[i] = rng.uniform((0.0, 0.0), area)
                    speeds[i] = rng.uniform(params.speed_min, params.speed_max)
                    if remaining <= 0:
                        break
            else:
                positions[i] = positions[i] + gap * (reach / distance)
                remaining = 0.0

    np.clip(positions, 0.0, area, out=positions)
    return MobilityState(positions=positions, waypoints=waypoints, speeds=speeds, pauses=pauses)


def rebuild_edges(
    snapshot: TopologySnapshot,
    params: RwpParams,
    rng: Optional[np.random.Generator] = None,
    positions: Optional[np.ndarray] = None,
    advance_env: bool = True,
) -> TopologySnapshot:
    """Recompute links from the range rule; surviving uniform_random links keep their cost."""
    pos = _positions_tuple(positions) if positions is not None else snapshot.positions
    edges = _range_edges(pos, snapshot.active, params, snapshot.edges, rng)
    return replace(
        snapshot,
        positions=pos,
        edges=edges,
        env_index=snapshot.env_index + (1 if advance_env else 0),
    )


def apply_node_toggle(
    snapshot: TopologySnapshot,
    k: int,
    rng: np.random.Generator,
    source: int,
    destination: int,
) -> TopologySnapshot:
    """Flip the awake flag of `k` random non-endpoint nodes and drop links of sleepers."""
    if not 1 <= k <= snapshot.node_count - 2:
        raise ParameterError(
            f"toggle count must be in [1, {snapshot.node_count - 2}], got {k}", "change_mode"
        )
    candidates = [i for i in range(snapshot.node_count) if i not in (source, destination)]
    chosen = set(rng.choice(candidates, size=k, replace=False).tolist())
    active = tuple(not a if i in chosen else a for i, a in enumerate(snapshot.active))
    edges = {(u, v): c for (u, v), c in snapshot.edges.items() if active[u] and active[v]}
    return replace(snapshot, active=active, edges=edges, env_index=snapshot.env_index + 1)


def remove_edge(snapshot: TopologySnapshot, u: int, v: int) -> TopologySnapshot:
    key = edge_key(u, v)
    if key not in snapshot.edges:
        raise ParameterError(f"No edge ({u}, {v}) to remove", "edge")
    edges = {e: c for e, c in snapshot.edges.items() if e != key}
    return replace(snapshot, edges=edges, env_index=snapshot.env_index + 1)


def ensure_sd_connected(snapshot: TopologySnapshot, s: int, d: int) -> bool:
    if s == d:
        raise ParameterError("source and destination must differ", "source")
    for node in (s, d):
        if not (0 <= node < snapshot.node_count and snapshot.active[node]):
            raise ParameterError(f"Endpoint {node} is not an active node", "source")
    return nx.has_path(snapshot.to_networkx(), s, d)


def initial_environment(
    params: RwpParams,
    s: int,
    d: int,
    rng: np.random.Generator,
    max_attempts: int = 100,
) -> Tuple[TopologySnapshot, MobilityState]:
    for node in (s, d):
        if not 0 <= node < params.node_count:
            raise ParameterError(f"Endpoint {node} outside [0, {params.node_count})", "source")
    for attempt in range(1, max_attempts + 1):
        snapshot, mobility = generate_rwp_topology(params, rng)
        if ensure_sd_connected(snapshot, s, d):
            return snapshot, mobility
        logger.debug(f"Initial topology draw {attempt} leaves {s} and {d} disconnected")
    raise ConnectivityError(f"No s-d connected initial topology within {max_attempts} draws")


def next_environment(
    snapshot: TopologySnapshot,
    mobility: MobilityState,
    params: RwpParams,
    schedule: DynamicsSchedule,
    rng: np.random.Generator,
    s: int,
    d: int,
    max_attempts: int = 100,
) -> Tuple[TopologySnapshot, MobilityState]:
    """
    Apply one scheduled change, retrying until s and d are connected again.

    Toggle retries redraw from the pre-change snapshot; mobility retries keep
    moving the nodes for another dt. The accepted snapshot is G_{i+1}.
    """
    target_env = snapshot.env_index + 1
    state = mobility
    for attempt in range(1, max_attempts + 1):
        if schedule.change_mode is ChangeMode.NODE_TOGGLE:
            toggled = apply_node_toggle(snapshot, schedule.toggle_count, rng, s, d)
            candidate = rebuild_edges(toggled, params, rng, advance_env=False)
        else:
            state = advance_mobility(state, params, schedule.dt, rng)
            candidate = rebuild_edges(snapshot, params, rng, positions=state.positions)
        if ensure_sd_connected(candidate, s, d):
            return replace(candidate, env_index=target_env), state
        logger.debug(f"Change attempt {attempt} towards G_{target_env} disconnected {s} and {d}")
    raise ConnectivityError(
        f"No s-d connected environment G_{target_env} within {max_attempts} attempts"
    )
