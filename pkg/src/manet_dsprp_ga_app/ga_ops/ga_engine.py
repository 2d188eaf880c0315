# -*- coding: utf-8 -*-
# ---------------------------------------------------------
# @File             : ga_engine.py
# Path-encoded GA for the shortest path routing problem on one environment.
# ---------------------------------------------------------

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from manet_dsprp_ga_app.exceptions import ParameterError, PathGenerationError
from manet_dsprp_ga_app.metrics_ops.oracle_metrics import dijkstra
from manet_dsprp_ga_app.topology_ops.graph_topology import TopologySnapshot

logger = logging.getLogger(__name__)

WALK_RESTARTS = 100
MUTATION_RESTARTS = 20


@dataclass(frozen=True)
class RouteChromosome:
    """
    Loop-free node sequence from path[0] (source) to path[-1] (destination).

    The cached fitness is only trusted for the environment index it was
    computed under; equality compares the path alone.
    """

    path: Tuple[int, ...]
    cached_fitness: Optional[float] = field(default=None, compare=False)
    fitness_env: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        path = tuple(int(node) for node in self.path)
        if len(path) < 2:
            raise ParameterError(f"A route needs at least two nodes, got {path}", "path")
        if len(set(path)) != len(path):
            raise ParameterError(f"Route {path} repeats a node", "path")
        object.__setattr__(self, "path", path)

    @property
    def source(self) -> int:
        return self.path[0]

    @property
    def destination(self) -> int:
        return self.path[-1]

    def __len__(self) -> int:
        return len(self.path)


@dataclass(frozen=True)
class GaParams:
    n: int = 20
    p_c: float = 0.9
    p_m: float = 0.1
    r_ri: float = 0.2
    r_ei: float = 0.2
    p_m_i: float = 0.8
    m: Optional[int] = None

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"Population size must be >= 2, got {self.n}", "n")
        for name in ("p_c", "p_m", "r_ri", "r_ei", "p_m_i"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {value}", name)
        if self.r_ri + self.r_ei > 0.5:
            raise ParameterError(
                f"Immigrant ratios may not exceed half the population (r_ri + r_ei = {self.r_ri + self.r_ei})",
                "r_ei",
            )
        if self.m is not None and self.m < 1:
            raise ParameterError(f"Memory size must be >= 1, got {self.m}", "m")

    @property
    def memory_size(self) -> int:
        return self.m if self.m is not None else max(1, int(0.1 * self.n))

    @property
    def random_immigrant_count(self) -> int:
        return int(math.floor(self.r_ri * self.n))

    @property
    def elitism_immigrant_count(self) -> int:
        return int(math.floor(self.r_ei * self.n))


@dataclass(frozen=True)
class Population:
    members: Tuple[RouteChromosome, ...]
    elite: RouteChromosome
    generation: int = 0

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))

    @property
    def size(self) -> int:
        return len(self.members)


# population, graph, generation t, rng -> population
SchemeHook = Callable[[Population, TopologySnapshot, int, np.random.Generator], Population]


def path_cost(graph: TopologySnapshot, path: Sequence[int]) -> float:
    total = 0.0
    for u, v in zip(path, path[1:]):
        cost = graph.edge_cost(u, v)
        if cost is None:
            return math.inf
        total += cost
    return total


def fitness(graph: TopologySnapshot, ch: RouteChromosome) -> float:
    """Reciprocal path cost; 0 when a hop is not a link of the current graph."""
    cost = path_cost(graph, ch.path)
    return 0.0 if math.isinf(cost) else 1.0 / cost


def evaluate(graph: TopologySnapshot, ch: RouteChromosome) -> RouteChromosome:
    if ch.fitness_env == graph.env_index and ch.cached_fitness is not None:
        return ch
    return replace(ch, cached_fitness=fitness(graph, ch), fitness_env=graph.env_index)


def fitness_of(graph: TopologySnapshot, ch: RouteChromosome) -> float:
    if ch.fitness_env == graph.env_index and ch.cached_fitness is not None:
        return ch.cached_fitness
    return fitness(graph, ch)


def best_index(graph: TopologySnapshot, members: Sequence[RouteChromosome]) -> int:
    """First member with maximal fitness."""
    scores = [fitness_of(graph, m) for m in members]
    return int(np.argmax(scores))


def worst_index(graph: TopologySnapshot, members: Sequence[RouteChromosome]) -> int:
    """Lowest fitness; among ties the highest index."""
    scores = [fitness_of(graph, m) for m in members]
    return min(range(len(scores)), key=lambda i: (scores[i], -i))


def _walk(
    graph: TopologySnapshot,
    start: int,
    d: int,
    rng: np.random.Generator,
    blocked: Iterable[int],
    attempts: int,
) -> Optional[List[int]]:
    blocked = frozenset(blocked)
    for _ in range(attempts):
        path = [start]
        visited = set(blocked)
        visited.add(start)
        node = start
        while node != d:
            options = [v for v in graph.neighbors(node) if v not in visited]
            if not options:
                break
            node = options[int(rng.integers(len(options)))]
            path.append(node)
            visited.add(node)
        if node == d:
            return path
    return None


def random_walk_path(
    graph: TopologySnapshot,
    s: int,
    d: int,
    rng: np.random.Generator,
    max_restarts: int = WALK_RESTARTS,
) -> RouteChromosome:
    """Uniform random walk over unvisited neighbours; a dead end restarts from s."""
    if s == d:
        raise ParameterError("source and destination must differ", "source")
    if not (graph.active[s] and graph.active[d]):
        raise ParameterError(f"Endpoints {s} and {d} must both be active", "source")
    path = _walk(graph, s, d, rng, blocked=(), attempts=1 + max_restarts)
    if path is None:
        raise PathGenerationError(f"No random walk from {s} reached {d} within {max_restarts} restarts")
    return RouteChromosome(tuple(path))


def walk_or_oracle_path(
    graph: TopologySnapshot, s: int, d: int, rng: np.random.Generator
) -> RouteChromosome:
    try:
        return random_walk_path(graph, s, d, rng)
    except PathGenerationError:
        oracle = dijkstra(graph, s, d)
        if not oracle.reachable:
            raise
        logger.warning(f"Random walk {s}->{d} exhausted its restarts on G_{graph.env_index}; using the Dijkstra path")
        return RouteChromosome(oracle.path)


def init_population(
    graph: TopologySnapshot,
    s: int,
    d: int,
    params: GaParams,
    rng: np.random.Generator,
) -> Population:
    members = tuple(evaluate(graph, walk_or_oracle_path(graph, s, d, rng)) for _ in range(params.n))
    return Population(members=members, elite=members[best_index(graph, members)], generation=0)


def select_parents(
    population: Population, graph: TopologySnapshot, rng: np.random.Generator
) -> List[RouteChromosome]:
    """Pairwise tournaments; the fitter entrant is copied, ties go to a fair coin."""
    members = population.members
    scores = [fitness_of(graph, m) for m in members]
    pool = []
    for _ in range(len(members)):
        i, j = (int(x) for x in rng.integers(len(members), size=2))
        if scores[i] > scores[j]:
            pool.append(members[i])
        elif scores[j] > scores[i]:
            pool.append(members[j])
        else:
            pool.append(members[i] if rng.random() < 0.5 else members[j])
    return pool


def remove_loops(path: Sequence[int]) -> Tuple[int, ...]:
    """Left-to-right: a repeated node cuts everything since its first occurrence."""
    result: List[int] = []
    position = {}
    for node in path:
        if node in position:
            cut = position[node] + 1
            for dropped in result[cut:]:
                del position[dropped]
            del result[cut:]
        else:
            position[node] = len(result)
            result.append(node)
    return tuple(result)


def crossover(
    a: RouteChromosome, b: RouteChromosome, rng: np.random.Generator
) -> Tuple[RouteChromosome, RouteChromosome]:
    common = sorted(set(a.path[1:-1]) & set(b.path[1:-1]))
    if not common:
        return a, b
    g = common[int(rng.integers(len(common)))]
    ia, ib = a.path.index(g), b.path.index(g)
    first = remove_loops(a.path[: ia + 1] + b.path[ib + 1 :])
    second = remove_loops(b.path[: ib + 1] + a.path[ia + 1 :])
    return RouteChromosome(first), RouteChromosome(second)


def mutate(
    graph: TopologySnapshot,
    ch: RouteChromosome,
    rng: np.random.Generator,
    max_restarts: int = MUTATION_RESTARTS,
) -> RouteChromosome:
    """
    Regrow the route after a random internal gene.

    The new sub path is a random walk that avoids the kept prefix; a direct
    s-d route regrows from s. The input is returned if no walk reaches d.
    """
    path = ch.path
    point = 0 if len(path) == 2 else int(rng.integers(1, len(path) - 1))
    prefix = path[: point + 1]
    tail = _walk(graph, path[point], path[-1], rng, blocked=prefix, attempts=1 + max_restarts)
    if tail is None:
        return ch
    return RouteChromosome(prefix + tuple(tail[1:]))


def evolve_one_generation(
    population: Population,
    graph: TopologySnapshot,
    params: GaParams,
    rng: np.random.Generator,
    hook: Optional[SchemeHook] = None,
) -> Population:
    """
    evaluate -> record elite -> select -> crossover -> mutate -> evaluate ->
    scheme hook -> elitism.

    E(t-1) is picked with the fitness members were last evaluated with, i.e.
    under the environment the previous generation ended in.
    """
    t = population.generation + 1
    n = population.size
    incoming = population.members
    last_scores = [m.cached_fitness if m.cached_fitness is not None else fitness(graph, m) for m in incoming]
    elite = incoming[int(np.argmax(last_scores))]

    evaluated = Population(tuple(evaluate(graph, m) for m in incoming), elite, population.generation)
    pool = select_parents(evaluated, graph, rng)
    pool = [pool[i] for i in rng.permutation(n)]

    offspring: List[RouteChromosome] = []
    for i in range(0, n - 1, 2):
        a, b = pool[i], pool[i + 1]
        if rng.random() < params.p_c:
            a, b = crossover(a, b, rng)
        offspring.extend((a, b))
    if n % 2:
        offspring.append(pool[-1])

    offspring = [mutate(graph, m, rng) if rng.random() < params.p_m else m for m in offspring]
    current = Population(tuple(evaluate(graph, m) for m in offspring), elite, t)

    if hook is not None:
        current = hook(current, graph, t, rng)

    elite_fitness = fitness(graph, elite)
    members = list(current.members)
    if elite_fitness > 0 and elite_fitness > fitness_of(graph, members[best_index(graph, members)]):
        members[worst_index(graph, members)] = evaluate(graph, elite)
    return Population(tuple(members), elite, t)
