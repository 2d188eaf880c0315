# -*- coding: utf-8 -*-
# ---------------------------------------------------------
# @File             : memory_scheme.py
# Memory-enhanced GA: a fixed size store of past best routes, refreshed at
# random intervals and on detected environment changes, merged back into the
# population after a change. Also the EIGA-MEGA combination.
# ---------------------------------------------------------

import logging
from dataclasses import dataclass, replace
from typing import FrozenSet, Optional, Tuple

import numpy as np

from manet_dsprp_ga_app.exceptions import ParameterError
from manet_dsprp_ga_app.ga_ops.diversity_schemes import make_elitism_immigrants, replace_worst
from manet_dsprp_ga_app.ga_ops.ga_engine import (
    GaParams,
    Population,
    RouteChromosome,
    best_index,
    evaluate,
    fitness,
    fitness_of,
    walk_or_oracle_path,
)
from manet_dsprp_ga_app.topology_ops.graph_topology import Edge, TopologySnapshot, edge_key

logger = logging.getLogger(__name__)

UPDATE_INTERVAL = (5, 10)


@dataclass(frozen=True)
class MemoryEntry:
    chromosome: RouteChromosome
    stored_fitness: float
    is_random_placeholder: bool = False


@dataclass(frozen=True)
class MemoryStore:
    entries: Tuple[MemoryEntry, ...]
    next_update_generation: int

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def placeholder_count(self) -> int:
        return sum(e.is_random_placeholder for e in self.entries)


def _draw_interval(rng: np.random.Generator) -> int:
    low, high = UPDATE_INTERVAL
    return int(rng.integers(low, high + 1))


def init_memory(
    m: int, graph: TopologySnapshot, s: int, d: int, rng: np.random.Generator
) -> MemoryStore:
    if m < 1:
        raise ParameterError(f"Memory size must be >= 1, got {m}", "m")
    entries = []
    for _ in range(m):
        ch = walk_or_oracle_path(graph, s, d, rng)
        entries.append(MemoryEntry(evaluate(graph, ch), fitness(graph, ch), is_random_placeholder=True))
    return MemoryStore(tuple(entries), next_update_generation=_draw_interval(rng))


def refresh_memory(memory: MemoryStore, graph: TopologySnapshot) -> MemoryStore:
    entries = []
    for entry in memory.entries:
        score = fitness(graph, entry.chromosome)
        ch = replace(entry.chromosome, cached_fitness=score, fitness_env=graph.env_index)
        entries.append(replace(entry, chromosome=ch, stored_fitness=score))
    return replace(memory, entries=tuple(entries))


def detect_change(memory: MemoryStore, graph: TopologySnapshot) -> Tuple[bool, MemoryStore]:
    """
    Re-evaluate the stored routes; any fitness that moved signals a change.

    Blind spot: a change that touches neither a link nor a cost of any stored
    route goes unnoticed.
    """
    refreshed = refresh_memory(memory, graph)
    changed = any(
        new.stored_fitness != old.stored_fitness for new, old in zip(refreshed.entries, memory.entries)
    )
    return changed, refreshed


def _edge_set(ch: RouteChromosome) -> FrozenSet[Edge]:
    return frozenset(edge_key(u, v) for u, v in zip(ch.path, ch.path[1:]))


def similarity(a: RouteChromosome, b: RouteChromosome) -> float:
    """Dice coefficient of the undirected link sets."""
    ea, eb = _edge_set(a), _edge_set(b)
    return 2.0 * len(ea & eb) / (len(ea) + len(eb))


def update_memory(
    memory: MemoryStore,
    candidate: RouteChromosome,
    t: int,
    rng: np.random.Generator,
    candidate_fitness: Optional[float] = None,
) -> MemoryStore:
    """
    Write one candidate: into the first placeholder if any is left, otherwise
    over the most similar entry when the candidate is fitter. The next update
    time is redrawn either way.
    """
    score = candidate.cached_fitness if candidate_fitness is None else candidate_fitness
    if score is None:
        raise ParameterError("update_memory needs an evaluated candidate", "candidate")
    entries = list(memory.entries)
    slot = next((i for i, e in enumerate(entries) if e.is_random_placeholder), None)
    if slot is None:
        similarities = [similarity(candidate, e.chromosome) for e in entries]
        closest = int(np.argmax(similarities))
        if score > entries[closest].stored_fitness:
            slot = closest
    if slot is not None:
        entries[slot] = MemoryEntry(candidate, score, is_random_placeholder=False)
    return MemoryStore(tuple(entries), next_update_generation=t + _draw_interval(rng))


def retrieve_memory(
    memory: MemoryStore, population: Population, graph: TopologySnapshot
) -> Population:
    """Best n of population + memory under the current graph; population wins ties."""
    pool = [evaluate(graph, m) for m in population.members]
    pool += [evaluate(graph, e.chromosome) for e in memory.entries]
    scores = [fitness_of(graph, ch) for ch in pool]
    ranked = sorted(range(len(pool)), key=lambda i: (-scores[i], i))[: population.size]
    members = tuple(pool[i] for i in sorted(ranked))
    return Population(members, population.elite, population.generation)


def _best_of_population_or_elite(population: Population, graph: TopologySnapshot) -> RouteChromosome:
    best = population.members[best_index(graph, population.members)]
    elite = evaluate(graph, population.elite)
    return elite if fitness_of(graph, elite) > fitness_of(graph, best) else evaluate(graph, best)


def mega_generation_hook(
    population: Population,
    memory: MemoryStore,
    graph: TopologySnapshot,
    t: int,
    params: GaParams,
    rng: np.random.Generator,
) -> Tuple[Population, MemoryStore]:
    """
    detect change -> (store the outgoing best, retrieve) -> periodic update.

    population.elite still carries the fitness it earned in the environment
    that just ended, which is what a change-time write stores.
    """
    changed, memory = detect_change(memory, graph)
    if changed:
        memory = update_memory(memory, population.elite, t, rng)
        memory = refresh_memory(memory, graph)
        population = retrieve_memory(memory, population, graph)
        logger.debug(f"Change detected at generation {t}; memory merged into the population")
    if t >= memory.next_update_generation:
        memory = update_memory(memory, _best_of_population_or_elite(population, graph), t, rng)
    return population, memory


def eiga_mega_hook(
    population: Population,
    memory: MemoryStore,
    graph: TopologySnapshot,
    t: int,
    params: GaParams,
    rng: np.random.Generator,
) -> Tuple[Population, MemoryStore]:
    population, memory = mega_generation_hook(population, memory, graph, t, params, rng)
    batch = make_elitism_immigrants(
        population.elite, graph, params.elitism_immigrant_count, params.p_m_i, rng
    )
    return replace_worst(population, batch, graph), memory


class MegaHook:
    """Owns one run's MemoryStore and exposes the SchemeHook call signature."""

    label = "mega"
    step = staticmethod(mega_generation_hook)

    def __init__(self, params: GaParams, graph: TopologySnapshot, s: int, d: int, rng: np.random.Generator):
        self.params = params
        self.memory = init_memory(params.memory_size, graph, s, d, rng)

    def __call__(self, population, graph, t, rng):
        population, self.memory = self.step(population, self.memory, graph, t, self.params, rng)
        return population


class EigaMegaHook(MegaHook):
    label = "eiga-mega"
    step = staticmethod(eiga_mega_hook)
