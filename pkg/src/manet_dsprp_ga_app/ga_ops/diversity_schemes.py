# -*- coding: utf-8 -*-
# ---------------------------------------------------------
# @File             : diversity_schemes.py
# Random immigrants and elitism-based immigrants with worst replacement.
# ---------------------------------------------------------

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from manet_dsprp_ga_app.exceptions import ParameterError
from manet_dsprp_ga_app.ga_ops.ga_engine import (
    GaParams,
    Population,
    RouteChromosome,
    evaluate,
    fitness_of,
    mutate,
    walk_or_oracle_path,
)
from manet_dsprp_ga_app.topology_ops.graph_topology import TopologySnapshot


class ImmigrantOrigin(str, Enum):
    RANDOM = "random"
    ELITE = "elite-derived"


@dataclass(frozen=True)
class ImmigrantBatch:
    chromosomes: Tuple[RouteChromosome, ...]
    origin: ImmigrantOrigin

    def __len__(self) -> int:
        return len(self.chromosomes)


def make_random_immigrants(
    graph: TopologySnapshot, s: int, d: int, count: int, rng: np.random.Generator
) -> ImmigrantBatch:
    if count < 0:
        raise ParameterError(f"Immigrant count must be >= 0, got {count}", "r_ri")
    chromosomes = tuple(evaluate(graph, walk_or_oracle_path(graph, s, d, rng)) for _ in range(count))
    return ImmigrantBatch(chromosomes, ImmigrantOrigin.RANDOM)


def make_elitism_immigrants(
    elite: RouteChromosome,
    graph: TopologySnapshot,
    count: int,
    p_m_i: float,
    rng: np.random.Generator,
) -> ImmigrantBatch:
    """
    Each immigrant is mutate(E(t-1)) with probability p_m_i, else E(t-1) itself.

    An elite broken by the latest change is still used; the subpath mutation
    is what can route around the lost link.
    """
    if count < 0:
        raise ParameterError(f"Immigrant count must be >= 0, got {count}", "r_ei")
    chromosomes = []
    for _ in range(count):
        immigrant = mutate(graph, elite, rng) if rng.random() < p_m_i else elite
        chromosomes.append(evaluate(graph, immigrant))
    return ImmigrantBatch(tuple(chromosomes), ImmigrantOrigin.ELITE)


def replace_worst(
    population: Population,
    batch: ImmigrantBatch,
    graph: Optional[TopologySnapshot] = None,
) -> Population:
    """
    Evict the |batch| lowest-fitness members (later index first on ties) and
    put the immigrants into the freed slots in batch order.

    Without a graph the members' cached fitness is used as is.
    """
    n = population.size
    if len(batch) > n:
        raise ParameterError(f"Batch of {len(batch)} immigrants exceeds population size {n}", "batch")
    if not len(batch):
        return population

    if graph is not None:
        scores = [fitness_of(graph, m) for m in population.members]
    else:
        scores = [m.cached_fitness or 0.0 for m in population.members]
    evicted = sorted(range(n), key=lambda i: (scores[i], -i))[: len(batch)]
    members = list(population.members)
    for slot, immigrant in zip(sorted(evicted), batch.chromosomes):
        members[slot] = immigrant if graph is None else evaluate(graph, immigrant)
    return Population(tuple(members), population.elite, population.generation)


class RandomImmigrantsHook:
    """RIGA: floor(r_ri * n) fresh random walks every generation."""

    label = "riga"

    def __init__(self, params: GaParams, s: int, d: int):
        self.count = params.random_immigrant_count
        self.s = s
        self.d = d

    def __call__(self, population, graph, t, rng):
        batch = make_random_immigrants(graph, self.s, self.d, self.count, rng)
        return replace_worst(population, batch, graph)


class ElitismImmigrantsHook:
    """EIGA: floor(r_ei * n) immigrants derived from E(t-1)."""

    label = "eiga"

    def __init__(self, params: GaParams):
        self.count = params.elitism_immigrant_count
        self.p_m_i = params.p_m_i

    def __call__(self, population, graph, t, rng):
        batch = make_elitism_immigrants(population.elite, graph, self.count, self.p_m_i, rng)
        return replace_worst(population, batch, graph)
