import math

import numpy as np
import pytest

from conftest import make_graph, random_connected_graph
from manet_dsprp_ga_app.exceptions import ParameterError, PathGenerationError
from manet_dsprp_ga_app.ga_ops.ga_engine import (
    GaParams,
    Population,
    RouteChromosome,
    crossover,
    evaluate,
    evolve_one_generation,
    fitness,
    fitness_of,
    init_population,
    mutate,
    path_cost,
    random_walk_path,
    remove_loops,
    select_parents,
    walk_or_oracle_path,
)
from manet_dsprp_ga_app.topology_ops.graph_topology import remove_edge


def _is_valid_route(ch, s, d):
    return ch.path[0] == s and ch.path[-1] == d and len(set(ch.path)) == len(ch.path)


def test_chromosome_rejects_loops_and_short_paths():
    with pytest.raises(ParameterError):
        RouteChromosome((0, 1, 0, 2))
    with pytest.raises(ParameterError):
        RouteChromosome((3,))
    ch = RouteChromosome([0, 2, 5])
    assert ch.path == (0, 2, 5)
    assert (ch.source, ch.destination, len(ch)) == (0, 5, 3)


def test_chromosome_equality_ignores_cached_fitness():
    assert RouteChromosome((0, 1), cached_fitness=0.5, fitness_env=0) == RouteChromosome((0, 1))


@pytest.mark.parametrize(
    "kwargs",
    [{"n": 0}, {"n": 1}, {"p_c": 1.5}, {"p_m": -0.1}, {"r_ri": 0.3, "r_ei": 0.3}, {"m": 0}],
)
def test_invalid_ga_params(kwargs):
    with pytest.raises(ParameterError):
        GaParams(**kwargs)


def test_ga_params_derived_counts():
    params = GaParams(n=20, r_ri=0.2, r_ei=0.25)
    assert params.random_immigrant_count == 4
    assert params.elitism_immigrant_count == 5
    assert params.memory_size == 2
    assert GaParams(n=5).memory_size == 1
    assert GaParams(n=20, m=7).memory_size == 7


def test_fitness_is_reciprocal_cost(line_graph):
    ch = RouteChromosome((0, 1, 2, 3))
    assert fitness(line_graph, ch) == pytest.approx(1 / 6)
    assert path_cost(line_graph, (0, 2)) == math.inf
    assert fitness(line_graph, RouteChromosome((0, 2, 3))) == 0.0


def test_fitness_exact_on_random_graphs():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        n = int(rng.integers(3, 12))
        graph = random_connected_graph(rng, n)
        s, d = (int(x) for x in rng.choice(n, size=2, replace=False))
        ch = walk_or_oracle_path(graph, s, d, rng)
        expected = 0.0
        for u, v in zip(ch.path, ch.path[1:]):
            expected += graph.edges[(min(u, v), max(u, v))]
        assert abs(fitness(graph, ch) - 1.0 / expected) <= 1e-12 / expected


def test_cached_fitness_is_tied_to_environment(line_graph):
    ch = evaluate(line_graph, RouteChromosome((0, 1, 2, 3)))
    assert ch.fitness_env == 0 and ch.cached_fitness == pytest.approx(1 / 6)
    broken = remove_edge(line_graph, 1, 2)
    assert fitness_of(broken, ch) == 0.0
    assert evaluate(broken, ch).cached_fitness == 0.0


def test_random_walk_paths_are_valid(grid_graph, rng):
    for _ in range(200):
        ch = random_walk_path(grid_graph, 0, 8, rng)
        assert _is_valid_route(ch, 0, 8)
        assert all(grid_graph.edge_cost(u, v) is not None for u, v in zip(ch.path, ch.path[1:]))


def test_random_walk_on_single_edge(rng):
    graph = make_graph(2, {(0, 1): 4.0})
    assert random_walk_path(graph, 0, 1, rng).path == (0, 1)


def _triangle(direct_cost=5.0, detour_cost=1.0):
    # s=0, a=1, d=2
    return make_graph(3, {(0, 2): direct_cost, (0, 1): detour_cost, (1, 2): detour_cost})


def test_random_walk_on_triangle_picks_each_route_half_the_time():
    graph = _triangle()
    rng = np.random.default_rng(2024)
    trials = 10000
    paths = [random_walk_path(graph, 0, 2, rng).path for _ in range(trials)]
    assert set(paths) == {(0, 2), (0, 1, 2)}
    assert paths.count((0, 2)) / trials == pytest.approx(0.5, abs=0.03)


def test_random_walk_follows_the_only_corridor(rng):
    # dead ends at 1, 2 and 4 hang off the corridor 0-3-5-6
    graph = make_graph(7, {(0, 1): 1.0, (0, 2): 1.0, (0, 3): 1.0, (3, 4): 1.0, (3, 5): 1.0, (5, 6): 1.0})
    for _ in range(200):
        assert random_walk_path(graph, 0, 6, rng).path == (0, 3, 5, 6)


def test_random_walk_disconnected_fails(rng):
    graph = make_graph(4, {(0, 1): 1.0, (2, 3): 1.0})
    with pytest.raises(PathGenerationError):
        random_walk_path(graph, 0, 3, rng, max_restarts=5)
    with pytest.raises(PathGenerationError):
        walk_or_oracle_path(graph, 0, 3, rng)


def test_random_walk_preconditions(line_graph, rng):
    with pytest.raises(ParameterError):
        random_walk_path(line_graph, 2, 2, rng)


def test_init_population(grid_graph, rng):
    population = init_population(grid_graph, 0, 8, GaParams(n=12), rng)
    assert population.size == 12
    assert population.generation == 0
    assert all(_is_valid_route(m, 0, 8) for m in population.members)
    assert all(m.fitness_env == 0 for m in population.members)
    assert fitness(grid_graph, population.elite) == max(fitness(grid_graph, m) for m in population.members)


def test_smallest_population_on_a_unique_route(line_graph, rng):
    single_edge = make_graph(2, {(0, 1): 1.0})
    for graph, s, d, route in ((single_edge, 0, 1, (0, 1)), (line_graph, 0, 3, (0, 1, 2, 3))):
        population = init_population(graph, s, d, GaParams(n=2), rng)
        assert [m.path for m in population.members] == [route, route]
        assert population.elite.path == route


def test_population_size_one_is_rejected():
    with pytest.raises(ParameterError) as info:
        GaParams(n=1)
    assert info.value.field == "n"


def test_init_population_on_triangle_holds_about_half_direct_routes():
    graph = _triangle()
    rng = np.random.default_rng(31)
    counts = []
    for _ in range(500):
        population = init_population(graph, 0, 2, GaParams(n=20), rng)
        assert population.size == 20
        counts.append(sum(m.path == (0, 2) for m in population.members))
    assert np.mean(counts) == pytest.approx(10.0, abs=0.5)


def test_selection_copies_the_fitter_entrant(line_graph, rng):
    good = evaluate(line_graph, RouteChromosome((0, 1, 2, 3)))
    broken = evaluate(line_graph, RouteChromosome((0, 2, 3)))
    population = Population((good, broken), good)
    picks = [select_parents(population, line_graph, rng) for _ in range(50)]
    for pool in picks:
        assert len(pool) == 2
    # a mixed draw always resolves to the feasible route
    assert sum(p == good for pool in picks for p in pool) > 50


def test_tournament_share_of_the_fitter_member():
    # fitness 0.9 for the direct route and 0.1 for the detour
    graph = _triangle(direct_cost=1 / 0.9, detour_cost=5.0)
    strong = evaluate(graph, RouteChromosome((0, 2)))
    weak = evaluate(graph, RouteChromosome((0, 1, 2)))
    assert strong.cached_fitness == pytest.approx(0.9)
    assert weak.cached_fitness == pytest.approx(0.1)
    population = Population((strong, weak), strong)
    rng = np.random.default_rng(5)
    picks = [p for _ in range(5000) for p in select_parents(population, graph, rng)]
    assert sum(p == strong for p in picks) / len(picks) == pytest.approx(0.75, abs=0.02)


def test_selection_with_all_infeasible_population(line_graph, rng):
    a = RouteChromosome((0, 2, 3))
    b = RouteChromosome((0, 3))
    pool = select_parents(Population((a, b), a), line_graph, rng)
    assert len(pool) == 2 and all(p in (a, b) for p in pool)


@pytest.mark.parametrize(
    "path, expected",
    [
        ((0, 1, 2, 3), (0, 1, 2, 3)),
        ((0, 1, 2, 1, 3), (0, 1, 3)),
        ((0, 4, 2, 4, 0, 5), (0, 5)),
        ((0, 1, 2, 3, 2, 1, 4), (0, 1, 4)),
    ],
)
def test_remove_loops(path, expected):
    assert remove_loops(path) == expected


def test_remove_loops_is_idempotent_and_loop_free():
    rng = np.random.default_rng(7)
    for _ in range(10000):
        length = int(rng.integers(2, 15))
        path = [0] + rng.integers(0, 8, size=length).tolist() + [9]
        once = remove_loops(path)
        assert remove_loops(once) == once
        assert len(set(once)) == len(once)
        assert once[0] == 0 and once[-1] == 9


def test_crossover_exchanges_tails_at_common_node(rng):
    a = RouteChromosome((0, 1, 4, 7, 8))
    b = RouteChromosome((0, 3, 4, 5, 8))
    first, second = crossover(a, b, rng)
    assert first.path == (0, 1, 4, 5, 8)
    assert second.path == (0, 3, 4, 7, 8)


def test_crossover_without_common_node_returns_parents(rng):
    a = RouteChromosome((0, 1, 2, 8))
    b = RouteChromosome((0, 3, 6, 8))
    assert crossover(a, b, rng) == (a, b)


def test_crossover_repairs_loops(rng):
    a = RouteChromosome((0, 1, 2, 3, 8))
    b = RouteChromosome((0, 3, 1, 8))
    for _ in range(20):
        for child in crossover(a, b, rng):
            assert _is_valid_route(child, 0, 8)


def test_mutation_keeps_endpoints_and_prefix(grid_graph, rng):
    ch = RouteChromosome((0, 1, 2, 5, 8))
    for _ in range(100):
        mutated = mutate(grid_graph, ch, rng)
        assert _is_valid_route(mutated, 0, 8)
        assert mutated.path[:2] == (0, 1)


def test_mutation_on_direct_route(rng):
    graph = make_graph(3, {(0, 2): 5.0, (0, 1): 1.0, (1, 2): 1.0})
    mutated = mutate(graph, RouteChromosome((0, 2)), rng)
    assert mutated.path in ((0, 2), (0, 1, 2))


def test_mutation_on_triangle_detour_is_unchanged(rng):
    graph = _triangle()
    ch = RouteChromosome((0, 1, 2))
    for _ in range(50):
        assert mutate(graph, ch, rng).path == (0, 1, 2)


def test_mutation_without_alternative_returns_input(line_graph, rng):
    ch = RouteChromosome((0, 1, 2, 3))
    assert mutate(line_graph, ch, rng) == ch


def test_elitism_keeps_best_fitness_non_decreasing(grid_graph, rng):
    params = GaParams(n=10, p_c=0.9, p_m=0.5)
    population = init_population(grid_graph, 0, 8, params, rng)
    best = max(fitness(grid_graph, m) for m in population.members)
    for t in range(1, 61):
        population = evolve_one_generation(population, grid_graph, params, rng)
        assert population.generation == t
        current = max(fitness(grid_graph, m) for m in population.members)
        assert current >= best
        best = current
        assert all(_is_valid_route(m, 0, 8) for m in population.members)
    assert best == pytest.approx(1 / 3)


def test_evolve_calls_hook_with_generation(grid_graph, rng):
    seen = []

    def hook(population, graph, t, hook_rng):
        seen.append((t, population.size))
        return population

    params = GaParams(n=6)
    population = init_population(grid_graph, 0, 8, params, rng)
    for _ in range(3):
        population = evolve_one_generation(population, grid_graph, params, rng, hook)
    assert seen == [(1, 6), (2, 6), (3, 6)]


def test_odd_population_size(grid_graph, rng):
    params = GaParams(n=7)
    population = init_population(grid_graph, 0, 8, params, rng)
    population = evolve_one_generation(population, grid_graph, params, rng)
    assert population.size == 7
