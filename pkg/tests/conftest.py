import numpy as np
import pytest

from manet_dsprp_ga_app.topology_ops.graph_topology import TopologySnapshot, edge_key


def make_graph(node_count, edges, active=None, env_index=0):
    """Snapshot from {(u, v): cost}; positions are a unit-spaced row."""
    return TopologySnapshot(
        node_count=node_count,
        positions=tuple((float(i), 0.0) for i in range(node_count)),
        active=tuple(active) if active is not None else (True,) * node_count,
        edges={edge_key(u, v): c for (u, v), c in edges.items()},
        env_index=env_index,
    )


def random_connected_graph(rng, node_count, extra_edge_prob=0.3, cost_hi=10.0):
    """Random spanning tree plus extra random links with uniform real costs."""
    edges = {}
    order = rng.permutation(node_count).tolist()
    for i in range(1, node_count):
        u, v = order[i], order[int(rng.integers(i))]
        edges[edge_key(u, v)] = float(rng.uniform(0.5, cost_hi))
    for u in range(node_count):
        for v in range(u + 1, node_count):
            if (u, v) not in edges and rng.random() < extra_edge_prob:
                edges[(u, v)] = float(rng.uniform(0.5, cost_hi))
    return make_graph(node_count, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line_graph():
    # 0 - 1 - 2 - 3
    return make_graph(4, {(0, 1): 1.0, (1, 2): 2.0, (2, 3): 3.0})


@pytest.fixture
def diamond_graph():
    # 0-1-3 costs 1+1, 0-2-3 costs 2+2, 1-2 cross link
    return make_graph(4, {(0, 1): 1.0, (1, 3): 1.0, (0, 2): 2.0, (2, 3): 2.0, (1, 2): 1.0})


@pytest.fixture
def grid_graph():
    # 3x3 grid, node r*3+c, unit costs except a cheap bottom row
    edges = {}
    for r in range(3):
        for c in range(3):
            node = r * 3 + c
            if c < 2:
                edges[(node, node + 1)] = 0.5 if r == 2 else 1.0
            if r < 2:
                edges[(node, node + 3)] = 1.0
    return make_graph(9, edges)
