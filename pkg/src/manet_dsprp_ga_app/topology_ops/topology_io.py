# -*- coding: utf-8 -*-
# ---------------------------------------------------------
# @File             : topology_io.py
# Plain text topology files:
#   nodes N
#   node <id> <x> <y> <active:0|1>     (N lines)
#   edges M
#   edge <i> <j> <cost>                (M lines)
# Lines starting with '#' are comments.
# Numbers use six decimals unless that would change the float.
# ---------------------------------------------------------

import logging
import math
from pathlib import Path
from typing import Dict, Iterator, List, Tuple, Union

from manet_dsprp_ga_app.exceptions import TopologyParseError, TopologyValidationError
from manet_dsprp_ga_app.topology_ops.graph_topology import Edge, TopologySnapshot, edge_key

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _number(value: float) -> str:
    """Six decimals when they read back to the same float, repr() otherwise."""
    value = float(value)
    fixed = f"{value:.6f}"
    return fixed if float(fixed) == value else repr(value)


def save_topology(snapshot: TopologySnapshot, path: PathLike) -> None:
    lines = [
        f"# environment G_{snapshot.env_index}",
        f"nodes {snapshot.node_count}",
    ]
    for i, ((x, y), awake) in enumerate(zip(snapshot.positions, snapshot.active)):
        lines.append(f"node {i} {_number(x)} {_number(y)} {int(awake)}")
    lines.append(f"edges {len(snapshot.edges)}")
    for (u, v), cost in snapshot.edges.items():
        lines.append(f"edge {u} {v} {_number(cost)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Topology with {snapshot.node_count} nodes and {len(snapshot.edges)} edges saved to {path}")


def _content_lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    for line_number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield line_number, stripped.split()


def _int(token: str, line_number: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise TopologyParseError(f"{what} must be an integer, got {token!r}", line_number) from None


def _float(token: str, line_number: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise TopologyParseError(f"{what} must be a number, got {token!r}", line_number) from None
    if not math.isfinite(value):
        raise TopologyParseError(f"{what} must be finite, got {token!r}", line_number)
    return value


def _expect_header(lines: Iterator[Tuple[int, List[str]]], keyword: str, last_line: int) -> Tuple[int, int]:
    try:
        line_number, tokens = next(lines)
    except StopIteration:
        raise TopologyParseError(f"missing '{keyword} <count>' header", last_line + 1) from None
    if len(tokens) != 2 or tokens[0] != keyword:
        raise TopologyParseError(f"expected '{keyword} <count>', got {' '.join(tokens)!r}", line_number)
    count = _int(tokens[1], line_number, f"{keyword} count")
    if count < 0:
        raise TopologyParseError(f"{keyword} count must be >= 0", line_number)
    return line_number, count


def load_topology(path: PathLike, env_index: int = 0) -> TopologySnapshot:
    text = Path(path).read_text(encoding="utf-8")
    lines = _content_lines(text)

    line_number, node_count = _expect_header(lines, "nodes", 0)
    if node_count < 1:
        raise TopologyParseError("a topology needs at least one node", line_number)
    positions: List[Tuple[float, float]] = [(0.0, 0.0)] * node_count
    active: List[bool] = [False] * node_count
    seen = set()
    for _ in range(node_count):
        try:
            line_number, tokens = next(lines)
        except StopIteration:
            raise TopologyParseError(f"expected {node_count} node lines", line_number + 1) from None
        if len(tokens) != 5 or tokens[0] != "node":
            raise TopologyParseError(f"expected 'node <id> <x> <y> <active>', got {' '.join(tokens)!r}", line_number)
        node = _int(tokens[1], line_number, "node id")
        if not 0 <= node < node_count or node in seen:
            raise TopologyParseError(f"node id {node} out of range or repeated", line_number)
        if tokens[4] not in ("0", "1"):
            raise TopologyParseError(f"active flag must be 0 or 1, got {tokens[4]!r}", line_number)
        seen.add(node)
        positions[node] = (_float(tokens[2], line_number, "x"), _float(tokens[3], line_number, "y"))
        active[node] = tokens[4] == "1"

    line_number, edge_count = _expect_header(lines, "edges", line_number)
    edges: Dict[Edge, float] = {}
    for _ in range(edge_count):
        try:
            line_number, tokens = next(lines)
        except StopIteration:
            raise TopologyParseError(f"expected {edge_count} edge lines", line_number + 1) from None
        if len(tokens) != 4 or tokens[0] != "edge":
            raise TopologyParseError(f"expected 'edge <i> <j> <cost>', got {' '.join(tokens)!r}", line_number)
        u = _int(tokens[1], line_number, "edge endpoint")
        v = _int(tokens[2], line_number, "edge endpoint")
        for node in (u, v):
            if not 0 <= node < node_count:
                raise TopologyParseError(f"edge references unknown node {node}", line_number)
        if u == v:
            raise TopologyParseError(f"self-loop on node {u}", line_number)
        cost = _float(tokens[3], line_number, "cost")
        if cost <= 0:
            raise TopologyValidationError(f"line {line_number}: edge ({u}, {v}) has non-positive cost {cost}")
        key = edge_key(u, v)
        if key in edges:
            raise TopologyParseError(f"duplicate edge ({u}, {v})", line_number)
        edges[key] = cost

    for line_number, tokens in lines:
        raise TopologyParseError(f"unexpected trailing content {' '.join(tokens)!r}", line_number)

    return TopologySnapshot(
        node_count=node_count,
        positions=tuple(positions),
        active=tuple(active),
        edges=edges,
        env_index=env_index,
    )
