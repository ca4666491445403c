"""Undirected, connected communication topology with incidence structure.

A graph is immutable after construction: all matrices are flagged read-only so
it can be shared freely between workers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


class InvalidEdge(ValueError):
    """Self-loop, duplicate edge, or endpoint out of range."""


class DisconnectedGraph(ValueError):
    """The requested topology does not connect all nodes."""


@dataclass(frozen=True)
class EdgeSpec:
    """One communication edge together with its desired separation (meters)."""

    edge_index: int
    tail: int
    head: int
    desired_distance: float

    def __post_init__(self):
        if self.tail == self.head:
            raise InvalidEdge(f"edge {self.edge_index} is a self-loop on node {self.tail}")
        if not self.desired_distance > 0.0:
            raise ValueError(
                f"edge {self.edge_index}: desired_distance must be positive, "
                f"got {self.desired_distance}"
            )


@dataclass(frozen=True)
class CommGraph:
    """Neighbor topology: node set, edge list, adjacency and incidence matrices.

    ``edges[k] == (tails[k], heads[k])`` with the tail always the smaller node
    index, so edge orientation is canonical. Each incidence column holds one +1
    (tail) and one -1 (head).
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    adjacency: np.ndarray
    incidence: np.ndarray
    tails: np.ndarray
    heads: np.ndarray
    laplacian: np.ndarray
    neighbor_lists: tuple[tuple[int, ...], ...]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.diag(self.laplacian).copy()


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def build_graph(node_count: int, edges) -> CommGraph:
    """Validate an edge list and assemble the graph matrices.

    Raises InvalidEdge for malformed edges and DisconnectedGraph when some node
    cannot be reached from node 0. A single node with no edges is accepted as
    the trivially connected corner case.
    """
    if node_count < 1:
        raise ValueError(f"node_count must be >= 1, got {node_count}")

    canonical = []
    seen = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise InvalidEdge(f"self-loop on node {i}")
        if not (0 <= i < node_count and 0 <= j < node_count):
            raise InvalidEdge(f"edge ({i}, {j}) out of range for {node_count} nodes")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise InvalidEdge(f"duplicate edge {key}")
        seen.add(key)
        canonical.append(key)

    n, m = node_count, len(canonical)
    adjacency = np.zeros((n, n))
    incidence = np.zeros((n, m))
    tails = np.empty(m, dtype=np.intp)
    heads = np.empty(m, dtype=np.intp)
    for k, (i, j) in enumerate(canonical):
        adjacency[i, j] = 1.0
        adjacency[j, i] = 1.0
        incidence[i, k] = 1.0
        incidence[j, k] = -1.0
        tails[k] = i
        heads[k] = j

    # breadth-first search from node 0
    reached = np.zeros(n, dtype=bool)
    reached[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in np.nonzero(adjacency[u])[0]:
            if not reached[v]:
                reached[v] = True
                queue.append(int(v))
    if not reached.all():
        missing = np.nonzero(~reached)[0].tolist()
        raise DisconnectedGraph(f"nodes unreachable from node 0: {missing}")

    degrees = adjacency.sum(axis=1)
    laplacian = np.diag(degrees) - adjacency
    neighbor_lists = tuple(
        tuple(int(v) for v in np.nonzero(adjacency[i])[0]) for i in range(n)
    )
    return CommGraph(
        node_count=n,
        edges=tuple(canonical),
        adjacency=_freeze(adjacency),
        incidence=_freeze(incidence),
        tails=_freeze(tails),
        heads=_freeze(heads),
        laplacian=_freeze(laplacian),
        neighbor_lists=neighbor_lists,
    )


def neighbors(g: CommGraph, i: int) -> list[int]:
    """Sorted neighbor set of node i (never contains i itself)."""
    if not (0 <= i < g.node_count):
        raise ValueError(f"node {i} out of range for {g.node_count} nodes")
    return list(g.neighbor_lists[i])


def relative_positions(g: CommGraph, q) -> np.ndarray:
    """Stacked per-edge differences z_k = q_tail - q_head via the incidence matrix.

    ``q`` may be an (n, d) array or the agent-major flat stacking of it; the
    result mirrors the input layout ((m, d) or flat of length m*d).
    """
    q = np.asarray(q, dtype=float)
    flat = q.ndim == 1
    if flat:
        if q.size % g.node_count != 0:
            raise ValueError(
                f"stacked positions of size {q.size} do not divide into "
                f"{g.node_count} agents"
            )
        Q = q.reshape(g.node_count, -1)
    else:
        if q.shape[0] != g.node_count:
            raise ValueError(
                f"positions have leading dimension {q.shape[0]}, expected {g.node_count}"
            )
        Q = q
    Z = g.incidence.T @ Q
    return Z.ravel() if flat else Z


def edge_specs(g: CommGraph, desired_distances) -> list[EdgeSpec]:
    """Pair every edge with its desired separation (scalar shorthand accepted).

    Constructing the EdgeSpec objects validates each distance individually.
    """
    d = np.broadcast_to(np.asarray(desired_distances, dtype=float), (g.edge_count,))
    return [
        EdgeSpec(edge_index=k, tail=int(i), head=int(j), desired_distance=float(d[k]))
        for k, (i, j) in enumerate(g.edges)
    ]


def random_connected_graph(
    node_count: int,
    edge_probability: float,
    seed: int,
    max_attempts: int = 500,
) -> CommGraph:
    """Erdős–Rényi sample, rejection-resampled until connected.

    Deterministic for a given (node_count, edge_probability, seed).
    """
    if not 0.0 < edge_probability <= 1.0:
        raise ValueError(f"edge_probability must be in (0, 1], got {edge_probability}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(node_count, k=1)
    for _ in range(max_attempts):
        mask = rng.random(iu.size) < edge_probability
        edges = list(zip(iu[mask].tolist(), ju[mask].tolist()))
        try:
            return build_graph(node_count, edges)
        except DisconnectedGraph:
            continue
    raise DisconnectedGraph(
        f"no connected sample in {max_attempts} attempts "
        f"(n={node_count}, p={edge_probability})"
    )
