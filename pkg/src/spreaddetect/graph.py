"""Graph substrate for spreading-change detection.

Nodes are labeled 1..p. All distances are unweighted hop counts. The
distance matrix is computed once per graph (breadth-first search from every
node) and cached, since every statistic scan reuses it.
"""

from __future__ import annotations

import functools
from collections import deque
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NetworkGraph",
    "from_edge_list",
    "from_spec",
    "cycle",
    "grid",
    "binary_tree",
    "erdos_renyi",
    "read_edge_list",
    "write_edge_list",
    "all_pairs_distances",
    "adjacency_matrix",
    "identifiability_number",
    "min_identifiability_number",
]


@dataclass(frozen=True)
class NetworkGraph:
    """Undirected connected graph on nodes 1..p with a normalized edge set.

    Edges are stored as (u, v) pairs with u < v; use :func:`from_edge_list`
    to build instances from raw pairs. Construction validates labels,
    rejects self-loops, and requires every node to be reachable from node 1.
    """

    p: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError(f"node count must be positive, got p={self.p}")
        for u, v in self.edges:
            if not (1 <= u <= self.p and 1 <= v <= self.p):
                raise ValueError(f"edge ({u}, {v}) has a node outside 1..{self.p}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if u > v:
                raise ValueError(f"edge ({u}, {v}) is not normalized; build via from_edge_list")
        unreachable = _first_unreachable(self.p, self.edges)
        if unreachable is not None:
            raise ValueError(f"graph is disconnected: node {unreachable} is unreachable from node 1")

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def from_edge_list(p: int, edges) -> NetworkGraph:
    """Validate raw (u, v) pairs and return a NetworkGraph.

    Accepts edges in either orientation and deduplicates. Raises ValueError
    for out-of-range labels, self-loops, or a disconnected graph (the error
    names an unreachable node).
    """
    normalized = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop at node {u}")
        normalized.add((min(u, v), max(u, v)))
    return NetworkGraph(p=int(p), edges=frozenset(normalized))


def _first_unreachable(p: int, edges) -> int | None:
    """Smallest node not reachable from node 1, or None if connected."""
    adj: list[list[int]] = [[] for _ in range(p + 1)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * (p + 1)
    seen[1] = True
    queue = deque([1])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    for node in range(1, p + 1):
        if not seen[node]:
            return node
    return None


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def cycle(p: int) -> NetworkGraph:
    """Cycle graph 1-2-...-p-1."""
    if p < 3:
        raise ValueError(f"cycle needs p >= 3, got {p}")
    edges = {(i, i + 1) for i in range(1, p)}
    edges.add((1, p))
    return from_edge_list(p, edges)


def grid(d: int, p1: int, wrapped: bool = True) -> NetworkGraph:
    """d-dimensional grid with side length p1 (p = p1**d nodes).

    With wrapped=True (default) every axis wraps around, i.e. the graph is a
    product of d cycles of length p1, so all nodes have degree 2d. Node
    labels are 1 + the C-order flat index of the coordinate tuple.
    """
    if d < 1:
        raise ValueError(f"grid dimension must be >= 1, got {d}")
    min_side = 3 if wrapped else 2
    if p1 < min_side:
        raise ValueError(f"grid side length must be >= {min_side}, got {p1}")
    shape = (p1,) * d
    p = p1**d
    edges = set()
    for flat in range(p):
        coords = np.unravel_index(flat, shape)
        for axis in range(d):
            nxt = list(coords)
            nxt[axis] += 1
            if nxt[axis] == p1:
                if not wrapped:
                    continue
                nxt[axis] = 0
            flat_nxt = int(np.ravel_multi_index(nxt, shape))
            edges.add((flat + 1, flat_nxt + 1))
    return from_edge_list(p, edges)


def binary_tree(p: int) -> NetworkGraph:
    """Complete binary tree filled level by level; node i's parent is i // 2."""
    if p < 1:
        raise ValueError(f"tree needs p >= 1, got {p}")
    edges = {(i // 2, i) for i in range(2, p + 1)}
    return from_edge_list(p, edges)


def erdos_renyi(p: int, prob: float, seed: int, max_retries: int = 100) -> NetworkGraph:
    """Connected Erdos-Renyi graph G(p, prob), deterministic given seed.

    Resamples with incremented seed offsets until connected, up to
    max_retries attempts, then raises ValueError.
    """
    if not 0.0 < prob <= 1.0:
        raise ValueError(f"edge probability must be in (0, 1], got {prob}")
    for attempt in range(max_retries):
        rng = np.random.default_rng(seed + attempt)
        mask = np.triu(rng.random((p, p)) < prob, k=1)
        us, vs = np.nonzero(mask)
        edges = {(int(u) + 1, int(v) + 1) for u, v in zip(us, vs)}
        try:
            return from_edge_list(p, edges)
        except ValueError:
            continue
    raise ValueError(
        f"could not sample a connected G({p}, {prob}) graph in {max_retries} attempts; "
        "increase prob or max_retries"
    )


def from_spec(spec: str) -> NetworkGraph:
    """Build a graph from a compact spec string.

    Supported forms: ``file:<path>``, ``cycle:<p>``, ``grid:<d>x<p1>``,
    ``tree:<p>``, ``er:<p>:<prob>:<seed>``.
    """
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise ValueError(f"graph spec {spec!r} missing ':' separator")
    try:
        if kind == "file":
            return read_edge_list(rest)
        if kind == "cycle":
            return cycle(int(rest))
        if kind == "grid":
            d_str, sep2, p1_str = rest.partition("x")
            if not sep2:
                raise ValueError("grid spec must look like grid:<d>x<p1>")
            return grid(int(d_str), int(p1_str))
        if kind == "tree":
            return binary_tree(int(rest))
        if kind == "er":
            parts = rest.split(":")
            if len(parts) != 3:
                raise ValueError("er spec must look like er:<p>:<prob>:<seed>")
            return erdos_renyi(int(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise ValueError(f"invalid graph spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown graph family {kind!r} in spec {spec!r}")


# ---------------------------------------------------------------------------
# Edge-list files
# ---------------------------------------------------------------------------

def read_edge_list(path) -> NetworkGraph:
    """Read a graph from a text file: first line ``p <count>``, then ``u v`` lines.

    Lines starting with ``#`` are ignored.
    """
    p = None
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if p is None:
                if len(parts) != 2 or parts[0] != "p":
                    raise ValueError(f"{path}:{lineno}: expected header 'p <count>', got {line!r}")
                p = int(parts[1])
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
    if p is None:
        raise ValueError(f"{path}: empty edge-list file")
    return from_edge_list(p, edges)


def write_edge_list(g: NetworkGraph, path) -> None:
    """Write a graph in the edge-list format accepted by read_edge_list."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"p {g.p}\n")
        for u, v in sorted(g.edges):
            fh.write(f"{u} {v}\n")


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _adjacency_lists(g: NetworkGraph) -> tuple[tuple[int, ...], ...]:
    adj: list[list[int]] = [[] for _ in range(g.p + 1)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    return tuple(tuple(sorted(nbrs)) for nbrs in adj)


@functools.lru_cache(maxsize=64)
def _distances_cached(g: NetworkGraph) -> np.ndarray:
    adj = _adjacency_lists(g)
    p = g.p
    dmat = np.full((p, p), -1, dtype=np.int64)
    for src in range(1, p + 1):
        row = dmat[src - 1]
        row[src - 1] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            du = row[u - 1]
            for v in adj[u]:
                if row[v - 1] < 0:
                    row[v - 1] = du + 1
                    queue.append(v)
    dmat.setflags(write=False)
    return dmat


def all_pairs_distances(g: NetworkGraph) -> np.ndarray:
    """Hop-count distance matrix, shape (p, p); entry [j-1, k-1] = d(j, k).

    Computed by per-node breadth-first search. The returned array is cached
    and marked read-only; copy before modifying.
    """
    return _distances_cached(g)


@functools.lru_cache(maxsize=64)
def _adjacency_matrix_cached(g: NetworkGraph) -> np.ndarray:
    mat = np.zeros((g.p, g.p), dtype=bool)
    for u, v in g.edges:
        mat[u - 1, v - 1] = True
        mat[v - 1, u - 1] = True
    mat.setflags(write=False)
    return mat


def adjacency_matrix(g: NetworkGraph) -> np.ndarray:
    """Boolean adjacency matrix, shape (p, p). Cached and read-only."""
    return _adjacency_matrix_cached(g)


# ---------------------------------------------------------------------------
# Identifiability count
# ---------------------------------------------------------------------------

def identifiability_number(
    dmat: np.ndarray,
    c1: float,
    z_star: int,
    j_star: int,
    n: int,
) -> int:
    """Minimum, over wrong candidate (time, source) pairs, of the number of
    nodes whose hypothesized spread time differs from the true one by at
    least ``c1`` times the candidate's total displacement.

    A node j counts for candidate (t, k) when

        |z_star + d(j, j_star) - (t + d(j, k))| >= c1 * (|z_star - t| + d(j_star, k)).

    The minimum runs over all t in 1..n-1 and k in 1..p except the true pair
    (z_star, j_star) itself, where the inequality is vacuous. Larger values
    mean wrong candidates are easier to tell apart from the truth. For
    c1 >= 1 the triangle inequality caps the left side at the undiscounted
    displacement, so the count is defined to be 0.
    """
    dmat = np.asarray(dmat)
    p = dmat.shape[0]
    if c1 <= 0.0:
        raise ValueError(f"c1 must be positive, got {c1}")
    if not 1 <= z_star <= n - 1:
        raise ValueError(f"z_star must be in 1..{n - 1}, got {z_star}")
    if not 1 <= j_star <= p:
        raise ValueError(f"j_star must be in 1..{p}, got {j_star}")
    if c1 >= 1.0:
        return 0

    time_diff = z_star - np.arange(1, n, dtype=np.int64)  # indexed by candidate time
    abs_time_diff = np.abs(time_diff)
    d_to_truth = dmat[:, j_star - 1]
    best = p + 1
    for k0 in range(p):
        spread_diff = d_to_truth - dmat[:, k0]  # d(j, j*) - d(j, k), all j
        lhs = np.abs(time_diff[:, None] + spread_diff[None, :])
        rhs = c1 * (abs_time_diff + dmat[j_star - 1, k0])
        counts = (lhs >= rhs[:, None]).sum(axis=1)
        if k0 == j_star - 1:
            counts[z_star - 1] = p + 1  # skip the true pair
        k_best = int(counts.min())
        if k_best < best:
            best = k_best
    return best


def min_identifiability_number(
    dmat: np.ndarray,
    c1: float,
    n: int,
    z_grid=None,
    j_grid=None,
) -> int:
    """identifiability_number additionally minimized over true (time, source) pairs.

    Defaults: z_grid = {n // 2} (the most central change time) and j_grid =
    all nodes for p <= 64, else 16 evenly spaced nodes.
    """
    dmat = np.asarray(dmat)
    p = dmat.shape[0]
    if z_grid is None:
        z_grid = [max(1, n // 2)]
    if j_grid is None:
        if p <= 64:
            j_grid = range(1, p + 1)
        else:
            j_grid = sorted({int(j) for j in np.linspace(1, p, 16)})
    return min(
        identifiability_number(dmat, c1, z, j, n) for z in z_grid for j in j_grid
    )
