"""Independent reference implementations used only as test oracles.

Everything here is written from the definitions, with none of the
precomputation tricks used by the library: Floyd-Warshall instead of BFS,
literal triple loops instead of padded gathers, a double loop for the
identifiability count. Keep it that way; the tests rely on these being
independent code paths.
"""

import numpy as np


def floyd_warshall(g) -> np.ndarray:
    """All-pairs shortest paths by the classic O(p^3) relaxation."""
    p = g.p
    dist = np.full((p, p), np.inf)
    np.fill_diagonal(dist, 0.0)
    for u, v in g.edges:
        dist[u - 1, v - 1] = 1.0
        dist[v - 1, u - 1] = 1.0
    for k in range(p):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    return dist.astype(np.int64)


def naive_identifiability_number(dmat, c1, z_star, j_star, n) -> int:
    """Literal double loop over candidate pairs, counting nodes one by one."""
    p = dmat.shape[0]
    best = None
    for t in range(1, n):
        for k in range(1, p + 1):
            if (t, k) == (z_star, j_star):
                continue
            count = 0
            for j in range(1, p + 1):
                lhs = abs(z_star + dmat[j - 1, j_star - 1] - (t + dmat[j - 1, k - 1]))
                rhs = c1 * (abs(z_star - t) + dmat[j_star - 1, k - 1])
                if lhs >= rhs:
                    count += 1
            if best is None or count < best:
                best = count
    return best


def misaligned_node_count(dmat, c1, z_star, j_star, t, k) -> int:
    """Size of the defining node set for one candidate pair (t, k)."""
    p = dmat.shape[0]
    count = 0
    for j in range(1, p + 1):
        lhs = abs(z_star + dmat[j - 1, j_star - 1] - (t + dmat[j - 1, k - 1]))
        rhs = c1 * (abs(z_star - t) + dmat[j_star - 1, k - 1])
        if lhs >= rhs:
            count += 1
    return count


def naive_quadratic(t_mat, dmat) -> np.ndarray:
    """Triple loop over (source, time, node) with the strict t + d < n rule."""
    p, width = t_mat.shape
    n = width + 1
    out = np.empty((p, width))
    for j in range(1, p + 1):
        for t in range(1, n):
            acc = 0.0
            for k in range(1, p + 1):
                lag = dmat[j - 1, k - 1]
                if t + lag < n:
                    acc += t_mat[k - 1, t + lag - 1] ** 2 - 1.0
            out[j - 1, t - 1] = acc
    return out


def naive_linear(t_mat, dmat) -> np.ndarray:
    p, width = t_mat.shape
    n = width + 1
    out = np.empty((p, width))
    for j in range(1, p + 1):
        for t in range(1, n):
            acc = 0.0
            for k in range(1, p + 1):
                lag = dmat[j - 1, k - 1]
                if t + lag < n:
                    acc += t_mat[k - 1, t + lag - 1]
            out[j - 1, t - 1] = abs(acc)
    return out


def naive_argmax(stat) -> tuple[int, int]:
    """Exhaustive scan returning the max entry, ties to smallest t then j."""
    p, width = stat.shape
    best = None
    for t in range(1, width + 1):
        for j in range(1, p + 1):
            v = stat[j - 1, t - 1]
            if best is None or v > best[0]:
                best = (v, j, t)
    return best[1], best[2]


def random_connected_graph(rng, p_max=50):
    """Random connected graph: a random spanning tree plus random extras."""
    from spreaddetect.graph import from_edge_list

    p = int(rng.integers(2, p_max + 1))
    edges = set()
    for v in range(2, p + 1):
        u = int(rng.integers(1, v))
        edges.add((u, v))
    n_extra = int(rng.integers(0, p))
    for _ in range(n_extra):
        u = int(rng.integers(1, p + 1))
        v = int(rng.integers(1, p + 1))
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return from_edge_list(p, edges)
