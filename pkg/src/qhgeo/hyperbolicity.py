"""Gromov hyperbolicity and rough starlikeness of the sampled qh metric."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidMatrixError, InvalidParameterError
from .graph import QhGraph, WeightedGraph
from .qh import kmatrix, sample_node_pairs

EXHAUSTIVE_MAX = 40
RANDOM_QUADRUPLES = 100_000


@dataclass(frozen=True)
class DeltaEstimate:
    delta_thin: float
    delta_four_point: float
    samples: int
    witness_triple: tuple


@dataclass(frozen=True)
class StarlikenessEstimate:
    K: float
    base: tuple[float, float]
    worst_point: tuple[float, float]
    samples: int


def _pt(g: WeightedGraph, i: int) -> tuple[float, float]:
    return (float(g.coords[i, 0]), float(g.coords[i, 1]))


def triangle_thinness(graph: WeightedGraph, x: int, y: int, z: int,
                      dists: dict | None = None) -> float:
    """Largest k-distance from a node of one side to the union of the other two sides."""
    if x == y == z:
        return 0.0
    dists = {} if dists is None else dists
    for v in (x, y, z):
        if v not in dists:
            dists[v] = graph.distances(v)
    side = {
        (x, y): graph.trace_path(dists[x], y),
        (y, z): graph.trace_path(dists[y], z),
        (z, x): graph.trace_path(dists[z], x),
    }
    keys = list(side)
    worst = 0.0
    for k in keys:
        others = np.unique(np.concatenate([side[o] for o in keys if o != k]))
        a, b = k
        limit = dists[a][b] / 2 * (1 + 1e-9) + 1e-12
        near = graph.distances(others, limit=limit, min_only=True)
        vals = near[side[k]]
        vals = np.where(np.isfinite(vals), vals, limit)
        worst = max(worst, float(vals.max()))
    return worst


def thin_triangle_delta(graph: QhGraph, n_triples: int = 200, seed: int = 0,
                        four_point_nodes: int = EXHAUSTIVE_MAX) -> DeltaEstimate:
    """Sampled thin-triangle constant, plus a four-point estimate on sampled nodes.

    Both are lower bounds of the hyperbolicity constant of the sampled metric.
    """
    if n_triples < 1:
        raise InvalidParameterError("n_triples must be at least 1")
    tri = sample_node_pairs(graph, (3 * n_triples + 1) // 2 + 1, seed).ravel()[:3 * n_triples]
    tri = tri.reshape(n_triples, 3)
    best, wit = 0.0, tuple(int(v) for v in tri[0])
    for x, y, z in tri:
        t = triangle_thinness(graph, int(x), int(y), int(z))
        if t > best:
            best, wit = t, (int(x), int(y), int(z))
    nodes = sample_node_pairs(graph, (four_point_nodes + 1) // 2, seed + 1).ravel()
    nodes = np.unique(nodes)
    fp = four_point_delta(kmatrix(graph, nodes), seed=seed)
    return DeltaEstimate(best, fp, int(n_triples), tuple(_pt(graph, v) for v in wit))


def four_point_delta(K, seed: int = 0, tol: float = 1e-9) -> float:
    """Four-point hyperbolicity: half the excess of the largest pair sum over the second.

    Exhaustive over quadruples for at most 40 points, else 10^5 seeded quadruples.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InvalidMatrixError("distance matrix must be square")
    n = len(K)
    if not np.all(np.isfinite(K)) or np.any(K < 0):
        raise InvalidMatrixError("distances must be finite and nonnegative")
    scale = tol * max(1.0, float(K.max()) if n else 1.0)
    if np.abs(K - K.T).max(initial=0.0) > scale or np.abs(np.diag(K)).max(initial=0.0) > scale:
        raise InvalidMatrixError("matrix must be symmetric with zero diagonal")
    if n >= 3:
        via = (K[:, :, None] + K[None, :, :]).min(axis=1)
        if (K - via).max() > scale:
            raise InvalidMatrixError("matrix violates the triangle inequality")
    if n < 4:
        return 0.0
    if n <= EXHAUSTIVE_MAX:
        q = np.array(list(itertools.combinations(range(n), 4)), dtype=np.int64)
    else:
        q = np.random.default_rng(seed).integers(0, n, size=(RANDOM_QUADRUPLES, 4))
    w, x, y, z = q.T
    s = np.stack([K[w, x] + K[y, z], K[w, y] + K[x, z], K[w, z] + K[x, y]], axis=1)
    s.sort(axis=1)
    return float(max(0.0, (s[:, 2] - s[:, 1]).max()) / 2)


def boundary_proxies(graph: QhGraph, depth: int = 2) -> np.ndarray:
    """Nodes closer to the boundary than the ``depth``-th refinement scale."""
    d = graph.d[: graph.n_nodes]
    return np.flatnonzero(d < graph.level_scale(depth))


def center_node(graph: QhGraph) -> int:
    """Node of maximal boundary distance (lowest index among ties)."""
    return int(np.argmax(graph.d))


def ray_union(graph: WeightedGraph, dist: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Boolean mask of nodes on the tie-broken shortest paths to ``targets``."""
    pred = graph.predecessors(dist)
    mark = np.zeros(graph.n_nodes, dtype=bool)
    front = np.unique(targets[np.isfinite(dist[targets])])
    while len(front):
        front = front[~mark[front]]
        mark[front] = True
        front = np.unique(pred[front])
        front = front[front >= 0]
    return mark


def rough_starlikeness(graph: QhGraph, w=None, depth: int = 2) -> StarlikenessEstimate:
    """Largest k-distance from a node to the union of geodesics from w to boundary proxies."""
    if w is None:
        g, wi = graph, center_node(graph)
    else:
        att = graph.attach([w])
        g, wi = att.graph, int(att.indices[0])
    proxies = boundary_proxies(graph, depth)
    if len(proxies) == 0:
        raise InvalidParameterError("no boundary proxies at this depth")
    dist = g.distances(wi)
    mark = ray_union(g, dist, proxies)
    near = g.distances(np.flatnonzero(mark), min_only=True)
    near = near[: graph.n_nodes]
    worst = int(np.argmax(near))
    return StarlikenessEstimate(float(near[worst]), _pt(g, wi), _pt(g, worst), graph.n_nodes)
