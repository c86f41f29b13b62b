"""Conformal deformation of (D, k) by the densities exp(-ε k(·, w))."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import InvalidParameterError
from .graph import QhGraph, WeightedGraph
from .hyperbolicity import boundary_proxies, center_node
from .qh import Geodesic, kmatrix, node_geodesic, sample_node_pairs, solidness_from_matrix

DEFAULT_EPSILON = 0.2
EPSILON_SWEEP = (0.05, 0.1, 0.2, 0.4)


@dataclass(frozen=True)
class DeformedSpace:
    """Deformed metric d_ε and its quasihyperbolic metric k_ε on the sampling graph.

    ``graph`` is the base graph (extended by ``w`` when it is not a node);
    ``dgraph`` and ``kgraph`` carry d_ε and k_ε edge weights on the same edges.
    """

    base: QhGraph
    w: tuple[float, float]
    w_index: int
    epsilon: float
    k_from_w: np.ndarray
    rho: np.ndarray
    edge_weights_eps: np.ndarray
    boundary_distance_eps: np.ndarray
    graph: WeightedGraph = field(repr=False)
    dgraph: WeightedGraph = field(repr=False)
    kgraph: WeightedGraph = field(repr=False)

    def snap(self, p) -> tuple[int, float]:
        idx, dd = self.base.nearest([p])
        return int(idx[0]), float(dd[0])


def deform(graph: QhGraph, w=None, epsilon: float = DEFAULT_EPSILON, depth: int = 2) -> DeformedSpace:
    """Edge d_ε weight = k-weight × mean of endpoint densities.

    The distance to the deformed boundary runs through the boundary proxies,
    each charged the remaining ray tail ``ρ_ε(b)/ε`` (the d_ε-length of a
    geodesic ray continued from b at unit k-speed).
    """
    if not 0 < epsilon <= 1:
        raise InvalidParameterError("epsilon must lie in (0, 1]")
    if w is None:
        g, wi = graph, center_node(graph)
    else:
        att = graph.attach([w])
        g, wi = att.graph, int(att.indices[0])
    kw = g.distances(wi)
    rho = np.exp(-epsilon * kw)
    weps = g.w * (rho[g.u] + rho[g.v]) / 2
    dgraph = g.reweighted(weps)

    proxies = boundary_proxies(graph, depth)
    if len(proxies) == 0:
        raise InvalidParameterError("no boundary proxies at this depth")
    n = g.n_nodes
    virt = n
    tail = rho[proxies] / epsilon
    ext = WeightedGraph(np.vstack([g.coords, [[np.nan, np.nan]]]),
                        np.concatenate([g.u, proxies]), np.concatenate([g.v, np.full(len(proxies), virt)]),
                        np.concatenate([weps, tail]))
    bd = dijkstra(ext.csr, directed=False, indices=virt)[:n]
    keps = weps * (1 / bd[g.u] + 1 / bd[g.v]) / 2
    kgraph = g.reweighted(keps)
    wp = (float(g.coords[wi, 0]), float(g.coords[wi, 1]))
    return DeformedSpace(graph, wp, wi, float(epsilon), kw, rho, weps, bd, g, dgraph, kgraph)


def deformed_distance(ds: DeformedSpace, x, y) -> float:
    """d_ε between the nodes nearest to x and y."""
    (i, _), (j, _) = _canon_snap(ds, x, y)
    return 0.0 if i == j else ds.dgraph.distance(i, j)


def deformed_qh(ds: DeformedSpace, x, y) -> float:
    """k_ε between the nodes nearest to x and y."""
    (i, _), (j, _) = _canon_snap(ds, x, y)
    return 0.0 if i == j else ds.kgraph.distance(i, j)


def _canon_snap(ds, x, y):
    a, b = ds.snap(x), ds.snap(y)
    return (a, b) if a[0] <= b[0] else (b, a)


@dataclass(frozen=True)
class BandReport:
    epsilon: float
    upper_violations: int
    c0_empirical: float
    pairs_tested: int
    ratio_min: float
    ratio_max: float
    M_empirical: float
    diam_eps: float
    witness_low: tuple
    witness_high: tuple

    @property
    def band_upper_ok(self) -> bool:
        return self.upper_violations == 0


def _pair_values(g: WeightedGraph, pairs: np.ndarray) -> np.ndarray:
    out = np.zeros(len(pairs))
    srcs = np.unique(pairs[:, 0])
    for s in srcs:
        sel = pairs[:, 0] == s
        out[sel] = g.distances(int(s))[pairs[sel, 1]]
    return out


def band_check(ds: DeformedSpace, pairs: int = 100, seed: int = 0, slack: float = 0.05,
               diam_sources: int = 20) -> BandReport:
    """Compare k_ε with ε·k on seeded pairs and bound the sampled d_ε diameter."""
    P = sample_node_pairs(ds.base, pairs, seed)
    P = P[P[:, 0] != P[:, 1]]
    if len(P) == 0:
        raise InvalidParameterError("no nondegenerate pairs sampled")
    k = _pair_values(ds.graph, P)
    ke = _pair_values(ds.kgraph, P)
    r = ke / (ds.epsilon * k)
    upper = int(np.sum(ke > math.e * ds.epsilon * k * (1 + slack)))
    lo, hi = int(np.argmin(r)), int(np.argmax(r))
    q = ke / k
    M = float(max(q.max(), 1 / q.min(), 1.0))
    src = np.unique(np.concatenate([[ds.w_index], sample_node_pairs(ds.base, diam_sources, seed + 7)[:, 0]]))
    diam = float(max(np.max(ds.dgraph.distances(int(s))) for s in src))
    pt = lambda i: (float(ds.graph.coords[i, 0]), float(ds.graph.coords[i, 1]))
    return BandReport(ds.epsilon, upper, float(r.min()), len(P), float(r.min()), float(r.max()),
                      M, diam, (pt(P[lo, 0]), pt(P[lo, 1])), (pt(P[hi, 0]), pt(P[hi, 1])))


def geodesic_cone_eps(ds: DeformedSpace, geo: Geodesic) -> float:
    """Cone constant of a d_ε path with respect to the deformed boundary distance."""
    if len(geo.nodes) < 2:
        return 0.0
    s = geo.cumulative
    L = s[-1]
    return float(np.max(np.minimum(s, L - s) / ds.boundary_distance_eps[geo.nodes]))


def uniformity_of_deformation(ds: DeformedSpace, pairs: int = 50, seed: int = 0) -> float:
    """Largest uniform constant of sampled d_ε geodesics in the deformed space.

    The quasiconvexity term of a d_ε geodesic is 1, so the constant is the
    maximum of 1 and its cone constant; degenerate pairs contribute 0.
    """
    if pairs < 1:
        raise InvalidParameterError("pairs must be at least 1")
    P = sample_node_pairs(ds.base, pairs, seed)
    best = 0.0
    for i, j in P:
        if i == j:
            continue
        geo = node_geodesic(ds.dgraph, int(i), int(j))
        best = max(best, 1.0, geodesic_cone_eps(ds, geo))
    return best


def image_solidness(ds: DeformedSpace, geo: Geodesic, h: float, max_samples: int = 64):
    """Solidness in (X_ε, k_ε) of a base-graph geodesic given by its nodes."""
    n = len(geo.nodes)
    idx = np.arange(n) if n <= max_samples else np.unique(
        np.linspace(0, n - 1, max_samples).round().astype(int))
    nodes = geo.nodes[idx]
    K = kmatrix(ds.kgraph, nodes)
    return solidness_from_matrix(geo.path.cumulative[idx], geo.points[idx], K, h)
