"""Measured structural constants of curves and domains.

Every domain-level measurement is returned as a :class:`ConstantReport`
labeled with the direction it certifies: ``upper_bound`` (a witnessing
construction exists), ``lower_bound`` (a sampled supremum) or ``two_sided``
(a direct measurement of a given curve).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, dijkstra, minimum_spanning_tree

from .errors import DegenerateCurveError, InvalidParameterError
from .geometry import Domain, Polyline, arclength_samples, point_polyline_distance, segment_distance
from .graph import QhGraph, WeightedGraph
from .hyperbolicity import center_node
from .qh import Geodesic, node_geodesic, sample_interior_points, sample_node_pairs

UPPER, LOWER, TWO_SIDED = "upper_bound", "lower_bound", "two_sided"


@dataclass(frozen=True)
class ConstantReport:
    value: float
    witness: tuple
    samples: int
    resolution: str
    label: str
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"value": self.value, "witness": _jsonable(self.witness), "samples": self.samples,
                "resolution": self.resolution, "label": self.label}


def _jsonable(x):
    if isinstance(x, (tuple, list, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _path(curve) -> Polyline:
    return curve.path if isinstance(curve, Geodesic) else curve


def _nondegenerate(curve: Polyline) -> Polyline:
    if len(curve) < 2 or np.array_equal(curve.start, curve.end):
        raise DegenerateCurveError("curve needs distinct endpoints")
    return curve


def _pt(p) -> tuple[float, float]:
    return (float(p[0]), float(p[1]))


def cone_profile(domain: Domain, curve) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(s, points, ratio) with ratio = min(s, ℓ - s) / d_D on the dense sampling."""
    c = _nondegenerate(_path(curve))
    s, pts, d = arclength_samples(domain, c)
    return s, pts, np.minimum(s, c.length - s) / d


def cone_constant(domain: Domain, curve, resolution: str = "") -> ConstantReport:
    """Smallest a for which the curve is an a-cone arc, on dense arclength samples."""
    s, pts, r = cone_profile(domain, curve)
    i = int(np.argmax(r))
    return ConstantReport(float(r[i]), (_pt(pts[i]), float(s[i])), len(s), resolution, TWO_SIDED)


def cone_ratio_at(domain: Domain, curve, s: float) -> float:
    c = _path(curve)
    p = c.point_at(s)
    return float(min(s, c.length - s) / domain.distance(p[None])[0])


def inner_distance(graph: QhGraph, x, y) -> float:
    """Length of the shortest Euclidean-weighted graph path between two points."""
    att = graph.attach([x, y], metric="euclid")
    i, j = att.indices
    return 0.0 if i == j else att.graph.distance(int(i), int(j))


def quasiconvexity(domain: Domain, curve, mode: str = "euclidean",
                   graph: QhGraph | None = None) -> float:
    """Curve length over the Euclidean or inner distance of its endpoints."""
    c = _nondegenerate(_path(curve))
    if mode == "euclidean":
        return float(c.length / np.hypot(*(c.end - c.start)))
    if mode == "inner":
        if graph is None:
            raise InvalidParameterError("inner mode needs a sampling graph")
        return float(c.length / inner_distance(graph, c.start, c.end))
    raise InvalidParameterError(f"unknown mode {mode!r}")


def uniform_constant(domain: Domain, curve) -> float:
    return max(cone_constant(domain, curve).value, quasiconvexity(domain, curve))


def uniform_distance_bound(c: float, x, y, dx: float, dy: float) -> float:
    """``4c²·ln(1 + |x-y|/min d)``: k-distance bound in a c-uniform space."""
    return 4 * c * c * math.log1p(float(np.hypot(*(np.asarray(x) - np.asarray(y)))) / min(dx, dy))


def _valid_pairs(graph: QhGraph, n_pairs: int, seed: int) -> np.ndarray:
    if n_pairs < 1:
        raise InvalidParameterError("n_pairs must be at least 1")
    P = sample_node_pairs(graph, n_pairs, seed)
    return P[P[:, 0] != P[:, 1]]


def center_route(graph: QhGraph, dist_c: np.ndarray, c: int, i: int, j: int) -> Polyline:
    """Concatenated qh geodesics i → c → j (tie-broken paths from the center)."""
    a = graph.trace_path(dist_c, i)[::-1]
    b = graph.trace_path(dist_c, j)
    nodes = np.concatenate([a, b[1:]])
    return Polyline(graph.coords[nodes])


def john_estimate(domain: Domain, n_pairs: int = 200, seed: int = 0,
                  graph: QhGraph | None = None) -> ConstantReport:
    """Upper-bound certificate for the John constant.

    Per pair the best cone constant among the qh geodesic, the inner geodesic
    and the route through the center node; the report is the max over pairs.
    """
    from .graph import build_graph

    graph = build_graph(domain) if graph is None else graph
    P = _valid_pairs(graph, n_pairs, seed)
    c = center_node(graph)
    dist_c = graph.distances(c)
    best, wit = 0.0, None
    per_pair = []
    for i, j in P:
        i, j = int(i), int(j)
        cands = [node_geodesic(graph, i, j).path,
                 node_geodesic(graph.euclidean, i, j).path,
                 center_route(graph, dist_c, c, i, j)]
        vals = []
        for cv in cands:
            try:
                vals.append(cone_constant(domain, cv).value)
            except DegenerateCurveError:
                vals.append(math.inf)
        a = min(vals)
        per_pair.append(a)
        if a > best or wit is None:
            best, wit = a, (_pt(graph.coords[i]), _pt(graph.coords[j]), int(np.argmin(vals)))
    return ConstantReport(float(best), wit, len(P), graph.params.hash, UPPER,
                          {"per_pair": per_pair})


def gehring_hayman(domain: Domain, graph: QhGraph, n_pairs: int = 200, seed: int = 0) -> ConstantReport:
    """Sampled max of ℓ(qh geodesic) / inner distance (a lower bound of the GH constant)."""
    P = _valid_pairs(graph, n_pairs, seed)
    eg = graph.euclidean
    ratios = []
    for i, j in P:
        geo = node_geodesic(graph, int(i), int(j))
        ratios.append(geo.path.length / eg.distance(int(i), int(j)))
    ratios = np.array(ratios)
    k = int(np.argmax(ratios))
    wit = (_pt(graph.coords[P[k, 0]]), _pt(graph.coords[P[k, 1]]))
    return ConstantReport(float(ratios[k]), wit, len(P), graph.params.hash, LOWER,
                          {"min_ratio": float(ratios.min()), "ratios": ratios.tolist()})


def ball_separation(domain: Domain, graph: QhGraph, n_pairs: int = 200, seed: int = 0) -> ConstantReport:
    """Max over pairs and z on the qh geodesic of dist(z, inner geodesic)/d_D(z).

    Only the inner geodesic is tried as competitor, so this is a lower bound.
    """
    P = _valid_pairs(graph, n_pairs, seed)
    best, wit = 0.0, None
    for i, j in P:
        geo = node_geodesic(graph, int(i), int(j))
        beta = node_geodesic(graph.euclidean, int(i), int(j)).path
        s, pts, d = arclength_samples(domain, geo.path)
        r = point_polyline_distance(pts, beta) / d
        q = int(np.argmax(r))
        if r[q] > best or wit is None:
            best, wit = float(r[q]), (_pt(graph.coords[i]), _pt(graph.coords[j]), _pt(pts[q]))
    return ConstantReport(best, wit, len(P), graph.params.hash, LOWER)


def _steiner_max(tree: csr_matrix, root: int, terminals: np.ndarray) -> float:
    """Largest edge weight on the subtree of ``tree`` spanning ``terminals`` (root among them)."""
    order, pred = breadth_first_order(tree, root, directed=False)
    has = np.zeros(tree.shape[0], dtype=bool)
    has[terminals] = True
    # push terminal membership up the tree, deepest nodes first
    for v in order[::-1]:
        p = pred[v]
        if p >= 0 and has[v]:
            has[p] = True
    child = order[1:]
    child = child[has[child]]
    if len(child) == 0:
        return -math.inf
    w = np.asarray(tree[child, pred[child]]).ravel()
    w2 = np.asarray(tree[pred[child], child]).ravel()
    return float(np.maximum(w, w2).max())


def _mst(g: WeightedGraph, w: np.ndarray) -> csr_matrix:
    n = g.n_nodes
    return minimum_spanning_tree(csr_matrix((w, (g.u, g.v)), shape=(n, n))).tocsr()


def llc_constants_at(graph: QhGraph, x, radii) -> list[tuple[float, float]]:
    """(c1, c2) for balls B(x, r): connectivity inside B(x, c1 r) and outside B(x, r/c2).

    Minimax paths lie on minimum spanning trees, so for each radius the
    required inflation is the largest tree edge spanning the relevant nodes.
    """
    x = np.asarray(x, dtype=float)
    f = np.hypot(*(graph.coords - x).T)
    seg = segment_distance(x[None, :], graph.coords[graph.u], graph.coords[graph.v])
    big = float(f.max()) + 1.0
    t_in = _mst(graph, np.maximum(f[graph.u], f[graph.v]) + 1.0)
    t_out = _mst(graph, big - seg + 1.0)
    out = []
    for r in radii:
        inside = np.flatnonzero(f <= r)
        outside = np.flatnonzero(f >= r)
        c1 = c2 = 1.0
        if len(inside) > 1:
            root = int(inside[np.argmin(f[inside])])
            c1 = max(1.0, (_steiner_max(t_in, root, inside) - 1.0) / r)
        if len(outside) > 1:
            root = int(outside[np.argmax(f[outside])])
            reach = big - (_steiner_max(t_out, root, outside) - 1.0)
            c2 = max(1.0, r / reach) if reach > 0 else math.inf
        out.append((c1, c2))
    return out


def llc_check(domain: Domain, graph: QhGraph, n_centers: int = 10, radii_per_center: int = 3,
              seed: int = 0) -> tuple[ConstantReport, ConstantReport]:
    """Sampled LLC₁ and LLC₂ constants (lower bounds).

    Centers are seeded interior points; radii are log-uniform between four
    local cell sizes and the domain diameter.
    """
    if n_centers < 1 or radii_per_center < 1:
        raise InvalidParameterError("sample counts must be at least 1")
    rng = np.random.default_rng(seed)
    centers = sample_interior_points(domain, n_centers, seed)
    idx, _ = graph.nearest(centers)
    best1, best2 = (1.0, None), (1.0, None)
    for x, ni in zip(centers, idx):
        lo = 4 * graph.size[ni]
        radii = np.exp(rng.uniform(math.log(lo), math.log(domain.diameter), radii_per_center))
        for r, (c1, c2) in zip(radii, llc_constants_at(graph, x, radii)):
            if c1 > best1[0] or best1[1] is None:
                best1 = (c1, (_pt(x), float(r)))
            if c2 > best2[0] or best2[1] is None:
                best2 = (c2, (_pt(x), float(r)))
    n = n_centers * radii_per_center
    h = graph.params.hash
    return (ConstantReport(float(best1[0]), best1[1], n, h, LOWER),
            ConstantReport(float(best2[0]), best2[1], n, h, LOWER))


def annulus_lambda(graph: QhGraph, x, r_in: float, r_out: float, a: int, b: int,
                   lam_max: float = 64.0, iters: int = 24) -> float:
    """Smallest λ such that nodes a, b join in B(x, λ r_out) \\ B(x, r_in/λ) within length λ|a-b|."""
    eg = graph.euclidean
    x = np.asarray(x, dtype=float)
    f = np.hypot(*(eg.coords - x).T)
    seg = segment_distance(x[None, :], eg.coords[eg.u], eg.coords[eg.v])
    far = np.maximum(f[eg.u], f[eg.v])
    direct = float(np.hypot(*(eg.coords[a] - eg.coords[b])))
    n = eg.n_nodes

    def ok(lam: float) -> bool:
        keep = (far <= lam * r_out) & (seg >= r_in / lam)
        m = csr_matrix((eg.w[keep], (eg.u[keep], eg.v[keep])), shape=(n, n))
        d = dijkstra(m, directed=False, indices=a, limit=lam * direct * (1 + 1e-12))[b]
        return bool(d <= lam * direct)

    if not ok(lam_max):
        return math.inf
    lo, hi = 1.0, lam_max
    if ok(lo):
        return 1.0
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def annular_quasiconvexity(domain: Domain, samples: int = 10, seed: int = 0,
                           graph: QhGraph | None = None, interior_only: bool = False,
                           pairs_per_annulus: int = 2) -> ConstantReport:
    """Sampled annular quasiconvexity constant (lower bound).

    Each sample draws a center, radii r' < r and node pairs in the annulus:
    the node farthest from a random annulus node, and one random partner.
    With ``interior_only`` the outer radius stays below d_D(center)/2.
    """
    from .graph import build_graph

    if samples < 1:
        raise InvalidParameterError("samples must be at least 1")
    graph = build_graph(domain) if graph is None else graph
    rng = np.random.default_rng(seed)
    centers = sample_interior_points(domain, 4 * samples, seed)
    best, wit, done = 1.0, None, 0
    for x in centers:
        if done >= samples:
            break
        ni, _ = graph.nearest([x])
        cell = float(graph.size[ni[0]])
        hi = domain.distance(x[None])[0] / 2 if interior_only else domain.diameter / 2
        if hi < 8 * cell:
            continue
        r_out = float(np.exp(rng.uniform(math.log(8 * cell), math.log(hi))))
        r_in = float(r_out * rng.uniform(0.3, 0.8))
        f = np.hypot(*(graph.coords - x).T)
        ring = np.flatnonzero((f >= r_in) & (f <= r_out))
        if len(ring) < 2:
            continue
        done += 1
        for _ in range(pairs_per_annulus):
            a = int(ring[rng.integers(len(ring))])
            far = int(ring[np.argmax(np.hypot(*(graph.coords[ring] - graph.coords[a]).T))])
            for b in (far, int(ring[rng.integers(len(ring))])):
                if a == b:
                    continue
                lam = annulus_lambda(graph, x, r_in, r_out, a, b)
                if lam > best or wit is None:
                    best, wit = lam, (_pt(x), r_in, r_out, _pt(graph.coords[a]), _pt(graph.coords[b]))
    return ConstantReport(float(best), wit, done, graph.params.hash, LOWER)


def solid_arc_shape(domain: Domain, curve, max_points: int = 2000) -> ConstantReport:
    """sup diam(γ[endpoint, u]) / d_D(u) for u between each endpoint and x_0.

    x_0 is the first sample of maximal d_D. Running diameters use at most
    ``max_points`` samples per half.
    """
    c = _path(curve)
    if len(c) == 1 or c.length == 0:
        return ConstantReport(0.0, (), 1, "", TWO_SIDED)
    s, pts, d = arclength_samples(domain, c)
    top = int(np.argmax(d))
    best, wit = 0.0, (_pt(pts[0]), _pt(pts[0]))
    for half in (np.arange(0, top + 1), np.arange(len(s) - 1, top - 1, -1)):
        if len(half) < 2:
            continue
        if len(half) > max_points:
            half = half[np.unique(np.linspace(0, len(half) - 1, max_points).round().astype(int))]
        p = pts[half]
        diam = _running_diameter(p)
        r = diam / d[half]
        q = int(np.argmax(r))
        if r[q] > best:
            best, wit = float(r[q]), (_pt(p[0]), _pt(p[q]))
    return ConstantReport(best, wit, len(s), "", TWO_SIDED)


def _running_diameter(p: np.ndarray) -> np.ndarray:
    n = len(p)
    far = np.zeros(n)
    step = max(1, 4_000_000 // n)
    for a in range(0, n, step):
        blk = p[a:a + step]
        dd = np.hypot(blk[:, None, 0] - p[None, :, 0], blk[:, None, 1] - p[None, :, 1])
        cols = np.arange(n)[None, :]
        rows = np.arange(a, a + len(blk))[:, None]
        far[a:a + len(blk)] = np.where(cols <= rows, dd, 0.0).max(axis=1)
    return np.maximum.accumulate(far)
