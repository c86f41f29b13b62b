"""Quasihyperbolic distances, geodesics, lengths, coarse lengths and solidness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCurveError, InvalidParameterError
from .geometry import (
    DEFAULT_RTOL,
    Density,
    Domain,
    Polyline,
    as_points,
    as_xy,
    integrate_segments,
    line_integral,
)
from .graph import QhGraph, WeightedGraph

MAX_CURVE_SAMPLES = 64
SUBARC_SAMPLES = 20


def lower_bounds(x, y, dx: float, dy: float) -> tuple[float, float]:
    """Closed-form lower bounds ``ln(1 + |x-y|/min d)`` and ``|ln(dx/dy)|`` for k."""
    dist = float(np.hypot(*(as_xy(x) - as_xy(y))))
    return math.log1p(dist / min(dx, dy)), abs(math.log(dx / dy))


def length_space_upper_bound(x, y, dx: float) -> float:
    """``|x-y| / (d(x) - |x-y|)``, valid when ``|x-y| < d(x)``; ``inf`` otherwise."""
    dist = float(np.hypot(*(as_xy(x) - as_xy(y))))
    return dist / (dx - dist) if dist < dx else math.inf


@dataclass(frozen=True)
class QhQuery:
    value: float
    snap: tuple[float, float]
    flagged: bool


@dataclass(frozen=True)
class Geodesic:
    """Shortest graph path. ``cumulative[i]`` is the k-length from the start to node i."""

    path: Polyline
    k_length: float
    endpoints: tuple[int, int]
    nodes: np.ndarray
    cumulative: np.ndarray
    graph: WeightedGraph = field(repr=False, compare=False)
    snap: tuple[float, float] = (0.0, 0.0)
    flagged: bool = False

    @property
    def points(self) -> np.ndarray:
        return self.path.vertices

    def k_between(self, i: int, j: int) -> float:
        """k-distance between path nodes ``i`` and ``j`` (exact: subpaths are geodesics)."""
        return abs(float(self.cumulative[j] - self.cumulative[i]))

    def kmatrix(self, idx=None) -> np.ndarray:
        c = self.cumulative if idx is None else self.cumulative[np.asarray(idx)]
        return np.abs(c[:, None] - c[None, :])

    def reversed(self) -> "Geodesic":
        return Geodesic(self.path.reversed(), self.k_length, self.endpoints[::-1],
                        self.nodes[::-1].copy(), self.k_length - self.cumulative[::-1],
                        self.graph, self.snap[::-1], self.flagged)


def _canonical(x: np.ndarray, y: np.ndarray) -> bool:
    return (x[0], x[1]) <= (y[0], y[1])


def _attached_pair(graph: QhGraph, x, y):
    x, y = as_xy(x), as_xy(y)
    swap = not _canonical(x, y)
    a, b = (y, x) if swap else (x, y)
    att = graph.attach([a, b])
    i, j = att.indices
    snap = (float(att.snap[0]), float(att.snap[1]))
    return att.graph, int(i), int(j), swap, snap[::-1] if swap else snap, bool(att.flagged.any())


def qh_query(graph: QhGraph, x, y) -> QhQuery:
    """k(x, y) on the graph extended by x and y, with snap diagnostics.

    The computation always runs from the lexicographically smaller point, so
    the result is exactly symmetric.
    """
    g, i, j, _, snap, flagged = _attached_pair(graph, x, y)
    value = 0.0 if i == j else g.distance(i, j)
    return QhQuery(value, snap, flagged)


def qh_distance(graph: QhGraph, x, y) -> float:
    return qh_query(graph, x, y).value


def _geodesic_on(g: WeightedGraph, i: int, j: int, snap=(0.0, 0.0), flagged=False) -> Geodesic:
    if i == j:
        nodes = np.array([i], dtype=np.int64)
    else:
        nodes = g.trace_path(g.distances(i), j)
    w = g.edge_weights_along(nodes)
    cum = np.concatenate([[0.0], np.cumsum(w)])
    return Geodesic(Polyline(g.coords[nodes]), float(cum[-1]), (int(i), int(j)), nodes, cum,
                    g, snap, flagged)


def qh_geodesic(graph: QhGraph, x, y) -> Geodesic:
    """Shortest graph path from x to y with deterministic tie-breaking."""
    g, i, j, swap, snap, flagged = _attached_pair(graph, x, y)
    geo = _geodesic_on(g, i, j, snap[::-1] if swap else snap, flagged)
    return geo.reversed() if swap else geo


def node_geodesic(graph: WeightedGraph, i: int, j: int, dist: np.ndarray | None = None) -> Geodesic:
    """Geodesic between two existing nodes; ``dist`` may carry distances from ``i``."""
    if i == j:
        return _geodesic_on(graph, i, j)
    dist = graph.distances(i) if dist is None else dist
    nodes = graph.trace_path(dist, j)
    w = graph.edge_weights_along(nodes)
    cum = np.concatenate([[0.0], np.cumsum(w)])
    return Geodesic(Polyline(graph.coords[nodes]), float(cum[-1]), (int(i), int(j)), nodes,
                    cum, graph)


def qh_length(domain: Domain, curve: Polyline, rtol: float = DEFAULT_RTOL) -> float:
    """Quasihyperbolic length: the integral of ``1/d`` along the curve."""
    return line_integral(domain, curve, Density.quasihyperbolic(domain), rtol=rtol)


def cumulative_qh_length(domain: Domain, curve: Polyline, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """k-length from the start of ``curve`` to each of its vertices."""
    v = curve.vertices
    if len(v) == 1:
        return np.zeros(1)
    vals = integrate_segments(v[:-1], v[1:], lambda p, o: domain.distance(p),
                              lambda p, d: 1.0 / d, rtol=rtol)
    return np.concatenate([[0.0], np.cumsum(vals)])


def sample_node_pairs(graph: QhGraph, n: int, seed: int) -> np.ndarray:
    """``n`` seeded node pairs, with endpoints drawn area-uniformly over the domain."""
    pts = sample_interior_points(graph.domain, 2 * n, seed)
    idx, _ = graph.nearest(pts)
    return idx.reshape(n, 2)


def sample_interior_points(domain: Domain, n: int, seed: int) -> np.ndarray:
    """``n`` seeded area-uniform interior points (rejection sampling on the bbox)."""
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = domain.bbox
    out = []
    count = 0
    while count < n:
        p = rng.uniform((xmin, ymin), (xmax, ymax), size=(max(64, 2 * (n - count)), 2))
        p = p[domain.interior_mask(p)]
        out.append(p)
        count += len(p)
    return np.concatenate(out)[:n]


def kmatrix(graph: WeightedGraph, nodes) -> np.ndarray:
    """Graph distances between the given nodes (rows by multi-source search)."""
    nodes = np.asarray(nodes, dtype=np.int64)
    uniq, inv = np.unique(nodes, return_inverse=True)
    rows = np.atleast_2d(graph.distances(uniq))[:, uniq]
    m = rows[inv][:, inv]
    m = np.minimum(m, m.T)
    np.fill_diagonal(m, 0.0)
    return m


def _curve_samples(curve: Polyline, count: int) -> tuple[np.ndarray, np.ndarray]:
    if len(curve) <= count:
        return curve.cumulative.copy(), curve.vertices.copy()
    s = np.linspace(0.0, curve.length, count)
    return s, curve.point_at(s)


def curve_kmatrix(graph: QhGraph, curve, max_samples: int = MAX_CURVE_SAMPLES):
    """(arclength positions, points, k-matrix) for samples along a curve.

    Geodesics use their own nodes and the telescoped k-lengths, which are
    exact graph distances. Other curves are sampled at up to ``max_samples``
    arclength-uniform points, which are attached to the graph.
    """
    if isinstance(curve, Geodesic):
        n = len(curve.nodes)
        idx = np.arange(n) if n <= 4 * max_samples else np.unique(
            np.linspace(0, n - 1, 4 * max_samples).round().astype(int))
        return curve.path.cumulative[idx], curve.points[idx], curve.kmatrix(idx)
    s, pts = _curve_samples(curve, max_samples)
    att = graph.attach(pts)
    return s, pts, kmatrix(att.graph, att.indices)


def greedy_walks(K: np.ndarray, h: float) -> np.ndarray:
    """``W[s, j]``: sum of the greedy h-coarse walk started at sample s, truncated at j.

    From the last emitted sample the walk emits the next sample whose
    k-distance to it is at least ``h``. Entries with ``j < s`` are zero.
    """
    n = len(K)
    last = np.arange(n)
    tot = np.zeros(n)
    W = np.zeros((n, n))
    for j in range(n):
        gap = K[last, j]
        step = (j > last) & (gap >= h)
        tot[step] += gap[step]
        last[step] = j
        W[:, j] = tot
    return W


def subarc_coarse_lengths(K: np.ndarray, h: float) -> np.ndarray:
    """``C[i, j]`` (i ≤ j): best-start greedy coarse length of the subarc from i to j.

    Zero where no h-coarse pair exists in the subarc.
    """
    W = greedy_walks(K, h)
    n = len(K)
    C = np.zeros((n, n))
    # max over starts s in [i, j] of W[s, j], accumulated from i = j down to 0
    run = np.zeros(n)
    for i in range(n - 1, -1, -1):
        run = np.maximum(run, np.where(np.arange(n) >= i, W[i], 0.0))
        C[i] = np.where(np.arange(n) >= i, run, 0.0)
    return C


def coarse_qh_length(graph: QhGraph, curve, h: float) -> float:
    """Greedy best-start approximation of the h-coarse quasihyperbolic length."""
    if h < 0:
        raise InvalidParameterError("h must be nonnegative")
    if isinstance(curve, Polyline) and len(curve) == 1:
        return 0.0
    _, _, K = curve_kmatrix(graph, curve)
    C = subarc_coarse_lengths(K, h)
    return float(C[0, -1])


@dataclass(frozen=True)
class SolidnessReport:
    nu: float
    h: float
    witness: tuple[tuple[float, float], tuple[float, float]]
    samples: int


def _subarc_index(s: np.ndarray, count: int) -> np.ndarray:
    targets = np.linspace(0.0, s[-1], count)
    idx = np.searchsorted(s, targets)
    idx = np.clip(idx, 0, len(s) - 1)
    return np.unique(idx)


def solidness_from_matrix(s: np.ndarray, pts: np.ndarray, K: np.ndarray, h: float,
                          samples: int = SUBARC_SAMPLES) -> SolidnessReport:
    C = subarc_coarse_lengths(K, h)
    sub = _subarc_index(s, samples)
    best, wit = 1.0, (0, len(s) - 1)
    for a in range(len(sub)):
        for b in range(a + 1, len(sub)):
            i, j = sub[a], sub[b]
            if K[i, j] <= 0:
                continue
            r = C[i, j] / K[i, j]
            if r > best:
                best, wit = r, (i, j)
    w = (tuple(map(float, pts[wit[0]])), tuple(map(float, pts[wit[1]])))
    return SolidnessReport(float(best), float(h), w, len(sub))


def solidness(graph: QhGraph, curve, h: float, samples: int = SUBARC_SAMPLES) -> SolidnessReport:
    """Smallest ν ≥ 1 with coarse length ≤ ν·k over sampled subarcs."""
    if h < 0:
        raise InvalidParameterError("h must be nonnegative")
    path = curve.path if isinstance(curve, Geodesic) else curve
    if len(path) < 2 or np.array_equal(path.start, path.end) and path.length == 0:
        raise DegenerateCurveError("solidness needs a curve with distinct endpoints")
    s, pts, K = curve_kmatrix(graph, curve)
    return solidness_from_matrix(s, pts, K, h, samples)


@dataclass(frozen=True)
class QuasigeodesicReport:
    ok: bool
    ratio: float
    witness: tuple[tuple[float, float], tuple[float, float]]


def quasigeodesic_check(graph: QhGraph, curve, lam: float, mu: float,
                        samples: int = SUBARC_SAMPLES) -> QuasigeodesicReport:
    """Test ``ℓ_k(γ[x,y]) ≤ λ k(x,y) + μ`` over sampled subarcs.

    ``ratio`` is the largest ``ℓ_k / (λk + μ)``; the verdict is ``ratio ≤ 1``.
    """
    if lam < 1 or mu < 0:
        raise InvalidParameterError("need lambda >= 1 and mu >= 0")
    if isinstance(curve, Geodesic):
        cum = curve.cumulative
        idx = _subarc_index(curve.path.cumulative, samples)
        pts = curve.points[idx]
        lk = cum[idx]
        K = curve.kmatrix(idx)
    else:
        s = np.linspace(0.0, curve.length, samples)
        verts = np.concatenate([curve.cumulative, s])
        order = np.unique(verts)
        dense = Polyline(curve.point_at(order))
        cum = cumulative_qh_length(graph.domain, dense)
        pos = np.searchsorted(dense.cumulative, s - 1e-12 * max(curve.length, 1.0))
        pos = np.clip(pos, 0, len(dense) - 1)
        pts = dense.vertices[pos]
        lk = cum[pos]
        att = graph.attach(pts)
        K = kmatrix(att.graph, att.indices)
    worst, wit = 0.0, (0, len(pts) - 1)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            den = lam * K[i, j] + mu
            num = lk[j] - lk[i]
            r = num / den if den > 0 else (math.inf if num > 0 else 0.0)
            if r > worst:
                worst, wit = r, (i, j)
    w = (tuple(map(float, pts[wit[0]])), tuple(map(float, pts[wit[1]])))
    return QuasigeodesicReport(bool(worst <= 1.0), float(worst), w)


def as_curve(points) -> Polyline:
    return Polyline(as_points(points))
