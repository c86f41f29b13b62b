"""Adaptive sampling graphs: the discrete model of the quasihyperbolic metric."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

from .errors import DisconnectedPairError, EmptyGraphError, InvalidParameterError
from .geometry import Domain, as_points, integrate_segments

log = logging.getLogger(__name__)

# Edge weights need far less than the 1e-8 default of line integrals: the
# graph discretization error is several orders of magnitude larger.
EDGE_RTOL = 1e-6



def _symmetric_csr(n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> csr_matrix:
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    csr = csr_matrix((np.concatenate([w, w]), (rows, cols)), shape=(n, n))
    csr.sort_indices()
    return csr


@dataclass(frozen=True)
class SamplingParams:
    base_spacing: float = 1 / 64
    boundary_refinement_levels: int = 4
    edge_radius_factor: float = 2.5
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.base_spacing < 1:
            raise InvalidParameterError("base_spacing must lie in (0, 1)")
        if not 0 <= int(self.boundary_refinement_levels) <= 8:
            raise InvalidParameterError("boundary_refinement_levels must lie in [0, 8]")
        if self.edge_radius_factor < 1:
            raise InvalidParameterError("edge_radius_factor must be at least 1")
        if int(self.seed) < 0:
            raise InvalidParameterError("seed must be unsigned")

    @classmethod
    def at_resolution(cls, resolution: float, **kw) -> "SamplingParams":
        """Params whose base spacing is ``1 / resolution`` of the diameter."""
        return cls(base_spacing=1.0 / float(resolution), **kw)

    @property
    def resolution(self) -> float:
        return 1.0 / self.base_spacing

    @property
    def hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]

    def to_dict(self) -> dict:
        return asdict(self)


class WeightedGraph:
    """Undirected positively weighted graph on planar nodes.

    Edges are stored once with ``u < v``; the symmetric CSR matrix is what
    shortest-path queries run on.
    """

    def __init__(self, coords: np.ndarray, u: np.ndarray, v: np.ndarray, w: np.ndarray,
                 csr: csr_matrix | None = None):
        self.coords = np.asarray(coords, dtype=float)
        self.u = np.asarray(u, dtype=np.int64)
        self.v = np.asarray(v, dtype=np.int64)
        self.w = np.asarray(w, dtype=float)
        if csr is None:
            csr = _symmetric_csr(len(self.coords), self.u, self.v, self.w)
        self.csr = csr

    def extended(self, coords: np.ndarray, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> "WeightedGraph":
        """This graph plus new nodes and edges (``u < v``), reusing the existing CSR."""
        n, m = self.n_nodes, len(coords)
        a = self.csr
        pad = np.concatenate([a.indptr, np.full(m, a.indptr[-1], dtype=a.indptr.dtype)])
        base = csr_matrix((a.data, a.indices, pad), shape=(n + m, n + m))
        csr = base + _symmetric_csr(n + m, u, v, w)
        csr.sort_indices()
        return WeightedGraph(np.vstack([self.coords, coords]), np.concatenate([self.u, u]),
                             np.concatenate([self.v, v]), np.concatenate([self.w, w]), csr)

    @property
    def n_nodes(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return len(self.u)

    def reweighted(self, w: np.ndarray) -> "WeightedGraph":
        return WeightedGraph(self.coords, self.u, self.v, w)

    def distances(self, sources, limit: float = np.inf, min_only: bool = False) -> np.ndarray:
        """Shortest-path distances from one or several sources."""
        src = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        # the matrix is stored symmetrically, so the directed search is exact
        if min_only:
            return dijkstra(self.csr, directed=True, indices=src, limit=limit, min_only=True)
        out = dijkstra(self.csr, directed=True, indices=src, limit=limit)
        return out[0] if np.ndim(sources) == 0 else out

    def distance(self, a: int, b: int) -> float:
        if a == b:
            return 0.0
        d = float(self.distances(a)[b])
        if not math.isfinite(d):
            raise DisconnectedPairError(f"nodes {a} and {b} are not connected")
        return d

    def trace_path(self, dist: np.ndarray, target: int) -> np.ndarray:
        """Recover a shortest path ending at ``target`` from a distance field.

        At each step back toward the source the smallest-index tight
        predecessor is taken, so ties are broken deterministically.
        """
        if not math.isfinite(dist[target]):
            raise DisconnectedPairError(f"node {target} is unreachable")
        indptr, indices, data = self.csr.indptr, self.csr.indices, self.csr.data
        path = [int(target)]
        cur = int(target)
        while dist[cur] > 0:
            lo, hi = indptr[cur], indptr[cur + 1]
            nb = indices[lo:hi]
            via = dist[nb] + data[lo:hi]
            dc = dist[cur]
            tight = (via <= dc + 1e-12 * max(1.0, dc)) & (dist[nb] < dc)
            if not tight.any():
                tight = dist[nb] < dc
                cand = nb[tight]
                cur = int(cand[np.argmin(via[tight])])
            else:
                cur = int(nb[tight].min())
            path.append(cur)
        return np.array(path[::-1], dtype=np.int64)

    def predecessors(self, dist: np.ndarray) -> np.ndarray:
        """Shortest-path tree for a distance field, with the ``trace_path`` tie-break.

        Roots and unreachable nodes get ``-1``.
        """
        n = self.n_nodes
        pred = np.full(n, np.iinfo(np.int64).max)
        src = np.concatenate([self.u, self.v])
        dst = np.concatenate([self.v, self.u])
        w = np.concatenate([self.w, self.w])
        dd = dist[dst]
        tight = (dist[src] + w <= dd + 1e-12 * np.maximum(1.0, dd)) & (dist[src] < dd)
        np.minimum.at(pred, dst[tight], src[tight])
        pred[pred == np.iinfo(np.int64).max] = -1
        return pred

    def shortest_path(self, a: int, b: int) -> tuple[np.ndarray, float]:
        dist = self.distances(a)
        path = self.trace_path(dist, b)
        return path, float(dist[b])

    def edge_weights_along(self, path: np.ndarray) -> np.ndarray:
        if len(path) < 2:
            return np.zeros(0)
        return np.asarray(self.csr[path[:-1], path[1:]]).ravel()

    def subgraph_components(self, mask: np.ndarray) -> np.ndarray:
        """Component labels of the node-induced subgraph (``-1`` off the mask)."""
        keep = self.csr[mask][:, mask]
        _, lab = connected_components(keep, directed=False)
        out = np.full(self.n_nodes, -1, dtype=np.int64)
        out[np.flatnonzero(mask)] = lab
        return out


class QhGraph(WeightedGraph):
    """Sampling graph of a domain with quasihyperbolic edge weights.

    Node attributes: ``d`` (boundary distance), ``size`` (local cell size)
    and ``level`` (refinement level of the finest incident cell).
    """

    def __init__(self, domain: Domain, params: SamplingParams, coords, d, size, level,
                 u, v, w, disconnected: bool = False, rtol: float = EDGE_RTOL):
        super().__init__(coords, u, v, w)
        self.domain = domain
        self.params = params
        self.d = np.asarray(d, dtype=float)
        self.size = np.asarray(size, dtype=float)
        self.level = np.asarray(level, dtype=np.int64)
        self.disconnected = bool(disconnected)
        self.rtol = rtol
        self._tree = cKDTree(self.coords)
        self._euclid = None

    @property
    def h0(self) -> float:
        return self.params.base_spacing * self.domain.diameter

    def level_scale(self, level: int) -> float:
        return self.h0 / 2 ** level

    @property
    def euclidean(self) -> WeightedGraph:
        """Same topology with Euclidean edge lengths (inner-distance proxy)."""
        if self._euclid is None:
            lengths = np.hypot(*(self.coords[self.v] - self.coords[self.u]).T)
            self._euclid = self.reweighted(lengths)
        return self._euclid

    def nearest(self, points) -> tuple[np.ndarray, np.ndarray]:
        dd, idx = self._tree.query(as_points(points))
        return np.atleast_1d(idx), np.atleast_1d(dd)

    def node_at(self, p, tol: float | None = None) -> int | None:
        tol = 1e-9 * self.domain.diameter if tol is None else tol
        idx, dd = self.nearest([p])
        return int(idx[0]) if dd[0] <= tol else None

    def attach(self, points, metric: str = "qh") -> "Attachment":
        """Graph extended by extra interior points wired to nearby nodes.

        Points coinciding with an existing node reuse it. New points connect
        to every node (and to each other) within ``edge_radius_factor`` times
        the local cell size of their nearest node, through segments that stay
        in the domain.
        """
        return Attachment(self, as_points(points), metric)

    def query_nodes(self, points, metric: str = "qh") -> tuple[WeightedGraph, np.ndarray, np.ndarray]:
        """(graph, node indices, snap distances) for arbitrary interior points."""
        att = self.attach(points, metric)
        return att.graph, att.indices, att.snap

    def save(self, path) -> None:
        np.savez_compressed(
            path, coords=self.coords, d=self.d, size=self.size, level=self.level,
            u=self.u, v=self.v, w=self.w,
            meta=np.array(json.dumps({"domain": self.domain.content_hash,
                                      "params": self.params.to_dict(),
                                      "disconnected": self.disconnected,
                                      "rtol": self.rtol})))

    @classmethod
    def load(cls, path, domain: Domain) -> "QhGraph":
        z = np.load(path, allow_pickle=False)
        meta = json.loads(str(z["meta"]))
        if meta["domain"] != domain.content_hash:
            raise ValueError("cached graph belongs to another domain")
        return cls(domain, SamplingParams(**meta["params"]), z["coords"], z["d"], z["size"],
                   z["level"], z["u"], z["v"], z["w"], meta["disconnected"], meta["rtol"])

    def __repr__(self):
        return (f"QhGraph({self.domain.name!r}, nodes={self.n_nodes}, edges={self.n_edges}, "
                f"resolution={self.params.resolution:g})")


class Attachment:
    """A QhGraph augmented with query points (see :meth:`QhGraph.attach`)."""

    def __init__(self, base: QhGraph, points: np.ndarray, metric: str):
        domain = base.domain
        n0 = base.n_nodes
        near, snap = base.nearest(points)
        tol = 1e-9 * domain.diameter
        indices = np.empty(len(points), dtype=np.int64)
        new_pts, new_of = [], {}
        for i, (p, j, s) in enumerate(zip(points, near, snap)):
            if s <= tol:
                indices[i] = j
                continue
            key = (float(p[0]), float(p[1]))
            if key not in new_of:
                domain.require_interior(p)
                new_of[key] = n0 + len(new_pts)
                new_pts.append(p)
            indices[i] = new_of[key]
        self.base = base
        self.indices = indices
        self.snap = snap
        self.flagged = snap > base.size[near]
        if not new_pts:
            self.graph = base if metric == "qh" else base.euclidean
            return
        new_pts = np.array(new_pts)
        m = len(new_pts)
        radius = base.params.edge_radius_factor * base.size[base.nearest(new_pts)[0]]
        eu, ev = [], []
        for k, (p, r) in enumerate(zip(new_pts, radius)):
            nb = base._tree.query_ball_point(p, r * (1 + 1e-9))
            eu.extend([n0 + k] * len(nb))
            ev.extend(nb)
            for k2 in range(k):
                if np.hypot(*(new_pts[k2] - p)) <= max(r, radius[k2]):
                    eu.append(n0 + k)
                    ev.append(n0 + k2)
        eu = np.array(eu, dtype=np.int64)
        ev = np.array(ev, dtype=np.int64)
        coords = np.vstack([base.coords, new_pts])
        dnew = domain.distance(new_pts)
        dall = np.concatenate([base.d, dnew])
        ok = domain.segments_inside(coords[eu], coords[ev], dall[eu], dall[ev])
        eu, ev = eu[ok], ev[ok]
        lonely = set(range(n0, n0 + m)) - set(eu.tolist()) - set(ev.tolist())
        if lonely:
            raise DisconnectedPairError("query point could not be wired into the graph")
        if metric == "qh":
            w = integrate_segments(coords[eu], coords[ev], lambda pts, o: domain.distance(pts),
                                   _inv, da=dall[eu], db=dall[ev], rtol=base.rtol)
        else:
            w = np.hypot(*(coords[ev] - coords[eu]).T)
        lo = np.minimum(eu, ev)
        hi = np.maximum(eu, ev)
        start = base if metric == "qh" else base.euclidean
        self.graph = start.extended(new_pts, lo, hi, w)
        self.graph.d = dall


def _inv(pts, d):
    return 1.0 / d


def _quadtree_leaves(domain: Domain, h0: float, levels: int):
    """Leaves ``(level, i, j)`` of the boundary-refined quadtree on the bounding box."""
    xmin, ymin, xmax, ymax = domain.bbox
    nx = max(1, math.ceil((xmax - xmin) / h0 - 1e-9))
    ny = max(1, math.ceil((ymax - ymin) / h0 - 1e-9))
    ci, cj = (a.ravel() for a in np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij"))
    leaves = []
    for lvl in range(levels + 1):
        s = h0 / 2 ** lvl
        centers = np.column_stack([xmin + (ci + 0.5) * s, ymin + (cj + 0.5) * s])
        d = domain.distance(centers)
        inside = domain.interior_mask(centers, d)
        relevant = inside | (d < s * math.sqrt(0.5))
        ci, cj, d = ci[relevant], cj[relevant], d[relevant]
        refine = (s > d / 4) & (lvl < levels)
        leaves.append((lvl, ci[~refine], cj[~refine]))
        ci, cj = ci[refine], cj[refine]
        if len(ci) == 0:
            break
        ci = np.concatenate([2 * ci, 2 * ci + 1, 2 * ci, 2 * ci + 1])
        cj = np.concatenate([2 * cj, 2 * cj, 2 * cj + 1, 2 * cj + 1])
    return leaves


def _edge_dist(domain: Domain, coords, d, eu, ev):
    """Exact boundary distance for points on edges, via per-edge candidate sets.

    For p on edge [a, b] with d(a) <= d(b), the nearest boundary point of p
    is within d(a) + 2|a - b| of a.
    """
    a = np.where(d[eu] <= d[ev], eu, ev)
    ell = np.hypot(*(coords[eu] - coords[ev]).T)
    sets = domain.index.ball_sets(coords[a], d[a] + 2 * ell * (1 + 1e-9))
    return sets.distance


def build_graph(domain: Domain, params: SamplingParams | None = None,
                rtol: float = EDGE_RTOL, cache_dir=None) -> QhGraph:
    """Sample ``domain`` adaptively and weight edges by quasihyperbolic length.

    Cells start at ``base_spacing * diameter`` and are split while larger than
    a quarter of the boundary distance at their center, at most
    ``boundary_refinement_levels`` times. Nodes are the interior corners of
    the leaf cells, so the node set at one resolution is contained in the node
    set at twice that resolution.
    """
    params = params or SamplingParams()
    if cache_dir is not None:
        path = Path(cache_dir) / f"{domain.content_hash}_{params.hash}.npz"
        if path.exists():
            return QhGraph.load(path, domain)

    h0 = params.base_spacing * domain.diameter
    levels = int(params.boundary_refinement_levels)
    leaves = _quadtree_leaves(domain, h0, levels)
    keys, sizes, lvls = [], [], []
    for lvl, ci, cj in leaves:
        sc = 1 << (levels - lvl)
        for di in (0, 1):
            for dj in (0, 1):
                keys.append(np.column_stack([(ci + di) * sc, (cj + dj) * sc]))
                sizes.append(np.full(len(ci), h0 / 2 ** lvl))
                lvls.append(np.full(len(ci), lvl))
    keys = np.concatenate(keys)
    sizes = np.concatenate(sizes)
    lvls = np.concatenate(lvls)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    size = np.full(len(uniq), np.inf)
    np.minimum.at(size, inv, sizes)
    level = np.zeros(len(uniq), dtype=np.int64)
    np.maximum.at(level, inv, lvls)
    xmin, ymin = domain.bbox[:2]
    fine = h0 / 2 ** levels
    coords = np.column_stack([xmin + uniq[:, 0] * fine, ymin + uniq[:, 1] * fine])
    d = domain.distance(coords)
    keep = domain.interior_mask(coords, d) & (d > 1e-3 * size)
    coords, d, size, level = coords[keep], d[keep], size[keep], level[keep]
    if len(coords) < 2:
        raise EmptyGraphError(f"{domain.name}: no interior samples at base_spacing "
                              f"{params.base_spacing:g}")

    tree = cKDTree(coords)
    factor = params.edge_radius_factor
    eu, ev = [], []
    for lvl in np.unique(level):
        sel = np.flatnonzero(level == lvl)
        r = factor * h0 / 2 ** lvl * (1 + 1e-9)
        pairs = cKDTree(coords[sel]).sparse_distance_matrix(tree, r, output_type="ndarray")
        a = sel[pairs["i"]]
        b = pairs["j"]
        ok = (level[b] > lvl) | ((level[b] == lvl) & (a < b))
        eu.append(a[ok])
        ev.append(b[ok])
    eu = np.concatenate(eu)
    ev = np.concatenate(ev)
    lo, hi = np.minimum(eu, ev), np.maximum(eu, ev)
    order = np.lexsort((hi, lo))
    eu, ev = lo[order], hi[order]
    inside = domain.segments_inside(coords[eu], coords[ev], d[eu], d[ev])
    eu, ev = eu[inside], ev[inside]
    if len(eu) == 0:
        raise EmptyGraphError(f"{domain.name}: sampling produced no admissible edges")

    dist = _edge_dist(domain, coords, d, eu, ev)
    w = integrate_segments(coords[eu], coords[ev], dist, _inv, da=d[eu], db=d[ev], rtol=rtol)

    n = len(coords)
    adj = csr_matrix((np.ones(len(eu)), (eu, ev)), shape=(n, n))
    ncomp, lab = connected_components(adj, directed=False)
    disconnected = ncomp > 1
    if disconnected:
        big = np.argmax(np.bincount(lab))
        log.warning("%s: sampling graph has %d components; keeping the largest",
                    domain.name, ncomp)
        keep = lab == big
        remap = np.full(n, -1, dtype=np.int64)
        remap[keep] = np.arange(keep.sum())
        ek = keep[eu] & keep[ev]
        eu, ev, w = remap[eu[ek]], remap[ev[ek]], w[ek]
        coords, d, size, level = coords[keep], d[keep], size[keep], level[keep]

    graph = QhGraph(domain, params, coords, d, size, level, eu, ev, w, disconnected, rtol)
    if cache_dir is not None:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        graph.save(path)
    return graph
