"""Planar polygonal domains, curves, boundary distance and line integrals."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import shapely
from scipy.spatial import cKDTree

from .errors import (
    ContainmentError,
    InvalidDomainError,
    NonFiniteDensityError,
    PointOutsideDomainError,
)

DEFAULT_RTOL = 1e-8
SPLIT_FACTOR = 0.25
_CHUNK = 40_000


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __iter__(self):
        yield self.x
        yield self.y

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


def as_xy(p) -> np.ndarray:
    """Coerce a Point or an (x, y) pair to a length-2 float array."""
    a = np.asarray(tuple(p) if isinstance(p, Point) else p, dtype=float).reshape(2)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite point {p!r}")
    return a


def as_points(pts) -> np.ndarray:
    a = np.asarray([tuple(p) if isinstance(p, Point) else p for p in pts]
                   if not isinstance(pts, np.ndarray) else pts, dtype=float)
    return a.reshape(-1, 2)


def segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from points ``p`` to segments ``[a, b]`` (broadcasting over leading axes)."""
    abx = b[..., 0] - a[..., 0]
    aby = b[..., 1] - a[..., 1]
    apx = p[..., 0] - a[..., 0]
    apy = p[..., 1] - a[..., 1]
    den = abx * abx + aby * aby
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(den > 0, (apx * abx + apy * aby) / np.where(den > 0, den, 1.0), 0.0)
    np.clip(t, 0.0, 1.0, out=t)
    return np.hypot(apx - t * abx, apy - t * aby)


class BoundaryIndex:
    """Exact distance to a fixed set of segments.

    Segments are cut into pieces no longer than perimeter/512 and indexed by
    piece midpoint. A k-nearest query is exact for a point whenever the best
    candidate distance is at most ``r_k - max_half_piece``: every piece outside
    the candidate set is then provably no closer. Points failing the
    certificate at k=8 and k=32 fall back to GEOS.
    """

    def __init__(self, segments: np.ndarray, pieces: int = 512):
        segments = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
        self.segments = segments
        a, b = segments[:, 0], segments[:, 1]
        lengths = np.hypot(*(b - a).T)
        target = max(lengths.sum() / pieces, 1e-300)
        counts = np.maximum(1, np.ceil(lengths / target - 1e-9)).astype(int)
        rep = np.repeat(np.arange(len(a)), counts)
        off = np.concatenate([np.arange(c) for c in counts]).astype(float)
        cnt = counts[rep].astype(float)
        d = (b - a)[rep]
        self._pa = a[rep] + (off / cnt)[:, None] * d
        self._pb = a[rep] + ((off + 1) / cnt)[:, None] * d
        self._half = float(np.hypot(*(self._pb - self._pa).T).max()) / 2
        self._tree = cKDTree((self._pa + self._pb) / 2)
        self._geom = shapely.multilinestrings(list(segments))
        shapely.prepare(self._geom)

    @property
    def n_pieces(self) -> int:
        return len(self._pa)

    def candidates(self, points: np.ndarray, k: int = 8) -> tuple[np.ndarray, np.ndarray]:
        """Nearest ``k`` pieces and the radius within which they are exhaustive."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        k = min(k, self.n_pieces)
        dm, idx = self._tree.query(points, k=k)
        dm = dm.reshape(len(points), k)
        idx = idx.reshape(len(points), k)
        if k == self.n_pieces:
            reach = np.full(len(points), np.inf)
        else:
            reach = dm[:, -1] - self._half
        return idx, reach

    def candidate_distance(self, points: np.ndarray, idx: np.ndarray) -> np.ndarray:
        return segment_distance(points[:, None, :], self._pa[idx], self._pb[idx]).min(axis=1)

    def ball_sets(self, centers: np.ndarray, radii: np.ndarray) -> "CandidateSets":
        """Pieces whose midpoint lies within ``radii + half_piece`` of each center.

        Any point whose nearest boundary point is within ``radii`` of its
        center gets an exact distance from its set alone.
        """
        centers = np.asarray(centers, dtype=float).reshape(-1, 2)
        r = np.asarray(radii, dtype=float) + self._half * (1 + 1e-9) + 1e-300
        lists = self._tree.query_ball_point(centers, r)
        return CandidateSets(self, lists)

    def distance(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(points) > _CHUNK:
            return np.concatenate([self.distance(points[i:i + _CHUNK])
                                   for i in range(0, len(points), _CHUNK)])
        out = np.empty(len(points))
        todo = np.arange(len(points))
        for k in (8, 32):
            if len(todo) == 0:
                break
            idx, reach = self.candidates(points[todo], k)
            dd = self.candidate_distance(points[todo], idx)
            ok = dd <= reach
            out[todo[ok]] = dd[ok]
            todo = todo[~ok]
        if len(todo):
            out[todo] = shapely.distance(self._geom, shapely.points(points[todo]))
        return out


class CandidateSets:
    """Per-owner candidate piece lists, bucketed by size for vectorized evaluation."""

    _BLOCK = 2_000_000

    def __init__(self, index: BoundaryIndex, lists):
        self.index = index
        counts = np.fromiter((len(x) for x in lists), dtype=np.int64, count=len(lists))
        if len(counts) and counts.min() == 0:
            raise ValueError("empty candidate set")
        width = 1 << np.ceil(np.log2(np.maximum(counts, 1))).astype(np.int64)
        self.bucket = np.zeros(len(lists), dtype=np.int64)
        self.row = np.zeros(len(lists), dtype=np.int64)
        self.tables = []
        for bi, w in enumerate(np.unique(width)):
            sel = np.flatnonzero(width == w)
            table = np.empty((len(sel), int(w)), dtype=np.int64)
            for r, o in enumerate(sel):
                lst = lists[o]
                table[r, :len(lst)] = lst
                table[r, len(lst):] = lst[0]
            self.bucket[sel] = bi
            self.row[sel] = np.arange(len(sel))
            self.tables.append(table)

    def distance(self, points: np.ndarray, owner: np.ndarray) -> np.ndarray:
        out = np.empty(len(points))
        b = self.bucket[owner]
        for bi, table in enumerate(self.tables):
            sel = np.flatnonzero(b == bi)
            step = max(1, self._BLOCK // table.shape[1])
            for s in range(0, len(sel), step):
                ii = sel[s:s + step]
                out[ii] = self.index.candidate_distance(points[ii], table[self.row[owner[ii]]])
        return out


def _closed_loop(vertices, what: str) -> np.ndarray:
    v = as_points(vertices)
    if len(v) > 1 and np.allclose(v[0], v[-1], rtol=0, atol=0):
        v = v[:-1]
    if len(v) < 3:
        raise InvalidDomainError(f"{what} needs at least 3 distinct vertices")
    if not np.all(np.isfinite(v)):
        raise InvalidDomainError(f"{what} has non-finite coordinates")
    return v


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _loop_segments(v: np.ndarray) -> np.ndarray:
    return np.stack([v, np.roll(v, -1, axis=0)], axis=1)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class Domain:
    """A bounded planar region: outer polygon minus holes and slits.

    The outer loop is stored counterclockwise and holes clockwise; input in the
    other orientation is reversed. Slits are open polygonal chains of zero
    thickness; points on them are not interior.
    """

    def __init__(self, outer, holes: Iterable = (), slits: Iterable = (), name: str = "domain"):
        outer = _closed_loop(outer, "outer boundary")
        if _signed_area(outer) < 0:
            outer = outer[::-1]
        hs = []
        for i, h in enumerate(holes):
            h = _closed_loop(h, f"hole {i}")
            if _signed_area(h) > 0:
                h = h[::-1]
            hs.append(h)
        ss = []
        for i, s in enumerate(slits):
            s = as_points(s)
            if len(s) < 2 or not np.all(np.isfinite(s)):
                raise InvalidDomainError(f"slit {i} needs at least 2 finite vertices")
            if np.any(np.all(np.diff(s, axis=0) == 0, axis=1)):
                raise InvalidDomainError(f"slit {i} has repeated consecutive vertices")
            ss.append(s)
        self.outer = _readonly(outer)
        self.holes = tuple(_readonly(h) for h in hs)
        self.slits = tuple(_readonly(s) for s in ss)
        self.name = str(name)
        self.tags: dict[str, str] = {}
        self._validate()

    def _validate(self):
        ring = shapely.LinearRing(self.outer)
        if not ring.is_simple:
            raise InvalidDomainError("outer boundary is self-intersecting")
        shell = shapely.Polygon(self.outer)
        for i, h in enumerate(self.holes):
            hp = shapely.Polygon(h)
            if not shapely.LinearRing(h).is_simple:
                raise InvalidDomainError(f"hole {i} is self-intersecting")
            if not shell.contains(hp):
                raise InvalidDomainError(f"hole {i} is not strictly inside the outer boundary")
            for j in range(i):
                if hp.intersects(shapely.Polygon(self.holes[j])):
                    raise InvalidDomainError(f"holes {j} and {i} intersect")
        poly = self.polygon
        for i, s in enumerate(self.slits):
            if not poly.covers(shapely.LineString(s)):
                raise InvalidDomainError(f"slit {i} leaves the closure of the region")

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "outer": self.outer.tolist(),
            "holes": [h.tolist() for h in self.holes],
            "slits": [s.tolist() for s in self.slits],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Domain":
        try:
            return cls(data["outer"], data.get("holes", []), data.get("slits", []),
                       name=data.get("name", "domain"))
        except KeyError as exc:
            raise InvalidDomainError(f"domain JSON missing key {exc}") from None

    @classmethod
    def load(cls, path) -> "Domain":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @cached_property
    def content_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    # -- derived geometry --------------------------------------------------

    @cached_property
    def polygon(self) -> shapely.Polygon:
        poly = shapely.Polygon(self.outer, [h for h in self.holes])
        shapely.prepare(poly)
        return poly

    @cached_property
    def segments(self) -> np.ndarray:
        parts = [_loop_segments(self.outer)]
        parts += [_loop_segments(h) for h in self.holes]
        parts += [np.stack([s[:-1], s[1:]], axis=1) for s in self.slits]
        return _readonly(np.concatenate(parts))

    @cached_property
    def index(self) -> BoundaryIndex:
        return BoundaryIndex(self.segments)

    @cached_property
    def _boundary_lines(self):
        g = shapely.multilinestrings(list(self.segments))
        shapely.prepare(g)
        return g

    @cached_property
    def diameter(self) -> float:
        hull = np.asarray(shapely.MultiPoint(self.outer).convex_hull.exterior.coords)[:-1]
        diff = hull[:, None, :] - hull[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1)).max())

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        lo = self.outer.min(axis=0)
        hi = self.outer.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    @property
    def interior_tol(self) -> float:
        return 1e-12 * self.diameter

    # -- point queries -----------------------------------------------------

    def distance(self, points) -> np.ndarray:
        """Unsigned exact distance from arbitrary points to the boundary."""
        return self.index.distance(as_points(points))

    def interior_mask(self, points, d: np.ndarray | None = None) -> np.ndarray:
        pts = as_points(points)
        if d is None:
            d = self.distance(pts)
        inside = shapely.contains_xy(self.polygon, pts[:, 0], pts[:, 1])
        return inside & (d > self.interior_tol)

    def is_interior(self, p) -> bool:
        return bool(self.interior_mask(as_xy(p)[None, :])[0])

    def segments_inside(self, a: np.ndarray, b: np.ndarray,
                        da: np.ndarray | None = None, db: np.ndarray | None = None) -> np.ndarray:
        """Whether each segment ``[a_i, b_i]`` between interior points lies in the domain.

        A segment shorter than ``max(d(a), d(b))`` sits inside a boundary-free
        disk and is accepted outright; the rest are tested for intersection
        with every boundary segment plus midpoint interiority.
        """
        a = as_points(a)
        b = as_points(b)
        if da is None:
            da = self.distance(a)
        if db is None:
            db = self.distance(b)
        length = np.hypot(*(b - a).T)
        ok = length < np.maximum(da, db)
        rest = np.flatnonzero(~ok)
        if len(rest):
            lines = shapely.linestrings(np.stack([a[rest], b[rest]], axis=1))
            hit = shapely.intersects(self._boundary_lines, lines)
            mid = (a[rest] + b[rest]) / 2
            ok[rest] = ~hit & self.interior_mask(mid)
        return ok

    def contains_polyline(self, curve: "Polyline") -> bool:
        v = curve.vertices
        if not np.all(self.interior_mask(v)):
            return False
        if len(v) == 1:
            return True
        return bool(np.all(self.segments_inside(v[:-1], v[1:])))

    def require_interior(self, p) -> np.ndarray:
        xy = as_xy(p)
        if not self.is_interior(xy):
            raise PointOutsideDomainError(f"point ({xy[0]:g}, {xy[1]:g}) is not interior to {self.name}")
        return xy

    def transformed(self, scale: float = 1.0, angle: float = 0.0, shift=(0.0, 0.0)) -> "Domain":
        """Image under ``p -> scale * R(angle) p + shift``."""
        f = similarity(scale, angle, shift)
        return Domain(f(self.outer), [f(h) for h in self.holes], [f(s) for s in self.slits],
                      name=f"{self.name}*")

    def __repr__(self):
        return (f"Domain({self.name!r}, outer={len(self.outer)}, holes={len(self.holes)}, "
                f"slits={len(self.slits)})")


def similarity(scale: float = 1.0, angle: float = 0.0, shift=(0.0, 0.0)) -> Callable:
    c, s = math.cos(angle), math.sin(angle)
    rot = scale * np.array([[c, -s], [s, c]])
    off = np.asarray(shift, dtype=float)

    def apply(pts):
        return as_points(pts) @ rot.T + off

    return apply


class Polyline:
    """An ordered chain of points with arclength bookkeeping.

    Consecutive duplicate vertices are dropped so every stored segment has
    positive length. The arclength parametrization is exposed via
    :meth:`point_at`.
    """

    __slots__ = ("_v", "_cum")

    def __init__(self, vertices):
        v = as_points(vertices)
        if len(v) == 0:
            raise ValueError("polyline needs at least one vertex")
        if not np.all(np.isfinite(v)):
            raise ValueError("polyline has non-finite vertices")
        if len(v) > 1:
            keep = np.ones(len(v), dtype=bool)
            keep[1:] = np.any(np.diff(v, axis=0) != 0, axis=1)
            v = v[keep]
        self._v = _readonly(v)
        seg = np.hypot(*np.diff(self._v, axis=0).T) if len(v) > 1 else np.zeros(0)
        self._cum = _readonly(np.concatenate([[0.0], np.cumsum(seg)]))

    @property
    def vertices(self) -> np.ndarray:
        return self._v

    @property
    def cumulative(self) -> np.ndarray:
        return self._cum

    @property
    def length(self) -> float:
        return float(self._cum[-1])

    @property
    def start(self) -> np.ndarray:
        return self._v[0]

    @property
    def end(self) -> np.ndarray:
        return self._v[-1]

    def __len__(self):
        return len(self._v)

    def __repr__(self):
        return f"Polyline(n={len(self._v)}, length={self.length:.6g})"

    def point_at(self, s) -> np.ndarray:
        """Arclength parametrization: the point at distance ``s`` from the start."""
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.length)
        if len(self._v) == 1:
            return np.broadcast_to(self._v[0], s.shape + (2,)).copy()
        x = np.interp(s, self._cum, self._v[:, 0])
        y = np.interp(s, self._cum, self._v[:, 1])
        return np.stack([x, y], axis=-1)

    def subcurve(self, s0: float, s1: float) -> "Polyline":
        s0, s1 = sorted((float(s0), float(s1)))
        inner = self._v[(self._cum > s0) & (self._cum < s1)]
        return Polyline(np.vstack([self.point_at(s0), inner, self.point_at(s1)]))

    def reparametrized(self, n: int) -> "Polyline":
        """Polyline through ``n + 1`` arclength-equispaced points plus all corners."""
        s = np.union1d(np.linspace(0.0, self.length, n + 1), self._cum)
        return Polyline(self.point_at(s))

    def reversed(self) -> "Polyline":
        return Polyline(self._v[::-1])

    def concat(self, other: "Polyline") -> "Polyline":
        return Polyline(np.vstack([self._v, other.vertices]))

    def transformed(self, scale: float = 1.0, angle: float = 0.0, shift=(0.0, 0.0)) -> "Polyline":
        return Polyline(similarity(scale, angle, shift)(self._v))


def curve_length(curve: Polyline) -> float:
    return curve.length


def arclength_samples(domain: Domain, curve: Polyline, fraction: float = 1 / 8,
                      max_count: int = 1000) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arclength samples with spacing at most ``min(fraction * d_D, length / max_count)``.

    Returns ``(s, points, d)``. Because ``d_D`` is 1-Lipschitz the refinement
    loop terminates once every gap satisfies the rule at both ends.
    """
    if curve.length == 0:
        p = curve.vertices[:1]
        return np.zeros(1), p.copy(), domain.distance(p)
    base = max(int(max_count), 1)
    s = np.union1d(np.linspace(0.0, curve.length, base + 1), curve.cumulative)
    pts = curve.point_at(s)
    d = domain.distance(pts)
    cap = curve.length / base
    for _ in range(60):
        gap = np.diff(s)
        allowed = np.minimum(fraction * np.minimum(d[:-1], d[1:]), cap)
        bad = np.flatnonzero(gap > allowed * (1 + 1e-12))
        if len(bad) == 0:
            break
        parts = np.ceil(gap[bad] / np.maximum(allowed[bad], 1e-300)).astype(int)
        parts = np.minimum(parts, 1 << 16)
        extra = np.concatenate([s[i] + gap[i] * np.arange(1, m) / m for i, m in zip(bad, parts)])
        s_new = np.concatenate([s, extra])
        order = np.argsort(s_new, kind="stable")
        s = s_new[order]
        newpts = curve.point_at(extra)
        pts = np.concatenate([pts, newpts])[order]
        d = np.concatenate([d, domain.distance(newpts)])[order]
    return s, pts, d


class Density:
    """A nonnegative weight on the plane, evaluated on arrays of points.

    ``fn`` maps an ``(n, 2)`` array to ``n`` values. When ``of_distance`` is
    set the density is a function of the boundary distance alone, which lets
    quadrature reuse distances it already computed.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray] | None = None, name: str = "",
                 of_distance: Callable[[np.ndarray], np.ndarray] | None = None):
        if fn is None and of_distance is None:
            raise ValueError("density needs an evaluator")
        self._fn = fn
        self.of_distance = of_distance
        self.name = name

    def evaluate(self, points: np.ndarray, d: np.ndarray | None = None) -> np.ndarray:
        if self.of_distance is not None and d is not None:
            vals = self.of_distance(d)
        elif self._fn is not None:
            vals = self._fn(points)
        else:
            raise ValueError("distance-based density evaluated without distances")
        vals = np.broadcast_to(np.asarray(vals, dtype=float), (len(points),))
        if not np.all(np.isfinite(vals)):
            raise NonFiniteDensityError(f"density {self.name or ''} is not finite on the curve")
        if np.any(vals < 0):
            raise NonFiniteDensityError(f"density {self.name or ''} is negative on the curve")
        return vals

    def __call__(self, p) -> float:
        return float(self.evaluate(as_xy(p)[None, :])[0])

    @classmethod
    def constant(cls, c: float) -> "Density":
        c = float(c)
        return cls(lambda pts: np.full(len(pts), c), name=f"const({c})")

    @classmethod
    def quasihyperbolic(cls, domain: Domain) -> "Density":
        def inv(d):
            with np.errstate(divide="ignore"):
                return 1.0 / d

        return cls(lambda pts: inv(domain.distance(pts)), name="1/d_D", of_distance=inv)


def boundary_distance(domain: Domain, p) -> float:
    """Euclidean distance from an interior point to the boundary."""
    xy = as_xy(p)
    d = float(domain.distance(xy[None, :])[0])
    if not (d > domain.interior_tol and domain.is_interior(xy)):
        raise PointOutsideDomainError(f"point ({xy[0]:g}, {xy[1]:g}) is not interior to {domain.name}")
    return d


def integrate_segments(a: np.ndarray, b: np.ndarray, dist, rho,
                       da: np.ndarray | None = None, db: np.ndarray | None = None,
                       rtol: float = DEFAULT_RTOL, split: bool = True,
                       max_depth: int = 48, min_depth: int = 0) -> np.ndarray:
    """Vectorized adaptive Simpson quadrature of a density along many segments.

    ``dist(points, owner)`` returns boundary distances for points lying on
    segment ``owner``; ``rho(points, d)`` returns density values. Segments are
    first bisected until each piece is no longer than ``SPLIT_FACTOR`` times
    its smaller endpoint distance, then each piece is refined until the
    Richardson error estimate is within ``rtol`` of its value.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    n = len(a)
    out = np.zeros(n)
    if n == 0:
        return out
    owner = np.arange(n)
    da = dist(a, owner) if da is None else np.asarray(da, dtype=float)
    db = dist(b, owner) if db is None else np.asarray(db, dtype=float)

    if split:
        done_a, done_b, done_da, done_db, done_o = [], [], [], [], []
        for _ in range(200):
            length = np.hypot(*(b - a).T)
            bad = length > SPLIT_FACTOR * np.minimum(da, db)
            if not bad.any():
                break
            good = ~bad
            done_a.append(a[good]); done_b.append(b[good])
            done_da.append(da[good]); done_db.append(db[good]); done_o.append(owner[good])
            a, b, da, db, owner = a[bad], b[bad], da[bad], db[bad], owner[bad]
            m = (a + b) / 2
            dm = dist(m, owner)
            a, b = np.concatenate([a, m]), np.concatenate([m, b])
            da, db = np.concatenate([da, dm]), np.concatenate([dm, db])
            owner = np.concatenate([owner, owner])
        a = np.concatenate(done_a + [a]); b = np.concatenate(done_b + [b])
        da = np.concatenate(done_da + [da]); db = np.concatenate(done_db + [db])
        owner = np.concatenate(done_o + [owner])

    fa = rho(a, da)
    fb = rho(b, db)
    m = (a + b) / 2
    fm = rho(m, dist(m, owner))
    length = np.hypot(*(b - a).T)
    whole = length / 6 * (fa + 4 * fm + fb)
    depth = 0
    while len(a):
        q1 = (a + m) / 2
        q3 = (m + b) / 2
        f1 = rho(q1, dist(q1, owner))
        f3 = rho(q3, dist(q3, owner))
        left = length / 12 * (fa + 4 * f1 + fm)
        right = length / 12 * (fm + 4 * f3 + fb)
        err = left + right - whole
        ok = np.abs(err) <= 15 * rtol * np.abs(left + right)
        if depth < min_depth:
            ok[:] = False
        if depth >= max_depth:
            ok[:] = True
        if ok.any():
            out += np.bincount(owner[ok], weights=(left + right + err / 15)[ok], minlength=n)
        nk = ~ok
        if not nk.any():
            break
        a, m, b = a[nk], m[nk], b[nk]
        fa, fm, fb, f1, f3 = fa[nk], fm[nk], fb[nk], f1[nk], f3[nk]
        q1, q3 = q1[nk], q3[nk]
        left, right, owner, length = left[nk], right[nk], owner[nk], length[nk] / 2
        a, b, m = np.concatenate([a, m]), np.concatenate([m, b]), np.concatenate([q1, q3])
        fa, fb, fm = np.concatenate([fa, fm]), np.concatenate([fm, fb]), np.concatenate([f1, f3])
        whole = np.concatenate([left, right])
        owner = np.concatenate([owner, owner])
        length = np.concatenate([length, length])
        depth += 1
    return out


def line_integral(domain: Domain, curve: Polyline, rho: Density,
                  rtol: float = DEFAULT_RTOL, check: bool = True) -> float:
    """Integral of ``rho`` against arclength along ``curve``."""
    if len(curve) == 1:
        rho.evaluate(curve.vertices, domain.distance(curve.vertices))
        return 0.0
    if check and not domain.contains_polyline(curve):
        raise ContainmentError("curve leaves the domain")
    v = curve.vertices

    def dist(pts, owner):
        return domain.distance(pts)

    vals = integrate_segments(v[:-1], v[1:], dist, rho.evaluate, rtol=rtol)
    return float(vals.sum())


def point_polyline_distance(points: np.ndarray, curve: Polyline) -> np.ndarray:
    """Euclidean distance from each point to the polyline (chunked brute force)."""
    pts = as_points(points)
    v = curve.vertices
    if len(v) == 1:
        return np.hypot(*(pts - v[0]).T)
    a, b = v[:-1], v[1:]
    out = np.empty(len(pts))
    step = max(1, 2_000_000 // len(a))
    for i in range(0, len(pts), step):
        out[i:i + step] = segment_distance(pts[i:i + step, None, :], a[None], b[None]).min(axis=1)
    return out


def polyline_from_points(points: Sequence) -> Polyline:
    return Polyline(as_points(points))
