"""Explicit cone-constant chain in log space and dyadic decomposition of geodesics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCurveError, GapBoundTooSmallError, InvalidParameterError
from .qh import Geodesic

LN4 = math.log(4.0)


@dataclass(frozen=True)
class BoundInputs:
    """John constant a, uniformity constant c, distortion M and shape constants a1, a3."""

    a: float = 1.0
    c: float = 1.0
    M: float = 1.0
    a1: float = 1.0
    a3: float = 1.0

    def __post_init__(self):
        for name in ("a", "c", "M", "a1", "a3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 1):
                raise InvalidParameterError(f"{name} must be finite and at least 1, got {v}")


@dataclass(frozen=True)
class BoundChain:
    ln_a6: float
    ln_a5: float
    ln_a4: float
    ln_ln_b: float
    label: str = "upper_bound"


def cone_bound_chain(inputs: BoundInputs) -> BoundChain:
    """Natural logs of a6, a5, a4 and of ln b, where b = 4·a4·exp(a4).

    ln ln b = ln a4 + log1p((ln a4 + ln 4)/a4), with the ratio formed as
    exp(ln(ln a4 + ln 4) - ln a4) so a4 itself is never materialized.
    """
    a, c, M, a1, a3 = inputs.a, inputs.c, inputs.M, inputs.a1, inputs.a3
    ln_a6 = 16 * c * c * M * math.log(8 * a1 * a1 * a3) + 2 * math.log(a)
    ln_a5 = 4 * a * a * M * ln_a6
    ln_a4 = 8 * c * c * M * ln_a5
    ratio = math.exp(math.log(ln_a4 + LN4) - ln_a4)
    return BoundChain(ln_a6, ln_a5, ln_a4, ln_a4 + math.log1p(ratio))


@dataclass(frozen=True)
class DyadicDecomposition:
    """Doubling points y_1 = z_1, ..., y_{m+2} = x_0 along one half of a geodesic.

    ``positions`` index into the geodesic's node sequence (oriented from z_1),
    ``gaps[i]`` is k(y_i, y_{i+1}) and ``lengths[i]`` the Euclidean length of
    the subarc between them.
    """

    positions: np.ndarray
    nodes: np.ndarray
    points: np.ndarray
    d: np.ndarray
    gaps: np.ndarray
    lengths: np.ndarray
    m: int

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max()) if len(self.gaps) else 0.0


def dyadic_decompose(domain, graph, geodesic: Geodesic, end: int = 0) -> DyadicDecomposition:
    """Dyadic decomposition of the half of ``geodesic`` from one endpoint to x_0.

    x_0 is the first node of maximal boundary distance; ``end`` selects the
    starting endpoint (0 = start, 1 = end). Boundary distances come from the
    geodesic's nodes.
    """
    if len(geodesic.nodes) < 2:
        raise DegenerateCurveError("geodesic has a single node")
    # x_0 is the first maximum in the geodesic's own orientation for both halves
    top0 = int(np.argmax(domain.distance(geodesic.points)))
    geo = geodesic if end == 0 else geodesic.reversed()
    d = domain.distance(geo.points)
    top = top0 if end == 0 else len(d) - 1 - top0
    dz = d[0]
    m = int(math.floor(math.log2(d[top] / dz) + 1e-12)) if top > 0 else 0
    pos = [0]
    for i in range(2, m + 2):
        hit = np.flatnonzero(d[: top + 1] >= 2 ** (i - 1) * dz)
        pos.append(int(hit[0]) if len(hit) else top)
    pos.append(top)
    pos = np.array(pos, dtype=np.int64)
    cum = geo.cumulative
    arc = geo.path.cumulative
    gaps = np.abs(np.diff(cum[pos]))
    lengths = np.diff(arc[pos])
    return DyadicDecomposition(pos, geo.nodes[pos], geo.points[pos], d[pos], gaps, lengths, m)


@dataclass(frozen=True)
class GapCone:
    implied: float
    gap_bound: float
    subarc_ratio: float
    subarcs_ok: bool


def cone_from_gaps(decomp: DyadicDecomposition, gap_bound: float, tol: float = 1e-2) -> GapCone:
    """Implied cone constant 4G·e^G, checking each subarc length against 2G·d(y_i).

    ``subarc_ratio`` is the largest length/(2G·d(y_i)); ``subarcs_ok`` allows
    a relative ``tol`` for the discretized path.
    """
    G = float(gap_bound)
    if decomp.max_gap > G * (1 + 1e-12):
        raise GapBoundTooSmallError(f"gap bound {G:g} is below measured gap {decomp.max_gap:g}")
    if len(decomp.lengths) and G > 0:
        ratio = float(np.max(decomp.lengths / (2 * G * decomp.d[:-1])))
    else:
        ratio = 0.0 if not len(decomp.lengths) or decomp.lengths.max() == 0 else math.inf
    return GapCone(4 * G * math.exp(G), G, ratio, ratio <= 1 + tol)


def geodesic_gap_cone(domain, graph, geodesic: Geodesic) -> tuple[GapCone, list[DyadicDecomposition]]:
    """Decompose both halves of a geodesic; G is the largest gap over both."""
    halves = [dyadic_decompose(domain, graph, geodesic, end) for end in (0, 1)]
    G = max(h.max_gap for h in halves)
    per = [cone_from_gaps(h, G) for h in halves]
    ratio = max(p.subarc_ratio for p in per)
    return GapCone(per[0].implied, G, ratio, all(p.subarcs_ok for p in per)), halves
