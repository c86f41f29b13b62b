"""Parametrized domain families with expected classification tags."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .geometry import Domain

TAG_KEYS = ("john", "uniform", "quasiconvex", "hyperbolic")


def _circle(n: int, r: float = 1.0, center=(0.0, 0.0)) -> np.ndarray:
    t = 2 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + r * np.cos(t), center[1] + r * np.sin(t)])


def _disk(vertices=512, radius=1.0):
    _int_range("vertices", vertices, 8, 16384)
    _pos("radius", radius)
    return Domain(_circle(int(vertices), radius), name="disk")


def _square(side=1.0):
    _pos("side", side)
    s = float(side)
    return Domain([(0, 0), (s, 0), (s, s), (0, s)], name="square")


def _slit_disk(slit_length=0.95, vertices=512):
    _int_range("vertices", vertices, 8, 16384)
    if not 0 < slit_length < 1:
        raise InvalidParameterError("slit_length must lie in (0, 1)")
    return Domain(_circle(int(vertices)), slits=[[(0.0, 0.0), (float(slit_length), 0.0)]],
                  name="slit_disk")


def _l_shape(arm=0.5):
    if not 0 < arm < 1:
        raise InvalidParameterError("arm must lie in (0, 1)")
    a = float(arm)
    return Domain([(0, 0), (1, 0), (1, a), (a, a), (a, 1), (0, 1)], name="L_shape")


def _comb(teeth=8, tooth_height=0.6, base_height=0.3):
    _int_range("teeth", teeth, 1, 64)
    _pos("tooth_height", tooth_height)
    _pos("base_height", base_height)
    n = int(teeth)
    w = 1.0 / (2 * n)
    top = base_height + tooth_height
    pts = [(0.0, 0.0), (1.0, 0.0), (1.0, base_height)]
    for i in reversed(range(n)):
        x0 = (2 * i + 0.5) * w
        x1 = x0 + w
        pts += [(x1, base_height), (x1, top), (x0, top), (x0, base_height)]
    pts.append((0.0, base_height))
    return Domain(pts, name=f"comb{n}")


def _rooms_corridor(corridor_width=0.1, corridor_length=0.5):
    if not 0 < corridor_width < 1:
        raise InvalidParameterError("corridor_width must lie in (0, 1)")
    _pos("corridor_length", corridor_length)
    h0 = 0.5 - corridor_width / 2
    h1 = 0.5 + corridor_width / 2
    L = float(corridor_length)
    pts = [(0, 0), (1, 0), (1, h0), (1 + L, h0), (1 + L, 0), (2 + L, 0), (2 + L, 1),
           (1 + L, 1), (1 + L, h1), (1, h1), (1, 1), (0, 1)]
    return Domain(pts, name="rooms_corridor")


def _annulus_sector(inner=0.5, outer=1.0, angle=math.pi / 2, vertices=128):
    if not 0 < inner < outer:
        raise InvalidParameterError("need 0 < inner < outer")
    if not 0 < angle < 2 * math.pi:
        raise InvalidParameterError("angle must lie in (0, 2*pi)")
    _int_range("vertices", vertices, 4, 16384)
    t = np.linspace(0.0, angle, int(vertices) + 1)
    arc_out = np.column_stack([outer * np.cos(t), outer * np.sin(t)])
    arc_in = np.column_stack([inner * np.cos(t), inner * np.sin(t)])[::-1]
    return Domain(np.vstack([arc_out, arc_in]), name="annulus_sector")


def _int_range(name, v, lo, hi):
    if int(v) != v or not lo <= v <= hi:
        raise InvalidParameterError(f"{name} must be an integer in [{lo}, {hi}]")


def _pos(name, v):
    if not (math.isfinite(v) and v > 0):
        raise InvalidParameterError(f"{name} must be positive")


_YES = dict.fromkeys(TAG_KEYS, "yes")

KINDS = {
    "disk": (_disk, _YES),
    "square": (_square, _YES),
    "slit_disk": (_slit_disk, {"john": "yes", "uniform": "no", "quasiconvex": "no",
                               "hyperbolic": "yes"}),
    "L_shape": (_l_shape, _YES),
    "comb": (_comb, {"john": "degrading-with-N", "uniform": "degrading-with-N",
                     "quasiconvex": "yes", "hyperbolic": "yes"}),
    "rooms_corridor": (_rooms_corridor, {"john": "degrading-with-width",
                                         "uniform": "degrading-with-width",
                                         "quasiconvex": "yes", "hyperbolic": "yes"}),
    "annulus_sector": (_annulus_sector, _YES),
}


@dataclass(frozen=True)
class Preset:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(
                f"unknown preset {self.kind!r}; choose from {', '.join(sorted(KINDS))}")


def generate_domain(preset: Preset | str, **params) -> Domain:
    """Build a preset domain, attaching its expected classification tags."""
    if isinstance(preset, str):
        preset = Preset(preset, params)
    fn, tags = KINDS[preset.kind]
    try:
        dom = fn(**preset.params)
    except TypeError as exc:
        raise InvalidParameterError(f"bad parameters for {preset.kind}: {exc}") from None
    dom.tags = dict(tags)
    return dom
