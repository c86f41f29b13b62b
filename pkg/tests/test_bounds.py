import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhgeo.bounds import BoundInputs, cone_bound_chain, cone_from_gaps, dyadic_decompose, geodesic_gap_cone
from qhgeo.errors import GapBoundTooSmallError, InvalidParameterError
from qhgeo.qh import qh_geodesic

# frozen oracle values for unit inputs
UNIT = {"ln_a6": 33.271064666877, "ln_a5": 133.084258667510, "ln_a4": 1064.674069340076,
        "ln_ln_b": 1064.674069340076}


def mp_chain(a, c, M, a1, a3):
    """High precision evaluation of a6 -> a5 -> a4 -> b = 4 a4 exp(a4), all in logs."""
    mpmath.mp.dps = 60
    a, c, M, a1, a3 = map(mpmath.mpf, (a, c, M, a1, a3))
    ln_a6 = 16 * c ** 2 * M * mpmath.log(8 * a1 ** 2 * a3) + 2 * mpmath.log(a)
    ln_a5 = 4 * a ** 2 * M * ln_a6
    ln_a4 = 8 * c ** 2 * M * ln_a5
    ln_b = mpmath.log(4) + ln_a4 + mpmath.exp(ln_a4)
    return [float(v) for v in (ln_a6, ln_a5, ln_a4, mpmath.log(ln_b))]


def test_unit_chain_matches_frozen_and_independent_oracle():
    ch = cone_bound_chain(BoundInputs())
    got = [ch.ln_a6, ch.ln_a5, ch.ln_a4, ch.ln_ln_b]
    assert got == pytest.approx(list(UNIT.values()), abs=1e-9)
    assert got == pytest.approx(mp_chain(1, 1, 1, 1, 1), rel=1e-12)
    assert ch.label == "upper_bound"


@given(*[st.floats(1.0, 3.0)] * 5)
@settings(max_examples=30, deadline=None)
def test_chain_matches_oracle_and_stays_finite(a, c, M, a1, a3):
    ch = cone_bound_chain(BoundInputs(a, c, M, a1, a3))
    got = [ch.ln_a6, ch.ln_a5, ch.ln_a4, ch.ln_ln_b]
    assert all(math.isfinite(v) for v in got)
    assert got == pytest.approx(mp_chain(a, c, M, a1, a3), rel=1e-10)


def test_chain_is_monotone():
    base = cone_bound_chain(BoundInputs())
    for k in ("a", "c", "M", "a1", "a3"):
        bigger = cone_bound_chain(BoundInputs(**{k: 1.5}))
        assert bigger.ln_ln_b > base.ln_ln_b


@pytest.mark.parametrize("kw", [{"a": 0.5}, {"c": math.inf}, {"M": math.nan}])
def test_invalid_inputs(kw):
    with pytest.raises(InvalidParameterError):
        BoundInputs(**kw)


@pytest.fixture(scope="module")
def radial(disk32):
    return qh_geodesic(disk32, (0.97, 0.0), (-0.2, 0.0))


def test_dyadic_decomposition_structure(disk32, radial):
    dom = disk32.domain
    dec = dyadic_decompose(dom, disk32, radial, end=0)
    d_all = dom.distance(radial.points)
    top = int(np.argmax(d_all))
    assert dec.positions[0] == 0 and dec.positions[-1] == top
    assert dec.m == math.floor(math.log2(d_all[top] / d_all[0]))
    assert len(dec.positions) == dec.m + 2
    # y_i is the first node reaching 2^(i-1) d(z_1)
    for i, p in enumerate(dec.positions[1:-1], start=2):
        assert d_all[p] >= 2 ** (i - 1) * d_all[0]
        assert np.all(d_all[:p] < 2 ** (i - 1) * d_all[0])
    assert dec.gaps.sum() == pytest.approx(radial.cumulative[top])
    # along a radius k is the log ratio of boundary distances
    assert dec.gaps == pytest.approx(np.abs(np.diff(np.log(dec.d))), rel=1e-3)


def test_gap_cone(disk32, radial):
    gc, halves = geodesic_gap_cone(disk32.domain, disk32, radial)
    G = max(h.max_gap for h in halves)
    assert gc.gap_bound == G
    assert gc.implied == pytest.approx(4 * G * math.exp(G))
    assert gc.subarcs_ok
    with pytest.raises(GapBoundTooSmallError):
        cone_from_gaps(halves[0], halves[0].max_gap / 2)
