"""Acceptance criteria 1-11, one recorded PASS/FAIL line each."""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from qhgeo.bounds import BoundInputs, cone_bound_chain
from qhgeo.graph import SamplingParams, build_graph
from qhgeo.hyperbolicity import center_node
from qhgeo.pipeline import RunConfig, bundled_config, run
from qhgeo.presets import generate_domain
from qhgeo.properties import center_route, cone_constant, gehring_hayman, john_estimate
from qhgeo.qh import (
    length_space_upper_bound,
    lower_bounds,
    node_geodesic,
    qh_distance,
    qh_length,
    sample_interior_points,
    sample_node_pairs,
    solidness,
)
from qhgeo.report import dumps

LN10 = math.log(10.0)
MAX_GAP_REFERENCE = 6.900153652578345
FIRST_RUNS: dict[str, str] = {}


@pytest.fixture(scope="module")
def acc_cache(tmp_path_factory):
    return str(tmp_path_factory.mktemp("acceptance-graphs"))


def run_bundled(name: str, cache: str) -> tuple[dict, float]:
    cfg = RunConfig.load(bundled_config(name))
    cfg.cache_dir = cache
    t = time.perf_counter()
    rep = run(cfg)
    FIRST_RUNS.setdefault(name, dumps(rep))
    return rep, time.perf_counter() - t


def test_criterion_01_radial_exactness(record):
    t = time.perf_counter()
    g = build_graph(generate_domain("disk"))
    k = qh_distance(g, (0.0, 0.0), (0.9, 0.0))
    dt = time.perf_counter() - t
    err = abs(k - LN10) / LN10
    ok = err <= 0.02 and dt <= 30
    record(1, ok, f"k={k:.6f} vs ln10={LN10:.6f} (rel err {err:.2e}, tol 2e-2); "
                  f"build+query {dt:.1f}s (limit 30s)")
    assert ok


def test_criterion_02_basic_lower_bounds(record, make_graph):
    violations, total, worst = 0, 0, math.inf
    for kind, n, seed in (("disk", 334, 21), ("square", 333, 22), ("slit_disk", 333, 23)):
        g = make_graph(kind, 64)
        pts = sample_interior_points(g.domain, 2 * n, seed)
        d = g.domain.distance(pts)
        for i in range(n):
            x, y = pts[2 * i], pts[2 * i + 1]
            k = qh_distance(g, x, y)
            lb1, lb2 = lower_bounds(x, y, d[2 * i], d[2 * i + 1])
            margin = min(k - lb1, k - lb2)
            worst = min(worst, margin)
            violations += margin < -1e-6
            total += 1
    ok = violations == 0 and total == 1000
    record(2, ok, f"{violations} violations on {total} pairs; smallest k - bound = {worst:.3e}")
    assert ok


def ball_pairs(domain, n, seed):
    rng = np.random.default_rng(seed)
    x = sample_interior_points(domain, n, seed)
    dx = domain.distance(x)
    u = rng.uniform(0.05, 0.95, n)
    th = rng.uniform(0, 2 * np.pi, n)
    y = x + (u * dx)[:, None] * np.column_stack([np.cos(th), np.sin(th)])
    return x, y, dx


def test_criterion_03_length_space_upper_bound(record, make_graph):
    delta, tight = {}, {}
    for R in (32, 64):
        dh, ex = 0.0, -math.inf
        for kind, seed in (("disk", 31), ("square", 32), ("slit_disk", 33)):
            g = make_graph(kind, R)
            x, y, dx = ball_pairs(g.domain, 60, seed)
            for p, q, d in zip(x, y, dx):
                k = qh_distance(g, p, q)
                L = float(np.hypot(*(q - p)))
                dh = max(dh, k - length_space_upper_bound(p, q, d))
                ex = max(ex, k - math.log(d / (d - L)))
        delta[R], tight[R] = max(0.0, dh), ex
    ok = delta[64] <= 0.5 * delta[32]
    record(3, ok, f"delta_h(32)={delta[32]:.3e}, delta_h(64)={delta[64]:.3e} on 180 pairs per resolution; "
                  f"max excess over ln(d/(d-|x-y|)): {tight[32]:.2e} at 32, {tight[64]:.2e} at 64")
    assert ok


def test_criterion_04_additivity_and_solidness(record, make_graph):
    g = make_graph("disk", 64)
    pairs = sample_node_pairs(g, 110, 41)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]][:100]
    worst_add, worst_solid = 0.0, 0.0
    for i, j in pairs:
        geo = node_geodesic(g, int(i), int(j))
        m = int(np.argmin(np.abs(geo.cumulative - geo.k_length / 2)))
        mid = int(geo.nodes[m])
        dm = g.distances(mid)
        err = abs(dm[i] + dm[j] - geo.k_length) / geo.k_length
        worst_add = max(worst_add, err)
        for h in (0.0, 0.5, 1.0):
            worst_solid = max(worst_solid, abs(solidness(g, geo, h).nu - 1.0))
    ok = len(pairs) == 100 and worst_add <= 0.01 and worst_solid <= 0.05
    record(4, ok, f"{len(pairs)} geodesics: max additivity error {worst_add:.2e} (tol 1e-2); "
                  f"max |solidness - 1| {worst_solid:.2e} over h in {{0, 0.5, 1}} (tol 5e-2)")
    assert ok


def test_criterion_05_cone_arc_estimates(record, make_graph):
    g = make_graph("disk", 64)
    dom = g.domain
    c = center_node(g)
    dist_c = g.distances(c)
    rng = np.random.default_rng(51)
    pairs = sample_node_pairs(g, 80, 51)
    arcs = 0
    violations = 0
    worst = 0.0
    for i, j in pairs:
        if i == j or c in (i, j):
            continue
        arc = center_route(g, dist_c, c, int(i), int(j))
        a = max(cone_constant(dom, arc).value, 1.0)
        L = arc.length
        half = L / 2
        if rng.integers(2) == 0:
            s1 = rng.uniform(0, half)
            s2 = rng.uniform(s1, half)
        else:
            s1 = rng.uniform(half, L)
            s2 = rng.uniform(half, s1)
        z1, z2 = arc.point_at(s1), arc.point_at(s2)
        sub = arc.subcurve(min(s1, s2), max(s1, s2))
        ell = abs(s2 - s1)
        d1 = float(dom.distance(z1[None])[0])
        k = qh_distance(g, z1, z2)
        lk = qh_length(dom, sub)
        rhs1 = 2 * a * math.log1p(2 * ell / d1)
        rhs2 = 4 * a * a * k + 4 * a * a
        ratios = (k / rhs1, lk / rhs1, lk / rhs2)
        worst = max(worst, *ratios)
        violations += any(r > 1.01 for r in ratios)
        arcs += 1
        if arcs == 50:
            break
    ok = arcs == 50 and violations == 0
    record(5, ok, f"{violations} violations on {arcs} center-routed arcs; "
                  f"largest lhs/rhs {worst:.3f} (slack 1.01)")
    assert ok


def test_criterion_06_uniformization(record, acc_cache):
    rep, dt = run_bundled("uniformize_square.json", acc_cache)
    rows = rep["band_sweep"]
    eps = [r["epsilon"] for r in rows]
    ok = (eps == [0.1, 0.2] and dt <= 120
          and all(r["diam_eps"] <= 2 / r["epsilon"] * 1.05 and r["diam_eps_coarse"] <= 2 / r["epsilon"] * 1.05
                  and r["upper_violations"] == 0 and r["c0_empirical"] > 0 and r["c0_stable"]
                  for r in rows))
    detail = "; ".join(f"eps={r['epsilon']}: diam={r['diam_eps']:.2f} (<= {2.1 / r['epsilon']:.1f}), "
                       f"upper violations {r['upper_violations']}, c0={r['c0_empirical']:.4f} "
                       f"ratio {r['c0_ratio']:.4f}" for r in rows)
    record(6, ok, f"{detail}; runtime {dt:.1f}s (limit 120s)")
    assert ok


def test_criterion_07_constant_chain(record):
    ch = cone_bound_chain(BoundInputs(1, 1, 1, 1, 1))
    ok = (abs(ch.ln_a6 - 33.2711) <= 1e-3 and abs(ch.ln_a5 - 133.0843) <= 1e-3
          and abs(ch.ln_a4 - 1064.674) <= 1e-2 and abs(ch.ln_ln_b - 1064.674) <= 1e-2)
    record(7, ok, f"ln a6={ch.ln_a6:.4f}, ln a5={ch.ln_a5:.4f}, ln a4={ch.ln_a4:.3f}, "
                  f"ln ln b={ch.ln_ln_b:.3f}")
    assert ok


def test_criterion_08_slit_disk_geodesics_are_cone_arcs(record, acc_cache):
    rep, dt = run_bundled("thm1_slitdisk.json", acc_cache)
    st = rep["stability"]
    cone = rep["constants"]["cone_max"]["value"]
    gap = rep["max_gap"]
    ok = (rep["verdicts"]["thm1"] == "PASS" and len(rep["pairs"]) + rep["degenerate_pairs"] == 200
          and math.isfinite(cone) and st["cone_ratio"] <= 1.25 and st["dominated"] and dt <= 600
          and gap == pytest.approx(MAX_GAP_REFERENCE, rel=1e-6))
    record(8, ok, f"verdict {rep['verdicts']['thm1']}, max cone {cone:.4f}, two-resolution ratio "
                  f"{st['cone_ratio']:.4f}, all dominated: {st['dominated']}, max gap {gap:.6f} "
                  f"(reference {MAX_GAP_REFERENCE:.6f}); runtime {dt:.1f}s (limit 600s)")
    assert ok


def test_criterion_09_uniformity_matrix(record, acc_cache, make_graph):
    notes, ok = [], True
    expect = {"thm2_disk.json": None, "thm2_square.json": None, "thm2_slitdisk.json": ("quasiconvex", "uniform")}
    for name, failing in expect.items():
        rep, _ = run_bundled(name, acc_cache)
        cond = rep["conditions"]
        keys = ("john", "llc1", "llc2", "quasiconvex", "hyperbolic", "uniform")
        holds = {k: cond[k]["holds"] for k in keys}
        good = rep["verdicts"]["thm2"] == "CONSISTENT"
        if name == "thm2_disk.json":
            good &= all(holds.values())
        if failing:
            good &= all(not holds[k] for k in failing)
        ok &= good
        failed = [k for k in keys if not holds[k]]
        notes.append(f"{rep['domain']['name']} {rep['verdicts']['thm2']} "
                     f"({'failing: ' + ', '.join(failed) if failed else 'all conditions hold'})")
    johns, cones = [], []
    for n in (4, 8, 16):
        g = make_graph("comb", 32, teeth=n)
        johns.append(john_estimate(g.domain, 50, 0, g).value)
        P = sample_node_pairs(g, 50, 0)
        cones.append(max(cone_constant(g.domain, node_geodesic(g, int(i), int(j))).value
                         for i, j in P if i != j))
    mono = all(a < b for a, b in zip(johns, johns[1:])) and all(a < b for a, b in zip(cones, cones[1:]))
    ok &= mono
    record(9, ok, "; ".join(notes) + f"; comb 4/8/16 john {', '.join(f'{v:.2f}' for v in johns)}, "
                  f"max cone {', '.join(f'{v:.2f}' for v in cones)}")
    assert ok


def test_criterion_10_gehring_hayman(record, make_graph):
    lows, maxima = [], {}
    for kind in ("disk", "slit_disk"):
        for R in (32, 64):
            g = make_graph(kind, R)
            gh = gehring_hayman(g.domain, g, 100, 7)
            lows.append(gh.extra["min_ratio"])
            maxima[kind, R] = gh.value
    drift = {k: maxima[k, 64] / maxima[k, 32] - 1 for k in ("disk", "slit_disk")}
    ok = min(lows) >= 0.98 and all(abs(v) <= 0.10 for v in drift.values())
    record(10, ok, f"min ratio {min(lows):.4f} (>= 0.98); suite max disk {maxima['disk', 32]:.4f}/"
                   f"{maxima['disk', 64]:.4f}, slit {maxima['slit_disk', 32]:.4f}/{maxima['slit_disk', 64]:.4f} "
                   f"(drift {drift['disk']:+.3f}, {drift['slit_disk']:+.3f}; tol 0.10)")
    assert ok


BUNDLED = ("bound_unit.json", "distance_disk.json", "thm1_slitdisk.json", "thm2_disk.json",
           "thm2_slitdisk.json", "thm2_square.json", "uniformize_square.json")


def test_criterion_11_determinism(record, acc_cache):
    same = []
    for name in BUNDLED:
        if name not in FIRST_RUNS:
            run_bundled(name, acc_cache)
        cfg = RunConfig.load(bundled_config(name))
        cfg.cache_dir = acc_cache
        same.append(dumps(run(cfg)) == FIRST_RUNS[name])
    ok = all(same)
    record(11, ok, f"{sum(same)}/{len(same)} bundled configs reproduce bit-identical reports")
    assert ok
