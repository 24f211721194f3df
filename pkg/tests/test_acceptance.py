"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line with its pinned tolerance."""
import time

import numpy as np
import pytest

from lag2ch import (AtomicMeasure, EulerianInit, Grid, SimConfig, build_kernels, e_norm_distance, gaussian,
                    identity_residuals, lagrangian_from_eulerian, lattice_sums, peakon_pair, sign_violations,
                    simulate, smooth_init, symmetry_defects, validate_setB)
from lag2ch.core import young_bound
from lag2ch.greens import constant_greens
from lag2ch.reference import oracle_kernels


def verdict(rec, num, ok, detail):
    rec(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def gaussian_state(grid):
    return smooth_init(gaussian(1.0, 0.0, 1.0), lambda x: 1.0 + 0.5 * np.exp(-x ** 2), grid, 1.0)


# 1 -------------------------------------------------------------------------
def test_c1_constant_coefficient_green(record):
    TOL, EDGE, N = 1e-10, 10, 400
    t0 = time.perf_counter()
    worst = 0.0
    for dxi in (1.0, 0.2, 0.05):
        ks = build_kernels(np.ones(N), dxi)
        i, j = np.indices((N, N))
        exact = constant_greens(dxi, i - j)
        inner = (np.minimum(i, j) >= EDGE) & (np.maximum(i, j) < N - EDGE)
        worst = max(worst, np.abs(ks.g - exact)[inner].max(), np.abs(ks.k - exact)[inner].max())
    elapsed = time.perf_counter() - t0
    ok = worst <= TOL and elapsed < 1.0
    assert verdict(record, 1, ok, f"max|g,k - closed form| = {worst:.2e} (tol {TOL:g}), {elapsed:.2f}s (< 1s)")


# 2 -------------------------------------------------------------------------
def test_c2_kernel_identities(record, coeff_suite):
    dxi = 0.1
    t0 = time.perf_counter()
    res = sym = sup = sums = 0.0
    signs = []
    for a in coeff_suite:
        ks = build_kernels(a, dxi)
        res = max(res, max(identity_residuals(ks).values()))
        sym = max(sym, max(symmetry_defects(ks).values()))
        signs += sign_violations(ks, slack=0.0)
        sup = max(sup, max(np.abs(m).max() for m in ks.arrays()))
        ls = lattice_sums(ks)
        sums = max(sums, np.abs(ls["g"] - 1).max(), np.abs(ls["k"] - 1).max())
    elapsed = time.perf_counter() - t0
    ok = res <= 1e-9 and sym <= 1e-9 and not signs and sup <= 1 + 1e-9 and sums <= 1e-8 and elapsed < 5
    assert verdict(record, 2, ok,
                   f"residual {res:.1e} (1e-9), symmetry {sym:.1e} (1e-9), sign violations {len(signs)} (0), "
                   f"sup {sup:.4f} (1+1e-9), sum identity {sums:.1e} (1e-8), {elapsed:.2f}s (< 5s)")


# 3 -------------------------------------------------------------------------
def test_c3_two_algorithm_agreement(record, coeff_suite):
    dxi, TOL = 0.1, 1e-8
    worst = 0.0
    for a in coeff_suite:
        ks, ref = build_kernels(a, dxi), oracle_kernels(a, dxi)
        worst = max(worst, max(np.abs(x - y).max() for x, y in zip(ks.arrays(), ref.arrays())))
    assert verdict(record, 3, worst <= TOL, f"max entrywise |shooting - sparse solve| = {worst:.2e} (tol {TOL:g})")


# 4 -------------------------------------------------------------------------
@pytest.mark.slow
def test_c4_conservation(record):
    grid = Grid(600, 0.05, -13.0)
    st = peakon_pair(1.0, -2.5, 2.5, 0.0, grid)
    t0 = time.perf_counter()
    tr = simulate(SimConfig(dt=1e-3, t_end=2.0, mode="resolve", output_every=50), st)
    elapsed = time.perf_counter() - t0
    H_inf, H_prim, I = tr.column("H_inf"), tr.column("H_prim"), tr.column("I")
    H0 = H_inf[0]
    dH = max(np.abs(H_inf - H0).max(), np.abs(H_prim - H_prim[0]).max()) / H0
    dI = np.abs(I - I[0]).max() / max(abs(I[0]), H0)
    bid = tr.column("residB").max()
    tolB = 1e-6 * (1 + H0) ** 2
    ok = tr.aborted is None and dH <= 1e-5 and dI <= 1e-5 and bid <= tolB and elapsed < 120
    assert verdict(record, 4, ok,
                   f"H drift {dH:.1e} (1e-5), I drift {dI:.1e} (1e-5), energy identity {bid:.1e} "
                   f"(1e-6(1+H)^2 = {tolB:.1e}), n=600 in {elapsed:.1f}s (< 120s)")


# 5 -------------------------------------------------------------------------
def test_c5_mode_cross_check(record):
    st = gaussian_state(Grid(128, 0.2, -12.8))
    runs = {m: simulate(SimConfig(dt=0.01, t_end=0.5, mode=m, keep_kernels=True), st)
            for m in ("propagate", "resolve")}
    p, r = runs["propagate"], runs["resolve"]
    ds = np.abs(p.snapshots[-1].pack() - r.snapshots[-1].pack()).max()
    dk = max(np.abs(x - y).max() for x, y in zip(p.kernels[-1].arrays(), r.kernels[-1].arrays()))
    ok = ds <= 1e-6 and dk <= 1e-5
    assert verdict(record, 5, ok, f"state diff {ds:.1e} (1e-6), kernel diff {dk:.1e} (1e-5)")


# 6 -------------------------------------------------------------------------
@pytest.mark.slow
def test_c6_singularity_behaviour(record):
    # rho0 = 0: amplitude 4, separation 7 collides near t = 1.05
    st = peakon_pair(4.0, -3.5, 3.5, 0.0, Grid(480, 0.2, -14.0))
    tr = simulate(SimConfig(dt=2e-3, t_end=1.5, mode="resolve", output_every=5), st)
    minDy, maxh = tr.column("minDy").min(), tr.column("maxh")
    ratio = maxh.max() / maxh[0]
    ubound = (tr.column("Umax") - np.sqrt(2 * tr.column("H_inf"))).max()
    # rho0 = 1: unit pair, one refinement
    cs = []
    for dxi in (0.1, 0.05):
        n = int(round(30 / dxi))
        s1 = peakon_pair(1.0, -2.5, 2.5, 1.0, Grid(n, dxi, -12.0))
        t1 = simulate(SimConfig(dt=5e-3, t_end=7.0, mode="resolve", output_every=5), s1)
        assert t1.aborted is None
        cs.append(t1.column("minDy").min())
    rel = abs(cs[0] - cs[1]) / cs[1]
    ok = (tr.aborted is None and minDy < 1e-2 and ratio >= 10 and ubound <= 1e-6
          and min(cs) >= 1e-2 and rel <= 0.1)
    assert verdict(record, 6, ok,
                   f"rho0=0: min D+y {minDy:.1e} (< 1e-2), max h ratio {ratio:.1f} (>= 10), "
                   f"max(|U|-sqrt(2H)) {ubound:.2f} (<= 1e-6); rho0=1: min D+y {cs[0]:.4f} -> {cs[1]:.4f} "
                   f"(>= 1e-2, change {rel:.1%} <= 10%)")


# 7 -------------------------------------------------------------------------
def test_c7_atom_initial_data(record):
    MASS = 0.4
    grid = Grid(400, 0.05, -10.0)
    init = EulerianInit(u0=gaussian(0.5, 0.0, 1.0), support=(-6.0, 6.0),
                        mu_sing=AtomicMeasure(((0.5, MASS),)))
    st = lagrangian_from_eulerian(init, grid)
    flat = st.Dy <= 1e-12
    plateau = flat.sum() * grid.dxi
    h_flat = st.h[flat]
    resid = validate_setB(st).bid_residual
    ok = abs(plateau - MASS) <= 2 * grid.dxi and np.allclose(h_flat, 0.5, atol=1e-12) and resid <= 1e-10
    assert verdict(record, 7, ok,
                   f"plateau length {plateau:.3f} ({MASS} +- {2 * grid.dxi:g}), h on plateau "
                   f"{h_flat.min():.12f}..{h_flat.max():.12f} (1/2), set-B residual {resid:.1e} (1e-10)")


# 8 -------------------------------------------------------------------------
def test_c8_self_convergence(record):
    finals = []
    for dxi in (0.2, 0.1, 0.05):
        grid = Grid(int(round(28 / dxi)), dxi, -14.0)
        tr = simulate(SimConfig(dt=0.01, t_end=1.0, mode="resolve", output_every=10 ** 6), gaussian_state(grid))
        assert tr.aborted is None
        finals.append(tr.snapshots[-1])
    d = [e_norm_distance(finals[0], finals[1]), e_norm_distance(finals[1], finals[2])]
    order = np.log2(d[0] / d[1])
    ok = d[1] < d[0] and order >= 0.8
    assert verdict(record, 8, ok, f"E-norm distances {d[0]:.3e} > {d[1]:.3e}, order {order:.2f} (>= 0.8)")


# 9 -------------------------------------------------------------------------
def test_c9_young_inequality(record):
    rng = np.random.default_rng(9)
    triples = [(2.0, 2.0, 1.0), (np.inf, 2.0, 2.0), (np.inf, 1.0, np.inf)]
    worst = np.inf
    for _ in range(100):
        n = int(rng.integers(8, 64))
        dxi = float(rng.uniform(0.05, 1.0))
        if rng.random() < 0.5:
            K = build_kernels(rng.uniform(0, 3, n), dxi).arrays()[int(rng.integers(4))]
        else:
            K = rng.normal(size=(n, n))
        f = rng.normal(size=n)
        for r, p, q in triples:
            lhs, rhs = young_bound(K, f, dxi, r, p, q)
            worst = min(worst, rhs - lhs)
    assert verdict(record, 9, worst >= 0, f"min slack over 300 checks {worst:.3e} (>= 0)")


# 10 ------------------------------------------------------------------------
def test_c10_rk4_order(record):
    st = gaussian_state(Grid(128, 0.2, -12.8))
    run = lambda dt: simulate(SimConfig(dt=dt, t_end=1.0, mode="resolve", output_every=10 ** 6), st).snapshots[-1].pack()
    ref = run(0.003125)
    dts = (0.1, 0.05, 0.025, 0.0125)
    errs = np.array([np.abs(run(dt) - ref).max() for dt in dts])
    orders = np.log2(errs[:-1] / errs[1:])
    ok = bool(np.all(np.abs(orders - 4) <= 0.4))
    assert verdict(record, 10, ok, f"observed orders {np.round(orders, 3).tolist()} (4 +- 10%)")
