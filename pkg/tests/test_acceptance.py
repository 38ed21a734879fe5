"""Acceptance criteria 1-12, each at its stated tolerance and runtime budget.

Every test prints one ``PASS criterion N`` or ``FAIL criterion N`` line; the lines are repeated
in the terminal summary of the pytest run.
"""
import cmath
import math
import time
from math import comb

import numpy as np

from conftest import ACCEPTANCE_LINES, product_theta
from ellipq import (ContourSpec, EllipticParams, ModelConfig, OmegaEvaluator, PhaseEvaluator, ThetaEngine,
                    enumerate_compositions, fundamental_r, rblock)
from ellipq.aba import aba_transfer_verify, comparison_residual, from_shifted, to_shifted
from ellipq.bethe import (CompletenessTask, asymptotic_start, bethe_solve, bethe_verify, completeness_det,
                          solution_from_root)
from ellipq.diffop import (build_H, build_K, build_T, commutator_residual, flatness_residual, op_equal,
                           verify_exchange)
from ellipq.omega import evaluation_matrix
from ellipq.qkzb import (JacksonIntegrand, jackson_sum_diagnostic, verify_phase_shift, verify_q_product,
                         xi_bookkeeping_residual)
from ellipq.residues import diagonal_formula, pairing_matrix, res_resonance
from ellipq.rmatrix import (RProvider, closed_block, invariance_leak, reduce_to_L, sign_reversal_residual,
                            unitarity_residual, verify_property, z_limit_residual, zero_weight_residual)

TAU = 0.1 + 1j
ETA = 0.13 + 0.02j
P = 0.05 + 0.7j
E = EllipticParams(TAU, ETA, P)
Z3 = (0.1 + 0.05j, 0.43 - 0.12j, -0.27 + 0.2j)
LAM = 0.17 - 0.11j


def report(n, checks, elapsed, budget):
    """checks: list of (label, value, bound); passes iff every value <= bound and the budget holds."""
    bad = [f"{label}={value:.3g}>{bound:g}" for label, value, bound in checks if not value <= bound]
    if elapsed > budget:
        bad.append(f"runtime {elapsed:.1f}s>{budget:g}s")
    worst = ", ".join(f"{label}={value:.2e}" for label, value, _ in checks)
    line = f"{'FAIL' if bad else 'PASS'} criterion {n}: {worst}; {elapsed:.2f}s" + (f" [{'; '.join(bad)}]" if bad else "")
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)
    assert not bad, bad


def local_scale(eng, t):
    s, _, n = eng.reduce(t)
    return abs(eng.theta_prime0) * abs(np.exp(-2j * np.pi * n * s - 1j * np.pi * n * n * eng.tau))


def test_criterion_01_theta():
    start = time.perf_counter()
    eng = ThetaEngine(E)
    rng = np.random.default_rng(2024)
    prod, qp1, qptau = 0.0, 0.0, 0.0
    for _ in range(100):
        t = complex(rng.uniform(-1, 1), rng.uniform(-1, 1) * TAU.imag)
        v = eng(t)
        # the product formula is only used where its truncation is accurate: the fundamental strip
        s = eng.reduce(t)[0]
        prod = max(prod, abs(eng(s) - product_theta(s, TAU)) / max(abs(eng(s)), local_scale(eng, s)))
        qp1 = max(qp1, abs(eng(t + 1) + v) / max(abs(v), local_scale(eng, t)))
        mult = cmath.exp(-2j * math.pi * t - 1j * math.pi * TAU)
        qptau = max(qptau, abs(eng(t + TAU) + mult * v) / max(abs(mult * v), local_scale(eng, t + TAU)))
    report(1, [("series_vs_product", prod, 1e-12), ("qp_1", qp1, 1e-12), ("qp_tau", qptau, 1e-12)],
           time.perf_counter() - start, 1.0)


def test_criterion_02_closed_forms():
    start = time.perf_counter()
    eng = ThetaEngine(E)
    L, M, Z = 0.7 + 0.2j, 1.3 - 0.1j, 0.21 + 0.08j
    r00 = abs(rblock(eng, L, M, Z, LAM, 0).entries[0, 0] - 1)
    res = rblock(eng, L, M, Z, LAM, 1).entries
    closed = closed_block(eng, L, M, Z, LAM, 1).entries
    m1 = float((np.abs(res - closed) / np.abs(closed)).max())
    r11 = abs(reduce_to_L(rblock(eng, 1, 1, Z, LAM, 2), 1, 1).entries[0, 0] - 1)
    r11_closed = abs(rblock(eng, 1, 1, Z, LAM, 2, "closed").entries[0, 0] - 1)
    report(2, [("R00", r00, 0.0), ("m1_entries", m1, 1e-8), ("R11_residue", r11, 1e-8), ("R11_closed", r11_closed, 0.0)],
           time.perf_counter() - start, 10.0)


def test_criterion_03_fundamental():
    start = time.perf_counter()
    eng = ThetaEngine(E)
    Z = 0.21 + 0.08j
    worst = 0.0
    for d, sel in ((0, [0]), (1, [1, 2]), (2, [3])):
        blk = reduce_to_L(rblock(eng, 1, 1, Z, LAM, d), 1, 1)
        want = fundamental_r(eng, Z, LAM)[np.ix_(sel, sel)]
        worst = max(worst, float(np.abs(blk.entries - want).max()))
    flip = np.eye(4)[[0, 2, 1, 3]]
    exact = float(np.abs(fundamental_r(eng, 0, LAM) - flip).max())
    report(3, [("reduced_vs_alpha_beta", worst, 1e-8), ("R(0)-P", exact, 0.0)], time.perf_counter() - start, 5.0)


def test_criterion_04_properties():
    start = time.perf_counter()
    eng = ThetaEngine(E)
    dybe = max(verify_property("dybe", eng, seed=s, m=m)["residual"] for s in range(10) for m in (1, 2))
    L, M, Z = 0.7 + 0.2j, 1.3 - 0.1j, 0.21 + 0.08j
    unit = max(unitarity_residual(eng, L, M, Z, LAM, m) for m in (1, 2))
    zw = max(zero_weight_residual(eng, L, M, Z, LAM, m) for m in (1, 2))
    sign = max(sign_reversal_residual(eng, L, M, Z, LAM, m) for m in (1, 2))
    zlim = max(z_limit_residual(eng, L, LAM, m) for m in (1, 2))
    report(4, [("dybe", dybe, 1e-8), ("unitarity", unit, 1e-9), ("zero_weight", zw, 1e-12),
               ("sign_reversal", sign, 1e-9), ("z_limit", zlim, 1e-4)], time.perf_counter() - start, 120.0)


def test_criterion_05_residue_pairing():
    start = time.perf_counter()
    Ls = (0.7 + 0.2j, 1.3 - 0.1j, 0.4)
    tri, diag, halving = 0.0, 0.0, 0.0
    for n in (1, 2, 3):
        cfg = ModelConfig(E, Ls[:n], Z3[:n])
        for m in (1, 2, 3):
            pm = pairing_matrix(cfg, m, LAM)
            tri = max(tri, pm.triangularity_residual())
            for i, c in enumerate(pm.rows):
                want = diagonal_formula(cfg, c, LAM)
                diag = max(diag, abs(pm.entries[i, i] - want) / abs(want))
            small = pairing_matrix(cfg, m, LAM, ContourSpec(radius=5e-3)).entries
            halving = max(halving, float(np.abs(pm.entries - small).max() / np.abs(pm.entries).max()))
    report(5, [("triangularity", tri, 1e-8), ("diagonal", diag, 1e-8), ("halving", halving, 1e-9)],
           time.perf_counter() - start, 120.0)


def test_criterion_06_resonance():
    start = time.perf_counter()
    eng = ThetaEngine(E)
    M, Z = 1.3 - 0.1j, 0.21 + 0.08j
    leak = 0.0
    for L in (1, 2):
        for m in range(L + 1, L + 3):
            leak = max(leak, invariance_leak(rblock(eng, L, M, Z, LAM, m), (L, None)))
    vanish = 0.0
    for L in (1, 2):
        m = L + 1
        cfg = ModelConfig(E, (L, M), Z3[:2])
        ev = OmegaEvaluator(cfg)
        rest = [0.21 - 0.3j][: m - L - 1]

        def res(comp):
            return res_resonance(ev.function(comp, LAM), cfg.z[0] + cfg.a[0], L, m, cfg.eta, TAU)(rest)

        vals = {c: abs(res(c)) for c in enumerate_compositions(2, m)}
        scale = max(vals.values())
        vanish = max(vanish, max(v for c, v in vals.items() if c[0] <= L) / scale)
    report(6, [("quotient_coupling", leak, 1e-8), ("resonance_vanishing", vanish, 1e-8)],
           time.perf_counter() - start, 60.0)


def test_criterion_07_operators():
    start = time.perf_counter()
    prov = RProvider(ThetaEngine(E))
    cfg2 = ModelConfig(E, (1, 1), Z3[:2])
    cfg3 = ModelConfig(E, (1, 1, 2), Z3)
    one2 = ModelConfig(E, (2,), Z3[:1], truncate=True)
    gen3 = ModelConfig(E, (0.7 + 0.2j, 1.3 - 0.2j, 2), Z3)
    w1, w2 = 0.31 - 0.07j, -0.18 + 0.22j
    hc = 0.0
    for cfg in (cfg2, cfg3, gen3):
        Hs = [build_H(cfg, j, prov) for j in range(1, cfg.n + 1)]
        hc = max([hc] + [commutator_residual(Hs[i], Hs[j]) for i in range(cfg.n) for j in range(i + 1, cfg.n)])
    tc = max(commutator_residual(build_T(c, w1, prov), build_T(c, w2, prov)) for c in (cfg2, one2))
    ht = max(op_equal(build_H(cfg2, j, prov), build_T(cfg2, cfg2.z[j - 1], prov)) for j in (1, 2))
    ex = max([verify_exchange(cfg2, 1, prov)] + [verify_exchange(gen3, j, prov) for j in (1, 2)])
    fl = max([flatness_residual(cfg2, 1, 2, prov)] + [flatness_residual(cfg3, i, j, prov)
                                                     for i, j in ((1, 2), (1, 3), (2, 3))])
    kh = max(op_equal(build_K(c, j, 0, prov), build_H(c, j, prov)) for c in (cfg2, cfg3) for j in range(1, c.n + 1))
    report(7, [("H_commute", hc, 1e-8), ("T_commute", tc, 1e-8), ("H_minus_T", ht, 1e-8), ("exchange", ex, 1e-8),
               ("flatness", fl, 1e-8), ("K_p0_minus_H", kh, 1e-10)], time.perf_counter() - start, 180.0)


def test_criterion_08_bethe():
    start = time.perf_counter()
    cfg2 = ModelConfig(E, (1, 1), Z3[:2])
    cfg3 = ModelConfig(E, (1, 1, 2), Z3)
    sols = [(cfg2, solution_from_root(cfg2, 0.21 + 0.17j))]
    sols += [(cfg3, s) for s in bethe_solve(cfg3, 6.0, [asymptotic_start(cfg3, (1, 1, 0))])]
    assert len(sols) == 2
    bres, eig, mult, pair = 0.0, 0.0, 0.0, 0.0
    for cfg, sol in sols:
        rep = bethe_verify(cfg, sol, 5)
        bres = max(bres, sol.residual)
        eig = max([eig] + rep.eigen)
        mult = max(mult, rep.multiplier)
        pair = max(pair, rep.pairing)
    report(8, [("bethe_residual", bres, 1e-10), ("eigenfunction", eig, 1e-7), ("multiplier", mult, 1e-10),
               ("pairing_identity", pair, 1e-8)], time.perf_counter() - start, 120.0)


def test_criterion_09_completeness():
    start = time.perf_counter()
    task = CompletenessTask(3, math.exp(10))
    cfg = ModelConfig(EllipticParams(TAU, task.eta), (1, 1), Z3[:2])
    rep = completeness_det(task, cfg)
    count_off = abs(len(rep.solutions) - 6) + abs(rep.expected - 6)
    report(9, [("solution_count_offset", count_off, 0), ("inverse_normalized_det", 1 / rep.det_normalized, 1e6),
               ("inverse_vandermonde", 1 / abs(rep.vandermonde), 1.0)], time.perf_counter() - start, 120.0)


def test_criterion_10_aba():
    start = time.perf_counter()
    cfg2 = ModelConfig(E, (1, 1), Z3[:2])
    gen = ModelConfig(E, (0.7 + 0.2j, 1.3 - 0.1j), Z3[:2])
    t = [0.21 + 0.17j, -0.33 + 0.08j]
    comp = max(comparison_residual(c, t[:m], 0.4 + 0.2j, LAM) for c in (cfg2, gen) for m in (1, 2))
    cfg3 = ModelConfig(E, (1, 1, 2), Z3)
    sols = [(cfg2, solution_from_root(cfg2, 0.21 + 0.17j))]
    sols += [(cfg3, s) for s in bethe_solve(cfg3, 6.0, [asymptotic_start(cfg3, (1, 1, 0))])]
    tr, rt = 0.0, 0.0
    for cfg, sol in sols:
        s, c = to_shifted(cfg, sol)
        tr = max(tr, aba_transfer_verify(cfg, s, c, 5).eigen)
        back = from_shifted(cfg, s, c)
        rt = max(rt, float(np.abs(np.array(back.t) - sol.t).max()) + abs(back.c - sol.c))
    report(10, [("comparison", comp, 1e-8), ("transfer_eigen", tr, 1e-8), ("round_trip", rt, 1e-14)],
           time.perf_counter() - start, 120.0)


def test_criterion_11_qkzb():
    start = time.perf_counter()
    eng = ThetaEngine(E)
    rng = np.random.default_rng(11)
    rel = 0.0
    for _ in range(20):
        a = complex(*rng.uniform(-0.3, 0.3, 2))
        t = complex(*rng.uniform(-0.5, 0.5, 2))
        ph = PhaseEvaluator(E, a)
        want = eng(t + a) / eng(t - a)
        rel = max(rel, abs(ph(t + P) / ph(t) - want) / abs(want))
    gen = ModelConfig(E, (0.7 + 0.2j, 1.3 - 0.1j), Z3[:2])
    J = JacksonIntegrand(gen, lambda x: cmath.exp(0.3 * x))
    t = [0.21 + 0.17j, -0.33 + 0.08j]
    rho = max(verify_phase_shift(J, t[:m], gen.z, j) for m in (1, 2) for j in (1, 2))
    h = lambda s: np.sin(s[0]) * np.cos(s[1]) + s[0] * s[1] ** 2
    qp = max(verify_q_product(J, h, k, t) for k in (0, 1, 2))
    xi = max(xi_bookkeeping_residual(J, t, k, LAM) for k in (0, 1, 2))
    cfg2 = ModelConfig(E, (1, 1), Z3[:2])
    diag = jackson_sum_diagnostic(JacksonIntegrand(cfg2), [0.21 + 0.17j], 2, LAM)
    print(f"\njackson diagnostic (no gate): {diag.residual}")
    report(11, [("phase_relation", rel, 1e-10), ("rho_shift", rho, 1e-10), ("q_product", qp, 1e-9),
                ("xi_bookkeeping", xi, 1e-10)], time.perf_counter() - start, 60.0)


def test_criterion_12_rank():
    start = time.perf_counter()
    Ls = (0.7 + 0.2j, 1.3 - 0.1j, 0.4)
    worst_gap = math.inf
    for n in (1, 2, 3):
        cfg = ModelConfig(E, Ls[:n], Z3[:n])
        ev = OmegaEvaluator(cfg)
        for m in (1, 2, 3):
            comps = enumerate_compositions(n, m)
            assert len(comps) == comb(n + m - 1, m)
            s = np.linalg.svd(evaluation_matrix(ev, comps, LAM, 3 * len(comps), seed=5), compute_uv=False)
            worst_gap = min(worst_gap, s[-1] / s[0])
    report(12, [("inverse_sv_gap", 1 / worst_gap, 1e8)], time.perf_counter() - start, 60.0)
