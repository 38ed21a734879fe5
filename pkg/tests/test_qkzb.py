import cmath

import numpy as np
import pytest

from conftest import ETA, TAU
from ellipq import EllipticParams, ModelConfig, OmegaEvaluator
from ellipq.bethe import solution_from_root
from ellipq.diffop import weight_space
from ellipq.errors import ConfigError
from ellipq.qkzb import (JacksonIntegrand, integrand_eval, jackson_sum, jackson_sum_diagnostic, phi_i, q_apply,
                         rho, small_step_order, verify_phase_shift, verify_q_product, xi_bookkeeping_residual)

LAM = 0.17 - 0.11j
T2 = [0.21 + 0.17j, -0.33 + 0.08j]


def xi_exp(x):
    return cmath.exp(0.3 * x)


def h_test(t):
    return np.sin(t[0]) * np.cos(t[1]) + t[0] * t[1] ** 2


def test_needs_step(cfg_generic):
    cfg = cfg_generic.replace(elliptic=EllipticParams(TAU, ETA))
    with pytest.raises(ConfigError):
        JacksonIntegrand(cfg)
    with pytest.raises(ConfigError):
        JacksonIntegrand(cfg_generic.replace(elliptic=EllipticParams(TAU, ETA, 0.3 - 0.1j)))


def test_m0_integrand_is_one(cfg2):
    assert integrand_eval(JacksonIntegrand(cfg2), [], None, LAM).tolist() == [1]


def test_factorization(cfg_generic):
    J = JacksonIntegrand(cfg_generic, xi_exp)
    ev = OmegaEvaluator(cfg_generic)
    basis = weight_space(cfg_generic, 1).basis
    t = T2[:1]
    x = xi_exp(J.xi_argument(t, cfg_generic.z, LAM))
    want = J.phase(t) * x * np.array([ev.multi(c, t, LAM) for c in basis])
    got = J(t, None, LAM)
    assert np.abs(got - want).max() < 1e-14 * np.abs(want).max()


def test_xi_swap(cfg_generic):
    # swapping xi only rescales the integrand by the ratio of the two xi values
    t = T2[:1]
    a, b = JacksonIntegrand(cfg_generic), JacksonIntegrand(cfg_generic, xi_exp)
    ratio = xi_exp(a.xi_argument(t, cfg_generic.z, LAM))
    assert np.abs(b(t, None, LAM) - ratio * a(t, None, LAM)).max() < 1e-13 * np.abs(b(t, None, LAM)).max()


def test_phase_product_structure(cfg_generic):
    J = JacksonIntegrand(cfg_generic)
    t = T2
    want = 1.0 + 0j
    for tj in t:
        for z, a in zip(cfg_generic.z, cfg_generic.a):
            want *= J.phase1(a)(tj - z)
    want *= J.phase1(-2 * cfg_generic.eta)(t[0] - t[1])
    assert abs(J.phase(t) - want) < 1e-14 * abs(want)


def test_phase_shift_m1_n1(params):
    cfg = ModelConfig(params, (2,), (0.1 + 0.05j,))
    J = JacksonIntegrand(cfg)
    assert verify_phase_shift(J, T2[:1], cfg.z, 1) < 1e-10


@pytest.mark.parametrize("j", [1, 2])
def test_phase_shift_m2_n2(cfg_generic, j):
    J = JacksonIntegrand(cfg_generic)
    assert verify_phase_shift(J, T2, cfg_generic.z, j) < 1e-10


def test_phase_shift_bad_site(cfg_generic):
    with pytest.raises(ValueError):
        verify_phase_shift(JacksonIntegrand(cfg_generic), T2, cfg_generic.z, 3)


def test_rho_direct(cfg_generic):
    J = JacksonIntegrand(cfg_generic)
    z = list(cfg_generic.z)
    moved = [z[0] + J.p, z[1]]
    direct = J.phase(T2, moved) / J.phase(T2, z)
    assert abs(rho(J, T2, z, 1) - direct) < 1e-10 * abs(direct)


def test_rho_trivial_weight(params):
    cfg = ModelConfig(params, (0, 2), (0.1 + 0.05j, 0.43 - 0.12j))
    J = JacksonIntegrand(cfg)
    assert abs(rho(J, T2, cfg.z, 1) - 1) < 1e-15


@pytest.mark.parametrize("mprime", [0, 1, 2])
def test_q_product(cfg_generic, mprime):
    assert verify_q_product(JacksonIntegrand(cfg_generic), h_test, mprime, T2) < 1e-9


def test_q_product_range(cfg_generic):
    with pytest.raises(ValueError):
        verify_q_product(JacksonIntegrand(cfg_generic), h_test, 3, T2)


def test_q_single(cfg_generic):
    J = JacksonIntegrand(cfg_generic)
    got = q_apply(J, 2, h_test)(T2)
    want = h_test([T2[0], T2[1] + J.p]) * phi_i(J, T2, 2)
    assert abs(got - want) < 1e-14 * abs(want)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_xi_bookkeeping(cfg_generic, k):
    J = JacksonIntegrand(cfg_generic, xi_exp)
    assert xi_bookkeeping_residual(J, T2, k, LAM) < 1e-10


def test_jackson_sum_terms(cfg2):
    J = JacksonIntegrand(cfg2)
    t0 = [0.21 + 0.17j]
    total, skipped = jackson_sum(J, t0, 1, cfg2.z, LAM)
    want = sum(J([t0[0] + J.p * s], None, LAM) for s in (-1, 0, 1))
    assert skipped == 0
    assert np.abs(total - want).max() < 1e-12 * np.abs(want).max()


def test_jackson_diagnostic(cfg2):
    rep = jackson_sum_diagnostic(JacksonIntegrand(cfg2), [0.21 + 0.17j], 2, LAM)
    assert rep.K == [0, 1, 2]
    assert len(rep.residual) == 3 and all(np.isfinite(rep.residual))


def test_jackson_limit(cfg2):
    with pytest.raises(ConfigError):
        jackson_sum_diagnostic(JacksonIntegrand(cfg2), [0.21 + 0.17j], 7, LAM)


def test_small_step_order(cfg2):
    sol = solution_from_root(cfg2, 0.21 + 0.17j)
    devs, order = small_step_order(cfg2, sol, 2)
    assert devs[1] < devs[0]
    # K_j(p) is analytic in p with K_j(0) = H_j, so the deviation is at least first order
    assert order > 0.8
