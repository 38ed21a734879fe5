import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellipq import EllipticParams, ThetaEngine, fundamental_r, rblock
from ellipq.errors import InvarianceViolated, MethodUnavailable, PoleProximity
from ellipq.rmatrix import (RProvider, closed_block, dybe_residual, invariance_leak, r_one_block,
                            r_one_lambda, reduce_to_L, sign_reversal_residual, unitarity_residual,
                            verify_property, z_limit_residual, zero_weight_residual)
from ellipq.tensor import flip_op

L, M = 0.7 + 0.2j, 1.3 - 0.1j
Z, LAM = 0.21 + 0.08j, 0.17 - 0.11j

# closed-form entries at (L, M, Z, LAM), tau = 0.1 + i, eta = 0.13 + 0.02i, from mpmath at 30 digits
GOLD_M1 = np.array([
    [-0.153290497526586252 - 3.43203804990672739j, 1.15321751840173603 + 3.44046899045236754j],
    [2.75013813497655852 - 2.971725124901761j, -1.75965607309357367 + 2.97085890763418644j],
])
GOLD_ALPHA = {1: -0.659833530580968142 - 5.32262968057263181j, -1: -2.35925451539866782 + 1.8385864187625331j}
GOLD_BETA = {1: 1.66757988403977598 + 5.33405143193168353j, -1: 3.35405387796347351 - 1.83988109029671406j}

P4 = np.eye(4)[[0, 2, 1, 3]]


def test_block_zero(engine):
    for method in ("residue", "closed"):
        assert rblock(engine, L, M, Z, LAM, 0, method).entries.tolist() == [[1]]


def test_closed_m1_golden(engine):
    blk = closed_block(engine, L, M, Z, LAM, 1)
    assert blk.index == [(0, 1), (1, 0)]
    assert np.abs(blk.entries - GOLD_M1).max() < 1e-12 * np.abs(GOLD_M1).max()


def test_residue_m1_golden(engine):
    blk = rblock(engine, L, M, Z, LAM, 1)
    assert (np.abs(blk.entries - GOLD_M1) / np.abs(GOLD_M1)).max() < 1e-8
    assert blk.entry((0, 1), (1, 0)) == blk.entries[0, 1]


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**31))
def test_residue_vs_closed_random(seed):
    rng = np.random.default_rng(seed)
    eng = ThetaEngine(EllipticParams(0.1 + 1j, 0.13 + 0.02j))
    Lr, Mr = (complex(*rng.uniform(-1.5, 1.5, 2)) for _ in range(2))
    z, lam = complex(*rng.uniform(-0.4, 0.4, 2)), complex(*rng.uniform(-0.5, 0.5, 2))
    a = rblock(eng, Lr, Mr, z, lam, 1).entries
    b = rblock(eng, Lr, Mr, z, lam, 1, "closed").entries
    assert np.abs(a - b).max() < 1e-8 * np.abs(b).max()


def test_fundamental_golden(engine):
    R = fundamental_r(engine, Z, LAM)
    for s, (i, j) in ((1, (1, 1)), (-1, (2, 2))):
        assert abs(R[i, j] - GOLD_ALPHA[s]) < 1e-12 * abs(GOLD_ALPHA[s])
    for s, (i, j) in ((1, (1, 2)), (-1, (2, 1))):
        assert abs(R[i, j] - GOLD_BETA[s]) < 1e-12 * abs(GOLD_BETA[s])


def test_fundamental_at_zero_is_flip(engine):
    assert (fundamental_r(engine, 0, LAM) == P4).all()
    assert np.abs(fundamental_r(engine, 1e-12, LAM) - P4).max() < 1e-10


def test_fundamental_pole(engine):
    with pytest.raises(PoleProximity):
        fundamental_r(engine, Z, 0.0)


def test_fundamental_unitarity(engine):
    R = fundamental_r(engine, Z, LAM) @ P4 @ fundamental_r(engine, -Z, LAM) @ P4
    assert np.abs(R - np.eye(4)).max() < 1e-9


@pytest.mark.parametrize("d", [0, 1, 2])
def test_rblock_reduces_to_fundamental(engine, d):
    blk = reduce_to_L(rblock(engine, 1, 1, Z, LAM, d), 1, 1)
    sel = {0: [0], 1: [1, 2], 2: [3]}[d]
    want = fundamental_r(engine, Z, LAM)[np.ix_(sel, sel)]
    assert np.abs(blk.entries - want).max() < 1e-8


def test_r11_is_one(engine):
    blk = reduce_to_L(rblock(engine, 1, 1, Z, LAM, 2), 1, 1)
    assert blk.index == [(1, 1)]
    assert abs(blk.entries[0, 0] - 1) < 1e-8
    assert rblock(engine, 1, 1, Z, LAM, 2, "closed").entries[0, 0] == 1


def test_one_lambda_k0(engine):
    assert abs(r_one_lambda(engine, M, Z, LAM, 0).same0 - 1) < 1e-14


@pytest.mark.parametrize("d", [1, 2, 3])
def test_one_lambda_vs_residue(engine, d):
    want = r_one_block(engine, M, Z, LAM, d)
    got = reduce_to_L(rblock(engine, 1, M, Z, LAM, d), 1, None)
    assert np.abs(got.entries - want).max() < 1e-8 * np.abs(want).max()


def test_one_lambda_unit_weight_is_fundamental(engine):
    R = fundamental_r(engine, Z, LAM)
    assert np.abs(r_one_block(engine, 1, Z, LAM, 1) - R[1:3, 1:3]).max() < 1e-12


def test_reduce_invariance(engine):
    blk = rblock(engine, 1, M, Z, LAM, 2)
    assert invariance_leak(blk, (1, None)) < 1e-8
    assert reduce_to_L(blk, 1, None).index == [(0, 2), (1, 1)]


def test_reduce_needs_integer(engine):
    with pytest.raises(MethodUnavailable):
        reduce_to_L(rblock(engine, L, M, Z, LAM, 1), None, None)


def test_reduce_detects_coupling(engine):
    blk = rblock(engine, L, M, Z, LAM, 2)
    with pytest.raises(InvarianceViolated):
        reduce_to_L(blk, 1, None)


def test_closed_unavailable(engine):
    with pytest.raises(MethodUnavailable):
        rblock(engine, L, M, Z, LAM, 2, "closed")
    with pytest.raises(MethodUnavailable):
        rblock(engine, L, M, Z, LAM, 1, "bogus")


@pytest.mark.parametrize("m", [1, 2])
def test_dybe(engine, m):
    assert dybe_residual(engine, [L, M, 0.4 - 0.3j], 0.13 - 0.05j, -0.22 + 0.1j, LAM, m) < 1e-8


@pytest.mark.parametrize("m", [1, 2])
def test_unitarity(engine, m):
    assert unitarity_residual(engine, L, M, Z, LAM, m) < 1e-9


def test_zero_weight(engine):
    assert zero_weight_residual(engine, L, M, Z, LAM, 2) < 1e-12


@pytest.mark.parametrize("m", [1, 2])
def test_sign_reversal(engine, m):
    assert sign_reversal_residual(engine, L, M, Z, LAM, m) < 1e-9


@pytest.mark.parametrize("m", [1, 2])
def test_z_limit(engine, m):
    assert z_limit_residual(engine, L, LAM, m) < 1e-4
    at = rblock(engine, L, L, 0, LAM, m).entries
    assert np.abs(at - flip_op(m)).max() < 1e-8


@pytest.mark.parametrize("kind", ["dybe", "unitarity", "zero_weight", "sign_reversal", "z_limit",
                                  "invariant_subspace"])
def test_verify_property(engine, kind):
    out = verify_property(kind, engine, seed=11, m=1)
    assert out["kind"] == kind
    assert out["residual"] < 1e-4 if kind == "z_limit" else out["residual"] < 1e-8


def test_verify_property_unknown(engine):
    with pytest.raises(ValueError):
        verify_property("nope", engine)


def test_provider_closed_matches_residue(engine):
    a = RProvider(engine).op(L, M, Z)(1, LAM)
    b = RProvider(engine, "closed").op(L, M, Z)(1, LAM)
    assert np.abs(a - b).max() < 1e-8 * np.abs(b).max()


def test_provider_coinciding_unit_weights(engine):
    got = RProvider(engine).op(1, 1, 0, (1, 1))(1, LAM)
    assert (got == P4[1:3, 1:3]).all()
