"""Dynamical R-matrices R_{Lambda,M}(z, lambda) on weight blocks of V_Lambda (x) V_M.

Matrix convention: R e_i (x) e_j = sum R^{kl}_{ij} e_k (x) e_l, stored with row
(k, l) and column (i, j), both ordered lexicographically.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .elliptic import EllipticParams, ThetaEngine
from .errors import InvarianceViolated, MethodUnavailable, PoleProximity, SingularConfiguration, SingularPairing
from .model import Composition, ModelConfig, enumerate_compositions, integer_value, lattice_distance
from .omega import OmegaEvaluator
from .residues import ContourSpec, res_iterated, res_tilde
from .tensor import BlockSpace, flip_op

COND_LIMIT = 1e10


@dataclass
class WeightBlockMatrix:
    m: int
    index: list[Composition]
    entries: np.ndarray
    cond: float = 1.0

    def entry(self, upper: Composition, lower: Composition) -> complex:
        """R^{upper}_{lower}."""
        return self.entries[self.index.index(tuple(upper)), self.index.index(tuple(lower))]


def _two_point(engine: ThetaEngine, L1, L2, z1, z2) -> ModelConfig:
    return ModelConfig(engine.params, (L1, L2), (z1, z2), generic_guard=False, engine=engine)


def _coinciding(engine: ThetaEngine, zdiff: complex) -> bool:
    return lattice_distance(zdiff, engine.tau) < 1e-12


@lru_cache(maxsize=20000)
def _residue_block(engine: ThetaEngine, L: complex, M: complex, zdiff: complex, lam: complex, m: int,
                   spec: ContourSpec) -> tuple[np.ndarray, float]:
    comps = enumerate_compositions(2, m)
    direct = OmegaEvaluator(_two_point(engine, L, M, zdiff, 0j))
    swapped = OmegaEvaluator(_two_point(engine, M, L, 0j, zdiff))
    cfg = direct.config
    if _coinciding(engine, zdiff):
        if abs(L - M) > 1e-12:
            raise SingularConfiguration("points coincide with different weights")
        a = cfg.a[0]

        def functional(f, j):
            return res_tilde(f, j, m, 0j, a, engine.eta, engine.tau, spec, batch=True)
        rows = list(range(m, -1, -1))
    else:
        def functional(f, alpha):
            return res_iterated(f, alpha, cfg, spec, batch=True)
        rows = comps
    flipped = [(l, k) for (k, l) in comps]
    B = np.array([functional(lambda t: direct.many(comps, t, lam), r) for r in rows])
    Bt = np.array([functional(lambda t: swapped.many(flipped, t, lam), r) for r in rows])
    cond = float(np.linalg.cond(B))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularPairing(f"pairing matrix condition number {cond:.3g}")
    X = np.linalg.solve(B, Bt)
    return X.T.copy(), cond


def closed_block(engine: ThetaEngine, L: complex, M: complex, zdiff: complex, lam: complex, m: int) -> WeightBlockMatrix:
    th = engine
    eta = engine.eta
    if m == 0:
        return WeightBlockMatrix(0, [(0, 0)], np.ones((1, 1), dtype=complex))
    if m == 1:
        a, b = eta * L, eta * M
        z = zdiff
        D = th(z - a - b) * th(lam + 2 * eta * (1 - L))
        r0101 = th(z + a - b) * th(lam + 2 * eta) / D
        r0110 = -th(lam + 2 * eta + z - a - b) * th(2 * a) / D
        r1001 = -th(lam + 2 * eta - z - a - b) * th(2 * b) / D
        r1010 = th(z + b - a) * th(lam + 2 * eta * (1 - L - M)) / D
        return WeightBlockMatrix(1, [(0, 1), (1, 0)], np.array([[r0101, r0110], [r1001, r1010]]))
    if m == 2 and abs(L - 1) < 1e-12 and abs(M - 1) < 1e-12:
        return WeightBlockMatrix(2, [(1, 1)], np.ones((1, 1), dtype=complex))
    raise MethodUnavailable("closed forms exist only for m <= 1, or Lambda = M = 1 with m = 2")


def rblock(engine: ThetaEngine, L: complex, M: complex, zdiff: complex, lam: complex, m: int,
           method: str = "residue", spec: ContourSpec = ContourSpec()) -> WeightBlockMatrix:
    L, M, zdiff, lam = complex(L), complex(M), complex(zdiff), complex(lam)
    if method == "closed":
        return closed_block(engine, L, M, zdiff, lam, m)
    if method != "residue":
        raise MethodUnavailable(f"unknown method {method}")
    index = enumerate_compositions(2, m)
    if m == 0:
        return WeightBlockMatrix(0, index, np.ones((1, 1), dtype=complex))
    entries, cond = _residue_block(engine, L, M, zdiff, lam, m, spec)
    return WeightBlockMatrix(m, index, entries.copy(), cond)


def fundamental_r(engine: ThetaEngine, zdiff: complex, lam: complex) -> np.ndarray:
    """4x4 matrix in the basis 00, 01, 10, 11 of C^2 (x) C^2."""
    th = engine
    eta = engine.eta
    if abs(th(lam)) < 1e-10 * abs(th.theta_prime0):
        raise PoleProximity("theta(lambda) vanishes")

    def alpha(z, l):
        return th(l + 2 * eta) * th(z) / (th(l) * th(z - 2 * eta))

    def beta(z, l):
        return -th(l + z) * th(2 * eta) / (th(l) * th(z - 2 * eta))

    R = np.zeros((4, 4), dtype=complex)
    R[0, 0] = R[3, 3] = 1
    if zdiff == 0:
        # theta(0) = 0 and theta(-2 eta) = -theta(2 eta): alpha = 0, beta = 1
        R[1, 2] = R[2, 1] = 1
        return R
    R[1, 1] = alpha(zdiff, lam)
    R[1, 2] = beta(zdiff, lam)
    R[2, 1] = beta(zdiff, -lam)
    R[2, 2] = alpha(zdiff, -lam)
    return R


@dataclass(frozen=True)
class OneLambdaEntries:
    same0: complex  # R^{0k}_{0k}
    to0: complex    # R^{0,k+1}_{1k}
    to1: complex    # R^{1,k-1}_{0k}
    same1: complex  # R^{1k}_{1k}


def r_one_lambda(engine: ThetaEngine, L: complex, zdiff: complex, lam: complex, k: int) -> OneLambdaEntries:
    th = engine
    eta = engine.eta
    z = zdiff
    den = th(z - (L + 1) * eta) * th(lam)
    if abs(den) < 1e-12 * abs(th.theta_prime0) ** 2:
        raise PoleProximity("R_{1,Lambda} denominator vanishes")
    return OneLambdaEntries(
        same0=th(z - (L + 1 - 2 * k) * eta) * th(lam + 2 * k * eta) / den,
        to0=-th(lam + z - (L - 1 - 2 * k) * eta) * th(2 * eta) / den,
        to1=-th(lam - z - (L + 1 - 2 * k) * eta) * th(2 * (L + 1 - k) * eta) * th(2 * k * eta) / (den * th(2 * eta)),
        same1=th(z - (-L + 1 + 2 * k) * eta) * th(lam - 2 * (L - k) * eta) / den,
    )


def r_one_block(engine: ThetaEngine, L: complex, zdiff: complex, lam: complex, d: int) -> np.ndarray:
    """R_{1,Lambda} on the block of drop d of L_1 (x) V_Lambda, basis (0,d), (1,d-1)."""
    if d == 0:
        return np.ones((1, 1), dtype=complex)
    hi = r_one_lambda(engine, L, zdiff, lam, d)
    lo = r_one_lambda(engine, L, zdiff, lam, d - 1)
    return np.array([[hi.same0, lo.to0], [hi.to1, lo.same1]])


def quotient_mask(index, caps) -> list[bool]:
    return [all(c is None or x <= c for x, c in zip(comp, caps)) for comp in index]


def reduce_to_L(block: WeightBlockMatrix, L_cap: int | None, M_cap: int | None,
                tol: float = 1e-8) -> WeightBlockMatrix:
    if L_cap is None and M_cap is None:
        raise MethodUnavailable("reduction needs an integer weight")
    keep = quotient_mask(block.index, (L_cap, M_cap))
    keep_i = [i for i, k in enumerate(keep) if k]
    drop_i = [i for i, k in enumerate(keep) if not k]
    if drop_i and keep_i:
        scale = max(1.0, float(np.abs(block.entries).max()))
        leak = float(np.abs(block.entries[np.ix_(keep_i, drop_i)]).max())
        if leak > tol * scale:
            raise InvarianceViolated(f"subspace coupling {leak:.3g}")
    sub = block.entries[np.ix_(keep_i, keep_i)]
    return WeightBlockMatrix(block.m, [block.index[i] for i in keep_i], sub, block.cond)


def invariance_leak(block: WeightBlockMatrix, caps) -> float:
    keep = quotient_mask(block.index, caps)
    keep_i = [i for i, k in enumerate(keep) if k]
    drop_i = [i for i, k in enumerate(keep) if not k]
    if not drop_i or not keep_i:
        return 0.0
    scale = max(1.0, float(np.abs(block.entries).max()))
    return float(np.abs(block.entries[np.ix_(keep_i, drop_i)]).max()) / scale


class RProvider:
    """Block operators R_{Lambda,M}(zdiff, .) for assembly in tensor spaces, optionally on quotients."""

    def __init__(self, engine: ThetaEngine, method: str = "residue", spec: ContourSpec = ContourSpec()):
        self.engine = engine
        self.method = method
        self.spec = spec

    def op(self, L: complex, M: complex, zdiff: complex, caps=(None, None)):
        caps = tuple(caps)
        cache: dict = {}

        def f(d: int, lam: complex) -> np.ndarray:
            key = (d, complex(lam))
            if key in cache:
                return cache[key]
            if caps == (1, 1) and (self.method == "fundamental" or _coinciding(self.engine, zdiff)):
                # at coinciding points the residue pairing degenerates for integer weights
                out = _fundamental_block(self.engine, zdiff, lam, d)
            else:
                if self.method == "closed" and d <= 1:
                    blk = closed_block(self.engine, L, M, zdiff, lam, d)
                else:
                    blk = rblock(self.engine, L, M, zdiff, lam, d, "residue", self.spec)
                if caps != (None, None):
                    blk = reduce_to_L(blk, *caps)
                out = blk.entries
            out.flags.writeable = False
            cache[key] = out
            return out
        return f


def _fundamental_block(engine, zdiff, lam, d):
    R = fundamental_r(engine, zdiff, lam)
    sel = {0: [0], 1: [1, 2], 2: [3]}[d]
    return R[np.ix_(sel, sel)]


# property checks

def _rand_complex(rng, scale=1.0):
    return complex(scale * (rng.random() - 0.5) * 2, scale * (rng.random() - 0.5) * 2)


def dybe_residual(engine: ThetaEngine, Ls, z: complex, w: complex, lam: complex, m: int,
                  spec: ContourSpec = ContourSpec()) -> float:
    """R12(z, lam-2eta h3) R13(z+w, lam) R23(w, lam-2eta h1) vs R23(w, lam) R13(z+w, lam-2eta h2) R12(z, lam)."""
    eta = engine.eta
    sp = BlockSpace(Ls, m)
    prov = RProvider(engine, spec=spec)
    R12 = prov.op(Ls[0], Ls[1], z)
    R13 = prov.op(Ls[0], Ls[2], z + w)
    R23 = prov.op(Ls[1], Ls[2], w)
    lhs = sp.embed(R12, (0, 1), lam, eta, (2,)) @ sp.embed(R13, (0, 2), lam, eta) @ sp.embed(R23, (1, 2), lam, eta, (0,))
    rhs = sp.embed(R23, (1, 2), lam, eta) @ sp.embed(R13, (0, 2), lam, eta, (1,)) @ sp.embed(R12, (0, 1), lam, eta)
    return float(np.abs(lhs - rhs).max() / max(1.0, np.abs(lhs).max()))


def unitarity_residual(engine: ThetaEngine, L, M, z, lam, m, spec: ContourSpec = ContourSpec()) -> float:
    A = rblock(engine, L, M, z, lam, m, spec=spec).entries
    B = rblock(engine, M, L, -z, lam, m, spec=spec).entries
    P = flip_op(m)
    prod = A @ P @ B @ P
    return float(np.abs(prod - np.eye(m + 1)).max())


def zero_weight_residual(engine: ThetaEngine, L, M, z, lam, mmax: int, spec: ContourSpec = ContourSpec()) -> float:
    """Commutator of the assembled operator on drops 0..mmax with the total weight."""
    index = [c for m in range(mmax + 1) for c in enumerate_compositions(2, m)]
    pos = {c: i for i, c in enumerate(index)}
    full = np.zeros((len(index), len(index)), dtype=complex)
    for m in range(mmax + 1):
        blk = rblock(engine, L, M, z, lam, m, spec=spec)
        for i, r in enumerate(blk.index):
            for j, c in enumerate(blk.index):
                full[pos[r], pos[c]] = blk.entries[i, j]
    h = np.diag([L + M - 2 * sum(c) for c in index])
    return float(np.abs(full @ h - h @ full).max())


def sign_reversal_residual(engine: ThetaEngine, L, M, z, lam, m, spec: ContourSpec = ContourSpec()) -> float:
    """R(z, lam) against the R-matrix with z, lam, eta and a = eta*Lambda all negated.

    Negating eta with Lambda kept fixed negates a = eta*Lambda, which is the
    weight reversal; negating Lambda alone at fixed eta is not a symmetry.
    """
    flipped = ThetaEngine(EllipticParams(engine.tau, -engine.eta, engine.params.p))
    A = rblock(engine, L, M, z, lam, m, spec=spec).entries
    B = rblock(flipped, L, M, -z, -lam, m, spec=spec).entries
    return float(np.abs(A - B).max() / max(1.0, np.abs(A).max()))


def z_limit_residual(engine: ThetaEngine, L, lam, m, delta: float = 1e-6,
                     spec: ContourSpec = ContourSpec()) -> float:
    """Distance of R(delta) from the coinciding-point construction (the flip)."""
    near = rblock(engine, L, L, delta, lam, m, spec=spec).entries
    at = rblock(engine, L, L, 0j, lam, m, spec=spec).entries
    return float(np.abs(near - at).max())


def invariant_subspace_residual(engine: ThetaEngine, L, M, z, lam, m, spec: ContourSpec = ContourSpec()) -> float:
    caps = (integer_value(L), integer_value(M))
    if caps == (None, None):
        raise MethodUnavailable("no integer weight")
    return invariance_leak(rblock(engine, L, M, z, lam, m, spec=spec), caps)


def verify_property(kind: str, engine: ThetaEngine, seed: int = 0, m: int = 1,
                    spec: ContourSpec = ContourSpec()) -> dict:
    rng = np.random.default_rng(seed)
    Ls = [_rand_complex(rng, 1.5) for _ in range(3)]
    z, w = _rand_complex(rng, 0.4), _rand_complex(rng, 0.4)
    lam = _rand_complex(rng, 0.5)
    params = {"Lambda": Ls, "z": z, "w": w, "lambda": lam, "m": m}
    if kind == "dybe":
        res = dybe_residual(engine, Ls, z, w, lam, m, spec)
    elif kind == "unitarity":
        res = unitarity_residual(engine, Ls[0], Ls[1], z, lam, m, spec)
    elif kind == "zero_weight":
        res = zero_weight_residual(engine, Ls[0], Ls[1], z, lam, m, spec)
    elif kind == "sign_reversal":
        res = sign_reversal_residual(engine, Ls[0], Ls[1], z, lam, m, spec)
    elif kind == "z_limit":
        res = z_limit_residual(engine, Ls[0], lam, m, spec=spec)
    elif kind == "invariant_subspace":
        L = int(rng.integers(1, 3))
        params["Lambda"] = [L, Ls[1]]
        res = invariant_subspace_residual(engine, L, Ls[1], z, lam, m, spec)
    else:
        raise ValueError(f"unknown property {kind}")
    return {"kind": kind, "params": params, "residual": res}
