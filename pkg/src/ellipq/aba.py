"""Algebraic Bethe ansatz on the reversed tensor product of evaluation Verma modules.

The module V^ = V_{Lambda_n}(z_n) (x) ... (x) V_{Lambda_1}(z_1) stores its factors in
that reversed order; ``reverse`` is the map Pi between the two orderings.  The
L-operator of V^ is the ordered product of the L-operators R_{1,Lambda} of the
factors, the factor i taking the argument lambda - 2 eta (h of the factors after i).
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bethe import BetheSolution, generic_lambdas, make_solution
from .diffop import ShiftOperator, build_H, op_equal, weight_space
from .errors import ConfigError
from .model import Composition, ModelConfig, lattice_distance
from .omega import OmegaEvaluator
from .rmatrix import fundamental_r, r_one_block
from .tensor import BlockSpace


def reverse(comp: Composition) -> Composition:
    return tuple(reversed(comp))


def _one_op(engine, L, zdiff, caps):
    """Block operator of R_{1,L}(zdiff, .) on L_1 (x) V_L restricted to the capped basis."""
    cap = caps[1]

    def f(d: int, lam: complex) -> np.ndarray:
        full = r_one_block(engine, L, zdiff, lam, d)
        basis = [(0, d), (1, d - 1)] if d else [(0, 0)]
        keep = [i for i, (a, b) in enumerate(basis) if b >= 0 and (cap is None or b <= cap)]
        return full[np.ix_(keep, keep)]
    return f


def _fund_op(engine, zdiff):
    sel = {0: [0], 1: [1, 2], 2: [3]}

    def f(d: int, lam: complex) -> np.ndarray:
        return fundamental_r(engine, zdiff, lam)[np.ix_(sel[d], sel[d])]
    return f


class LOperator:
    """L(z, lambda) of V^ acting on C^2 (x) V^, split into the blocks a, b, c, d."""

    def __init__(self, config: ModelConfig):
        self.config = config
        self.engine = config.engine
        self.eta = config.eta
        self.weights = tuple(reversed(config.Lambda))
        self.points = tuple(reversed(config.z))
        self.caps = tuple(reversed(config.caps))

    def embedded(self, space: BlockSpace, aux: int, positions: Sequence[int], z: complex, lam: complex,
                 extra_shift: Sequence[int] = ()) -> np.ndarray:
        """L^{(aux, positions)}(z, lam - 2 eta h^{(extra_shift)}) as a matrix on ``space``."""
        out = np.eye(space.dim, dtype=complex)
        for i, pos in enumerate(positions):
            op = _one_op(self.engine, self.weights[i], z - self.points[i], (1, self.caps[i]))
            shift = list(positions[i + 1:]) + list(extra_shift)
            out = out @ space.embed(op, (aux, pos), lam, self.eta, shift)
        return out

    def full(self, z: complex, lam: complex, drop: int) -> tuple[BlockSpace, np.ndarray]:
        """L(z, lam) on the block of C^2 (x) V^ with total drop ``drop``; factor 0 is auxiliary."""
        space = BlockSpace((1,) + self.weights, drop, (1,) + self.caps)
        n = len(self.weights)
        return space, self.embedded(space, 0, range(1, n + 1), z, lam)

    def quantum(self, drop: int) -> BlockSpace:
        return BlockSpace(self.weights, drop, self.caps)

    def block(self, name: str, z: complex, lam: complex, drop: int) -> np.ndarray:
        """a, b, c or d acting on the weight space of V^ with the given drop."""
        i, k = {"a": (0, 0), "b": (0, 1), "c": (1, 0), "d": (1, 1)}[name]
        src = self.quantum(drop)
        dst_drop = drop + k - i
        dst = self.quantum(dst_drop)
        if dst_drop < 0 or not dst.dim or not src.dim:
            return np.zeros((dst.dim, src.dim), dtype=complex)
        space, L = self.full(z, lam, drop + k)
        rows = [space.index[(i,) + c] for c in dst.basis]
        cols = [space.index[(k,) + c] for c in src.basis]
        return L[np.ix_(rows, cols)]

    def a(self, z, lam, drop):
        return self.block("a", z, lam, drop)

    def b(self, z, lam, drop):
        return self.block("b", z, lam, drop)

    def c(self, z, lam, drop):
        return self.block("c", z, lam, drop)

    def d(self, z, lam, drop):
        return self.block("d", z, lam, drop)


def build_L(config: ModelConfig) -> LOperator:
    return LOperator(config)


def rll_residual(config: ModelConfig, z: complex, w: complex, lam: complex, drop: int) -> float:
    """R12(z-w, lam - 2 eta h3) L13(z, lam) L23(w, lam - 2 eta h1)
    - L23(w, lam) L13(z, lam - 2 eta h2) R12(z-w, lam) on the block of total drop ``drop``."""
    L = LOperator(config)
    n = len(L.weights)
    space = BlockSpace((1, 1) + L.weights, drop, (1, 1) + L.caps)
    pos = list(range(2, n + 2))
    R = _fund_op(config.engine, z - w)
    eta = config.eta
    lhs = space.embed(R, (0, 1), lam, eta, pos) @ L.embedded(space, 0, pos, z, lam) \
        @ L.embedded(space, 1, pos, w, lam, [0])
    rhs = L.embedded(space, 1, pos, w, lam) @ L.embedded(space, 0, pos, z, lam, [1]) \
        @ space.embed(R, (0, 1), lam, eta)
    return float(np.abs(lhs - rhs).max() / max(1.0, np.abs(lhs).max()))


def v_c(config: ModelConfig, c: complex, lam: complex, m: int) -> complex:
    """Scalar factor of the highest weight function e^{c lam} prod theta(lam - 2 eta j)/theta(2 eta)."""
    th = config.engine
    eta = config.eta
    out = cmath.exp(c * lam)
    for j in range(1, m + 1):
        out *= th(lam - 2 * eta * j) / th(2 * eta)
    return out


def b_product_state(config: ModelConfig, s: Sequence[complex], c: complex, lam: complex,
                    L: LOperator | None = None) -> np.ndarray:
    """(b(s_1) ... b(s_m) v_c)(lam) on the weight space of V^ with drop m, with (b(s)f)(lam) = b(s, lam) f(lam + 2 eta)."""
    L = L or LOperator(config)
    m = len(s)
    eta = config.eta
    vec = np.array([v_c(config, c, lam + 2 * eta * m, m)])
    # innermost operator acts at the largest shift
    for i in range(m - 1, -1, -1):
        vec = L.b(s[i], lam + 2 * eta * i, m - 1 - i) @ vec
    return vec


def comparison_rhs(config: ModelConfig, t: Sequence[complex], c: complex, lam: complex) -> np.ndarray:
    """Right-hand side of the comparison identity, in the basis of V^ (reversed compositions)."""
    th = config.engine
    eta = config.eta
    m = len(t)
    ev = OmegaEvaluator(config)
    L = LOperator(config)
    pref = cmath.exp(c * (lam + 2 * eta * m)) * (-1) ** m
    for i in range(m):
        for j in range(i + 1, m):
            pref *= th(t[i] - t[j] + 2 * eta) / th(t[i] - t[j])
    space = L.quantum(m)
    return np.array([pref * ev.multi(reverse(cc), list(t), lam) for cc in space.basis])


def comparison_residual(config: ModelConfig, t: Sequence[complex], c: complex, lam: complex) -> float:
    lhs = b_product_state(config, [x + config.eta for x in t], c, lam)
    rhs = comparison_rhs(config, t, c, lam)
    return float(np.abs(lhs - rhs).max() / np.abs(rhs).max())


def transfer(config: ModelConfig, w: complex, L: LOperator | None = None) -> ShiftOperator:
    """T(w) f(lam) = a(w, lam) f(lam - 2 eta) + d(w, lam) f(lam + 2 eta) on the zero weight space of V^."""
    L = L or LOperator(config)
    m = config.zero_weight_m()
    dim = L.quantum(m).dim
    return ShiftOperator({1: lambda lam: L.a(w, lam, m), -1: lambda lam: L.d(w, lam, m)},
                         config.eta, (dim, dim))


def shifted_bethe_lhs(config: ModelConfig, s: Sequence[complex]) -> np.ndarray:
    """Left-hand sides of the shifted equations (right-hand side exp(4 eta c))."""
    th = config.engine
    eta = config.eta
    out = []
    for i, si in enumerate(s):
        v = 1.0 + 0j
        for j, sj in enumerate(s):
            if j != i:
                v *= th.ratio(sj - si - 2 * eta, sj - si + 2 * eta)
        for z, L in zip(config.z, config.Lambda):
            v *= th.ratio(si - z - (1 + L) * eta, si - z - (1 - L) * eta)
        out.append(v)
    return np.array(out)


def shifted_residual(config: ModelConfig, s: Sequence[complex], c: complex) -> float:
    if not len(s):
        return 0.0
    return float(np.abs(shifted_bethe_lhs(config, s) * cmath.exp(-4 * config.eta * c) - 1).max())


def to_shifted(config: ModelConfig, sol: BetheSolution) -> tuple[tuple[complex, ...], complex]:
    """Roots of the multiplicative form map to the shifted form by t -> t + eta, c unchanged."""
    return tuple(x + config.eta for x in sol.t), sol.c


def from_shifted(config: ModelConfig, s: Sequence[complex], c: complex) -> BetheSolution:
    return make_solution(config, [x - config.eta for x in s], c)


def transfer_eigenvalue(config: ModelConfig, s: Sequence[complex], c: complex, w: complex) -> complex:
    th = config.engine
    eta = config.eta
    first = cmath.exp(-2 * eta * c)
    second = cmath.exp(2 * eta * c)
    for x in s:
        first *= th(x - w - 2 * eta) / th(x - w)
        second *= th(x - w + 2 * eta) / th(x - w)
    for z, L in zip(config.z, config.Lambda):
        second *= th(w - z - (1 - L) * eta) / th(w - z - (1 + L) * eta)
    return first + second


@dataclass
class TransferReport:
    eigen: float
    multiplier: float
    shifted_residual: float
    bethe_residual: float


def aba_transfer_verify(config: ModelConfig, s: Sequence[complex], c: complex,
                        w_samples: int | Sequence[complex] = 5, lambda_samples: int = 3,
                        seed: int = 0) -> TransferReport:
    """Residual of T(w) psi = eps(w) psi for psi = b(s_1) ... b(s_m) v_c."""
    tau = config.elliptic.tau
    m = len(s)
    if any(lattice_distance(s[i] - s[j], tau) < 1e-8 for i in range(m) for j in range(i)):
        raise ConfigError("diagonal solutions are excluded")
    rng = np.random.default_rng(seed)
    if isinstance(w_samples, int):
        ws = [complex(*rng.uniform(-0.5, 0.5, 2)) for _ in range(w_samples)]
    else:
        ws = list(w_samples)
    lams = generic_lambdas(config, lambda_samples, m + 1, seed)
    L = LOperator(config)

    def psi(lam):
        return b_product_state(config, s, c, lam, L)

    worst = 0.0
    for w in ws:
        T = transfer(config, w, L)
        eps = transfer_eigenvalue(config, s, c, w)
        for lam in lams:
            v = psi(lam)
            worst = max(worst, float(np.linalg.norm(T.apply(psi, lam) - eps * v) / np.linalg.norm(v)))
    mult = max(float(np.abs(psi(lam + 1) - (-1) ** m * cmath.exp(c) * psi(lam)).max() / np.abs(psi(lam)).max())
               for lam in lams)
    back = from_shifted(config, s, c)
    return TransferReport(worst, mult, shifted_residual(config, s, c), back.residual)


def reversal_matrix(space_from: BlockSpace, space_to: BlockSpace) -> np.ndarray:
    out = np.zeros((space_to.dim, space_from.dim), dtype=complex)
    for j, comp in enumerate(space_from.basis):
        out[space_to.index[reverse(comp)], j] = 1
    return out


def transfer_vs_h_residual(config: ModelConfig, j: int, lambda_samples: int = 5, seed: int = 0) -> float:
    """T_{V^}(z_j) against Pi H_j Pi^{-1} for weights all equal to one."""
    if any(abs(x - 1) > 1e-12 for x in config.Lambda):
        raise ConfigError("needs all weights equal to one")
    cfg = config if config.truncate else config.replace(truncate=True)
    L = LOperator(cfg)
    m = cfg.zero_weight_m()
    src = weight_space(cfg, m)
    dst = L.quantum(m)
    P = reversal_matrix(src, dst)
    H = build_H(cfg, j)
    conj = ShiftOperator({s: (lambda A: lambda lam: P @ A(lam) @ P.T)(A) for s, A in H.terms.items()},
                         cfg.eta, H.shape)
    return op_equal(transfer(cfg, cfg.z[j - 1], L), conj, lambda_samples, seed)
