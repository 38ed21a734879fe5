"""Difference operators in the dynamical variable lambda.

A ShiftOperator A acts on functions f(lambda) with values in a weight space by
(A f)(lambda) = sum_s A_s(lambda) f(lambda - 2*eta*s).  Shifts are weights of
single factors, hence complex in general; keys are rounded so that equal shifts
coming from different products are merged.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .elliptic import EllipticParams
from .errors import ConfigError
from .model import ModelConfig, integer_value
from .rmatrix import RProvider
from .tensor import BlockSpace, permutation_matrix

MatFn = Callable[[complex], np.ndarray]


def shift_key(s: complex) -> complex:
    s = complex(s)
    return complex(round(s.real, 9) + 0.0, round(s.imag, 9) + 0.0)


class ShiftOperator:
    def __init__(self, terms: dict[complex, MatFn], eta: complex, shape: tuple[int, int]):
        self.terms = {shift_key(s): f for s, f in terms.items()}
        self.eta = complex(eta)
        self.shape = shape

    @classmethod
    def identity(cls, dim: int, eta: complex) -> "ShiftOperator":
        eye = np.eye(dim, dtype=complex)
        return cls({0j: lambda lam: eye}, eta, (dim, dim))

    @classmethod
    def constant(cls, f: MatFn, eta: complex, shape) -> "ShiftOperator":
        return cls({0j: f}, eta, shape)

    def compose(self, other: "ShiftOperator") -> "ShiftOperator":
        """self after other."""
        if self.shape[1] != other.shape[0]:
            raise ValueError("incompatible operator shapes")
        eta = self.eta
        pairs: dict[complex, list] = {}
        for s1, a in self.terms.items():
            for s2, b in other.terms.items():
                pairs.setdefault(shift_key(s1 + s2), []).append((s1, a, b))

        def make(plist):
            def f(lam):
                return sum(a(lam) @ b(lam - 2 * eta * s1) for s1, a, b in plist)
            return f

        return ShiftOperator({s: make(pl) for s, pl in pairs.items()}, eta, (self.shape[0], other.shape[1]))

    def __matmul__(self, other: "ShiftOperator") -> "ShiftOperator":
        return self.compose(other)

    def __sub__(self, other: "ShiftOperator") -> "ShiftOperator":
        terms = dict(self.terms)
        for s, b in other.terms.items():
            if s in terms:
                a = terms[s]
                terms[s] = (lambda a, b: lambda lam: a(lam) - b(lam))(a, b)
            else:
                terms[s] = (lambda b: lambda lam: -b(lam))(b)
        return ShiftOperator(terms, self.eta, self.shape)

    def at(self, lam: complex) -> dict[complex, np.ndarray]:
        return {s: f(lam) for s, f in self.terms.items()}

    def apply(self, f: Callable[[complex], np.ndarray], lam: complex) -> np.ndarray:
        return sum(A(lam) @ f(lam - 2 * self.eta * s) for s, A in self.terms.items())


def op_equal(A: ShiftOperator, B: ShiftOperator, lambda_samples: int | Sequence[complex] = 5,
             seed: int = 0) -> float:
    """Max over shifts and sampled lambda of the entrywise difference, relative to max(1, scale)."""
    if isinstance(lambda_samples, int):
        rng = np.random.default_rng(seed)
        lams = [complex(x, y) for x, y in rng.uniform(-0.5, 0.5, size=(lambda_samples, 2))]
    else:
        lams = list(lambda_samples)
    keys = set(A.terms) | set(B.terms)
    worst, scale = 0.0, 1.0
    for lam in lams:
        for s in keys:
            a = A.terms[s](lam) if s in A.terms else 0
            b = B.terms[s](lam) if s in B.terms else 0
            worst = max(worst, float(np.abs(a - b).max()))
            scale = max(scale, float(np.abs(a).max()) if s in A.terms else 0.0)
    return worst / scale


def weight_space(config: ModelConfig, m: int | None = None) -> BlockSpace:
    if m is None:
        m = config.zero_weight_m()
    return BlockSpace(config.Lambda, m, config.caps)


def gamma(config: ModelConfig, j: int, space: BlockSpace | None = None) -> ShiftOperator:
    """Gamma_j (1-based j): shifts lambda by -2*eta times the weight of factor j."""
    space = space or weight_space(config)
    terms = {}
    for mu in space.factor_weights(j - 1):
        P = space.projector(j - 1, mu)
        terms[mu] = (lambda P: lambda lam: P)(P)
    return ShiftOperator(terms, config.eta, (space.dim, space.dim))


def r_factor(config: ModelConfig, provider: RProvider, space: BlockSpace, k: int, l: int,
             zdiff: complex) -> MatFn:
    """R_{k,l}(zdiff) (0-based factors) with argument lambda - 2 eta sum_{i<l, i != k} h^(i)."""
    L = config.Lambda
    caps = config.caps
    op = provider.op(L[k], L[l], zdiff, (caps[k], caps[l]))
    shift = [i for i in range(l) if i != k]
    eta = config.eta
    return lambda lam: space.embed(op, (k, l), lam, eta, shift)


def _product(factors: list[MatFn], dim: int) -> MatFn:
    eye = np.eye(dim, dtype=complex)

    def f(lam):
        out = eye
        for g in factors:
            out = out @ g(lam)
        return out
    return f


def build_K(config: ModelConfig, j: int, p: complex | None = None, provider: RProvider | None = None,
            space: BlockSpace | None = None) -> ShiftOperator:
    """qKZB operator K_j (1-based j) with step p (defaults to the configured step)."""
    if p is None:
        if config.elliptic.p is None:
            raise ConfigError("step p is not set")
        p = config.elliptic.p
    provider = provider or RProvider(config.engine)
    space = space or weight_space(config)
    jj = j - 1
    z = config.z
    left = [r_factor(config, provider, space, jj, l, z[jj] - z[l] + p) for l in range(jj - 1, -1, -1)]
    right = [r_factor(config, provider, space, jj, l, z[jj] - z[l]) for l in range(config.n - 1, jj, -1)]
    Left = _product(left, space.dim)
    Right = _product(right, space.dim)
    eta = config.eta
    terms = {}
    for mu in space.factor_weights(jj):
        P = space.projector(jj, mu)
        terms[mu] = (lambda P, mu: lambda lam: Left(lam) @ P @ Right(lam - 2 * eta * mu))(P, mu)
    return ShiftOperator(terms, eta, (space.dim, space.dim))


def build_H(config: ModelConfig, j: int, provider: RProvider | None = None,
            space: BlockSpace | None = None) -> ShiftOperator:
    return build_K(config, j, 0j, provider, space)


def build_T(config: ModelConfig, w: complex, provider: RProvider | None = None) -> ShiftOperator:
    """Transfer matrix with auxiliary space L_Lambda on the zero weight space of equal integer weights."""
    L = integer_value(config.Lambda[0])
    if L is None or L < 0 or any(abs(x - L) > 1e-12 for x in config.Lambda):
        raise ConfigError("transfer matrices need equal nonnegative integer weights")
    cfg = config if config.truncate else config.replace(truncate=True)
    provider = provider or RProvider(cfg.engine)
    m = cfg.zero_weight_m()
    quantum = weight_space(cfg, m)
    n = cfg.n
    eta = cfg.eta
    ext_cfg = ModelConfig(cfg.elliptic, (L,) + cfg.Lambda, (w,) + cfg.z, truncate=True,
                          generic_guard=False, engine=cfg.engine)
    terms = {}
    for i in range(L + 1):
        ext = BlockSpace(ext_cfg.Lambda, m + i, ext_cfg.caps)
        factors = [r_factor(ext_cfg, provider, ext, 0, k, w - cfg.z[k - 1]) for k in range(n, 0, -1)]
        X = _product(factors, ext.dim)
        rows = [ext.index[(i,) + c] for c in quantum.basis]
        terms[L - 2 * i] = (lambda X, rows: lambda lam: X(lam)[np.ix_(rows, rows)])(X, rows)
    return ShiftOperator(terms, eta, (quantum.dim, quantum.dim))


def exchange_operator(config: ModelConfig, j: int, provider: RProvider | None = None) -> tuple[ShiftOperator, ModelConfig]:
    """S_j: functions with values in V(Lambda) -> V(s_j Lambda); returns the operator and the swapped config."""
    provider = provider or RProvider(config.engine)
    jj = j - 1
    L, z = list(config.Lambda), list(config.z)
    L[jj], L[jj + 1] = L[jj + 1], L[jj]
    z[jj], z[jj + 1] = z[jj + 1], z[jj]
    swapped = config.replace(Lambda=tuple(L), z=tuple(z))
    src = weight_space(config)
    dst = weight_space(swapped)
    perm = list(range(config.n))
    perm[jj], perm[jj + 1] = jj + 1, jj
    P = permutation_matrix(src, dst, perm)
    caps = config.caps
    op = provider.op(config.Lambda[jj], config.Lambda[jj + 1], config.z[jj] - config.z[jj + 1],
                     (caps[jj], caps[jj + 1]))
    eta = config.eta
    S = ShiftOperator.constant(lambda lam: P @ src.embed(op, (jj, jj + 1), lam, eta, range(jj)),
                               eta, (dst.dim, src.dim))
    return S, swapped


def verify_exchange(config: ModelConfig, j: int, provider: RProvider | None = None,
                    lambda_samples: int = 5, seed: int = 0) -> float:
    S, swapped = exchange_operator(config, j, provider)
    lhs = build_H(swapped, j + 1, provider) @ S
    rhs = S @ build_H(config, j, provider)
    return op_equal(lhs, rhs, lambda_samples, seed)


def exchange_square_residual(config: ModelConfig, j: int, provider: RProvider | None = None,
                             lambda_samples: int = 5, seed: int = 0) -> float:
    S, swapped = exchange_operator(config, j, provider)
    S2, _ = exchange_operator(swapped, j, provider)
    eye = ShiftOperator.identity(S.shape[1], config.eta)
    return op_equal(S2 @ S, eye, lambda_samples, seed)


def commutator_residual(A: ShiftOperator, B: ShiftOperator, lambda_samples: int = 5, seed: int = 0) -> float:
    return op_equal(A @ B, B @ A, lambda_samples, seed)


def flatness_residual(config: ModelConfig, i: int, j: int, provider: RProvider | None = None,
                      lambda_samples: int = 5, seed: int = 0) -> float:
    """K_i(z + p e_j) K_j(z) - K_j(z + p e_i) K_i(z)."""
    p = config.elliptic.p
    if p is None:
        raise ConfigError("step p is not set")

    def moved(k):
        z = list(config.z)
        z[k - 1] += p
        return config.replace(z=tuple(z))

    lhs = build_K(moved(j), i, provider=provider) @ build_K(config, j, provider=provider)
    rhs = build_K(moved(i), j, provider=provider) @ build_K(config, i, provider=provider)
    return op_equal(lhs, rhs, lambda_samples, seed)


def with_step(config: ModelConfig, p: complex) -> ModelConfig:
    e = config.elliptic
    return config.replace(elliptic=EllipticParams(e.tau, e.eta, p))


