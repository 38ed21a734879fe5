"""Phase-weighted integrands of formal Jackson integral solutions of the qKZB equations.

Only pointwise identities are verified here; the truncated lattice sum is a
diagnostic whose convergence is not asserted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .bethe import BetheSolution, bethe_psi
from .diffop import build_K, weight_space
from .elliptic import PhaseEvaluator
from .errors import ConfigError, PoleProximity
from .model import ModelConfig
from .omega import OmegaEvaluator
from .rmatrix import RProvider


def _one(x):
    return 1.0 + 0j


@dataclass
class JacksonIntegrand:
    config: ModelConfig
    xi: Callable[[complex], complex] = _one
    _phases: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.config.elliptic.p is None:
            raise ConfigError("the integrand needs the step p")
        if self.config.elliptic.p.imag <= 0:
            raise ConfigError("the step p needs positive imaginary part")

    @property
    def p(self) -> complex:
        return self.config.elliptic.p

    def phase1(self, a: complex) -> PhaseEvaluator:
        key = complex(a)
        if key not in self._phases:
            self._phases[key] = PhaseEvaluator(self.config.elliptic, key)
        return self._phases[key]

    def phase(self, t: Sequence[complex], z: Sequence[complex] | None = None) -> complex:
        """m-variable phase function Phi(t, z)."""
        z = self.config.z if z is None else z
        eta = self.config.eta
        out = 1.0 + 0j
        for tj in t:
            for zl, al in zip(z, self.config.a):
                out *= self.phase1(al)(tj - zl)
        for i in range(len(t)):
            for j in range(i + 1, len(t)):
                out *= self.phase1(-2 * eta)(t[i] - t[j])
        return out

    def xi_argument(self, t: Sequence[complex], z: Sequence[complex], lam: complex) -> complex:
        eta = self.config.eta
        return self.p * lam - sum(2 * a * zl for a, zl in zip(self.config.a, z)) + 4 * eta * sum(t)

    def psi_xi(self, t: Sequence[complex], z: Sequence[complex], lam: complex) -> np.ndarray:
        cfg = self.config.replace(z=tuple(z)) if tuple(z) != tuple(self.config.z) else self.config
        ev = OmegaEvaluator(cfg)
        m = len(t)
        basis = weight_space(cfg, m).basis
        x = self.xi(self.xi_argument(t, z, lam))
        return np.array([x * ev.multi(c, list(t), lam) for c in basis])

    def __call__(self, t: Sequence[complex], z: Sequence[complex] | None, lam: complex) -> np.ndarray:
        z = self.config.z if z is None else z
        return self.phase(t, z) * self.psi_xi(t, z, lam)


def integrand_eval(J: JacksonIntegrand, t, z, lam) -> np.ndarray:
    return J(t, z, lam)


def rho(J: JacksonIntegrand, t: Sequence[complex], z: Sequence[complex], j: int) -> complex:
    """Ratio Phi(t, z + p e_j) / Phi(t, z) (1-based j) from the defining shift of the phase."""
    th = J.config.engine
    a = J.config.a[j - 1]
    zj = z[j - 1]
    p = J.p
    out = 1.0 + 0j
    for ti in t:
        out *= th.ratio(ti - zj - a - p, ti - zj + a - p)
    return out


def verify_phase_shift(J: JacksonIntegrand, t: Sequence[complex], z: Sequence[complex], j: int) -> float:
    if not 1 <= j <= J.config.n:
        raise ValueError("site index out of range")
    z = list(z)
    moved = z[:]
    moved[j - 1] += J.p
    lhs = J.phase(t, moved)
    rhs = rho(J, t, z, j) * J.phase(t, z)
    return abs(lhs - rhs) / abs(rhs)


def phi_i(J: JacksonIntegrand, t: Sequence[complex], i: int) -> complex:
    """Multiplier of the shift operator Q_i (1-based i)."""
    th = J.config.engine
    eta = J.config.eta
    p = J.p
    ti = t[i - 1]
    out = 1.0 + 0j
    for z, a in zip(J.config.z, J.config.a):
        out *= th.ratio(ti - z + a, ti - z - a)
    for j, tj in enumerate(t, start=1):
        if j > i:
            out *= th.ratio(ti - tj - 2 * eta, ti - tj + 2 * eta)
        elif j < i:
            out *= th.ratio(ti - tj - 2 * eta + p, ti - tj + 2 * eta + p)
    return out


def q_apply(J: JacksonIntegrand, i: int, h: Callable) -> Callable:
    """The function Q_i h."""
    p = J.p

    def g(t):
        t = list(t)
        s = t[:]
        s[i - 1] += p
        return h(s) * phi_i(J, t, i)
    return g


def phi_block(J: JacksonIntegrand, t: Sequence[complex], mprime: int) -> complex:
    th = J.config.engine
    eta = J.config.eta
    out = 1.0 + 0j
    for j in range(mprime):
        for z, a in zip(J.config.z, J.config.a):
            out *= th.ratio(t[j] - z + a, t[j] - z - a)
        for k in range(mprime, len(t)):
            out *= th.ratio(t[j] - t[k] - 2 * eta, t[j] - t[k] + 2 * eta)
    return out


def verify_q_product(J: JacksonIntegrand, h: Callable, mprime: int, t: Sequence[complex]) -> float:
    m = len(t)
    if not 0 <= mprime <= m:
        raise ValueError("need 0 <= m' <= m")
    f = h
    for i in range(mprime, 0, -1):
        f = q_apply(J, i, f)
    lhs = f(list(t))
    shifted = [x + J.p if k < mprime else x for k, x in enumerate(t)]
    rhs = h(shifted) * phi_block(J, t, mprime)
    return float(abs(lhs - rhs) / max(abs(rhs), 1e-300))


def xi_bookkeeping_residual(J: JacksonIntegrand, t: Sequence[complex], comp_first: int, lam: complex) -> float:
    """Shifting z_1 and t_1..t_{m'} by p moves the xi argument as lambda -> lambda - 2 eta mu."""
    cfg = J.config
    z = list(cfg.z)
    mu = cfg.Lambda[0] - 2 * comp_first
    moved_z = [z[0] + J.p] + z[1:]
    moved_t = [x + J.p if k < comp_first else x for k, x in enumerate(t)]
    d1 = J.xi_argument(moved_t, moved_z, lam) - J.xi_argument(t, z, lam)
    d2 = J.xi_argument(t, z, lam - 2 * cfg.eta * mu) - J.xi_argument(t, z, lam)
    return abs(d1 - d2) / max(1.0, abs(d2))


@dataclass
class JacksonReport:
    K: list[int]
    residual: list[float]
    skipped: list[int]
    monotone: bool


def jackson_sum(J: JacksonIntegrand, t0: Sequence[complex], K: int, z: Sequence[complex],
                lam: complex) -> tuple[np.ndarray, int]:
    m = len(t0)
    total = None
    skipped = 0
    for shift in product(range(-K, K + 1), repeat=m):
        t = [x + J.p * s for x, s in zip(t0, shift)]
        try:
            v = J(t, z, lam)
        except PoleProximity:
            skipped += 1
            continue
        total = v if total is None else total + v
    if total is None:
        raise PoleProximity("every lattice point was singular")
    return total, skipped


def jackson_sum_diagnostic(J: JacksonIntegrand, t0: Sequence[complex], K: int, lam: complex,
                           j: int = 1, provider: RProvider | None = None) -> JacksonReport:
    """qKZB residual of truncated lattice sums for K' = 0..K; a trend, not a verdict."""
    if K > 6:
        raise ConfigError("K is limited to 6")
    cfg = J.config
    provider = provider or RProvider(cfg.engine)
    op = build_K(cfg, j, provider=provider)
    moved = list(cfg.z)
    moved[j - 1] += J.p
    res, skips = [], []
    for k in range(K + 1):
        def Psi(l, k=k):
            return jackson_sum(J, t0, k, cfg.z, l)[0]
        lhs, s1 = jackson_sum(J, t0, k, moved, lam)
        rhs = op.apply(Psi, lam)
        res.append(float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-300)))
        skips.append(s1)
    mono = all(b <= a for a, b in zip(res, res[1:]))
    return JacksonReport(list(range(K + 1)), res, skips, mono)


def small_step_order(config: ModelConfig, sol: BetheSolution, j: int, steps: Sequence[complex] = (0.02j, 0.01j),
                     lam: complex = 0.23 - 0.07j, provider: RProvider | None = None) -> tuple[list[float], float]:
    """Deviation of K_j(p) psi from eps_j psi for a Bethe eigenfunction psi, and its order in p."""
    provider = provider or RProvider(config.engine)
    space = weight_space(config, sol.m)

    def psi(l):
        return bethe_psi(config, sol, l)

    devs = []
    for p in steps:
        K = build_K(config, j, p, provider, space)
        v = psi(lam)
        devs.append(float(np.linalg.norm(K.apply(psi, lam) - sol.eps[j - 1] * v) / np.linalg.norm(v)))
    order = math.log(devs[0] / devs[1]) / math.log(abs(steps[0]) / abs(steps[1]))
    return devs, order
