"""Bethe ansatz equations, their eigenfunctions and the completeness determinant."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .diffop import build_H, weight_space
from .errors import ConfigError, ConvergenceFailure, JacobianSingular, PoleProximity, SolutionDeficit
from .model import ModelConfig, enumerate_compositions, integer_value, lattice_distance
from .omega import OmegaEvaluator
from .rmatrix import RProvider

ACCEPT = 1e-10


@dataclass
class BetheSolution:
    t: tuple[complex, ...]
    c: complex
    eps: tuple[complex, ...]
    residual: float
    multiplier: complex
    diagonal: bool = False

    @property
    def m(self) -> int:
        return len(self.t)


def _check_weight(config: ModelConfig, m: int) -> None:
    total = sum(config.Lambda)
    if abs(total - 2 * m) > 1e-9:
        raise ConfigError("sum of weights must equal 2m")


def bethe_lhs(config: ModelConfig, t: Sequence[complex]) -> np.ndarray:
    """Left-hand sides of the m Bethe equations (their right-hand side is exp(-4 eta c))."""
    th = config.engine
    eta = config.eta
    out = []
    for j, tj in enumerate(t):
        v = 1.0 + 0j
        for z, a in zip(config.z, config.a):
            v *= th.ratio(tj - z + a, tj - z - a)
        for k, tk in enumerate(t):
            if k != j:
                v *= th.ratio(tj - tk - 2 * eta, tj - tk + 2 * eta)
        out.append(v)
    return np.array(out)


def bethe_residual(config: ModelConfig, t: Sequence[complex], c: complex) -> float:
    if len(t) == 0:
        return 0.0
    return float(np.abs(bethe_lhs(config, t) * np.exp(4 * config.eta * c) - 1).max())


def eigenvalues(config: ModelConfig, t: Sequence[complex], c: complex) -> tuple[complex, ...]:
    th = config.engine
    out = []
    for z, a in zip(config.z, config.a):
        v = cmath.exp(-2 * c * a)
        for tk in t:
            v *= th.ratio(tk - z - a, tk - z + a)
        out.append(v)
    return tuple(out)


def is_diagonal(config: ModelConfig, t: Sequence[complex], tol: float = 1e-8) -> bool:
    tau = config.elliptic.tau
    return any(lattice_distance(t[i] - t[j], tau) < tol for i in range(len(t)) for j in range(i))


def make_solution(config: ModelConfig, t: Sequence[complex], c: complex) -> BetheSolution:
    t = tuple(complex(x) for x in t)
    return BetheSolution(t, complex(c), eigenvalues(config, t, c), bethe_residual(config, t, c),
                         (-1) ** len(t) * cmath.exp(c), is_diagonal(config, t))


def solution_from_root(config: ModelConfig, t_star: complex) -> BetheSolution:
    """For m = 1 choose c so that the single equation holds at t_star."""
    _check_weight(config, 1)
    th = config.engine
    prod = 1.0 + 0j
    for z, a in zip(config.z, config.a):
        prod *= th.ratio(t_star - z + a, t_star - z - a)
    c = -cmath.log(prod) / (4 * config.eta)
    return make_solution(config, [t_star], c)


def _log_system(config: ModelConfig, t: np.ndarray, c: complex):
    """F_j = log(lhs_j * exp(4 eta c)) and its Jacobian."""
    th = config.engine
    eta = config.eta
    m = len(t)
    F = np.log(bethe_lhs(config, t) * np.exp(4 * eta * c))
    J = np.zeros((m, m), dtype=complex)
    for j in range(m):
        for z, a in zip(config.z, config.a):
            J[j, j] += th.dlog(t[j] - z + a) - th.dlog(t[j] - z - a)
        for k in range(m):
            if k == j:
                continue
            d = th.dlog(t[j] - t[k] - 2 * eta) - th.dlog(t[j] - t[k] + 2 * eta)
            J[j, j] += d
            J[j, k] -= d
    return F, J


def newton(config: ModelConfig, c: complex, start: Sequence[complex], max_iter: int = 100,
           tol: float = 1e-13) -> np.ndarray:
    """Damped Newton iteration on the logarithmic form of the Bethe equations."""
    t = np.array(start, dtype=complex)
    for _ in range(max_iter):
        try:
            F, J = _log_system(config, t, c)
        except PoleProximity as exc:
            raise ConvergenceFailure("iteration hit a pole") from exc
        norm = float(np.abs(F).max())
        if norm < tol:
            return t
        if not np.all(np.isfinite(J)) or abs(np.linalg.det(J)) < 1e-300:
            raise JacobianSingular("singular Jacobian")
        step = np.linalg.solve(J, F)
        damp = 1.0
        while damp > 1e-4:
            trial = t - damp * step
            try:
                Ft = np.log(bethe_lhs(config, trial) * np.exp(4 * config.eta * c))
                if float(np.abs(Ft).max()) < norm:
                    break
            except PoleProximity:
                pass
            damp /= 2
        t = trial
    F, _ = _log_system(config, t, c)
    if float(np.abs(F).max()) < 1e-11:
        return t
    raise ConvergenceFailure("Newton iteration did not converge")


def _reduce(x: complex, tau: complex) -> complex:
    n = math.floor(x.imag / tau.imag + 1e-9)
    y = x - n * tau
    return y - math.floor(y.real + 1e-9)


def canonical(t: Sequence[complex], tau: complex) -> tuple[complex, ...]:
    """Representative modulo lattice translations of each root and permutations."""
    red = [_reduce(complex(x), tau) for x in t]
    return tuple(sorted(red, key=lambda x: (round(x.real, 8), round(x.imag, 8))))


def _same(a: Sequence[complex], b: Sequence[complex], tau: complex, tol: float = 1e-7) -> bool:
    return all(lattice_distance(x - y, tau) < tol for x, y in zip(a, b))


def bethe_solve(config: ModelConfig, c: complex, starts: Sequence[Sequence[complex]],
                failures: list | None = None) -> list[BetheSolution]:
    """Newton from every start; converged solutions deduplicated modulo lattice and S_m."""
    m = len(starts[0]) if starts else 0
    _check_weight(config, m)
    tau = config.elliptic.tau
    found: list[BetheSolution] = []
    keys: list[tuple[complex, ...]] = []
    for start in starts:
        try:
            t = newton(config, c, start)
        except ConvergenceFailure as exc:
            if failures is not None:
                failures.append((tuple(start), str(exc)))
            continue
        sol = make_solution(config, t, c)
        if sol.residual >= ACCEPT:
            if failures is not None:
                failures.append((tuple(start), f"residual {sol.residual:.3e}"))
            continue
        key = canonical(t, tau)
        if any(_same(key, k, tau) for k in keys):
            continue
        keys.append(key)
        found.append(sol)
    return found


def asymptotic_start(config: ModelConfig, K: Sequence[int]) -> list[complex]:
    """Limit of the roots labelled by K as exp(c) grows: staircases ending at z_l - a_l."""
    eta = config.eta
    t = []
    acc = 0
    for l, k in enumerate(K):
        acc += k
        for j in range(acc - k + 1, acc + 1):
            t.append(config.z[l] - config.a[l] + 2 * eta * (acc - j))
    return t


def bethe_psi(config: ModelConfig, sol: BetheSolution, lam: complex,
              evaluator: OmegaEvaluator | None = None) -> np.ndarray:
    """Coefficients of the eigenfunction over the zero weight basis."""
    ev = evaluator or OmegaEvaluator(config)
    basis = weight_space(config, sol.m).basis
    t = list(sol.t)
    return np.array([cmath.exp(sol.c * lam) * ev.multi(c, t, lam) for c in basis])


def generic_lambdas(config: ModelConfig, count: int, m: int, seed: int = 0) -> list[complex]:
    """Sample points with theta(lam + 2 eta k) kept away from zero for k <= m."""
    th = config.engine
    rng = np.random.default_rng(seed)
    scale = abs(th.theta_prime0)
    out = []
    while len(out) < count:
        lam = complex(*rng.uniform(-0.5, 0.5, 2))
        if all(abs(th(lam + 2 * config.eta * k)) > 1e-6 * scale for k in range(-m, m + 1)):
            out.append(lam)
    return out


@dataclass
class VerifyReport:
    eigen: list[float]
    multiplier: float
    pairing: float
    eps_spread: list[float] = field(default_factory=list)


def bethe_verify(config: ModelConfig, sol: BetheSolution, lambda_samples: int | Sequence[complex] = 5,
                 seed: int = 0, provider: RProvider | None = None) -> VerifyReport:
    """Residuals of H_j psi = eps_j psi, of the multiplier relation and of the pairing identity."""
    if sol.diagonal:
        raise ConfigError("diagonal solutions give a vanishing eigenfunction")
    lams = (generic_lambdas(config, lambda_samples, sol.m, seed)
            if isinstance(lambda_samples, int) else list(lambda_samples))
    provider = provider or RProvider(config.engine)
    space = weight_space(config, sol.m)
    ev = OmegaEvaluator(config)

    def psi(lam):
        return bethe_psi(config, sol, lam, ev)

    eigen, spread = [], []
    for j in range(1, config.n + 1):
        H = build_H(config, j, provider, space)
        worst = 0.0
        ratios = []
        for lam in lams:
            v = psi(lam)
            Hv = H.apply(psi, lam)
            worst = max(worst, float(np.linalg.norm(Hv - sol.eps[j - 1] * v) / np.linalg.norm(v)))
            k = int(np.argmax(np.abs(v)))
            ratios.append(Hv[k] / v[k])
        eigen.append(worst)
        spread.append(float(max(abs(r - ratios[0]) for r in ratios)))
    mult = 0.0
    for lam in lams:
        v = psi(lam)
        mult = max(mult, float(np.abs(psi(lam + 1) - sol.multiplier * v).max() / np.abs(v).max()))
    pairing = pairing_residual(config, sol, lams, seed, provider, space, ev)
    return VerifyReport(eigen, mult, pairing, spread)


def pairing_residual(config: ModelConfig, sol: BetheSolution, lams: Sequence[complex], seed: int = 0,
                 provider: RProvider | None = None, space=None, ev: OmegaEvaluator | None = None) -> float:
    """Pairing identity for H_1 tested on w = u (x) v with u = e_k^* and random v.

    omega(lam - 2 eta mu) Htilde_1(lam - 2 eta mu)^* w = exp(2 eta c mu) eps_1 omega(lam) w at the roots.
    """
    provider = provider or RProvider(config.engine)
    space = space or weight_space(config, sol.m)
    ev = ev or OmegaEvaluator(config)
    eta = config.eta
    rng = np.random.default_rng(seed)
    H = build_H(config, 1, provider, space)
    t = list(sol.t)

    def omega_vec(lam):
        return np.array([ev.multi(c, t, lam) for c in space.basis])

    worst = 0.0
    for lam in lams:
        for mu, A in H.terms.items():
            rows = [i for i, c in enumerate(space.basis)
                    if abs(space.weights[0] - 2 * c[0] - mu) < 1e-9]
            ks = sorted({space.basis[i][0] for i in rows})
            for k in ks:
                w = np.zeros(space.dim, dtype=complex)
                sel = [i for i in rows if space.basis[i][0] == k]
                w[sel] = rng.normal(size=len(sel)) + 1j * rng.normal(size=len(sel))
                lhs = w @ A(lam) @ omega_vec(lam - 2 * eta * mu)
                rhs = cmath.exp(2 * eta * sol.c * mu) * sol.eps[0] * (w @ omega_vec(lam))
                worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return worst


@dataclass(frozen=True)
class CompletenessTask:
    N: int
    alpha: float
    mu0: complex = 0.1234 + 0.0567j

    def __post_init__(self):
        if self.N < 1 or self.N % 2 == 0:
            raise ConfigError("N must be a positive odd integer")

    @property
    def eta(self) -> float:
        return 1 / (2 * self.N)


@dataclass
class CompletenessReport:
    solutions: list[BetheSolution]
    expected: int
    det_abs: float
    det_normalized: float
    vandermonde: complex
    labels: list[tuple[tuple[int, ...], int]]


def vandermonde_factor(N: int) -> complex:
    x = [cmath.exp(4j * math.pi * r / N) for r in range(N)]
    out = 1.0 + 0j
    for r in range(N):
        for s in range(r):
            out *= x[r] - x[s]
    return out


def _local_start(config: ModelConfig, K: Sequence[int], c: complex) -> list[complex]:
    """Asymptotic start refined for m = 1: t = z_k - a_k + u with u from the leading pole term."""
    t = asymptotic_start(config, K)
    if len(t) != 1:
        return t
    th = config.engine
    k = list(K).index(1)
    t0 = t[0]
    rest = 1.0 + 0j
    for l, (z, a) in enumerate(zip(config.z, config.a)):
        if l != k:
            rest *= th.ratio(t0 - z - a, t0 - z + a)
    # lhs^{-1} ~ rest * theta(-2 a_k) / (theta'(0) u) = exp(4 eta c)
    u = rest * th(-2 * config.a[k]) / (th.theta_prime0 * cmath.exp(4 * config.eta * c))
    return [t0 + u]


def completeness_det(task: CompletenessTask, config: ModelConfig, lam: complex | None = None) -> CompletenessReport:
    N = task.N
    if abs(config.eta - task.eta) > 1e-14:
        raise ConfigError("the model needs 2 eta = 1/N")
    if any(integer_value(x) is None for x in config.Lambda):
        raise ConfigError("weights must be integers")
    m = config.zero_weight_m()
    if N <= m:
        raise ConfigError("N must exceed m")
    space = weight_space(config, m)
    dim = space.dim
    expected = N * dim
    c0 = math.log(task.alpha) + m * math.pi * 1j
    sols, labels = [], []
    keys: list = []
    tau = config.elliptic.tau
    for K in enumerate_compositions(config.n, m, config.caps):
        for r in range(N):
            c = c0 + 2j * math.pi * r
            for sol in bethe_solve(config, c, [_local_start(config, K, c)]):
                key = canonical(sol.t, tau) + (round(r),)
                if any(k[-1] == r and _same(key[:-1], k[:-1], tau) for k in keys):
                    continue
                keys.append(key)
                sols.append(sol)
                labels.append((tuple(K), r))
    if len(sols) < expected:
        raise SolutionDeficit(f"found {len(sols)} of {expected} solutions")
    lam = task.mu0 if lam is None else lam
    ev = OmegaEvaluator(config)
    cols = []
    for sol in sols:
        cols.append(np.concatenate([bethe_psi(config, sol, lam + i / N, ev) for i in range(N)]))
    A = np.array(cols).T
    det = np.linalg.det(A)
    # rows carry the common factors exp(c0 * i / N); Hadamard ratio over row norms
    norm = float(np.prod(np.linalg.norm(A, axis=1)))
    return CompletenessReport(sols, expected, float(abs(det)), float(abs(det) / norm),
                              vandermonde_factor(N), labels)
