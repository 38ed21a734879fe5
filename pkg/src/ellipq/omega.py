"""Weight functions omega of the spaces F^m and the twisted symmetric group action.

All evaluators accept t as a sequence of m arrays that broadcast against each
other, so a product grid (one axis per variable) costs one theta evaluation per
variable or pair of variables rather than one per grid point.
"""
from __future__ import annotations

import math
from itertools import permutations
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import CombinatorialOverflow, PoleProximity
from .model import Composition, ModelConfig, multinomial, random_points

Func = Callable[[Sequence], np.ndarray]

MAX_TERMS = 10**7


def label_sequences(comp: Composition) -> Iterator[tuple[int, ...]]:
    """Distinct sequences assigning each of sum(comp) variables a site index."""
    m = sum(comp)
    counts = list(comp)
    seq = [0] * m

    def rec(i: int):
        if i == m:
            yield tuple(seq)
            return
        for k, c in enumerate(counts):
            if c:
                counts[k] -= 1
                seq[i] = k
                yield from rec(i + 1)
                counts[k] += 1

    yield from rec(0)


class OmegaEvaluator:
    def __init__(self, config: ModelConfig):
        self.config = config
        self.engine = config.engine
        self.eta = config.eta
        self._guard = 1e-10 * abs(self.engine.theta_prime0)

    def _den(self, x):
        d = self.engine(x)
        if np.any(np.abs(d) < self._guard):
            raise PoleProximity("evaluation point on the pole divisor")
        return d

    def site_lambda_shift(self, comp: Composition, k: int) -> complex:
        """Dynamical argument offset 2*eta*m_k - 2*eta*(weights of sites before k)."""
        L = self.config.Lambda
        return 2 * self.eta * comp[k] - 2 * self.eta * sum(L[l] - 2 * comp[l] for l in range(k))

    def one_point(self, m: int, t: Sequence, lam, z: complex, a: complex):
        th = self.engine
        out = 1.0 + 0j
        for i in range(m):
            for j in range(i + 1, m):
                out = out * th(t[i] - t[j]) / self._den(t[i] - t[j] + 2 * self.eta)
        for j in range(m):
            out = out * th(lam + 2 * self.eta * m + t[j] - z - a) / self._den(t[j] - z - a)
        return out

    def u(self, t: Sequence):
        th = self.engine
        out = 1.0 + 0j
        m = len(t)
        for i in range(m):
            for j in range(i + 1, m):
                out = out * th(t[i] - t[j] + 2 * self.eta) / self._den(t[i] - t[j])
        return out

    def multi(self, comp: Composition, t: Sequence, lam, memo: dict | None = None):
        """omega_{comp}(t, lam); ``memo`` shares theta factors between calls on the same t."""
        cfg = self.config
        th = self.engine
        eta = self.eta
        m = sum(comp)
        if len(t) != m:
            raise ValueError("number of variables does not match the composition")
        if multinomial(comp) > MAX_TERMS:
            raise CombinatorialOverflow("too many index subsets")
        if m == 0:
            return np.ones(np.shape(lam), dtype=complex) if np.ndim(lam) else 1.0 + 0j
        memo = {} if memo is None else memo
        z, a = cfg.z, cfg.a

        def den(i, k):
            key = ("den", i, k)
            if key not in memo:
                memo[key] = self._den(t[i] - z[k] - a[k])
            return memo[key]

        def site(i, k):
            key = ("site", i, k)
            if key not in memo:
                memo[key] = th(t[i] - z[k] + a[k]) / den(i, k)
            return memo[key]

        def lamf(i, k):
            shift = self.site_lambda_shift(comp, k)
            key = ("lam", i, k, shift)
            if key not in memo:
                memo[key] = th(lam + t[i] - z[k] - a[k] + shift) / den(i, k)
            return memo[key]

        if ("cross",) not in memo:
            cross: dict[tuple[int, int], np.ndarray] = {}
            u_inv = 1.0 + 0j
            for i in range(m):
                for j in range(i + 1, m):
                    d = th(t[i] - t[j])
                    if np.any(np.abs(d) < 1e-8 * abs(th.theta_prime0)):
                        raise PoleProximity("variables too close to the diagonal")
                    n_ij = th(t[i] - t[j] + 2 * eta)
                    n_ji = th(t[j] - t[i] + 2 * eta)
                    cross[i, j] = n_ij / d
                    cross[j, i] = -n_ji / d
                    u_inv = u_inv * d / self._den(t[i] - t[j] + 2 * eta)
            memo[("cross",)] = (cross, u_inv)
        cross, u_inv = memo[("cross",)]
        total = 0j
        for lab in label_sequences(comp):
            term = 1.0 + 0j
            for i, l in enumerate(lab):
                term = term * lamf(i, l)
                for k in range(l):
                    term = term * site(i, k)
            for i in range(m):
                for j in range(m):
                    if lab[i] < lab[j]:
                        term = term * cross[i, j]
            total = total + term
        return u_inv * total

    def many(self, comps: Sequence[Composition], t: Sequence, lam) -> list:
        memo: dict = {}
        return [self.multi(c, t, lam, memo) for c in comps]

    def function(self, comp: Composition, lam) -> Func:
        return lambda t: self.multi(comp, t, lam)


def omega_one_point(ev: OmegaEvaluator, m: int, t: Sequence, lam, z: complex, a: complex):
    return ev.one_point(m, t, lam, z, a)


def omega_multi(ev: OmegaEvaluator, comp: Composition, t: Sequence, lam):
    return ev.multi(comp, t, lam)


# twisted symmetric group action

def s_act(engine, eta: complex, j: int, f: Func) -> Func:
    """The function s_j f, with 1-based j."""
    def g(t):
        t = list(t)
        sw = t[:]
        sw[j - 1], sw[j] = t[j], t[j - 1]
        d = engine(t[j - 1] - t[j] + 2 * eta)
        if np.any(np.abs(d) < 1e-10 * abs(engine.theta_prime0)):
            raise PoleProximity("s-action denominator vanishes")
        return f(sw) * engine(t[j - 1] - t[j] - 2 * eta) / d
    return g


def s_action(ev: OmegaEvaluator, j: int, f: Func, t: Sequence):
    if not 1 <= j < len(t):
        raise ValueError("s_j needs 1 <= j <= m-1")
    return s_act(ev.engine, ev.eta, j, f)(t)


def group_orbit(engine, eta: complex, m: int, f: Func) -> list[Func]:
    """All sigma f for sigma in S_m, generated from the simple reflections."""
    seen = {tuple(range(m)): f}
    frontier = [(tuple(range(m)), f)]
    while frontier:
        nxt = []
        for perm, g in frontier:
            for j in range(1, m):
                img = tuple(j if x == j - 1 else j - 1 if x == j else x for x in perm)
                if img not in seen:
                    h = s_act(engine, eta, j, g)
                    seen[img] = h
                    nxt.append((img, h))
        frontier = nxt
    return list(seen.values())


def twisted_sym(engine, eta: complex, m: int, f: Func) -> Func:
    orbit = group_orbit(engine, eta, m, f)
    return lambda t: sum(g(t) for g in orbit)


def phi_map(engine, eta: complex, f: Func, mp: int, sites: Sequence[tuple[complex, complex]],
            g: Func, mpp: int) -> Func:
    """Tensor product map of weight functions; sites are the (z, a) pairs carried by f."""
    norm = math.factorial(mp) * math.factorial(mpp)

    def prod(t):
        t = list(t)
        out = f(t[:mp]) * g(t[mp:])
        for j in range(mp, mp + mpp):
            for z, a in sites:
                out = out * engine(t[j] - z + a) / engine(t[j] - z - a)
        return out

    sym = twisted_sym(engine, eta, mp + mpp, prod)
    return lambda t: sym(t) / norm


def sym_oracle_function(ev: OmegaEvaluator, comp: Composition, lam) -> Func:
    cfg = ev.config
    L, z, a = cfg.Lambda, cfg.z, cfg.a

    def one(k, lam_k):
        return lambda t: ev.one_point(comp[k], t, lam_k, z[k], a[k])

    F = one(0, lam)
    shift = 0j
    for k in range(1, cfg.n):
        shift += L[k - 1] - 2 * comp[k - 1]
        F = phi_map(ev.engine, ev.eta, F, sum(comp[:k]), list(zip(z[:k], a[:k])),
                    one(k, lam - 2 * ev.eta * shift), comp[k])
    return F


def omega_sym_oracle(ev: OmegaEvaluator, comp: Composition, t: Sequence, lam):
    return sym_oracle_function(ev, comp, lam)(t)


def check_membership(ev: OmegaEvaluator, f: Func, m: int, lam, n_points: int = 6, seed: int = 0) -> dict:
    """Max relative deviations of f from the defining transformation laws."""
    th = ev.engine
    tau, eta = th.tau, ev.eta
    rng = np.random.default_rng(seed)
    report = {"periodic": 0.0, "tau_multiplier": 0.0, "g_multiplier": 0.0, "g_symmetric": 0.0}

    def g(t):
        return ev.u(t) * f(t)

    done = 0
    while done < n_points:
        t = list(random_points(rng, m, tau))
        try:
            v = f(t)
            gv = g(t)
        except PoleProximity:
            continue
        if abs(v) < 1e-8:
            continue
        done += 1
        for j in range(m):
            tp = t[:]
            tp[j] += 1
            report["periodic"] = max(report["periodic"], abs(f(tp) - v) / abs(v))
            tp = t[:]
            tp[j] += tau
            mult = np.exp(-2j * np.pi * (lam + 4 * eta * (j + 1) - 2 * eta))
            report["tau_multiplier"] = max(report["tau_multiplier"], abs(f(tp) - mult * v) / abs(v))
            gmult = np.exp(-2j * np.pi * (lam + 2 * eta * m))
            report["g_multiplier"] = max(report["g_multiplier"], abs(g(tp) - gmult * gv) / abs(gv))
        for perm in permutations(range(m)):
            tp = [t[i] for i in perm]
            report["g_symmetric"] = max(report["g_symmetric"], abs(g(tp) - gv) / abs(gv))
    return report


def evaluation_matrix(ev: OmegaEvaluator, comps: Sequence[Composition], lam, n_points: int,
                      seed: int = 0) -> np.ndarray:
    """Rows: compositions, columns: random sample points kept away from the pole divisor."""
    rng = np.random.default_rng(seed)
    m = sum(comps[0])
    cols = []
    while len(cols) < n_points:
        t = list(random_points(rng, m, ev.engine.tau))
        if _near_divisor(ev, t, 1e-3):
            continue
        cols.append([ev.multi(c, t, lam) for c in comps])
    return np.array(cols).T


def _near_divisor(ev: OmegaEvaluator, t, tol: float) -> bool:
    th = ev.engine
    scale = abs(th.theta_prime0)
    cfg = ev.config
    for i, ti in enumerate(t):
        for z, a in zip(cfg.z, cfg.a):
            if abs(th(ti - z - a)) < tol * scale:
                return True
        for j, tj in enumerate(t):
            if i != j and (abs(th(ti - tj + 2 * ev.eta)) < tol * scale or abs(th(ti - tj)) < tol * scale):
                return True
    return False
