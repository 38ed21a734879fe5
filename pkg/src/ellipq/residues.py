"""Numerical residues by trapezoid rules on circles, nested for several variables.

A nested residue res_{t_1=p_1} ... res_{t_m=p_m} f is evaluated as one integral
over a product of circles whose radii grow from the innermost variable t_m
outwards by the factor ``growth``.  A moving pole of t_{i+1} at t_i + 2*eta then
stays outside the smaller circle of t_{i+1}, so integrating t_m first, then
t_{m-1}, and so on reproduces the iterated residue in the prescribed order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import AdaptivityFailure, ContourError, DepthLimit, SingularConfiguration
from .model import Composition, ModelConfig, enumerate_compositions, lattice_distance
from .omega import OmegaEvaluator

MAX_DEPTH = 4


@dataclass(frozen=True)
class ContourSpec:
    radius: float = 1e-2
    points: int = 32
    growth: float = 3.0
    auto_shrink: bool = True
    check_adaptivity: bool = False

    def __post_init__(self):
        if not self.radius > 0 or self.points < 4 or not self.growth > 1:
            raise ValueError("invalid contour parameters")


def _nodes(M: int) -> np.ndarray:
    return np.exp(2j * math.pi * np.arange(M) / M)


def _trapezoid(f, centers, radii, M, batch: int = 0):
    m = len(centers)
    w = _nodes(M)
    t = []
    for i, (p, rho) in enumerate(zip(centers, radii)):
        shape = [1] * m
        shape[i] = M
        t.append((p + rho * w).reshape(shape))
    if batch:
        vals = np.stack([np.broadcast_to(np.asarray(v, dtype=complex), (M,) * m) for v in f(t)])
    else:
        vals = np.broadcast_to(np.asarray(f(t), dtype=complex), (M,) * m)
    weight = 1.0
    for i in range(m):
        weight = weight * (t[i] - centers[i])
    g = vals * weight
    mag = np.abs(g)
    if not np.all(np.isfinite(mag)):
        raise ContourError("contour sample hit a pole")
    scale = float(np.median(mag))
    if scale > 0 and mag.max() > 1e12 * scale:
        raise ContourError("contour sample hit a pole")
    axes = tuple(range(g.ndim - m, g.ndim))
    val = g.mean(axis=axes) if m else g
    return (val.astype(complex) if batch else complex(val)), scale


def residue_1d(f: Callable, t0: complex, spec: ContourSpec = ContourSpec()) -> complex:
    """res_{t=t0} f for a function of one variable."""
    val, scale = _trapezoid(lambda t: f(t[0]), [t0], [spec.radius], spec.points)
    if spec.check_adaptivity:
        val2, _ = _trapezoid(lambda t: f(t[0]), [t0], [spec.radius], 2 * spec.points)
        if abs(val2 - val) > 1e-8 * max(abs(val), scale):
            raise AdaptivityFailure("residue changed under node doubling")
    return val


def safe_radii(centers: Sequence[complex], catalog: Sequence[complex], tau: complex,
               spec: ContourSpec) -> list[float]:
    """Radii from inner-most (last) to outer-most (first) variable respecting the pole catalog."""
    m = len(centers)
    g = spec.growth
    rho = spec.radius
    if catalog:
        for i, p in enumerate(centers):
            d = min((lattice_distance(p - c, tau) for c in catalog
                     if lattice_distance(p - c, tau) > 1e-12), default=math.inf)
            limit = d / (3 * g ** (m - 1 - i) + g ** (m - 1))
            if rho > limit:
                if not spec.auto_shrink:
                    raise ContourError("contour radius too large for the pole configuration")
                rho = limit
    return [rho * g ** (m - 1 - i) for i in range(m)]


def nested_residue(f: Callable, centers: Sequence[complex], spec: ContourSpec = ContourSpec(),
                   catalog: Sequence[complex] = (), tau: complex = 1j, batch: bool = False):
    """res_{t_1=centers[0]} ... res_{t_m=centers[-1]} f, inner-most variable last.

    With ``batch`` f returns a list of values and an array of residues is returned.
    """
    m = len(centers)
    if m > MAX_DEPTH:
        raise DepthLimit(f"nested residue depth {m} exceeds {MAX_DEPTH}")
    if m == 0:
        return np.array(f([]), dtype=complex) if batch else complex(f([]))
    radii = safe_radii(centers, catalog, tau, spec)
    val, scale = _trapezoid(f, centers, radii, spec.points, batch)
    if spec.check_adaptivity:
        val2, _ = _trapezoid(f, centers, radii, 2 * spec.points, batch)
        if np.max(np.abs(val2 - val)) > 1e-8 * max(np.max(np.abs(val)), scale):
            raise AdaptivityFailure("nested residue changed under node doubling")
    return val


def residue_points(config: ModelConfig, comp: Composition) -> list[complex]:
    """Residue positions for res_{m_1..m_n}: block l is a 2*eta staircase ending at z_l + a_l."""
    eta = config.eta
    pts = []
    for l, ml in enumerate(comp):
        top = config.z[l] + config.a[l]
        pts.extend(top - 2 * eta * (ml - s) for s in range(1, ml + 1))
    return pts


def pole_catalog(config: ModelConfig, centers: Sequence[complex]) -> list[complex]:
    eta = config.eta
    cat = [z + a for z, a in zip(config.z, config.a)]
    for p in centers:
        cat.extend([p, p + 2 * eta, p - 2 * eta])
    return cat


def res_iterated(f: Callable, comp: Composition, config: ModelConfig,
                 spec: ContourSpec = ContourSpec(), batch: bool = False):
    pts = residue_points(config, comp)
    return nested_residue(f, pts, spec, pole_catalog(config, pts), config.elliptic.tau, batch)


def tilde_points(k: int, m: int, z: complex, a: complex, eta: complex) -> list[complex]:
    top = z + a
    return [top - 2 * eta * (k - s) for s in range(1, k + 1)] + \
        [top - 2 * eta * (m - k - s) for s in range(1, m - k + 1)]


def res_tilde(f: Callable, k: int, m: int, z: complex, a: complex, eta: complex, tau: complex,
              spec: ContourSpec = ContourSpec(), batch: bool = False):
    """Coinciding-point functional: both staircases end at z + a; for k < m the factor
    (t_m - z - a) is inserted before the inner-most residue."""
    if not 0 <= k <= m:
        raise ValueError("need 0 <= k <= m")
    pts = tilde_points(k, m, z, a, eta)
    cat = [z + a]
    for p in pts:
        cat.extend([p, p + 2 * eta, p - 2 * eta])
    if k == m:
        return nested_residue(f, pts, spec, cat, tau, batch)
    if batch:
        return nested_residue(lambda t: [v * (t[-1] - z - a) for v in f(t)], pts, spec, cat, tau, batch)
    return nested_residue(lambda t: f(t) * (t[-1] - z - a), pts, spec, cat, tau)


def res_resonance(f: Callable, u: complex, ell: int, m: int, eta: complex, tau: complex,
                  spec: ContourSpec = ContourSpec(), catalog: Sequence[complex] = ()) -> Callable:
    """res_{(u, ell)} f as a function of the remaining variables t_1..t_{m-ell-1}."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    if ell >= m:
        return lambda rest: 0j
    pts = [u - 2 * eta * (ell - s) for s in range(ell + 1)]
    cat = list(catalog) + [x for p in pts for x in (p, p + 2 * eta, p - 2 * eta)]

    def g(rest):
        rest = list(rest)
        return nested_residue(lambda t: f(rest + list(t)), pts, spec, cat, tau)

    return g


@dataclass
class PairingMatrix:
    rows: list[Composition]
    cols: list[Composition]
    entries: np.ndarray

    @property
    def scale(self) -> float:
        return float(np.abs(self.entries).max())

    def triangularity_residual(self) -> float:
        """Largest entry that must vanish by the tail-sum criterion, relative to the scale."""
        worst = 0.0
        for r, row in enumerate(self.rows):
            for c, col in enumerate(self.cols):
                if not dominated(row, col):
                    worst = max(worst, abs(self.entries[r, c]))
        return worst / self.scale

    def cond(self) -> float:
        return float(np.linalg.cond(self.entries))


def dominated(row: Composition, col: Composition) -> bool:
    n = len(row)
    return all(sum(row[l:]) <= sum(col[l:]) for l in range(n))


def pairing_matrix(config: ModelConfig, m: int, lam, spec: ContourSpec = ContourSpec(),
                   comps: Sequence[Composition] | None = None) -> PairingMatrix:
    ev = OmegaEvaluator(config)
    comps = list(comps) if comps is not None else enumerate_compositions(config.n, m)
    B = np.array([res_iterated(lambda t: ev.many(comps, t, lam), r, config, spec, batch=True) for r in comps])
    return PairingMatrix(comps, comps, B)


def diagonal_formula(config: ModelConfig, comp: Composition, lam) -> complex:
    """Closed form of res_{m} omega_{m}."""
    th = config.engine
    eta = config.eta
    z, a = config.z, config.a
    tp = th.theta_prime0
    out = 1.0 + 0j
    for i, mi in enumerate(comp):
        shift = 2 * sum(a[l] - 2 * eta * comp[l] for l in range(i))
        for j in range(1, mi + 1):
            out *= th(lam - shift + 2 * eta * j) / tp
    for k, mk in enumerate(comp):
        for l in range(k):
            for j in range(1, mk + 1):
                out *= th(z[k] + a[k] - z[l] + a[l] - 2 * eta * (j - 1)) / \
                    th(z[k] + a[k] - z[l] - a[l] - 2 * eta * (j - 1))
    return out


def check_distinct_points(config: ModelConfig) -> None:
    tau = config.elliptic.tau
    pts = [z + a for z, a in zip(config.z, config.a)]
    for i in range(len(pts)):
        for j in range(i):
            if lattice_distance(pts[i] - pts[j], tau) < 1e-12:
                raise SingularConfiguration("residue points coincide")
