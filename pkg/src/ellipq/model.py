"""Model configuration and the composition bases of weight spaces."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .elliptic import EllipticParams, ThetaEngine
from .errors import ConfigError, UnreachableWeight

Composition = tuple[int, ...]


def enumerate_compositions(n: int, m: int, caps: Sequence[int | None] | None = None) -> list[Composition]:
    """All n-tuples of nonnegative integers summing to m, in lexicographic order."""
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    caps = list(caps) if caps is not None else [None] * n
    out: list[Composition] = []

    def rec(prefix: list[int], left: int, k: int):
        if k == n - 1:
            if caps[k] is None or left <= caps[k]:
                out.append(tuple(prefix + [left]))
            return
        top = left if caps[k] is None else min(left, caps[k])
        for j in range(top + 1):
            rec(prefix + [j], left - j, k + 1)

    rec([], m, 0)
    return out


def composition_weight(Lambda: Sequence[complex], comp: Composition) -> complex:
    return sum(L - 2 * j for L, j in zip(Lambda, comp))


def partial_weight(Lambda: Sequence[complex], comp: Composition, k: int) -> complex:
    """Weight of the first k factors (0-based: factors 0..k-1)."""
    return sum(Lambda[l] - 2 * comp[l] for l in range(k))


def integer_value(x: complex, tol: float = 1e-9) -> int | None:
    x = complex(x)
    r = round(x.real)
    if abs(x - r) < tol:
        return int(r)
    return None


def lattice_distance(x: complex, tau: complex) -> float:
    """Distance from x to the nearest point of Z + tau Z."""
    best = math.inf
    n0 = round(x.imag / tau.imag)
    for n in (n0 - 1, n0, n0 + 1):
        y = x - n * tau
        k0 = round(y.real)
        for k in (k0 - 1, k0, k0 + 1):
            best = min(best, abs(y - k))
    return best


@dataclass(frozen=True)
class ModelConfig:
    elliptic: EllipticParams
    Lambda: tuple[complex, ...]
    z: tuple[complex, ...]
    m: int = 0
    truncate: bool = False
    generic_guard: bool = True
    engine: ThetaEngine = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "Lambda", tuple(complex(x) for x in self.Lambda))
        object.__setattr__(self, "z", tuple(complex(x) for x in self.z))
        if len(self.Lambda) != len(self.z) or not self.Lambda:
            raise ConfigError("Lambda and z must have the same positive length")
        if self.m < 0:
            raise ConfigError("m must be nonnegative")
        if self.truncate and any(integer_value(L) is None or integer_value(L) < 0 for L in self.Lambda):
            raise ConfigError("truncation needs nonnegative integer weights")
        for i in range(len(self.z) if self.generic_guard else 0):
            for j in range(i):
                if lattice_distance(self.z[i] - self.z[j], self.elliptic.tau) < 1e-6:
                    raise ConfigError("evaluation points coincide modulo the lattice")
        if self.engine is None:
            object.__setattr__(self, "engine", ThetaEngine(self.elliptic))

    @property
    def n(self) -> int:
        return len(self.Lambda)

    @property
    def eta(self) -> complex:
        return self.elliptic.eta

    @property
    def a(self) -> tuple[complex, ...]:
        return tuple(self.eta * L for L in self.Lambda)

    @property
    def caps(self) -> list[int | None]:
        if not self.truncate:
            return [None] * self.n
        return [integer_value(L) for L in self.Lambda]

    def replace(self, **kw) -> "ModelConfig":
        if "elliptic" in kw:
            kw.setdefault("engine", None)
        return replace(self, **kw)

    def zero_weight_m(self) -> int:
        """m with sum(Lambda) = 2m, or raise."""
        tot = sum(self.Lambda) / 2
        m = integer_value(tot, 1e-12)
        if m is None or m < 0:
            raise UnreachableWeight(f"sum of weights {2 * tot} is not 2m")
        return m

    def basis(self, m: int | None = None) -> list[Composition]:
        return enumerate_compositions(self.n, self.m if m is None else m, self.caps)


def weight_space_basis(config: ModelConfig, target_weight: complex) -> list[Composition]:
    drop = (sum(config.Lambda) - target_weight) / 2
    m = integer_value(drop)
    if m is None or m < 0:
        raise UnreachableWeight(f"weight {target_weight} is not reachable")
    return enumerate_compositions(config.n, m, config.caps)


def multinomial(parts: Sequence[int]) -> int:
    out = math.factorial(sum(parts))
    for p in parts:
        out //= math.factorial(p)
    return out


def random_points(rng: np.random.Generator, k: int, tau: complex, size=()) -> np.ndarray:
    """Uniform samples in the fundamental cell, shape size + (k,)."""
    u = rng.random(size + (k,))
    v = rng.random(size + (k,))
    return (u - 0.5) + (v - 0.5) * tau
