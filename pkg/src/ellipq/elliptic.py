"""Jacobi theta function, its log-derivative, and the one-variable phase function."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, PoleProximity

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class EllipticParams:
    tau: complex
    eta: complex
    p: complex | None = None

    def __post_init__(self):
        object.__setattr__(self, "tau", complex(self.tau))
        object.__setattr__(self, "eta", complex(self.eta))
        if self.p is not None:
            object.__setattr__(self, "p", complex(self.p))
        if not self.tau.imag > 0:
            raise ConfigError(f"Im(tau) must be positive, got {self.tau}")
        if self.p is not None and not self.p.imag > 0:
            raise ConfigError(f"Im(p) must be positive, got {self.p}")

    @property
    def q(self) -> complex:
        return np.exp(TWO_PI_I * self.tau)

    @property
    def r(self) -> complex:
        if self.p is None:
            raise ConfigError("step p is not set")
        return np.exp(TWO_PI_I * self.p)

    def with_p(self, p) -> "EllipticParams":
        return EllipticParams(self.tau, self.eta, p)


def _series_cutoff(tau: complex) -> int:
    # after reduction |Im t| <= Im(tau)/2, so the j-th term is bounded by
    # exp(-pi Im(tau) (|j+1/2|^2 - |j+1/2|)); ask for 1e-18 on that bound
    y = tau.imag
    J = 2
    while math.pi * y * ((J + 0.5) ** 2 - (J + 0.5)) < 42.0 or math.pi * y * (J - 0.5) ** 2 < 42.0:
        J += 1
    return J


@dataclass(frozen=True)
class ThetaEngine:
    params: EllipticParams
    series_cutoff: int = 0
    theta_prime0: complex = field(default=0j, compare=False)

    def __post_init__(self):
        if self.series_cutoff <= 0:
            object.__setattr__(self, "series_cutoff", _series_cutoff(self.params.tau))
        q = self.params.q
        prod = 1.0 + 0j
        j = 1
        while True:
            qj = q**j
            prod *= (1 - qj) ** 3
            if abs(qj) < 1e-18:
                break
            j += 1
        val = 2 * math.pi * np.exp(1j * math.pi * self.params.tau / 4) * prod
        object.__setattr__(self, "theta_prime0", complex(val))
        half = np.arange(-self.series_cutoff, self.series_cutoff) + 0.5
        object.__setattr__(self, "_half", half)
        object.__setattr__(self, "_quad", np.exp(1j * math.pi * half**2 * self.params.tau))

    @property
    def tau(self) -> complex:
        return self.params.tau

    @property
    def eta(self) -> complex:
        return self.params.eta

    def reduce(self, t):
        """Split t = s + k + n*tau with |Re s| <= 1/2 and |Im s| <= Im(tau)/2."""
        t = np.asarray(t, dtype=complex)
        tau = self.params.tau
        n = np.round(t.imag / tau.imag)
        s = t - n * tau
        k = np.round(s.real)
        return s - k, k, n

    def _series(self, s):
        phase = np.exp(TWO_PI_I * np.multiply.outer(s + 0.5, self._half))
        return -(phase * self._quad).sum(axis=-1)

    def __call__(self, t):
        s, k, n = self.reduce(t)
        val = self._series(s)
        sign = np.where((k + n) % 2 == 0, 1.0, -1.0)
        factor = sign * np.exp(-TWO_PI_I * n * s - 1j * math.pi * n * n * self.params.tau)
        out = factor * val
        return out if out.ndim else complex(out)

    def dlog(self, t):
        """Logarithmic derivative theta'(t)/theta(t)."""
        s, k, n = self.reduce(t)
        phase = np.exp(TWO_PI_I * np.multiply.outer(s + 0.5, self._half)) * self._quad
        val = -phase.sum(axis=-1)
        der = -(phase * (TWO_PI_I * self._half)).sum(axis=-1)
        out = der / val - TWO_PI_I * n
        return out if out.ndim else complex(out)

    def ratio(self, num, den):
        """theta(num)/theta(den), raising PoleProximity when the denominator is tiny."""
        d = self(den)
        if np.any(np.abs(d) < 1e-13 * abs(self.theta_prime0)):
            raise PoleProximity("theta denominator vanishes")
        return self(num) / d


def theta_eval(engine: ThetaEngine, t):
    return engine(t)


def theta_prime0(engine: ThetaEngine) -> complex:
    return engine.theta_prime0


@dataclass(frozen=True)
class PhaseEvaluator:
    params: EllipticParams
    a: complex
    product_cutoff: int | None = None

    def __post_init__(self):
        if self.params.p is None:
            raise ConfigError("phase function needs the step p")
        object.__setattr__(self, "a", complex(self.a))

    def _orders(self, scale: float) -> tuple[int, int]:
        if self.product_cutoff is not None:
            return self.product_cutoff, self.product_cutoff
        lr = math.log(abs(self.params.r))
        lq = math.log(abs(self.params.q))
        target = math.log(1e-18) - math.log(max(scale, 1.0))
        return int(math.ceil(target / lr)) + 1, int(math.ceil(target / lq)) + 1

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        p, a = self.params.p, self.a
        if a == 0:
            # numerator and denominator factors coincide
            out = np.ones_like(t)
            return out if out.ndim else complex(out)
        e_minus = np.exp(TWO_PI_I * (t - a))
        e_plus = np.exp(TWO_PI_I * (t + a))
        scale = float(np.max(np.abs(np.concatenate([np.ravel(e_minus), np.ravel(e_plus),
                                                     1 / np.ravel(e_minus), 1 / np.ravel(e_plus)]))))
        J, K = self._orders(scale)
        r, q = self.params.r, self.params.q
        rq = np.multiply.outer(r ** np.arange(J), q ** np.arange(K)).ravel()
        rq1 = rq * r * q
        x_m = np.multiply.outer(e_minus, rq)
        x_p = np.multiply.outer(e_plus, rq)
        y_m = np.multiply.outer(1 / e_minus, rq1)
        y_p = np.multiply.outer(1 / e_plus, rq1)
        num = (1 - x_m) * (1 - y_p)
        den = (1 - x_p) * (1 - y_m)
        if np.any(np.abs(num) < 1e-13) or np.any(np.abs(den) < 1e-13):
            raise PoleProximity("phase function factor vanishes")
        out = np.exp(-TWO_PI_I * a * t / p) * np.prod(num / den, axis=-1)
        return out if out.ndim else complex(out)


def phase_eval(phase: PhaseEvaluator, t):
    return phase(t)
