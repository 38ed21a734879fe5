"""Registry of the named verification checks run by the command line driver.

Every check maps a SuiteConfig to a residual.  A check passes when its residual
is at most its tolerance; diagnostic checks always pass and never affect the
exit code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import aba, bethe, diffop, qkzb, residues, rmatrix
from .elliptic import EllipticParams, ThetaEngine
from .errors import ConfigError, UnknownCheck
from .model import ModelConfig, enumerate_compositions, integer_value
from .omega import OmegaEvaluator

DEFAULT_MODEL = {
    "tau": [0.1, 1.0],
    "eta": [0.13, 0.02],
    "p": [0.05, 0.7],
    "lambdas": [1, 1],
    "z": [[0.1, 0.05], [0.43, -0.12]],
}


def to_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError("complex numbers are [re, im] pairs")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        return complex(x.replace(" ", ""))
    return complex(x)


def from_complex(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class SuiteConfig:
    model: dict = field(default_factory=lambda: dict(DEFAULT_MODEL))
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    suites: list = field(default_factory=list)
    output: str | None = None
    block: int = 1
    lambda_samples: int = 5
    seeds: int = 3
    N: int = 3
    alpha: float = math.exp(10)

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        sc = cls(**{k: v for k, v in d.items()})
        model = dict(DEFAULT_MODEL)
        model.update(sc.model or {})
        sc.model = model
        for name in sc.suites:
            if name not in CHECKS:
                raise UnknownCheck(name)
        for name in sc.tolerances:
            if name not in CHECKS:
                raise UnknownCheck(name)
        return sc

    def elliptic(self, eta: complex | None = None) -> EllipticParams:
        m = self.model
        p = m.get("p")
        return EllipticParams(to_complex(m["tau"]), to_complex(m["eta"]) if eta is None else eta,
                              None if p is None else to_complex(p))

    def engine(self) -> ThetaEngine:
        return ThetaEngine(self.elliptic())

    def config(self, truncate: bool = False) -> ModelConfig:
        m = self.model
        return ModelConfig(self.elliptic(), tuple(to_complex(x) for x in m["lambdas"]),
                           tuple(to_complex(x) for x in m["z"]), truncate=truncate)

    def tolerance(self, name: str) -> float | None:
        return self.tolerances.get(name, CHECKS[name].tolerance)


@dataclass(frozen=True)
class Check:
    name: str
    run: Callable[[SuiteConfig], tuple[float, dict]]
    tolerance: float | None
    text: str
    diagnostic: bool = False


def _rand(rng, scale):
    return complex(*rng.uniform(-scale, scale, 2))


def _prop(kind):
    def run(sc: SuiteConfig):
        eng = sc.engine()
        worst, params = 0.0, []
        for s in range(sc.seeds):
            out = rmatrix.verify_property(kind, eng, sc.seed + s, sc.block)
            worst = max(worst, out["residual"])
            params.append({k: _jsonable(v) for k, v in out["params"].items()})
        return worst, {"samples": params}
    return run


def _jsonable(v):
    if isinstance(v, complex):
        return from_complex(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _pairing(sc: SuiteConfig):
    cfg = sc.config()
    rng = np.random.default_rng(sc.seed)
    lam = _rand(rng, 0.5)
    pm = residues.pairing_matrix(cfg, sc.block, lam)
    diag = max(abs(pm.entries[i, i] - residues.diagonal_formula(cfg, c, lam)) / abs(pm.entries[i, i])
               for i, c in enumerate(pm.rows))
    return max(pm.triangularity_residual(), diag), {"lambda": from_complex(lam), "m": sc.block}


def _zero_config(sc: SuiteConfig, truncate: bool = False) -> ModelConfig:
    cfg = sc.config(truncate)
    cfg.zero_weight_m()
    return cfg


def _h_commute(sc: SuiteConfig):
    cfg = _zero_config(sc)
    prov = rmatrix.RProvider(cfg.engine)
    worst = 0.0
    for i in range(1, cfg.n + 1):
        for j in range(i + 1, cfg.n + 1):
            worst = max(worst, diffop.commutator_residual(diffop.build_H(cfg, i, prov), diffop.build_H(cfg, j, prov),
                                                          sc.lambda_samples, sc.seed))
    return worst, {}


def _integer_config(sc: SuiteConfig) -> ModelConfig:
    cfg = _zero_config(sc)
    L = integer_value(cfg.Lambda[0])
    if L is None or any(abs(x - L) > 1e-12 for x in cfg.Lambda):
        raise ConfigError("this check needs equal integer weights")
    return cfg.replace(truncate=True)


def _transfer(sc: SuiteConfig):
    cfg = _integer_config(sc)
    rng = np.random.default_rng(sc.seed)
    w1, w2 = _rand(rng, 0.5), _rand(rng, 0.5)
    prov = rmatrix.RProvider(cfg.engine)
    res = diffop.commutator_residual(diffop.build_T(cfg, w1, prov), diffop.build_T(cfg, w2, prov),
                                     sc.lambda_samples, sc.seed)
    return res, {"w": [from_complex(w1), from_complex(w2)]}


def _h_equals_t(sc: SuiteConfig):
    cfg = _integer_config(sc)
    if any(abs(x - 1) > 1e-12 for x in cfg.Lambda):
        raise ConfigError("this check needs all weights equal to one")
    prov = rmatrix.RProvider(cfg.engine)
    worst = max(diffop.op_equal(diffop.build_H(cfg, j, prov), diffop.build_T(cfg, cfg.z[j - 1], prov),
                                sc.lambda_samples, sc.seed) for j in range(1, cfg.n + 1))
    return worst, {}


def _exchange(sc: SuiteConfig):
    cfg = _zero_config(sc)
    worst = max(diffop.verify_exchange(cfg, j, lambda_samples=sc.lambda_samples, seed=sc.seed)
                for j in range(1, cfg.n))
    return worst, {}


def _flatness(sc: SuiteConfig):
    cfg = _zero_config(sc)
    worst = 0.0
    for i in range(1, cfg.n + 1):
        for j in range(i + 1, cfg.n + 1):
            worst = max(worst, diffop.flatness_residual(cfg, i, j, lambda_samples=sc.lambda_samples, seed=sc.seed))
    return worst, {}


def _solution(sc: SuiteConfig, cfg: ModelConfig) -> bethe.BetheSolution:
    m = cfg.zero_weight_m()
    rng = np.random.default_rng(sc.seed)
    if m == 1:
        while True:
            t = _rand(rng, 0.4)
            try:
                sol = bethe.solution_from_root(cfg, t)
            except ArithmeticError:
                continue
            return sol
    fails: list = []
    for K in enumerate_compositions(cfg.n, m, cfg.caps):
        if max(K) > 1:
            continue
        sols = bethe.bethe_solve(cfg, 6.0, [bethe.asymptotic_start(cfg, K)], fails)
        if sols:
            return sols[0]
    raise ConfigError(f"no Bethe solution found: {fails}")


def _bethe(sc: SuiteConfig):
    cfg = _zero_config(sc)
    sol = _solution(sc, cfg)
    rep = bethe.bethe_verify(cfg, sol, sc.lambda_samples, sc.seed)
    return max(rep.eigen), {"t": _jsonable(list(sol.t)), "c": from_complex(sol.c),
                            "bethe_residual": sol.residual, "multiplier_residual": rep.multiplier,
                            "eigenvalue_spread": max(rep.eps_spread)}


def _pairing_identity(sc: SuiteConfig):
    cfg = _zero_config(sc)
    sol = _solution(sc, cfg)
    lams = bethe.generic_lambdas(cfg, sc.lambda_samples, sol.m, sc.seed)
    return bethe.pairing_residual(cfg, sol, lams, sc.seed), {"t": _jsonable(list(sol.t))}


def _completeness(sc: SuiteConfig):
    task = bethe.CompletenessTask(sc.N, sc.alpha)
    cfg = ModelConfig(sc.elliptic(task.eta), tuple(to_complex(x) for x in sc.model["lambdas"]),
                      tuple(to_complex(x) for x in sc.model["z"]))
    rep = bethe.completeness_det(task, cfg)
    return 1 / rep.det_normalized, {"solutions": len(rep.solutions), "expected": rep.expected,
                                    "det_normalized": rep.det_normalized,
                                    "vandermonde_abs": abs(rep.vandermonde)}


def _aba_compare(sc: SuiteConfig):
    cfg = sc.config()
    rng = np.random.default_rng(sc.seed)
    worst = 0.0
    for m in range(1, sc.block + 1):
        t = [_rand(rng, 0.4) for _ in range(m)]
        worst = max(worst, aba.comparison_residual(cfg, t, _rand(rng, 0.5), _rand(rng, 0.5)))
    return worst, {}


def _aba_transfer(sc: SuiteConfig):
    cfg = _zero_config(sc)
    sol = _solution(sc, cfg)
    s, c = aba.to_shifted(cfg, sol)
    rep = aba.aba_transfer_verify(cfg, s, c, 5, seed=sc.seed)
    return max(rep.eigen, rep.shifted_residual, rep.bethe_residual), {"multiplier_residual": rep.multiplier}


def _integrand(sc: SuiteConfig) -> qkzb.JacksonIntegrand:
    return qkzb.JacksonIntegrand(sc.config())


def _phase_shift(sc: SuiteConfig):
    J = _integrand(sc)
    rng = np.random.default_rng(sc.seed)
    worst = 0.0
    for m in (1, 2):
        t = [_rand(rng, 0.4) for _ in range(m)]
        for j in range(1, J.config.n + 1):
            worst = max(worst, qkzb.verify_phase_shift(J, t, J.config.z, j))
    return worst, {}


def _q_product(sc: SuiteConfig):
    J = _integrand(sc)
    cfg = J.config
    rng = np.random.default_rng(sc.seed)
    ev = OmegaEvaluator(cfg)
    lam = _rand(rng, 0.5)
    comp = enumerate_compositions(cfg.n, 2)[-1]
    t = [_rand(rng, 0.4) for _ in range(2)]
    worst = max(qkzb.verify_q_product(J, lambda s: ev.multi(comp, s, lam), mp, t) for mp in range(3))
    xi = max(qkzb.xi_bookkeeping_residual(J, t, k, lam) for k in range(3))
    return max(worst, xi), {"composition": list(comp)}


def _jackson(sc: SuiteConfig):
    J = _integrand(sc)
    cfg = J.config
    m = cfg.zero_weight_m()
    rng = np.random.default_rng(sc.seed)
    t0 = [_rand(rng, 0.4) for _ in range(m)]
    rep = qkzb.jackson_sum_diagnostic(J, t0, 2, _rand(rng, 0.5))
    return rep.residual[-1], {"K": rep.K, "residuals": rep.residual, "skipped": rep.skipped,
                              "monotone": rep.monotone}


CHECKS: dict[str, Check] = {c.name: c for c in [
    Check("ybe", _prop("dybe"), 1e-8,
          "Dynamical Yang-Baxter equation for R-matrices of three generic weights on a weight block of the triple product."),
    Check("unitarity", _prop("unitarity"), 1e-9,
          "Unitarity R_{L,M}(z, lam) P R_{M,L}(-z, lam) P = 1 on one weight block."),
    Check("zero-weight", _prop("zero_weight"), 1e-12,
          "The R-matrix commutes with the total weight h1 + h2."),
    Check("z-limit", _prop("z_limit"), 1e-4,
          "R(z, lam) at |z| = 1e-6 against the coinciding point construction, which is the flip."),
    Check("invariant-subspace", _prop("invariant_subspace"), 1e-8,
          "For integer weight the span of e_k with k > Lambda is invariant: quotient coupling entries vanish."),
    Check("residue-pairing", _pairing, 1e-8,
          "Iterated residues of omega functions: triangularity and the closed diagonal formula."),
    Check("h-commute", _h_commute, 1e-8,
          "The difference operators H_i and H_j commute."),
    Check("transfer", _transfer, 1e-8,
          "Transfer matrices at two spectral parameters commute."),
    Check("h-equals-t", _h_equals_t, 1e-8,
          "For weights one, H_j equals the transfer matrix at z_j."),
    Check("exchange", _exchange, 1e-8,
          "The exchange operator S_j intertwines H_j with H_{j+1} of the swapped data."),
    Check("flatness", _flatness, 1e-8,
          "Compatibility of the qKZB operators under shifts of two evaluation points by p."),
    Check("bethe", _bethe, 1e-7,
          "Eigenfunction built from a Bethe root: |H_j psi - eps_j psi| / |psi|."),
    Check("e09", _pairing_identity, 1e-8,
          "Pairing identity for H_1 tested on product covectors at a Bethe root."),
    Check("completeness", _completeness, 1e6,
          "Inverse normalized determinant of N dim V[0] Bethe eigenfunctions at 2 eta = 1/N (N odd)."),
    Check("aba-compare", _aba_compare, 1e-8,
          "b-operator product states against weighted sums of omega functions."),
    Check("aba-transfer", _aba_transfer, 1e-8,
          "Algebraic transfer matrix eigenvalue at shifted Bethe roots."),
    Check("phase-shift", _phase_shift, 1e-10,
          "Shift of an evaluation point by p multiplies the phase function by the theta ratio rho_j."),
    Check("q-product", _q_product, 1e-9,
          "Products of the shift operators Q_i, and the xi argument bookkeeping."),
    Check("jackson-diagnostic", _jackson, None,
          "Truncated lattice sums of the integrand and their qKZB residual (diagnostic only).", True),
]}


def explain(name: str) -> str:
    if name not in CHECKS:
        raise UnknownCheck(name)
    c = CHECKS[name]
    tol = "none (diagnostic)" if c.tolerance is None else f"{c.tolerance:g}"
    return f"{c.name}: {c.text}\n  default tolerance: {tol}\n  default model: {DEFAULT_MODEL}"
