"""Weight blocks of tensor products and embedding of operators acting on some factors.

An operator acting on the factors ``positions`` whose dynamical argument is
shifted by -2*eta times the weight of the factors ``shift`` is assembled column
by column: the shifted argument is evaluated on each basis vector separately.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .model import Composition, enumerate_compositions

# op(sub_drop, lam) -> matrix on the capped compositions of sub_drop over the acted factors
BlockOp = Callable[[int, complex], np.ndarray]


class BlockSpace:
    def __init__(self, weights: Sequence[complex], drop: int, caps: Sequence[int | None] | None = None):
        self.weights = tuple(complex(w) for w in weights)
        self.n = len(self.weights)
        self.caps = tuple(caps) if caps is not None else (None,) * self.n
        self.drop = drop
        self.basis = enumerate_compositions(self.n, drop, self.caps)
        self.index = {c: i for i, c in enumerate(self.basis)}
        self._sub: dict = {}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def weight(self, comp: Composition, factors: Sequence[int]) -> complex:
        return sum(self.weights[j] - 2 * comp[j] for j in factors)

    def sub_basis(self, positions: tuple[int, ...], d: int):
        key = (positions, d)
        if key not in self._sub:
            basis = enumerate_compositions(len(positions), d, [self.caps[p] for p in positions])
            self._sub[key] = (basis, {c: i for i, c in enumerate(basis)})
        return self._sub[key]

    def embed(self, op: BlockOp, positions: Sequence[int], lam: complex, eta: complex,
              shift: Sequence[int] = ()) -> np.ndarray:
        positions = tuple(positions)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        cache: dict = {}
        for col, c in enumerate(self.basis):
            sub = tuple(c[p] for p in positions)
            d = sum(sub)
            lam_c = lam - 2 * eta * self.weight(c, shift)
            key = (d, complex(np.round(lam_c, 13)))
            if key not in cache:
                cache[key] = op(d, lam_c)
            mat = cache[key]
            basis, index = self.sub_basis(positions, d)
            j = index[sub]
            for i, s in enumerate(basis):
                v = mat[i, j]
                if v == 0:
                    continue
                row = list(c)
                for p, x in zip(positions, s):
                    row[p] = x
                out[self.index[tuple(row)], col] += v
        return out

    def projector(self, factor: int, mu: complex, tol: float = 1e-9) -> np.ndarray:
        diag = [abs(self.weights[factor] - 2 * c[factor] - mu) < tol for c in self.basis]
        return np.diag(np.array(diag, dtype=complex))

    def factor_weights(self, factor: int) -> list[complex]:
        """Distinct weights of one factor over the basis, in order of first appearance."""
        seen: list[complex] = []
        for c in self.basis:
            w = self.weights[factor] - 2 * c[factor]
            if not any(abs(w - s) < 1e-9 for s in seen):
                seen.append(w)
        return seen


def flip_op(d: int, lam: complex = 0j) -> np.ndarray:
    """Flip of two factors on the uncapped block of drop d."""
    basis = enumerate_compositions(2, d)
    idx = {c: i for i, c in enumerate(basis)}
    out = np.zeros((len(basis), len(basis)), dtype=complex)
    for j, (a, b) in enumerate(basis):
        out[idx[(b, a)], j] = 1
    return out


def permutation_matrix(src: BlockSpace, dst: BlockSpace, perm: Sequence[int]) -> np.ndarray:
    """Matrix sending the basis vector c of src to the vector of dst whose factor k is c[perm[k]]."""
    out = np.zeros((dst.dim, src.dim), dtype=complex)
    for j, c in enumerate(src.basis):
        out[dst.index[tuple(c[p] for p in perm)], j] = 1
    return out
