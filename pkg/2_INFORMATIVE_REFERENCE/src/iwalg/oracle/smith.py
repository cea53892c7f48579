"""
Diagonalization over Z/p^n.

Matrices are numpy object arrays of Python ints so that residues modulo
large prime powers never overflow.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core.context import p_valuation


@dataclass(frozen=True)
class SmithResult:
    """
    S = U·A·V diagonal with the pivot valuations in nondecreasing order.

    `V` is kept only when requested; it carries the column operations,
    which is what kernels need.
    """
    p: int
    n: int
    exponents: Tuple[int, ...]
    n_cols: int
    V: Optional[np.ndarray] = None

    @property
    def rank(self) -> int:
        return len(self.exponents)

    def cokernel_exponents(self) -> Tuple[int, ...]:
        """e with coker ≅ ⊕ Z/p^e, zero factors omitted, in nondecreasing order."""
        torsion = [v for v in self.exponents if v > 0]
        free = [self.n] * (self.n_cols - self.rank)
        return tuple(sorted(torsion + free))


def as_matrix(rows: List[List[int]], n_cols: int) -> np.ndarray:
    if not rows:
        return np.zeros((0, n_cols), dtype=object)
    return np.array(rows, dtype=object).reshape(len(rows), n_cols)


def _min_valuation_entry(A: np.ndarray, start: int, p: int, n: int) -> Optional[Tuple[int, int, int]]:
    sub = A[start:, start:]
    best: Optional[Tuple[int, int, int]] = None
    for i, j in zip(*np.nonzero(sub)):
        v = p_valuation(int(sub[i, j]), p, n)
        if best is None or v < best[0]:
            best = (v, start + int(i), start + int(j))
            if v == 0:
                break
    return best


def smith(A: np.ndarray, p: int, n: int, track_columns: bool = False) -> SmithResult:
    """
    Smith elimination over Z/p^n with a minimal-valuation pivot at each step.

    Every remaining entry is divisible by the pivot's p-power, so the pivot
    row and column can be cleared without touching earlier pivots.
    """
    modulus = p ** n
    A = np.array(A, dtype=object) % modulus
    rows, cols = A.shape
    V = np.identity(cols, dtype=object) if track_columns else None
    exponents: List[int] = []
    r = 0
    while r < min(rows, cols):
        found = _min_valuation_entry(A, r, p, n)
        if found is None:
            break
        v, i, j = found
        if i != r:
            A[[r, i], :] = A[[i, r], :]
        if j != r:
            A[:, [r, j]] = A[:, [j, r]]
            if V is not None:
                V[:, [r, j]] = V[:, [j, r]]
        scale = p ** v
        inv = pow(int(A[r, r]) // scale, -1, modulus)
        for k in range(r + 1, rows):
            if A[k, r]:
                factor = (int(A[k, r]) // scale) * inv % modulus
                A[k, r:] = (A[k, r:] - factor * A[r, r:]) % modulus
        if V is not None:
            for k in range(r + 1, cols):
                if A[r, k]:
                    factor = (int(A[r, k]) // scale) * inv % modulus
                    V[:, k] = (V[:, k] - factor * V[:, r]) % modulus
        A[r, r + 1:] = 0
        exponents.append(v)
        r += 1
    return SmithResult(p, n, tuple(exponents), cols, V)


def subgroup_log_order(G: np.ndarray, p: int, n: int) -> int:
    """log_p of the order of the subgroup of (Z/p^n)^k spanned by the rows of G."""
    if G.shape[0] == 0:
        return 0
    return sum(n - v for v in smith(G, p, n).exponents)


def kernel_basis(B: np.ndarray, p: int, n: int) -> np.ndarray:
    """Rows generating {z : B·z = 0 over Z/p^n}."""
    cols = B.shape[1]
    result = smith(B, p, n, track_columns=True)
    gens = []
    for i in range(cols):
        if i < result.rank:
            v = result.exponents[i]
            if v == 0:
                continue
            gens.append(result.V[:, i] * p ** (n - v) % p ** n)
        else:
            gens.append(result.V[:, i])
    if not gens:
        return np.zeros((0, cols), dtype=object)
    return np.array(gens, dtype=object).reshape(len(gens), cols)
