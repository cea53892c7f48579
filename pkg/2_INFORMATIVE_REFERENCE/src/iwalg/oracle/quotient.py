"""
Brute-force reference computations on finite quotients

    M ⊗ R/(p^n, monomials of total degree >= d)

read as finite abelian p-groups. The results are advisory: they corroborate
the exact module computations, never replace them.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.context import Exponent, RingContext
from ..core.errors import OracleSizeError, PrecisionExhaustedError, UnsupportedShapeError
from ..core.linear import LinearElement
from ..core.series import PowerSeries
from ..modules.module import IwasawaModule, Presentation, StandardForm
from ..system.config import settings
from .smith import as_matrix, kernel_basis, smith, subgroup_log_order

logger = logging.getLogger("iwalg.oracle")


def monomial_count(m: int, d: int) -> int:
    """Number of monomials in m variables of total degree < d."""
    if d <= 0:
        return 0
    return comb(d - 1 + m, m)


class _Basis:
    """Coordinates of (R/(deg >= d))^b: generator index times monomial."""

    def __init__(self, ctx: RingContext, b: int, d: int):
        self.monomials: List[Exponent] = list(ctx.monomials(d))
        self.index: Dict[Exponent, int] = {e: i for i, e in enumerate(self.monomials)}
        self.b = b
        self.d = d
        self.size = b * len(self.monomials)

    def vector(self, row: Sequence[PowerSeries], shift: Exponent) -> List[int]:
        """Coordinates of x^shift · row, terms of degree >= d dropped."""
        out = [0] * self.size
        width = len(self.monomials)
        for j, entry in enumerate(row):
            for e, c in entry.terms.items():
                target = tuple(a + s for a, s in zip(e, shift))
                k = self.index.get(target)
                if k is not None:
                    out[j * width + k] += c
        return out


def _check_known(pres: Presentation, n: int, d: int) -> None:
    for row in pres.rows:
        for entry in row:
            if entry.prec < n or (entry.bound is not None and entry.bound < d):
                raise PrecisionExhaustedError(f"entry '{entry}' is not known to level (n={n}, d={d})")


def _relations(pres: Presentation, basis: _Basis) -> List[List[int]]:
    return [basis.vector(row, shift) for row in pres.rows for shift in basis.monomials]


def _guard(dim: int, what: str) -> None:
    if dim > settings.ORACLE_MAX_DIM:
        raise OracleSizeError(f"{what} needs dimension {dim}, above the limit {settings.ORACLE_MAX_DIM}")


@dataclass(frozen=True)
class FiniteQuotient:
    """M/(p^n, degree >= d)M ≅ ⊕ Z/p^e over the listed exponents e."""
    ctx: RingContext
    n: int
    d: int
    basis: Tuple[Exponent, ...]
    generators: int
    relations: np.ndarray = field(repr=False, compare=False)
    exponents: Tuple[int, ...] = ()

    @property
    def log_order(self) -> int:
        """k with |quotient| = p^k."""
        return sum(self.exponents)

    @property
    def dimension(self) -> int:
        return self.generators * len(self.basis)


def finite_quotient(M: IwasawaModule, n: int, d: int) -> FiniteQuotient:
    """
    Raises:
        OracleSizeError: The basis exceeds settings.ORACLE_MAX_DIM.
        PrecisionExhaustedError: A relation is not known to level (n, d).
    """
    ctx = M.ctx
    if not 1 <= n <= ctx.prec or not 1 <= d <= ctx.deg:
        raise ValueError(f"level (n={n}, d={d}) outside 1..prec={ctx.prec}, 1..deg={ctx.deg}")
    return _finite_quotient(M.to_presentation(), n, d)


def _finite_quotient(pres: Presentation, n: int, d: int) -> FiniteQuotient:
    ctx = pres.ctx
    basis = _Basis(ctx, pres.cols, d)
    _guard(basis.size, "finite quotient")
    _check_known(pres, n, d)
    rel = as_matrix(_relations(pres, basis), basis.size)
    result = smith(rel, ctx.p, n)
    logger.debug("finite quotient at (n=%d, d=%d): dim %d, %d pivots", n, d, basis.size, result.rank)
    return FiniteQuotient(ctx, n, d, tuple(basis.monomials), pres.cols, rel, result.cokernel_exponents())


# ── growth probe ──

@dataclass(frozen=True)
class OracleEstimate:
    """Advisory reading of log_p |M/(p^n, deg >= d)| around one base level."""
    base: Tuple[int, int]
    log_orders: Dict[Tuple[int, int], int]
    rank: int
    mu: Optional[int] = None
    lam: Optional[int] = None
    advisory: bool = True


def oracle_rank_probe(M: IwasawaModule, levels: Sequence[Tuple[int, int]] = ((4, 4),)) -> List[OracleEstimate]:
    """
    Reads rank (and, in one variable, μ and λ) from finite differences of
    log orders at (n, d), (n+1, d), (n, d+1), (n+1, d+1).

    In one variable log|M/(p^n, W^d)| = r·n·d + μ·d + λ·n + c once n and d are
    large against the module, so the mixed difference is r.
    """
    ctx = M.ctx
    estimates = []
    for n, d in levels:
        sizes = {
            (a, b): finite_quotient(M, a, b).log_order
            for a in (n, n + 1)
            for b in (d, d + 1)
        }
        dn = sizes[(n + 1, d)] - sizes[(n, d)]
        if ctx.m == 0:
            estimates.append(OracleEstimate((n, d), sizes, rank=dn))
            continue
        if ctx.m == 1:
            mixed = sizes[(n + 1, d + 1)] - sizes[(n + 1, d)] - sizes[(n, d + 1)] + sizes[(n, d)]
            dd = sizes[(n, d + 1)] - sizes[(n, d)]
            estimates.append(
                OracleEstimate((n, d), sizes, rank=mixed, mu=dd - mixed * n, lam=dn - mixed * d)
            )
            continue
        estimates.append(OracleEstimate((n, d), sizes, rank=dn // monomial_count(ctx.m, d)))
    return estimates


# ── l-torsion ──

def _kernel_image_log(pres: Presentation, l: PowerSeries, level: Tuple[int, int], lift: Tuple[int, int]) -> int:
    """
    log_p of the image in Q = M/(p^n, deg >= d) of the l-torsion of the
    quotient at the lifted level.
    """
    ctx = pres.ctx
    n, d = level
    n2, d2 = lift
    low = _Basis(ctx, pres.cols, d)
    high = _Basis(ctx, pres.cols, d2)
    _guard(high.size, "lifted torsion quotient")
    _check_known(pres, n2, d2)
    rel_high = _relations(pres, high)

    # unknowns: x in F (coordinates of high), y weighting the relation rows; l·x = Σ y_k rel_k
    l_rows = [high.vector([l if j == g else PowerSeries.zero(ctx) for j in range(pres.cols)], shift)
              for g in range(pres.cols) for shift in high.monomials]
    columns = l_rows + [[-c for c in r] for r in rel_high]
    B = as_matrix(columns, high.size).T
    kernel = kernel_basis(B, ctx.p, n2)

    modulus = ctx.p ** n
    width_high, width_low = len(high.monomials), len(low.monomials)
    projected = []
    for z in kernel:
        x = [0] * low.size
        for g in range(pres.cols):
            for k, e in enumerate(high.monomials):
                target = low.index.get(e)
                if target is not None:
                    x[g * width_low + target] = int(z[g * width_high + k]) % modulus
        projected.append(x)
    rel_low = as_matrix(_relations(pres, low), low.size)
    spanned = np.vstack([as_matrix(projected, low.size), rel_low]) if projected else rel_low
    return subgroup_log_order(spanned, ctx.p, n) - subgroup_log_order(rel_low, ctx.p, n)


@dataclass(frozen=True)
class OracleTorsionSub:
    """
    |Q[l]| for Q the finite quotient at (n, d): `naive` counts every kernel
    element, `lifted` only those coming from the quotient at a higher level
    (truncation artifacts near the degree boundary do not lift), `confirm`
    repeats the lift one step further. `stable` when the two lifts agree.
    """
    ideal: str
    level: Tuple[int, int]
    naive: int
    lifted: int
    confirm: int

    @property
    def stable(self) -> bool:
        return self.lifted == self.confirm

    @property
    def boundary(self) -> int:
        return self.naive - self.lifted


def oracle_torsion_sub(M: IwasawaModule, l: LinearElement, n: int, d: int) -> OracleTorsionSub:
    """
    Raises:
        OracleSizeError: The lifted basis exceeds settings.ORACLE_MAX_DIM.
        PrecisionExhaustedError: A relation is not known to the lifted level.
    """
    pres = M.to_presentation()
    ls = l.as_series()
    lift = (2 * n, 2 * d + n)
    confirm = (2 * n + 1, 2 * d + n + 2)
    return OracleTorsionSub(
        ideal=str(l),
        level=(n, d),
        naive=_kernel_image_log(pres, ls, (n, d), (n, d)),
        lifted=_kernel_image_log(pres, ls, (n, d), lift),
        confirm=_kernel_image_log(pres, ls, (n, d), confirm),
    )


# ── closed forms ──

def _linear_shape(g: PowerSeries) -> Optional[Tuple[int, int]]:
    """(j, v) when g = unit·(W_j - c) with v = v_p(c) (v = n-cap for c = 0)."""
    if not g.is_exact or g.degree != 1:
        return None
    ctx = g.ctx
    linear = [(e, c) for e, c in g.terms.items() if sum(e) == 1]
    if len(linear) != 1 or linear[0][1] % ctx.p == 0:
        return None
    j = linear[0][0].index(1)
    c0 = g.constant_term
    if c0 % ctx.p:
        return None
    return j, (ctx.prec if c0 == 0 else g.coefficient((0,) * ctx.m).valuation)


def _monomial_null_shape(pres: Presentation) -> Optional[int]:
    """a when the block is R/(p^a, W_j) up to units."""
    if pres.cols != 1 or pres.n_rows != 2:
        return None
    entries = [row[0] for row in pres.rows]
    constants = [x for x in entries if x.is_exact and x.degree == 0]
    variables = [x for x in entries if _linear_shape(x) is not None and _linear_shape(x)[1] >= x.ctx.prec]
    if len(constants) != 1 or len(variables) != 1:
        return None
    return constants[0].valuation


def symbolic_log_order(M: IwasawaModule, n: int, d: int) -> int:
    """
    Closed-form log_p |M/(p^n, deg >= d)| for standard forms built from free
    summands, cyclics p^k·unit or unit·(W_j - c) with p | c, and declared
    pseudo-null blocks R/(p^a, W_j).

    Raises:
        UnsupportedShapeError: Any other summand.
    """
    ctx = M.ctx
    shape = M.shape
    if not isinstance(shape, StandardForm) or shape.residual_part is not None:
        raise UnsupportedShapeError("closed forms exist only for standard forms")
    full = monomial_count(ctx.m, d)
    total = shape.free_rank * n * full
    for g in shape.cyclics:
        if g.is_exact and g.degree == 0:
            total += min(g.valuation, n) * full
            continue
        found = _linear_shape(g)
        if found is None:
            raise UnsupportedShapeError(f"no closed form for the cyclic generator '{g}'")
        _, v = found
        # R/(W_j - c) ≅ Zp[[other variables]] with (deg >= d) becoming (p^{v(d-|β|)}·x^β)
        for k in range(d):
            count = monomial_count(ctx.m - 1, k + 1) - monomial_count(ctx.m - 1, k)
            total += count * min(n, v * (d - k))
    if shape.pseudo_null_part is not None:
        pres = shape.pseudo_null_part
        blocks = [pres] if pres.cols == 1 else _split_diagonal(pres)
        if not blocks:
            raise UnsupportedShapeError("no closed form for a declared pseudo-null part that is not block diagonal")
        for block in blocks:
            a = _monomial_null_shape(block)
            if a is None:
                raise UnsupportedShapeError("no closed form for the declared pseudo-null part")
            total += min(a, n) * monomial_count(ctx.m - 1, d)
    return total


def _split_diagonal(pres: Presentation) -> List[Presentation]:
    """Column blocks of a block-diagonal presentation with one generator per block."""
    blocks = []
    for j in range(pres.cols):
        rows = [row for row in pres.rows if not row[j].is_zero]
        if any(not x.is_zero for row in rows for i, x in enumerate(row) if i != j):
            return []
        blocks.append(Presentation(pres.ctx, tuple((row[j],) for row in rows), 1))
    return blocks
