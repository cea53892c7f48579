"""
Corank sequences r_n = rank_O Hom(M, O[[W]]/f^n) for an irreducible
distinguished f, and their inversion back to the f-primary multiplicities.
"""
from __future__ import annotations

import logging
from typing import List, Sequence

from sympy import Matrix, Rational

from ..core.errors import (
    InconsistentCorankError,
    IndeterminateError,
    PrecisionExhaustedError,
    PreparationError,
    UnsupportedShapeError,
)
from ..core.models import FactorComparison, ReconstructionProblem, StructureCompareReport, StructureData, Truth
from ..core.series import PowerSeries
from ..core.weierstrass import gcd_one_var, weierstrass_prepare
from ..modules.invariants import divide_exactly, rank, torsion_structure
from ..modules.module import IwasawaModule

logger = logging.getLogger("iwalg.funceq")


def corank_formula(module_rank: int, a: Sequence[int], deg_f: int, n: int) -> int:
    """deg_f · (n·rank + Σ_i min(i, n)·a_i), i counted from 1."""
    theta = len(a)
    if not 1 <= n <= theta:
        raise ValueError(f"n={n} outside 1..{theta}")
    return deg_f * (n * module_rank + sum(min(i, n) * a_i for i, a_i in enumerate(a, start=1)))


def corank_sequence(module_rank: int, a: Sequence[int], deg_f: int) -> List[int]:
    return [corank_formula(module_rank, a, deg_f, n) for n in range(1, len(a) + 1)]


def min_matrix(theta: int) -> Matrix:
    return Matrix(theta, theta, lambda i, j: min(i, j) + 1)


def reconstruct_multiplicities(prob: ReconstructionProblem) -> List[int]:
    """
    Inverts the min(i, j) system after removing the free part.

    Raises:
        InconsistentCorankError: No nonnegative integral solution.
    """
    theta = prob.theta
    rhs = []
    for n, r in enumerate(prob.ranks, start=1):
        s = Rational(r, prob.deg_f) - n * prob.module_rank
        rhs.append(s)
    solution = min_matrix(theta).LUsolve(Matrix(rhs))
    out = []
    for i, value in enumerate(solution, start=1):
        if not value.is_integer or value < 0:
            raise InconsistentCorankError(
                f"corank sequence {prob.ranks} gives a_{i} = {value}; expected a nonnegative integer"
            )
        out.append(int(value))
    return out


# ── module side ──

def _require_factor(f: PowerSeries) -> int:
    if f.ctx.m != 1:
        raise UnsupportedShapeError("corank sequences are defined over Zp[[W]]")
    data = weierstrass_prepare(f, 0)
    if data.mu or data.lam == 0:
        raise ValueError(f"'{f}' is not a distinguished polynomial of positive degree")
    return data.lam


def _complete(M: IwasawaModule) -> StructureData:
    data = torsion_structure(M)
    if not data.complete:
        raise IndeterminateError(f"invariant factors of {M.label} are not resolved at this precision")
    return data


def hom_rank_sequence(M: IwasawaModule, f: PowerSeries, theta: int) -> List[int]:
    """r_n = n·rank·deg f + Σ_g deg gcd(g, f^n) over the torsion invariant factors g."""
    deg_f = _require_factor(f)
    data = _complete(M)
    out = []
    for n in range(1, theta + 1):
        fn = f ** n
        total = n * data.rank * deg_f
        for g in data.elementary_divisors:
            total += weierstrass_prepare(gcd_one_var(g, fn), 0).lam
        out.append(total)
    return out


def f_adic_valuation(g: PowerSeries, f: PowerSeries, cap: int) -> int:
    """Largest e <= cap with f^e | g."""
    e = 0
    while e < cap:
        q = divide_exactly(g, f)
        if q is None:
            break
        g = q
        e += 1
    return e


def f_primary_multiplicities(M: IwasawaModule, f: PowerSeries, theta: int) -> List[int]:
    """a_i = #{invariant factors g with v_f(g) = i}; a_theta collects v_f(g) >= theta."""
    _require_factor(f)
    data = _complete(M)
    a = [0] * theta
    for g in data.elementary_divisors:
        e = f_adic_valuation(g, f, theta)
        if e:
            a[e - 1] += 1
    return a


def _p_exponents(data: StructureData) -> List[int]:
    return sorted(weierstrass_prepare(g, 0).mu for g in data.elementary_divisors if g.valuation)


def structure_compare(
    M: IwasawaModule, N: IwasawaModule, factors: Sequence[PowerSeries], theta: int
) -> StructureCompareReport:
    """
    Equal ranks, equal p-primary parts, and for every supplied prime f equal
    corank sequences r_1..r_theta (hence equal f-primary multiplicities).
    """
    p_equal = Truth.INDETERMINATE
    try:
        dm, dn = _complete(M), _complete(N)
        p_equal = Truth.of(_p_exponents(dm) == _p_exponents(dn))
    except (IndeterminateError, PrecisionExhaustedError, PreparationError) as e:
        logger.info("p-primary comparison indeterminate: %s", e)
    comparisons = []
    for f in factors:
        rm, rn = hom_rank_sequence(M, f, theta), hom_rank_sequence(N, f, theta)
        deg_f = _require_factor(f)
        comparisons.append(
            FactorComparison(
                factor=str(f),
                ranks_m=rm,
                ranks_n=rn,
                multiplicities_m=reconstruct_multiplicities(
                    ReconstructionProblem(theta=theta, ranks=rm, module_rank=rank(M), deg_f=deg_f)
                ),
                multiplicities_n=reconstruct_multiplicities(
                    ReconstructionProblem(theta=theta, ranks=rn, module_rank=rank(N), deg_f=deg_f)
                ),
            )
        )
    return StructureCompareReport(rank_m=rank(M), rank_n=rank(N), p_primary_equal=p_equal, factors=comparisons)

