"""
Specialization along a linear element l: M/l, M[l] and the identities
relating them, plus the ι-twist of a module.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, List, Optional

from ..core.errors import UnsupportedShapeError
from ..core.linear import LinearElement, eliminate_variable
from ..core.models import PseudoNullVerdict, RankFormulaReport, TorTransferReport, Truth
from ..core.series import PowerSeries
from ..core.weierstrass import involute_associate, involution
from .invariants import known_zero, pseudo_null_verdict, rank
from .module import IwasawaModule, Presentation, StandardForm, block_diagonal

logger = logging.getLogger("iwalg.iwmod")


def _eliminated(pres: Presentation, l: LinearElement) -> Presentation:
    return pres.map_entries(lambda x: eliminate_variable(x, l), l.ctx.with_vars(l.ctx.m - 1))


def quotient_by(M: IwasawaModule, l: LinearElement) -> IwasawaModule:
    """
    M/l as a module over R/(l) ≅ Zp[[m-1 variables]].

    Cyclic summands whose generator maps to zero become free summands; the
    declared pseudo-null part stays declared only while it remains pseudo-null
    over the quotient ring, otherwise it is carried as a residual presentation.
    """
    sub = l.ctx.with_vars(l.ctx.m - 1)
    label = f"{M.label}/({l})"
    shape = M.shape
    if isinstance(shape, Presentation):
        return IwasawaModule(_eliminated(shape, l), label)

    cyclics: List[PowerSeries] = []
    free = shape.free_rank
    residual: List[Presentation] = []
    for g in shape.cyclics:
        image = eliminate_variable(g, l)
        if known_zero(image):
            free += 1
        elif image.is_zero:
            # vanishes only at truncation; rank questions on it stay undecided
            residual.append(Presentation(sub, ((image,),), 1))
        elif not image.is_unit:
            cyclics.append(image)

    null: Optional[Presentation] = None
    if shape.pseudo_null_part is not None:
        image = _eliminated(shape.pseudo_null_part, l)
        verdict = pseudo_null_verdict(IwasawaModule(StandardForm(sub, (), 0, image)))
        if verdict.value is Truth.TRUE:
            null = image
        else:
            residual.append(image)
    if shape.residual_part is not None:
        residual.append(_eliminated(shape.residual_part, l))

    res = block_diagonal(sub, residual) if residual else None
    return IwasawaModule(StandardForm(sub, tuple(cyclics), free, null, res), label)


@dataclass(frozen=True)
class TorsionSub:
    """
    M[l] over R/(l).

    `module` is the part coming from cyclic summands: a free R/(l)-module,
    one copy of R/(l) for every generator divisible by l. The l-torsion of
    the declared pseudo-null part is recorded through M_null/l, which has
    the same rank and characteristic ideal.
    """
    module: IwasawaModule
    null_quotient: Optional[IwasawaModule] = None
    null_verdict: Optional[PseudoNullVerdict] = None
    oracle: Optional[Any] = None

    @property
    def rank(self) -> int:
        extra = rank(self.null_quotient) if self.null_quotient is not None else 0
        return rank(self.module) + extra

    @property
    def null_part_pseudo_null(self) -> Truth:
        return Truth.TRUE if self.null_verdict is None else self.null_verdict.value


def torsion_sub(
    M: IwasawaModule,
    l: LinearElement,
    with_oracle: bool = False,
    n: int = 4,
    d: int = 4,
) -> TorsionSub:
    """
    (R/(g))[l] is R/(l) when l divides g and zero otherwise; free summands
    contribute nothing.

    Raises:
        UnsupportedShapeError: M is a presentation or carries a residual part.
    """
    shape = M.shape
    if not isinstance(shape, StandardForm) or shape.residual_part is not None:
        raise UnsupportedShapeError("torsion_sub needs a standard form; use the oracle for presentations")
    sub = l.ctx.with_vars(l.ctx.m - 1)
    count = sum(1 for g in shape.cyclics if known_zero(eliminate_variable(g, l)))
    module = IwasawaModule.free(sub, count, label=f"{M.label}[{l}]")

    null_quotient = verdict = oracle = None
    if shape.pseudo_null_part is not None:
        null_quotient = IwasawaModule(
            StandardForm(sub, (), 0, None, _eliminated(shape.pseudo_null_part, l)),
            label=f"{M.label}_null/({l})",
        )
        verdict = pseudo_null_verdict(null_quotient)
        if with_oracle:
            from ..oracle.quotient import oracle_torsion_sub

            null_module = IwasawaModule(shape.pseudo_null_part, label=f"{M.label}_null")
            oracle = oracle_torsion_sub(null_module, l, n, d)
    logger.debug("%s[%s]: %d cyclic copies of R/(l)", M.label, l, count)
    return TorsionSub(module, null_quotient, verdict, oracle)


def rank_formula_check(M: IwasawaModule, l: LinearElement) -> RankFormulaReport:
    """rank(M), rank(M/l) and rank(M[l]), each from its own construction."""
    return RankFormulaReport(
        ideal=str(l),
        rank=rank(M),
        quotient_rank=rank(quotient_by(M, l)),
        torsion_sub_rank=torsion_sub(M, l).rank,
    )


def tor_transfer_check(M: IwasawaModule, l: LinearElement) -> TorTransferReport:
    """If M/l is torsion over R/(l), then M is torsion and so is M[l] ≅ Tor_1(M, R/(l))."""
    ideal = str(l)
    if rank(quotient_by(M, l)):
        return TorTransferReport(ideal=ideal, precondition=False)
    return TorTransferReport(
        ideal=ideal,
        precondition=True,
        module_torsion=rank(M) == 0,
        torsion_sub_torsion=torsion_sub(M, l).rank == 0,
        higher_tor_vanish=True,
    )


def _involute_rows(pres: Presentation, var: int) -> Presentation:
    # scaling a relation row by the unit (1+W)^k keeps the cokernel
    ctx = pres.ctx
    one_plus = PowerSeries.variable(ctx, var) + 1
    rows = []
    for row in pres.rows:
        if not all(x.is_exact for x in row):
            rows.append(tuple(involution(x, var) for x in row))
            continue
        top = max((x.degree_in(var) for x in row if not x.is_zero), default=0)
        rows.append(tuple(
            involute_associate(x, var) * one_plus ** (top - max(x.degree_in(var), 0)) if not x.is_zero else x
            for x in row
        ))
    return Presentation(ctx, tuple(rows), pres.cols)


def involute_module(M: IwasawaModule, var: int = -1, experimental: bool = False) -> IwasawaModule:
    """
    M^ι: the same module with W_var acting through (1+W_var)^{-1} - 1.

    Cyclic generators are replaced by their involuted associates; the free
    rank and the declared pseudo-null part are kept.

    Raises:
        UnsupportedShapeError: M is a presentation and `experimental` is not set.
    """
    ctx = M.ctx
    var = ctx.normalize_var(var)
    label = f"{M.label}^iota"
    shape = M.shape
    if isinstance(shape, Presentation):
        if not experimental:
            raise UnsupportedShapeError("involution of a presentation is experimental; pass experimental=True")
        logger.warning("applying the involution entrywise to the presentation of %s (experimental)", M.label)
        return IwasawaModule(_involute_rows(shape, var), label)
    residual = _involute_rows(shape.residual_part, var) if shape.residual_part is not None else None
    return IwasawaModule(
        StandardForm(
            ctx,
            tuple(involute_associate(g, var) for g in shape.cyclics),
            shape.free_rank,
            shape.pseudo_null_part,
            residual,
        ),
        label,
    )
