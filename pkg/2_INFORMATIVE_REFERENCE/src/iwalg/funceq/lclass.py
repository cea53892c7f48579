"""
The class of linear ideals along which characteristic ideals specialize
well, and a sufficient criterion for membership.
"""
from __future__ import annotations

import logging
import random
from typing import List, Optional, Sequence

from ..core.context import RingContext
from ..core.errors import (
    IndeterminateError,
    NotTorsionError,
    PrecisionExhaustedError,
    PreparationError,
    SamplingExhaustedError,
    UnsupportedShapeError,
)
from ..core.linear import LinearElement, eliminate_variable, linear_ideal_equal, random_linear_element
from ..core.models import LClassSufficiency, Truth
from ..core.series import PowerSeries
from ..core.weierstrass import unit_equal
from ..modules.invariants import char_ideal, rank
from ..modules.module import IwasawaModule, StandardForm
from ..modules.specialize import quotient_by, torsion_sub
from ..system.config import settings
from ..system.scripts.hashing import audit_entry

logger = logging.getLogger("iwalg.funceq")
audit = logging.getLogger("iwalg.audit")

# failures that leave a verdict undecided rather than false
UNDECIDED = (IndeterminateError, PrecisionExhaustedError, PreparationError, UnsupportedShapeError)


def is_extended(ctx: RingContext) -> bool:
    """The class is defined for two or more variables; fewer is the extended reading."""
    return ctx.m < 2


def quotient_torsion(M: IwasawaModule, l: LinearElement) -> Truth:
    try:
        return Truth.of(rank(quotient_by(M, l)) == 0)
    except UNDECIDED as e:
        logger.info("torsion of %s/(%s) undecided: %s", M.label, l, e)
        return Truth.INDETERMINATE


def specialized_char(M: IwasawaModule, l: LinearElement) -> Optional[PowerSeries]:
    """char(M/l), or None when M/l is not torsion."""
    q = quotient_by(M, l)
    if rank(q):
        return None
    return char_ideal(q)


def in_L_class(M: IwasawaModule, l: LinearElement) -> Truth:
    """
    M/l is torsion and the image of char(M) in R/(l) generates char(M/l).

    Raises:
        NotTorsionError: M itself is not torsion.
    """
    if rank(M):
        raise NotTorsionError(f"{M.label} is not torsion; the L-class is defined for torsion modules")
    verdict = _in_L_class(M, l)
    audit.info(audit_entry("in_L_class", {"m": M, "ideal": l}, verdict))
    return verdict


def _in_L_class(M: IwasawaModule, l: LinearElement) -> Truth:
    try:
        char_m = char_ideal(M)
        target = specialized_char(M, l)
        if target is None:
            return Truth.FALSE
        return unit_equal(eliminate_variable(char_m, l), target)
    except UNDECIDED as e:
        logger.info("L-class membership of (%s) for %s undecided: %s", l, M.label, e)
        return Truth.INDETERMINATE


def l_class_sufficient(M: IwasawaModule, l: LinearElement) -> LClassSufficiency:
    """
    Checks that M_null[l] is pseudo-null over R/(l) and that M/l is torsion;
    when both hold, membership of (l) is evaluated as well and must be true.
    """
    shape = M.shape
    if not isinstance(shape, StandardForm):
        raise UnsupportedShapeError("the sufficient criterion needs a standard form with its declared pseudo-null part")
    null_ok = Truth.TRUE
    if shape.pseudo_null_part is not None:
        try:
            null_ok = torsion_sub(M, l).null_part_pseudo_null
        except UNDECIDED as e:
            logger.info("pseudo-nullity of %s_null[%s] undecided: %s", M.label, l, e)
            null_ok = Truth.INDETERMINATE
    report = LClassSufficiency(
        ideal=str(l),
        null_part_pseudo_null=null_ok,
        quotient_torsion=quotient_torsion(M, l),
        extended=is_extended(M.ctx),
    )
    if report.hypotheses_hold:
        membership = in_L_class(M, l)
        report = report.model_copy(update={"membership": membership})
        if report.violation:
            logger.error("sufficient criterion holds for (%s) on %s but membership fails", l, M.label)
    return report


def sample_linear_ideals(
    ctx: RingContext,
    avoid: Sequence[PowerSeries] = (),
    count: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[LinearElement]:
    """
    Pairwise non-associate linear elements in the non-last variables, none
    dividing any series in `avoid`. Deterministic in `seed`.

    Raises:
        SamplingExhaustedError: `count` elements not found within count·50 draws.
    """
    if ctx.m < 2:
        raise UnsupportedShapeError("sampling linear ideals needs a variable besides the last one")
    count = settings.SAMPLES if count is None else count
    rng = random.Random(settings.SEED if seed is None else seed)
    chosen: List[LinearElement] = []
    draws = 0
    while len(chosen) < count:
        if draws >= count * 50:
            raise SamplingExhaustedError(f"found {len(chosen)} of {count} linear ideals in {draws} draws")
        draws += 1
        l = random_linear_element(ctx, rng, variables=range(ctx.m - 1))
        if any(linear_ideal_equal(l, other) for other in chosen):
            continue
        if any(eliminate_variable(g, l).is_zero for g in avoid):
            continue
        chosen.append(l)
    logger.debug("sampled %d linear ideals in %d draws", count, draws)
    return chosen


def supports(M: IwasawaModule) -> List[PowerSeries]:
    """Series whose divisors a sampled ideal should avoid: cyclic generators, or the char generator."""
    shape = M.shape
    if isinstance(shape, StandardForm) and shape.residual_part is None:
        return list(shape.cyclics)
    try:
        return [char_ideal(M)]
    except (NotTorsionError,) + UNDECIDED:
        return []
