"""
Checking equality of characteristic ideals through specializations, and
the functional-equation verdict in one variable.
"""
from __future__ import annotations

import logging
from typing import Sequence

from ..core.context import require_same_context
from ..core.errors import UnsupportedShapeError
from ..core.linear import LinearElement
from ..core.models import (
    Conclusion,
    IdealCheck,
    SpecializationReport,
    SpecializationStatus,
    Truth,
    Verdict,
    truth_all,
)
from ..core.weierstrass import unit_equal
from ..modules.invariants import char_ideal, is_fg_over_subring, pseudo_compare, rank
from ..modules.module import IwasawaModule, Presentation
from ..modules.specialize import involute_module
from ..system.scripts.hashing import audit_entry
from .lclass import UNDECIDED, in_L_class, is_extended, specialized_char

logger = logging.getLogger("iwalg.funceq")
audit = logging.getLogger("iwalg.audit")


def _torsion(M: IwasawaModule) -> Truth:
    try:
        return Truth.of(rank(M) == 0)
    except UNDECIDED:
        return Truth.INDETERMINATE


def _fg(M: IwasawaModule) -> Truth:
    try:
        return is_fg_over_subring(M)
    except UNDECIDED:
        return Truth.INDETERMINATE


def _check(M: IwasawaModule, N: IwasawaModule, l: LinearElement, torsion: bool) -> IdealCheck:
    in_m = in_L_class(M, l) if torsion else Truth.INDETERMINATE
    in_n = in_L_class(N, l) if torsion else Truth.INDETERMINATE
    text_m = text_n = "undecided"
    equal = Truth.INDETERMINATE
    try:
        cm, cn = specialized_char(M, l), specialized_char(N, l)
        text_m = "not torsion" if cm is None else str(cm)
        text_n = "not torsion" if cn is None else str(cn)
        if cm is not None and cn is not None:
            equal = unit_equal(cm, cn)
        elif (cm is None) != (cn is None):
            equal = Truth.FALSE
    except UNDECIDED as e:
        logger.info("specialization along (%s) undecided: %s", l, e)
    return IdealCheck(
        ideal=str(l), in_class_m=in_m, in_class_n=in_n,
        specialized_m=text_m, specialized_n=text_n, specialized_equal=equal,
    )


def verify_char_equality_by_specialization(
    M: IwasawaModule, N: IwasawaModule, ideals: Sequence[LinearElement]
) -> SpecializationReport:
    """
    Evaluates the hypotheses of the specialization criterion for char(M) = char(N)
    on the given ideals and sets the evidence against the direct comparison.

    `conclusion` reads the specialized evidence (consistent with equality,
    refuted, indeterminate); `status` reads it against the criterion:
    confirmed, hypothesis_violated, separated (an L-class ideal already
    separates the modules), contradiction (every hypothesis holds and the
    ideals still differ) or indeterminate.
    """
    ctx = require_same_context(M.ctx, N.ctx)
    if ctx.m < 1:
        raise UnsupportedShapeError("specialization needs at least one variable")
    torsion = (_torsion(M), _torsion(N))
    both_torsion = truth_all(torsion) is Truth.TRUE
    fg = (_fg(M), _fg(N))
    checks = [_check(M, N, l, both_torsion) for l in ideals]

    global_equal = Truth.INDETERMINATE
    if both_torsion:
        try:
            global_equal = unit_equal(char_ideal(M), char_ideal(N))
        except UNDECIDED as e:
            logger.info("global comparison undecided: %s", e)

    separated = any(
        c.in_class_m is Truth.TRUE and c.in_class_n is Truth.TRUE and c.specialized_equal is Truth.FALSE
        for c in checks
    )
    all_equal = all(c.specialized_equal is Truth.TRUE for c in checks)
    any_unequal = any(c.specialized_equal is Truth.FALSE for c in checks)
    hypotheses = truth_all(
        list(torsion) + list(fg) + [t for c in checks for t in (c.in_class_m, c.in_class_n)]
    )

    if separated:
        status, conclusion = SpecializationStatus.SEPARATED, Conclusion.REFUTED
    elif hypotheses is Truth.TRUE and all_equal:
        if global_equal is Truth.TRUE:
            status, conclusion = SpecializationStatus.CONFIRMED, Conclusion.CONSISTENT
        elif global_equal is Truth.FALSE:
            status, conclusion = SpecializationStatus.CONTRADICTION, Conclusion.REFUTED
            logger.error("every hypothesis holds for %s, %s yet the characteristic ideals differ", M.label, N.label)
        else:
            status, conclusion = SpecializationStatus.INDETERMINATE, Conclusion.CONSISTENT
    elif hypotheses is Truth.FALSE:
        status = SpecializationStatus.HYPOTHESIS_VIOLATED
        conclusion = Conclusion.CONSISTENT if all_equal else (
            Conclusion.REFUTED if any_unequal else Conclusion.INDETERMINATE
        )
    else:
        status = SpecializationStatus.INDETERMINATE
        conclusion = Conclusion.CONSISTENT if all_equal else Conclusion.INDETERMINATE

    report = SpecializationReport(
        modules=(M.label, N.label),
        checks=checks,
        torsion=torsion,
        fg_over_subring=fg,
        global_equal=global_equal,
        conclusion=conclusion,
        status=status,
        extended=is_extended(ctx),
    )
    audit.info(audit_entry(
        "verify_char_equality_by_specialization",
        {"m": M, "n": N, "ideals": ",".join(c.ideal for c in checks)},
        status,
    ))
    return report


def funceq_verdict(M: IwasawaModule, N: IwasawaModule, var: int = -1) -> Verdict:
    """
    Equal ranks and torsion of M pseudo-isomorphic to the ι-twist of the torsion of N.
    """
    ctx = require_same_context(M.ctx, N.ctx)
    if ctx.m != 1:
        raise UnsupportedShapeError("the functional-equation verdict is defined over Zp[[W]]")
    try:
        if rank(M) != rank(N):
            verdict = Verdict.DIFFERENT
        else:
            twisted = involute_module(N, var, experimental=isinstance(N.shape, Presentation))
            verdict = pseudo_compare(M, twisted)
    except UNDECIDED as e:
        logger.info("funceq verdict undecided: %s", e)
        verdict = Verdict.INDETERMINATE
    audit.info(audit_entry("funceq_verdict", {"m": M, "n": N}, verdict))
    return verdict
