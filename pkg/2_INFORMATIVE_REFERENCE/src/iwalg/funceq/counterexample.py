"""
Golden counterexamples over Zp[[W1, W]].

Part one: M = R/(W1-p) ⊕ R/(W1-p) and N = R/(W1-p^2) have different
characteristic ideals, yet along every W1 - p^{i+1} with i >= 2 both
specialize to (p^2). Neither module is finitely generated over Zp[[W1]],
which is the hypothesis the specialization criterion cannot drop.

Part two: the specialization of (W1 - p) along W1 - p^i is (p), not a power
of p read off from the ideal.
"""
from __future__ import annotations

import logging
from typing import Iterable, Optional, Tuple

from ..core.context import RingContext
from ..core.linear import eliminate_variable, make_linear_element
from ..core.models import CounterexampleReport, CounterexampleRow, NaiveValuationRow, Truth, truth_all
from ..core.series import PowerSeries
from ..core.weierstrass import unit_equal
from ..modules.invariants import char_ideal, is_fg_over_subring, rank
from ..modules.module import IwasawaModule
from ..modules.specialize import quotient_by
from ..system.config import settings
from ..system.scripts.hashing import audit_entry

logger = logging.getLogger("iwalg.funceq")
audit = logging.getLogger("iwalg.audit")

DEFAULT_I_VALUES = tuple(range(2, 7))


def counterexample_modules(ctx: RingContext) -> Tuple[IwasawaModule, IwasawaModule]:
    """(M, N) in a two-variable context."""
    p = ctx.p
    w1 = PowerSeries.variable(ctx, 0)
    M = IwasawaModule.standard(ctx, [w1 - p, w1 - p], label="M")
    N = IwasawaModule.standard(ctx, [w1 - p * p], label="N")
    return M, N


def counterexample_suite(
    p: Optional[int] = None,
    prec: Optional[int] = None,
    deg: Optional[int] = None,
    i_values: Iterable[int] = DEFAULT_I_VALUES,
) -> CounterexampleReport:
    ctx = RingContext(
        p=settings.PRIME if p is None else p,
        m=2,
        prec=settings.PREC if prec is None else prec,
        deg=settings.DEG if deg is None else deg,
    )
    p = ctx.p
    sub = ctx.with_vars(1)
    w1 = PowerSeries.variable(ctx, 0)
    p_squared = PowerSeries.constant(sub, p * p)
    M, N = counterexample_modules(ctx)

    char_m, char_n = char_ideal(M), char_ideal(N)
    i_values = sorted(set(i_values))
    rows = []
    # i = 1 gives N/l = R/(0): recorded, never asserted
    for i in sorted({1, *i_values}):
        l = make_linear_element(ctx, [-p ** (i + 1), 1, 0])
        qm, qn = quotient_by(M, l), quotient_by(N, l)
        torsion = Truth.of(rank(qm) == 0 and rank(qn) == 0)
        if torsion is Truth.TRUE:
            cm, cn = char_ideal(qm), char_ideal(qn)
            rows.append(CounterexampleRow(
                i=i, ideal=str(l), specialized_m=str(cm), specialized_n=str(cn),
                quotient_torsion=torsion,
                equal_to_p_squared=truth_all([unit_equal(cm, p_squared), unit_equal(cn, p_squared)]),
            ))
        else:
            rows.append(CounterexampleRow(
                i=i, ideal=str(l), specialized_m=str(char_ideal(qm)) if rank(qm) == 0 else "not torsion",
                specialized_n="not torsion" if rank(qn) else str(char_ideal(qn)),
                quotient_torsion=torsion, equal_to_p_squared=Truth.FALSE, degenerate=True,
            ))
            logger.info("l_%d = %s: specialization is not torsion (degenerate)", i, l)

    naive_rows = []
    single = w1 - p
    p_const = PowerSeries.constant(sub, p)
    for i in i_values:
        l = make_linear_element(ctx, [-p ** i, 1, 0])
        image = eliminate_variable(single, l)
        naive_rows.append(NaiveValuationRow(
            i=i, ideal=str(l), specialized=str(image),
            equals_p=unit_equal(image, p_const),
            equals_p_power=unit_equal(image, PowerSeries.constant(sub, p ** i)),
        ))

    report = CounterexampleReport(
        p=p, prec=ctx.prec, deg=ctx.deg,
        char_m=str(char_m), char_n=str(char_n),
        char_m_expected=unit_equal(char_m, (w1 - p) ** 2),
        char_n_expected=unit_equal(char_n, w1 - p * p),
        global_equal=unit_equal(char_m, char_n),
        fg_over_subring=(is_fg_over_subring(M), is_fg_over_subring(N)),
        rows=rows,
        naive_rows=naive_rows,
    )
    audit.info(audit_entry(
        "counterexample_suite",
        {"p": p, "prec": ctx.prec, "deg": ctx.deg, "i": ",".join(map(str, i_values))},
        "passed" if report.passed else "failed",
    ))
    if not report.passed:
        logger.error("counterexample suite failed for p=%d", p)
    return report
