from __future__ import annotations

import logging
import random
from typing import Iterable, List, Optional, Sequence, Tuple

from ..core.context import RingContext
from ..core.errors import (
    IndeterminateError,
    NotTorsionError,
    PrecisionExhaustedError,
    PreparationError,
    UnsupportedShapeError,
)
from ..core.linear import eliminate_variable, random_linear_element
from ..core.models import PseudoNullVerdict, StructureData, Truth, Verdict
from ..core.series import PowerSeries, determinant, minors
from ..core.weierstrass import (
    gcd_one_var,
    normalize_one_var,
    unit_equal,
    weierstrass_divide,
    weierstrass_prepare,
)
from ..system.config import settings
from ..system.scripts.hashing import audit_entry
from .module import IwasawaModule, Presentation, StandardForm

logger = logging.getLogger("iwalg.iwmod")
audit = logging.getLogger("iwalg.audit")


def known_zero(s: PowerSeries) -> bool:
    """Zero as an element of the ring, not merely at truncation."""
    return s.is_zero and s.is_exact and s.prec >= s.ctx.prec


def _require_one_var(ctx: RingContext, what: str) -> None:
    if ctx.m != 1:
        raise UnsupportedShapeError(f"{what} needs the one-variable ring Zp[[W]], got {ctx.m} variables")


# ── rank ──

def presentation_rank(pres: Presentation) -> int:
    """b minus the size of the largest nonvanishing minor."""
    a, b = pres.n_rows, pres.cols
    for k in range(min(a, b), 0, -1):
        uncertain = False
        for _, _, det in minors(pres.rows, k, pres.ctx):
            if not det.is_zero:
                return b - k
            if not known_zero(det):
                uncertain = True
        if uncertain:
            raise IndeterminateError(f"every {k}x{k} minor vanishes at truncation but not provably")
    return b


def rank(M: IwasawaModule) -> int:
    shape = M.shape
    if isinstance(shape, StandardForm):
        extra = presentation_rank(shape.residual_part) if shape.residual_part is not None else 0
        return shape.free_rank + extra
    return presentation_rank(shape)


def is_torsion(M: IwasawaModule) -> bool:
    return rank(M) == 0


# ── gcds and characteristic ideals ──

def gcd_many(series: Iterable[PowerSeries], ctx: RingContext) -> PowerSeries:
    """
    gcd of a family in Zp or Zp[[W]]; zero if every member is zero.

    Raises:
        IndeterminateError: A member vanishes only at truncation and the
            gcd of the others is not already a unit.
        UnsupportedShapeError: Two or more variables.
    """
    if ctx.m > 1:
        raise UnsupportedShapeError("gcds are only computed over Zp and Zp[[W]]")
    result: Optional[PowerSeries] = None
    unsure = False
    for s in series:
        if s.is_zero:
            unsure = unsure or not known_zero(s)
            continue
        if ctx.m == 0:
            v = s.valuation if result is None else min(s.valuation, result.valuation)
            result = PowerSeries.constant(ctx, ctx.p ** v)
        else:
            result = normalize_one_var(s) if result is None else gcd_one_var(result, s)
        if result.is_unit:
            return PowerSeries.constant(ctx, 1)
    if unsure:
        raise IndeterminateError("a generator vanishes only at truncation")
    return PowerSeries.zero(ctx) if result is None else result


def determinantal_divisor(pres: Presentation, k: int) -> PowerSeries:
    """gcd of the k×k minors (divisorial hull of the Fitting ideal they generate)."""
    if k == 0:
        return PowerSeries.constant(pres.ctx, 1)
    return gcd_many((det for _, _, det in minors(pres.rows, k, pres.ctx)), pres.ctx)


def _presentation_char(pres: Presentation) -> PowerSeries:
    ctx = pres.ctx
    a, b = pres.n_rows, pres.cols
    if b == 0:
        return PowerSeries.constant(ctx, 1)
    if a == b:
        return determinant(pres.rows, ctx)
    if ctx.m <= 1:
        return determinantal_divisor(pres, b)
    raise UnsupportedShapeError(
        f"characteristic ideal of a non-square {a}x{b} presentation in {ctx.m} variables is not supported"
    )


def char_ideal(M: IwasawaModule) -> PowerSeries:
    """
    Generator of the characteristic ideal, up to unit.

    Raises:
        NotTorsionError: M has positive rank.
        UnsupportedShapeError: Non-square presentation in two or more variables.
    """
    r = rank(M)
    if r:
        raise NotTorsionError(f"{M.label} has rank {r}; characteristic ideals need torsion modules")
    shape = M.shape
    if isinstance(shape, StandardForm):
        result = PowerSeries.constant(M.ctx, 1)
        for g in shape.cyclics:
            result = result * g
        if shape.residual_part is not None:
            result = result * _presentation_char(shape.residual_part)
        return result
    return _presentation_char(shape)


# ── pseudo-nullity ──

def _one_var_finite(pres: Presentation) -> bool:
    """coker over Zp or Zp[[W]] is pseudo-null (zero over Zp, finite over Zp[[W]])."""
    b = pres.cols
    if b == 0:
        return True
    if presentation_rank(pres):
        return False
    return determinantal_divisor(pres, b).is_unit


def _sample_chain(pres: Presentation, rng: random.Random) -> Presentation:
    """Specializes by generic linear elements (every variable present) down to one variable."""
    while pres.ctx.m > 1:
        ctx = pres.ctx
        l = random_linear_element(ctx, rng)
        pres = pres.map_entries(lambda x: eliminate_variable(x, l), ctx.with_vars(ctx.m - 1))
    return pres


def pseudo_null_verdict(M: IwasawaModule, samples: Optional[int] = None, seed: Optional[int] = None) -> PseudoNullVerdict:
    """
    Annihilator of height >= 2.

    Exact over Zp and Zp[[W]]. In more variables the module is specialized along
    random chains of linear elements; a single finite specialization proves
    pseudo-nullity, otherwise the verdict is false and flagged as sampled.
    """
    verdict = _pseudo_null_verdict(M, samples, seed)
    audit.info(audit_entry("pseudo_null_verdict", {"m": M, "method": verdict.method}, verdict.value))
    return verdict


def _pseudo_null_verdict(M: IwasawaModule, samples: Optional[int], seed: Optional[int]) -> PseudoNullVerdict:
    ctx = M.ctx
    shape = M.shape
    if isinstance(shape, StandardForm):
        if shape.free_rank or any(not g.is_unit for g in shape.cyclics):
            return PseudoNullVerdict(value=Truth.FALSE, method="exact")
        parts = [q for q in (shape.pseudo_null_part, shape.residual_part) if q is not None]
        if not parts:
            return PseudoNullVerdict(value=Truth.TRUE, method="exact")
        from .module import block_diagonal
        pres = block_diagonal(ctx, parts)
    else:
        pres = shape

    try:
        if presentation_rank(pres):
            return PseudoNullVerdict(value=Truth.FALSE, method="exact")
        if ctx.m <= 1:
            return PseudoNullVerdict(value=Truth.of(_one_var_finite(pres)), method="exact")
        b = pres.cols
        for _, _, det in minors(pres.rows, b, ctx):
            if det.is_unit:
                return PseudoNullVerdict(value=Truth.TRUE, method="exact")
    except (IndeterminateError, PrecisionExhaustedError, PreparationError) as e:
        logger.info("pseudo-nullity of %s indeterminate: %s", M.label, e)
        return PseudoNullVerdict(value=Truth.INDETERMINATE, method="exact")

    samples = settings.SAMPLES if samples is None else samples
    rng = random.Random(settings.SEED if seed is None else seed)
    tried = 0
    for _ in range(samples):
        chain = _sample_chain(pres, rng)
        tried += 1
        try:
            if _one_var_finite(chain):
                return PseudoNullVerdict(value=Truth.TRUE, method="sampled", samples=tried)
        except (IndeterminateError, PrecisionExhaustedError, PreparationError) as e:
            logger.debug("sample %d inconclusive: %s", tried, e)
    return PseudoNullVerdict(value=Truth.FALSE, method="sampled", samples=tried)


def is_pseudo_null(M: IwasawaModule, samples: Optional[int] = None, seed: Optional[int] = None) -> bool:
    verdict = pseudo_null_verdict(M, samples, seed)
    if verdict.value is Truth.INDETERMINATE:
        raise IndeterminateError(f"pseudo-nullity of {M.label} is indeterminate at this precision")
    return verdict.value is Truth.TRUE


# ── finite generation over the coefficient subring ──

def is_fg_over_subring(M: IwasawaModule) -> Truth:
    """
    Whether M over R[[W]] (W the last variable) is finitely generated over R.

    By Nakayama this holds iff M modulo (p, W1..W_{m-1}) is finite over Fp[[W]].
    """
    ctx = M.ctx
    if ctx.m == 0:
        raise UnsupportedShapeError("the coefficient subring needs at least one variable")
    last = ctx.m - 1
    shape = M.shape
    pres = M.to_presentation()
    if isinstance(shape, StandardForm) and shape.free_rank:
        return Truth.FALSE
    reduced = pres.map_entries(lambda x: x.reduce_mod_maximal([last]), ctx.with_vars(1))
    b = reduced.cols
    if b == 0:
        return Truth.TRUE
    uncertain = False
    for _, _, det in minors(reduced.rows, b, reduced.ctx):
        if not det.is_zero:
            return Truth.TRUE
        uncertain = uncertain or not det.is_exact
    return Truth.INDETERMINATE if uncertain else Truth.FALSE


# ── one-variable invariants ──

def mu_lambda(M: IwasawaModule) -> Tuple[int, int]:
    _require_one_var(M.ctx, "mu_lambda")
    data = weierstrass_prepare(char_ideal(M), 0)
    return data.mu, data.lam


def divide_exactly(g: PowerSeries, f: PowerSeries) -> Optional[PowerSeries]:
    """g / f in Zp[[W]] when f divides g at truncation, else None."""
    data = weierstrass_prepare(f, 0)
    try:
        g1 = g.divide_by_p_power(data.mu)
    except ValueError:
        return None
    q, r = weierstrass_divide(g1, f.divide_by_p_power(data.mu), 0)
    return q if r.is_zero else None


def torsion_structure(M: IwasawaModule) -> StructureData:
    """
    rank, μ, λ, characteristic generator of the torsion part and its
    invariant factors e_k = Δ_k / Δ_{k-1} from determinantal divisors.

    `complete` is set only when every gcd and quotient resolved.
    """
    ctx = M.ctx
    _require_one_var(ctx, "torsion_structure")
    r = rank(M)
    pres = M.to_presentation()
    s = pres.cols - r
    complete = True
    divisors: List[PowerSeries] = []
    previous = PowerSeries.constant(ctx, 1)
    hulls: List[PowerSeries] = []
    for k in range(1, s + 1):
        try:
            delta = determinantal_divisor(pres, k)
            e_k = divide_exactly(delta, previous)
        except (IndeterminateError, PrecisionExhaustedError, PreparationError) as e:
            logger.info("invariant factor %d of %s unresolved: %s", k, M.label, e)
            complete = False
            break
        if e_k is None:
            complete = False
            break
        hulls.append(delta)
        if not e_k.is_unit:
            divisors.append(normalize_one_var(e_k))
        previous = delta

    if r == 0:
        char_gen = char_ideal(M)
    elif complete:
        char_gen = hulls[-1] if hulls else PowerSeries.constant(ctx, 1)
    else:
        char_gen = determinantal_divisor(pres, s) if s else PowerSeries.constant(ctx, 1)
    data = weierstrass_prepare(char_gen, 0)
    return StructureData(
        rank=r,
        mu=data.mu,
        lam=data.lam,
        char_gen=normalize_one_var(char_gen),
        elementary_divisors=divisors if complete else None,
        complete=complete,
    )


def structure_one_var(M: IwasawaModule) -> StructureData:
    if not is_torsion(M):
        raise NotTorsionError(f"{M.label} is not torsion")
    return torsion_structure(M)


def _match_divisors(xs: Sequence[PowerSeries], ys: Sequence[PowerSeries]) -> Truth:
    if len(xs) != len(ys):
        return Truth.FALSE
    unmatched = list(ys)
    unsure = False
    for x in xs:
        for j, y in enumerate(unmatched):
            t = unit_equal(x, y)
            if t is Truth.TRUE:
                unmatched.pop(j)
                break
            unsure = unsure or t is Truth.INDETERMINATE
        else:
            return Truth.INDETERMINATE if unsure else Truth.FALSE
    return Truth.TRUE


def pseudo_compare(M: IwasawaModule, N: IwasawaModule) -> Verdict:
    """
    Ranks, then characteristic ideals, then invariant factors up to units and order.

    Equal characteristic ideals with an incomplete factor list on either side stay
    indeterminate: char_equal_only is reported only once both lists are complete
    and provably differ.
    """
    _require_one_var(M.ctx, "pseudo_compare")
    verdict = _pseudo_compare(M, N)
    audit.info(audit_entry("pseudo_compare", {"m": M, "n": N}, verdict))
    return verdict


def _pseudo_compare(M: IwasawaModule, N: IwasawaModule) -> Verdict:
    try:
        if rank(M) != rank(N):
            return Verdict.DIFFERENT
        sm, sn = torsion_structure(M), torsion_structure(N)
    except (IndeterminateError, PrecisionExhaustedError, PreparationError) as e:
        logger.info("pseudo_compare(%s, %s) indeterminate: %s", M.label, N.label, e)
        return Verdict.INDETERMINATE
    same_char = unit_equal(sm.char_gen, sn.char_gen)
    if same_char is Truth.FALSE:
        return Verdict.DIFFERENT
    if same_char is Truth.INDETERMINATE or not (sm.complete and sn.complete):
        return Verdict.INDETERMINATE
    matched = _match_divisors(sm.elementary_divisors, sn.elementary_divisors)
    if matched is Truth.TRUE:
        return Verdict.PSEUDO_ISOMORPHIC
    if matched is Truth.FALSE:
        return Verdict.CHAR_EQUAL_ONLY
    return Verdict.INDETERMINATE
