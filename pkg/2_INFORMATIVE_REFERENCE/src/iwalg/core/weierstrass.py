"""
Weierstrass preparation and division in one designated variable, the
involution W -> (1+W)^{-1} - 1, one-variable gcds and unit-equality of
principal ideals.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Tuple

from sympy import ZZ
from sympy.polys.matrices import DomainMatrix

from .context import RingContext, balanced, p_valuation, require_same_context
from .errors import PrecisionExhaustedError, PreparationError
from .models import Truth
from .series import PowerSeries

logger = logging.getLogger("iwalg.ring")

AExp = Tuple[int, ...]
ACoeff = Dict[AExp, int]
WPoly = List[ACoeff]

MAX_SHIFT_CANDIDATES = 32


class _Truncation:
    """
    Polynomials in W over A/(p^prec, A-degree >= deg), A = Zp[[other variables]].

    `dropped` records whether a nonzero product term was cut by the degree
    truncation; results stay exact polynomials only when it never was.
    """

    def __init__(self, p: int, prec: int, deg: int, n_vars: int):
        self.p = p
        self.modulus = p ** prec
        self.deg = deg
        self.one: AExp = (0,) * n_vars
        self.dropped = False

    def clean(self, x: ACoeff) -> ACoeff:
        out = {}
        for e, c in x.items():
            c %= self.modulus
            if c:
                out[e] = c
        return out

    def add(self, x: ACoeff, y: ACoeff, sign: int = 1) -> ACoeff:
        out = dict(x)
        for e, c in y.items():
            out[e] = out.get(e, 0) + sign * c
        return self.clean(out)

    def mul(self, x: ACoeff, y: ACoeff) -> ACoeff:
        out: ACoeff = {}
        for e1, c1 in x.items():
            d1 = sum(e1)
            for e2, c2 in y.items():
                if d1 + sum(e2) >= self.deg:
                    if c1 * c2 % self.modulus:
                        self.dropped = True
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return self.clean(out)

    @staticmethod
    def strip(f: WPoly) -> WPoly:
        f = list(f)
        while f and not f[-1]:
            f.pop()
        return f

    def poly_mul(self, f: WPoly, g: WPoly) -> WPoly:
        out: WPoly = [{} for _ in range(max(0, len(f) + len(g) - 1))]
        for i, a in enumerate(f):
            if not a:
                continue
            for j, b in enumerate(g):
                if b:
                    out[i + j] = self.add(out[i + j], self.mul(a, b))
        return self.strip(out)

    def divmod(self, f: WPoly, monic: WPoly) -> Tuple[WPoly, WPoly]:
        lam = len(monic) - 1
        rem = [dict(c) for c in f]
        quo: WPoly = [{} for _ in range(max(0, len(rem) - lam))]
        for k in range(len(rem) - 1, lam - 1, -1):
            c = self.clean(rem[k])
            if not c:
                continue
            quo[k - lam] = c
            for i in range(lam):
                if monic[i]:
                    rem[k - lam + i] = self.add(rem[k - lam + i], self.mul(c, monic[i]), -1)
            rem[k] = {}
        return self.strip(quo), self.strip([self.clean(c) for c in rem[:lam]])


def _to_wpoly(f: PowerSeries, var: int) -> WPoly:
    poly: WPoly = []
    for e, c in f.terms.items():
        k = e[var]
        while len(poly) <= k:
            poly.append({})
        poly[k][e[:var] + e[var + 1:]] = c
    return _Truncation.strip(poly)


def _from_wpoly(
    poly: WPoly, ctx: RingContext, var: int, prec: int, bound: Optional[int] = None
) -> PowerSeries:
    terms = {}
    for k, coeff in enumerate(poly):
        for e, c in coeff.items():
            terms[e[:var] + (k,) + e[var:]] = c
    return PowerSeries(ctx, terms, prec, bound)


@dataclass(frozen=True)
class WeierstrassData:
    """f = p^mu · unit · distinguished, distinguished monic of degree lam in W_var."""
    mu: int
    lam: int
    distinguished: PowerSeries
    unit: PowerSeries
    var: int

    def recompose(self) -> PowerSeries:
        ctx = self.unit.ctx
        return self.unit * self.distinguished * ctx.p ** self.mu


def lambda_in(f: PowerSeries, var: int) -> Optional[int]:
    """Lowest W_var-degree whose coefficient has a unit constant term, if any is known."""
    p = f.ctx.p
    var = f.ctx.normalize_var(var)
    best: Optional[int] = None
    for e, c in f.terms.items():
        if c % p == 0 or any(x for i, x in enumerate(e) if i != var):
            continue
        if best is None or e[var] < best:
            best = e[var]
    return best


def weierstrass_prepare(f: PowerSeries, var: int = -1) -> WeierstrassData:
    """
    Factor f = p^μ · u · P with P distinguished in W_var.

    For two or more variables the coefficient ring is Zp[[other variables]]
    and "unit" means unit constant term.

    Raises:
        PreparationError: f is zero, or f/p^μ vanishes modulo p and the
            other variables below the degree cap.
        PrecisionExhaustedError: The lifting did not settle within the
            available precision.
    """
    ctx = f.ctx
    if f.is_zero:
        raise PreparationError("cannot prepare the zero series")
    mu = f.valuation
    f1 = f.divide_by_p_power(mu)

    if ctx.m == 0:
        one = PowerSeries.constant(ctx, 1)
        return WeierstrassData(mu, 0, one, f1, 0)

    var = ctx.normalize_var(var)
    lam = lambda_in(f1, var)
    if lam is None:
        raise PreparationError(
            f"'{f}' is mu-dominated or insufficient degree cap in {ctx.variable_name(var)}"
        )
    if lam == 0:
        return WeierstrassData(mu, 0, PowerSeries.constant(ctx, 1), f1, var)

    ring = _Truncation(ctx.p, f1.prec, ctx.deg, ctx.m - 1)
    F = _to_wpoly(f1.known_part(), var)
    one = ring.one

    # inverse of the unit factor of f mod (p, other variables), modulo W^lam
    u_bar = [coeff.get(one, 0) % ctx.p for coeff in F[lam:]] + [0] * lam
    inv0 = pow(u_bar[0], -1, ctx.p)
    t = [inv0]
    for n in range(1, lam):
        s = sum(u_bar[i] * t[n - i] for i in range(1, n + 1))
        t.append(-inv0 * s % ctx.p)
    T: WPoly = ring.strip([{one: c} if c else {} for c in t])

    P: WPoly = [{} for _ in range(lam)] + [{one: 1}]
    for step in range(f1.prec + ctx.deg + 2):
        Q, r = ring.divmod(F, P)
        if not r:
            break
        _, delta = ring.divmod(ring.poly_mul(T, r), P)
        for i, c in enumerate(delta):
            P[i] = ring.add(P[i], c)
    else:
        raise PrecisionExhaustedError(f"Hensel lifting of '{f}' did not converge")
    logger.debug("prepared %s: mu=%d lam=%d after %d lifting steps", f, mu, lam, step)

    cut = ctx.deg if ring.dropped and ctx.m > 1 else None
    dist = _from_wpoly(P, ctx, var, f1.prec, cut)
    unit = _from_wpoly(Q, ctx, var, f1.prec, cut)

    if f1.bound is not None:
        # the unknown tail moves P only by multiples of (p, other variables)^e
        e = f1.bound // lam
        if ctx.m == 1:
            dist = dist.truncated(prec=e)
            unit = unit.truncated(prec=e, bound=f1.bound - lam)
        else:
            b = max(1, e // 2)
            dist = dist.truncated(prec=e - b + 1, bound=b)
            unit = unit.truncated(prec=e - b + 1, bound=min(f1.bound - lam, b))
    return WeierstrassData(mu, lam, dist, unit, var)


def weierstrass_divide(g: PowerSeries, f: PowerSeries, var: int = -1) -> Tuple[PowerSeries, PowerSeries]:
    """
    g = q·f + r with deg_var r < λ(f).

    Raises:
        PreparationError: f cannot be prepared or has positive μ.
    """
    ctx = require_same_context(g.ctx, f.ctx)
    data = weierstrass_prepare(f, var)
    if data.mu:
        raise PreparationError(f"divisor '{f}' has mu={data.mu}; division needs mu = 0")
    if data.lam == 0:
        return g * data.unit.inverse(), PowerSeries.zero(ctx)
    var = data.var
    dist = data.distinguished
    prec = min(g.prec, dist.prec)
    ring = _Truncation(ctx.p, prec, ctx.deg, ctx.m - 1)
    q1, r = ring.divmod(_to_wpoly(g.known_part(), var), _to_wpoly(dist, var))
    cut = ctx.deg if ring.dropped and ctx.m > 1 else None
    quotient = _from_wpoly(q1, ctx, var, prec, cut)
    remainder = _from_wpoly(r, ctx, var, prec, cut)

    if g.bound is not None:
        e = g.bound // data.lam
        if ctx.m == 1:
            quotient = quotient.truncated(prec=e, bound=g.bound - data.lam)
            remainder = remainder.truncated(prec=e)
        else:
            b = max(1, e // 2)
            quotient = quotient.truncated(prec=e - b + 1, bound=min(g.bound - data.lam, b))
            remainder = remainder.truncated(prec=e - b + 1, bound=b)
    if dist.bound is not None:
        quotient = quotient.truncated(bound=dist.bound)
        remainder = remainder.truncated(bound=dist.bound)
    return quotient * data.unit.inverse(), remainder


def involution(f: PowerSeries, var: int = -1) -> PowerSeries:
    """Substitutes W_var <- (1+W_var)^{-1} - 1 = -W + W^2 - ..., expanded to the degree cap."""
    ctx = f.ctx
    var = ctx.normalize_var(var)
    terms = {}
    for k in range(1, ctx.deg):
        e = [0] * ctx.m
        e[var] = k
        terms[tuple(e)] = (-1) ** k
    return f.substitute(var, PowerSeries(ctx, terms, bound=ctx.deg))


def involute_associate(f: PowerSeries, var: int = -1) -> PowerSeries:
    """
    (1+W)^d · ι(f) for f polynomial of degree d in W = W_var.

    Generates the same ideal as ι(f) and stays a polynomial. Falls back to
    the truncated involution for series with an unknown tail.
    """
    ctx = f.ctx
    var = ctx.normalize_var(var)
    if not f.is_exact:
        return involution(f, var)
    d = f.degree_in(var)
    if d <= 0:
        return f
    w = PowerSeries.variable(ctx, var)
    plus = [PowerSeries.constant(ctx, 1)]
    minus = [PowerSeries.constant(ctx, 1)]
    for _ in range(d):
        plus.append(plus[-1] * (1 + w))
        minus.append(minus[-1] * (-w))
    result = PowerSeries.zero(ctx)
    for k, part in f.coefficients_in(var).items():
        lifted = PowerSeries.from_coefficients(ctx, var, {0: part})
        result = result + lifted * minus[k] * plus[d - k]
    return result


def normalize_one_var(f: PowerSeries) -> PowerSeries:
    """p^μ · P, the canonical generator of (f) in Zp[[W]]."""
    if f.ctx.m != 1:
        raise ValueError("normalize_one_var needs a one-variable context")
    data = weierstrass_prepare(f, 0)
    return data.distinguished * f.ctx.p ** data.mu


# ── one-variable gcd ──

def _int_coeffs(f: PowerSeries, prec: int) -> List[int]:
    modulus = f.ctx.p ** prec
    d = f.degree_in(0)
    return [balanced(f.terms.get((k,), 0), modulus) for k in range(d + 1)]


def _det(rows: List[List[int]]) -> int:
    n = len(rows)
    return int(DomainMatrix([[ZZ(x) for x in row] for row in rows], (n, n), ZZ).det())


def _divides(ctx: RingContext, divisor: List[int], f: List[int], prec: int) -> bool:
    ring = _Truncation(ctx.p, prec, ctx.deg, 0)
    _, r = ring.divmod([{(): c} for c in f], [{(): c} for c in divisor])
    return not r


def _monic_gcd(A: PowerSeries, B: PowerSeries) -> PowerSeries:
    """gcd of two monic polynomials over Zp via principal subresultant coefficients."""
    ctx = A.ctx
    p = ctx.p
    prec = min(A.prec, B.prec)
    a_c, b_c = _int_coeffs(A, prec), _int_coeffs(B, prec)
    if len(a_c) < len(b_c):
        a_c, b_c = b_c, a_c
    a, b = len(a_c) - 1, len(b_c) - 1

    def coeff(poly: List[int], d: int) -> int:
        return poly[d] if 0 <= d < len(poly) else 0

    for j in range(b):
        shifts = [(a_c, s) for s in range(b - j - 1, -1, -1)] + [(b_c, s) for s in range(a - j - 1, -1, -1)]
        head = list(range(a + b - j - 1, j, -1))

        def minor(last: int) -> int:
            return _det([[coeff(poly, d - s) for d in head + [last]] for poly, s in shifts])

        psc = minor(j)
        if psc == 0:
            continue
        v = p_valuation(psc, p, prec)
        if v >= prec:
            logger.debug("subresultant %d vanishes only modulo p^%d; treating as zero", j, prec)
            continue
        work = prec - v
        modulus = p ** work
        inv = pow(psc // p ** v, -1, modulus)
        gcd = [(minor(i) // p ** v) * inv % modulus for i in range(j + 1)]
        if not (_divides(ctx, gcd, a_c, work) and _divides(ctx, gcd, b_c, work)):
            raise PrecisionExhaustedError(f"gcd of degree {j} does not divide both inputs at precision {work}")
        return PowerSeries(ctx, {(i,): c for i, c in enumerate(gcd)}, work)

    if not _divides(ctx, b_c, a_c, prec):
        raise PrecisionExhaustedError("subresultants vanish at working precision but no divisor was found")
    return PowerSeries(ctx, {(i,): c for i, c in enumerate(b_c)}, prec)


def gcd_one_var(f: PowerSeries, g: PowerSeries) -> PowerSeries:
    """p^min(μf, μg) · gcd(Pf, Pg), defined up to unit."""
    ctx = require_same_context(f.ctx, g.ctx)
    if ctx.m != 1:
        raise ValueError("gcd_one_var needs a one-variable context")
    df, dg = weierstrass_prepare(f, 0), weierstrass_prepare(g, 0)
    return _monic_gcd(df.distinguished, dg.distinguished) * ctx.p ** min(df.mu, dg.mu)


# ── unit equality ──

@dataclass(frozen=True)
class UnitEqualResult:
    truth: Truth
    shift: Optional[Tuple[int, ...]] = None
    reason: str = ""


def _shift_candidates(ctx: RingContext) -> List[Tuple[int, ...]]:
    span = range(min(ctx.p, 4))
    shifts = [t for t in product(span, repeat=ctx.m - 1) if any(t)]
    shifts.sort(key=lambda t: (sum(t), t))
    return shifts[:MAX_SHIFT_CANDIDATES]


def apply_shift(f: PowerSeries, shift: Tuple[int, ...]) -> PowerSeries:
    """W_i <- W_i + shift[i]·W_m for the non-last variables."""
    ctx = f.ctx
    last = PowerSeries.variable(ctx, -1)
    for i, t in enumerate(shift):
        if t:
            f = f.substitute(i, PowerSeries.variable(ctx, i) + last * t)
    return f


def unit_equal_detail(f: PowerSeries, g: PowerSeries) -> UnitEqualResult:
    ctx = require_same_context(f.ctx, g.ctx)
    if f.is_zero and g.is_zero:
        return UnitEqualResult(Truth.TRUE, reason="both zero")
    if f.is_zero or g.is_zero:
        return UnitEqualResult(Truth.FALSE, reason="exactly one side is zero")
    mu_f, mu_g = f.valuation, g.valuation
    if mu_f != mu_g:
        return UnitEqualResult(Truth.FALSE, reason=f"p-content differs ({mu_f} vs {mu_g})")
    if ctx.m == 0:
        return UnitEqualResult(Truth.TRUE, reason="equal valuations")
    f1, g1 = f.divide_by_p_power(mu_f), g.divide_by_p_power(mu_g)

    candidates: List[Optional[Tuple[int, ...]]] = [None] + _shift_candidates(ctx)
    for shift in candidates:
        ff = f1 if shift is None else apply_shift(f1, shift)
        gg = g1 if shift is None else apply_shift(g1, shift)
        lf, lg = lambda_in(ff, -1), lambda_in(gg, -1)
        if lf is None or lg is None:
            continue
        if lf != lg:
            return UnitEqualResult(Truth.FALSE, shift, f"lambda differs ({lf} vs {lg})")
        try:
            pf = weierstrass_prepare(ff, -1).distinguished
            pg = weierstrass_prepare(gg, -1).distinguished
        except (PreparationError, PrecisionExhaustedError) as e:
            return UnitEqualResult(Truth.INDETERMINATE, shift, str(e))
        if (pf - pg).is_zero:
            return UnitEqualResult(Truth.TRUE, shift, "distinguished parts agree")
        return UnitEqualResult(Truth.FALSE, shift, "distinguished parts differ")
    return UnitEqualResult(Truth.INDETERMINATE, reason="no change of variables made both sides preparable")


def unit_equal(f: PowerSeries, g: PowerSeries) -> Truth:
    """(f) = (g) at working truncation."""
    return unit_equal_detail(f, g).truth
