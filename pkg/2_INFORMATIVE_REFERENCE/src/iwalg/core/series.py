from __future__ import annotations

import logging
from itertools import combinations
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .context import Exponent, PadicScalar, RingContext, balanced, p_valuation, require_same_context
from .errors import PrecisionExhaustedError

logger = logging.getLogger("iwalg.ring")

Coefficients = Dict[Exponent, int]


def _min_bound(*bounds: Optional[int]) -> Optional[int]:
    known = [b for b in bounds if b is not None]
    return min(known) if known else None


def _is_exact_zero(s: "PowerSeries") -> bool:
    return s.is_zero and s.is_exact


def _product(a: Mapping[Exponent, int], b: Mapping[Exponent, int], below: int) -> Coefficients:
    """Raw product of two coefficient maps, keeping total degree < below."""
    out: Coefficients = {}
    b_items = [(e, c, sum(e)) for e, c in b.items()]
    for e1, c1 in a.items():
        d1 = sum(e1)
        if d1 >= below:
            continue
        for e2, c2, d2 in b_items:
            if d1 + d2 >= below:
                continue
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return out


class PowerSeries:
    """
    An element of Zp[[W1..Wm]] at truncation.

    Coefficients are residues modulo p^prec (one absolute precision for the
    whole series). `bound=None` marks an exact polynomial; otherwise only the
    terms of total degree < bound are known.
    """
    __slots__ = ("ctx", "prec", "bound", "_coeffs")

    def __init__(
        self,
        ctx: RingContext,
        coeffs: Optional[Mapping[Exponent, int]] = None,
        prec: Optional[int] = None,
        bound: Optional[int] = None,
    ):
        prec = ctx.prec if prec is None else max(0, min(prec, ctx.prec))
        if bound is not None:
            bound = max(0, min(bound, ctx.deg))
        modulus = ctx.p ** prec
        limit = ctx.deg if bound is None else bound
        clean: Coefficients = {}
        overflow = False
        for e, c in (coeffs or {}).items():
            if len(e) != ctx.m:
                raise ValueError(f"exponent {e} does not match {ctx.m} variables")
            c %= modulus
            if not c:
                continue
            if sum(e) >= limit:
                overflow = overflow or bound is None
                continue
            clean[tuple(e)] = c
        if overflow:
            bound = ctx.deg
        self.ctx = ctx
        self.prec = prec
        self.bound = bound
        self._coeffs = clean

    # ── constructors ──

    @classmethod
    def zero(cls, ctx: RingContext) -> "PowerSeries":
        return cls(ctx)

    @classmethod
    def constant(cls, ctx: RingContext, value: int) -> "PowerSeries":
        return cls(ctx, {(0,) * ctx.m: value})

    @classmethod
    def variable(cls, ctx: RingContext, var: int) -> "PowerSeries":
        var = ctx.normalize_var(var)
        e = [0] * ctx.m
        e[var] = 1
        return cls(ctx, {tuple(e): 1})

    @classmethod
    def polynomial(cls, ctx: RingContext, var: int, coeffs: Sequence[int]) -> "PowerSeries":
        """Σ coeffs[k]·W_var^k with integer coefficients."""
        var = ctx.normalize_var(var)
        terms: Coefficients = {}
        for k, c in enumerate(coeffs):
            e = [0] * ctx.m
            e[var] = k
            terms[tuple(e)] = c
        return cls(ctx, terms)

    @classmethod
    def from_coefficients(
        cls, ctx: RingContext, var: int, parts: Mapping[int, "PowerSeries"], bound: Optional[int] = None
    ) -> "PowerSeries":
        """Inverse of coefficients_in: Σ parts[k]·W_var^k, parts living in the context without W_var."""
        var = ctx.normalize_var(var)
        terms: Coefficients = {}
        prec = ctx.prec
        for k, part in parts.items():
            prec = min(prec, part.prec)
            if part.bound is not None:
                bound = _min_bound(bound, part.bound + k)
            for e, c in part._coeffs.items():
                terms[e[:var] + (k,) + e[var:]] = c
        return cls(ctx, terms, prec, bound)

    # ── inspection ──

    @property
    def terms(self) -> Mapping[Exponent, int]:
        return MappingProxyType(self._coeffs)

    @property
    def modulus(self) -> int:
        return self.ctx.p ** self.prec

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def is_exact(self) -> bool:
        return self.bound is None

    @property
    def cap(self) -> int:
        return self.ctx.deg if self.bound is None else self.bound

    @property
    def order(self) -> int:
        """Lowest total degree of a nonzero term; the cap for a zero series."""
        if not self._coeffs:
            return self.cap
        return min(sum(e) for e in self._coeffs)

    @property
    def valuation(self) -> int:
        """Minimal p-adic valuation of the coefficients; prec for a zero series."""
        if not self._coeffs:
            return self.prec
        return min(p_valuation(c, self.ctx.p, self.prec) for c in self._coeffs.values())

    @property
    def degree(self) -> int:
        if not self._coeffs:
            return -1
        return max(sum(e) for e in self._coeffs)

    def degree_in(self, var: int) -> int:
        var = self.ctx.normalize_var(var)
        if not self._coeffs:
            return -1
        return max(e[var] for e in self._coeffs)

    @property
    def constant_term(self) -> int:
        return self._coeffs.get((0,) * self.ctx.m, 0)

    @property
    def is_unit(self) -> bool:
        return self.constant_term % self.ctx.p != 0

    def coefficient(self, exponent: Exponent) -> PadicScalar:
        if self.bound is not None and sum(exponent) >= self.bound:
            return PadicScalar(self.ctx.p, 0, 0)
        return PadicScalar(self.ctx.p, self._coeffs.get(tuple(exponent), 0), self.prec)

    # ── arithmetic ──

    def _coerce(self, other: Union["PowerSeries", int]) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            require_same_context(self.ctx, other.ctx)
            return other
        if isinstance(other, int):
            return PowerSeries.constant(self.ctx, other)
        return NotImplemented

    def _combine(self, other: "PowerSeries", sign: int) -> "PowerSeries":
        terms = dict(self._coeffs)
        for e, c in other._coeffs.items():
            terms[e] = terms.get(e, 0) + sign * c
        return PowerSeries(self.ctx, terms, min(self.prec, other.prec), _min_bound(self.bound, other.bound))

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._combine(other, -1)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other._combine(self, -1)

    def __neg__(self) -> "PowerSeries":
        return PowerSeries(self.ctx, {e: -c for e, c in self._coeffs.items()}, self.prec, self.bound)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        ctx = self.ctx
        prec = min(self.prec + other.valuation, other.prec + self.valuation, ctx.prec)
        bound = _min_bound(
            None if self.bound is None or _is_exact_zero(other) else self.bound + other.order,
            None if other.bound is None or _is_exact_zero(self) else other.bound + self.order,
        )
        if bound is not None:
            bound = min(bound, ctx.deg)
        below = 2 * ctx.deg if bound is None else bound
        return PowerSeries(ctx, _product(self._coeffs, other._coeffs, below), prec, bound)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "PowerSeries":
        if not isinstance(k, int) or k < 0:
            raise ValueError("series powers must be nonnegative integers")
        result = PowerSeries.constant(self.ctx, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, (PowerSeries, int)):
            return NotImplemented
        return (self - other).is_zero

    __hash__ = None

    def truncated(self, prec: Optional[int] = None, bound: Optional[int] = None) -> "PowerSeries":
        return PowerSeries(
            self.ctx,
            self._coeffs,
            self.prec if prec is None else min(self.prec, prec),
            _min_bound(self.bound, bound),
        )

    def known_part(self) -> "PowerSeries":
        """The known terms read as an exact polynomial."""
        return PowerSeries(self.ctx, self._coeffs, self.prec)

    def divide_by_p_power(self, k: int) -> "PowerSeries":
        if k == 0:
            return self
        q = self.ctx.p ** k
        if any(c % q for c in self._coeffs.values()):
            raise ValueError(f"series is not divisible by p^{k}")
        return PowerSeries(self.ctx, {e: c // q for e, c in self._coeffs.items()}, self.prec - k, self.bound)

    def inverse(self) -> "PowerSeries":
        """Multiplicative inverse of a unit (unit constant term)."""
        ctx = self.ctx
        zero = (0,) * ctx.m
        c0 = self.constant_term
        if c0 % ctx.p == 0:
            raise ZeroDivisionError(f"{self} is not a unit")
        modulus = self.modulus
        inv0 = pow(c0, -1, modulus)
        if len(self._coeffs) == 1:
            return PowerSeries(ctx, {zero: inv0}, self.prec, self.bound)
        cap = self.cap
        g: Coefficients = {zero: inv0}
        reached = 1
        # Newton: each step doubles the number of correct degrees
        while reached < cap:
            reached = min(2 * reached, cap)
            correction = {e: -c for e, c in _product(self._coeffs, g, reached).items()}
            correction[zero] = correction.get(zero, 0) + 2
            g = {e: c % modulus for e, c in _product(g, correction, reached).items()}
        return PowerSeries(ctx, g, self.prec, cap)

    # ── variables ──

    def _parts(self, var: int) -> Dict[int, Coefficients]:
        parts: Dict[int, Coefficients] = {}
        for e, c in self._coeffs.items():
            k = e[var]
            parts.setdefault(k, {})[e[:var] + (0,) + e[var + 1:]] = c
        return parts

    def coefficient_in(self, var: int, k: int) -> "PowerSeries":
        """The coefficient of W_var^k, as a series in the remaining variables."""
        var = self.ctx.normalize_var(var)
        sub = self.ctx.with_vars(self.ctx.m - 1)
        terms = {e[:var] + e[var + 1:]: c for e, c in self._coeffs.items() if e[var] == k}
        bound = None if self.bound is None else max(0, self.bound - k)
        return PowerSeries(sub, terms, self.prec, bound)

    def coefficients_in(self, var: int) -> Dict[int, "PowerSeries"]:
        var = self.ctx.normalize_var(var)
        return {k: self.coefficient_in(var, k) for k in sorted(self._parts(var))}

    def substitute(self, var: int, value: Union["PowerSeries", int]) -> "PowerSeries":
        """Replace W_var by `value` (Horner on the known part, then account for the unknown tail)."""
        ctx = self.ctx
        var = ctx.normalize_var(var)
        value = self._coerce(value)
        parts = self._parts(var)
        result = PowerSeries(ctx, {}, self.prec)
        for k in range(max(parts, default=-1), -1, -1):
            result = result * value + PowerSeries(ctx, parts.get(k, {}), self.prec)
        if self.bound is None:
            return result
        shift = value.constant_term
        if shift == 0:
            return result.truncated(bound=self.bound)
        v = p_valuation(shift, ctx.p, value.prec)
        if v == 0:
            raise PrecisionExhaustedError("cannot substitute a unit-shifted value into a truncated series")
        # tail terms of degree >= bound land below `cut` only through powers of the shift
        cut = max(1, self.bound // 2)
        return result.truncated(prec=(self.bound - cut + 1) * v, bound=cut)

    def drop_variable(self, var: int) -> "PowerSeries":
        """Reinterpret a series free of W_var in the context with that variable removed."""
        var = self.ctx.normalize_var(var)
        if any(e[var] for e in self._coeffs):
            raise ValueError(f"series still involves {self.ctx.variable_name(var)}")
        sub = self.ctx.with_vars(self.ctx.m - 1)
        return PowerSeries(sub, {e[:var] + e[var + 1:]: c for e, c in self._coeffs.items()}, self.prec, self.bound)

    def embed(self, ctx: RingContext) -> "PowerSeries":
        """View this series in a context with extra trailing variables."""
        if ctx.p != self.ctx.p or ctx.m < self.ctx.m:
            raise ValueError("target context must extend the current one")
        pad = (0,) * (ctx.m - self.ctx.m)
        return PowerSeries(ctx, {e + pad: c for e, c in self._coeffs.items()}, self.prec, self.bound)

    def reduce_mod_maximal(self, keep: Sequence[int]) -> "PowerSeries":
        """Image modulo p and every variable outside `keep`, over Fp[[W_keep]]."""
        keep = [self.ctx.normalize_var(v) for v in keep]
        dropped = [i for i in range(self.ctx.m) if i not in keep]
        sub = self.ctx.with_vars(len(keep))
        terms: Coefficients = {}
        for e, c in self._coeffs.items():
            if any(e[i] for i in dropped):
                continue
            terms[tuple(e[i] for i in keep)] = c
        return PowerSeries(sub, terms, min(1, self.prec), self.bound)

    # ── display ──

    def _monomial(self, e: Exponent) -> str:
        names = []
        for i, k in enumerate(e):
            if k == 1:
                names.append(self.ctx.variable_name(i))
            elif k > 1:
                names.append(f"{self.ctx.variable_name(i)}^{k}")
        return "*".join(names)

    def __str__(self) -> str:
        pieces: List[str] = []
        order = sorted(self._coeffs, key=lambda e: (-sum(e), tuple(-x for x in e)))
        for e in order:
            c = balanced(self._coeffs[e], self.modulus)
            mono = self._monomial(e)
            if not mono:
                term = str(c)
            elif c == 1:
                term = mono
            elif c == -1:
                term = f"-{mono}"
            else:
                term = f"{c}*{mono}"
            if not pieces:
                pieces.append(term)
            elif term.startswith("-"):
                pieces.append(f"- {term[1:]}")
            else:
                pieces.append(f"+ {term}")
        text = " ".join(pieces) or "0"
        if self.bound is not None:
            names = ",".join(self.ctx.variable_name(i) for i in range(self.ctx.m))
            text += f" + O({names})^{self.bound}"
        if self.prec < self.ctx.prec:
            text += f" (mod p^{self.prec})"
        return text

    def __repr__(self) -> str:
        return f"PowerSeries({self}; {self.ctx.describe()})"


def determinant(rows: Sequence[Sequence[PowerSeries]], ctx: RingContext) -> PowerSeries:
    """Determinant by dynamic programming over column subsets."""
    n = len(rows)
    if n == 0:
        return PowerSeries.constant(ctx, 1)
    if n == 1:
        return rows[0][0]
    layer: Dict[int, PowerSeries] = {0: PowerSeries.constant(ctx, 1)}
    for i in range(n):
        nxt: Dict[int, PowerSeries] = {}
        for mask, acc in layer.items():
            if acc.is_zero and acc.is_exact:
                continue
            for j in range(n):
                if mask >> j & 1:
                    continue
                entry = rows[i][j]
                if entry.is_zero and entry.is_exact:
                    continue
                sign = -1 if bin(mask >> (j + 1)).count("1") % 2 else 1
                term = acc * entry
                term = -term if sign < 0 else term
                key = mask | (1 << j)
                nxt[key] = nxt[key] + term if key in nxt else term
        layer = nxt
    return layer.get((1 << n) - 1, PowerSeries.zero(ctx))


def minors(
    rows: Sequence[Sequence[PowerSeries]], k: int, ctx: RingContext
) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...], PowerSeries]]:
    """All k×k minors as (row indices, column indices, determinant)."""
    a = len(rows)
    b = len(rows[0]) if rows else 0
    for r in combinations(range(a), k):
        for c in combinations(range(b), k):
            yield r, c, determinant([[rows[i][j] for j in c] for i in r], ctx)
