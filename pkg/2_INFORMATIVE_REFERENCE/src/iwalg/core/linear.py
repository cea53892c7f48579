from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .context import RingContext, balanced, require_same_context
from .errors import InvalidLinearElementError
from .series import PowerSeries

logger = logging.getLogger("iwalg.ring")


@dataclass(frozen=True)
class LinearElement:
    """a0 + a1·W1 + ... + am·Wm with p | a0 and some ai (i >= 1) a unit; coefficients balanced mod p^N."""
    ctx: RingContext
    coeffs: Tuple[int, ...]

    @property
    def pivot(self) -> int:
        """0-based index of the eliminated variable: the largest one with a unit coefficient."""
        p = self.ctx.p
        for i in range(self.ctx.m, 0, -1):
            if self.coeffs[i] % p:
                return i - 1
        raise InvalidLinearElementError("no unit coefficient")

    def as_series(self) -> PowerSeries:
        terms = {(0,) * self.ctx.m: self.coeffs[0]}
        for i in range(self.ctx.m):
            e = [0] * self.ctx.m
            e[i] = 1
            terms[tuple(e)] = self.coeffs[i + 1]
        return PowerSeries(self.ctx, terms)

    def __str__(self) -> str:
        return str(self.as_series())


def make_linear_element(ctx: RingContext, coeffs: Sequence[int]) -> LinearElement:
    """
    Validates (a0, ..., am) as a linear element.

    Raises:
        InvalidLinearElementError: If m = 0, the vector has the wrong length,
            p does not divide a0, or no a1..am is a unit.
    """
    if ctx.m < 1:
        raise InvalidLinearElementError("linear elements need at least one variable")
    if len(coeffs) != ctx.m + 1:
        raise InvalidLinearElementError(f"expected {ctx.m + 1} coefficients, got {len(coeffs)}")
    p = ctx.p
    balanced_coeffs = tuple(balanced(int(a), ctx.modulus) for a in coeffs)
    if balanced_coeffs[0] % p:
        raise InvalidLinearElementError(f"constant term {coeffs[0]} is not divisible by p={p}")
    if all(a % p == 0 for a in balanced_coeffs[1:]):
        raise InvalidLinearElementError("no coefficient of W1..Wm is a unit")
    return LinearElement(ctx, balanced_coeffs)


def linear_from_series(f: PowerSeries) -> LinearElement:
    """Reads an exact series of total degree <= 1 as a linear element."""
    if not f.is_exact or f.degree > 1:
        raise InvalidLinearElementError(f"'{f}' is not a linear polynomial")
    ctx = f.ctx
    coeffs = [f.constant_term]
    for i in range(ctx.m):
        e = [0] * ctx.m
        e[i] = 1
        coeffs.append(f.terms.get(tuple(e), 0))
    return make_linear_element(ctx, coeffs)


def linear_ideal_equal(l1: LinearElement, l2: LinearElement) -> bool:
    """True iff l1 = u·l2 for a unit u of Zp, decided modulo p^N."""
    ctx = require_same_context(l1.ctx, l2.ctx)
    modulus = ctx.modulus
    j = l2.pivot + 1
    a_j, b_j = l1.coeffs[j], l2.coeffs[j]
    if a_j % ctx.p == 0:
        return False
    u = a_j * pow(b_j, -1, modulus) % modulus
    return all((a - u * b) % modulus == 0 for a, b in zip(l1.coeffs, l2.coeffs))


def elimination_value(l: LinearElement) -> PowerSeries:
    """-a_j^{-1}(a0 + Σ_{i≠j} a_i W_i) for the pivot j, as a series in the full context."""
    ctx = l.ctx
    j = l.pivot
    inv = pow(l.coeffs[j + 1], -1, ctx.modulus)
    terms = {(0,) * ctx.m: -inv * l.coeffs[0]}
    for i in range(ctx.m):
        if i == j:
            continue
        e = [0] * ctx.m
        e[i] = 1
        terms[tuple(e)] = -inv * l.coeffs[i + 1]
    return PowerSeries(ctx, terms)


def eliminate_variable(f: PowerSeries, l: LinearElement) -> PowerSeries:
    """Image of f under R -> R/(l) ≅ Zp[[m-1 variables]]."""
    require_same_context(f.ctx, l.ctx)
    j = l.pivot
    return f.substitute(j, elimination_value(l)).drop_variable(j)


def random_linear_element(
    ctx: RingContext, rng: random.Random, variables: Optional[Sequence[int]] = None
) -> LinearElement:
    """
    Draws a linear element whose nonzero variable coefficients are units.

    Only the variables listed (0-based) receive coefficients; defaults to all.
    """
    p = ctx.p
    variables = list(range(ctx.m)) if variables is None else [ctx.normalize_var(v) for v in variables]
    coeffs = [0] * (ctx.m + 1)
    for v in variables:
        a = 0
        while a % p == 0:
            a = rng.randrange(1, p * p)
        coeffs[v + 1] = a * rng.choice((1, -1))
    k = rng.randrange(0, 4)
    coeffs[0] = 0 if k == 0 else rng.choice((1, -1)) * rng.randrange(1, p) * p ** k
    return make_linear_element(ctx, coeffs)
