from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator
from sympy import isprime

from .errors import ContextMismatchError

Exponent = Tuple[int, ...]


class RingContext(BaseModel):
    """
    The ambient ring Zp[[W1, ..., Wm]] at a fixed truncation.

    Every value taking part in one computation shares a single context:
    p-adic precision `prec` (digits) and total-degree cap `deg`.
    """
    model_config = ConfigDict(frozen=True)

    p: int = Field(..., description="Odd prime")
    m: int = Field(..., ge=0, description="Number of variables")
    prec: int = Field(20, ge=1, description="p-adic precision N")
    deg: int = Field(16, ge=1, description="Total-degree cap D (terms of degree >= D are dropped)")

    @field_validator("p")
    @classmethod
    def validate_odd_prime(cls, v: int) -> int:
        if v == 2 or not isprime(v):
            raise ValueError(f"p must be an odd prime, got {v}")
        return v

    @property
    def modulus(self) -> int:
        return self.p ** self.prec

    def with_vars(self, m: int) -> "RingContext":
        return self.model_copy(update={"m": m})

    def variable_name(self, index: int) -> str:
        return f"W{index + 1}"

    def normalize_var(self, var: int) -> int:
        """Accepts 0-based indices and negative indices counted from the last variable."""
        if self.m == 0:
            raise ValueError("the coefficient ring Zp has no variables")
        if var < 0:
            var += self.m
        if not 0 <= var < self.m:
            raise ValueError(f"variable index {var} out of range for {self.m} variables")
        return var

    def monomials(self, below: Optional[int] = None) -> List[Exponent]:
        """All exponent vectors of total degree < below (default: the degree cap)."""
        return list(_monomials(self.m, self.deg if below is None else below))

    def describe(self) -> str:
        return f"ring p={self.p} vars={self.m} prec={self.prec} deg={self.deg}"


@lru_cache(maxsize=128)
def _monomials(m: int, below: int) -> Tuple[Exponent, ...]:
    out: List[Exponent] = []
    for total in range(below):
        for combo in combinations_with_replacement(range(m), total):
            e = [0] * m
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
        if m == 0:
            break
    return tuple(out)


def require_same_context(*contexts: RingContext) -> RingContext:
    first = contexts[0]
    for ctx in contexts[1:]:
        if ctx != first:
            raise ContextMismatchError(f"mixed contexts: '{first.describe()}' vs '{ctx.describe()}'")
    return first


def p_valuation(value: int, p: int, cap: int) -> int:
    """v_p(value), returning `cap` for values divisible by p^cap (including 0)."""
    if value == 0:
        return cap
    v = 0
    while v < cap and value % p == 0:
        value //= p
        v += 1
    return v


def balanced(residue: int, modulus: int) -> int:
    """Representative of residue in (-modulus/2, modulus/2]."""
    residue %= modulus
    return residue - modulus if residue > modulus // 2 else residue


@dataclass(frozen=True)
class PadicScalar:
    """An element of Zp known modulo p^precision."""
    p: int
    residue: int
    precision: int

    @classmethod
    def of(cls, ctx: RingContext, value: int, precision: Optional[int] = None) -> "PadicScalar":
        precision = ctx.prec if precision is None else min(precision, ctx.prec)
        return cls(ctx.p, value % ctx.p ** precision, precision)

    @property
    def modulus(self) -> int:
        return self.p ** self.precision

    @property
    def is_zero(self) -> bool:
        return self.residue == 0

    @property
    def valuation(self) -> Optional[int]:
        """None when the scalar is zero at its precision."""
        if self.residue == 0:
            return None
        return p_valuation(self.residue, self.p, self.precision)

    @property
    def is_unit(self) -> bool:
        return self.residue % self.p != 0

    def __add__(self, other: "PadicScalar") -> "PadicScalar":
        prec = min(self.precision, other.precision)
        return PadicScalar(self.p, (self.residue + other.residue) % self.p ** prec, prec)

    def __sub__(self, other: "PadicScalar") -> "PadicScalar":
        prec = min(self.precision, other.precision)
        return PadicScalar(self.p, (self.residue - other.residue) % self.p ** prec, prec)

    def __mul__(self, other: "PadicScalar") -> "PadicScalar":
        va = self.precision if self.valuation is None else self.valuation
        vb = other.precision if other.valuation is None else other.valuation
        prec = min(self.precision + vb, other.precision + va, max(self.precision, other.precision))
        return PadicScalar(self.p, (self.residue * other.residue) % self.p ** prec, prec)

    def inverse(self) -> "PadicScalar":
        if not self.is_unit:
            raise ZeroDivisionError(f"{self} is not a unit")
        return PadicScalar(self.p, pow(self.residue, -1, self.modulus), self.precision)

    def __int__(self) -> int:
        return balanced(self.residue, self.modulus)

    def __str__(self) -> str:
        return str(int(self))
