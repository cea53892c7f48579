"""
Randomized property suites over generated modules and series.

Every suite yields one (label, Truth) per case: false is a counterexample,
indeterminate means the case could not be decided at the working truncation.
Draws come from random.Random seeded by suite name and seed, so a run is
reproducible.
"""
from __future__ import annotations

import logging
import random
from itertools import product
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from ..core.context import RingContext
from ..core.errors import InconsistentCorankError, OracleSizeError
from ..core.linear import LinearElement, make_linear_element, random_linear_element
from ..core.models import ReconstructionProblem, SuiteResult, Truth, Verdict
from ..core.series import PowerSeries, determinant
from ..core.weierstrass import involute_associate, involution, unit_equal, weierstrass_prepare
from ..modules.invariants import (
    char_ideal,
    is_fg_over_subring,
    is_torsion,
    pseudo_null_verdict,
    torsion_structure,
)
from ..modules.module import IwasawaModule, Presentation, StandardForm
from ..modules.parser import load_module
from ..modules.specialize import involute_module, rank_formula_check
from ..oracle.quotient import finite_quotient, symbolic_log_order
from ..system.config import settings
from ..system.scripts.hashing import audit_entry
from .corank import corank_sequence, reconstruct_multiplicities
from .lclass import UNDECIDED, l_class_sufficient
from .specialization import funceq_verdict

logger = logging.getLogger("iwalg.funceq")
audit = logging.getLogger("iwalg.audit")

Case = Tuple[str, Truth]
Factor = Tuple[int, int]  # (variable, c) for W_var - c


def _decide(check: Callable[[], Union[bool, Truth]]) -> Truth:
    try:
        value = check()
    except UNDECIDED as e:
        logger.debug("case undecided: %s", e)
        return Truth.INDETERMINATE
    return value if isinstance(value, Truth) else Truth.of(value)


# ── generators ──

def _root(p: int, rng: random.Random) -> int:
    return rng.choice((1, -1)) * rng.randrange(1, p) * p ** rng.randrange(1, 4)


def _random_generator(ctx: RingContext, rng: random.Random, variables: Sequence[int]) -> Tuple[PowerSeries, List[Factor]]:
    """p^k times up to two factors W_j - c with p | c; never a unit."""
    p = ctx.p
    g = PowerSeries.constant(ctx, p ** rng.randrange(0, 3))
    factors: List[Factor] = []
    for _ in range(rng.randrange(0, 3)):
        var, c = rng.choice(list(variables)), _root(p, rng)
        g = g * (PowerSeries.variable(ctx, var) - c)
        factors.append((var, c))
    if g.is_unit:
        g = g * p
    return g, factors


def _random_standard(ctx: RingContext, rng: random.Random, max_free: int = 0) -> Tuple[IwasawaModule, List[Factor]]:
    cyclics: List[PowerSeries] = []
    factors: List[Factor] = []
    for _ in range(rng.randrange(1, 4)):
        g, fs = _random_generator(ctx, rng, range(ctx.m))
        cyclics.append(g)
        factors.extend(fs)
    null = None
    if ctx.m >= 2 and rng.random() < 0.35:
        w = PowerSeries.variable(ctx, rng.randrange(ctx.m))
        null = Presentation.from_rows(ctx, [[PowerSeries.constant(ctx, ctx.p)], [w]])
    M = IwasawaModule.standard(ctx, cyclics, rng.randrange(0, max_free + 1), null, label="G", check=False)
    return M, factors


def _pick_ideal(ctx: RingContext, rng: random.Random, factors: Sequence[Factor]) -> LinearElement:
    """Often a factor of some generator, otherwise a generic linear element."""
    if factors and rng.random() < 0.4:
        var, c = rng.choice(list(factors))
        coeffs = [0] * (ctx.m + 1)
        coeffs[0] = -c
        coeffs[var + 1] = 1
        return make_linear_element(ctx, coeffs)
    return random_linear_element(ctx, rng)


def _matrix_entry(ctx: RingContext, rng: random.Random) -> PowerSeries:
    roll = rng.random()
    if roll < 0.25:
        return PowerSeries.zero(ctx)
    if roll < 0.4:
        return PowerSeries.constant(ctx, rng.choice((1, -1)) * rng.randrange(1, ctx.p))
    return _random_generator(ctx, rng, [0])[0]


# ── suites ──

def weierstrass_cases(ctx: RingContext, rng: random.Random, count: int) -> Iterator[Case]:
    """p^μ·u·P prepared back into (μ, deg P), P itself and the recomposition."""
    p = ctx.p
    for _ in range(count):
        mu, lam = rng.randrange(0, 6), rng.randrange(0, 7)
        unit = [rng.choice((1, -1)) * rng.randrange(1, p)]
        unit += [rng.randrange(-p * p, p * p + 1) for _ in range(rng.randrange(0, 4))]
        dist = [p * rng.randrange(-p * p, p * p + 1) for _ in range(lam)] + [1]
        P = PowerSeries.polynomial(ctx, 0, dist)
        f = PowerSeries.polynomial(ctx, 0, unit) * P * p ** mu

        def check() -> bool:
            data = weierstrass_prepare(f, 0)
            return (
                (data.mu, data.lam) == (mu, lam)
                and (data.recompose() - f).is_zero
                and (data.distinguished - P).is_zero
            )

        yield f"mu={mu} lam={lam} f={f}", _decide(check)


def determinant_cases(ctx: RingContext, rng: random.Random, count: int) -> Iterator[Case]:
    """Square presentations: char is the determinant, and so is the product of the invariant factors."""
    for _ in range(count):
        size = rng.choice((2, 3))
        while True:
            rows = [[_matrix_entry(ctx, rng) for _ in range(size)] for _ in range(size)]
            det = determinant(rows, ctx)
            if not det.is_zero:
                break
        M = IwasawaModule.presentation(ctx, rows, label="A")

        def check() -> Truth:
            first = unit_equal(char_ideal(M), det)
            data = torsion_structure(M)
            if first is not Truth.TRUE or not data.complete:
                return first
            prod = PowerSeries.constant(ctx, 1)
            for e in data.elementary_divisors:
                prod = prod * e
            return unit_equal(prod, det)

        yield f"det={det} coker={M.shape}", _decide(check)


def involution_cases(ctx: RingContext, rng: random.Random, count: int) -> Iterator[Case]:
    """ι twice is the identity; char(M^ι) is the associate of ι(char M); M satisfies the equation against M^ι."""
    for _ in range(count):
        m = rng.choice((1, 2))
        sub = ctx.with_vars(m)
        terms = {
            e: rng.randrange(-9, 10)
            for e in product(range(4), repeat=m)
            if sum(e) <= 4 and rng.random() < 0.5
        }
        f = PowerSeries(sub, terms)
        M, _ = _random_standard(ctx.with_vars(1), rng, max_free=1)

        def check() -> Truth:
            if not (involution(involution(f)) - f).is_zero:
                return Truth.FALSE
            twisted = involute_module(M)
            if is_torsion(M):
                same = unit_equal(char_ideal(twisted), involute_associate(char_ideal(M)))
                if same is not Truth.TRUE:
                    return same
            verdict = funceq_verdict(M, twisted)
            if verdict is Verdict.INDETERMINATE:
                return Truth.INDETERMINATE
            return Truth.of(verdict is Verdict.PSEUDO_ISOMORPHIC)

        yield f"f={f} M={M.shape}", _decide(check)


def torsion_pseudo_null_cases(ctx: RingContext, rng: random.Random, count: int) -> Iterator[Case]:
    """
    R[[W]]/(g, W - h) with h in pZ (zero included) is finitely generated over R = Zp[[W1]];
    it is pseudo-null over R[[W]] exactly when R/(g) is R-torsion.
    """
    base, ctx2 = ctx.with_vars(1), ctx.with_vars(2)
    w = PowerSeries.variable(ctx2, 1)
    for _ in range(count):
        h = 0 if rng.random() < 0.25 else _root(ctx.p, rng)
        rows = [[w - h]]
        if rng.random() < 0.7:
            g, _ = _random_generator(base, rng, [0])
            over_r = IwasawaModule.standard(base, [g], label="R/(g)")
            rows.append([g.embed(ctx2)])
        else:
            over_r = IwasawaModule.free(base, 1, label="R")
        M = IwasawaModule.presentation(ctx2, rows, label="T")
        seed = rng.randrange(1 << 30)

        def check() -> Truth:
            if is_fg_over_subring(M) is not Truth.TRUE:
                return Truth.FALSE
            verdict = pseudo_null_verdict(M, seed=seed)
            if verdict.value is Truth.INDETERMINATE:
                return Truth.INDETERMINATE
            return Truth.of((verdict.value is Truth.TRUE) == is_torsion(over_r))

        yield f"{over_r.label} as {M.shape}", _decide(check)


def rank_formula_cases(ctx: RingContext, rng: random.Random, count: int) -> Iterator[Case]:
    """rank(M) = rank(M/l) - rank(M[l]) over Zp[[W1, W2]]."""
    ctx2 = ctx.with_vars(2)
    for _ in range(count):
        M, factors = _random_standard(ctx2, rng, max_free=2)
        l = _pick_ideal(ctx2, rng, factors)
        yield f"{M.shape} along {l}", _decide(lambda: rank_formula_check(M, l).holds)


def l_class_cases(ctx: RingContext, rng: random.Random, count: int) -> Iterator[Case]:
    """Whenever the sufficient criterion's hypotheses hold, (l) lies in the class."""
    ctx2 = ctx.with_vars(2)
    found = 0
    for _ in range(count * 20):
        if found == count:
            return
        M, factors = _random_standard(ctx2, rng)
        l = _pick_ideal(ctx2, rng, factors)
        try:
            report = l_class_sufficient(M, l)
        except UNDECIDED as e:
            logger.debug("l-class draw skipped: %s", e)
            continue
        if not report.hypotheses_hold:
            continue
        found += 1
        label = f"{M.shape} along {l}"
        if report.membership is Truth.INDETERMINATE:
            yield label, Truth.INDETERMINATE
        else:
            yield label, Truth.of(not report.violation)
    logger.warning("l-class suite found %d of %d admissible pairs", found, count)


def reconstruction_cases(ctx: RingContext, rng: random.Random, count: int) -> Iterator[Case]:
    """Exhaustive: a in {0..3}^theta, theta <= 4, rank <= 2, deg f <= 2."""
    for theta in range(1, 5):
        for a in product(range(4), repeat=theta):
            for module_rank in range(3):
                for deg_f in (1, 2):
                    ranks = corank_sequence(module_rank, a, deg_f)
                    prob = ReconstructionProblem(theta=theta, ranks=ranks, module_rank=module_rank, deg_f=deg_f)
                    try:
                        ok = reconstruct_multiplicities(prob) == list(a)
                    except InconsistentCorankError:
                        ok = False
                    yield f"a={list(a)} rank={module_rank} deg={deg_f}", Truth.of(ok)


def oracle_cases(ctx: RingContext, rng: random.Random, count: int) -> Iterator[Case]:
    """Golden standard forms: brute-force log orders against the closed form on n, d in {4, 8}."""
    for path in sorted(settings.GOLDEN_DIR.glob("*.mod")):
        M = load_module(path)
        if not isinstance(M.shape, StandardForm):
            continue
        for n, d in product((4, 8), repeat=2):
            try:
                expected = symbolic_log_order(M, n, d)
                brute = finite_quotient(M, n, d).log_order
            except OracleSizeError as e:
                logger.info("oracle case %s at (%d, %d) skipped: %s", M.label, n, d, e)
                yield f"{M.label} n={n} d={d}", Truth.INDETERMINATE
                continue
            except UNDECIDED as e:
                logger.debug("no closed form for %s: %s", M.label, e)
                break
            yield f"{M.label} n={n} d={d} brute={brute} closed={expected}", Truth.of(brute == expected)


SuiteFn = Callable[[RingContext, random.Random, int], Iterator[Case]]

# name -> (cases, default count)
SUITES: Dict[str, Tuple[SuiteFn, int]] = {
    "reconstruction": (reconstruction_cases, 0),
    "rank-formula": (rank_formula_cases, 200),
    "weierstrass": (weierstrass_cases, 100),
    "determinant": (determinant_cases, 50),
    "involution": (involution_cases, 50),
    "torsion-pseudo-null": (torsion_pseudo_null_cases, 50),
    "oracle": (oracle_cases, 0),
    "l-class": (l_class_cases, 100),
}


def run_suite(
    name: str,
    seed: Optional[int] = None,
    count: Optional[int] = None,
    p: Optional[int] = None,
) -> SuiteResult:
    """
    Runs one named suite and tallies its cases.

    Raises:
        ValueError: Unknown suite name or an invalid prime.
    """
    if name not in SUITES:
        raise ValueError(f"unknown suite '{name}'; expected one of {', '.join(SUITES)}")
    cases, default_count = SUITES[name]
    seed = settings.SEED if seed is None else seed
    ctx = RingContext(p=settings.PRIME if p is None else p, m=1, prec=settings.PREC, deg=settings.DEG)
    rng = random.Random(f"{name}:{seed}")

    result = SuiteResult(name=name, seed=seed)
    for label, outcome in cases(ctx, rng, default_count if count is None else count):
        result.cases += 1
        if outcome is Truth.FALSE:
            result.failures += 1
            if result.first_failure is None:
                result.first_failure = label
            logger.error("%s: counterexample %s", name, label)
        elif outcome is Truth.INDETERMINATE:
            result.indeterminate += 1
    audit.info(audit_entry(
        "property_suite",
        {"suite": name, "seed": seed, "p": ctx.p, "cases": result.cases},
        "passed" if result.passed else "failed",
    ))
    return result


def run_suites(
    names: Optional[Sequence[str]] = None,
    seed: Optional[int] = None,
    count: Optional[int] = None,
    p: Optional[int] = None,
) -> List[SuiteResult]:
    return [run_suite(name, seed, count, p) for name in (names or list(SUITES))]
