import logging
import sys
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import typer
from rich.console import Console
from rich.panel import Panel

from iwalg.core.context import RingContext, require_same_context
from iwalg.core.errors import (
    ContextMismatchError,
    InconsistentCorankError,
    IndeterminateError,
    InvalidLinearElementError,
    IwalgError,
    NotTorsionError,
    OracleSizeError,
    ParseError,
    PrecisionExhaustedError,
    PreparationError,
    SamplingExhaustedError,
    UnsupportedShapeError,
)
from iwalg.core.linear import LinearElement, eliminate_variable, linear_from_series
from iwalg.core.literal import parse_series
from iwalg.core.models import Outcome, ReconstructionProblem, Truth, Verdict
from iwalg.core.weierstrass import (
    gcd_one_var,
    involute_associate,
    involution,
    normalize_one_var,
    unit_equal,
    weierstrass_divide,
    weierstrass_prepare,
)
from iwalg.funceq.corank import (
    corank_sequence,
    f_primary_multiplicities,
    hom_rank_sequence,
    reconstruct_multiplicities,
    structure_compare,
)
from iwalg.funceq.counterexample import DEFAULT_I_VALUES, counterexample_suite
from iwalg.funceq.lclass import in_L_class, l_class_sufficient, sample_linear_ideals, supports
from iwalg.funceq.properties import SUITES, run_suites
from iwalg.funceq.specialization import funceq_verdict, verify_char_equality_by_specialization
from iwalg.modules.invariants import (
    char_ideal,
    mu_lambda,
    pseudo_compare,
    pseudo_null_verdict,
    rank,
    torsion_structure,
)
from iwalg.modules.module import IwasawaModule, StandardForm
from iwalg.modules.parser import load_module
from iwalg.modules.specialize import (
    involute_module,
    quotient_by,
    rank_formula_check,
    tor_transfer_check,
    torsion_sub,
)
from iwalg.oracle.quotient import finite_quotient, oracle_rank_probe, oracle_torsion_sub, symbolic_log_order
from iwalg.system.config import configure_logging, settings
from iwalg.system.scripts.hashing import report_digest

logger = logging.getLogger("iwalg.cli")

app = typer.Typer(
    help="iwalg - modules over truncated Iwasawa algebras Zp[[W1..Wm]]",
    no_args_is_help=True,
)
console = Console(markup=False, highlight=False, emoji=False, soft_wrap=True)
err_console = Console(stderr=True, highlight=False, emoji=False)

# Library operations reached by each verb
VERB_OPERATIONS: Dict[str, Tuple[str, ...]] = {
    "char": ("char_ideal", "finite_quotient"),
    "rank": ("rank", "oracle_rank_probe"),
    "mu-lambda": ("mu_lambda",),
    "structure": ("torsion_structure", "structure_one_var", "pseudo_null_verdict", "is_pseudo_null"),
    "specialize": ("quotient_by", "eliminate_variable", "specialized_char"),
    "torsion-sub": ("torsion_sub", "rank_formula_check", "tor_transfer_check", "oracle_torsion_sub"),
    "involute": ("involute_module", "involute_associate"),
    "l-class": ("l_class_sufficient", "in_L_class"),
    "verify-funceq": ("funceq_verdict",),
    "verify-specialization": (
        "verify_char_equality_by_specialization", "sample_linear_ideals", "is_fg_over_subring",
    ),
    "counterexample": ("counterexample_suite",),
    "reconstruct": (
        "reconstruct_multiplicities", "corank_formula", "hom_rank_sequence", "f_primary_multiplicities",
    ),
    "oracle-probe": ("finite_quotient", "symbolic_log_order", "oracle_rank_probe"),
    "suite": ("run_suites", "run_suite"),
    "compare": ("pseudo_compare",),
    "structure-compare": ("structure_compare",),
    "series": (
        "parse_series", "weierstrass_prepare", "weierstrass_divide", "gcd_one_var", "unit_equal",
        "involution", "normalize_one_var", "make_linear_element", "eliminate_variable",
    ),
}

# click as typer raises it; newer typer releases vendor their own copy
CLICK_ERRORS = (next(c for c in typer.BadParameter.__mro__ if c.__name__ == "ClickException"),)

USAGE_ERRORS = (ParseError, ContextMismatchError, InvalidLinearElementError, UnsupportedShapeError, OracleSizeError)
UNDECIDED_ERRORS = (IndeterminateError, PrecisionExhaustedError, PreparationError, SamplingExhaustedError)
REFUTING_ERRORS = (NotTorsionError, InconsistentCorankError)


class ReportFormat(str, Enum):
    text = "text"
    kv = "kv"


class SeriesOp(str, Enum):
    prepare = "prepare"
    divide = "divide"
    gcd = "gcd"
    unit_equal = "unit-equal"
    involute = "involute"
    normalize = "normalize"
    eliminate = "eliminate"
    add = "add"
    sub = "sub"
    mul = "mul"


# ── shared options ──

def _prime_option():
    return typer.Option(None, "--prime", help="Odd prime p (overrides the module header).")


def _prec_option():
    return typer.Option(None, "--prec", help="p-adic precision N.")


def _deg_option():
    return typer.Option(None, "--deg", help="Total-degree cap D.")


def _format_option():
    return typer.Option(ReportFormat.text, "--format", help="Report layout: 'key = value' or 'key=value'.")


def _module_argument():
    return typer.Argument(..., help="Module description file.")


# ── rendering ──

def _render(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, (list, tuple)):
        return ",".join(_render(v) for v in value)
    return str(value)


def _emit(body: Dict[str, Any], fmt: ReportFormat, outcome: Outcome = Outcome.OK) -> None:
    """Prints the report, its digest, and leaves with the outcome's exit code."""
    rendered = {key: _render(value) for key, value in body.items()}
    sep = " = " if fmt is ReportFormat.text else "="
    for key, value in rendered.items():
        console.print(f"{key}{sep}{value}")
    console.print(f"digest{sep}{report_digest(rendered)}")
    raise typer.Exit(code=outcome.exit_code)


def _exit_code(error: Exception) -> int:
    if isinstance(error, USAGE_ERRORS):
        return 3
    if isinstance(error, REFUTING_ERRORS):
        return Outcome.REFUTED.exit_code
    if isinstance(error, UNDECIDED_ERRORS):
        return Outcome.INDETERMINATE.exit_code
    return 3


@contextmanager
def _handled() -> Iterator[None]:
    """Library failures become a stderr panel and an exit code."""
    try:
        yield
    except IwalgError as e:
        err_console.print(Panel(str(e), title=type(e).__name__, border_style="red"))
        raise typer.Exit(code=_exit_code(e))
    except (ValueError, OSError) as e:
        err_console.print(Panel(str(e), title="usage error", border_style="red"))
        raise typer.Exit(code=3)


def _truth_outcome(value: Truth) -> Outcome:
    return {
        Truth.TRUE: Outcome.OK,
        Truth.FALSE: Outcome.REFUTED,
        Truth.INDETERMINATE: Outcome.INDETERMINATE,
    }[value]


def _verdict_outcome(verdict: Verdict) -> Outcome:
    if verdict is Verdict.PSEUDO_ISOMORPHIC:
        return Outcome.OK
    if verdict is Verdict.INDETERMINATE:
        return Outcome.INDETERMINATE
    return Outcome.REFUTED


def _int_list(raw: str, flag: str) -> List[int]:
    try:
        return [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise typer.BadParameter(f"expected comma-separated integers, got '{raw}'", param_hint=flag)


def _load(path: Path, prime: Optional[int], prec: Optional[int], deg: Optional[int]) -> IwasawaModule:
    return load_module(path, prime=prime, prec=prec, deg=deg)


def _ideal(text: str, ctx: RingContext) -> LinearElement:
    return linear_from_series(parse_series(text, ctx, source="--ideal"))


def _oracle_level(ctx: RingContext) -> Tuple[int, int]:
    # d well above n: below that the one-variable log orders still bend at n = d
    n = min(4, ctx.prec - 1)
    return n, min(2 * n, ctx.deg - 1)


def _oracle_fields(M: IwasawaModule) -> Dict[str, Any]:
    """Finite-quotient evidence; advisory, never changes the exit code."""
    level = _oracle_level(M.ctx)
    try:
        estimate = oracle_rank_probe(M, levels=(level,))[0]
    except (OracleSizeError, PrecisionExhaustedError) as e:
        logger.warning("oracle skipped for %s: %s", M.label, e)
        return {"oracle": f"unavailable ({e})"}
    fields: Dict[str, Any] = {
        "oracle.level": level,
        "oracle.log_order": estimate.log_orders[level],
        "oracle.rank": estimate.rank,
    }
    if estimate.mu is not None:
        fields["oracle.mu"] = estimate.mu
        fields["oracle.lambda"] = estimate.lam
    return fields


def _header(M: IwasawaModule) -> Dict[str, Any]:
    return {"module": M.label, "ring": M.ctx.describe()}


# ── single-module verbs ──

@app.command("rank")
def rank_(
    path: Path = _module_argument(),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    oracle: bool = typer.Option(False, "--oracle", help="Append finite-quotient evidence."),
    fmt: ReportFormat = _format_option(),
):
    """
    Rank of a module over Zp[[W1..Wm]].
    """
    with _handled():
        M = _load(path, prime, prec, deg)
        body = _header(M)
        body["rank"] = rank(M)
        if oracle:
            body.update(_oracle_fields(M))
    _emit(body, fmt)


@app.command()
def char(
    path: Path = _module_argument(),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    oracle: bool = typer.Option(False, "--oracle", help="Append finite-quotient evidence."),
    fmt: ReportFormat = _format_option(),
):
    """
    Generator of the characteristic ideal of a torsion module.
    """
    with _handled():
        M = _load(path, prime, prec, deg)
        body = _header(M)
        body["char"] = char_ideal(M)
        if oracle:
            n, d = _oracle_level(M.ctx)
            try:
                body["oracle.log_order"] = finite_quotient(M, n, d).log_order
                body["oracle.level"] = (n, d)
            except (OracleSizeError, PrecisionExhaustedError) as e:
                body["oracle"] = f"unavailable ({e})"
    _emit(body, fmt)


@app.command("mu-lambda")
def mu_lambda_(
    path: Path = _module_argument(),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    μ and λ of a torsion module over Zp[[W]].
    """
    with _handled():
        M = _load(path, prime, prec, deg)
        mu, lam = mu_lambda(M)
        body = _header(M)
        body.update({"mu": mu, "lambda": lam})
    _emit(body, fmt)


@app.command()
def structure(
    path: Path = _module_argument(),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    samples: Optional[int] = typer.Option(None, "--samples", help="Linear elements per pseudo-nullity test."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Sampling seed."),
    oracle: bool = typer.Option(False, "--oracle", help="Append finite-quotient evidence."),
    fmt: ReportFormat = _format_option(),
):
    """
    Rank, μ, λ and invariant factors over Zp[[W]]; rank, characteristic
    ideal and pseudo-nullity in more variables.
    """
    outcome = Outcome.OK
    with _handled():
        M = _load(path, prime, prec, deg)
        body = _header(M)
        if M.ctx.m == 1:
            data = torsion_structure(M)
            body.update({
                "rank": data.rank,
                "mu": data.mu,
                "lambda": data.lam,
                "char": data.char_gen,
                "complete": data.complete,
                "elementary_divisors": data.elementary_divisors if data.complete else "unresolved",
            })
            if not data.complete:
                outcome = Outcome.INDETERMINATE
        else:
            r = rank(M)
            body["rank"] = r
            body["char"] = char_ideal(M) if r == 0 else "not torsion"
            verdict = pseudo_null_verdict(M, samples=samples, seed=seed)
            body["pseudo_null"] = verdict.value
            body["pseudo_null.method"] = verdict.method
            body["pseudo_null.samples"] = verdict.samples
        if oracle:
            body.update(_oracle_fields(M))
    _emit(body, fmt, outcome)


@app.command()
def specialize(
    path: Path = _module_argument(),
    ideal: str = typer.Option(..., "--ideal", help="Linear element, e.g. 'W1 - 9'."),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    The quotient M/(l) over R/(l), its characteristic ideal and the image of char(M).
    """
    with _handled():
        M = _load(path, prime, prec, deg)
        l = _ideal(ideal, M.ctx)
        q = quotient_by(M, l)
        q_rank = rank(q)
        body = _header(M)
        body.update({
            "ideal": l,
            "quotient": q,
            "quotient_rank": q_rank,
            "quotient_char": char_ideal(q) if q_rank == 0 else "not torsion",
        })
        if rank(M) == 0:
            body["image_of_char"] = eliminate_variable(char_ideal(M), l)
            body["in_L_class"] = in_L_class(M, l)
        else:
            body["image_of_char"] = "not torsion"
    _emit(body, fmt)


@app.command("torsion-sub")
def torsion_sub_(
    path: Path = _module_argument(),
    ideal: str = typer.Option(..., "--ideal", help="Linear element, e.g. 'W1 - 9'."),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    oracle: bool = typer.Option(False, "--oracle", help="Append finite l-torsion counts."),
    fmt: ReportFormat = _format_option(),
):
    """
    The l-torsion submodule M[l], with the rank formula and Tor transfer checks.
    """
    with _handled():
        M = _load(path, prime, prec, deg)
        l = _ideal(ideal, M.ctx)
        ctx = M.ctx
        n = min(4, (ctx.prec - 1) // 2)
        d = min(4, (ctx.deg - n - 2) // 2)
        want_oracle = oracle and n >= 1 and d >= 1
        try:
            ts = torsion_sub(M, l, with_oracle=want_oracle, n=n, d=d)
        except (OracleSizeError, PrecisionExhaustedError) as e:
            logger.warning("oracle skipped for %s[%s]: %s", M.label, l, e)
            ts = torsion_sub(M, l)
            want_oracle = False
        formula = rank_formula_check(M, l)
        transfer = tor_transfer_check(M, l)
        body = _header(M)
        body.update({
            "ideal": l,
            "torsion_sub": ts.module,
            "torsion_sub_rank": ts.rank,
            "null_part_pseudo_null": ts.null_part_pseudo_null,
            "rank": formula.rank,
            "quotient_rank": formula.quotient_rank,
            "rank_formula": formula.holds,
            "tor_transfer.precondition": transfer.precondition,
            "tor_transfer.holds": transfer.holds,
        })
        if oracle:
            evidence, scope = ts.oracle, "null part"
            if evidence is None and want_oracle:
                scope = "module"
                try:
                    evidence = oracle_torsion_sub(M, l, n, d)
                except (OracleSizeError, PrecisionExhaustedError) as e:
                    logger.warning("oracle skipped for %s[%s]: %s", M.label, l, e)
            if evidence is None:
                body["oracle"] = "unavailable"
            else:
                body.update({
                    "oracle.scope": scope,
                    "oracle.level": evidence.level,
                    "oracle.naive": evidence.naive,
                    "oracle.lifted": evidence.lifted,
                    "oracle.stable": evidence.stable,
                })
    _emit(body, fmt, Outcome.OK if formula.holds else Outcome.REFUTED)


@app.command()
def involute(
    path: Path = _module_argument(),
    var: int = typer.Option(-1, "--var", help="Variable index twisted by ι (default: last)."),
    experimental: bool = typer.Option(False, "--experimental", help="Allow raw presentations."),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    The ι-twisted module M^ι.
    """
    with _handled():
        M = _load(path, prime, prec, deg)
        twisted = involute_module(M, var, experimental=experimental)
        body = _header(M)
        body["involuted"] = twisted
        if rank(M) == 0:
            body["char"] = char_ideal(M)
            body["char_involuted"] = char_ideal(twisted)
            body["char_matches"] = unit_equal(
                char_ideal(twisted), involute_associate(char_ideal(M), var)
            ) if M.ctx.m == 1 else "not checked"
    _emit(body, fmt)


@app.command("l-class")
def l_class(
    path: Path = _module_argument(),
    ideal: str = typer.Option(..., "--ideal", help="Linear element, e.g. 'W1 - 9'."),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    Membership of (l) in the L-class of M, with the sufficient criterion when M is a standard form.
    """
    with _handled():
        M = _load(path, prime, prec, deg)
        l = _ideal(ideal, M.ctx)
        body = _header(M)
        body["ideal"] = l
        if isinstance(M.shape, StandardForm):
            report = l_class_sufficient(M, l)
            membership = report.membership if report.membership is not None else in_L_class(M, l)
            body.update({
                "null_part_pseudo_null": report.null_part_pseudo_null,
                "quotient_torsion": report.quotient_torsion,
                "hypotheses_hold": report.hypotheses_hold,
                "membership": membership,
                "extended": report.extended,
            })
            if report.violation:
                _emit(body, fmt, Outcome.REFUTED)
        else:
            membership = in_L_class(M, l)
            body["membership"] = membership
    _emit(body, fmt, _truth_outcome(membership))


# ── two-module verbs ──

@app.command("verify-funceq")
def verify_funceq(
    m_path: Path = typer.Argument(..., help="Module M."),
    n_path: Path = typer.Argument(..., help="Module N."),
    var: int = typer.Option(-1, "--var", help="Variable twisted by ι."),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    Algebraic functional equation: equal ranks and M pseudo-isomorphic to N^ι.
    """
    with _handled():
        M = _load(m_path, prime, prec, deg)
        N = _load(n_path, prime, prec, deg)
        verdict = funceq_verdict(M, N, var)
        body = {"m": M.label, "n": N.label, "ring": M.ctx.describe(), "verdict": verdict}
    _emit(body, fmt, _verdict_outcome(verdict))


@app.command("verify-specialization")
def verify_specialization(
    m_path: Path = typer.Argument(..., help="Module M."),
    n_path: Path = typer.Argument(..., help="Module N."),
    ideals: Optional[List[str]] = typer.Option(None, "--ideal", help="Linear element; repeatable. Sampled when absent."),
    samples: Optional[int] = typer.Option(None, "--samples", help="Number of sampled linear ideals."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Sampling seed."),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    Compares char(M) and char(N) through their specializations along linear ideals.
    """
    with _handled():
        M = _load(m_path, prime, prec, deg)
        N = _load(n_path, prime, prec, deg)
        ctx = require_same_context(M.ctx, N.ctx)
        if ideals:
            chosen = [_ideal(text, ctx) for text in ideals]
        else:
            chosen = sample_linear_ideals(ctx, avoid=supports(M) + supports(N), count=samples, seed=seed)
        report = verify_char_equality_by_specialization(M, N, chosen)
        body: Dict[str, Any] = {
            "m": M.label,
            "n": N.label,
            "ring": ctx.describe(),
            "torsion": report.torsion,
            "fg_over_subring": report.fg_over_subring,
            "global_equal": report.global_equal,
        }
        for k, check in enumerate(report.checks, start=1):
            body[f"check.{k}.ideal"] = check.ideal
            body[f"check.{k}.in_class"] = (check.in_class_m, check.in_class_n)
            body[f"check.{k}.specialized_m"] = check.specialized_m
            body[f"check.{k}.specialized_n"] = check.specialized_n
            body[f"check.{k}.equal"] = check.specialized_equal
        body["status"] = report.status
        body["conclusion"] = report.conclusion
        body["extended"] = report.extended
        body["note"] = report.note
        outcome = {
            "consistent": Outcome.OK,
            "refuted": Outcome.REFUTED,
            "indeterminate": Outcome.INDETERMINATE,
        }[report.conclusion.value]
    _emit(body, fmt, outcome)


@app.command()
def compare(
    m_path: Path = typer.Argument(..., help="Module M."),
    n_path: Path = typer.Argument(..., help="Module N."),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    Pseudo-isomorphism verdict over Zp[[W]].
    """
    with _handled():
        M = _load(m_path, prime, prec, deg)
        N = _load(n_path, prime, prec, deg)
        verdict = pseudo_compare(M, N)
        body = {"m": M.label, "n": N.label, "ring": M.ctx.describe(), "verdict": verdict}
    _emit(body, fmt, _verdict_outcome(verdict))


@app.command("structure-compare")
def structure_compare_(
    m_path: Path = typer.Argument(..., help="Module M."),
    n_path: Path = typer.Argument(..., help="Module N."),
    factors: List[str] = typer.Option(..., "--factor", help="Irreducible distinguished polynomial; repeatable."),
    theta: int = typer.Option(3, "--theta", min=1, help="Length of the corank sequences."),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    Ranks, p-primary parts and corank sequences of M and N.
    """
    with _handled():
        M = _load(m_path, prime, prec, deg)
        N = _load(n_path, prime, prec, deg)
        ctx = require_same_context(M.ctx, N.ctx)
        parsed = [parse_series(text, ctx, source="--factor") for text in factors]
        report = structure_compare(M, N, parsed, theta)
        body: Dict[str, Any] = {
            "m": M.label,
            "n": N.label,
            "rank": (report.rank_m, report.rank_n),
            "p_primary_equal": report.p_primary_equal,
        }
        for k, f in enumerate(report.factors, start=1):
            body[f"factor.{k}"] = f.factor
            body[f"factor.{k}.ranks_m"] = f.ranks_m
            body[f"factor.{k}.ranks_n"] = f.ranks_n
            body[f"factor.{k}.a_m"] = f.multiplicities_m
            body[f"factor.{k}.a_n"] = f.multiplicities_n
        body["agree"] = report.agree
    _emit(body, fmt, _truth_outcome(report.agree))


# ── computations without a module ──

@app.command()
def counterexample(
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    i_values: str = typer.Option(
        ",".join(map(str, DEFAULT_I_VALUES)), "--i", help="Exponents i for the ideals W1 - p^(i+1)."
    ),
    fmt: ReportFormat = _format_option(),
):
    """
    Two-variable modules with different characteristic ideals whose specializations agree.
    """
    with _handled():
        report = counterexample_suite(p=prime, prec=prec, deg=deg, i_values=_int_list(i_values, "--i"))
        body: Dict[str, Any] = {
            "p": report.p,
            "prec": report.prec,
            "deg": report.deg,
            "char_m": report.char_m,
            "char_n": report.char_n,
            "char_m_expected": report.char_m_expected,
            "char_n_expected": report.char_n_expected,
            "global_equal": report.global_equal,
            "fg_over_subring": report.fg_over_subring,
        }
        for row in report.rows:
            key = f"l_{row.i}"
            body[f"{key}.ideal"] = row.ideal
            body[f"{key}.specialized_m"] = row.specialized_m
            body[f"{key}.specialized_n"] = row.specialized_n
            body[f"{key}.equal_to_p_squared"] = row.equal_to_p_squared
            body[f"{key}.degenerate"] = row.degenerate
        for row in report.naive_rows:
            key = f"naive_{row.i}"
            body[f"{key}.ideal"] = row.ideal
            body[f"{key}.specialized"] = row.specialized
            body[f"{key}.equals_p"] = row.equals_p
            body[f"{key}.equals_p_power"] = row.equals_p_power
        body["passed"] = report.passed
    _emit(body, fmt, Outcome.OK if report.passed else Outcome.REFUTED)


@app.command()
def reconstruct(
    ranks: Optional[str] = typer.Option(None, "--ranks", help="Corank sequence r_1,...,r_theta."),
    module_rank: int = typer.Option(0, "--rank", min=0, help="Rank of the module."),
    deg_f: int = typer.Option(1, "--deg", min=1, help="Degree of the prime f."),
    module: Optional[Path] = typer.Option(None, "--module", help="Derive the corank sequence from this module."),
    factor: Optional[str] = typer.Option(None, "--factor", help="Prime f, with --module."),
    theta: int = typer.Option(3, "--theta", min=1, help="Sequence length, with --module."),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    f-primary multiplicities a_1..a_theta from a corank sequence.
    """
    if (ranks is None) == (module is None):
        raise typer.BadParameter("give exactly one of --ranks or --module", param_hint="--ranks/--module")
    outcome = Outcome.OK
    with _handled():
        if ranks is not None:
            sequence = _int_list(ranks, "--ranks")
            problem = ReconstructionProblem(
                theta=len(sequence), ranks=sequence, module_rank=module_rank, deg_f=deg_f
            )
            a = reconstruct_multiplicities(problem)
            body: Dict[str, Any] = {"theta": problem.theta, "rank": module_rank, "deg": deg_f, "a": a}
            body["corank_check"] = corank_sequence(module_rank, a, deg_f) == sequence
        else:
            if factor is None:
                raise typer.BadParameter("--module needs --factor", param_hint="--factor")
            M = _load(module, prime, prec, None)
            f = parse_series(factor, M.ctx, source="--factor")
            sequence = hom_rank_sequence(M, f, theta)
            r = rank(M)
            problem = ReconstructionProblem(
                theta=theta, ranks=sequence, module_rank=r, deg_f=weierstrass_prepare(f, 0).lam
            )
            a = reconstruct_multiplicities(problem)
            direct = f_primary_multiplicities(M, f, theta)
            body = _header(M)
            body.update({"factor": f, "theta": theta, "rank": r, "ranks": sequence, "a": a})
            body["cross_check"] = a == direct
            if a != direct:
                outcome = Outcome.REFUTED
    _emit(body, fmt, outcome)


@app.command("oracle-probe")
def oracle_probe(
    path: Path = _module_argument(),
    levels: str = typer.Option("4,8", "--levels", help="Values taken by both n and d."),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    Brute-force log_p |M/(p^n, deg >= d)| on a grid, against the closed form where one exists.
    """
    grid = _int_list(levels, "--levels")
    outcome = Outcome.OK
    with _handled():
        M = _load(path, prime, prec, deg)
        body = _header(M)
        for n in grid:
            for d in grid:
                key = f"log_order.{n}.{d}"
                brute = finite_quotient(M, n, d).log_order
                body[key] = brute
                try:
                    expected = symbolic_log_order(M, n, d)
                except UnsupportedShapeError:
                    body[f"{key}.symbolic"] = "unsupported"
                    continue
                body[f"{key}.symbolic"] = expected
                if expected != brute:
                    outcome = Outcome.REFUTED
                    logger.error("%s at (%d, %d): brute force %d, closed form %d", M.label, n, d, brute, expected)
        base = min(grid)
        if base < M.ctx.prec and base < M.ctx.deg - 1:
            level = (base, min(2 * base, M.ctx.deg - 1))
            estimate = oracle_rank_probe(M, levels=(level,))[0]
            body["oracle.level"] = level
            body["oracle.rank"] = estimate.rank
            if estimate.mu is not None:
                body["oracle.mu"] = estimate.mu
                body["oracle.lambda"] = estimate.lam
    _emit(body, fmt, outcome)


@app.command()
def suite(
    names: Optional[List[str]] = typer.Argument(None, help=f"Suites to run (default: all of {', '.join(SUITES)})."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed shared by the suites."),
    samples: Optional[int] = typer.Option(None, "--samples", min=1, help="Cases per randomized suite."),
    prime: Optional[int] = _prime_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    Randomized property suites; any counterexample refutes.
    """
    with _handled():
        results = run_suites(names, seed=seed, count=samples, p=prime)
        body: Dict[str, Any] = {"seed": results[0].seed if results else settings.SEED}
        for r in results:
            body[f"{r.name}.cases"] = r.cases
            body[f"{r.name}.failures"] = r.failures
            body[f"{r.name}.indeterminate"] = r.indeterminate
            if r.first_failure is not None:
                body[f"{r.name}.first_failure"] = r.first_failure
        body["passed"] = all(r.passed for r in results)
    if not body["passed"]:
        outcome = Outcome.REFUTED
    elif any(r.cases and not r.decided for r in results):
        outcome = Outcome.INDETERMINATE
    else:
        outcome = Outcome.OK
    _emit(body, fmt, outcome)


@app.command()
def series(
    op: SeriesOp = typer.Argument(..., help="Ring operation."),
    first: str = typer.Argument(..., help="Series literal."),
    second: Optional[str] = typer.Argument(None, help="Second literal (divisor, linear element, operand)."),
    variables: int = typer.Option(1, "--vars", min=0, help="Number of variables m."),
    var: int = typer.Option(-1, "--var", help="Distinguished variable."),
    prime: Optional[int] = _prime_option(),
    prec: Optional[int] = _prec_option(),
    deg: Optional[int] = _deg_option(),
    fmt: ReportFormat = _format_option(),
):
    """
    Ring-level operations on series literals.
    """
    binary = {SeriesOp.divide, SeriesOp.gcd, SeriesOp.unit_equal, SeriesOp.eliminate,
              SeriesOp.add, SeriesOp.sub, SeriesOp.mul}
    if op in binary and second is None:
        raise typer.BadParameter(f"'{op.value}' needs two literals", param_hint="SECOND")
    outcome = Outcome.OK
    with _handled():
        ctx = RingContext(
            p=settings.PRIME if prime is None else prime,
            m=variables,
            prec=settings.PREC if prec is None else prec,
            deg=settings.DEG if deg is None else deg,
        )
        f = parse_series(first, ctx, source="FIRST")
        g = parse_series(second, ctx, source="SECOND") if second is not None else None
        body: Dict[str, Any] = {"ring": ctx.describe(), "op": op, "f": f}
        if g is not None:
            body["g"] = g
        if op is SeriesOp.prepare:
            data = weierstrass_prepare(f, var)
            body.update({"mu": data.mu, "lambda": data.lam, "distinguished": data.distinguished, "unit": data.unit})
        elif op is SeriesOp.divide:
            q, r = weierstrass_divide(f, g, var)
            body.update({"quotient": q, "remainder": r})
        elif op is SeriesOp.gcd:
            body["gcd"] = gcd_one_var(f, g)
        elif op is SeriesOp.unit_equal:
            verdict = unit_equal(f, g)
            body["unit_equal"] = verdict
            outcome = _truth_outcome(verdict)
        elif op is SeriesOp.involute:
            body["involution"] = involution(f, var)
            body["associate"] = involute_associate(f, var)
        elif op is SeriesOp.normalize:
            body["normalized"] = normalize_one_var(f)
        elif op is SeriesOp.eliminate:
            body["image"] = eliminate_variable(f, linear_from_series(g))
        elif op is SeriesOp.add:
            body["result"] = f + g
        elif op is SeriesOp.sub:
            body["result"] = f - g
        else:
            body["result"] = f * g
    _emit(body, fmt, outcome)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Runs one command and returns its exit code: 0 ok, 1 refuted,
    2 indeterminate, 3 usage error.
    """
    command = typer.main.get_command(app)
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        result = command.main(args=args, prog_name="iwalg", standalone_mode=False)
    except CLICK_ERRORS as e:
        err_console.print(Panel(e.format_message(), title="usage error", border_style="red"))
        return 3
    except typer.Abort:
        return 3
    return result if isinstance(result, int) else 0


def main() -> None:
    configure_logging()
    sys.exit(run())
