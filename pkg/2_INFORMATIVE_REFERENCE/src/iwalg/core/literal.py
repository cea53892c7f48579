"""
Series literals: integers, `p`, variables W1..Wm (W for the last one),
`+ - * ^` and parentheses. Grammar: 1_NORMATIVE_SPECIFICATION/grammar/series_literal.ebnf
"""
from __future__ import annotations

import ast
import operator
from typing import Dict, List, Optional, Tuple, Union

from simpleeval import InvalidExpression, SimpleEval

from .context import RingContext
from .errors import ParseError
from .series import PowerSeries

MAX_EXPONENT = 4096

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Pow)
_ALLOWED_UNARY = (ast.USub, ast.UAdd)

Value = Union[int, PowerSeries]


def _power(base: Value, exponent: Value) -> Value:
    if not isinstance(exponent, int) or exponent < 0:
        raise TypeError("exponents must be nonnegative integers")
    if exponent > MAX_EXPONENT:
        raise TypeError(f"exponent {exponent} exceeds {MAX_EXPONENT}")
    return base ** exponent


OPERATORS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Pow: _power,
    ast.USub: operator.neg,
    ast.UAdd: lambda x: x,
}


def _translate(text: str) -> Tuple[str, List[int]]:
    """Rewrite `^` as `**`; returns the new text and a column map back to the original."""
    out: List[str] = []
    columns: List[int] = []
    for i, ch in enumerate(text):
        if ch == "^":
            out.append("**")
            columns.extend([i, i])
        else:
            out.append(ch)
            columns.append(i)
    columns.append(len(text))
    return "".join(out), columns


def variable_names(ctx: RingContext) -> Dict[str, Value]:
    names: Dict[str, Value] = {"p": ctx.p}
    for i in range(ctx.m):
        names[ctx.variable_name(i)] = PowerSeries.variable(ctx, i)
    if ctx.m:
        names["W"] = names[ctx.variable_name(ctx.m - 1)]
    return names


def _check_tree(tree: ast.AST, names: Dict[str, Value]) -> Optional[Tuple[int, str]]:
    """First disallowed node as (0-based column, message), or None."""
    for node in ast.walk(tree):
        if isinstance(node, (ast.Expression, ast.Load)) or isinstance(node, _ALLOWED_BINOPS + _ALLOWED_UNARY):
            continue
        col = getattr(node, "col_offset", 0)
        if isinstance(node, ast.BinOp):
            if not isinstance(node.op, _ALLOWED_BINOPS):
                return col, f"operator '{type(node.op).__name__}' is not allowed"
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, _ALLOWED_UNARY):
                return col, f"operator '{type(node.op).__name__}' is not allowed"
        elif isinstance(node, ast.Constant):
            if type(node.value) is not int:
                return col, f"only integer constants are allowed, got {node.value!r}"
        elif isinstance(node, ast.Name):
            if node.id not in names:
                return col, f"unknown name '{node.id}'"
        else:
            return col, f"unsupported syntax '{type(node).__name__}'"
    return None


def parse_series(
    text: str,
    ctx: RingContext,
    source: Optional[str] = None,
    line: int = 1,
    column: int = 1,
) -> PowerSeries:
    """
    Evaluates a series literal in `ctx`.

    Args:
        text: The literal, e.g. "(W1 - p)^2".
        ctx: Ring context supplying p and the variables.
        source: File name used in error messages.
        line, column: Position of `text` inside its source, for error reporting.

    Raises:
        ParseError: With the line and column of the offending token.
    """
    leading = len(text) - len(text.lstrip())
    body = text.strip()
    if not body:
        raise ParseError("empty series literal", line, column, source)
    if "\n" in body or ";" in body:
        raise ParseError("a series literal must be a single expression", line, column + leading, source)

    translated, columns = _translate(body)

    def fail(col0: int, message: str) -> ParseError:
        col0 = max(0, min(col0, len(columns) - 1))
        return ParseError(message, line, column + leading + columns[col0], source)

    try:
        tree = ast.parse(translated, mode="eval")
    except SyntaxError as e:
        raise fail((e.offset or 1) - 1, f"syntax error: {e.msg}") from None

    names = variable_names(ctx)
    problem = _check_tree(tree, names)
    if problem:
        raise fail(*problem)

    evaluator = SimpleEval(operators=OPERATORS, functions={}, names=names)
    try:
        value = evaluator.eval(translated)
    except InvalidExpression as e:
        raise fail(0, str(e)) from None
    except (TypeError, ValueError) as e:
        raise fail(0, str(e)) from None

    if isinstance(value, bool) or not isinstance(value, (int, PowerSeries)):
        raise fail(0, f"literal does not evaluate to a series: {value!r}")
    if isinstance(value, int):
        return PowerSeries.constant(ctx, value)
    return value
