"""
Module description files.

    # comment
    ring p=3 vars=2 prec=20 deg=16
    standard: cyclic (W1-p); cyclic (W1-p); free 0
    null rows=2 cols=1; [p; W1]

    ring p=3 vars=1
    presentation: rows=2 cols=2; [p, W; 0, W]

Grammar: 1_NORMATIVE_SPECIFICATION/grammar/module_file.ebnf
"""
from __future__ import annotations

import re
from bisect import bisect_right
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import ValidationError

from ..core.context import RingContext
from ..core.errors import ParseError
from ..core.literal import parse_series
from ..core.series import PowerSeries
from ..system.config import settings
from .module import IwasawaModule, Presentation

_KEYVAL = re.compile(r"([A-Za-z_]+)\s*=\s*([^\s]+)")


class _Source:
    """Text with comments blanked out and index -> (line, column) lookup."""

    def __init__(self, text: str, name: Optional[str]):
        self.name = name
        self.text = re.sub(r"#[^\n]*", lambda m: " " * len(m.group(0)), text)
        self.line_starts = [0] + [i + 1 for i, ch in enumerate(self.text) if ch == "\n"]

    def position(self, index: int) -> Tuple[int, int]:
        line = bisect_right(self.line_starts, index)
        return line, index - self.line_starts[line - 1] + 1

    def error(self, message: str, index: int) -> ParseError:
        line, col = self.position(index)
        return ParseError(message, line, col, self.name)

    def split(self, start: int, end: int, separators: str) -> List[Tuple[int, int]]:
        """Top-level pieces of text[start:end], trimmed, as index ranges."""
        pieces: List[Tuple[int, int]] = []
        depth = 0
        begin = start
        for i in range(start, end):
            ch = self.text[i]
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth -= 1
                if depth < 0:
                    raise self.error(f"unbalanced '{ch}'", i)
            elif depth == 0 and ch in separators:
                pieces.append((begin, i))
                begin = i + 1
        if depth:
            raise self.error("unclosed bracket", end - 1)
        pieces.append((begin, end))
        return [self.trim(a, b) for a, b in pieces if self.text[a:b].strip()]

    def trim(self, a: int, b: int) -> Tuple[int, int]:
        while a < b and self.text[a].isspace():
            a += 1
        while b > a and self.text[b - 1].isspace():
            b -= 1
        return a, b

    def chunk(self, span: Tuple[int, int]) -> str:
        return self.text[span[0]:span[1]]


def _header(src: _Source, span: Tuple[int, int], overrides: Dict[str, Optional[int]]) -> RingContext:
    body = src.chunk(span)
    values: Dict[str, int] = {}
    rest = body[len("ring"):]
    for match in _KEYVAL.finditer(rest):
        key, raw = match.group(1), match.group(2)
        index = span[0] + len("ring") + match.start()
        if key not in ("p", "vars", "prec", "deg"):
            raise src.error(f"unknown ring parameter '{key}'", index)
        try:
            values[key] = int(raw)
        except ValueError:
            raise src.error(f"ring parameter '{key}' must be an integer, got '{raw}'", index + len(key) + 1) from None
    if "vars" not in values:
        raise src.error("ring header needs vars=<m>", span[0])
    p = overrides.get("p") or values.get("p", settings.PRIME)
    prec = overrides.get("prec") or values.get("prec", settings.PREC)
    deg = overrides.get("deg") or values.get("deg", settings.DEG)
    try:
        return RingContext(p=p, m=values["vars"], prec=prec, deg=deg)
    except ValidationError as e:
        message = "; ".join(err["msg"] for err in e.errors())
        raise src.error(f"invalid ring: {message}", span[0]) from None


def _dimensions(src: _Source, span: Tuple[int, int], keyword: str) -> Tuple[int, int]:
    body = src.chunk(span)[len(keyword):]
    found = {m.group(1): m.group(2) for m in _KEYVAL.finditer(body)}
    try:
        return int(found["rows"]), int(found["cols"])
    except (KeyError, ValueError):
        raise src.error(f"'{keyword}' needs rows=<a> cols=<b>", span[0]) from None


def _matrix(src: _Source, span: Tuple[int, int], ctx: RingContext, n_rows: int, n_cols: int) -> Presentation:
    a, b = span
    if src.text[a] != "[" or src.text[b - 1] != "]":
        raise src.error("expected a matrix in brackets", a)
    rows = []
    for row_span in src.split(a + 1, b - 1, ";"):
        entries = []
        for entry_span in src.split(row_span[0], row_span[1], ","):
            line, col = src.position(entry_span[0])
            entries.append(parse_series(src.chunk(entry_span), ctx, src.name, line, col))
        if len(entries) != n_cols:
            raise src.error(f"expected {n_cols} entries in this row, found {len(entries)}", row_span[0])
        rows.append(tuple(entries))
    if len(rows) != n_rows:
        raise src.error(f"expected {n_rows} rows, found {len(rows)}", a)
    return Presentation(ctx, tuple(rows), n_cols)


def parse_module(
    text: str,
    source: Optional[str] = None,
    label: str = "M",
    prime: Optional[int] = None,
    prec: Optional[int] = None,
    deg: Optional[int] = None,
) -> IwasawaModule:
    """
    Parses a module description.

    Flags passed here override the header's p, prec and deg.

    Raises:
        ParseError: With line and column of the offending item.
    """
    src = _Source(text, source)
    items = src.split(0, len(src.text), ";\n")
    if not items:
        raise ParseError("empty module description", 1, 1, source)

    first = items[0]
    if not src.chunk(first).startswith("ring"):
        raise src.error("module description must start with a 'ring' header", first[0])
    ctx = _header(src, first, {"p": prime, "prec": prec, "deg": deg})

    # a section keyword may share its item with the first entry: "standard: cyclic (W)"
    expanded: List[Tuple[int, int]] = []
    for a, b in items[1:]:
        chunk = src.text[a:b]
        head = re.match(r"(standard|presentation)\s*:", chunk)
        if head:
            expanded.append((a, a + head.end()))
            rest = src.trim(a + head.end(), b)
            if rest[0] < rest[1]:
                expanded.append(rest)
        else:
            expanded.append((a, b))
    if not expanded:
        raise src.error("expected 'standard:' or 'presentation:' after the header", len(src.text) - 1)

    kind_span = expanded[0]
    kind = src.chunk(kind_span).rstrip(":").strip()
    body = expanded[1:]

    if kind == "presentation":
        if len(body) != 2:
            raise src.error("presentation needs 'rows=<a> cols=<b>' followed by one matrix", kind_span[0])
        n_rows, n_cols = _dimensions(src, body[0], "")
        return IwasawaModule(_matrix(src, body[1], ctx, n_rows, n_cols), label)

    if kind != "standard":
        raise src.error(f"unknown section '{kind}'", kind_span[0])

    cyclics: List[PowerSeries] = []
    free = 0
    null: Optional[Presentation] = None
    i = 0
    while i < len(body):
        span = body[i]
        chunk = src.chunk(span)
        if chunk.startswith("cyclic"):
            start = src.trim(span[0] + len("cyclic"), span[1])
            line, col = src.position(start[0])
            cyclics.append(parse_series(src.chunk(start), ctx, source, line, col))
        elif chunk.startswith("free"):
            raw = chunk[len("free"):].strip()
            if not raw.isdigit():
                raise src.error(f"free rank must be a nonnegative integer, got '{raw}'", span[0])
            free += int(raw)
        elif chunk.startswith("null"):
            if null is not None:
                raise src.error("only one 'null' block is allowed", span[0])
            if i + 1 >= len(body):
                raise src.error("'null' needs a matrix after its dimensions", span[0])
            n_rows, n_cols = _dimensions(src, span, "null")
            null = _matrix(src, body[i + 1], ctx, n_rows, n_cols)
            i += 1
        else:
            raise src.error(f"unknown item '{chunk.split()[0] if chunk.split() else chunk}'", span[0])
        i += 1

    for g, span in zip(cyclics, [s for s in body if src.chunk(s).startswith("cyclic")]):
        if g.is_zero:
            raise src.error("cyclic generators must be nonzero", span[0])
    try:
        return IwasawaModule.standard(ctx, cyclics, free, null, label=label)
    except ValueError as e:
        raise ParseError(str(e), 1, 1, source) from None


def load_module(path, prime: Optional[int] = None, prec: Optional[int] = None, deg: Optional[int] = None) -> IwasawaModule:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read module file: {e.strerror}", 1, 1, str(path)) from None
    return parse_module(text, source=str(path), label=path.stem, prime=prime, prec=prec, deg=deg)
