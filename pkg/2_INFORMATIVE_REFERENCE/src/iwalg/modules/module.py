from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

from ..core.context import RingContext, require_same_context
from ..core.errors import ContextMismatchError
from ..core.series import PowerSeries

logger = logging.getLogger("iwalg.iwmod")


@dataclass(frozen=True)
class Presentation:
    """
    Cokernel of an a×b matrix over the ring: a relation rows over b generators.
    """
    ctx: RingContext
    rows: Tuple[Tuple[PowerSeries, ...], ...]
    cols: int

    def __post_init__(self):
        for row in self.rows:
            if len(row) != self.cols:
                raise ValueError(f"relation row of length {len(row)} in a presentation with {self.cols} generators")
            for entry in row:
                if entry.ctx != self.ctx:
                    raise ContextMismatchError("presentation entries must share one context")

    @classmethod
    def from_rows(cls, ctx: RingContext, rows: Sequence[Sequence[PowerSeries]], cols: Optional[int] = None) -> "Presentation":
        rows = tuple(tuple(r) for r in rows)
        if cols is None:
            if not rows:
                raise ValueError("an empty presentation needs an explicit generator count")
            cols = len(rows[0])
        return cls(ctx, rows, cols)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def map_entries(self, fn: Callable[[PowerSeries], PowerSeries], ctx: Optional[RingContext] = None) -> "Presentation":
        return Presentation(ctx or self.ctx, tuple(tuple(fn(x) for x in row) for row in self.rows), self.cols)

    def __str__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in row) for row in self.rows)
        return f"rows={self.n_rows} cols={self.cols} [{body}]"


def block_diagonal(ctx: RingContext, blocks: Sequence[Presentation]) -> Presentation:
    cols = sum(b.cols for b in blocks)
    zero = PowerSeries.zero(ctx)
    rows = []
    offset = 0
    for block in blocks:
        require_same_context(ctx, block.ctx)
        for row in block.rows:
            rows.append((zero,) * offset + row + (zero,) * (cols - offset - block.cols))
        offset += block.cols
    return Presentation(ctx, tuple(rows), cols)


def diagonal(ctx: RingContext, entries: Sequence[PowerSeries]) -> Presentation:
    return block_diagonal(ctx, [Presentation(ctx, ((g,),), 1) for g in entries])


@dataclass(frozen=True)
class StandardForm:
    """⊕ R/(g_i) ⊕ R^r ⊕ (declared pseudo-null part) ⊕ (residual torsion part)."""
    ctx: RingContext
    cyclics: Tuple[PowerSeries, ...] = ()
    free_rank: int = 0
    pseudo_null_part: Optional[Presentation] = None
    residual_part: Optional[Presentation] = None

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("free rank must be nonnegative")
        for g in self.cyclics:
            require_same_context(self.ctx, g.ctx)
            if g.is_zero:
                raise ValueError("cyclic generators must be nonzero")
        for part in (self.pseudo_null_part, self.residual_part):
            if part is not None:
                require_same_context(self.ctx, part.ctx)

    def __str__(self) -> str:
        items = [f"cyclic ({g})" for g in self.cyclics]
        items.append(f"free {self.free_rank}")
        if self.pseudo_null_part is not None:
            items.append(f"null {self.pseudo_null_part}")
        if self.residual_part is not None:
            items.append(f"residual {self.residual_part}")
        return "standard: " + "; ".join(items)


Shape = Union[StandardForm, Presentation]


@dataclass(frozen=True)
class IwasawaModule:
    """A finitely generated module over Zp[[W1..Wm]], in standard form or as a presentation."""
    shape: Shape
    label: str = field(default="M", compare=False)

    @property
    def ctx(self) -> RingContext:
        return self.shape.ctx

    @property
    def is_standard(self) -> bool:
        return isinstance(self.shape, StandardForm)

    # ── builders ──

    @classmethod
    def standard(
        cls,
        ctx: RingContext,
        cyclics: Sequence[PowerSeries] = (),
        free_rank: int = 0,
        pseudo_null_part: Optional[Presentation] = None,
        label: str = "M",
        check: bool = True,
    ) -> "IwasawaModule":
        """
        Builds ⊕ R/(g_i) ⊕ R^r ⊕ M_null.

        With `check`, the declared pseudo-null part must not be provably
        non-pseudo-null; unit cyclics are dropped (R/(unit) = 0).
        """
        cyclics = tuple(g for g in cyclics if not g.is_unit)
        shape = StandardForm(ctx, cyclics, free_rank, pseudo_null_part)
        if check and pseudo_null_part is not None:
            from .invariants import pseudo_null_verdict
            from ..core.models import Truth

            verdict = pseudo_null_verdict(cls(StandardForm(ctx, (), 0, pseudo_null_part)))
            if verdict.value is Truth.FALSE:
                raise ValueError(f"declared pseudo-null part is not pseudo-null ({verdict.method} check)")
            if verdict.value is Truth.INDETERMINATE:
                logger.warning("pseudo-nullity of the declared part is indeterminate at this precision")
        return cls(shape, label)

    @classmethod
    def presentation(cls, ctx: RingContext, rows: Sequence[Sequence[PowerSeries]], cols: Optional[int] = None,
                     label: str = "M") -> "IwasawaModule":
        return cls(Presentation.from_rows(ctx, rows, cols), label)

    @classmethod
    def free(cls, ctx: RingContext, rank: int, label: str = "M") -> "IwasawaModule":
        return cls(StandardForm(ctx, (), rank), label)

    @classmethod
    def zero(cls, ctx: RingContext, label: str = "0") -> "IwasawaModule":
        return cls(StandardForm(ctx), label)

    def relabel(self, label: str) -> "IwasawaModule":
        return IwasawaModule(self.shape, label)

    def direct_sum(self, other: "IwasawaModule") -> "IwasawaModule":
        ctx = require_same_context(self.ctx, other.ctx)
        label = f"{self.label}+{other.label}"
        a, b = self.shape, other.shape
        if isinstance(a, StandardForm) and isinstance(b, StandardForm):
            def merge(x: Optional[Presentation], y: Optional[Presentation]) -> Optional[Presentation]:
                parts = [q for q in (x, y) if q is not None]
                return block_diagonal(ctx, parts) if parts else None

            return IwasawaModule(
                StandardForm(
                    ctx,
                    a.cyclics + b.cyclics,
                    a.free_rank + b.free_rank,
                    merge(a.pseudo_null_part, b.pseudo_null_part),
                    merge(a.residual_part, b.residual_part),
                ),
                label,
            )
        return IwasawaModule(block_diagonal(ctx, [self.to_presentation(), other.to_presentation()]), label)

    def to_presentation(self, torsion_only: bool = False) -> Presentation:
        """
        Presentation of the module; for standard forms the free summand is
        dropped when `torsion_only` is set.
        """
        shape = self.shape
        if isinstance(shape, Presentation):
            return shape
        ctx = shape.ctx
        blocks = [Presentation(ctx, ((g,),), 1) for g in shape.cyclics]
        if shape.free_rank and not torsion_only:
            blocks.append(Presentation(ctx, (), shape.free_rank))
        for part in (shape.pseudo_null_part, shape.residual_part):
            if part is not None:
                blocks.append(part)
        if not blocks:
            return Presentation(ctx, (), 0)
        return block_diagonal(ctx, blocks)

    def __str__(self) -> str:
        if isinstance(self.shape, Presentation):
            return f"presentation: {self.shape}"
        return str(self.shape)
