from __future__ import annotations

from enum import Enum
from typing import Iterable, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .series import PowerSeries


class Truth(str, Enum):
    """Tri-valued decision: indeterminate is never collapsed into false."""
    TRUE = "true"
    FALSE = "false"
    INDETERMINATE = "indeterminate"

    @classmethod
    def of(cls, value: bool) -> "Truth":
        return cls.TRUE if value else cls.FALSE

    def __bool__(self) -> bool:
        return self is Truth.TRUE

    def negate(self) -> "Truth":
        if self is Truth.INDETERMINATE:
            return self
        return Truth.FALSE if self is Truth.TRUE else Truth.TRUE


def truth_all(values: Iterable[Truth]) -> Truth:
    """Kleene conjunction."""
    seen_unknown = False
    for v in values:
        if v is Truth.FALSE:
            return Truth.FALSE
        if v is Truth.INDETERMINATE:
            seen_unknown = True
    return Truth.INDETERMINATE if seen_unknown else Truth.TRUE


def truth_any(values: Iterable[Truth]) -> Truth:
    """Kleene disjunction."""
    seen_unknown = False
    for v in values:
        if v is Truth.TRUE:
            return Truth.TRUE
        if v is Truth.INDETERMINATE:
            seen_unknown = True
    return Truth.INDETERMINATE if seen_unknown else Truth.FALSE


class Verdict(str, Enum):
    PSEUDO_ISOMORPHIC = "pseudo_isomorphic"
    CHAR_EQUAL_ONLY = "char_equal_only"
    DIFFERENT = "different"
    INDETERMINATE = "indeterminate"


class Conclusion(str, Enum):
    CONSISTENT = "consistent"
    REFUTED = "refuted"
    INDETERMINATE = "indeterminate"


class SpecializationStatus(str, Enum):
    CONFIRMED = "confirmed"                  # hypotheses hold and global equality holds
    HYPOTHESIS_VIOLATED = "hypothesis_violated"
    SEPARATED = "separated"                  # some specialization already differs
    CONTRADICTION = "contradiction"          # every hypothesis holds, global ideals differ
    INDETERMINATE = "indeterminate"


class Outcome(str, Enum):
    OK = "ok"
    REFUTED = "refuted"
    INDETERMINATE = "indeterminate"

    @property
    def exit_code(self) -> int:
        return {Outcome.OK: 0, Outcome.REFUTED: 1, Outcome.INDETERMINATE: 2}[self]


class StructureData(BaseModel):
    """rank, μ, λ, a characteristic generator (up to unit) and best-effort elementary divisors."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True, populate_by_name=True)

    rank: int = Field(..., ge=0)
    mu: int = Field(..., ge=0)
    lam: int = Field(..., ge=0, alias="lambda")
    char_gen: PowerSeries
    elementary_divisors: Optional[List[PowerSeries]] = None
    complete: bool = False

    @model_validator(mode="after")
    def check_completeness(self) -> "StructureData":
        if self.complete and self.elementary_divisors is None:
            raise ValueError("a complete structure must list its elementary divisors")
        return self


class PseudoNullVerdict(BaseModel):
    value: Truth
    method: Literal["exact", "sampled"]
    samples: int = 0


class RankFormulaReport(BaseModel):
    ideal: str
    rank: int
    quotient_rank: int
    torsion_sub_rank: int

    @property
    def holds(self) -> bool:
        return self.rank == self.quotient_rank - self.torsion_sub_rank


class TorTransferReport(BaseModel):
    ideal: str
    precondition: bool = Field(..., description="M/l is torsion over R/(l)")
    module_torsion: Optional[bool] = None
    torsion_sub_torsion: Optional[bool] = None
    higher_tor_vanish: bool = True

    @property
    def holds(self) -> bool:
        return bool(self.precondition and self.module_torsion and self.torsion_sub_torsion)


class LClassSufficiency(BaseModel):
    ideal: str
    null_part_pseudo_null: Truth
    quotient_torsion: Truth
    membership: Optional[Truth] = None
    extended: bool = False

    @property
    def hypotheses_hold(self) -> bool:
        return self.null_part_pseudo_null is Truth.TRUE and self.quotient_torsion is Truth.TRUE

    @property
    def violation(self) -> bool:
        """Hypotheses hold yet membership provably fails."""
        return self.hypotheses_hold and self.membership is Truth.FALSE


class IdealCheck(BaseModel):
    ideal: str
    in_class_m: Truth
    in_class_n: Truth
    specialized_m: str
    specialized_n: str
    specialized_equal: Truth


class SpecializationReport(BaseModel):
    modules: Tuple[str, str]
    checks: List[IdealCheck] = Field(default_factory=list)
    torsion: Tuple[Truth, Truth]
    fg_over_subring: Tuple[Truth, Truth]
    global_equal: Truth
    conclusion: Conclusion
    status: SpecializationStatus
    extended: bool = False
    note: str = (
        "finitely many specializations were sampled; agreement is consistency evidence, "
        "not a proof of equality"
    )

    @model_validator(mode="after")
    def check_conclusion(self) -> "SpecializationReport":
        if self.conclusion is Conclusion.REFUTED:
            disagree = any(c.specialized_equal is Truth.FALSE for c in self.checks)
            if not disagree and self.status is not SpecializationStatus.CONTRADICTION:
                raise ValueError("refuted requires a provable disagreement")
        if self.conclusion is Conclusion.CONSISTENT:
            if not all(c.specialized_equal is Truth.TRUE for c in self.checks):
                raise ValueError("consistent requires every sampled ideal to pass")
        return self


class ReconstructionProblem(BaseModel):
    """Corank data r_1..r_theta of Hom(M, O[[W]]/f^n) for one irreducible distinguished f."""
    theta: int = Field(..., ge=1)
    ranks: List[int]
    module_rank: int = Field(0, ge=0)
    deg_f: int = Field(1, ge=1)

    @field_validator("ranks")
    @classmethod
    def validate_ranks(cls, v: List[int]) -> List[int]:
        if any(r < 0 for r in v):
            raise ValueError("corank values must be nonnegative")
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("corank sequence must be nondecreasing")
        return v

    @model_validator(mode="after")
    def check_length(self) -> "ReconstructionProblem":
        if len(self.ranks) != self.theta:
            raise ValueError(f"expected {self.theta} ranks, got {len(self.ranks)}")
        return self


class FactorComparison(BaseModel):
    factor: str
    ranks_m: List[int]
    ranks_n: List[int]
    multiplicities_m: List[int]
    multiplicities_n: List[int]

    @property
    def agree(self) -> bool:
        return self.ranks_m == self.ranks_n


class StructureCompareReport(BaseModel):
    rank_m: int
    rank_n: int
    p_primary_equal: Truth
    factors: List[FactorComparison] = Field(default_factory=list)

    @property
    def agree(self) -> Truth:
        if self.rank_m != self.rank_n or any(not f.agree for f in self.factors):
            return Truth.FALSE
        return self.p_primary_equal


class CounterexampleRow(BaseModel):
    i: int
    ideal: str
    specialized_m: str
    specialized_n: str
    quotient_torsion: Truth
    equal_to_p_squared: Truth
    degenerate: bool = False


class NaiveValuationRow(BaseModel):
    i: int
    ideal: str
    specialized: str
    equals_p: Truth
    equals_p_power: Truth


class CounterexampleReport(BaseModel):
    p: int
    prec: int
    deg: int
    char_m: str
    char_n: str
    char_m_expected: Truth
    char_n_expected: Truth
    global_equal: Truth
    fg_over_subring: Tuple[Truth, Truth]
    rows: List[CounterexampleRow] = Field(default_factory=list)
    naive_rows: List[NaiveValuationRow] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        part1 = (
            self.char_m_expected is Truth.TRUE
            and self.char_n_expected is Truth.TRUE
            and self.global_equal is Truth.FALSE
            and all(r.equal_to_p_squared is Truth.TRUE for r in self.rows if not r.degenerate)
        )
        part2 = all(
            r.equals_p is Truth.TRUE and r.equals_p_power is Truth.FALSE for r in self.naive_rows
        )
        return part1 and part2


class SuiteResult(BaseModel):
    """Counts from one randomized property suite; indeterminate cases are never failures."""
    name: str
    seed: int
    cases: int = 0
    failures: int = 0
    indeterminate: int = 0
    first_failure: Optional[str] = None

    @property
    def decided(self) -> int:
        return self.cases - self.indeterminate

    @property
    def passed(self) -> bool:
        return self.failures == 0
