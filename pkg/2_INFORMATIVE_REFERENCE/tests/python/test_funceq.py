import itertools
import json
import os
import sys
import unittest

import pytest
from pydantic import ValidationError

current_dir = os.path.dirname(os.path.abspath(__file__))
tests_root = os.path.dirname(current_dir)
src_path = os.path.join(os.path.dirname(tests_root), "src")
if src_path not in sys.path:
    sys.path.insert(0, src_path)

from iwalg.core.context import RingContext
from iwalg.core.errors import InconsistentCorankError, NotTorsionError, UnsupportedShapeError
from iwalg.core.linear import linear_ideal_equal, make_linear_element
from iwalg.core.literal import parse_series
from iwalg.core.models import Conclusion, ReconstructionProblem, SpecializationStatus, Truth, Verdict
from iwalg.funceq.corank import (
    corank_sequence,
    f_primary_multiplicities,
    hom_rank_sequence,
    reconstruct_multiplicities,
    structure_compare,
)
from iwalg.funceq.counterexample import counterexample_suite
from iwalg.funceq.lclass import in_L_class, l_class_sufficient, sample_linear_ideals
from iwalg.funceq.specialization import funceq_verdict, verify_char_equality_by_specialization
from iwalg.modules.module import IwasawaModule
from iwalg.modules.parser import load_module
from iwalg.modules.specialize import involute_module
from iwalg.system.config import settings

FIXTURE_PATH = os.path.join(tests_root, "fixtures", "corank_sequences.json")

ONE_VAR = RingContext(p=3, m=1)
TWO_VARS = RingContext(p=3, m=2)


def load_sequences():
    with open(FIXTURE_PATH) as f:
        return json.load(f)


@pytest.mark.parametrize("case", load_sequences(), ids=lambda c: c["id"])
def test_reconstruction(case):
    """Corank sequences invert to the f-primary multiplicities or are reported inconsistent."""
    prob = ReconstructionProblem(
        theta=len(case["ranks"]), ranks=case["ranks"], module_rank=case["rank"], deg_f=case["deg"]
    )
    if case["expected_result"] == "SOLVE":
        a = reconstruct_multiplicities(prob)
        assert a == case["a"]
        assert corank_sequence(case["rank"], a, case["deg"]) == case["ranks"]
    elif case["expected_result"] == "INCONSISTENT":
        with pytest.raises(InconsistentCorankError):
            reconstruct_multiplicities(prob)


def golden(name):
    return load_module(os.path.join(settings.GOLDEN_DIR, name))


def S(text, ctx=ONE_VAR):
    return parse_series(text, ctx)


class TestCorank(unittest.TestCase):

    # ── 1. Problem validation ──

    def test_01_rejects_malformed_sequences(self):
        with self.assertRaises(ValidationError):
            ReconstructionProblem(theta=2, ranks=[3, 2])
        with self.assertRaises(ValidationError):
            ReconstructionProblem(theta=3, ranks=[1, 2])
        with self.assertRaises(ValidationError):
            ReconstructionProblem(theta=1, ranks=[-1])

    # ── 2. Module side ──

    def test_02_hom_ranks_from_invariant_factors(self):
        f = S("W - p")
        M = IwasawaModule.standard(ONE_VAR, [S("(W - p)^2"), S("W - p")])
        self.assertEqual(hom_rank_sequence(M, f, 2), [2, 3])
        self.assertEqual(f_primary_multiplicities(M, f, 2), [1, 1])
        prob = ReconstructionProblem(theta=2, ranks=[2, 3])
        self.assertEqual(reconstruct_multiplicities(prob), [1, 1])

    def test_03_free_part_adds_degree(self):
        f = S("W^2 + p")
        M = IwasawaModule.standard(ONE_VAR, [S("W^2 + p")], free_rank=1)
        self.assertEqual(hom_rank_sequence(M, f, 2), [4, 6])

    def test_04_structure_compare(self):
        f = S("W - p")
        M = IwasawaModule.standard(ONE_VAR, [S("(W - p)^2"), S("W - p")])
        same = IwasawaModule.standard(ONE_VAR, [S("W - p"), S("(W - p)^2")])
        other = IwasawaModule.standard(ONE_VAR, [S("(W - p)^3")])
        self.assertIs(structure_compare(M, same, [f], 2).agree, Truth.TRUE)
        report = structure_compare(M, other, [f], 2)
        self.assertIs(report.agree, Truth.FALSE)
        self.assertEqual(report.factors[0].multiplicities_n, [0, 1])

    def test_05_p_primary_parts(self):
        two = IwasawaModule.standard(ONE_VAR, [S("p"), S("p")])
        one = IwasawaModule.standard(ONE_VAR, [S("p^2")])
        report = structure_compare(two, one, [], 1)
        self.assertIs(report.p_primary_equal, Truth.FALSE)

    def test_06_coranks_grow_and_flatten(self):
        for theta in range(1, 5):
            for a in itertools.product(range(4), repeat=theta):
                for module_rank, deg in itertools.product(range(3), (1, 2)):
                    ranks = [0] + corank_sequence(module_rank, a, deg)
                    steps = [b - c for c, b in zip(ranks, ranks[1:])]
                    case = (a, module_rank, deg)
                    self.assertTrue(all(s >= 0 for s in steps), case)
                    self.assertTrue(all(x >= y for x, y in zip(steps, steps[1:])), case)


class TestLClass(unittest.TestCase):

    def setUp(self):
        self.M = golden("null_block.mod")
        self.through = make_linear_element(TWO_VARS, [-3, 1, 0])
        self.across = make_linear_element(TWO_VARS, [-3, 0, 1])

    # ── 3. Membership and the sufficient criterion ──

    def test_01_membership(self):
        self.assertIs(in_L_class(self.M, self.across), Truth.TRUE)
        self.assertIs(in_L_class(self.M, self.through), Truth.FALSE)
        with self.assertRaises(NotTorsionError):
            in_L_class(IwasawaModule.free(TWO_VARS, 1), self.across)

    def test_02_sufficient_criterion(self):
        report = l_class_sufficient(self.M, self.across)
        self.assertTrue(report.hypotheses_hold)
        self.assertIs(report.membership, Truth.TRUE)
        self.assertFalse(report.violation)
        report = l_class_sufficient(self.M, self.through)
        self.assertFalse(report.hypotheses_hold)
        self.assertIsNone(report.membership)

    def test_03_criterion_is_sound_on_cyclic_sums(self):
        M = IwasawaModule.standard(TWO_VARS, [S("W1 - p", TWO_VARS), S("W2^2 + p*W1", TWO_VARS)])
        for coeffs in ([-3, 1, 1], [9, 2, 1], [0, 1, 4], [3, 1, 0]):
            report = l_class_sufficient(M, make_linear_element(TWO_VARS, coeffs))
            self.assertFalse(report.violation, coeffs)

    def test_04_needs_standard_form(self):
        P = IwasawaModule.presentation(TWO_VARS, [[S("W1 - p", TWO_VARS)]])
        with self.assertRaises(UnsupportedShapeError):
            l_class_sufficient(P, self.across)

    # ── 4. Sampling ──

    def test_05_sampling_is_deterministic(self):
        avoid = [S("W1 - p", TWO_VARS)]
        first = sample_linear_ideals(TWO_VARS, avoid, count=5, seed=11)
        second = sample_linear_ideals(TWO_VARS, avoid, count=5, seed=11)
        self.assertEqual([l.coeffs for l in first], [l.coeffs for l in second])
        for i, l in enumerate(first):
            self.assertEqual(l.coeffs[2], 0)
            self.assertFalse(linear_ideal_equal(l, make_linear_element(TWO_VARS, [-3, 1, 0])))
            for other in first[i + 1:]:
                self.assertFalse(linear_ideal_equal(l, other))

    def test_06_sampling_needs_two_variables(self):
        with self.assertRaises(UnsupportedShapeError):
            sample_linear_ideals(ONE_VAR, count=1)

    def test_07_sampled_coefficients_are_balanced(self):
        for l in sample_linear_ideals(TWO_VARS, count=5, seed=11):
            self.assertTrue(all(abs(a) < 81 for a in l.coeffs), l.coeffs)

    def test_08_membership_is_audited(self):
        with self.assertLogs("iwalg.audit", level="INFO") as logs:
            in_L_class(self.M, self.across)
        entries = [json.loads(record.getMessage()) for record in logs.records]
        membership = [entry for entry in entries if entry["operation"] == "in_L_class"]
        self.assertEqual(len(membership), 1)
        self.assertEqual(membership[0]["verdict"], "true")
        self.assertEqual(membership[0]["inputs"]["ideal"], str(self.across))


class TestSpecializationCriterion(unittest.TestCase):

    def ideals(self, *constants):
        return [make_linear_element(TWO_VARS, [c, 1, 0]) for c in constants]

    # ── 5. Verdicts ──

    def test_01_counterexample_violates_hypothesis(self):
        M, N = golden("counterexample_m.mod"), golden("counterexample_n.mod")
        report = verify_char_equality_by_specialization(M, N, self.ideals(-27, -81, -243))
        self.assertEqual(report.fg_over_subring, (Truth.FALSE, Truth.FALSE))
        self.assertIs(report.global_equal, Truth.FALSE)
        self.assertIs(report.status, SpecializationStatus.HYPOTHESIS_VIOLATED)
        self.assertIs(report.conclusion, Conclusion.CONSISTENT)
        self.assertTrue(all(c.specialized_equal is Truth.TRUE for c in report.checks))

    def test_02_confirmed(self):
        M = IwasawaModule.standard(TWO_VARS, [S("W2 - p", TWO_VARS), S("W2 - p^2", TWO_VARS)], label="M")
        N = IwasawaModule.standard(TWO_VARS, [S("(W2 - p) * (W2 - p^2)", TWO_VARS)], label="N")
        report = verify_char_equality_by_specialization(M, N, self.ideals(0, 3, -9))
        self.assertIs(report.status, SpecializationStatus.CONFIRMED)
        self.assertIs(report.conclusion, Conclusion.CONSISTENT)

    def test_03_separated(self):
        M = IwasawaModule.standard(TWO_VARS, [S("W2 - p", TWO_VARS)], label="M")
        N = IwasawaModule.standard(TWO_VARS, [S("W2 - p^2", TWO_VARS)], label="N")
        report = verify_char_equality_by_specialization(M, N, self.ideals(3))
        self.assertIs(report.status, SpecializationStatus.SEPARATED)
        self.assertIs(report.conclusion, Conclusion.REFUTED)

    # ── 6. Functional equation in one variable ──

    def test_04_module_against_its_twist(self):
        M = golden("linear_cyclics.mod")
        self.assertIs(funceq_verdict(M, involute_module(M)), Verdict.PSEUDO_ISOMORPHIC)
        self.assertIs(funceq_verdict(M, M), Verdict.DIFFERENT)
        free = golden("free3.mod")
        self.assertIs(funceq_verdict(free, free), Verdict.PSEUDO_ISOMORPHIC)
        self.assertIs(funceq_verdict(M, free), Verdict.DIFFERENT)

    def test_05_funceq_needs_one_variable(self):
        M = golden("counterexample_m.mod")
        with self.assertRaises(UnsupportedShapeError):
            funceq_verdict(M, M)

    def test_06_verdict_is_symmetric(self):
        M = golden("linear_cyclics.mod")
        pairs = [
            (M, involute_module(M)),
            (M, M),
            (M, golden("free3.mod")),
            (golden("p_primary.mod"), golden("p_primary.mod")),
            (M.direct_sum(golden("free3.mod")), involute_module(M).direct_sum(golden("free3.mod"))),
        ]
        for left, right in pairs:
            self.assertIs(funceq_verdict(left, right), funceq_verdict(right, left), (left.label, right.label))


class TestCounterexample(unittest.TestCase):

    # ── 7. Golden counterexample ──

    def test_01_default_prime(self):
        report = counterexample_suite(p=3)
        self.assertTrue(report.passed)
        self.assertIs(report.global_equal, Truth.FALSE)
        self.assertEqual(report.fg_over_subring, (Truth.FALSE, Truth.FALSE))
        asserted = [r for r in report.rows if not r.degenerate]
        self.assertEqual([r.i for r in asserted], [2, 3, 4, 5, 6])
        self.assertTrue(all(r.equal_to_p_squared is Truth.TRUE for r in asserted))
        self.assertEqual([r.i for r in report.rows if r.degenerate], [1])
        for row in report.naive_rows:
            self.assertIs(row.equals_p, Truth.TRUE)
            self.assertIs(row.equals_p_power, Truth.FALSE)

    def test_02_other_prime_and_truncation(self):
        report = counterexample_suite(p=5, prec=12, deg=8, i_values=(2, 3))
        self.assertTrue(report.passed)
        self.assertEqual((report.p, report.prec, report.deg), (5, 12, 8))


if __name__ == "__main__":
    unittest.main()
