import json
import os
import sys
import unittest
from unittest import mock

current_dir = os.path.dirname(os.path.abspath(__file__))
tests_root = os.path.dirname(current_dir)
src_path = os.path.join(os.path.dirname(tests_root), "src")
if src_path not in sys.path:
    sys.path.insert(0, src_path)

from iwalg.core.context import RingContext
from iwalg.core.errors import NotTorsionError, ParseError, UnsupportedShapeError
from iwalg.core.linear import eliminate_variable, make_linear_element
from iwalg.core.literal import parse_series
from iwalg.core.models import StructureData, Truth, Verdict
from iwalg.modules import invariants
from iwalg.modules.invariants import (
    char_ideal,
    is_fg_over_subring,
    is_pseudo_null,
    is_torsion,
    mu_lambda,
    pseudo_compare,
    pseudo_null_verdict,
    rank,
    torsion_structure,
)
from iwalg.modules.module import IwasawaModule
from iwalg.modules.parser import load_module, parse_module
from iwalg.modules.specialize import (
    involute_module,
    quotient_by,
    rank_formula_check,
    tor_transfer_check,
    torsion_sub,
)
from iwalg.core.weierstrass import unit_equal
from iwalg.system.config import settings

ONE_VAR = RingContext(p=3, m=1)
TWO_VARS = RingContext(p=3, m=2)


def golden(name):
    return load_module(os.path.join(settings.GOLDEN_DIR, name))


def S(text, ctx=ONE_VAR):
    return parse_series(text, ctx)


class TestModuleFiles(unittest.TestCase):

    # ── 1. Parsing ──

    def test_01_golden_files_load(self):
        for name in ("free3.mod", "p_primary.mod", "linear_cyclics.mod", "presentation_pw.mod",
                     "counterexample_m.mod", "counterexample_n.mod", "null_block.mod"):
            M = golden(name)
            self.assertEqual(M.ctx.p, 3, name)
            self.assertEqual(M.label, name[:-len(".mod")])

    def test_02_error_position(self):
        with self.assertRaises(ParseError) as info:
            parse_module("ring p=3 vars=1\nstandard: cyclic (W + q)")
        self.assertEqual((info.exception.line, info.exception.column), (2, 23))

    def test_03_header_required(self):
        with self.assertRaises(ParseError):
            parse_module("standard: free 1")
        with self.assertRaises(ParseError):
            parse_module("ring p=3\nstandard: free 1")
        with self.assertRaises(ParseError):
            parse_module("ring p=4 vars=1\nstandard: free 1")

    def test_04_flags_override_header(self):
        M = load_module(os.path.join(settings.GOLDEN_DIR, "free3.mod"), prec=10, deg=8)
        self.assertEqual((M.ctx.prec, M.ctx.deg), (10, 8))

    def test_05_unit_cyclics_are_dropped(self):
        M = parse_module("ring p=3 vars=1\nstandard: cyclic (1 + W); cyclic (W - p)")
        self.assertEqual(len(M.shape.cyclics), 1)

    def test_06_declared_null_part_is_checked(self):
        with self.assertRaises(ParseError):
            parse_module("ring p=3 vars=1\nstandard: null rows=1 cols=1; [W - p]")

    def test_07_missing_file(self):
        with self.assertRaises(ParseError):
            load_module("/nonexistent/module.mod")


class TestInvariants(unittest.TestCase):

    # ── 2. Rank and characteristic ideal ──

    def test_01_free_rank(self):
        M = golden("free3.mod")
        self.assertEqual(rank(M), 3)
        self.assertFalse(is_torsion(M))
        with self.assertRaises(NotTorsionError):
            char_ideal(M)

    def test_02_presentation(self):
        M = golden("presentation_pw.mod")
        self.assertEqual(rank(M), 0)
        self.assertIs(unit_equal(char_ideal(M), S("p*W")), Truth.TRUE)
        self.assertEqual(mu_lambda(M), (1, 1))

    def test_03_null_part_does_not_change_char(self):
        M = golden("null_block.mod")
        self.assertEqual(rank(M), 0)
        self.assertTrue((char_ideal(M) - S("W1 - p", TWO_VARS)).is_zero)

    def test_04_mu_lambda_needs_one_variable(self):
        with self.assertRaises(UnsupportedShapeError):
            mu_lambda(golden("counterexample_n.mod"))

    # ── 3. One-variable structure ──

    def test_05_p_primary_structure(self):
        data = torsion_structure(golden("p_primary.mod"))
        self.assertEqual((data.rank, data.mu, data.lam), (1, 3, 0))
        self.assertTrue(data.complete)
        self.assertEqual(len(data.elementary_divisors), 2)
        expected = [S("p"), S("p^2")]
        for got, want in zip(data.elementary_divisors, expected):
            self.assertIs(unit_equal(got, want), Truth.TRUE)

    def test_06_coprime_cyclics_merge(self):
        data = torsion_structure(golden("linear_cyclics.mod"))
        self.assertEqual((data.rank, data.mu, data.lam), (0, 0, 2))
        self.assertEqual(len(data.elementary_divisors), 1)

    def test_07_pseudo_compare(self):
        M = golden("linear_cyclics.mod")
        N = IwasawaModule.standard(ONE_VAR, [S("(W - p) * (W - p^3)")])
        self.assertIs(pseudo_compare(M, N), Verdict.PSEUDO_ISOMORPHIC)
        two = IwasawaModule.standard(ONE_VAR, [S("p"), S("p")])
        one = IwasawaModule.standard(ONE_VAR, [S("p^2")])
        self.assertIs(pseudo_compare(two, one), Verdict.CHAR_EQUAL_ONLY)
        self.assertIs(pseudo_compare(M, IwasawaModule.free(ONE_VAR, 1)), Verdict.DIFFERENT)

    # ── 4. Pseudo-nullity ──

    def test_08_pseudo_null_one_variable(self):
        finite = IwasawaModule.presentation(ONE_VAR, [[S("p")], [S("W")]])
        self.assertIs(pseudo_null_verdict(finite).value, Truth.TRUE)
        cyclic = IwasawaModule.standard(ONE_VAR, [S("W - p")])
        self.assertIs(pseudo_null_verdict(cyclic).value, Truth.FALSE)

    def test_09_pseudo_null_by_sampling(self):
        null = IwasawaModule.presentation(TWO_VARS, [[S("p", TWO_VARS)], [S("W1", TWO_VARS)]])
        verdict = pseudo_null_verdict(null, samples=4, seed=7)
        self.assertIs(verdict.value, Truth.TRUE)
        self.assertEqual(verdict.method, "sampled")
        torsion = IwasawaModule.presentation(TWO_VARS, [[S("W1 - p", TWO_VARS)]])
        verdict = pseudo_null_verdict(torsion, samples=4, seed=7)
        self.assertIs(verdict.value, Truth.FALSE)
        self.assertEqual(verdict.samples, 4)

    def test_10_finite_generation_over_subring(self):
        self.assertIs(is_fg_over_subring(golden("counterexample_m.mod")), Truth.FALSE)
        self.assertIs(is_fg_over_subring(golden("counterexample_n.mod")), Truth.FALSE)
        self.assertIs(is_fg_over_subring(golden("linear_cyclics.mod")), Truth.TRUE)
        self.assertIs(is_fg_over_subring(golden("free3.mod")), Truth.FALSE)

    def test_11_quotient_by_the_last_variable(self):
        # R[[W]]/(g, W) is R/(g) over R = Zp[[W1]]; pseudo-null exactly when R/(g) is torsion
        w = S("W2", TWO_VARS)
        cases = [
            ([[w], [S("W1 - p", TWO_VARS)]], Truth.TRUE),
            ([[w], [S("p", TWO_VARS)]], Truth.TRUE),
            ([[w]], Truth.FALSE),
        ]
        for rows, expected in cases:
            M = IwasawaModule.presentation(TWO_VARS, rows)
            self.assertIs(is_fg_over_subring(M), Truth.TRUE)
            self.assertIs(pseudo_null_verdict(M, samples=8, seed=3).value, expected, M.shape)


class TestSpecialization(unittest.TestCase):

    def setUp(self):
        self.M = golden("null_block.mod")
        self.through = make_linear_element(TWO_VARS, [-3, 1, 0])
        self.across = make_linear_element(TWO_VARS, [-3, 0, 1])

    # ── 5. Quotient and l-torsion ──

    def test_01_quotient_turns_divisible_cyclics_free(self):
        Q = quotient_by(self.M, self.through)
        self.assertEqual(Q.ctx.m, 1)
        self.assertEqual(rank(Q), 1)
        Q = quotient_by(self.M, self.across)
        self.assertEqual(rank(Q), 0)
        self.assertTrue((char_ideal(Q) - S("W1 - p")).is_zero)

    def test_02_torsion_sub(self):
        T = torsion_sub(self.M, self.through)
        self.assertEqual(rank(T.module), 1)
        self.assertEqual(torsion_sub(self.M, self.across).rank, 0)
        with self.assertRaises(UnsupportedShapeError):
            torsion_sub(golden("presentation_pw.mod"), make_linear_element(ONE_VAR, [-3, 1]))

    def test_03_rank_formula(self):
        for name in ("null_block.mod", "counterexample_m.mod", "counterexample_n.mod"):
            M = golden(name)
            for l in (self.through, self.across):
                report = rank_formula_check(M, l)
                self.assertTrue(report.holds, f"{name} at {l}")
        free = IwasawaModule.free(TWO_VARS, 2)
        report = rank_formula_check(free, self.across)
        self.assertEqual((report.rank, report.quotient_rank, report.torsion_sub_rank), (2, 2, 0))

    def test_04_tor_transfer(self):
        report = tor_transfer_check(self.M, self.across)
        self.assertTrue(report.precondition)
        self.assertTrue(report.holds)
        report = tor_transfer_check(self.M, self.through)
        self.assertFalse(report.precondition)

    # ── 6. Involution ──

    def test_05_involute_standard_form(self):
        M = golden("linear_cyclics.mod")
        twisted = involute_module(M)
        self.assertEqual(rank(twisted), 0)
        self.assertTrue((twisted.shape.cyclics[0] - S("-3 - 4*W")).is_zero)
        self.assertEqual(mu_lambda(twisted), mu_lambda(M))

    def test_06_involute_presentation_is_experimental(self):
        M = golden("presentation_pw.mod")
        with self.assertRaises(UnsupportedShapeError):
            involute_module(M)
        twisted = involute_module(M, experimental=True)
        self.assertEqual(rank(twisted), 0)
        self.assertEqual(mu_lambda(twisted), (1, 1))


class TestModuleLaws(unittest.TestCase):

    # ── 7. Direct sums ──

    def test_01_rank_adds(self):
        self.assertEqual(rank(golden("p_primary.mod").direct_sum(golden("free3.mod"))), 4)
        mixed = golden("linear_cyclics.mod").direct_sum(golden("presentation_pw.mod"))
        self.assertEqual(rank(mixed), 0)
        self.assertEqual(rank(golden("null_block.mod").direct_sum(IwasawaModule.free(TWO_VARS, 2))), 2)

    def test_02_char_multiplies(self):
        M, N = golden("linear_cyclics.mod"), golden("presentation_pw.mod")
        self.assertIs(unit_equal(char_ideal(M.direct_sum(N)), char_ideal(M) * char_ideal(N)), Truth.TRUE)
        M, N = golden("null_block.mod"), golden("counterexample_m.mod")
        self.assertTrue((char_ideal(M.direct_sum(N)) - char_ideal(M) * char_ideal(N)).is_zero)

    def test_03_pseudo_null_summand_has_unit_char(self):
        finite = IwasawaModule.presentation(ONE_VAR, [[S("p")], [S("W")]])
        M = golden("linear_cyclics.mod")
        self.assertTrue(char_ideal(finite).is_unit)
        self.assertIs(unit_equal(char_ideal(M.direct_sum(finite)), char_ideal(M)), Truth.TRUE)
        self.assertEqual(rank(M.direct_sum(finite)), 0)

    # ── 8. Comparison ──

    def test_04_incomplete_factors_stay_indeterminate(self):
        M = IwasawaModule.standard(ONE_VAR, [S("W - p")])
        partial = StructureData(rank=0, mu=0, lam=1, char_gen=S("W - p"), elementary_divisors=None, complete=False)
        with mock.patch.object(invariants, "torsion_structure", return_value=partial):
            self.assertIs(pseudo_compare(M, M), Verdict.INDETERMINATE)
        self.assertIs(pseudo_compare(M, M), Verdict.PSEUDO_ISOMORPHIC)

    def test_05_verdicts_reach_the_audit_trail(self):
        M = golden("linear_cyclics.mod")
        finite = IwasawaModule.presentation(ONE_VAR, [[S("p")], [S("W")]])
        with self.assertLogs("iwalg.audit", level="INFO") as logs:
            pseudo_compare(M, M)
            is_pseudo_null(finite)
        entries = [json.loads(record.getMessage()) for record in logs.records]
        operations = [entry["operation"] for entry in entries]
        self.assertIn("pseudo_compare", operations)
        self.assertIn("pseudo_null_verdict", operations)
        compared = next(entry for entry in entries if entry["operation"] == "pseudo_compare")
        self.assertEqual(compared["verdict"], "pseudo_isomorphic")
        self.assertIn("digest", compared)

    # ── 9. Specializing characteristic ideals ──

    def test_06_char_specializes_for_coprime_cyclics(self):
        M = IwasawaModule.standard(TWO_VARS, [S("W1 - p", TWO_VARS), S("W2^2 + p*W1", TWO_VARS)])
        for coeffs in ([-3, 0, 1], [3, 1, 1], [9, 1, 0]):
            l = make_linear_element(TWO_VARS, coeffs)
            Q = quotient_by(M, l)
            self.assertEqual(rank(Q), 0, l)
            self.assertIs(unit_equal(eliminate_variable(char_ideal(M), l), char_ideal(Q)), Truth.TRUE, l)


if __name__ == "__main__":
    unittest.main()
