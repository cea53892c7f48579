import os
import sys
import unittest
from unittest import mock

import numpy as np
import pytest

current_dir = os.path.dirname(os.path.abspath(__file__))
tests_root = os.path.dirname(current_dir)
src_path = os.path.join(os.path.dirname(tests_root), "src")
if src_path not in sys.path:
    sys.path.insert(0, src_path)

from iwalg.core.context import RingContext
from iwalg.core.errors import OracleSizeError, UnsupportedShapeError
from iwalg.core.linear import make_linear_element
from iwalg.core.literal import parse_series
from iwalg.modules.module import IwasawaModule
from iwalg.modules.parser import load_module
from iwalg.oracle.quotient import (
    finite_quotient,
    monomial_count,
    oracle_rank_probe,
    oracle_torsion_sub,
    symbolic_log_order,
)
from iwalg.oracle.smith import as_matrix, kernel_basis, smith, subgroup_log_order
from iwalg.system.config import settings

TWO_VARS = RingContext(p=3, m=2)

CLOSED_FORM_MODULES = [
    "free3.mod",
    "p_primary.mod",
    "linear_cyclics.mod",
    "counterexample_m.mod",
    "counterexample_n.mod",
    "null_block.mod",
]
GRID = [(n, d) for n in (4, 8) for d in (4, 8)]


def golden(name):
    return load_module(os.path.join(settings.GOLDEN_DIR, name))


@pytest.mark.parametrize("name", CLOSED_FORM_MODULES)
@pytest.mark.parametrize("level", GRID, ids=lambda lv: f"n{lv[0]}-d{lv[1]}")
def test_brute_force_matches_closed_form(name, level):
    """Smith elimination on the finite quotient agrees with the closed-form count."""
    M = golden(name)
    n, d = level
    assert finite_quotient(M, n, d).log_order == symbolic_log_order(M, n, d)


class TestSmith(unittest.TestCase):

    # ── 1. Elimination over Z/p^n ──

    def test_01_diagonal(self):
        result = smith(as_matrix([[3, 0], [0, 9]], 2), 3, 4)
        self.assertEqual(result.exponents, (1, 2))
        self.assertEqual(result.cokernel_exponents(), (1, 2))

    def test_02_unimodular(self):
        result = smith(as_matrix([[1, 2], [3, 4]], 2), 3, 4)
        self.assertEqual(result.rank, 2)
        self.assertEqual(result.cokernel_exponents(), ())

    def test_03_no_relations(self):
        result = smith(as_matrix([], 2), 3, 4)
        self.assertEqual(result.rank, 0)
        self.assertEqual(result.cokernel_exponents(), (4, 4))

    def test_04_kernel(self):
        B = as_matrix([[3]], 1)
        K = kernel_basis(B, 3, 3)
        self.assertEqual(K.shape, (1, 1))
        self.assertEqual(int(K[0, 0]) % 27, 9)
        self.assertEqual(subgroup_log_order(K, 3, 3), 1)

    def test_05_kernel_of_wide_matrix(self):
        B = as_matrix([[1, 3, 0]], 3)
        K = kernel_basis(B, 3, 2)
        self.assertTrue(all(int(x) % 9 == 0 for x in np.dot(K, B.T).flatten()))
        self.assertEqual(subgroup_log_order(K, 3, 2), 4)


class TestFiniteQuotients(unittest.TestCase):

    # ── 2. Quotients and guards ──

    def test_01_monomial_count(self):
        self.assertEqual(monomial_count(1, 4), 4)
        self.assertEqual(monomial_count(2, 4), 10)
        self.assertEqual(monomial_count(2, 8), 36)
        self.assertEqual(monomial_count(0, 3), 1)
        self.assertEqual(monomial_count(2, 0), 0)

    def test_02_known_values(self):
        self.assertEqual(finite_quotient(golden("free3.mod"), 4, 4).log_order, 48)
        self.assertEqual(finite_quotient(golden("counterexample_n.mod"), 4, 4).log_order, 14)
        self.assertEqual(finite_quotient(golden("null_block.mod"), 4, 4).log_order, 10 + 4)

    def test_03_presentation_agrees_with_its_structure(self):
        M = golden("presentation_pw.mod")
        # R/(p) + R/(W)
        self.assertEqual(finite_quotient(M, 4, 8).log_order, 8 + 4)
        with self.assertRaises(UnsupportedShapeError):
            symbolic_log_order(M, 4, 8)

    def test_04_level_out_of_range(self):
        with self.assertRaises(ValueError):
            finite_quotient(golden("free3.mod"), 0, 4)
        with self.assertRaises(ValueError):
            finite_quotient(golden("free3.mod"), 4, 17)

    def test_05_size_guard(self):
        with mock.patch.object(settings, "ORACLE_MAX_DIM", 10):
            with self.assertRaises(OracleSizeError):
                finite_quotient(golden("free3.mod"), 4, 4)

    def test_06_independent_of_basis_order(self):
        one = RingContext(p=3, m=1)
        p, w, zero = (parse_series(t, one) for t in ("p", "W", "0"))
        layouts = ([[p, w], [zero, w]], [[zero, w], [p, w]], [[w, p], [w, zero]])
        quotients = [finite_quotient(IwasawaModule.presentation(one, rows), 4, 8) for rows in layouts]
        self.assertEqual({q.log_order for q in quotients}, {12})
        self.assertEqual(len({tuple(sorted(q.exponents)) for q in quotients}), 1)

        M = golden("linear_cyclics.mod")
        flipped = IwasawaModule.standard(M.ctx, list(reversed(M.shape.cyclics)))
        self.assertEqual(finite_quotient(M, 4, 8).log_order, finite_quotient(flipped, 4, 8).log_order)

    def test_07_grows_with_degree(self):
        for name in CLOSED_FORM_MODULES + ["presentation_pw.mod"]:
            M = golden(name)
            orders = [finite_quotient(M, 4, d).log_order for d in (2, 4, 6, 8)]
            self.assertEqual(orders, sorted(orders), name)


class TestProbes(unittest.TestCase):

    # ── 3. Growth probe ──

    def test_01_one_variable_invariants(self):
        expected = {
            "free3.mod": (3, 0, 0),
            "p_primary.mod": (1, 3, 0),
            "linear_cyclics.mod": (0, 0, 2),
            "presentation_pw.mod": (0, 1, 1),
        }
        for name, (r, mu, lam) in expected.items():
            estimate = oracle_rank_probe(golden(name), levels=((4, 8),))[0]
            self.assertEqual((estimate.rank, estimate.mu, estimate.lam), (r, mu, lam), name)
            self.assertTrue(estimate.advisory)

    def test_02_two_variable_rank(self):
        self.assertEqual(oracle_rank_probe(golden("counterexample_m.mod"), levels=((4, 8),))[0].rank, 0)
        free = IwasawaModule.free(TWO_VARS, 2)
        self.assertEqual(oracle_rank_probe(free, levels=((4, 8),))[0].rank, 2)

    # ── 4. l-torsion ──

    def test_03_torsion_sub_of_null_block(self):
        null = IwasawaModule.presentation(
            TWO_VARS, [[parse_series("p", TWO_VARS)], [parse_series("W1", TWO_VARS)]], label="null"
        )
        through = make_linear_element(TWO_VARS, [-3, 1, 0])
        report = oracle_torsion_sub(null, through, 2, 3)
        self.assertEqual((report.naive, report.lifted, report.confirm), (3, 3, 3))
        self.assertTrue(report.stable)

        across = make_linear_element(TWO_VARS, [-3, 0, 1])
        report = oracle_torsion_sub(null, across, 2, 3)
        self.assertEqual(report.naive, 1)
        self.assertEqual(report.lifted, 0)
        self.assertEqual(report.boundary, 1)
        self.assertTrue(report.stable)


if __name__ == "__main__":
    unittest.main()
