import os
import sys
import unittest

import typer
from typer.testing import CliRunner

current_dir = os.path.dirname(os.path.abspath(__file__))
tests_root = os.path.dirname(current_dir)
src_path = os.path.join(os.path.dirname(tests_root), "src")
if src_path not in sys.path:
    sys.path.insert(0, src_path)

from iwalg.core import errors
from iwalg.core import linear, literal, weierstrass
from iwalg.funceq import corank, counterexample, lclass, properties, specialization
from iwalg.modules import invariants, specialize
from iwalg.oracle import quotient
from iwalg.system.cli import CLICK_ERRORS, VERB_OPERATIONS, _exit_code, app, run
from iwalg.system.config import settings

runner = CliRunner()

LIBRARY_MODULES = (
    linear, literal, weierstrass, invariants, specialize, quotient, corank, counterexample, lclass, properties, specialization,
)


def gold(name):
    return str(settings.GOLDEN_DIR / name)


def report(*args):
    result = runner.invoke(app, list(args))
    lines = [line for line in result.stdout.splitlines() if " = " in line]
    return result, dict(line.split(" = ", 1) for line in lines)


class TestCommandSurface(unittest.TestCase):

    # ── 1. Documented invocations ──

    def test_01_counterexample(self):
        result, body = report("counterexample", "--prime", "3")
        self.assertEqual(result.exit_code, 0, result.stdout)
        self.assertEqual(body["passed"], "true")
        self.assertEqual(body["global_equal"], "false")
        self.assertEqual(body["fg_over_subring"], "false,false")
        for i in range(2, 7):
            self.assertEqual(body[f"l_{i}.equal_to_p_squared"], "true")
            self.assertEqual(body[f"naive_{i}.equals_p"], "true")
        self.assertEqual(body["l_1.degenerate"], "true")

    def test_02_rank(self):
        result, body = report("rank", gold("free3.mod"))
        self.assertEqual(result.exit_code, 0)
        self.assertIn("rank = 3", result.stdout)
        self.assertEqual(body["ring"], "ring p=3 vars=1 prec=20 deg=16")
        self.assertIn("digest", body)

    def test_03_reconstruct(self):
        result, body = report("reconstruct", "--ranks", "3,5,7", "--rank", "0", "--deg", "1")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["a"], "1,0,2")
        self.assertEqual(body["corank_check"], "true")

    def test_04_kv_format(self):
        result = runner.invoke(app, ["rank", gold("free3.mod"), "--format", "kv"])
        self.assertEqual(result.exit_code, 0)
        self.assertIn("rank=3", result.stdout.splitlines())

    # ── 2. Single-module verbs ──

    def test_05_structure_one_variable(self):
        result, body = report("structure", gold("p_primary.mod"))
        self.assertEqual(result.exit_code, 0)
        self.assertEqual((body["rank"], body["mu"], body["lambda"]), ("1", "3", "0"))
        self.assertEqual(body["complete"], "true")

    def test_06_structure_two_variables(self):
        result, body = report("structure", gold("null_block.mod"), "--samples", "4", "--seed", "3")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["rank"], "0")
        self.assertEqual(body["pseudo_null"], "false")

    def test_07_mu_lambda(self):
        result, body = report("mu-lambda", gold("presentation_pw.mod"))
        self.assertEqual(result.exit_code, 0)
        self.assertEqual((body["mu"], body["lambda"]), ("1", "1"))

    def test_08_specialize(self):
        result, body = report("specialize", gold("null_block.mod"), "--ideal", "W2 - 3")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["quotient_rank"], "0")
        self.assertEqual(body["in_L_class"], "true")

    def test_09_torsion_sub(self):
        result, body = report("torsion-sub", gold("counterexample_m.mod"), "--ideal", "W1 - 3")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["torsion_sub_rank"], "2")
        self.assertEqual(body["rank_formula"], "true")
        self.assertEqual(body["tor_transfer.precondition"], "false")

    def test_10_l_class(self):
        result, body = report("l-class", gold("null_block.mod"), "--ideal", "W2 - 3")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["membership"], "true")
        self.assertEqual(body["hypotheses_hold"], "true")
        result, body = report("l-class", gold("null_block.mod"), "--ideal", "W1 - 3")
        self.assertEqual(result.exit_code, 1)
        self.assertEqual(body["membership"], "false")

    def test_11_involute(self):
        result, body = report("involute", gold("linear_cyclics.mod"))
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["char_matches"], "true")
        self.assertEqual(run(["involute", gold("presentation_pw.mod")]), 3)

    def test_12_oracle_probe(self):
        result, body = report("oracle-probe", gold("linear_cyclics.mod"), "--levels", "4,8")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["log_order.4.8"], "8")
        self.assertEqual(body["log_order.4.8.symbolic"], "8")
        self.assertEqual((body["oracle.rank"], body["oracle.mu"], body["oracle.lambda"]), ("0", "0", "2"))

    # ── 3. Two-module verbs ──

    def test_13_verify_funceq(self):
        self.assertEqual(run(["verify-funceq", gold("free3.mod"), gold("free3.mod")]), 0)
        self.assertEqual(run(["verify-funceq", gold("linear_cyclics.mod"), gold("linear_cyclics.mod")]), 1)

    def test_14_compare(self):
        result, body = report("compare", gold("linear_cyclics.mod"), gold("linear_cyclics.mod"))
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["verdict"], "pseudo_isomorphic")
        self.assertEqual(run(["compare", gold("linear_cyclics.mod"), gold("free3.mod")]), 1)

    def test_15_verify_specialization_with_ideals(self):
        result, body = report(
            "verify-specialization", gold("counterexample_m.mod"), gold("counterexample_n.mod"),
            "--ideal", "W1 - 27", "--ideal", "W1 - 81",
        )
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["status"], "hypothesis_violated")
        self.assertEqual(body["global_equal"], "false")
        self.assertEqual(body["check.1.equal"], "true")

    def test_16_structure_compare(self):
        result, body = report(
            "structure-compare", gold("linear_cyclics.mod"), gold("linear_cyclics.mod"),
            "--factor", "W - 3", "--theta", "2",
        )
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["factor.1.a_m"], "1,0")
        self.assertEqual(body["agree"], "true")

    def test_17_reconstruct_from_module(self):
        result, body = report("reconstruct", "--module", gold("linear_cyclics.mod"), "--factor", "W - 3", "--theta", "2")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["ranks"], "1,1")
        self.assertEqual(body["a"], "1,0")
        self.assertEqual(body["cross_check"], "true")

    # ── 4. Ring operations ──

    def test_18_series(self):
        result, body = report("series", "prepare", "(1 + W) * (W - 3)")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual((body["mu"], body["lambda"]), ("0", "1"))
        self.assertEqual(body["distinguished"], "W1 - 3")
        result, body = report("series", "eliminate", "W1*W2 + 3", "W2 - 3", "--vars", "2")
        self.assertEqual(body["image"], "3*W1 + 3")
        self.assertEqual(run(["series", "unit-equal", "W - 3", "W - 9"]), 1)
        self.assertEqual(run(["series", "unit-equal", "W - 3", "(W - 3) * (1 + W)"]), 0)

    def test_19_suite(self):
        result, body = report("suite", "reconstruction", "--seed", "2")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(body["seed"], "2")
        self.assertEqual(body["reconstruction.cases"], "2040")
        self.assertEqual(body["reconstruction.failures"], "0")
        self.assertEqual(body["passed"], "true")
        self.assertEqual(run(["suite", "nonexistent"]), 3)


class TestExitCodes(unittest.TestCase):

    # ── 5. Exit codes ──

    def test_01_usage_errors(self):
        self.assertEqual(run(["rank", "/nonexistent/module.mod"]), 3)
        self.assertEqual(run(["series", "prepare", "W +"]), 3)
        self.assertEqual(run(["series", "divide", "W"]), 3)
        self.assertEqual(run(["frobnicate"]), 3)
        self.assertEqual(run(["reconstruct"]), 3)
        self.assertEqual(run(["reconstruct", "--ranks", "3,x"]), 3)
        self.assertEqual(run(["specialize", gold("null_block.mod"), "--ideal", "W2 - 1"]), 3)
        self.assertEqual(run(["counterexample", "--prime", "4"]), 3)

    def test_02_refuted(self):
        self.assertEqual(run(["char", gold("free3.mod")]), 1)
        self.assertEqual(run(["reconstruct", "--ranks", "2,2,3"]), 1)

    def test_03_error_mapping(self):
        self.assertEqual(_exit_code(errors.IndeterminateError("x")), 2)
        self.assertEqual(_exit_code(errors.PrecisionExhaustedError("x")), 2)
        self.assertEqual(_exit_code(errors.SamplingExhaustedError("x")), 2)
        self.assertEqual(_exit_code(errors.NotTorsionError("x")), 1)
        self.assertEqual(_exit_code(errors.ParseError("x")), 3)
        self.assertEqual(_exit_code(errors.UnsupportedShapeError("x")), 3)

    def test_04_help(self):
        self.assertEqual(run(["--help"]), 0)

    def test_05_bad_parameter_inside_a_command(self):
        # raised from the command body, after click has parsed the arguments
        self.assertTrue(issubclass(typer.BadParameter, CLICK_ERRORS))
        self.assertEqual(run(["series", "divide", "W"]), 3)
        result = runner.invoke(app, ["series", "divide", "W"])
        self.assertNotEqual(result.exit_code, 0)
        self.assertNotIsInstance(result.exception, (TypeError, AttributeError))

    # ── 6. Determinism ──

    def test_06_identical_reports(self):
        args = ["verify-specialization", gold("counterexample_m.mod"), gold("counterexample_n.mod"),
                "--samples", "3", "--seed", "5"]
        first = runner.invoke(app, args)
        second = runner.invoke(app, args)
        self.assertEqual(first.exit_code, second.exit_code)
        self.assertEqual(first.stdout, second.stdout)


class TestVerbCoverage(unittest.TestCase):

    def test_01_every_verb_is_mapped(self):
        commands = set(typer.main.get_command(app).commands)
        self.assertEqual(commands, set(VERB_OPERATIONS))

    def test_02_mapped_operations_exist(self):
        for verb, operations in VERB_OPERATIONS.items():
            for name in operations:
                self.assertTrue(
                    any(hasattr(module, name) for module in LIBRARY_MODULES),
                    f"{verb}: {name}",
                )


if __name__ == "__main__":
    unittest.main()
