from .corank import reconstruct_multiplicities, structure_compare
from .counterexample import counterexample_suite
from .lclass import in_L_class, l_class_sufficient, sample_linear_ideals
from .specialization import funceq_verdict, verify_char_equality_by_specialization
from .properties import run_suite, run_suites
