"""Brute-force finite-quotient oracle; advisory cross-checks only."""
from .quotient import finite_quotient, oracle_rank_probe, oracle_torsion_sub, symbolic_log_order
