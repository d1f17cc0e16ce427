"""Exact mod-p Steenrod algebra, Eilenberg-MacLane cohomology, Postnikov towers of S^4,
and the integrality checks they imply for degree-4 classes."""

from .em import Coefficients, EMRing, WindowError, em_table
from .flux import (
    FiniteGradedRing,
    cube_pairing,
    hp1_cubed_ring,
    stable_divisibility_check,
    unstable_vanishing_check,
    witness_lift_argument,
)
from .golden import golden_diff
from .sss import FibrationSpec, UnknownStructure, read_off_total, run_differentials
from .stable import TowerSpec, assemble_primes, pi_consistency_check, postnikov_table, run_stable_tower
from .steenrod import adem_normalize, enumerate_admissible, parse_element

__version__ = "0.1.0"

__all__ = [
    "Coefficients",
    "EMRing",
    "FibrationSpec",
    "FiniteGradedRing",
    "TowerSpec",
    "UnknownStructure",
    "WindowError",
    "adem_normalize",
    "assemble_primes",
    "cube_pairing",
    "em_table",
    "enumerate_admissible",
    "golden_diff",
    "hp1_cubed_ring",
    "parse_element",
    "pi_consistency_check",
    "postnikov_table",
    "read_off_total",
    "run_differentials",
    "run_stable_tower",
    "stable_divisibility_check",
    "unstable_vanishing_check",
    "witness_lift_argument",
]
