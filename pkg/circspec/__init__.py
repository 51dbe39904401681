"""
circspec: circular spectrum and bounded solutions of periodic evolution equations.
"""

__version__ = "0.1.0"
__license__ = "MIT"

from circspec.errors import CircspecError
from circspec.funcspace import GridFunction, TrigPolynomial, UnitCircleSet, make_levitan, sup_norm
from circspec.spectrum import ResolventSettings, carleman_spectrum, circular_spectrum, compare_spectra
from circspec.process import IntegrationSettings, PeriodicSystem, monodromy, propagate, spectral_gap
from circspec.solver import MildSolution, SolverSettings, solve_linear, verify_spectral_inclusion
from circspec.perturb import NemytskyMap, PerturbSettings, solve_perturbed

__all__ = [
    "CircspecError",
    "GridFunction", "TrigPolynomial", "UnitCircleSet", "make_levitan", "sup_norm",
    "ResolventSettings", "carleman_spectrum", "circular_spectrum", "compare_spectra",
    "IntegrationSettings", "PeriodicSystem", "monodromy", "propagate", "spectral_gap",
    "MildSolution", "SolverSettings", "solve_linear", "verify_spectral_inclusion",
    "NemytskyMap", "PerturbSettings", "solve_perturbed",
]
