"""Lie-algebraic simulation of parametrized quantum circuits."""

from .pauli import PauliString, PauliSum, commutator, commutes, multiply, weight
from .lie import LieBasis, adjoint_rep, g0_basis, lie_closure_pauli, lie_closure_span
from .states import StateSpec, correlation_matrix, expectation_vector
from .circuits import Circuit, NoiseChannel, evolve, evolve_correlation
from .gradients import grad_compilation, grad_expectation

__version__ = "0.1.0"

__all__ = [
    "PauliString", "PauliSum", "commutator", "commutes", "multiply", "weight",
    "LieBasis", "adjoint_rep", "g0_basis", "lie_closure_pauli", "lie_closure_span",
    "StateSpec", "correlation_matrix", "expectation_vector",
    "Circuit", "NoiseChannel", "evolve", "evolve_correlation",
    "grad_compilation", "grad_expectation",
]
