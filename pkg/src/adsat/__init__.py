"""Adversarial K-SAT toolkit.

Message passing (BP/SP) on K-SAT factor graphs with per-edge negation
bits, large deviations of the Bethe entropy over negation-configurations
via reweighted population dynamics, exact model counting, and a simulated
annealing adversary searching for unsatisfiable negation-configurations.
"""
from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
