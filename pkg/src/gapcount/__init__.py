"""Eigenvalue counting in spectral gaps of perturbed periodic Jacobi matrices.

Library plus experiment CLI: Floquet band structure, Sylvester-inertia
spectrum slicing, Birman-Schwinger kernels and the gap counting bounds,
positive/negative perturbation splitting, lattice Green's functions with
their band-edge envelopes, and distance power-sum convergence experiments.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    bands,
    birman_schwinger,
    green,
    inertia,
    kernels,
    ltsums,
    operators,
    splitting,
)
from .operators import (  # noqa: F401
    JacobiOperator,
    PeriodicBackground,
    free_background,
    make_perturbation,
    perturbation_norms,
    truncate,
    zero_perturbation,
)
