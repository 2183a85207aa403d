"""Operator-function inequalities and a certified Schrodinger-Poisson solver.

The package has two halves that share one dense symmetric linear-algebra
substrate:

* verification engines for the Hilbert-Schmidt Lipschitz inequality
  ``||f(A) - f(B)||_HS <= L ||A - B||_HS`` (Birman-Solomyak) and its
  resolvent-difference corollaries on finite symmetric operators, and
* a self-consistent Schrodinger-Poisson solver on 1D finite-element meshes
  driven by a fixed-step contraction for strongly monotone maps, with the
  monotonicity, Lipschitz and convergence-rate constants certified at run
  time.
"""

from . import errors
from .linalg import (
    SpdFactor,
    SpectralDecomposition,
    SymMatrix,
    generalized_eig,
    hs_norm,
    matrix_function,
    schatten_norm,
    solve_spd,
    spectral_decompose,
)

__version__ = "0.1.0"
