"""P1 finite elements on uniform 1D meshes with mixed boundary conditions.

Builds the discrete function space behind the Schrodinger and Poisson
operators: mass and stiffness matrices for elementwise-constant coefficient
fields, the Poincare constant of the Dirichlet-constrained space, and the
duality map of the W^{1,2} inner product (unit stiffness plus mass).

Two quadratures of the L2 inner product coexist on purpose.  The consistent
mass matrix is exact for piecewise-linear functions and backs the W^{1,2}
form (duality map, dual norms, Poincare constant).  The lumped (diagonal)
weights back everything on the particle-density side, where they make nodal
densities, traces and shift identities exact rather than
quadrature-approximate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    CountMismatch,
    NoPoincare,
    NonFiniteValue,
    ShapeMismatch,
)
from .linalg import SpdFactor, SymMatrix, generalized_eig

__all__ = [
    "DIRICHLET_SPECS",
    "DiscretizedDomain",
    "CoefficientField",
    "GridFunction",
    "AssembledSpace",
    "build_domain",
    "assemble",
    "mass_matrix",
    "build_space",
    "poincare_constant",
    "duality_solve",
    "dual_norm",
    "embed_l2_functional",
    "h_norm",
    "lumped_norm",
    "export_coo",
]

DIRICHLET_SPECS = ("both-ends", "left-only", "right-only", "none")


@dataclass(frozen=True)
class DiscretizedDomain:
    """Uniform 1D mesh of the unit interval with a Dirichlet node set."""

    dim: int
    nodes: np.ndarray        # node coordinates, ascending
    elements: np.ndarray     # (n_cells, 2) node indices
    dirichlet: np.ndarray    # constrained node indices
    free: np.ndarray         # free node indices, ascending
    h: float                 # max element diameter

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_cells(self) -> int:
        return self.elements.shape[0]

    @property
    def n_free(self) -> int:
        return self.free.shape[0]

    @property
    def length(self) -> float:
        return float(self.nodes[-1] - self.nodes[0])

    def element_sizes(self) -> np.ndarray:
        return self.nodes[self.elements[:, 1]] - self.nodes[self.elements[:, 0]]


def build_domain(d: int = 1, n_cells: int = 8, dirichlet: str = "both-ends") -> DiscretizedDomain:
    """Uniform mesh of (0, 1) with the requested Dirichlet node set.

    ``dirichlet`` is one of ``both-ends``, ``left-only``, ``right-only`` or
    ``none`` (pure Neumann).
    """
    if d != 1:
        raise ValueError(f"only d=1 meshes are implemented, got d={d}")
    if n_cells < 2:
        raise ValueError(f"need at least 2 cells, got {n_cells}")
    if dirichlet not in DIRICHLET_SPECS:
        raise ValueError(f"dirichlet must be one of {DIRICHLET_SPECS}, got {dirichlet!r}")
    n_nodes = n_cells + 1
    nodes = np.linspace(0.0, 1.0, n_nodes)
    elements = np.column_stack([np.arange(n_cells), np.arange(1, n_nodes)])
    constrained = {
        "both-ends": [0, n_nodes - 1],
        "left-only": [0],
        "right-only": [n_nodes - 1],
        "none": [],
    }[dirichlet]
    dirichlet_idx = np.array(constrained, dtype=int)
    mask = np.ones(n_nodes, dtype=bool)
    mask[dirichlet_idx] = False
    free = np.nonzero(mask)[0]
    return DiscretizedDomain(
        dim=1,
        nodes=nodes,
        elements=elements,
        dirichlet=dirichlet_idx,
        free=free,
        h=float(np.max(np.diff(nodes))),
    )


@dataclass(frozen=True)
class CoefficientField:
    """Elementwise-constant positive scalar coefficient with ellipticity bounds."""

    values: np.ndarray
    lower_bound: float
    upper_bound: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if not self.lower_bound > 0.0:
            raise ValueError(f"lower bound must be positive, got {self.lower_bound}")
        if np.any(values < self.lower_bound) or np.any(values > self.upper_bound):
            raise ValueError("coefficient values fall outside the declared bounds")

    @staticmethod
    def constant(domain: DiscretizedDomain, value: float) -> "CoefficientField":
        return CoefficientField(np.full(domain.n_cells, float(value)), value, value)

    def inverted(self) -> "CoefficientField":
        """Reciprocal field; bounds swap and invert."""
        return CoefficientField(1.0 / self.values, 1.0 / self.upper_bound, 1.0 / self.lower_bound)

    def conforms_to(self, domain: DiscretizedDomain) -> bool:
        return self.values.shape == (domain.n_cells,)


@dataclass(frozen=True)
class GridFunction:
    """Nodal values on the free nodes of a domain."""

    values: np.ndarray
    domain: DiscretizedDomain

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.domain.n_free,):
            raise CountMismatch(
                f"expected {self.domain.n_free} nodal values, got {values.shape}"
            )
        if not np.isfinite(values).all():
            raise NonFiniteValue("grid function has non-finite nodal values")

    @staticmethod
    def zero(domain: DiscretizedDomain) -> "GridFunction":
        return GridFunction(np.zeros(domain.n_free), domain)


def assemble(domain: DiscretizedDomain, coeff: CoefficientField) -> SymMatrix:
    """Stiffness matrix of ``integral c grad(u) grad(v)`` on the free nodes.

    Dirichlet rows and columns are eliminated.  On a uniform mesh with a
    constant coefficient the interior rows are the classic tridiagonal
    ``(-c/h, 2c/h, -c/h)``.
    """
    if not coeff.conforms_to(domain):
        raise ShapeMismatch(
            f"coefficient has {coeff.values.shape[0]} values for {domain.n_cells} cells"
        )
    n = domain.n_nodes
    full = np.zeros((n, n))
    sizes = domain.element_sizes()
    for e, (i, j) in enumerate(domain.elements):
        k = coeff.values[e] / sizes[e]
        full[i, i] += k
        full[j, j] += k
        full[i, j] -= k
        full[j, i] -= k
    idx = domain.free
    return SymMatrix(full[np.ix_(idx, idx)])


def mass_matrix(domain: DiscretizedDomain) -> tuple[SymMatrix, np.ndarray]:
    """Consistent P1 mass matrix over all nodes, plus the lumped weights.

    The lumped weights are the row sums of the consistent matrix; they form a
    partition of the domain length.
    """
    n = domain.n_nodes
    full = np.zeros((n, n))
    sizes = domain.element_sizes()
    for e, (i, j) in enumerate(domain.elements):
        h = sizes[e]
        full[i, i] += h / 3.0
        full[j, j] += h / 3.0
        full[i, j] += h / 6.0
        full[j, i] += h / 6.0
    return SymMatrix(full), full.sum(axis=1)


@dataclass
class AssembledSpace:
    """Free-node matrices of one Dirichlet-constrained P1 space.

    ``duality`` realizes the W^{1,2} inner product
    ``(grad u, grad v) + (u, v)``; its inverse is the duality map from
    functionals back to the space.  ``lumped`` carries the diagonal L2
    weights of the free nodes.  All members are fixed after construction and
    safe to share.
    """

    domain: DiscretizedDomain
    mass: SymMatrix
    lumped: np.ndarray
    stiffness_unit: SymMatrix
    duality: SymMatrix
    poincare: Optional[float]
    _duality_factor: Optional[SpdFactor] = field(default=None, repr=False)

    @property
    def n_free(self) -> int:
        return self.domain.n_free

    def duality_factor(self) -> SpdFactor:
        if self._duality_factor is None:
            self._duality_factor = SpdFactor(self.duality)
        return self._duality_factor


def build_space(domain: DiscretizedDomain) -> AssembledSpace:
    """Assemble mass, unit stiffness, duality map and Poincare constant."""
    mass_full, lumped_full = mass_matrix(domain)
    idx = domain.free
    mass = SymMatrix(mass_full.a[np.ix_(idx, idx)])
    lumped = lumped_full[idx]
    k_unit = assemble(domain, CoefficientField.constant(domain, 1.0))
    space = AssembledSpace(
        domain=domain,
        mass=mass,
        lumped=lumped,
        stiffness_unit=k_unit,
        duality=k_unit + mass,
        poincare=None,
    )
    if domain.dirichlet.size > 0:
        space.poincare = poincare_constant(space)
    return space


def poincare_constant(space: AssembledSpace) -> float:
    """Reciprocal of the smallest generalized eigenvalue of (K1, M).

    With this constant the discrete Poincare inequality
    ``u^T M u <= c_P u^T K1 u`` holds for every grid function on the space.
    """
    if space.poincare is not None:
        return space.poincare
    if space.domain.dirichlet.size == 0:
        raise NoPoincare("space has no Dirichlet nodes; constants lie in the kernel")
    dec = generalized_eig(space.stiffness_unit, space.mass)
    lam_min = float(dec.eigenvalues[0])
    if lam_min <= 0.0:
        raise NoPoincare(f"smallest stiffness eigenvalue is {lam_min}")
    return 1.0 / lam_min


def duality_solve(space: AssembledSpace, g: np.ndarray) -> GridFunction:
    """Apply the inverse duality map: solve ``(K1 + M) x = g``."""
    g = np.asarray(g, dtype=float)
    if g.shape != (space.n_free,):
        raise ShapeMismatch(f"functional has shape {g.shape}, expected ({space.n_free},)")
    return GridFunction(space.duality_factor().solve(g), space.domain)


def dual_norm(space: AssembledSpace, g: np.ndarray) -> float:
    """Norm of a functional in the dual of the W^{1,2} space."""
    g = np.asarray(g, dtype=float)
    if g.shape != (space.n_free,):
        raise ShapeMismatch(f"functional has shape {g.shape}, expected ({space.n_free},)")
    val = float(g @ space.duality_factor().solve(g))
    return float(np.sqrt(max(val, 0.0)))


def embed_l2_functional(space: AssembledSpace, w) -> np.ndarray:
    """Embed an L2 representative as a functional: ``w -> M w``.

    Pairing the result with any grid function u gives the consistent-mass
    inner product (w, u); the embedding has dual norm at most ``||w||_M``.
    """
    values = w.values if isinstance(w, GridFunction) else np.asarray(w, dtype=float)
    if values.shape != (space.n_free,):
        raise ShapeMismatch(f"values have shape {values.shape}, expected ({space.n_free},)")
    return space.mass.a @ values


def h_norm(space: AssembledSpace, v) -> float:
    """W^{1,2} norm ``sqrt(v^T (K1 + M) v)`` of nodal values."""
    values = v.values if isinstance(v, GridFunction) else np.asarray(v, dtype=float)
    return float(np.sqrt(max(values @ (space.duality.a @ values), 0.0)))


def lumped_norm(space: AssembledSpace, v) -> float:
    """Lumped L2 norm ``sqrt(sum m_i v_i^2)`` of nodal values."""
    values = v.values if isinstance(v, GridFunction) else np.asarray(v, dtype=float)
    return float(np.sqrt(np.sum(space.lumped * values * values)))


def export_coo(matrix: SymMatrix, path) -> None:
    """Write a matrix in coordinate text format: ``row col value`` per line."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("row col value\n")
        for i in range(matrix.n):
            for j in range(matrix.n):
                v = float(matrix.a[i, j])
                if v != 0.0:
                    fh.write(f"{i} {j} {v!r}\n")
