"""Occupation functions, traces, Fermi levels and particle densities.

A distribution function f is strictly decreasing and positive with
``r^4 f(r)`` and ``r^4 f'(r)`` bounded on the positive axis, so
``f(H_V - t)`` is trace class and ``t -> tr f(H_V - t)`` is continuous and
strictly increasing.  The Fermi level of a particle number N is the unique
root of ``tr f(H_V - t) = N``; the particle density collects
occupation-weighted squares of the eigenvectors,

    rho_i = sum_n f(lambda_n - t) psi_n(i)^2.

Because the eigenvectors are lumped-orthonormal the normalization
``sum_i m_i rho_i = tr f(H_V - t)`` is exact by construction, as is the
pairing identity ``(rho, W)_lumped = tr(M_W f(H_V - t))`` for every nodal W.
Antimonotonicity of the density map and exact shift covariance of the Fermi
level both follow at the discrete level from the same double-sum argument
that proves them for operators with pure point spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .assembly import AssembledSpace, CoefficientField, GridFunction, lumped_norm
from .errors import BracketFailure
from .schrodinger import Hamiltonian, build_hamiltonian, certificate_for

__all__ = [
    "DistributionFunction",
    "DensityResult",
    "FermiSolve",
    "builtin_distributions",
    "trace_f",
    "fermi_level",
    "occupation_density",
    "particle_density",
    "particle_density_from",
    "monotonicity_probe",
    "lipschitz_probe",
    "export_density_csv",
    "fermi_report",
]

_EXP_CAP = 700.0  # exp saturates instead of overflowing; order is preserved


@dataclass(frozen=True)
class DistributionFunction:
    """Strictly decreasing positive occupation function with inverse."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    f_prime: Callable[[np.ndarray], np.ndarray]
    f_inverse: Callable[[float], float]

    def c_bound(self, k: int, lam_ref: float) -> float:
        """Numerical sup of ``(r + lam_ref)^k f(r)`` over ``[-lam_ref, inf)``.

        A geometric grid localizes the maximum and a bounded scalar
        minimization refines it.
        """
        grid = -lam_ref + np.concatenate(([0.0], np.geomspace(1e-8, 1e6, 3000)))
        vals = (grid + lam_ref) ** k * self.f(grid)
        best = int(np.argmax(vals))
        lo = grid[max(best - 1, 0)]
        hi = grid[min(best + 1, grid.shape[0] - 1)]
        res = minimize_scalar(
            lambda r: -float((r + lam_ref) ** k * self.f(np.asarray(r))),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return max(float(vals[best]), -float(res.fun))


def builtin_distributions() -> dict[str, DistributionFunction]:
    """The two stock occupation functions.

    ``boltzmann`` is ``exp(-r)``; ``fermi_dirac`` is ``1/(1 + exp(r))``.
    Both are evaluated through overflow guards since spectra grow
    quadratically.
    """

    def boltz(r):
        return np.exp(np.minimum(-np.asarray(r, dtype=float), _EXP_CAP))

    def boltz_prime(r):
        return -boltz(r)

    def fd(r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        pos = r >= 0.0
        ep = np.exp(np.minimum(-r[pos], _EXP_CAP))
        out[pos] = ep / (1.0 + ep)
        en = np.exp(np.minimum(r[~pos], _EXP_CAP))
        out[~pos] = 1.0 / (1.0 + en)
        return out

    def fd_prime(r):
        val = fd(r)
        return -val * (1.0 - val)

    return {
        "boltzmann": DistributionFunction(
            "boltzmann", boltz, boltz_prime, lambda y: -math.log(y)
        ),
        "fermi_dirac": DistributionFunction(
            "fermi_dirac", fd, fd_prime, lambda y: math.log((1.0 - y) / y)
        ),
    }


def trace_f(H: Hamiltonian, dist: DistributionFunction, t: float) -> float:
    """``sum_n f(lambda_n - t)``; strictly increasing in t."""
    return float(np.sum(dist.f(H.eigenvalues - t)))


@dataclass(frozen=True)
class FermiSolve:
    level: float
    trace: float
    tol: float
    bracket_expansions: int
    bisections: int


def _solve_trace_equation(
    eigenvalues: np.ndarray,
    dist: DistributionFunction,
    target: float,
    tol: float,
    max_expansions: int = 1000,
    max_bisections: int = 400,
) -> FermiSolve:
    """Root of ``sum f(lambda_n - t) = target`` by bracketing and bisection.

    Every anchor depends only on the spectrum, so shifting all eigenvalues
    by a constant shifts the computed root by exactly the same constant.
    """
    def trace_at(t: float) -> float:
        return float(np.sum(dist.f(eigenvalues - t)))

    t0 = float(np.median(eigenvalues))
    span = float(eigenvalues[-1] - eigenvalues[0])
    step = max(1.0, span)
    lo = hi = t0
    expansions = 0
    while trace_at(hi) < target:
        hi += step
        step *= 2.0
        expansions += 1
        if expansions > max_expansions:
            raise BracketFailure("upper Fermi bracket expansion budget exhausted")
    step = max(1.0, span)
    while trace_at(lo) > target:
        lo -= step
        step *= 2.0
        expansions += 1
        if expansions > max_expansions:
            raise BracketFailure("lower Fermi bracket expansion budget exhausted")
    bisections = 0
    mid = 0.5 * (lo + hi)
    value = trace_at(mid)
    while abs(value - target) > tol:
        if value < target:
            lo = mid
        else:
            hi = mid
        bisections += 1
        if bisections > max_bisections:
            raise BracketFailure(
                f"bisection stalled with |trace - N| = {abs(value - target)}"
            )
        mid = 0.5 * (lo + hi)
        value = trace_at(mid)
    return FermiSolve(mid, value, tol, expansions, bisections)


def fermi_level(
    H: Hamiltonian,
    dist: DistributionFunction,
    n_particles: float,
    tol: Optional[float] = None,
) -> FermiSolve:
    """Unique shift t with ``tr f(H_V - t) = N``.

    The default tolerance is ``1e-10 N`` on the trace defect.
    """
    if not n_particles > 0.0:
        raise ValueError(f"particle number must be positive, got {n_particles}")
    if tol is None:
        tol = 1e-10 * n_particles
    return _solve_trace_equation(H.eigenvalues, dist, n_particles, tol)


def occupation_density(
    H: Hamiltonian, dist: DistributionFunction, t: float
) -> GridFunction:
    """Density of ``f(H_V - t)`` without any particle-number normalization."""
    occ = dist.f(H.eigenvalues - t)
    rho = (H.eigenvectors**2) @ occ
    return GridFunction(rho, H.space.domain)


@dataclass(frozen=True)
class DensityResult:
    rho: GridFunction
    fermi_level: float
    trace: float
    occupations: np.ndarray
    solve: FermiSolve


def particle_density_from(
    H: Hamiltonian,
    dist: DistributionFunction,
    n_particles: float,
    tol: Optional[float] = None,
) -> DensityResult:
    """Fermi solve plus density extraction for an already-built operator."""
    solve = fermi_level(H, dist, n_particles, tol)
    occ = dist.f(H.eigenvalues - solve.level)
    rho = occupation_density(H, dist, solve.level)
    return DensityResult(rho, solve.level, solve.trace, occ, solve)


def particle_density(
    space: AssembledSpace,
    m_coeff: CoefficientField,
    dist: DistributionFunction,
    potential: GridFunction,
    n_particles: float,
    tol: Optional[float] = None,
) -> DensityResult:
    """Build the operator for V, solve the Fermi level, extract the density."""
    H = build_hamiltonian(space, m_coeff, potential)
    return particle_density_from(H, dist, n_particles, tol)


def monotonicity_probe(
    space: AssembledSpace,
    m_coeff: CoefficientField,
    dist: DistributionFunction,
    u: GridFunction,
    v: GridFunction,
    n_particles: float,
) -> float:
    """Lumped pairing ``(rho(U) - rho(V), U - V)``; nonpositive up to roundoff."""
    ru = particle_density(space, m_coeff, dist, u, n_particles).rho.values
    rv = particle_density(space, m_coeff, dist, v, n_particles).rho.values
    return float(np.sum(space.lumped * (ru - rv) * (u.values - v.values)))


def lipschitz_probe(
    space: AssembledSpace,
    m_coeff: CoefficientField,
    dist: DistributionFunction,
    radius: float,
    cases: int,
    seed: int,
    n_particles: float,
) -> dict:
    """Empirical Lipschitz and boundedness constants of the density maps.

    Draws random potential pairs in the lumped-L2 ball of the given radius
    and reports the worst ratios ``||drho||/||dV||`` for the raw
    (fixed-shift) and Fermi-normalized densities, the largest Fermi level
    magnitude, its certified bracket from the sandwich spectra, and a
    step-halving stability check of the ratios.
    """
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    cert = certificate_for(space, m_coeff, radius, n_probes=200, seed=seed)
    h_zero = build_hamiltonian(space, m_coeff, GridFunction.zero(space.domain))
    lam0 = h_zero.eigenvalues
    upper = _solve_trace_equation(1.75 * lam0 + cert.lam, dist, n_particles, 1e-10 * n_particles)
    lower = _solve_trace_equation(0.25 * lam0 - cert.lam, dist, n_particles, 1e-10 * n_particles)

    worst_m = 0.0
    worst_n = 0.0
    worst_fermi = 0.0
    worst_inverse = 0.0
    stable = True
    bracket_ok = True
    for case in range(cases):
        rng = np.random.default_rng([seed, case])
        vecs = []
        for _ in range(2):
            w = rng.standard_normal(space.n_free)
            w *= radius * rng.random() / max(lumped_norm(space, w), 1e-300)
            vecs.append(w)
        u_vals, v_vals = vecs
        gu = GridFunction(u_vals, space.domain)
        gv = GridFunction(v_vals, space.domain)
        hu = build_hamiltonian(space, m_coeff, gu)
        hv = build_hamiltonian(space, m_coeff, gv)
        du = lumped_norm(space, u_vals - v_vals)
        if du == 0.0:
            continue
        raw = lumped_norm(
            space,
            occupation_density(hu, dist, 0.0).values
            - occupation_density(hv, dist, 0.0).values,
        )
        nu = particle_density_from(hu, dist, n_particles)
        nv = particle_density_from(hv, dist, n_particles)
        normalized = lumped_norm(space, nu.rho.values - nv.rho.values)
        ratio_m = raw / du
        ratio_n = normalized / du
        worst_m = max(worst_m, ratio_m)
        worst_n = max(worst_n, ratio_n)
        worst_inverse = max(worst_inverse, abs(nu.fermi_level - nv.fermi_level) / du)
        for res in (nu, nv):
            worst_fermi = max(worst_fermi, abs(res.fermi_level))
            if not (lower.level - 1e-8 <= res.fermi_level <= upper.level + 1e-8):
                bracket_ok = False
        # halve the perturbation; the ratio must not blow up
        mid = GridFunction(v_vals + 0.5 * (u_vals - v_vals), space.domain)
        nm = particle_density(space, m_coeff, dist, mid, n_particles)
        half = lumped_norm(space, nm.rho.values - nv.rho.values) / (0.5 * du)
        if ratio_n > 0.0 and half > 2.0 * ratio_n + 1e-9:
            stable = False
    return {
        "cases": cases,
        "radius": radius,
        "worst_ratio_raw": worst_m,
        "worst_ratio_normalized": worst_n,
        "max_abs_fermi": worst_fermi,
        "fermi_upper_bracket": upper.level,
        "fermi_lower_bracket": lower.level,
        "bracket_holds": bracket_ok,
        "stable_under_halving": stable,
        "fermi_inverse_lipschitz": worst_inverse,
    }


def export_density_csv(space: AssembledSpace, rho: GridFunction, path) -> None:
    """Write the density as CSV columns (x_i, m_i, rho_i) over the free nodes."""
    xs = space.domain.nodes[space.domain.free]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("x_i,m_i,rho_i\n")
        for x, m, r in zip(xs, space.lumped, rho.values):
            fh.write(f"{float(x)!r},{float(m)!r},{float(r)!r}\n")


def fermi_report(result: DensityResult, n_particles: float) -> dict:
    """JSON-shaped Fermi solve summary."""
    return {
        "fermi_level": result.fermi_level,
        "trace": result.trace,
        "N": n_particles,
        "tol": result.solve.tol,
        "iterations": result.solve.bisections,
        "bracket_expansions": result.solve.bracket_expansions,
    }
