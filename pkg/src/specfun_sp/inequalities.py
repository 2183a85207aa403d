"""Verification engines for operator-function inequalities.

For symmetric matrices A, B and a Lipschitz function f with constant L the
Birman-Solomyak bound states ``||f(A) - f(B)||_HS <= L ||A - B||_HS``.  Its
proof for operators with pure point spectrum rests on the Parseval double-sum
identity

    ||f(A) - f(B)||_HS^2 = sum_{a,b} (f(lambda_a) - f(mu_b))^2 |(u_a, v_b)|^2,

which is exact at finite dimension.  For lower-bounded operators whose
resolvents are close, functions g with ``sup (x+lambda)^2 |g'(x)| < infinity``
satisfy the corollary bound against the resolvent difference instead.

Each operation here evaluates both sides of a bound by independent routes and
reports the ratio, so the inequalities become runtime-checkable properties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, LowerBoundViolated
from .linalg import SymMatrix, hs_norm, matrix_function, spectral_decompose

__all__ = [
    "LipschitzFunction",
    "ResolventTestFunction",
    "GapResult",
    "ParsevalResult",
    "bs_gap",
    "parseval_double_sum",
    "resolvent_gap",
    "lipschitz_resolvent_gap",
    "random_pair_suite",
    "lipschitz_violation",
    "abs_function",
    "clamp_function",
    "soft_threshold_function",
    "piecewise_linear_function",
    "exp_decay_test_function",
    "resolvent_power_test_function",
    "x_exp_decay_test_function",
    "DEFAULT_FAMILIES",
]


@dataclass(frozen=True)
class LipschitzFunction:
    """A scalar function together with a declared Lipschitz constant.

    The constant is caller-declared; :func:`lipschitz_violation` spot-checks
    it by sampling, since a sup-norm of ``|f'|`` cannot be computed for a
    black-box function.
    """

    eval: Callable[[float], float]
    lipschitz_constant: float
    descriptor: str


@dataclass(frozen=True)
class ResolventTestFunction:
    """Differentiable g on [rho, inf) with decay ``(x+lam)^2 |g'(x)| <= l_res``."""

    g: Callable[[float], float]
    g_prime: Callable[[float], float]
    rho: float
    lam: float
    l_res: float
    descriptor: str = ""

    def __post_init__(self) -> None:
        if not self.lam + self.rho > 0.0:
            raise ValueError(f"need lam + rho > 0, got {self.lam + self.rho}")

    def decay_margin(self, n_samples: int = 400) -> float:
        """Max of ``(x+lam)^2 |g'(x)| - l_res`` on a geometric grid.

        Nonpositive (up to 1e-12) when the declared ``l_res`` is a valid sup
        over ``[rho, rho + 1e6]``.
        """
        grid = self.rho + np.geomspace(1e-9, 1e6, n_samples)
        grid = np.concatenate(([self.rho], grid))
        worst = -np.inf
        for x in grid:
            worst = max(worst, (x + self.lam) ** 2 * abs(self.g_prime(x)) - self.l_res)
        return float(worst)


@dataclass(frozen=True)
class GapResult:
    """Left side, right side and their ratio for one inequality instance."""

    lhs: float
    rhs: float
    ratio: float


@dataclass(frozen=True)
class ParsevalResult:
    double_sum: float
    hs_sq: float

    @property
    def residual(self) -> float:
        """Relative defect ``|sum - hs_sq| / (1 + hs_sq)``."""
        return abs(self.double_sum - self.hs_sq) / (1.0 + self.hs_sq)


def _ratio(lhs: float, rhs: float) -> float:
    return lhs / rhs if rhs > 0.0 else 0.0


def bs_gap(A: SymMatrix, B: SymMatrix, f: LipschitzFunction) -> GapResult:
    """Evaluate ``||f(A)-f(B)||_HS`` against ``L ||A-B||_HS``.

    The left side goes through the spectral calculus of each operator
    independently.  Whenever the declared constant is valid on the joint
    spectral range the ratio is at most 1 (up to roundoff).
    """
    if A.n != B.n:
        raise DimensionMismatch(f"dimensions {A.n} and {B.n} differ")
    fa = matrix_function(spectral_decompose(A), f.eval)
    fb = matrix_function(spectral_decompose(B), f.eval)
    lhs = hs_norm(fa - fb)
    rhs = f.lipschitz_constant * hs_norm(A - B)
    return GapResult(lhs, rhs, _ratio(lhs, rhs))


def parseval_double_sum(A: SymMatrix, B: SymMatrix, f: LipschitzFunction) -> ParsevalResult:
    """Both sides of the double-sum identity, computed independently.

    The double sum runs over all eigenpairs of A and B weighted by squared
    eigenvector overlaps; the squared Hilbert-Schmidt norm goes through the
    assembled matrices.
    """
    if A.n != B.n:
        raise DimensionMismatch(f"dimensions {A.n} and {B.n} differ")
    da = spectral_decompose(A)
    db = spectral_decompose(B)
    fa = np.array([f.eval(x) for x in da.eigenvalues], dtype=float)
    fb = np.array([f.eval(x) for x in db.eigenvalues], dtype=float)
    overlap = da.eigenvectors.T @ db.eigenvectors
    diff = fa[:, None] - fb[None, :]
    double_sum = float(np.sum(diff * diff * overlap * overlap))
    hs = hs_norm(matrix_function(da, f.eval) - matrix_function(db, f.eval))
    return ParsevalResult(double_sum, hs * hs)


def _check_lower_bound(dec, rho: float) -> None:
    low = float(dec.eigenvalues[0])
    if low < rho - 1e-12:
        raise LowerBoundViolated(f"eigenvalue {low} below declared bound {rho}")


def resolvent_gap(A: SymMatrix, B: SymMatrix, t: ResolventTestFunction) -> GapResult:
    """``||g(A)-g(B)||_HS`` against ``l_res ||(A+lam)^-1 - (B+lam)^-1||_HS``."""
    if A.n != B.n:
        raise DimensionMismatch(f"dimensions {A.n} and {B.n} differ")
    da = spectral_decompose(A)
    db = spectral_decompose(B)
    _check_lower_bound(da, t.rho)
    _check_lower_bound(db, t.rho)
    lhs = hs_norm(matrix_function(da, t.g) - matrix_function(db, t.g))
    resolvent = lambda x: 1.0 / (x + t.lam)
    rdiff = hs_norm(matrix_function(da, resolvent) - matrix_function(db, resolvent))
    rhs = t.l_res * rdiff
    return GapResult(lhs, rhs, _ratio(lhs, rhs))


def lipschitz_resolvent_gap(
    A: SymMatrix, B: SymMatrix, lam: float, f: LipschitzFunction
) -> GapResult:
    """Bound a Lipschitz function of the resolvents by the resolvent gap.

    With ``g(x) = f(1/(x+lam))`` this checks
    ``||g(A)-g(B)||_HS <= L ||(A+lam)^-1 - (B+lam)^-1||_HS``; the constant is
    the Lipschitz constant of f on the interval swept by the resolvents.
    """
    if A.n != B.n:
        raise DimensionMismatch(f"dimensions {A.n} and {B.n} differ")
    da = spectral_decompose(A)
    db = spectral_decompose(B)
    low = min(float(da.eigenvalues[0]), float(db.eigenvalues[0]))
    if not lam + low > 0.0:
        raise LowerBoundViolated(f"shift {lam} does not clear the spectrum bottom {low}")
    g = lambda x: f.eval(1.0 / (x + lam))
    lhs = hs_norm(matrix_function(da, g) - matrix_function(db, g))
    resolvent = lambda x: 1.0 / (x + lam)
    rdiff = hs_norm(matrix_function(da, resolvent) - matrix_function(db, resolvent))
    rhs = f.lipschitz_constant * rdiff
    return GapResult(lhs, rhs, _ratio(lhs, rhs))


# --- Lipschitz function family ----------------------------------------------


def abs_function() -> LipschitzFunction:
    return LipschitzFunction(abs, 1.0, "abs")


def clamp_function(lo: float = -1.0, hi: float = 1.0) -> LipschitzFunction:
    return LipschitzFunction(lambda x: min(hi, max(lo, x)), 1.0, "clamp")


def soft_threshold_function(threshold: float = 0.5) -> LipschitzFunction:
    def f(x: float) -> float:
        mag = max(abs(x) - threshold, 0.0)
        return mag if x >= 0.0 else -mag

    return LipschitzFunction(f, 1.0, "soft-threshold")


def piecewise_linear_function(rng: np.random.Generator, n_breaks: int = 5) -> LipschitzFunction:
    """Random continuous piecewise-linear function with global Lipschitz constant.

    Breakpoints are sorted random abscissae; the function extends linearly
    beyond the first and last with the end slopes, so ``max |slope|`` is a
    global constant.
    """
    xs = np.sort(rng.uniform(-4.0, 4.0, size=n_breaks))
    while np.min(np.diff(xs)) < 1e-3:
        xs = np.sort(rng.uniform(-4.0, 4.0, size=n_breaks))
    ys = rng.uniform(-3.0, 3.0, size=n_breaks)
    slopes = np.diff(ys) / np.diff(xs)
    lipschitz = float(np.max(np.abs(slopes)))

    def f(x: float) -> float:
        if x <= xs[0]:
            return float(ys[0] + slopes[0] * (x - xs[0]))
        if x >= xs[-1]:
            return float(ys[-1] + slopes[-1] * (x - xs[-1]))
        return float(np.interp(x, xs, ys))

    return LipschitzFunction(f, lipschitz, "piecewise-linear")


def exp_decay_test_function(rho: float, lam: float) -> ResolventTestFunction:
    """``g(x) = exp(-x)`` with the exact sup of ``(x+lam)^2 exp(-x)`` on [rho, inf).

    The weighted derivative magnitude ``(x+lam)^2 exp(-x)`` peaks at
    ``x = 2 - lam``; if that lies left of rho the sup sits at the endpoint.
    """
    peak = 2.0 - lam
    if peak >= rho:
        l_res = 4.0 * math.exp(lam - 2.0)
    else:
        l_res = (rho + lam) ** 2 * math.exp(-rho)
    return ResolventTestFunction(
        g=lambda x: math.exp(-x),
        g_prime=lambda x: -math.exp(-x),
        rho=rho,
        lam=lam,
        l_res=l_res,
        descriptor="exp-decay",
    )


def resolvent_power_test_function(rho: float, lam: float) -> ResolventTestFunction:
    """``g(x) = 1/(x+lam)``: the weighted derivative is identically 1."""
    return ResolventTestFunction(
        g=lambda x: 1.0 / (x + lam),
        g_prime=lambda x: -1.0 / (x + lam) ** 2,
        rho=rho,
        lam=lam,
        l_res=1.0,
        descriptor="resolvent",
    )


def x_exp_decay_test_function(rho: float, lam: float) -> ResolventTestFunction:
    """``g(x) = x exp(-x)`` with the exact weighted-derivative sup on [rho, inf).

    ``(x+lam)^2 |1-x| e^-x`` has interior critical points at the roots of
    ``x^2 + (lam-4) x + (2 - 2 lam)`` (one on each side of x = 1); the sup is
    the max over those roots and the left endpoint.
    """
    disc = math.sqrt(lam * lam + 8.0)
    roots = [((4.0 - lam) - disc) / 2.0, ((4.0 - lam) + disc) / 2.0]
    weighted = lambda x: (x + lam) ** 2 * abs(1.0 - x) * math.exp(-x)
    candidates = [rho] + [r for r in roots if r >= rho]
    l_res = max(weighted(x) for x in candidates)
    return ResolventTestFunction(
        g=lambda x: x * math.exp(-x),
        g_prime=lambda x: (1.0 - x) * math.exp(-x),
        rho=rho,
        lam=lam,
        l_res=l_res,
        descriptor="x-exp-decay",
    )


DEFAULT_FAMILIES: Sequence[str] = ("abs", "clamp", "soft-threshold", "piecewise-linear")


def _family_member(name: str, rng: np.random.Generator) -> LipschitzFunction:
    if name == "abs":
        return abs_function()
    if name == "clamp":
        return clamp_function()
    if name == "soft-threshold":
        return soft_threshold_function()
    if name == "piecewise-linear":
        return piecewise_linear_function(rng)
    raise ValueError(f"unknown function family {name!r}")


def lipschitz_violation(
    f: LipschitzFunction,
    lo: float,
    hi: float,
    n_samples: int = 200,
    rng: np.random.Generator | None = None,
) -> float:
    """Max of ``|f(x)-f(y)| - L |x-y|`` over sampled pairs in [lo, hi].

    At most 1e-12 when the declared constant is valid on the range.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    xs = rng.uniform(lo, hi, size=n_samples)
    ys = rng.uniform(lo, hi, size=n_samples)
    worst = -np.inf
    for x, y in zip(xs, ys):
        worst = max(worst, abs(f.eval(x) - f.eval(y)) - f.lipschitz_constant * abs(x - y))
    return float(worst)


# --- randomized suite ---------------------------------------------------------


def _random_sym_pair(rng: np.random.Generator, n_max: int):
    n = int(rng.integers(1, n_max + 1))
    ga = rng.standard_normal((n, n))
    gb = rng.standard_normal((n, n))
    return SymMatrix((ga + ga.T) / 2.0), SymMatrix((gb + gb.T) / 2.0)


def random_pair_suite(
    n_max: int,
    cases: int,
    f_family: Sequence[str] = DEFAULT_FAMILIES,
    seed: int = 0,
    tolerance: float = 1e-9,
    parseval_tolerance: float = 1e-8,
) -> dict:
    """Randomized stress suite for the Hilbert-Schmidt Lipschitz bound.

    Runs ``cases`` random symmetric pairs, cycling through the function
    families, and records the worst gap ratio and Parseval residual per
    family.  The random stream is split per case index, so the report is
    identical for a fixed seed regardless of evaluation order.
    """
    if cases < 1:
        raise ValueError("cases must be >= 1")
    stats = {
        name: {"family": name, "cases": 0, "worst_ratio": 0.0, "worst_seed": -1,
               "worst_parseval": 0.0, "tolerance": tolerance}
        for name in f_family
    }
    for case in range(cases):
        rng = np.random.default_rng([seed, case])
        name = f_family[case % len(f_family)]
        f = _family_member(name, rng)
        A, B = _random_sym_pair(rng, n_max)
        joint = np.concatenate(
            [np.linalg.eigvalsh(A.a), np.linalg.eigvalsh(B.a)]
        )
        violation = lipschitz_violation(
            f, float(joint.min()) - 1.0, float(joint.max()) + 1.0, rng=rng
        )
        if violation > 1e-12:
            raise AssertionError(
                f"declared Lipschitz constant invalid for {name} (case {case})"
            )
        gap = bs_gap(A, B, f)
        pars = parseval_double_sum(A, B, f)
        entry = stats[name]
        entry["cases"] += 1
        if gap.ratio > entry["worst_ratio"]:
            entry["worst_ratio"] = gap.ratio
            entry["worst_seed"] = case
        entry["worst_parseval"] = max(entry["worst_parseval"], pars.residual)
    families = [stats[name] for name in f_family]
    return {
        "seed": seed,
        "cases": cases,
        "n_max": n_max,
        "tolerance": tolerance,
        "parseval_tolerance": parseval_tolerance,
        "worst_ratio": max(e["worst_ratio"] for e in families),
        "worst_parseval": max(e["worst_parseval"] for e in families),
        "families": families,
    }
