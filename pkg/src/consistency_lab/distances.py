"""Variational distances, the convex-hull lower bound, and its attaining test.

``hull_variation`` minimizes the total variation distance between mixtures of
two finite families, which gives the floor ``1 - value`` on the sum of error
probabilities achievable by any single-observation test; ``optimal_test``
constructs the likelihood-ratio test that attains the floor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NumericError, ValidationError
from .measures import DensitySpec, FiniteMeasure
from .quadrature import integrate, oscillation_depth
from .simplex import solve_lp

#: Probabilities closer than this are treated as tied by the randomized test.
TIE_TOL = 1e-12


def total_variation(p: FiniteMeasure, q: FiniteMeasure) -> float:
    """Half the L1 distance between two probability vectors."""
    if p.alphabet_size != q.alphabet_size:
        raise ValidationError(
            f"alphabet sizes differ: {p.alphabet_size} vs {q.alphabet_size}"
        )
    return 0.5 * float(np.abs(p.weights - q.weights).sum())


def density_total_variation(p: DensitySpec, q: DensitySpec, tol: float = 1e-10) -> float:
    """Total variation between two named densities by adaptive quadrature."""
    depth = oscillation_depth(max(p.max_frequency, q.max_frequency))
    return 0.5 * integrate(
        lambda x: abs(float(p.pdf(x)) - float(q.pdf(x))), 0.0, 1.0, tol=tol, min_depth=depth
    )


@dataclass(frozen=True)
class HullDistanceResult:
    """Minimal total variation between the convex hulls of two families.

    ``mixture_p`` and ``mixture_q`` are one pair of optimal convex weights over
    the input families; ``value`` equals the total variation of the two induced
    mixtures. ``iterations`` counts simplex pivots.
    """

    value: float
    mixture_p: np.ndarray
    mixture_q: np.ndarray
    iterations: int


def _validate_families(a: Sequence[FiniteMeasure], b: Sequence[FiniteMeasure]):
    if len(a) == 0 or len(b) == 0:
        raise ValidationError("hypothesis and alternative families must be nonempty")
    sizes = {m.alphabet_size for m in a} | {m.alphabet_size for m in b}
    if len(sizes) != 1:
        raise ValidationError(f"families live on different alphabets: {sorted(sizes)}")
    return np.stack([m.weights for m in a]), np.stack([m.weights for m in b])


def hull_variation(a: Sequence[FiniteMeasure], b: Sequence[FiniteMeasure]) -> HullDistanceResult:
    """Minimize total variation over mixtures of ``a`` against mixtures of ``b``.

    Solved as a linear program: variables are the two mixture weight vectors
    plus one auxiliary variable per atom that linearizes the absolute value.
    """
    P, Q = _validate_families(a, b)
    na, nb = P.shape[0], Q.shape[0]
    k = P.shape[1]
    nvar = na + nb + k

    cost = np.zeros(nvar)
    cost[na + nb :] = 0.5
    A_ub = np.zeros((2 * k, nvar))
    for j in range(k):
        A_ub[2 * j, :na] = P[:, j]
        A_ub[2 * j, na : na + nb] = -Q[:, j]
        A_ub[2 * j, na + nb + j] = -1.0
        A_ub[2 * j + 1] = -A_ub[2 * j]
        A_ub[2 * j + 1, na + nb + j] = -1.0
    b_ub = np.zeros(2 * k)
    A_eq = np.zeros((2, nvar))
    A_eq[0, :na] = 1.0
    A_eq[1, na : na + nb] = 1.0
    b_eq = np.ones(2)

    result = solve_lp(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq)
    lam = np.clip(result.x[:na], 0.0, None)
    mu = np.clip(result.x[na : na + nb], 0.0, None)
    lam /= lam.sum()
    mu /= mu.sum()
    value = 0.5 * float(np.abs(lam @ P - mu @ Q).sum())
    if abs(value - result.objective) > 1e-7:
        raise NumericError(
            f"LP optimum {result.objective:.3e} disagrees with mixture distance {value:.3e}"
        )
    return HullDistanceResult(
        value=value, mixture_p=lam, mixture_q=mu, iterations=result.iterations
    )


def kraft_bound(a: Sequence[FiniteMeasure], b: Sequence[FiniteMeasure]) -> float:
    """Floor on type I + type II error over all tests: one minus the hull distance."""
    return 1.0 - hull_variation(a, b).value


@dataclass(frozen=True)
class Test:
    """Randomized single-observation decision rule on a finite alphabet.

    ``reject_prob[j]`` is the probability of rejecting the hypothesis when atom
    ``j`` is observed.
    """

    reject_prob: np.ndarray

    def __post_init__(self):
        rp = np.asarray(self.reject_prob, dtype=float)
        if np.any(rp < 0.0) or np.any(rp > 1.0):
            raise ValidationError("rejection probabilities must lie in [0, 1]")
        rp.setflags(write=False)
        object.__setattr__(self, "reject_prob", rp)

    def type1_error(self, p: FiniteMeasure) -> float:
        """Rejection probability when the observation is drawn from ``p``."""
        return float(p.weights @ self.reject_prob)

    def type2_error(self, q: FiniteMeasure) -> float:
        """Acceptance probability when the observation is drawn from ``q``."""
        return float(q.weights @ (1.0 - self.reject_prob))

    def rejects(self, counts: np.ndarray) -> np.ndarray:
        """Per-row rejection probability for one-observation count vectors."""
        counts = np.atleast_2d(counts)
        if np.any(counts.sum(axis=1) != 1):
            raise ValidationError("single-observation test expects count vectors with n = 1")
        atoms = counts.argmax(axis=1)
        return self.reject_prob[atoms]


def optimal_test(a: Sequence[FiniteMeasure], b: Sequence[FiniteMeasure]) -> Test:
    """Likelihood-ratio test between the closest hull mixtures.

    Rejects where the optimal alternative mixture outweighs the optimal
    hypothesis mixture, accepts where it is lighter, and flips a fair coin on
    ties; its type I + type II error against those mixtures equals the floor
    ``1 - hull_variation(a, b).value`` exactly.
    """
    P, Q = _validate_families(a, b)
    hull = hull_variation(a, b)
    p_star = hull.mixture_p @ P
    q_star = hull.mixture_q @ Q
    diff = q_star - p_star
    reject = np.where(diff > TIE_TOL, 1.0, np.where(diff < -TIE_TOL, 0.0, 0.5))
    return Test(reject_prob=reject)


_KS_GRID = 1 << 13


def ks_distance(spec1: DensitySpec, spec2: DensitySpec) -> float:
    """Supremum distance between the distribution functions of two densities.

    Evaluates the closed-form distribution functions on a fine grid, then
    refines every local maximum of the gap by golden-section search; the result
    is accurate to well below 1e-9 for the bounded-slope families here.
    """
    if not isinstance(spec1, DensitySpec) or not isinstance(spec2, DensitySpec):
        raise ValidationError("ks_distance expects two density specs")
    if spec1 == spec2:
        return 0.0

    def gap(x):
        return np.abs(spec1.cdf(np.asarray(x, dtype=float)) - spec2.cdf(np.asarray(x, dtype=float)))

    grid = np.linspace(0.0, 1.0, _KS_GRID + 1)
    values = gap(grid)
    interior = np.zeros(_KS_GRID + 1, dtype=bool)
    interior[1:-1] = (values[1:-1] >= values[:-2]) & (values[1:-1] >= values[2:])
    candidates = np.flatnonzero(interior)
    best = float(values.max())
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    for idx in candidates:
        lo, hi = grid[idx - 1], grid[idx + 1]
        x1 = hi - invphi * (hi - lo)
        x2 = lo + invphi * (hi - lo)
        f1, f2 = float(gap(x1)), float(gap(x2))
        for _ in range(60):
            if f1 < f2:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + invphi * (hi - lo)
                f2 = float(gap(x2))
            else:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - invphi * (hi - lo)
                f1 = float(gap(x1))
        best = max(best, f1, f2)
    return best
