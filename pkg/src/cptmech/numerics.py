"""Numerical kernels: dense LP feasibility and piecewise-linear maximization."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .probs import DomainError

FEAS_TOL = 1e-9
INDET_TOL = 1e-7


@dataclass(frozen=True)
class LpResult:
    status: str  # "feasible" | "infeasible" | "indeterminate"
    x: Optional[np.ndarray]
    residual: float


def lp_feasible(A_eq: Sequence[Sequence[float]], b_eq: Sequence[float]) -> LpResult:
    """Find x >= 0 with A_eq x = b_eq, or certify infeasibility.

    Solved as a phase-1 problem: minimize the total artificial slack. A
    residual below 1e-9 is feasible, above 1e-7 infeasible, in between
    indeterminate.
    """
    A = np.asarray(A_eq, dtype=float)
    b = np.asarray(b_eq, dtype=float)
    if A.ndim != 2 or A.shape[0] != b.shape[0]:
        raise DomainError("lp_feasible: dimension mismatch")
    m, n = A.shape
    # variables: x (n), s_plus (m), s_minus (m)
    A_full = np.hstack([A, np.eye(m), -np.eye(m)])
    c = np.concatenate([np.zeros(n), np.ones(2 * m)])
    res = linprog(c, A_eq=A_full, b_eq=b, bounds=(0, None), method="highs")
    if not res.success:
        # phase-1 is always feasible; failure here is a solver breakdown
        return LpResult("indeterminate", None, float("inf"))
    # recompute the attained slack from the returned point; the solver's own
    # objective value can absorb sub-tolerance infeasibilities
    residual = float(np.abs(A @ res.x[:n] - b).sum())
    if residual < FEAS_TOL:
        return LpResult("feasible", res.x[:n], residual)
    if residual > INDET_TOL:
        return LpResult("infeasible", None, residual)
    return LpResult("indeterminate", None, residual)


def affine_kink_crossings(affines: Sequence[tuple[float, float]],
                          kinks: Sequence[float],
                          interval: tuple[float, float]) -> list[float]:
    """Interior points where an affine map c(x) = a*x + b crosses a weighting kink."""
    lo, hi = interval
    points = set()
    for a, b in affines:
        if a == 0.0:
            continue
        for p in kinks:
            x = (p - b) / a
            if lo < x < hi:
                points.add(x)
    return sorted(points)


def maximize_piecewise_1d(objective: Callable[[float], float],
                          breakpoints: Sequence[float],
                          interval: tuple[float, float],
                          tol: float = 1e-9) -> tuple[list[float], float]:
    """Exact maximum of a piecewise-linear objective with known breakpoints.

    Evaluates both endpoints and every interior breakpoint; returns all
    candidates within tol of the best, plus the best value.
    """
    lo, hi = interval
    if not hi > lo:
        raise DomainError("empty interval")
    candidates = sorted({lo, hi} | {x for x in breakpoints if lo < x < hi})
    values = [objective(x) for x in candidates]
    best = max(values)
    argmax = [x for x, v in zip(candidates, values) if v >= best - tol]
    return argmax, best


def grid_refine_max(objective: Callable[[Sequence[float]], float],
                    dim: int,
                    resolution: int = 16,
                    rounds: int = 12) -> tuple[tuple[float, ...], float]:
    """Heuristic maximization over the probability simplex of dimension `dim`.

    Coarse grid scan followed by hill climbing along coordinate-exchange
    directions with halving step; a lower bound on the true maximum.
    """
    if dim < 1:
        raise DomainError("dimension must be >= 1")
    if dim == 1:
        return (1.0,), objective((1.0,))

    best_pt, best_val = None, -float("inf")
    for counts in itertools.product(range(resolution + 1), repeat=dim - 1):
        if sum(counts) > resolution:
            continue
        pt = tuple(c / resolution for c in counts) + ((resolution - sum(counts)) / resolution,)
        val = objective(pt)
        if val > best_val:
            best_pt, best_val = pt, val

    step = 1.0 / resolution
    for _ in range(rounds):
        improved = True
        while improved:
            improved = False
            for i in range(dim):
                for j in range(dim):
                    if i == j or best_pt[j] < step:
                        continue
                    cand = list(best_pt)
                    cand[j] -= step
                    cand[i] += step
                    val = objective(tuple(cand))
                    if val > best_val + 1e-15:
                        best_pt, best_val = tuple(cand), val
                        improved = True
        step /= 2.0
    return best_pt, best_val
