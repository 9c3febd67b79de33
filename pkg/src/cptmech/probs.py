"""Small helpers for finite probability distributions stored as dicts."""

from __future__ import annotations

import itertools
import math
from typing import Hashable, Iterable, Mapping, Sequence

SUPPORT_EPS = 1e-12
SUM_TOL = 1e-9


class DomainError(ValueError):
    """Raised when an input is outside an operation's declared domain."""


def validate_dist(d: Mapping, *, tol: float = SUM_TOL, where: str = "distribution") -> None:
    total = 0.0
    for key, p in d.items():
        if not math.isfinite(p) or p < -SUPPORT_EPS:
            raise DomainError(f"{where}: negative or non-finite probability {p!r} at {key!r}")
        total += p
    if abs(total - 1.0) > tol:
        raise DomainError(f"{where}: probabilities sum to {total!r}, expected 1")


def support(d: Mapping) -> list:
    return [key for key, p in d.items() if p > SUPPORT_EPS]


def point_mass(key: Hashable) -> dict:
    return {key: 1.0}


def mix(weighted: Iterable[tuple[float, Mapping]]) -> dict:
    """Convex combination of distributions; keys are unioned."""
    out: dict = {}
    for w, d in weighted:
        if w == 0.0:
            continue
        for key, p in d.items():
            out[key] = out.get(key, 0.0) + w * p
    return out


def product_dist(factors: Sequence[Mapping]) -> dict:
    """Joint distribution over key tuples for independent factors."""
    out: dict = {}
    for combo in itertools.product(*(f.items() for f in factors)):
        keys = tuple(k for k, _ in combo)
        p = 1.0
        for _, q in combo:
            p *= q
        out[keys] = out.get(keys, 0.0) + p
    return out


def conditional(joint: Mapping[tuple, float], index: int, value) -> dict:
    """Condition a joint over key tuples on component `index` == value.

    Returns a distribution over the remaining components (tuple with the
    conditioned slot removed). Raises DomainError on a zero marginal.
    """
    rows = {k: p for k, p in joint.items() if k[index] == value}
    total = sum(rows.values())
    if total <= SUPPORT_EPS:
        raise DomainError(f"conditioning on zero-probability value {value!r} at index {index}")
    return {k[:index] + k[index + 1:]: p / total for k, p in rows.items()}


def marginal(joint: Mapping[tuple, float], index: int) -> dict:
    out: dict = {}
    for k, p in joint.items():
        out[k[index]] = out.get(k[index], 0.0) + p
    return out


def insert_at(partial: tuple, index: int, value) -> tuple:
    return partial[:index] + (value,) + partial[index:]


def dist_close(d1: Mapping, d2: Mapping, tol: float) -> bool:
    keys = set(d1) | set(d2)
    return all(abs(d1.get(k, 0.0) - d2.get(k, 0.0)) <= tol for k in keys)


def dist_max_err(d1: Mapping, d2: Mapping) -> float:
    keys = set(d1) | set(d2)
    return max((abs(d1.get(k, 0.0) - d2.get(k, 0.0)) for k in keys), default=0.0)


def simplex_grid(keys: Sequence[Hashable], resolution: int) -> list[dict]:
    """All distributions over `keys` with weights that are multiples of 1/resolution."""
    if resolution < 1:
        raise DomainError("grid resolution must be >= 1")
    n = len(keys)
    out = []
    for cuts in itertools.combinations(range(resolution + n - 1), n - 1):
        counts = []
        prev = -1
        for c in cuts:
            counts.append(c - prev - 1)
            prev = c
        counts.append(resolution + n - 2 - prev)
        out.append({k: c / resolution for k, c in zip(keys, counts) if c > 0})
    return out


def belief_candidates(keys: Sequence[Hashable], grid: int = 4) -> list[dict]:
    """Default candidate beliefs: vertices, uniform, pairwise midpoints, and a grid."""
    cands = [point_mass(k) for k in keys]
    n = len(keys)
    if n > 1:
        cands.append({k: 1.0 / n for k in keys})
        for k1, k2 in itertools.combinations(keys, 2):
            cands.append({k1: 0.5, k2: 0.5})
    if grid >= 1:
        cands.extend(simplex_grid(keys, grid))
    # dedupe on rounded items
    seen = set()
    unique = []
    for d in cands:
        key = tuple(sorted((k, round(p, 12)) for k, p in d.items()))
        if key not in seen:
            seen.add(key)
            unique.append(d)
    return unique
