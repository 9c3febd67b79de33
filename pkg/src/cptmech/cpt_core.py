"""CPT evaluation of finite lotteries: weighting functions, decision weights, values."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .probs import DomainError

PROB_SLACK = 1e-12
SUM_TOL = 1e-9
_MONOTONE_GRID = 1001


@dataclass(frozen=True)
class WeightingFunction:
    """Probability weighting function w: [0,1] -> [0,1], strictly increasing.

    Variants: linear, piecewise linear over breakpoints from (0,0) to (1,1),
    and Prelec w(p) = exp(-(-ln p)^alpha) with w(0) = 0 taken as the limit.
    """

    kind: str
    points: tuple[tuple[float, float], ...] = ()
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind == "linear":
            pass
        elif self.kind == "piecewise":
            pts = self.points
            if len(pts) < 2 or pts[0] != (0.0, 0.0) or pts[-1] != (1.0, 1.0):
                raise DomainError("piecewise breakpoints must run from (0,0) to (1,1)")
            for (p0, w0), (p1, w1) in zip(pts, pts[1:]):
                if not (p1 > p0 and w1 > w0):
                    raise DomainError("piecewise breakpoints must strictly increase in p and w")
        elif self.kind == "prelec":
            if not (self.alpha > 0):
                raise DomainError("prelec exponent must be positive")
        else:
            raise DomainError(f"unknown weighting kind {self.kind!r}")
        # strict monotonicity certified on a fixed grid, not proven
        prev = self(0.0)
        for k in range(1, _MONOTONE_GRID):
            cur = self(k / (_MONOTONE_GRID - 1))
            if not cur > prev:
                raise DomainError(f"weighting not strictly increasing near p={k / (_MONOTONE_GRID - 1)}")
            prev = cur

    @staticmethod
    def linear() -> "WeightingFunction":
        return WeightingFunction("linear")

    @staticmethod
    def piecewise(points: Sequence[Sequence[float]]) -> "WeightingFunction":
        return WeightingFunction("piecewise", tuple((float(p), float(w)) for p, w in points))

    @staticmethod
    def prelec(alpha: float) -> "WeightingFunction":
        return WeightingFunction("prelec", alpha=float(alpha))

    @property
    def is_identity(self) -> bool:
        """True when the function is w(p) = p, whatever its encoding."""
        if self.kind == "linear":
            return True
        if self.kind == "prelec":
            return self.alpha == 1.0
        return all(p == w for p, w in self.points)

    @property
    def kinks(self) -> tuple[float, ...]:
        """Interior breakpoint probabilities (empty for smooth variants)."""
        if self.kind == "piecewise":
            return tuple(p for p, _ in self.points[1:-1])
        return ()

    def __call__(self, p: float) -> float:
        if p < -PROB_SLACK or p > 1.0 + PROB_SLACK:
            raise DomainError(f"probability {p!r} outside [0,1]")
        p = min(max(p, 0.0), 1.0)
        if p == 0.0:
            return 0.0
        if p == 1.0:
            return 1.0
        if self.kind == "linear":
            return p
        if self.kind == "prelec":
            return math.exp(-((-math.log(p)) ** self.alpha))
        ps = [q for q, _ in self.points]
        i = bisect.bisect_right(ps, p) - 1
        p0, w0 = self.points[i]
        if p == p0:
            return w0
        p1, w1 = self.points[i + 1]
        return w0 + (w1 - w0) * (p - p0) / (p1 - p0)


# A value function is just a total map outcome label -> finite real.
ValueFunction = Mapping[str, float]


@dataclass(frozen=True)
class CptType:
    label: str
    values: Mapping[str, float]
    weight_gain: WeightingFunction
    weight_loss: WeightingFunction

    def __post_init__(self):
        for outcome, v in self.values.items():
            if not math.isfinite(v):
                raise DomainError(f"type {self.label!r}: non-finite value at {outcome!r}")

    @property
    def is_eut(self) -> bool:
        return self.weight_gain.is_identity and self.weight_loss.is_identity


@dataclass(frozen=True)
class Lottery:
    """Finite lottery over outcome labels; duplicates and zero entries allowed."""

    entries: tuple[tuple[float, str], ...]

    def __post_init__(self):
        total = 0.0
        for p, _ in self.entries:
            if not math.isfinite(p) or p < -PROB_SLACK:
                raise DomainError(f"lottery probability {p!r} invalid")
            total += p
        if abs(total - 1.0) > SUM_TOL:
            raise DomainError(f"lottery probabilities sum to {total!r}")

    @staticmethod
    def from_pairs(pairs: Sequence[Sequence]) -> "Lottery":
        return Lottery(tuple((float(p), o) for p, o in pairs))

    @staticmethod
    def from_dist(dist: Mapping[str, float]) -> "Lottery":
        return Lottery(tuple((float(p), o) for o, p in dist.items()))


@dataclass(frozen=True)
class DecisionWeights:
    pi_plus: tuple[float, ...]
    pi_minus: tuple[float, ...]
    order: tuple[int, ...]
    gain_count: int


def decision_weights(lottery: Lottery, ctype: CptType) -> DecisionWeights:
    """Rank-dependent decision weights for a lottery under a CPT type.

    Outcomes are sorted by descending value (ties by original position);
    v >= 0 counts as a gain. pi+ are successive differences of w+ over
    top-down cumulative probabilities, pi- of w- bottom-up.
    """
    entries = lottery.entries
    k = len(entries)
    vals = [ctype.values[o] for _, o in entries]
    order = tuple(sorted(range(k), key=lambda j: (-vals[j], j)))
    gain_count = sum(1 for j in order if vals[j] >= 0.0)
    probs = [entries[j][0] for j in order]
    wg, wl = ctype.weight_gain, ctype.weight_loss

    pi_plus = []
    cum = 0.0
    prev = 0.0
    for j in range(gain_count):
        cum += probs[j]
        cur = wg(min(cum, 1.0))
        pi_plus.append(cur - prev)
        prev = cur

    pi_minus = [0.0] * (k - gain_count)
    cum = 0.0
    prev = 0.0
    for j in range(k - 1, gain_count - 1, -1):
        cum += probs[j]
        cur = wl(min(cum, 1.0))
        pi_minus[j - gain_count] = cur - prev
        prev = cur

    return DecisionWeights(tuple(pi_plus), tuple(pi_minus), order, gain_count)


def cpt_value(lottery: Lottery, ctype: CptType) -> float:
    dw = decision_weights(lottery, ctype)
    vals = [ctype.values[o] for _, o in lottery.entries]
    total = 0.0
    for j, pi in enumerate(dw.pi_plus):
        total += pi * vals[dw.order[j]]
    for j, pi in enumerate(dw.pi_minus):
        total += pi * vals[dw.order[dw.gain_count + j]]
    return total


def cpt_value_cumulative(lottery: Lottery, ctype: CptType) -> float:
    """CPT value by the telescoped cumulative form; equals cpt_value."""
    entries = lottery.entries
    k = len(entries)
    vals_in = [ctype.values[o] for _, o in entries]
    order = sorted(range(k), key=lambda j: (-vals_in[j], j))
    vals = [vals_in[j] for j in order]
    probs = [entries[j][0] for j in order]
    jr = sum(1 for v in vals if v >= 0.0)
    wg, wl = ctype.weight_gain, ctype.weight_loss

    # cumulative top-down P[j] = p_1 + .. + p_{j+1}; bottom-up Q[j] = p_{j+1} + .. + p_k
    P = []
    acc = 0.0
    for p in probs:
        acc += p
        P.append(min(acc, 1.0))
    Q = [0.0] * k
    acc = 0.0
    for j in range(k - 1, -1, -1):
        acc += probs[j]
        Q[j] = min(acc, 1.0)

    total = 0.0
    for j in range(jr - 1):
        total += wg(P[j]) * (vals[j] - vals[j + 1])
    if jr > 0:
        total += wg(P[jr - 1]) * vals[jr - 1]
    if jr < k:
        total += wl(Q[jr]) * vals[jr]
        for j in range(jr, k - 1):
            total += wl(Q[j + 1]) * (vals[j + 1] - vals[j])
    return total


def expected_utility(lottery: Lottery, values: ValueFunction) -> float:
    return sum(p * values[o] for p, o in lottery.entries)
