"""Non-mediated mechanisms, strategies, induced beliefs, and equilibrium checks."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from . import probs
from .environment import Environment, Prior, prior_conditional, utility_w
from .probs import DomainError

CHECK_TOL = 1e-9


class Verdict(enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    GRID_VERIFIED = "GridVerified"
    REFUTED = "Refuted"


@dataclass(frozen=True)
class Witness:
    player: int
    type_label: str
    signal: object
    deviation: object
    gap: float
    message: object = None
    belief: Optional[tuple] = None
    opponents: object = None

    def describe(self) -> str:
        parts = [f"player {self.player}", f"type {self.type_label}",
                 f"signal {self.signal!r} -> {self.deviation!r}", f"gap {self.gap:.6g}"]
        if self.message is not None:
            parts.insert(2, f"message {self.message!r}")
        if self.belief is not None:
            parts.append(f"belief {dict(self.belief)!r}")
        if self.opponents is not None:
            parts.append(f"against {self.opponents!r}")
        return ", ".join(parts)


@dataclass(frozen=True)
class EquilibriumReport:
    verdict: Verdict
    witnesses: tuple[Witness, ...] = ()

    @property
    def holds(self) -> bool:
        return self.verdict in (Verdict.HOLDS, Verdict.GRID_VERIFIED)


def _finish(witnesses: list[Witness], good: Verdict, bad: Verdict) -> EquilibriumReport:
    if witnesses:
        witnesses.sort(key=lambda w: -w.gap)
        return EquilibriumReport(bad, tuple(witnesses))
    return EquilibriumReport(good)


@dataclass(frozen=True)
class Mechanism:
    signal_sets: tuple[tuple, ...]
    h0: Mapping[tuple, Mapping[str, float]]

    def __post_init__(self):
        for psi in itertools.product(*self.signal_sets):
            row = self.h0.get(psi)
            if row is None:
                raise DomainError(f"h0 missing row for signal profile {psi!r}")
            probs.validate_dist(row, where=f"h0{psi!r}")

    def signal_profiles(self):
        return itertools.product(*self.signal_sets)

    def opponent_signal_profiles(self, player: int) -> list[tuple]:
        sets = [s for i, s in enumerate(self.signal_sets) if i != player]
        return list(itertools.product(*sets))


@dataclass(frozen=True)
class Strategy:
    rows: Mapping[tuple, Mapping]  # (player, type_label) -> dist over signals

    def __post_init__(self):
        for key, row in self.rows.items():
            probs.validate_dist(row, where=f"strategy{key!r}")

    def dist(self, player: int, type_label: str) -> Mapping:
        return self.rows[(player, type_label)]


def truthful_strategy(env: Environment) -> Strategy:
    rows = {}
    for i in range(env.n_players):
        for label in env.type_labels(i):
            rows[(i, label)] = probs.point_mass(label)
    return Strategy(rows)


def as_direct(mech: Mechanism, env: Environment) -> bool:
    return all(set(mech.signal_sets[i]) == set(env.type_labels(i))
               for i in range(env.n_players))


def _opponent_signal_dist(mech: Mechanism, sigma: Strategy, player: int,
                          theta_minus: tuple) -> dict:
    """Distribution over opponents' signal profiles given their types."""
    others = [j for j in range(len(mech.signal_sets)) if j != player]
    factors = [sigma.dist(j, th) for j, th in zip(others, theta_minus)]
    return probs.product_dist(factors)


def induced_belief(mech: Mechanism, env: Environment, F: Prior, sigma: Strategy,
                   player: int, type_label: str, signal) -> dict:
    """Allocation distribution faced by (type, signal) given the prior and opponents."""
    cond = prior_conditional(F, player, type_label)
    mu: dict = {}
    for theta_minus, q in cond.items():
        if q <= probs.SUPPORT_EPS:
            continue
        for psi_minus, w in _opponent_signal_dist(mech, sigma, player, theta_minus).items():
            if w <= 0.0:
                continue
            psi = probs.insert_at(psi_minus, player, signal)
            for a, p in mech.h0[psi].items():
                mu[a] = mu.get(a, 0.0) + q * w * p
    return mu


def is_bayes_nash(mech: Mechanism, env: Environment, F: Prior, sigma: Strategy,
                  tol: float = CHECK_TOL) -> EquilibriumReport:
    witnesses: list[Witness] = []
    for i in range(env.n_players):
        for label in F.supported_labels(i):
            ctype = env.type_by_label(i, label)
            values = {psi: utility_w(env, i, ctype,
                                     induced_belief(mech, env, F, sigma, i, label, psi))
                      for psi in mech.signal_sets[i]}
            for psi in probs.support(sigma.dist(i, label)):
                for alt, v_alt in values.items():
                    gap = v_alt - values[psi]
                    if gap > tol:
                        witnesses.append(Witness(i, label, psi, alt, gap))
    return _finish(witnesses, Verdict.HOLDS, Verdict.FAILS)


def is_dominant(mech: Mechanism, env: Environment, sigma: Strategy,
                tol: float = CHECK_TOL) -> EquilibriumReport:
    """Every supported signal optimal against every pure opponent profile, all own types."""
    witnesses: list[Witness] = []
    for i in range(env.n_players):
        for ctype in env.type_sets[i]:
            supported = probs.support(sigma.dist(i, ctype.label))
            for psi_minus in mech.opponent_signal_profiles(i):
                values = {psi: utility_w(env, i, ctype,
                                         mech.h0[probs.insert_at(psi_minus, i, psi)])
                          for psi in mech.signal_sets[i]}
                for psi in supported:
                    for alt, v_alt in values.items():
                        gap = v_alt - values[psi]
                        if gap > tol:
                            witnesses.append(Witness(i, ctype.label, psi, alt, gap,
                                                     opponents=psi_minus))
    return _finish(witnesses, Verdict.HOLDS, Verdict.FAILS)


def check_belief_dominant(mech: Mechanism, env: Environment, sigma: Strategy,
                          candidates: Optional[Mapping[int, Sequence[Mapping]]] = None,
                          grid: int = 4, tol: float = CHECK_TOL) -> EquilibriumReport:
    """Refute belief-dominance on candidate beliefs, or report GridVerified.

    Candidates per player default to vertices, uniform, pairwise midpoints,
    and a simplex grid over opponent signal profiles. Sound as a refuter,
    incomplete as a verifier.
    """
    witnesses: list[Witness] = []
    for i in range(env.n_players):
        profiles = mech.opponent_signal_profiles(i)
        beliefs = candidates[i] if candidates is not None else \
            probs.belief_candidates(profiles, grid)
        for ctype in env.type_sets[i]:
            supported = probs.support(sigma.dist(i, ctype.label))
            for G in beliefs:
                values = {}
                for psi in mech.signal_sets[i]:
                    mu = probs.mix((g, mech.h0[probs.insert_at(pm, i, psi)])
                                   for pm, g in G.items())
                    values[psi] = utility_w(env, i, ctype, mu)
                for psi in supported:
                    for alt, v_alt in values.items():
                        gap = v_alt - values[psi]
                        if gap > tol:
                            witnesses.append(Witness(i, ctype.label, psi, alt, gap,
                                                     belief=tuple(sorted(G.items()))))
    return _finish(witnesses, Verdict.GRID_VERIFIED, Verdict.REFUTED)


@dataclass(frozen=True)
class InducedAcf:
    table: dict
    unconstrained: frozenset  # type profiles outside supp F


def induced_acf(mech: Mechanism, env: Environment, F: Optional[Prior],
                sigma: Strategy) -> InducedAcf:
    table = {}
    for theta in env.type_profiles():
        joint = probs.product_dist([sigma.dist(i, th) for i, th in enumerate(theta)])
        row: dict = {}
        for psi, w in joint.items():
            if w <= 0.0:
                continue
            for a, p in mech.h0[psi].items():
                row[a] = row.get(a, 0.0) + w * p
        table[theta] = row
    flagged = frozenset()
    if F is not None:
        supp = set(probs.support(F.table))
        flagged = frozenset(t for t in table if t not in supp)
    return InducedAcf(table, flagged)
