"""Mediated and publicly mediated mechanisms with their equilibrium checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from . import probs
from .environment import Environment, Prior, prior_conditional, utility_w
from .mechanism import (CHECK_TOL, EquilibriumReport, InducedAcf, Mechanism,
                        Verdict, Witness, _finish)
from .probs import DomainError


@dataclass(frozen=True)
class MediatedMechanism:
    message_sets: tuple[tuple, ...]
    mediator: Mapping[tuple, float]  # D over message profiles
    signal_sets: tuple[tuple, ...]
    h: Mapping[tuple, Mapping[str, float]]  # (message profile, signal profile) -> dist

    def __post_init__(self):
        probs.validate_dist(self.mediator, where="mediator")
        for phi in itertools.product(*self.message_sets):
            for psi in itertools.product(*self.signal_sets):
                row = self.h.get((phi, psi))
                if row is None:
                    raise DomainError(f"h missing row for {(phi, psi)!r}")
                probs.validate_dist(row, where=f"h{(phi, psi)!r}")

    def message_marginal(self, player: int) -> dict:
        return probs.marginal(self.mediator, player)

    def opponent_signal_profiles(self, player: int) -> list[tuple]:
        sets = [s for i, s in enumerate(self.signal_sets) if i != player]
        return list(itertools.product(*sets))


@dataclass(frozen=True)
class PubliclyMediatedMechanism:
    messages: tuple
    mediator: Mapping  # D* over the common message set
    signal_sets: tuple[tuple, ...]
    h: Mapping[tuple, Mapping[str, float]]  # (message, signal profile) -> dist

    def __post_init__(self):
        probs.validate_dist(self.mediator, where="mediator")
        for m in self.messages:
            for psi in itertools.product(*self.signal_sets):
                row = self.h.get((m, psi))
                if row is None:
                    raise DomainError(f"h missing row for {(m, psi)!r}")
                probs.validate_dist(row, where=f"h{(m, psi)!r}")


@dataclass(frozen=True)
class MediatedStrategy:
    rows: Mapping[tuple, Mapping]  # (player, message, type_label) -> dist over signals

    def __post_init__(self):
        for key, row in self.rows.items():
            probs.validate_dist(row, where=f"mediated strategy{key!r}")

    def dist(self, player: int, message, type_label: str) -> Mapping:
        return self.rows[(player, message, type_label)]


def lift_public(mstar: PubliclyMediatedMechanism) -> MediatedMechanism:
    """Embed a publicly mediated mechanism as one with a diagonal mediator."""
    n = len(mstar.signal_sets)
    message_sets = tuple(mstar.messages for _ in range(n))
    mediator = {(m,) * n: p for m, p in mstar.mediator.items()}
    h = {}
    for phi in itertools.product(*message_sets):
        for psi in itertools.product(*mstar.signal_sets):
            # off-diagonal profiles have probability 0; route them through the
            # first component so h stays total
            h[(phi, psi)] = dict(mstar.h[(phi[0], psi)])
    return MediatedMechanism(message_sets, mediator, mstar.signal_sets, h)


SINGLETON_MESSAGE = "*"


def lift_unmediated(mech: Mechanism) -> MediatedMechanism:
    """Embed a non-mediated mechanism via singleton message sets."""
    n = len(mech.signal_sets)
    phi = (SINGLETON_MESSAGE,) * n
    h = {(phi, psi): dict(row) for psi, row in mech.h0.items()}
    return MediatedMechanism(tuple((SINGLETON_MESSAGE,) for _ in range(n)),
                             {phi: 1.0}, mech.signal_sets, h)


def lift_unmediated_public(mech: Mechanism) -> PubliclyMediatedMechanism:
    h = {(SINGLETON_MESSAGE, psi): dict(row) for psi, row in mech.h0.items()}
    return PubliclyMediatedMechanism((SINGLETON_MESSAGE,), {SINGLETON_MESSAGE: 1.0},
                                     mech.signal_sets, h)


def lift_strategy(sigma, M: MediatedMechanism) -> MediatedStrategy:
    """Extend a message-independent strategy to every message of M."""
    rows = {}
    for (player, label), dist in sigma.rows.items():
        for message in M.message_sets[player]:
            rows[(player, message, label)] = dict(dist)
    return MediatedStrategy(rows)


def truthful_mediated_strategy(env: Environment, M: MediatedMechanism) -> MediatedStrategy:
    """Report the true type on every message; defined only for direct mechanisms."""
    for i in range(env.n_players):
        if set(M.signal_sets[i]) != set(env.type_labels(i)):
            raise DomainError(f"mechanism is not direct for player {i}")
    rows = {}
    for i in range(env.n_players):
        for message in M.message_sets[i]:
            for label in env.type_labels(i):
                rows[(i, message, label)] = probs.point_mass(label)
    return MediatedStrategy(rows)


def mediator_conditional(M: MediatedMechanism, player: int, message) -> dict:
    """D_{-i}(. | phi_i) over opponent message profiles."""
    return probs.conditional(M.mediator, player, message)


def _opponent_signal_dist(M: MediatedMechanism, tau: MediatedStrategy, player: int,
                          phi_minus: tuple, theta_minus: tuple) -> dict:
    others = [j for j in range(len(M.signal_sets)) if j != player]
    factors = [tau.dist(j, ph, th) for j, ph, th in zip(others, phi_minus, theta_minus)]
    return probs.product_dist(factors)


def induced_belief_mediated(M: MediatedMechanism, env: Environment, F: Prior,
                            tau: MediatedStrategy, player: int, message,
                            type_label: str, signal) -> dict:
    """Allocation distribution faced after receiving `message` and signalling `signal`."""
    cond_msgs = mediator_conditional(M, player, message)
    cond_types = prior_conditional(F, player, type_label)
    mu: dict = {}
    for phi_minus, d in cond_msgs.items():
        if d <= probs.SUPPORT_EPS:
            continue
        phi = probs.insert_at(phi_minus, player, message)
        for theta_minus, q in cond_types.items():
            if q <= probs.SUPPORT_EPS:
                continue
            for psi_minus, w in _opponent_signal_dist(M, tau, player, phi_minus,
                                                      theta_minus).items():
                if w <= 0.0:
                    continue
                psi = probs.insert_at(psi_minus, player, signal)
                for a, p in M.h[(phi, psi)].items():
                    mu[a] = mu.get(a, 0.0) + d * q * w * p
    return mu


def is_bayes_nash_mediated(M: MediatedMechanism, env: Environment, F: Prior,
                           tau: MediatedStrategy, tol: float = CHECK_TOL) -> EquilibriumReport:
    witnesses: list[Witness] = []
    for i in range(env.n_players):
        for message in probs.support(M.message_marginal(i)):
            for label in F.supported_labels(i):
                ctype = env.type_by_label(i, label)
                values = {psi: utility_w(env, i, ctype,
                                         induced_belief_mediated(M, env, F, tau, i,
                                                                 message, label, psi))
                          for psi in M.signal_sets[i]}
                for psi in probs.support(tau.dist(i, message, label)):
                    for alt, v_alt in values.items():
                        gap = v_alt - values[psi]
                        if gap > tol:
                            witnesses.append(Witness(i, label, psi, alt, gap,
                                                     message=message))
    return _finish(witnesses, Verdict.HOLDS, Verdict.FAILS)


def _pure_opponent_belief(M: MediatedMechanism, player: int, message, signal,
                          psi_minus: tuple) -> dict:
    mu: dict = {}
    for phi_minus, d in mediator_conditional(M, player, message).items():
        if d <= probs.SUPPORT_EPS:
            continue
        phi = probs.insert_at(phi_minus, player, message)
        psi = probs.insert_at(psi_minus, player, signal)
        for a, p in M.h[(phi, psi)].items():
            mu[a] = mu.get(a, 0.0) + d * p
    return mu


def is_dominant_mediated(M: MediatedMechanism, env: Environment, tau: MediatedStrategy,
                         tol: float = CHECK_TOL) -> EquilibriumReport:
    witnesses: list[Witness] = []
    for i in range(env.n_players):
        for message in probs.support(M.message_marginal(i)):
            for ctype in env.type_sets[i]:
                supported = probs.support(tau.dist(i, message, ctype.label))
                for psi_minus in M.opponent_signal_profiles(i):
                    values = {psi: utility_w(env, i, ctype,
                                             _pure_opponent_belief(M, i, message, psi,
                                                                   psi_minus))
                              for psi in M.signal_sets[i]}
                    for psi in supported:
                        for alt, v_alt in values.items():
                            gap = v_alt - values[psi]
                            if gap > tol:
                                witnesses.append(Witness(i, ctype.label, psi, alt, gap,
                                                         message=message,
                                                         opponents=psi_minus))
    return _finish(witnesses, Verdict.HOLDS, Verdict.FAILS)


def check_belief_dominant_mediated(M: MediatedMechanism, env: Environment,
                                   tau: MediatedStrategy,
                                   candidates: Optional[Mapping[int, Sequence[Mapping]]] = None,
                                   grid: int = 4,
                                   tol: float = CHECK_TOL) -> EquilibriumReport:
    witnesses: list[Witness] = []
    for i in range(env.n_players):
        profiles = M.opponent_signal_profiles(i)
        beliefs = candidates[i] if candidates is not None else \
            probs.belief_candidates(profiles, grid)
        for message in probs.support(M.message_marginal(i)):
            for ctype in env.type_sets[i]:
                supported = probs.support(tau.dist(i, message, ctype.label))
                for G in beliefs:
                    values = {}
                    for psi in M.signal_sets[i]:
                        mu = probs.mix((g, _pure_opponent_belief(M, i, message, psi, pm))
                                       for pm, g in G.items())
                        values[psi] = utility_w(env, i, ctype, mu)
                    for psi in supported:
                        for alt, v_alt in values.items():
                            gap = v_alt - values[psi]
                            if gap > tol:
                                witnesses.append(Witness(i, ctype.label, psi, alt, gap,
                                                         message=message,
                                                         belief=tuple(sorted(G.items()))))
    return _finish(witnesses, Verdict.GRID_VERIFIED, Verdict.REFUTED)


def induced_acf_mediated(M: MediatedMechanism, env: Environment, F: Optional[Prior],
                         tau: MediatedStrategy) -> InducedAcf:
    table = {}
    for theta in env.type_profiles():
        row: dict = {}
        for phi, d in M.mediator.items():
            if d <= probs.SUPPORT_EPS:
                continue
            joint = probs.product_dist([tau.dist(i, ph, th)
                                        for i, (ph, th) in enumerate(zip(phi, theta))])
            for psi, w in joint.items():
                if w <= 0.0:
                    continue
                for a, p in M.h[(phi, psi)].items():
                    row[a] = row.get(a, 0.0) + d * w * p
        table[theta] = row
    flagged = frozenset()
    if F is not None:
        supp = set(probs.support(F.table))
        flagged = frozenset(t for t in table if t not in supp)
    return InducedAcf(table, flagged)
