"""Players, types, allocations, outcome mapping zeta, priors, and induced utilities."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from . import probs
from .cpt_core import CptType, Lottery, cpt_value
from .probs import DomainError

# An allocation choice function maps type-label profiles to distributions over
# allocations; a social choice function maps them to joint outcome distributions.
Acf = Mapping[tuple, Mapping[str, float]]
Scf = Mapping[tuple, Mapping[tuple, float]]


@dataclass(frozen=True)
class Environment:
    type_sets: tuple[tuple[CptType, ...], ...]
    allocations: tuple[str, ...]
    outcome_sets: tuple[tuple[str, ...], ...]
    zeta: Mapping[str, Mapping[tuple, float]]  # allocation -> joint dist over prod(Gamma_i)

    def __post_init__(self):
        n = self.n_players
        if len(self.outcome_sets) != n:
            raise DomainError("outcome_sets must list one outcome set per player")
        for alloc in self.allocations:
            joint = self.zeta.get(alloc)
            if joint is None:
                raise DomainError(f"zeta missing allocation {alloc!r}")
            probs.validate_dist(joint, where=f"zeta({alloc})")
            for profile in joint:
                if len(profile) != n:
                    raise DomainError(f"zeta({alloc}) outcome profile of wrong arity")
                for i, gamma in enumerate(profile):
                    if gamma not in self.outcome_sets[i]:
                        raise DomainError(f"zeta({alloc}) uses unknown outcome {gamma!r} for player {i}")
        for i, types in enumerate(self.type_sets):
            labels = [t.label for t in types]
            if len(set(labels)) != len(labels):
                raise DomainError(f"player {i}: duplicate type labels")
            for t in types:
                missing = [g for g in self.outcome_sets[i] if g not in t.values]
                if missing:
                    raise DomainError(f"type {t.label!r} lacks values for outcomes {missing}")
        marginals = tuple(
            {a: probs.marginal(self.zeta[a], i) for a in self.allocations} for i in range(n)
        )
        object.__setattr__(self, "_marginals", marginals)

    @property
    def n_players(self) -> int:
        return len(self.type_sets)

    def type_labels(self, player: int) -> tuple[str, ...]:
        return tuple(t.label for t in self.type_sets[player])

    def type_by_label(self, player: int, label: str) -> CptType:
        for t in self.type_sets[player]:
            if t.label == label:
                return t
        raise DomainError(f"player {player} has no type labelled {label!r}")

    def type_profiles(self) -> list[tuple]:
        return list(itertools.product(*(self.type_labels(i) for i in range(self.n_players))))

    def opponent_profiles(self, player: int) -> list[tuple]:
        labels = [self.type_labels(i) for i in range(self.n_players) if i != player]
        return list(itertools.product(*labels))

    @staticmethod
    def from_marginals(type_sets, allocations, outcome_sets,
                       zeta_marginals: Sequence[Mapping[str, Mapping[str, float]]]) -> "Environment":
        """Build an environment from per-player zeta factors, expanded to a product joint."""
        joint = {
            a: probs.product_dist([zeta_marginals[i][a] for i in range(len(outcome_sets))])
            for a in allocations
        }
        return Environment(tuple(tuple(ts) for ts in type_sets), tuple(allocations),
                           tuple(tuple(o) for o in outcome_sets), joint)


@dataclass(frozen=True)
class Prior:
    table: Mapping[tuple, float]

    def __post_init__(self):
        probs.validate_dist(self.table, where="prior")

    @staticmethod
    def independent(marginals: Sequence[Mapping[str, float]]) -> "Prior":
        return Prior(probs.product_dist(marginals))

    def marginal(self, player: int) -> dict:
        return probs.marginal(self.table, player)

    def supported_labels(self, player: int) -> list[str]:
        return probs.support(self.marginal(player))


def prior_conditional(F: Prior, player: int, type_label: str) -> dict:
    """Bayes conditional F_{-i}(. | theta_i) over opponent type profiles."""
    return probs.conditional(F.table, player, type_label)


def zeta_marginal(env: Environment, player: int) -> dict:
    """Per-allocation marginal of zeta onto player i's outcome set."""
    if not 0 <= player < env.n_players:
        raise DomainError(f"no player {player}")
    return env._marginals[player]


def pushforward(env: Environment, player: int, mu: Mapping[str, float]) -> Lottery:
    """Outcome lottery L_i(mu) induced by an allocation distribution, coalesced."""
    marg = zeta_marginal(env, player)
    dist = probs.mix((w, marg[a]) for a, w in mu.items())
    return Lottery.from_dist(dist)


def utility_w(env: Environment, player: int, ctype: CptType, mu: Mapping[str, float]) -> float:
    """W_i^theta(mu): CPT value of the pushforward lottery."""
    return cpt_value(pushforward(env, player, mu), ctype)


def allocation_utility(env: Environment, player: int, ctype: CptType, alloc: str) -> float:
    """u_i^theta(alpha): value of the point-mass allocation."""
    return utility_w(env, player, ctype, probs.point_mass(alloc))


def acf_to_scf(env: Environment, f: Acf) -> dict:
    return {theta: probs.mix((w, env.zeta[a]) for a, w in row.items()) for theta, row in f.items()}


@dataclass(frozen=True)
class ScfFeasibility:
    acf: Optional[dict]
    infeasible_profiles: tuple


def scf_feasible(env: Environment, g: Scf) -> ScfFeasibility:
    """Search a witness f with acf_to_scf(f) = g, one LP feasibility per type profile."""
    from . import numerics

    all_profiles = sorted({p for joint in env.zeta.values() for p in joint} |
                          {p for row in g.values() for p in row})
    witness = {}
    bad = []
    for theta in g:
        A_rows = []
        b = []
        for gamma in all_profiles:
            A_rows.append([env.zeta[a].get(gamma, 0.0) for a in env.allocations])
            b.append(g[theta].get(gamma, 0.0))
        A_rows.append([1.0] * len(env.allocations))
        b.append(1.0)
        res = numerics.lp_feasible(A_rows, b)
        if res.status == "feasible":
            witness[theta] = {a: max(x, 0.0) for a, x in zip(env.allocations, res.x)}
        else:
            bad.append(theta)
    if bad:
        return ScfFeasibility(None, tuple(bad))
    return ScfFeasibility(witness, ())
