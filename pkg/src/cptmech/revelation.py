"""Constructive revelation transforms, their verification, and the EUT reduction."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from . import probs
from .cpt_core import CptType, WeightingFunction
from .environment import Environment, Prior, allocation_utility, utility_w
from .mechanism import (CHECK_TOL, EquilibriumReport, Mechanism, Strategy,
                        Verdict, is_bayes_nash, truthful_strategy)
from .mediated import (MediatedMechanism, MediatedStrategy, PubliclyMediatedMechanism,
                       check_belief_dominant_mediated, induced_acf_mediated,
                       is_bayes_nash_mediated, is_dominant_mediated, lift_public,
                       mediator_conditional, truthful_mediated_strategy)
from .probs import DomainError

DEFAULT_SIZE_CAP = 10 ** 6


class TransformSizeError(RuntimeError):
    def __init__(self, message: str, stats: dict):
        super().__init__(f"{message}: {stats}")
        self.stats = stats


@dataclass(frozen=True)
class TransformResult:
    mechanism: Union[MediatedMechanism, PubliclyMediatedMechanism]
    truthful: MediatedStrategy
    message_counts: tuple[int, ...]
    pruned_counts: tuple[int, ...]


def _signal_maps(M, env: Environment, tau: MediatedStrategy, player: int,
                 message, prune: bool) -> list[tuple[tuple, float]]:
    """Enumerate maps (type -> signal) for one received message, with their weights."""
    labels = env.type_labels(player)
    pools = []
    for label in labels:
        row = tau.dist(player, message, label)
        pool = probs.support(row) if prune else list(M.signal_sets[player])
        pools.append([(psi, row.get(psi, 0.0)) for psi in pool])
    out = []
    for combo in itertools.product(*pools):
        weight = 1.0
        for _, w in combo:
            weight *= w
        out.append((tuple(psi for psi, _ in combo), weight))
    return out


def to_direct_mediated(M: MediatedMechanism, env: Environment, tau: MediatedStrategy,
                       prune: bool = True, cap: int = DEFAULT_SIZE_CAP) -> TransformResult:
    """Build the direct mediated mechanism whose messages carry reporting plans.

    New messages are pairs (old message, map type -> signal); the mediator
    draws the plan maps from tau, and the allocation function replays the
    planned signals for the reported types.
    """
    n = env.n_players
    full_count = [len(M.message_sets[i]) * len(M.signal_sets[i]) ** len(env.type_labels(i))
                  for i in range(n)]
    maps = []  # per player: dict message -> list of (map, weight)
    for i in range(n):
        maps.append({phi: _signal_maps(M, env, tau, i, phi, prune)
                     for phi in M.message_sets[i]})

    message_sets = tuple(
        tuple((phi, m) for phi in M.message_sets[i] for m, _ in maps[i][phi])
        for i in range(n)
    )
    n_profiles = 1
    for ms in message_sets:
        n_profiles *= len(ms)
    n_theta = len(env.type_profiles())
    stats = {"messages": [len(ms) for ms in message_sets],
             "profiles": n_profiles, "type_profiles": n_theta}
    if n_profiles * max(n_theta, 1) > cap:
        raise TransformSizeError("transform size cap exceeded", stats)

    mediator: dict = {}
    for phi, d in M.mediator.items():
        if d <= probs.SUPPORT_EPS:
            continue
        per_player = [maps[i][phi[i]] for i in range(n)]
        for combo in itertools.product(*per_player):
            weight = d
            for _, w in combo:
                weight *= w
            if weight <= 0.0:
                continue
            key = tuple((phi[i], combo[i][0]) for i in range(n))
            mediator[key] = mediator.get(key, 0.0) + weight

    labels = [env.type_labels(i) for i in range(n)]
    h: dict = {}
    for phi_prime in itertools.product(*message_sets):
        phi = tuple(p for p, _ in phi_prime)
        for theta in itertools.product(*labels):
            psi = tuple(phi_prime[i][1][labels[i].index(theta[i])] for i in range(n))
            h[(phi_prime, theta)] = dict(M.h[(phi, psi)])

    direct = MediatedMechanism(message_sets, mediator, tuple(labels), h)
    truthful = truthful_mediated_strategy(env, direct)
    return TransformResult(direct, truthful,
                           tuple(len(ms) for ms in message_sets),
                           tuple(full_count[i] - len(message_sets[i]) for i in range(n)))


def to_direct_public(mstar: PubliclyMediatedMechanism, env: Environment,
                     tau: MediatedStrategy, prune: bool = True,
                     cap: int = DEFAULT_SIZE_CAP) -> TransformResult:
    """Public variant: a common message carries every player's reporting plan."""
    n = env.n_players
    lifted_sets = tuple(mstar.messages for _ in range(n))

    class _View:
        message_sets = lifted_sets
        signal_sets = mstar.signal_sets

    maps = []
    for i in range(n):
        maps.append({m: _signal_maps(_View, env, tau, i, m, prune)
                     for m in mstar.messages})

    messages = []
    mediator: dict = {}
    for m, d in mstar.mediator.items():
        per_player = [maps[i][m] for i in range(n)]
        count = 1
        for pool in per_player:
            count *= len(pool)
        for combo in itertools.product(*per_player):
            key = (m,) + tuple(c[0] for c in combo)
            messages.append(key)
            if d <= probs.SUPPORT_EPS:
                continue
            weight = d
            for _, w in combo:
                weight *= w
            if weight > 0.0:
                mediator[key] = mediator.get(key, 0.0) + weight

    labels = [env.type_labels(i) for i in range(n)]
    n_theta = len(env.type_profiles())
    stats = {"messages": len(messages), "type_profiles": n_theta}
    if len(messages) * max(n_theta, 1) > cap:
        raise TransformSizeError("transform size cap exceeded", stats)

    h: dict = {}
    for key in messages:
        m = key[0]
        plans = key[1:]
        for theta in itertools.product(*labels):
            psi = tuple(plans[i][labels[i].index(theta[i])] for i in range(n))
            h[(key, theta)] = dict(mstar.h[(m, psi)])

    full = 1
    for i in range(n):
        full *= len(mstar.signal_sets[i]) ** len(labels[i])
    full *= len(mstar.messages)

    direct = PubliclyMediatedMechanism(tuple(messages),
                                       {k: mediator.get(k, 0.0) for k in messages},
                                       tuple(labels), h)
    truthful = truthful_mediated_strategy(env, lift_public(direct))
    return TransformResult(direct, truthful, (len(messages),),
                           (full - len(messages),))


def _random_belief(rng: random.Random, keys: Sequence) -> dict:
    weights = [rng.random() for _ in keys]
    total = sum(weights)
    return {k: w / total for k, w in zip(keys, weights)}


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    acf_max_err: float
    equilibrium: EquilibriumReport
    identity_max_err: float
    failures: tuple[str, ...]


def _plan_signal(plan, labels: tuple, label: str):
    return plan[labels.index(label)]


def verify_transform(original: Union[MediatedMechanism, PubliclyMediatedMechanism],
                     tau: MediatedStrategy, result: TransformResult, env: Environment,
                     F: Optional[Prior] = None, kind: str = "bayes-nash",
                     n_belief_samples: int = 32, seed: int = 0, grid: int = 4,
                     tol: float = 1e-12) -> VerificationReport:
    """Check a transform output against its source mechanism and strategy.

    Verifies (a) the induced allocation choice functions agree, (b) the
    truthful strategy passes the requested equilibrium check, and (c) the
    belief identity relating transformed and original beliefs on sampled
    opponent-type beliefs.
    """
    failures: list[str] = []
    is_public = isinstance(original, PubliclyMediatedMechanism)
    orig_lifted = lift_public(original) if is_public else original
    new_mech = result.mechanism
    new_lifted = lift_public(new_mech) if isinstance(new_mech, PubliclyMediatedMechanism) \
        else new_mech
    truthful = result.truthful

    # (a) induced ACFs agree; restrict to supp F only for the Bayes-Nash kind
    # (a lifted public mechanism keeps its message labels, so tau's keys carry over)
    f_old = induced_acf_mediated(orig_lifted, env, F, tau).table
    f_new = induced_acf_mediated(new_lifted, env, F, truthful).table
    if kind == "bayes-nash" and F is not None:
        rows = probs.support(F.table)
    else:
        rows = list(f_old)
    acf_err = max((probs.dist_max_err(f_old[t], f_new[t]) for t in rows), default=0.0)
    if acf_err > tol:
        worst = max(rows, key=lambda t: probs.dist_max_err(f_old[t], f_new[t]))
        failures.append(f"induced ACF mismatch {acf_err:.3g} at row {worst!r}")

    # (b) truthful strategy passes the kind's check
    if kind == "bayes-nash":
        if F is None:
            raise DomainError("bayes-nash verification requires a prior")
        report = is_bayes_nash_mediated(new_lifted, env, F, truthful)
    elif kind == "dominant":
        report = is_dominant_mediated(new_lifted, env, truthful)
    elif kind == "belief-dominant":
        report = check_belief_dominant_mediated(new_lifted, env, truthful, grid=grid)
    else:
        raise DomainError(f"unknown kind {kind!r}")
    if not report.holds:
        failures.append(f"truthful strategy fails {kind} check: {report.verdict.value}")

    # (c) belief identity on sampled opponent-type beliefs
    rng = random.Random(seed)
    labels = [env.type_labels(i) for i in range(env.n_players)]
    identity_err = 0.0
    if isinstance(new_mech, PubliclyMediatedMechanism):
        identity_err = _public_identity_err(original, new_mech, env, labels, rng,
                                            n_belief_samples)
    else:
        identity_err = _private_identity_err(original, tau, new_mech, env, labels, rng,
                                             n_belief_samples)
    if identity_err > tol:
        failures.append(f"belief identity violated by {identity_err:.3g}")

    return VerificationReport(not failures, acf_err, report, identity_err,
                              tuple(failures))


def _private_identity_err(M: MediatedMechanism, tau: MediatedStrategy,
                          Md: MediatedMechanism, env: Environment, labels,
                          rng: random.Random, samples: int) -> float:
    n = env.n_players
    err = 0.0
    for i in range(n):
        opp_profiles = env.opponent_profiles(i)
        others = [j for j in range(n) if j != i]
        for phi_prime_i in probs.support(Md.message_marginal(i)):
            phi_i, plan_i = phi_prime_i
            cond_new = mediator_conditional(Md, i, phi_prime_i)
            cond_old = mediator_conditional(M, i, phi_i)
            for report_label in labels[i]:
                psi_i = _plan_signal(plan_i, labels[i], report_label)
                for _ in range(samples):
                    G = _random_belief(rng, opp_profiles)
                    # transformed side
                    lhs: dict = {}
                    for phi_prime_minus, d in cond_new.items():
                        phi_prime = probs.insert_at(phi_prime_minus, i, phi_prime_i)
                        for theta_minus, q in G.items():
                            theta = probs.insert_at(theta_minus, i, report_label)
                            for a, p in Md.h[(phi_prime, theta)].items():
                                lhs[a] = lhs.get(a, 0.0) + d * q * p
                    # original side
                    rhs: dict = {}
                    for phi_minus, d in cond_old.items():
                        phi = probs.insert_at(phi_minus, i, phi_i)
                        for theta_minus, q in G.items():
                            factors = [tau.dist(j, ph, th)
                                       for j, ph, th in zip(others, phi_minus, theta_minus)]
                            for psi_minus, w in probs.product_dist(factors).items():
                                psi = probs.insert_at(psi_minus, i, psi_i)
                                for a, p in M.h[(phi, psi)].items():
                                    rhs[a] = rhs.get(a, 0.0) + d * q * w * p
                    err = max(err, probs.dist_max_err(lhs, rhs))
    return err


def _public_identity_err(mstar: PubliclyMediatedMechanism,
                         mstar_d: PubliclyMediatedMechanism, env: Environment,
                         labels, rng: random.Random, samples: int) -> float:
    n = env.n_players
    err = 0.0
    for i in range(n):
        opp_profiles = env.opponent_profiles(i)
        others = [j for j in range(n) if j != i]
        for key in probs.support(mstar_d.mediator):
            m, plans = key[0], key[1:]
            psi_profiles = [mstar.signal_sets[j] for j in others]
            for report_label in labels[i]:
                psi_i = _plan_signal(plans[i], labels[i], report_label)
                for _ in range(samples):
                    G = _random_belief(rng, opp_profiles)
                    lhs: dict = {}
                    for theta_minus, q in G.items():
                        theta = probs.insert_at(theta_minus, i, report_label)
                        for a, p in mstar_d.h[(key, theta)].items():
                            lhs[a] = lhs.get(a, 0.0) + q * p
                    # push the type belief through the plans onto opponent signals
                    G_sig: dict = {}
                    for theta_minus, q in G.items():
                        psi_minus = tuple(
                            _plan_signal(plans[j], labels[j], th)
                            for j, th in zip(others, theta_minus))
                        G_sig[psi_minus] = G_sig.get(psi_minus, 0.0) + q
                    rhs: dict = {}
                    for psi_minus, q in G_sig.items():
                        psi = probs.insert_at(psi_minus, i, psi_i)
                        for a, p in mstar.h[(m, psi)].items():
                            rhs[a] = rhs.get(a, 0.0) + q * p
                    err = max(err, probs.dist_max_err(lhs, rhs))
            del psi_profiles
    return err


@dataclass(frozen=True)
class ReducedBundle:
    env: Environment
    prior: Optional[Prior]
    mechanism: object
    strategy: object
    type_map: dict


def reduce_environment_eut(env: Environment, F: Optional[Prior], mech, sigma) -> ReducedBundle:
    """Collapse an all-EUT environment so outcomes are the allocations themselves.

    Each type keeps its label and carries the value function u over
    allocations; weighting functions become linear and zeta trivial.
    CPT values of every allocation distribution are preserved.
    """
    linear = WeightingFunction.linear()
    type_sets = []
    type_map = {}
    for i in range(env.n_players):
        row = []
        for t in env.type_sets[i]:
            if not t.is_eut:
                raise DomainError(f"player {i} type {t.label!r} has nonlinear weighting")
            values = {a: allocation_utility(env, i, t, a) for a in env.allocations}
            new_t = CptType(t.label, values, linear, linear)
            row.append(new_t)
            type_map[(i, t.label)] = new_t
        type_sets.append(tuple(row))
    n = env.n_players
    zeta = {a: {(a,) * n: 1.0} for a in env.allocations}
    env2 = Environment(tuple(type_sets), env.allocations,
                       tuple(env.allocations for _ in range(n)), zeta)
    return ReducedBundle(env2, F, mech, sigma, type_map)


@dataclass(frozen=True)
class DecompositionReport:
    ok: bool
    per_message: tuple  # (message, weight, EquilibriumReport)
    mixture_err: float
    failures: tuple[str, ...]


def public_convexity_decomposition_check(mstar: PubliclyMediatedMechanism,
                                         env: Environment, F: Prior,
                                         tol: float = CHECK_TOL) -> DecompositionReport:
    """Check a direct publicly mediated mechanism as a convex decomposition.

    Every supported common message must give a truthfully BNE-implementable
    direct mechanism, and the mediator mixture must reproduce the induced
    allocation choice function.
    """
    labels = tuple(env.type_labels(i) for i in range(env.n_players))
    for i in range(env.n_players):
        if set(mstar.signal_sets[i]) != set(labels[i]):
            raise DomainError(f"mechanism is not direct for player {i}")
    sigma_d = truthful_strategy(env)
    per_message = []
    failures = []
    mixture: dict = {}
    for m in probs.support(mstar.mediator):
        weight = mstar.mediator[m]
        h0 = {theta: dict(mstar.h[(m, theta)]) for theta in env.type_profiles()}
        mech = Mechanism(labels, h0)
        report = is_bayes_nash(mech, env, F, sigma_d, tol=tol)
        per_message.append((m, weight, report))
        if not report.holds:
            failures.append(f"component {m!r} is not truthfully BNE-implementable")
        for theta, row in h0.items():
            acc = mixture.setdefault(theta, {})
            for a, p in row.items():
                acc[a] = acc.get(a, 0.0) + weight * p

    lifted = lift_public(mstar)
    truthful = truthful_mediated_strategy(env, lifted)
    induced = induced_acf_mediated(lifted, env, F, truthful).table
    mixture_err = max((probs.dist_max_err(mixture[t], induced[t])
                       for t in probs.support(F.table)), default=0.0)
    if mixture_err > 1e-9:
        failures.append(f"mediator mixture drifts from induced ACF by {mixture_err:.3g}")
    return DecompositionReport(not failures, tuple(per_message), mixture_err,
                               tuple(failures))
