"""Seeded random-instance generators shared across the property suites."""

import itertools
import random

from cptmech import probs
from cptmech.cpt_core import CptType, Lottery, WeightingFunction
from cptmech.environment import Environment, Prior, utility_w
from cptmech.mechanism import Mechanism, Strategy
from cptmech.mediated import (MediatedMechanism, MediatedStrategy,
                              induced_belief_mediated)

LINEAR = WeightingFunction.linear()


def random_weighting(rng):
    """Strictly increasing piecewise-linear weighting with 1-2 interior kinks."""
    k = rng.randint(1, 2)

    def interior():
        while True:
            xs = sorted(rng.uniform(0.05, 0.95) for _ in range(k))
            if all(b - a > 0.05 for a, b in zip(xs, xs[1:])):
                return xs

    return WeightingFunction.piecewise(
        [(0.0, 0.0), *zip(interior(), interior()), (1.0, 1.0)])


def random_dist(rng, keys, max_support=None):
    keys = list(keys)
    if max_support is not None and len(keys) > max_support:
        keys = rng.sample(keys, max_support)
    weights = [rng.uniform(0.1, 1.0) for _ in keys]
    total = sum(weights)
    return {k: w / total for k, w in zip(keys, weights)}


def random_values(rng, outcomes, mixed_sign=True):
    lo = -5.0 if mixed_sign else 0.0
    return {o: rng.uniform(lo, 5.0) for o in outcomes}


def random_type(rng, outcomes, label="t", eut=False):
    values = random_values(rng, outcomes)
    if eut:
        return CptType(label, values, LINEAR, LINEAR)
    return CptType(label, values, random_weighting(rng), random_weighting(rng))


def random_lottery(rng, outcomes, n_max=8):
    n = rng.randint(1, n_max)
    picks = [rng.choice(list(outcomes)) for _ in range(n)]
    weights = [rng.uniform(0.05, 1.0) for _ in range(n)]
    total = sum(weights)
    return Lottery.from_pairs([(w / total, o) for w, o in zip(weights, picks)])


def random_env(rng, eut=False):
    """Small two-player environment: <=2 types, <=3 allocations, <=3 outcomes."""
    allocations = tuple("abc"[: rng.randint(2, 3)])
    outcome_sets = tuple(tuple(f"g{i}{j}" for j in range(rng.randint(2, 3)))
                         for i in range(2))
    profiles = list(itertools.product(*outcome_sets))
    zeta = {a: random_dist(rng, profiles, max_support=3) for a in allocations}
    type_sets = tuple(
        tuple(random_type(rng, outcome_sets[i], f"t{i}{k}", eut=eut)
              for k in range(rng.randint(1, 2)))
        for i in range(2))
    return Environment(type_sets, allocations, outcome_sets, zeta)


def random_prior(rng, env):
    return Prior(random_dist(rng, env.type_profiles()))


def random_mechanism(rng, env, blind=False):
    signal_sets = tuple(tuple(f"s{i}{k}" for k in range(rng.randint(1, 3)))
                        for i in range(2))
    shared = random_dist(rng, env.allocations)
    h0 = {}
    for psi in itertools.product(*signal_sets):
        h0[psi] = dict(shared) if blind else random_dist(rng, env.allocations)
    return Mechanism(signal_sets, h0)


def random_strategy(rng, env, mech, max_support=2):
    rows = {}
    for i in range(2):
        for label in env.type_labels(i):
            rows[(i, label)] = random_dist(rng, mech.signal_sets[i], max_support)
    return Strategy(rows)


def random_mediated(rng, env, blind=False):
    message_sets = tuple(tuple(f"m{i}{k}" for k in range(rng.randint(1, 2)))
                         for i in range(2))
    mediator = random_dist(rng, itertools.product(*message_sets))
    signal_sets = tuple(tuple(f"s{i}{k}" for k in range(rng.randint(1, 3)))
                        for i in range(2))
    h = {}
    for phi in itertools.product(*message_sets):
        shared = random_dist(rng, env.allocations)
        for psi in itertools.product(*signal_sets):
            h[(phi, psi)] = dict(shared) if blind else random_dist(rng, env.allocations)
    return MediatedMechanism(message_sets, mediator, signal_sets, h)


def random_mediated_strategy(rng, env, M, max_support=2):
    rows = {}
    for i in range(2):
        for message in M.message_sets[i]:
            for label in env.type_labels(i):
                rows[(i, message, label)] = random_dist(rng, M.signal_sets[i],
                                                        max_support)
    return MediatedStrategy(rows)


def best_response_strategy(env, F, M, tau, rounds=3):
    """Iterate pure best responses; a fixed point is a Bayes-Nash equilibrium."""
    for _ in range(rounds):
        rows = {}
        for i in range(env.n_players):
            for message in M.message_sets[i]:
                for label in env.type_labels(i):
                    ctype = env.type_by_label(i, label)
                    best, best_v = None, None
                    for psi in M.signal_sets[i]:
                        mu = induced_belief_mediated(M, env, F, tau, i, message,
                                                     label, psi)
                        v = utility_w(env, i, ctype, mu)
                        if best is None or v > best_v + 1e-12:
                            best, best_v = psi, v
                    rows[(i, message, label)] = probs.point_mass(best)
        tau = MediatedStrategy(rows)
    return tau


def random_mediated_instance(rng):
    """Candidate (env, prior, mechanism, strategy); roughly half certify.

    Half the draws make the allocation rule ignore signals, so any strategy
    is an equilibrium; the other half run best-response iteration and keep
    whatever it converged (or failed to converge) to.
    """
    env = random_env(rng)
    F = random_prior(rng, env)
    blind = rng.random() < 0.5
    M = random_mediated(rng, env, blind=blind)
    tau = random_mediated_strategy(rng, env, M)
    if not blind:
        tau = best_response_strategy(env, F, M, tau)
    return env, F, M, tau


def make_rng(seed):
    return random.Random(seed)
