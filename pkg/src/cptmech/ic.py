"""Incentive-compatibility predicates and coupling-matrix feasibility machinery."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from . import numerics, probs
from .environment import Acf, Environment, Prior, prior_conditional, utility_w
from .mechanism import CHECK_TOL, EquilibriumReport, Verdict, Witness, _finish
from .mediated import (MediatedMechanism, PubliclyMediatedMechanism, lift_public,
                       is_bayes_nash_mediated, truthful_mediated_strategy)
from .probs import DomainError

# A per-player representation is a list of (coefficient, component ACF) pairs;
# a convex representation of f supplies one such list per player.
PlayerRepresentation = Sequence[tuple[float, Acf]]


def report_belief(pi: Acf, player: int, env: Environment, F: Prior,
                  type_label: str, report_label: str) -> dict:
    """Allocation distribution when holding type_label but reporting report_label."""
    mu: dict = {}
    for theta_minus, q in prior_conditional(F, player, type_label).items():
        theta = probs.insert_at(theta_minus, player, report_label)
        for a, p in pi[theta].items():
            mu[a] = mu.get(a, 0.0) + q * p
    return mu


def is_f_incentive_compatible(pi: Acf, player: int, env: Environment, F: Prior,
                              tol: float = CHECK_TOL) -> tuple[bool, list[Witness]]:
    witnesses = []
    for label in F.supported_labels(player):
        ctype = env.type_by_label(player, label)
        truthful = utility_w(env, player, ctype,
                             report_belief(pi, player, env, F, label, label))
        for alt in env.type_labels(player):
            v = utility_w(env, player, ctype,
                          report_belief(pi, player, env, F, label, alt))
            if v - truthful > tol:
                witnesses.append(Witness(player, label, label, alt, v - truthful))
    witnesses.sort(key=lambda w: -w.gap)
    return (not witnesses, witnesses)


def is_dominant_ic(pi: Acf, player: int, env: Environment,
                   tol: float = CHECK_TOL) -> tuple[bool, list[Witness]]:
    witnesses = []
    for ctype in env.type_sets[player]:
        for theta_minus in env.opponent_profiles(player):
            truthful = utility_w(env, player, ctype,
                                 pi[probs.insert_at(theta_minus, player, ctype.label)])
            for alt in env.type_labels(player):
                v = utility_w(env, player, ctype,
                              pi[probs.insert_at(theta_minus, player, alt)])
                if v - truthful > tol:
                    witnesses.append(Witness(player, ctype.label, ctype.label, alt,
                                             v - truthful, opponents=theta_minus))
    witnesses.sort(key=lambda w: -w.gap)
    return (not witnesses, witnesses)


def check_belief_dominant_ic(pi: Acf, player: int, env: Environment,
                             candidates: Optional[Sequence[Mapping]] = None,
                             grid: int = 4, tol: float = CHECK_TOL) -> EquilibriumReport:
    """Refute belief-dominant IC on candidate opponent-type beliefs, else GridVerified."""
    profiles = env.opponent_profiles(player)
    beliefs = candidates if candidates is not None else probs.belief_candidates(profiles, grid)
    witnesses = []
    for ctype in env.type_sets[player]:
        for G in beliefs:
            values = {}
            for alt in env.type_labels(player):
                mu = probs.mix((q, pi[probs.insert_at(tm, player, alt)])
                               for tm, q in G.items())
                values[alt] = utility_w(env, player, ctype, mu)
            truthful = values[ctype.label]
            for alt, v in values.items():
                if v - truthful > tol:
                    witnesses.append(Witness(player, ctype.label, ctype.label, alt,
                                             v - truthful, belief=tuple(sorted(G.items()))))
    return _finish(witnesses, Verdict.GRID_VERIFIED, Verdict.REFUTED)


def build_public_mediated_from_convex(f: Acf, components: Sequence[tuple[float, Acf]],
                                      env: Environment, F: Prior,
                                      tol: float = CHECK_TOL) -> PubliclyMediatedMechanism:
    """Direct publicly mediated mechanism drawing an IC component per its coefficient."""
    labels = tuple(env.type_labels(i) for i in range(env.n_players))
    mixture: dict = {}
    for m, (coef, comp) in enumerate(components):
        if coef < -probs.SUPPORT_EPS:
            raise DomainError(f"component {m} has negative coefficient")
        for i in range(env.n_players):
            ok, witnesses = is_f_incentive_compatible(comp, i, env, F, tol=tol)
            if not ok:
                raise DomainError(f"component {m} fails IC for player {i}: "
                                  f"{witnesses[0].describe()}")
        for theta, row in comp.items():
            acc = mixture.setdefault(theta, {})
            for a, p in row.items():
                acc[a] = acc.get(a, 0.0) + coef * p
    for theta in probs.support(F.table):
        if not probs.dist_close(mixture.get(theta, {}), f[theta], 1e-9):
            raise DomainError(f"components do not mix to f at {theta!r}")

    messages = tuple(range(len(components)))
    mediator = {m: coef for m, (coef, _) in enumerate(components)}
    h = {(m, theta): dict(comp[theta])
         for m, (_, comp) in enumerate(components) for theta in env.type_profiles()}
    mech = PubliclyMediatedMechanism(messages, mediator, labels, h)
    lifted = lift_public(mech)
    report = is_bayes_nash_mediated(lifted, env, F, truthful_mediated_strategy(env, lifted))
    if not report.holds:
        raise DomainError("constructed mechanism unexpectedly fails the truthful check")
    return mech


def _check_rep_consistency(theta: tuple, rep: Sequence[PlayerRepresentation], f: Acf,
                           env: Environment, tol: float = 1e-9) -> None:
    for i, player_rep in enumerate(rep):
        total = sum(coef for coef, _ in player_rep)
        if abs(total - 1.0) > tol:
            raise DomainError(f"player {i} coefficients sum to {total!r}")
        mixed: dict = {}
        for coef, comp in player_rep:
            for a, p in comp[theta].items():
                mixed[a] = mixed.get(a, 0.0) + coef * p
        if not probs.dist_close(mixed, f[theta], tol):
            raise DomainError(f"player {i} representation inconsistent with f at {theta!r}")


def canonical_coupling(theta: tuple, rep: Sequence[PlayerRepresentation], f: Acf,
                       env: Environment) -> tuple[dict, dict]:
    """The explicit theta-coupling: couple components through f itself.

    Returns (abar over index tuples m, kernel m -> distribution over allocations).
    """
    _check_rep_consistency(theta, rep, f, env)
    n = len(rep)
    index_sets = [range(len(player_rep)) for player_rep in rep]
    abar: dict = {}
    kernels: dict = {}
    n_alloc = len(env.allocations)
    for m in itertools.product(*index_sets):
        xi: dict = {}
        for a in env.allocations:
            fa = f[theta].get(a, 0.0)
            if fa <= 0.0:
                continue
            prod = 1.0
            for i, mi in enumerate(m):
                coef, comp = rep[i][mi]
                prod *= coef * comp[theta].get(a, 0.0)
            xi[a] = prod / fa ** (n - 1)
        total = sum(xi.values())
        abar[m] = total
        if total > probs.SUPPORT_EPS:
            kernels[m] = {a: x / total for a, x in xi.items()}
        else:
            kernels[m] = {a: 1.0 / n_alloc for a in env.allocations}
    return abar, kernels


def coupling_marginal_err(abar: Mapping, kernels: Mapping, theta: tuple,
                          rep: Sequence[PlayerRepresentation], f: Acf,
                          env: Environment) -> float:
    """Worst violation of the coupling's marginal and kernel equations."""
    n = len(rep)
    err = 0.0
    for i, player_rep in enumerate(rep):
        for mi, (coef, comp) in enumerate(player_rep):
            mass = sum(p for m, p in abar.items() if m[i] == mi)
            err = max(err, abs(mass - coef))
            for a in env.allocations:
                mixed = sum(p * kernels[m].get(a, 0.0)
                            for m, p in abar.items() if m[i] == mi)
                err = max(err, abs(mixed - coef * comp[theta].get(a, 0.0)))
    return err


def schell_feasible(abar: Mapping, theta: tuple, rep: Sequence[PlayerRepresentation],
                    f: Acf, env: Environment, tol: float = 1e-9) -> bool:
    """Two-player marginal-compatibility test via the min-capacity inequalities."""
    if len(rep) != 2:
        raise DomainError("schell_feasible supports exactly 2 players")
    rep1, rep2 = rep
    M1, M2 = range(len(rep1)), range(len(rep2))

    def a1f1(m1, a):
        coef, comp = rep1[m1]
        return coef * comp[theta].get(a, 0.0)

    def a2f2(m2, a):
        coef, comp = rep2[m2]
        return coef * comp[theta].get(a, 0.0)

    def kappa(a, m1, m2):
        return min(abar[(m1, m2)], a1f1(m1, a), a2f2(m2, a))

    # marginal consistency of abar and of both representations with f
    for m2 in M2:
        if abs(sum(abar[(m1, m2)] for m1 in M1) - rep2[m2][0]) > tol:
            return False
    for m1 in M1:
        if abs(sum(abar[(m1, m2)] for m2 in M2) - rep1[m1][0]) > tol:
            return False
    for a in env.allocations:
        fa = f[theta].get(a, 0.0)
        if abs(sum(a1f1(m1, a) for m1 in M1) - fa) > tol:
            return False
        if abs(sum(a2f2(m2, a) for m2 in M2) - fa) > tol:
            return False

    for a in env.allocations:
        for m2 in M2:
            if sum(kappa(a, m1, m2) for m1 in M1) < a2f2(m2, a) - tol:
                return False
        for m1 in M1:
            if sum(kappa(a, m1, m2) for m2 in M2) < a1f1(m1, a) - tol:
                return False
    for m1 in M1:
        for m2 in M2:
            if sum(kappa(a, m1, m2) for a in env.allocations) < abar[(m1, m2)] - tol:
                return False
    return True


@dataclass(frozen=True)
class CouplingResult:
    status: str  # "feasible" | "infeasible" | "indeterminate"
    abar: Optional[dict]
    kernels: Optional[dict]  # theta -> {m: dist over allocations}


def common_coupling_exists(rep: Sequence[PlayerRepresentation], f: Acf,
                           env: Environment) -> CouplingResult:
    """One coupling matrix working for every type profile, as an LP feasibility.

    Variables B(m, theta, alpha) >= 0 must reproduce each player's component
    rows as marginals and have a theta-independent allocation total.
    """
    thetas = env.type_profiles()
    for theta in thetas:
        _check_rep_consistency(theta, rep, f, env)
    n = len(rep)
    index_sets = [range(len(player_rep)) for player_rep in rep]
    ms = list(itertools.product(*index_sets))
    allocs = env.allocations
    var_index = {(m, theta, a): k
                 for k, (m, theta, a) in enumerate(itertools.product(ms, thetas, allocs))}
    n_vars = len(var_index)

    rows = []
    rhs = []
    for i, player_rep in enumerate(rep):
        for mi, (coef, comp) in enumerate(player_rep):
            for theta in thetas:
                for a in allocs:
                    row = [0.0] * n_vars
                    for m in ms:
                        if m[i] == mi:
                            row[var_index[(m, theta, a)]] = 1.0
                    rows.append(row)
                    rhs.append(coef * comp[theta].get(a, 0.0))
    theta0 = thetas[0]
    for m in ms:
        for theta in thetas[1:]:
            row = [0.0] * n_vars
            for a in allocs:
                row[var_index[(m, theta, a)]] += 1.0
                row[var_index[(m, theta0, a)]] -= 1.0
            rows.append(row)
            rhs.append(0.0)

    res = numerics.lp_feasible(rows, rhs)
    if res.status != "feasible":
        return CouplingResult(res.status, None, None)
    x = res.x
    abar = {m: sum(max(x[var_index[(m, theta0, a)]], 0.0) for a in allocs) for m in ms}
    kernels = {}
    n_alloc = len(allocs)
    for theta in thetas:
        kt = {}
        for m in ms:
            total = sum(max(x[var_index[(m, theta, a)]], 0.0) for a in allocs)
            if total > probs.SUPPORT_EPS:
                kt[m] = {a: max(x[var_index[(m, theta, a)]], 0.0) / total for a in allocs}
            else:
                kt[m] = {a: 1.0 / n_alloc for a in allocs}
        kernels[theta] = kt
    return CouplingResult("feasible", abar, kernels)


def h_n_membership_err(pi: Acf, f: Acf, n: int, thetas: Sequence[tuple],
                       allocs: Sequence[str]) -> tuple[float, Optional[tuple]]:
    """How far n*pi + (1-n)*f strays from being an ACF; returns (err, worst row)."""
    worst = 0.0
    worst_row = None
    for theta in thetas:
        total = 0.0
        low = 0.0
        for a in allocs:
            v = n * pi[theta].get(a, 0.0) + (1 - n) * f[theta].get(a, 0.0)
            total += v
            low = min(low, v)
        err = max(-low, abs(total - 1.0))
        if err > worst:
            worst, worst_row = err, theta
    return worst, worst_row


def h_n_sufficiency(f: Acf, rep: Sequence[PlayerRepresentation], env: Environment,
                    F: Prior, tol: float = CHECK_TOL) -> MediatedMechanism:
    """Mediated mechanism from per-player IC representations staying inside H_n."""
    n = env.n_players
    thetas = env.type_profiles()
    allocs = env.allocations
    for theta in thetas:
        _check_rep_consistency(theta, rep, f, env)
    for i, player_rep in enumerate(rep):
        for mi, (coef, comp) in enumerate(player_rep):
            ok, witnesses = is_f_incentive_compatible(comp, i, env, F, tol=tol)
            if not ok:
                raise DomainError(f"player {i} component {mi} fails IC: "
                                  f"{witnesses[0].describe()}")
            err, row = h_n_membership_err(comp, f, n, thetas, allocs)
            if err > 1e-12:
                raise DomainError(f"player {i} component {mi} leaves H_n at row {row!r} "
                                  f"(violation {err:.3g})")

    message_sets = tuple(tuple(range(len(player_rep))) for player_rep in rep)
    mediator = probs.product_dist([{mi: coef for mi, (coef, _) in enumerate(player_rep)}
                                   for player_rep in rep])
    labels = tuple(env.type_labels(i) for i in range(n))
    h = {}
    for m in itertools.product(*message_sets):
        for theta in thetas:
            row = {}
            for a in allocs:
                v = (1 - n) * f[theta].get(a, 0.0)
                for i, mi in enumerate(m):
                    _, comp = rep[i][mi]
                    v += comp[theta].get(a, 0.0)
                row[a] = max(v, 0.0)
            h[(m, theta)] = row
    mech = MediatedMechanism(message_sets, mediator, labels, h)
    report = is_bayes_nash_mediated(mech, env, F, truthful_mediated_strategy(env, mech),
                                    tol=tol)
    if not report.holds:
        raise DomainError(f"constructed mechanism fails the truthful check: "
                          f"{report.witnesses[0].describe()}")
    return mech


def eta_row(M: MediatedMechanism, player: int, message, theta: tuple) -> dict:
    """Expected allocation row for one player's message, averaging the mediator."""
    mu: dict = {}
    for phi_minus, d in probs.conditional(M.mediator, player, message).items():
        phi = probs.insert_at(phi_minus, player, message)
        for a, p in M.h[(phi, theta)].items():
            mu[a] = mu.get(a, 0.0) + d * p
    return mu


def merge_messages(M: MediatedMechanism, env: Environment, player: int,
                   phi, phi_tilde, tol: float = 1e-9) -> MediatedMechanism:
    """Merge two messages of a direct mediated mechanism with matching eta rows.

    phi_tilde is folded into phi; rows of the merged mechanism are the
    mediator-weighted average, or uniform where the merged message has
    probability zero.
    """
    thetas = env.type_profiles()
    marg = M.message_marginal(player)
    has_phi = marg.get(phi, 0.0) > probs.SUPPORT_EPS
    has_tilde = marg.get(phi_tilde, 0.0) > probs.SUPPORT_EPS
    if has_phi and has_tilde:
        for theta in thetas:
            e1 = eta_row(M, player, phi, theta)
            e2 = eta_row(M, player, phi_tilde, theta)
            if not probs.dist_close(e1, e2, tol):
                raise DomainError(f"eta rows differ at {theta!r}; messages not mergeable")

    message_sets = tuple(
        tuple(m for m in ms if not (i == player and m == phi_tilde))
        for i, ms in enumerate(M.message_sets))

    def fold(profile: tuple) -> tuple:
        if profile[player] == phi_tilde:
            return probs.insert_at(profile[:player] + profile[player + 1:], player, phi)
        return profile

    mediator: dict = {}
    for prof, d in M.mediator.items():
        key = fold(prof)
        mediator[key] = mediator.get(key, 0.0) + d

    n_alloc = len(env.allocations)
    uniform = {a: 1.0 / n_alloc for a in env.allocations}
    h: dict = {}
    for prof in itertools.product(*message_sets):
        for theta in thetas:
            if prof[player] != phi:
                h[(prof, theta)] = dict(M.h[(prof, theta)])
                continue
            tilde_prof = probs.insert_at(prof[:player] + prof[player + 1:],
                                         player, phi_tilde)
            d1 = M.mediator.get(prof, 0.0)
            d2 = M.mediator.get(tilde_prof, 0.0)
            if d1 + d2 > probs.SUPPORT_EPS:
                h[(prof, theta)] = probs.mix([(d1 / (d1 + d2), M.h[(prof, theta)]),
                                              (d2 / (d1 + d2), M.h[(tilde_prof, theta)])])
            else:
                h[(prof, theta)] = dict(uniform)
    return MediatedMechanism(message_sets, mediator, M.signal_sets, h)


def caratheodory_decompose_n1(f: Acf, env: Environment, F: Prior,
                              family: Sequence[Acf]) -> Optional[list[tuple[float, Acf]]]:
    """Write a single-player f as a convex combination of a supplied ACF family.

    Solved as an LP feasibility; the basic solution keeps the component count
    within |Theta_1| * |A|.
    """
    if env.n_players != 1:
        raise DomainError("caratheodory_decompose_n1 requires a single player")
    thetas = env.type_profiles()
    allocs = env.allocations
    rows = []
    rhs = []
    for theta in thetas:
        for a in allocs:
            rows.append([comp[theta].get(a, 0.0) for comp in family])
            rhs.append(f[theta].get(a, 0.0))
    rows.append([1.0] * len(family))
    rhs.append(1.0)
    res = numerics.lp_feasible(rows, rhs)
    if res.status != "feasible":
        return None
    out = [(float(coef), family[k]) for k, coef in enumerate(res.x)
           if coef > probs.SUPPORT_EPS]
    return out
