"""Bundled worked scenarios with their published reference values.

Four small games exercise every corner of the library: a Prelec bidder whose
truthful strategy is dominant but not belief-dominant, a menu mechanism whose
dominant equilibrium outcome resists truthful implementation, a three-type
market with a split-signal Bayes-Nash equilibrium, and a two-type game where
only public randomization implements the target rule. A coupling
counterexample rounds out the feasibility machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from . import ic, numerics, probs
from .cpt_core import CptType, WeightingFunction
from .environment import Environment, Prior, utility_w
from .mechanism import Mechanism, Strategy, truthful_strategy
from .mediated import PubliclyMediatedMechanism


@dataclass(frozen=True)
class Scenario:
    name: str
    env: Environment
    prior: Prior
    mechanism: Mechanism
    sigma: Strategy
    acf: dict  # target allocation choice function


ROMAN = ("I", "II", "III", "IV", "V")


def _diag_zeta(outcomes=ROMAN):
    """The shared outcome map: a and b hedge across extreme outcomes, c is flat."""
    return {
        "a": {("I", "I"): 0.5, ("V", "V"): 0.5},
        "b": {("II", "II"): 0.5, ("IV", "IV"): 0.5},
        "c": {("III", "III"): 1.0},
    }


# -- Prelec bidder: dominant but not belief-dominant truthful strategy --------

def prelec_bidder_env() -> Environment:
    prelec = WeightingFunction.prelec(0.5)
    linear = WeightingFunction.linear()
    x = 1.0 / prelec(0.5)
    p1 = (
        CptType("UP", {"I": 2 * x, "II": x + 1, "III": 1.99, "IV": 1.0, "V": 0.0},
                prelec, linear),
        CptType("DN", {"I": 0.0, "II": 0.0, "III": 1.0, "IV": 0.0, "V": 0.0},
                prelec, linear),
    )
    p2 = (
        CptType("UP", {"a": 1.0, "b": 0.0, "c": 2.0}, linear, linear),
        CptType("DN", {"a": 0.0, "b": 1.0, "c": 2.0}, linear, linear),
    )
    zeta1 = {"a": {"I": 0.5, "V": 0.5}, "b": {"II": 0.5, "IV": 0.5}, "c": {"III": 1.0}}
    zeta2 = {a: {a: 1.0} for a in ("a", "b", "c")}
    return Environment.from_marginals(
        (p1, p2), ("a", "b", "c"), (ROMAN, ("a", "b", "c")), (zeta1, zeta2))


def scenario_prelec_bidder() -> Scenario:
    env = prelec_bidder_env()
    prior = Prior.independent([{"UP": 0.5, "DN": 0.5}] * 2)
    h0 = {
        ("UP", "UP"): {"a": 1.0},
        ("UP", "DN"): {"b": 1.0},
        ("DN", "UP"): {"c": 1.0},
        ("DN", "DN"): {"c": 1.0},
    }
    mech = Mechanism((("UP", "DN"), ("UP", "DN")), h0)
    sigma = truthful_strategy(env)
    acf = {theta: dict(h0[theta]) for theta in env.type_profiles()}
    return Scenario("prelec-bidder", env, prior, mech, sigma, acf)


def scenario_menu_dominant() -> Scenario:
    """Player 1 picks the allocation directly; hedging UP types randomize."""
    env = prelec_bidder_env()
    prior = Prior.independent([{"UP": 0.5, "DN": 0.5}] * 2)
    h0 = {(s1, s2): {s1: 1.0} for s1 in ("a", "b", "c") for s2 in ("UP", "DN")}
    mech = Mechanism((("a", "b", "c"), ("UP", "DN")), h0)
    sigma = Strategy({
        (0, "UP"): {"a": 0.5, "b": 0.5},
        (0, "DN"): {"c": 1.0},
        (1, "UP"): {"UP": 1.0},
        (1, "DN"): {"DN": 1.0},
    })
    acf = {
        ("UP", "UP"): {"a": 0.5, "b": 0.5},
        ("UP", "DN"): {"a": 0.5, "b": 0.5},
        ("DN", "UP"): {"c": 1.0},
        ("DN", "DN"): {"c": 1.0},
    }
    return Scenario("menu-dominant", env, prior, mech, sigma, acf)


# -- Three-type market with split signals -------------------------------------

def market_weighting() -> tuple[WeightingFunction, WeightingFunction]:
    w_gain = WeightingFunction.piecewise([(0, 0), (7 / 32, 1 / 4), (25 / 32, 5 / 8), (1, 1)])
    w_loss = WeightingFunction.piecewise([(0, 0), (1 / 8, 3 / 16), (3 / 4, 1 / 2), (1, 1)])
    return w_gain, w_loss


def three_type_env() -> Environment:
    w_gain, w_loss = market_weighting()
    values = {
        "MF": {"I": 13.616, "II": 8.616, "III": 5.816, "IV": 3.8, "V": 0.0},
        "UF": {"I": -190.0, "II": -100.0, "III": -1000.0, "IV": -50.0, "V": 0.0},
        "SF": {"I": 0.0, "II": 0.0, "III": 1e6, "IV": 0.0, "V": 0.0},
    }
    types = tuple(CptType(lbl, vals, w_gain, w_loss) for lbl, vals in values.items())
    return Environment((types, types), ("a", "b", "c"), (ROMAN, ROMAN), _diag_zeta())


def three_type_prior() -> Prior:
    return Prior.independent([{"MF": 0.5, "UF": 3 / 8, "SF": 1 / 8}] * 2)


def three_type_acf() -> dict:
    half = {"a": 0.5, "b": 0.5}
    f = {}
    for t1 in ("MF", "UF", "SF"):
        for t2 in ("MF", "UF", "SF"):
            f[(t1, t2)] = {"c": 1.0} if "SF" in (t1, t2) else dict(half)
    return f


def scenario_three_type() -> Scenario:
    env = three_type_env()
    prior = three_type_prior()
    half = {"a": 0.5, "b": 0.5}
    signals = ("MF^a", "MF^b", "UF", "SF")
    h0 = {}
    for s1 in signals:
        for s2 in signals:
            if "SF" in (s1, s2):
                h0[(s1, s2)] = {"c": 1.0}
            elif (s1, s2) == ("UF", "UF"):
                h0[(s1, s2)] = dict(half)
            elif s1 == "UF":
                h0[(s1, s2)] = {"a": 1.0} if s2 == "MF^a" else {"b": 1.0}
            elif s2 == "UF":
                h0[(s1, s2)] = {"a": 1.0} if s1 == "MF^a" else {"b": 1.0}
            elif s1 == s2:
                h0[(s1, s2)] = {"a": 1.0} if s1 == "MF^a" else {"b": 1.0}
            else:
                h0[(s1, s2)] = dict(half)
    mech = Mechanism((signals, signals), h0)
    rows = {}
    for i in (0, 1):
        rows[(i, "MF")] = {"MF^a": 0.5, "MF^b": 0.5}
        rows[(i, "UF")] = {"UF": 1.0}
        rows[(i, "SF")] = {"SF": 1.0}
    sigma = Strategy(rows)
    return Scenario("three-type-market", env, prior, mech, sigma, three_type_acf())


def three_type_special_direct(x: float, y: float, z: float) -> Mechanism:
    """Direct mechanism agreeing with the target rule except at (MF, MF)."""
    f = three_type_acf()
    f[("MF", "MF")] = {a: p for a, p in (("a", x), ("b", y), ("c", z)) if p > 0.0}
    labels = ("MF", "UF", "SF")
    return Mechanism((labels, labels), f)


def hedge_value_split(z: float) -> float:
    """Truthful MF value contribution from the flat-allocation share."""
    w_gain, _ = market_weighting()
    return 2.016 * w_gain(18 / 32 + z / 4) + 2.8 * w_gain(14 / 32 - z / 4)


def hedge_value_extremes(x: float) -> float:
    """Remaining truthful MF value once the flat share is fixed at zero."""
    w_gain, _ = market_weighting()
    best_split, _ = max_hedge_split()
    return 3.8 * w_gain(29 / 32 - x / 4) + 5 * w_gain(3 / 32 + x / 4) + best_split


def max_hedge_split() -> tuple[float, list[float]]:
    kinks = market_weighting()[0].kinks
    bps = numerics.affine_kink_crossings([(0.25, 18 / 32), (-0.25, 14 / 32)], kinks, (0, 1))
    argmax, best = numerics.maximize_piecewise_1d(hedge_value_split, bps, (0, 1))
    return best, argmax


def unfavorable_mix_value(x: float) -> float:
    """CPT value for the risk-averse type of mixing the two hedged allocations."""
    env = three_type_env()
    uf = env.type_by_label(0, "UF")
    mu = {a: p for a, p in (("a", x), ("b", 1 - x)) if p > 0.0}
    return utility_w(env, 0, uf, mu)


# -- Two-type game needing public randomization --------------------------------

def public_rand_env() -> Environment:
    w_gain, _ = market_weighting()
    p1 = (
        CptType("UP", {"I": 80.0, "II": 57.0, "III": 34.0, "IV": 17.0, "V": 0.0},
                w_gain, w_gain),
        CptType("DN", {"I": 0.0, "II": 0.0, "III": 100.0, "IV": 0.0, "V": 0.0},
                w_gain, w_gain),
    )
    p2 = (
        CptType("UP", {"I": -79.0, "II": -56.0, "III": -33.0, "IV": -17.0, "V": 0.0},
                w_gain, w_gain),
        CptType("DN", {"I": 0.0, "II": 0.0, "III": 100.0, "IV": 0.0, "V": 0.0},
                w_gain, w_gain),
    )
    return Environment((p1, p2), ("a", "b", "c"), (ROMAN, ROMAN), _diag_zeta())


def public_rand_prior() -> Prior:
    return Prior.independent([{"UP": 0.75, "DN": 0.25}] * 2)


def public_rand_acf() -> dict:
    return {
        ("UP", "UP"): {"a": 0.5, "b": 0.5},
        ("UP", "DN"): {"c": 1.0},
        ("DN", "UP"): {"c": 1.0},
        ("DN", "DN"): {"c": 1.0},
    }


def scenario_public_rand() -> Scenario:
    env = public_rand_env()
    prior = public_rand_prior()
    h0 = {}
    for s1 in ("UP^a", "UP^b", "DN"):
        for s2 in ("UP", "DN"):
            if s1 == "DN" or s2 == "DN":
                h0[(s1, s2)] = {"c": 1.0}
            else:
                h0[(s1, s2)] = {"a": 1.0} if s1 == "UP^a" else {"b": 1.0}
    mech = Mechanism((("UP^a", "UP^b", "DN"), ("UP", "DN")), h0)
    sigma = Strategy({
        (0, "UP"): {"UP^a": 0.5, "UP^b": 0.5},
        (0, "DN"): {"DN": 1.0},
        (1, "UP"): {"UP": 1.0},
        (1, "DN"): {"DN": 1.0},
    })
    return Scenario("public-randomization", env, prior, mech, sigma, public_rand_acf())


def public_rand_direct(x: float) -> Mechanism:
    """Direct candidate component with the hedge split x at (UP, UP)."""
    f = public_rand_acf()
    f[("UP", "UP")] = {a: p for a, p in (("a", x), ("b", 1 - x)) if p > 0.0}
    return Mechanism((("UP", "DN"), ("UP", "DN")), f)


def public_rand_truthful_value(x: float) -> float:
    """Player 1 UP-type truthful value in the direct candidate with split x."""
    env = public_rand_env()
    up = env.type_by_label(0, "UP")
    mu = probs.mix([(0.75, {a: p for a, p in (("a", x), ("b", 1 - x)) if p > 0.0}),
                    (0.25, {"c": 1.0})])
    return utility_w(env, 0, up, mu)


def public_rand_candidate_decompositions() -> list[PubliclyMediatedMechanism]:
    """Candidate public decompositions of the target rule: endpoints and itself."""
    labels = (("UP", "DN"), ("UP", "DN"))
    thetas = [(t1, t2) for t1 in ("UP", "DN") for t2 in ("UP", "DN")]

    def mech_from(components):
        h = {}
        mediator = {}
        for m, (w, mech) in enumerate(components):
            mediator[m] = w
            for theta in thetas:
                h[(m, theta)] = dict(mech.h0[theta])
        return PubliclyMediatedMechanism(tuple(mediator), mediator, labels, h)

    return [
        mech_from([(0.5, public_rand_direct(0.0)), (0.5, public_rand_direct(1.0))]),
        mech_from([(1.0, public_rand_direct(0.5))]),
    ]


# -- Coupling counterexample ---------------------------------------------------

def coupling_env() -> Environment:
    """Minimal two-player shell for the coupling tables: trivial outcomes."""
    linear = WeightingFunction.linear()
    p1 = (CptType("LT", {"UP": 0.0, "DN": 0.0}, linear, linear),
          CptType("RT", {"UP": 0.0, "DN": 0.0}, linear, linear))
    p2 = (CptType("X", {"UP": 0.0, "DN": 0.0}, linear, linear),)
    zeta = {a: {(a, a): 1.0} for a in ("UP", "DN")}
    return Environment((p1, p2), ("UP", "DN"), (("UP", "DN"), ("UP", "DN")), zeta)


def coupling_tables() -> tuple[dict, list, Environment]:
    """Target rule and per-player representations with no common coupling."""
    env = coupling_env()
    lt, rt = ("LT", "X"), ("RT", "X")
    f = {lt: {"UP": 2 / 5, "DN": 3 / 5}, rt: {"UP": 1 / 3, "DN": 2 / 3}}
    f11 = {lt: {"UP": 1 / 2, "DN": 1 / 2}, rt: {"UP": 0.0, "DN": 1.0}}
    f12 = {lt: {"UP": 3 / 8, "DN": 5 / 8}, rt: {"UP": 5 / 12, "DN": 7 / 12}}
    f21 = {lt: {"UP": 1.0, "DN": 0.0}, rt: {"UP": 1.0, "DN": 0.0}}
    f22 = {lt: {"UP": 1 / 10, "DN": 9 / 10}, rt: {"UP": 0.0, "DN": 1.0}}
    rep = [[(1 / 5, f11), (4 / 5, f12)], [(1 / 3, f21), (2 / 3, f22)]]
    return f, rep, env


# -- Golden regression harness ---------------------------------------------------

@dataclass(frozen=True)
class GoldenCheck:
    name: str
    got: object
    want: object
    tol: Optional[float] = None

    @property
    def ok(self) -> bool:
        if self.tol is None:
            return self.got == self.want
        return abs(self.got - self.want) <= self.tol

    def describe(self) -> str:
        status = "ok" if self.ok else "FAIL"
        if self.tol is None:
            return f"[{status}] {self.name}: {self.got!r} (want {self.want!r})"
        return f"[{status}] {self.name}: {self.got:.6f} (want {self.want} within {self.tol:g})"


def golden_prelec_bidder() -> list[GoldenCheck]:
    from .mechanism import Verdict, check_belief_dominant, is_dominant

    sc = scenario_prelec_bidder()
    prelec = WeightingFunction.prelec(0.5)
    up = sc.env.type_by_label(0, "UP")
    checks = [
        GoldenCheck("prelec w(0.25)", prelec(0.25), 0.3081, 5e-5),
        GoldenCheck("prelec w(0.5)", prelec(0.5), 0.4349, 5e-5),
        GoldenCheck("prelec w(0.75)", prelec(0.75), 0.5849, 5e-5),
        GoldenCheck("UP value of a", utility_w(sc.env, 0, up, {"a": 1.0}), 2.0, 1e-4),
        GoldenCheck("UP value of b", utility_w(sc.env, 0, up, {"b": 1.0}), 2.0, 1e-4),
        GoldenCheck("UP value of the a/b mix",
                    utility_w(sc.env, 0, up, {"a": 0.5, "b": 0.5}), 1.9851, 5e-5),
        GoldenCheck("truthful play is dominant",
                    is_dominant(sc.mechanism, sc.env, sc.sigma).verdict, Verdict.HOLDS),
        GoldenCheck("truthful play is refuted as belief-dominant",
                    check_belief_dominant(sc.mechanism, sc.env, sc.sigma).verdict,
                    Verdict.REFUTED),
    ]
    return checks


def golden_three_type() -> list[GoldenCheck]:
    from .mechanism import Verdict, induced_belief, induced_acf, is_bayes_nash

    sc = scenario_three_type()
    env, F = sc.env, sc.prior
    uf = env.type_by_label(0, "UF")
    mf = env.type_by_label(0, "MF")

    def value(ctype, signal):
        mu = induced_belief(sc.mechanism, env, F, sc.sigma, 0, ctype.label, signal)
        return utility_w(env, 0, ctype, mu)

    bne = is_bayes_nash(sc.mechanism, env, F, sc.sigma)
    induced = induced_acf(sc.mechanism, env, F, sc.sigma).table
    acf_err = max(probs.dist_max_err(induced[t], sc.acf[t]) for t in induced)

    split_max, split_arg = max_hedge_split()
    kinks = market_weighting()[0].kinks
    bps = numerics.affine_kink_crossings([(-0.25, 29 / 32), (0.25, 3 / 32)], kinks, (0, 1))
    ext_arg, truthful_max = numerics.maximize_piecewise_1d(hedge_value_extremes, bps, (0, 1))

    loss_kinks = market_weighting()[1].kinks
    mix_bps = numerics.affine_kink_crossings([(0.5, 0.0), (-0.5, 1.0)], loss_kinks, (0, 1))
    mix_arg, mix_max = numerics.maximize_piecewise_1d(unfavorable_mix_value, mix_bps, (0, 1))

    special = three_type_special_direct(0.5, 0.5, 0.0)
    special_report = is_bayes_nash(special, env, F, truthful_strategy(env))

    return [
        GoldenCheck("UF truthful value", value(uf, "UF"), -227.0312, 5e-5),
        GoldenCheck("UF deviating to MF^a", value(uf, "MF^a"), -227.8125, 5e-5),
        GoldenCheck("UF deviating to MF^b", value(uf, "MF^b"), -235.6250, 5e-5),
        GoldenCheck("MF signalling MF^a", value(mf, "MF^a"), 5.8243, 5e-5),
        GoldenCheck("MF signalling MF^b", value(mf, "MF^b"), 5.8243, 5e-5),
        GoldenCheck("MF deviating to UF", value(mf, "UF"), 5.6993, 5e-5),
        GoldenCheck("MF deviating to SF", value(mf, "SF"), 5.816, 5e-5),
        GoldenCheck("split-signal equilibrium holds", bne.verdict, Verdict.HOLDS),
        GoldenCheck("induced rule matches target", acf_err, 0.0, 1e-12),
        GoldenCheck("best flat share is zero", min(split_arg), 0.0, 1e-12),
        GoldenCheck("flat-share value at zero", split_max, 2.0743, 5e-5),
        GoldenCheck("extreme-split maximizers are the endpoints",
                    tuple(round(x, 9) for x in ext_arg), (0.0, 1.0)),
        GoldenCheck("best truthful MF value", truthful_max, 5.7993, 5e-5),
        GoldenCheck("truthful direct play fails", special_report.verdict, Verdict.FAILS),
        GoldenCheck("worst-type mix maximizer", mix_arg[0], 0.5, 1e-12),
        GoldenCheck("worst-type mix value", mix_max, -66.25, 5e-3),
    ]


def golden_public_rand() -> list[GoldenCheck]:
    from .mechanism import Verdict, induced_belief, induced_acf, is_bayes_nash
    from .revelation import public_convexity_decomposition_check

    sc = scenario_public_rand()
    env, F = sc.env, sc.prior
    up1 = env.type_by_label(0, "UP")
    up2 = env.type_by_label(1, "UP")

    def value(player, ctype, signal):
        mu = induced_belief(sc.mechanism, env, F, sc.sigma, player, ctype.label, signal)
        return utility_w(env, player, ctype, mu)

    bne = is_bayes_nash(sc.mechanism, env, F, sc.sigma)
    induced = induced_acf(sc.mechanism, env, F, sc.sigma).table
    acf_err = max(probs.dist_max_err(induced[t], sc.acf[t]) for t in induced)

    kinks = market_weighting()[0].kinks
    bps = numerics.affine_kink_crossings([(3 / 8, 0.0), (-3 / 8, 1.0)], kinks, (0, 1))
    arg, best = numerics.maximize_piecewise_1d(public_rand_truthful_value, bps, (0, 1))

    decomposition_ok = any(
        public_convexity_decomposition_check(cand, env, F).ok
        for cand in public_rand_candidate_decompositions())

    return [
        GoldenCheck("UP hedging via UP^a", value(0, up1, "UP^a"), 34.0, 5e-3),
        GoldenCheck("UP hedging via UP^b", value(0, up1, "UP^b"), 34.0, 5e-3),
        GoldenCheck("UP deviating to DN", value(0, up1, "DN"), 34.0, 5e-3),
        GoldenCheck("player 2 truthful UP", value(1, up2, "UP"), -32.94, 5e-3),
        GoldenCheck("player 2 deviating to DN", value(1, up2, "DN"), -33.0, 5e-3),
        GoldenCheck("split-signal equilibrium holds", bne.verdict, Verdict.HOLDS),
        GoldenCheck("induced rule matches target", acf_err, 0.0, 1e-12),
        GoldenCheck("hedge-split maximizers are the endpoints",
                    tuple(round(x, 9) for x in arg), (0.0, 1.0)),
        GoldenCheck("hedge-split maximum", best, 34.0, 5e-3),
        GoldenCheck("hedge split at 0.583",
                    public_rand_truthful_value(0.583), 33.38, 5e-3),
        GoldenCheck("player 2 value at either endpoint component",
                    _endpoint_player2_value(0.0), -33.48, 5e-3),
        GoldenCheck("player 2 value at the other endpoint",
                    _endpoint_player2_value(1.0), -33.48, 5e-3),
        GoldenCheck("no candidate public decomposition works", decomposition_ok, False),
    ]


def _endpoint_player2_value(x: float) -> float:
    env = public_rand_env()
    up2 = env.type_by_label(1, "UP")
    mu = probs.mix([(0.75, {a: p for a, p in (("a", x), ("b", 1 - x)) if p > 0.0}),
                    (0.25, {"c": 1.0})])
    return utility_w(env, 1, up2, mu)


def golden_coupling() -> list[GoldenCheck]:
    f, rep, env = coupling_tables()
    abar, kernels = ic.canonical_coupling(("LT", "X"), rep, f, env)
    err = ic.coupling_marginal_err(abar, kernels, ("LT", "X"), rep, f, env)
    result = ic.common_coupling_exists(rep, f, env)

    # product coupling at the first profile; regression value for schell
    prod = {(m1, m2): rep[0][m1][0] * rep[1][m2][0] for m1 in (0, 1) for m2 in (0, 1)}
    schell_lt = ic.schell_feasible(prod, ("LT", "X"), rep, f, env)

    same = [[(0.5, f), (0.5, f)], [(1.0, f)]]
    result_same = ic.common_coupling_exists(same, f, env)

    return [
        GoldenCheck("per-profile coupling marginal error", err, 0.0, 1e-9),
        GoldenCheck("no common coupling for the tables", result.status, "infeasible"),
        GoldenCheck("product coupling passes the marginal test at LT", schell_lt, True),
        GoldenCheck("common coupling exists when components equal f",
                    result_same.status, "feasible"),
    ]


GOLDEN_SUITES: dict[str, Callable[[], list[GoldenCheck]]] = {
    "1": golden_prelec_bidder,
    "2": golden_three_type,
    "3": golden_public_rand,
    "coupling": golden_coupling,
}
