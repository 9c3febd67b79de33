"""End-to-end acceptance gate: one test (and one summary line) per criterion."""

import pytest

from conftest import (LINEAR, make_rng, random_dist, random_env, random_lottery,
                      random_mechanism, random_mediated_instance, random_prior,
                      random_strategy, random_values, random_weighting)
from cptmech import numerics, probs
from cptmech.cpt_core import (CptType, Lottery, WeightingFunction, cpt_value,
                              cpt_value_cumulative, expected_utility)
from cptmech.environment import utility_w
from cptmech.ic import (canonical_coupling, common_coupling_exists,
                        coupling_marginal_err)
from cptmech.mechanism import (Verdict, check_belief_dominant, induced_acf,
                               induced_belief, is_bayes_nash, is_dominant,
                               truthful_strategy)
from cptmech.mediated import (is_bayes_nash_mediated, lift_public, lift_strategy,
                              lift_unmediated, lift_unmediated_public)
from cptmech.revelation import (public_convexity_decomposition_check,
                                reduce_environment_eut, to_direct_mediated,
                                to_direct_public, verify_transform)
from cptmech.scenarios import (coupling_tables, hedge_value_extremes,
                               market_weighting, max_hedge_split,
                               public_rand_candidate_decompositions,
                               public_rand_truthful_value,
                               scenario_menu_dominant, scenario_prelec_bidder,
                               scenario_public_rand, scenario_three_type,
                               three_type_special_direct, unfavorable_mix_value,
                               _endpoint_player2_value)
from test_ic import random_representation


def _passed(n, text):
    print(f"criterion {n}: PASS - {text}")


def test_criterion_1_prelec_weighting_values():
    w = WeightingFunction.prelec(0.5)
    assert w(0.25) == pytest.approx(0.3081, abs=5e-5)
    assert w(0.5) == pytest.approx(0.4349, abs=5e-5)
    assert w(0.75) == pytest.approx(0.5849, abs=5e-5)
    _passed(1, "Prelec(0.5) weighting values within 5e-5")


def test_criterion_2_dominant_but_not_belief_dominant():
    sc = scenario_prelec_bidder()
    up = sc.env.type_by_label(0, "UP")
    v_a = utility_w(sc.env, 0, up, {"a": 1.0})
    v_b = utility_w(sc.env, 0, up, {"b": 1.0})
    v_mix = utility_w(sc.env, 0, up, {"a": 0.5, "b": 0.5})
    assert v_a == pytest.approx(2.0, abs=1e-4)
    assert v_b == pytest.approx(2.0, abs=1e-4)
    assert v_mix == pytest.approx(1.9851, abs=5e-5)

    assert is_dominant(sc.mechanism, sc.env, sc.sigma).verdict is Verdict.HOLDS

    report = check_belief_dominant(sc.mechanism, sc.env, sc.sigma)
    assert report.verdict is Verdict.REFUTED
    uniform = {(psi,): 0.5 for psi in ("UP", "DN")}
    hits = [w for w in report.witnesses
            if w.belief is not None
            and probs.dist_max_err(dict(w.belief), uniform) <= 1e-12]
    assert hits and hits[0].gap == pytest.approx(1.99 - v_mix, abs=1e-9)
    assert 1.99 > v_mix
    _passed(2, "dominant Holds, belief-dominance Refuted at (0.5, 0.5) with 1.99 > 1.9851")


def test_criterion_3_three_type_market():
    sc = scenario_three_type()
    env, F = sc.env, sc.prior
    uf = env.type_by_label(0, "UF")
    mf = env.type_by_label(0, "MF")

    def value(ctype, signal):
        mu = induced_belief(sc.mechanism, env, F, sc.sigma, 0, ctype.label, signal)
        return utility_w(env, 0, ctype, mu)

    assert value(uf, "UF") == pytest.approx(-227.0312, abs=5e-5)
    assert value(uf, "MF^a") == pytest.approx(-227.8125, abs=5e-5)
    assert value(uf, "MF^b") == pytest.approx(-235.6250, abs=5e-5)
    assert value(mf, "MF^a") == pytest.approx(5.8243, abs=5e-5)
    assert value(mf, "MF^b") == pytest.approx(5.8243, abs=5e-5)
    assert value(mf, "UF") == pytest.approx(5.6993, abs=5e-5)
    assert value(mf, "SF") == pytest.approx(5.816, abs=5e-5)

    assert is_bayes_nash(sc.mechanism, env, F, sc.sigma).verdict is Verdict.HOLDS
    table = induced_acf(sc.mechanism, env, F, sc.sigma).table
    assert max(probs.dist_max_err(table[t], sc.acf[t]) for t in sc.acf) <= 1e-12

    # the best truthful value across special direct mechanisms stays below 5.816
    kinks = market_weighting()[0].kinks
    bps = numerics.affine_kink_crossings([(-0.25, 29 / 32), (0.25, 3 / 32)], kinks, (0, 1))
    ext_arg, truthful_max = numerics.maximize_piecewise_1d(hedge_value_extremes,
                                                           bps, (0, 1))
    assert truthful_max == pytest.approx(5.7993, abs=5e-5)
    assert truthful_max < 5.816
    assert sorted(round(x, 9) for x in ext_arg) == [0.0, 1.0]
    for x in (0.0, 0.5, 1.0):
        report = is_bayes_nash(three_type_special_direct(x, 1 - x, 0.0), env, F,
                               truthful_strategy(env))
        assert report.verdict is Verdict.FAILS

    # worst-type mix: maximum at the exact breakpoint x = 1/2
    loss_kinks = market_weighting()[1].kinks
    mix_bps = numerics.affine_kink_crossings([(0.5, 0.0), (-0.5, 1.0)],
                                             loss_kinks, (0, 1))
    mix_arg, mix_max = numerics.maximize_piecewise_1d(unfavorable_mix_value,
                                                      mix_bps, (0, 1))
    assert mix_arg == [0.5]
    assert 0.5 in mix_bps
    assert mix_max == pytest.approx(-66.25, abs=5e-3)

    # flat-allocation share: zero is best, worth 2.0743
    split_max, split_arg = max_hedge_split()
    assert min(split_arg) == 0.0
    assert split_max == pytest.approx(2.0743, abs=5e-5)
    _passed(3, "market values, split-signal BNE, and both maximization claims")


def test_criterion_4_public_randomization():
    sc = scenario_public_rand()
    env, F = sc.env, sc.prior
    up1 = env.type_by_label(0, "UP")
    up2 = env.type_by_label(1, "UP")

    def value(player, ctype, signal):
        mu = induced_belief(sc.mechanism, env, F, sc.sigma, player, ctype.label, signal)
        return utility_w(env, player, ctype, mu)

    assert value(0, up1, "UP^a") == pytest.approx(34.0, abs=5e-3)
    assert value(0, up1, "UP^b") == pytest.approx(34.0, abs=5e-3)
    assert value(0, up1, "DN") == pytest.approx(34.0, abs=5e-3)
    assert value(1, up2, "UP") == pytest.approx(-32.94, abs=5e-3)
    assert value(1, up2, "DN") == pytest.approx(-33.0, abs=5e-3)
    assert is_bayes_nash(sc.mechanism, env, F, sc.sigma).verdict is Verdict.HOLDS

    kinks = market_weighting()[0].kinks
    bps = numerics.affine_kink_crossings([(3 / 8, 0.0), (-3 / 8, 1.0)], kinks, (0, 1))
    arg, best = numerics.maximize_piecewise_1d(public_rand_truthful_value, bps, (0, 1))
    assert sorted(round(x, 9) for x in arg) == [0.0, 1.0]
    assert best == pytest.approx(34.0, abs=5e-3)
    assert public_rand_truthful_value(0.583) == pytest.approx(33.38, abs=5e-3)

    assert _endpoint_player2_value(0.0) == pytest.approx(-33.48, abs=5e-3)
    assert _endpoint_player2_value(1.0) == pytest.approx(-33.48, abs=5e-3)
    for cand in public_rand_candidate_decompositions():
        assert not public_convexity_decomposition_check(cand, env, F).ok
    _passed(4, "public-randomization values; no truthful direct decomposition")


def test_criterion_5_named_revelation_transforms():
    sc = scenario_three_type()
    M = lift_unmediated(sc.mechanism)
    tau = lift_strategy(sc.sigma, M)
    result = to_direct_mediated(M, sc.env, tau)
    report = verify_transform(M, tau, result, sc.env, sc.prior, kind="bayes-nash",
                              n_belief_samples=32)
    assert report.ok, report.failures
    assert report.acf_max_err <= 1e-12
    assert report.identity_max_err <= 1e-12

    menu = scenario_menu_dominant()
    mstar = lift_unmediated_public(menu.mechanism)
    tau_p = lift_strategy(menu.sigma, lift_public(mstar))
    result_p = to_direct_public(mstar, menu.env, tau_p)
    for kind in ("dominant", "belief-dominant"):
        rep = verify_transform(mstar, tau_p, result_p, menu.env, menu.prior,
                               kind=kind, n_belief_samples=32)
        assert rep.ok, rep.failures
        assert rep.acf_max_err <= 1e-12
        assert rep.identity_max_err <= 1e-12
    _passed(5, "both named transforms green on 32 sampled beliefs within 1e-12")


def test_criterion_6_randomized_transform_oracle():
    certified = 0
    for k in range(100):
        rng = make_rng(1000 + k)
        env, F, M, tau = random_mediated_instance(rng)
        if not is_bayes_nash_mediated(M, env, F, tau).holds:
            continue
        certified += 1
        result = to_direct_mediated(M, env, tau)
        report = verify_transform(M, tau, result, env, F, kind="bayes-nash",
                                  n_belief_samples=8, seed=k)
        assert report.ok, (k, report.failures)
    assert certified >= 50, f"only {certified} of 100 instances certified"
    _passed(6, f"transform verified on all {certified} certified random instances")


def test_criterion_7_property_suites():
    rng = make_rng(7000)
    outcomes = [f"o{k}" for k in range(8)]

    for _ in range(1000):  # the two evaluation forms agree
        values = random_values(rng, outcomes)
        t = CptType("t", values, random_weighting(rng), random_weighting(rng))
        lot = random_lottery(rng, outcomes)
        assert abs(cpt_value(lot, t) - cpt_value_cumulative(lot, t)) <= 1e-9

    for _ in range(100):  # coalescing and tie invariance
        v = rng.uniform(-4, 4)
        values = {"x": v, "y": v, "z": rng.uniform(-4, 4)}
        t = CptType("t", values, random_weighting(rng), random_weighting(rng))
        lot = random_lottery(rng, values, n_max=4)
        (p0, o0), rest = lot.entries[0], lot.entries[1:]
        split = Lottery(((p0 / 2, o0), (p0 / 2, o0)) + rest)
        assert abs(cpt_value(split, t) - cpt_value(lot, t)) <= 1e-12
        flipped = Lottery(tuple(reversed(lot.entries)))
        assert abs(cpt_value(flipped, t) - cpt_value(lot, t)) <= 1e-12

    for _ in range(100):  # strict first-order stochastic dominance
        values = {"lo": rng.uniform(-5, 0), "hi": rng.uniform(0.5, 5)}
        t = CptType("t", values, random_weighting(rng), random_weighting(rng))
        p = rng.uniform(0.2, 0.8)
        d = rng.uniform(0.05, min(p, 1 - p) / 2)
        worse = Lottery.from_pairs([(p, "lo"), (1 - p, "hi")])
        better = Lottery.from_pairs([(p - d, "lo"), (1 - p + d, "hi")])
        assert cpt_value(better, t) > cpt_value(worse, t)

    for _ in range(200):  # EUT specialization
        values = random_values(rng, outcomes)
        t = CptType("t", values, LINEAR, LINEAR)
        lot = random_lottery(rng, outcomes)
        assert abs(cpt_value(lot, t) - expected_utility(lot, values)) <= 1e-12

    preserved = 0
    for k in range(50):  # EUT reduction keeps verdicts
        rng_k = make_rng(7100 + k)
        env = random_env(rng_k, eut=True)
        F = random_prior(rng_k, env)
        mech = random_mechanism(rng_k, env, blind=rng_k.random() < 0.5)
        sigma = random_strategy(rng_k, env, mech)
        bundle = reduce_environment_eut(env, F, mech, sigma)
        assert (is_bayes_nash(mech, env, F, sigma).verdict
                is is_bayes_nash(mech, bundle.env, F, sigma).verdict)
        assert (is_dominant(mech, env, sigma).verdict
                is is_dominant(mech, bundle.env, sigma).verdict)
        preserved += 1
    assert preserved == 50
    _passed(7, "evaluation, invariance, FOSD, EUT specialization and reduction suites")


def test_criterion_8_coupling_machinery():
    from cptmech.scenarios import coupling_env
    rng = make_rng(8000)
    env = coupling_env()
    theta = ("LT", "X")
    for _ in range(20):
        shape = (rng.randint(1, 3), rng.randint(1, 3))
        f, rep = random_representation(rng, env, theta, shape)
        abar, kernels = canonical_coupling(theta, rep, f, env)
        assert coupling_marginal_err(abar, kernels, theta, rep, f, env) <= 1e-9

    f, rep, env = coupling_tables()
    assert common_coupling_exists(rep, f, env).status == "infeasible"

    same = [[(0.5, f), (0.5, f)], [(1.0, f)]]
    result = common_coupling_exists(same, f, env)
    assert result.status == "feasible"
    for theta in env.type_profiles():
        assert coupling_marginal_err(result.abar, result.kernels[theta],
                                     theta, same, f, env) <= 1e-7
    _passed(8, "canonical coupling equations hold; common coupling verdicts match")
