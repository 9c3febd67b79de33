"""Revelation transforms, their verification, and the EUT reduction."""

import pytest

from conftest import (make_rng, random_dist, random_env, random_mechanism,
                      random_prior, random_strategy)
from cptmech import probs
from cptmech.environment import utility_w
from cptmech.mechanism import Verdict, is_bayes_nash, is_dominant
from cptmech.mediated import (lift_public, lift_strategy, lift_unmediated,
                              lift_unmediated_public, truthful_mediated_strategy)
from cptmech.probs import DomainError
from cptmech.revelation import (TransformSizeError, public_convexity_decomposition_check,
                                reduce_environment_eut, to_direct_mediated,
                                to_direct_public, verify_transform)
from cptmech.scenarios import (prelec_bidder_env, scenario_menu_dominant,
                               scenario_three_type,
                               public_rand_candidate_decompositions,
                               public_rand_env, public_rand_prior)


@pytest.fixture(scope="module")
def market_pipeline():
    sc = scenario_three_type()
    M = lift_unmediated(sc.mechanism)
    tau = lift_strategy(sc.sigma, M)
    result = to_direct_mediated(M, sc.env, tau)
    return sc, M, tau, result


class TestDirectMediatedTransform:
    def test_verifies_green(self, market_pipeline):
        sc, M, tau, result = market_pipeline
        report = verify_transform(M, tau, result, sc.env, sc.prior, kind="bayes-nash")
        assert report.ok, report.failures
        assert report.acf_max_err <= 1e-12
        assert report.identity_max_err <= 1e-12
        assert report.equilibrium.verdict is Verdict.HOLDS

    def test_message_counts_and_pruning(self, market_pipeline):
        sc, M, tau, result = market_pipeline
        # only the MF report is split, so each player carries 2 plan messages
        assert result.message_counts == (2, 2)
        # unpruned space: 1 message x 4 signals ^ 3 types
        assert result.pruned_counts == (4 ** 3 - 2, 4 ** 3 - 2)

    def test_mediator_marginal_identity(self, market_pipeline):
        sc, M, tau, result = market_pipeline
        labels = sc.env.type_labels(0)
        for i in (0, 1):
            marg = result.mechanism.message_marginal(i)
            for (phi, plan), p in marg.items():
                want = M.message_marginal(i)[phi]
                for label, psi in zip(labels, plan):
                    want *= tau.dist(i, phi, label).get(psi, 0.0)
                assert p == pytest.approx(want, abs=1e-12)

    def test_prune_consistency(self, market_pipeline):
        sc, M, tau, result = market_pipeline
        full = to_direct_mediated(M, sc.env, tau, prune=False)
        assert full.message_counts == (4 ** 3, 4 ** 3)
        pruned_nonzero = {k: v for k, v in result.mechanism.mediator.items()}
        full_nonzero = {k: v for k, v in full.mechanism.mediator.items()
                        if v > probs.SUPPORT_EPS}
        assert probs.dist_max_err(pruned_nonzero, full_nonzero) <= 1e-12
        f1 = verify_transform(M, tau, full, sc.env, sc.prior, kind="bayes-nash",
                              n_belief_samples=4)
        assert f1.ok, f1.failures

    def test_fault_injection_detected(self, market_pipeline):
        sc, M, tau, _ = market_pipeline
        broken = to_direct_mediated(M, sc.env, tau)
        key = next(iter(probs.support(broken.mechanism.mediator)))
        theta = ("MF", "MF")
        broken.mechanism.h[(key, theta)] = {"c": 1.0}
        report = verify_transform(M, tau, broken, sc.env, sc.prior, kind="bayes-nash",
                                  n_belief_samples=4)
        assert not report.ok
        assert report.failures

    def test_size_cap(self, market_pipeline):
        sc, M, tau, _ = market_pipeline
        with pytest.raises(TransformSizeError) as exc:
            to_direct_mediated(M, sc.env, tau, cap=3)
        assert "profiles" in exc.value.stats


@pytest.fixture(scope="module")
def menu_pipeline():
    sc = scenario_menu_dominant()
    mstar = lift_unmediated_public(sc.mechanism)
    tau = lift_strategy(sc.sigma, lift_public(mstar))
    result = to_direct_public(mstar, sc.env, tau)
    return sc, mstar, tau, result


class TestPublicTransform:
    def test_dominant_kind_green(self, menu_pipeline):
        sc, mstar, tau, result = menu_pipeline
        report = verify_transform(mstar, tau, result, sc.env, sc.prior, kind="dominant")
        assert report.ok, report.failures
        assert report.acf_max_err <= 1e-12
        assert report.identity_max_err <= 1e-12

    def test_belief_dominant_kind_green(self, menu_pipeline):
        sc, mstar, tau, result = menu_pipeline
        report = verify_transform(mstar, tau, result, sc.env, sc.prior,
                                  kind="belief-dominant")
        assert report.ok, report.failures
        assert report.equilibrium.verdict is Verdict.GRID_VERIFIED

    def test_common_message_carries_all_plans(self, menu_pipeline):
        sc, mstar, tau, result = menu_pipeline
        for key in result.mechanism.messages:
            assert key[0] in mstar.messages
            assert len(key) == 1 + sc.env.n_players

    def test_unknown_kind_rejected(self, menu_pipeline):
        sc, mstar, tau, result = menu_pipeline
        with pytest.raises(DomainError):
            verify_transform(mstar, tau, result, sc.env, sc.prior, kind="weird")

    def test_bayes_nash_kind_needs_prior(self, menu_pipeline):
        sc, mstar, tau, result = menu_pipeline
        with pytest.raises(DomainError):
            verify_transform(mstar, tau, result, sc.env, None, kind="bayes-nash")


class TestEutReduction:
    def test_rejects_nonlinear_weights(self):
        env = prelec_bidder_env()
        with pytest.raises(DomainError):
            reduce_environment_eut(env, None, None, None)

    def test_values_preserved(self):
        rng = make_rng(61)
        for _ in range(10):
            env = random_env(rng, eut=True)
            bundle = reduce_environment_eut(env, None, None, None)
            for i in range(2):
                for t in env.type_sets[i]:
                    t2 = bundle.type_map[(i, t.label)]
                    assert t2.is_eut
                    mu = random_dist(rng, env.allocations)
                    assert abs(utility_w(env, i, t, mu)
                               - utility_w(bundle.env, i, t2, mu)) <= 1e-12

    def test_verdicts_preserved(self):
        rng = make_rng(62)
        for _ in range(10):
            env = random_env(rng, eut=True)
            F = random_prior(rng, env)
            mech = random_mechanism(rng, env, blind=rng.random() < 0.5)
            sigma = random_strategy(rng, env, mech)
            bundle = reduce_environment_eut(env, F, mech, sigma)
            assert (is_bayes_nash(mech, env, F, sigma).verdict
                    is is_bayes_nash(mech, bundle.env, F, sigma).verdict)
            assert (is_dominant(mech, env, sigma).verdict
                    is is_dominant(mech, bundle.env, sigma).verdict)


class TestPublicConvexityCheck:
    def test_constant_components_pass(self):
        env = prelec_bidder_env()
        F = public_rand_prior()  # any full-support prior over UP/DN profiles
        labels = (env.type_labels(0), env.type_labels(1))
        const = {theta: {"c": 1.0} for theta in env.type_profiles()}
        from cptmech.mediated import PubliclyMediatedMechanism
        h = {(m, theta): dict(row) for m in (0, 1) for theta, row in const.items()}
        mstar = PubliclyMediatedMechanism((0, 1), {0: 0.5, 1: 0.5}, labels, h)
        report = public_convexity_decomposition_check(mstar, env, F)
        assert report.ok
        assert report.mixture_err <= 1e-12
        assert all(rep.holds for _, _, rep in report.per_message)

    def test_candidate_decompositions_fail(self):
        env = public_rand_env()
        F = public_rand_prior()
        for cand in public_rand_candidate_decompositions():
            report = public_convexity_decomposition_check(cand, env, F)
            assert not report.ok
            assert report.failures

    def test_requires_direct(self):
        sc = scenario_menu_dominant()
        mstar = lift_unmediated_public(sc.mechanism)  # player-1 signals are a menu
        with pytest.raises(DomainError):
            public_convexity_decomposition_check(mstar, sc.env, sc.prior)
