"""Command-line front end: evaluate lotteries, check equilibria, run transforms."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import ic as ic_mod
from . import serialize
from .cpt_core import cpt_value, cpt_value_cumulative, decision_weights, expected_utility
from .mechanism import (Verdict, check_belief_dominant, is_bayes_nash, is_dominant,
                        truthful_strategy)
from .mediated import (check_belief_dominant_mediated, is_bayes_nash_mediated,
                       is_dominant_mediated, lift_strategy, lift_unmediated,
                       lift_unmediated_public)
from .probs import DomainError
from .revelation import (TransformSizeError, reduce_environment_eut, to_direct_mediated,
                         to_direct_public, verify_transform)
from .scenarios import GOLDEN_SUITES
from .serialize import SchemaError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3


def _thread_count() -> int:
    raw = os.environ.get("CPT_MECHLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.json:
        out = json.dumps(payload, indent=2, default=str)
    else:
        out = "\n".join(text_lines)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out + "\n")
    else:
        print(out)


def _report_payload(report) -> dict:
    return {
        "verdict": report.verdict.value,
        "witnesses": [w.describe() for w in report.witnesses],
    }


def cmd_eval(args) -> int:
    lottery = serialize.parse_lottery(serialize.load_json(args.lottery))
    ctype = serialize.parse_type(serialize.load_json(args.type))
    v2 = cpt_value(lottery, ctype)
    v3 = cpt_value_cumulative(lottery, ctype)
    eu = expected_utility(lottery, ctype.values)
    dw = decision_weights(lottery, ctype)
    payload = {
        "cpt_value": v2,
        "cpt_value_cumulative": v3,
        "expected_utility": eu,
        "pi_plus": list(dw.pi_plus),
        "pi_minus": list(dw.pi_minus),
        "order": list(dw.order),
        "gain_count": dw.gain_count,
    }
    _emit(args, payload, [
        f"CPT value:            {v2:.6f}",
        f"CPT value (cumulative form): {v3:.6f}",
        f"Expected utility:     {eu:.6f}",
        f"Gain weights:         {[round(x, 6) for x in dw.pi_plus]}",
        f"Loss weights:         {[round(x, 6) for x in dw.pi_minus]}",
    ])
    return EXIT_OK


def _load_check_inputs(args):
    env = serialize.parse_environment(serialize.load_json(args.env))
    prior = None
    if args.prior:
        prior = serialize.parse_prior(serialize.load_json(args.prior))
    if args.mediated:
        mech = serialize.parse_mediated_mechanism(serialize.load_json(args.mechanism))
        sigma = serialize.parse_mediated_strategy(serialize.load_json(args.strategy))
    else:
        mech = serialize.parse_mechanism(serialize.load_json(args.mechanism))
        sigma = serialize.parse_strategy(serialize.load_json(args.strategy))
    return env, prior, mech, sigma


def _run_check(kind, mediated, mech, env, prior, sigma, tol, grid):
    if kind == "bayes-nash":
        if prior is None:
            raise SchemaError("prior", "bayes-nash check requires a prior file")
        if mediated:
            return is_bayes_nash_mediated(mech, env, prior, sigma, tol=tol)
        return is_bayes_nash(mech, env, prior, sigma, tol=tol)
    if kind == "dominant":
        if mediated:
            return is_dominant_mediated(mech, env, sigma, tol=tol)
        return is_dominant(mech, env, sigma, tol=tol)
    if mediated:
        return check_belief_dominant_mediated(mech, env, sigma, grid=grid, tol=tol)
    return check_belief_dominant(mech, env, sigma, grid=grid, tol=tol)


def cmd_check(args) -> int:
    env, prior, mech, sigma = _load_check_inputs(args)
    report = _run_check(args.kind, args.mediated, mech, env, prior, sigma,
                        args.tol, args.grid)
    lines = [f"{args.kind}: {report.verdict.value}"]
    lines += ["  " + w.describe() for w in report.witnesses[:10]]
    _emit(args, _report_payload(report), lines)
    return EXIT_OK if report.holds else EXIT_FAIL


def cmd_reveal(args) -> int:
    env = serialize.parse_environment(serialize.load_json(args.env))
    prior = serialize.parse_prior(serialize.load_json(args.prior)) if args.prior else None
    mech = serialize.parse_mechanism(serialize.load_json(args.mechanism))
    sigma = serialize.parse_strategy(serialize.load_json(args.strategy))

    report = _run_check(args.kind, False, mech, env, prior, sigma, args.tol, args.grid)
    if not report.holds:
        _emit(args, {"error": "input strategy is not an equilibrium",
                     **_report_payload(report)},
              [f"input strategy fails the {args.kind} check; not transforming"])
        return EXIT_FAIL

    if args.public:
        original = lift_unmediated_public(mech)
        lifted = lift_unmediated(mech)
        tau = lift_strategy(sigma, lifted)
        result = to_direct_public(original, env, tau, cap=args.cap)
        mech_json = serialize.dump_public_mechanism(result.mechanism)
    else:
        original = lift_unmediated(mech)
        tau = lift_strategy(sigma, original)
        result = to_direct_mediated(original, env, tau, cap=args.cap)
        mech_json = serialize.dump_mediated_mechanism(result.mechanism)

    verification = verify_transform(original, tau, result, env, prior, kind=args.kind,
                                    seed=args.seed, grid=args.grid)
    payload = {
        "mechanism": mech_json,
        "truthful": serialize.dump_mediated_strategy(result.truthful),
        "verification": {
            "ok": verification.ok,
            "acf_max_err": verification.acf_max_err,
            "identity_max_err": verification.identity_max_err,
            "equilibrium": _report_payload(verification.equilibrium),
            "failures": list(verification.failures),
        },
    }
    lines = [
        f"transform verified: {verification.ok}",
        f"  induced-rule drift: {verification.acf_max_err:.3g}",
        f"  belief identity drift: {verification.identity_max_err:.3g}",
        f"  truthful {args.kind} check: {verification.equilibrium.verdict.value}",
    ]
    lines += ["  " + f for f in verification.failures]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
        print("\n".join(lines))
        print(f"wrote {args.out}")
    else:
        _emit(args, payload, lines)
    return EXIT_OK if verification.ok else EXIT_FAIL


def cmd_reduce_eut(args) -> int:
    env = serialize.parse_environment(serialize.load_json(args.env))
    prior = serialize.parse_prior(serialize.load_json(args.prior)) if args.prior else None
    mech = serialize.parse_mechanism(serialize.load_json(args.mechanism)) \
        if args.mechanism else None
    sigma = serialize.parse_strategy(serialize.load_json(args.strategy)) \
        if args.strategy else None
    bundle = reduce_environment_eut(env, prior, mech, sigma)
    payload = {"environment": serialize.dump_environment(bundle.env)}
    if prior is not None:
        payload["prior"] = serialize.dump_prior(bundle.prior)
    if sigma is not None:
        payload["strategy"] = serialize.dump_strategy(bundle.strategy)
    if mech is not None:
        payload["mechanism"] = serialize.dump_mechanism(bundle.mechanism)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_ic(args) -> int:
    env = serialize.parse_environment(serialize.load_json(args.env))
    acf = serialize.parse_acf(serialize.load_json(args.acf))
    player = args.player
    if args.kind == "bayes-nash":
        if not args.prior:
            raise SchemaError("prior", "bayes-nash IC requires a prior file")
        prior = serialize.parse_prior(serialize.load_json(args.prior))
        ok, witnesses = ic_mod.is_f_incentive_compatible(acf, player, env, prior,
                                                         tol=args.tol)
        verdict = "Holds" if ok else "Fails"
    elif args.kind == "dominant":
        ok, witnesses = ic_mod.is_dominant_ic(acf, player, env, tol=args.tol)
        verdict = "Holds" if ok else "Fails"
    else:
        report = ic_mod.check_belief_dominant_ic(acf, player, env, grid=args.grid,
                                                 tol=args.tol)
        ok, witnesses, verdict = report.holds, list(report.witnesses), report.verdict.value
    payload = {"verdict": verdict, "witnesses": [w.describe() for w in witnesses]}
    _emit(args, payload, [f"{args.kind} incentive compatibility: {verdict}"]
          + ["  " + w.describe() for w in witnesses[:10]])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_couple(args) -> int:
    spec = serialize.load_json(args.file)
    env = serialize.parse_environment(serialize._require(spec, "env", "couple"))
    f = serialize.parse_acf(serialize._require(spec, "f", "couple"), "couple.f")
    reps_json = serialize._require(spec, "reps", "couple")
    reps = []
    for i, row in enumerate(reps_json):
        player_rep = []
        for k, entry in enumerate(row):
            coef = serialize._number(serialize._require(entry, "coef",
                                                        f"couple.reps[{i}][{k}]"),
                                     f"couple.reps[{i}][{k}].coef")
            comp = serialize.parse_acf(entry, f"couple.reps[{i}][{k}]")
            player_rep.append((coef, comp))
        reps.append(player_rep)
    result = ic_mod.common_coupling_exists(reps, f, env)
    payload = {"status": result.status}
    if result.status == "feasible":
        payload["abar"] = {repr(m): p for m, p in sorted(result.abar.items())}
    _emit(args, payload, [f"common coupling: {result.status}"])
    return EXIT_OK if result.status == "feasible" else EXIT_FAIL


def cmd_examples(args) -> int:
    keys = list(GOLDEN_SUITES) if args.which == "all" else [args.which]
    workers = _thread_count()
    if workers > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            suites = list(pool.map(lambda k: (k, GOLDEN_SUITES[k]()), keys))
    else:
        suites = [(k, GOLDEN_SUITES[k]()) for k in keys]
    lines = []
    payload = {}
    failed = 0
    for key, checks in suites:
        lines.append(f"suite {key}:")
        payload[key] = []
        for check in checks:
            lines.append("  " + check.describe())
            payload[key].append({"name": check.name, "ok": check.ok,
                                 "got": check.got, "want": check.want})
            if not check.ok:
                failed += 1
    lines.append(f"{'all checks passed' if failed == 0 else f'{failed} checks FAILED'}")
    _emit(args, payload, lines)
    return EXIT_OK if failed == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cptmech",
        description="Verification toolkit for mechanism design with CPT agents.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, prior=True, mech=True):
        p.add_argument("--env", required=True, help="environment JSON file")
        if prior:
            p.add_argument("--prior", help="prior JSON file")
        if mech:
            p.add_argument("--mechanism", required=True)
            p.add_argument("--strategy", required=True)
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--grid", type=int, default=4)
        p.add_argument("--cap", type=int, default=10 ** 6)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true")
        p.add_argument("--out")

    p = sub.add_parser("eval", help="evaluate a lottery for one CPT type")
    p.add_argument("lottery")
    p.add_argument("type")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="run an equilibrium check")
    common(p)
    p.add_argument("--kind", required=True,
                   choices=["bayes-nash", "dominant", "belief-dominant"])
    p.add_argument("--mediated", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reveal", help="transform an equilibrium into a direct mechanism")
    common(p)
    p.add_argument("--kind", required=True,
                   choices=["bayes-nash", "dominant", "belief-dominant"])
    p.add_argument("--public", action="store_true")
    p.set_defaults(func=cmd_reveal)

    p = sub.add_parser("reduce-eut", help="collapse an all-EUT environment")
    p.add_argument("--env", required=True)
    p.add_argument("--prior")
    p.add_argument("--mechanism")
    p.add_argument("--strategy")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_reduce_eut)

    p = sub.add_parser("ic", help="incentive-compatibility check for an allocation rule")
    p.add_argument("--env", required=True)
    p.add_argument("--prior")
    p.add_argument("--acf", required=True)
    p.add_argument("--player", type=int, required=True)
    p.add_argument("--kind", required=True,
                   choices=["bayes-nash", "dominant", "belief-dominant"])
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--grid", type=int, default=4)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ic)

    p = sub.add_parser("couple", help="search a common coupling for convex representations")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("examples", help="run the bundled golden scenarios")
    p.add_argument("which", nargs="?", default="all",
                   choices=["all"] + list(GOLDEN_SUITES))
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_examples)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TransformSizeError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (SchemaError, DomainError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
