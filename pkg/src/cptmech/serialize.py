"""JSON (de)serialization for environments, priors, mechanisms, and strategies."""

from __future__ import annotations

import json
from typing import Any, Mapping

from .cpt_core import CptType, Lottery, WeightingFunction
from .environment import Environment, Prior
from .mechanism import Mechanism, Strategy
from .mediated import MediatedMechanism, MediatedStrategy, PubliclyMediatedMechanism


class SchemaError(ValueError):
    """Invalid input file; carries the JSON path of the offending field."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


def _require(obj: Mapping, key: str, path: str):
    if not isinstance(obj, Mapping):
        raise SchemaError(path, f"expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing field")
    return obj[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {value!r}")
    return float(value)


def parse_weighting(obj, path: str = "weighting") -> WeightingFunction:
    kind = _require(obj, "kind", path)
    try:
        if kind == "linear":
            return WeightingFunction.linear()
        if kind == "piecewise":
            points = _require(obj, "points", path)
            return WeightingFunction.piecewise(
                [(_number(p, f"{path}.points[{k}][0]"), _number(w, f"{path}.points[{k}][1]"))
                 for k, (p, w) in enumerate(points)])
        if kind == "prelec":
            return WeightingFunction.prelec(_number(_require(obj, "alpha", path), f"{path}.alpha"))
    except SchemaError:
        raise
    except (ValueError, TypeError) as exc:
        raise SchemaError(path, str(exc)) from exc
    raise SchemaError(f"{path}.kind", f"unknown weighting kind {kind!r}")


def dump_weighting(w: WeightingFunction) -> dict:
    if w.kind == "linear":
        return {"kind": "linear"}
    if w.kind == "prelec":
        return {"kind": "prelec", "alpha": w.alpha}
    return {"kind": "piecewise", "points": [list(pt) for pt in w.points]}


def parse_lottery(obj, path: str = "lottery") -> Lottery:
    entries = _require(obj, "entries", path)
    pairs = []
    for k, entry in enumerate(entries):
        prob = _number(_require(entry, "prob", f"{path}.entries[{k}]"),
                       f"{path}.entries[{k}].prob")
        pairs.append((prob, _require(entry, "outcome", f"{path}.entries[{k}]")))
    try:
        return Lottery.from_pairs(pairs)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def parse_type(obj, path: str = "type") -> CptType:
    try:
        return CptType(
            str(_require(obj, "label", path)),
            {str(o): _number(v, f"{path}.values.{o}")
             for o, v in _require(obj, "values", path).items()},
            parse_weighting(_require(obj, "w_gain", path), f"{path}.w_gain"),
            parse_weighting(_require(obj, "w_loss", path), f"{path}.w_loss"),
        )
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def parse_environment(obj, path: str = "environment") -> Environment:
    players = _require(obj, "players", path)
    type_sets = _require(obj, "type_sets", path)
    if len(type_sets) != players:
        raise SchemaError(f"{path}.type_sets", f"expected {players} entries")
    parsed_types = tuple(
        tuple(parse_type(t, f"{path}.type_sets[{i}][{k}]") for k, t in enumerate(row))
        for i, row in enumerate(type_sets))
    allocations = tuple(str(a) for a in _require(obj, "allocations", path))
    outcome_sets = tuple(tuple(str(g) for g in row)
                         for row in _require(obj, "outcome_sets", path))
    zeta_obj = _require(obj, "zeta", path)
    zeta = {}
    for a, rows in zeta_obj.items():
        dist = {}
        for k, entry in enumerate(rows):
            prob = _number(_require(entry, "prob", f"{path}.zeta.{a}[{k}]"),
                           f"{path}.zeta.{a}[{k}].prob")
            outcomes = tuple(str(g) for g in _require(entry, "outcomes", f"{path}.zeta.{a}[{k}]"))
            dist[outcomes] = dist.get(outcomes, 0.0) + prob
        zeta[str(a)] = dist
    try:
        return Environment(parsed_types, allocations, outcome_sets, zeta)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def dump_environment(env: Environment) -> dict:
    return {
        "players": env.n_players,
        "type_sets": [[{"label": t.label, "values": dict(t.values),
                        "w_gain": dump_weighting(t.weight_gain),
                        "w_loss": dump_weighting(t.weight_loss)}
                       for t in row] for row in env.type_sets],
        "allocations": list(env.allocations),
        "outcome_sets": [list(row) for row in env.outcome_sets],
        "zeta": {a: [{"prob": p, "outcomes": list(profile)}
                     for profile, p in sorted(joint.items())]
                 for a, joint in env.zeta.items()},
    }


def parse_prior(obj, path: str = "prior") -> Prior:
    entries = _require(obj, "entries", path)
    table = {}
    for k, entry in enumerate(entries):
        types = tuple(str(t) for t in _require(entry, "types", f"{path}.entries[{k}]"))
        prob = _number(_require(entry, "prob", f"{path}.entries[{k}]"),
                       f"{path}.entries[{k}].prob")
        table[types] = table.get(types, 0.0) + prob
    try:
        return Prior(table)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def dump_prior(F: Prior) -> dict:
    return {"entries": [{"types": list(t), "prob": p} for t, p in sorted(F.table.items())]}


def _parse_dist(obj, path: str) -> dict:
    return {str(k): _number(v, f"{path}.{k}") for k, v in obj.items()}


def parse_mechanism(obj, path: str = "mechanism") -> Mechanism:
    signal_sets = tuple(tuple(str(s) for s in row)
                        for row in _require(obj, "signal_sets", path))
    h0 = {}
    for k, entry in enumerate(_require(obj, "h0", path)):
        signals = tuple(str(s) for s in _require(entry, "signals", f"{path}.h0[{k}]"))
        h0[signals] = _parse_dist(_require(entry, "dist", f"{path}.h0[{k}]"),
                                  f"{path}.h0[{k}].dist")
    try:
        return Mechanism(signal_sets, h0)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def dump_mechanism(mech: Mechanism) -> dict:
    return {
        "signal_sets": [list(row) for row in mech.signal_sets],
        "h0": [{"signals": list(psi), "dist": dict(sorted(row.items()))}
               for psi, row in sorted(mech.h0.items())],
    }


def parse_strategy(obj, path: str = "strategy") -> Strategy:
    rows = {}
    for k, entry in enumerate(_require(obj, "rows", path)):
        player = _require(entry, "player", f"{path}.rows[{k}]")
        type_label = str(_require(entry, "type", f"{path}.rows[{k}]"))
        rows[(int(player), type_label)] = _parse_dist(
            _require(entry, "dist", f"{path}.rows[{k}]"), f"{path}.rows[{k}].dist")
    try:
        return Strategy(rows)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def dump_strategy(sigma: Strategy) -> dict:
    return {"rows": [{"player": p, "type": t, "dist": dict(sorted(d.items()))}
                     for (p, t), d in sorted(sigma.rows.items())]}


def _msg_to_json(m):
    if isinstance(m, tuple):
        return [_msg_to_json(x) for x in m]
    return m


def _msg_from_json(m):
    if isinstance(m, list):
        return tuple(_msg_from_json(x) for x in m)
    return m


def parse_mediated_mechanism(obj, path: str = "mechanism") -> MediatedMechanism:
    message_sets = tuple(tuple(_msg_from_json(m) for m in row)
                         for row in _require(obj, "message_sets", path))
    signal_sets = tuple(tuple(str(s) for s in row)
                        for row in _require(obj, "signal_sets", path))
    mediator = {}
    for k, entry in enumerate(_require(obj, "mediator", path)):
        msgs = tuple(_msg_from_json(m) for m in _require(entry, "messages", f"{path}.mediator[{k}]"))
        mediator[msgs] = _number(_require(entry, "prob", f"{path}.mediator[{k}]"),
                                 f"{path}.mediator[{k}].prob")
    h = {}
    for k, entry in enumerate(_require(obj, "h", path)):
        msgs = tuple(_msg_from_json(m) for m in _require(entry, "messages", f"{path}.h[{k}]"))
        signals = tuple(str(s) for s in _require(entry, "signals", f"{path}.h[{k}]"))
        h[(msgs, signals)] = _parse_dist(_require(entry, "dist", f"{path}.h[{k}]"),
                                         f"{path}.h[{k}].dist")
    try:
        return MediatedMechanism(message_sets, mediator, signal_sets, h)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def dump_mediated_mechanism(M: MediatedMechanism) -> dict:
    return {
        "message_sets": [[_msg_to_json(m) for m in row] for row in M.message_sets],
        "mediator": [{"messages": [_msg_to_json(m) for m in prof], "prob": p}
                     for prof, p in sorted(M.mediator.items(), key=lambda kv: repr(kv[0]))],
        "signal_sets": [list(row) for row in M.signal_sets],
        "h": [{"messages": [_msg_to_json(m) for m in prof], "signals": list(psi),
               "dist": dict(sorted(row.items()))}
              for (prof, psi), row in sorted(M.h.items(), key=lambda kv: repr(kv[0]))],
    }


def dump_public_mechanism(M: PubliclyMediatedMechanism) -> dict:
    return {
        "messages": [_msg_to_json(m) for m in M.messages],
        "mediator": [{"message": _msg_to_json(m), "prob": p}
                     for m, p in sorted(M.mediator.items(), key=lambda kv: repr(kv[0]))],
        "signal_sets": [list(row) for row in M.signal_sets],
        "h": [{"message": _msg_to_json(m), "signals": list(psi),
               "dist": dict(sorted(row.items()))}
              for (m, psi), row in sorted(M.h.items(), key=lambda kv: repr(kv[0]))],
    }


def parse_mediated_strategy(obj, path: str = "strategy") -> MediatedStrategy:
    rows = {}
    for k, entry in enumerate(_require(obj, "rows", path)):
        player = int(_require(entry, "player", f"{path}.rows[{k}]"))
        message = _msg_from_json(_require(entry, "message", f"{path}.rows[{k}]"))
        type_label = str(_require(entry, "type", f"{path}.rows[{k}]"))
        rows[(player, message, type_label)] = _parse_dist(
            _require(entry, "dist", f"{path}.rows[{k}]"), f"{path}.rows[{k}].dist")
    try:
        return MediatedStrategy(rows)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def dump_mediated_strategy(tau: MediatedStrategy) -> dict:
    return {"rows": [{"player": p, "message": _msg_to_json(m), "type": t,
                      "dist": dict(sorted(d.items()))}
                     for (p, m, t), d in sorted(tau.rows.items(), key=lambda kv: repr(kv[0]))]}


def parse_acf(obj, path: str = "acf") -> dict:
    table = {}
    for k, entry in enumerate(_require(obj, "rows", path)):
        types = tuple(str(t) for t in _require(entry, "types", f"{path}.rows[{k}]"))
        table[types] = _parse_dist(_require(entry, "dist", f"{path}.rows[{k}]"),
                                   f"{path}.rows[{k}].dist")
    return table


def dump_acf(f: Mapping) -> dict:
    return {"rows": [{"types": list(t), "dist": dict(sorted(d.items()))}
                     for t, d in sorted(f.items())]}


def load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(path, f"cannot read JSON: {exc}") from exc
