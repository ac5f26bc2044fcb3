"""Config-driven entry point: ``nilrec <kind> --config <file>``.

Every run writes one JSON report (schema "nilrec/1") containing the echoed
config, the seed, the result with exact values serialised as strings, and
the wall time.  Same config and seed give the same report apart from the
``wall_time`` field.

Exit codes: 0 ok, 2 invalid config, 3 time budget exceeded (partial report),
4 an internal check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import jsonschema

from nilrec import coloring, dynamics, nilgroup, polymap, semigroup, weight
from nilrec.nilgroup import GroupElement
from nilrec.parallel import resolve_jobs
from nilrec.semigroup import FiniteSet

SCHEMA = "nilrec/1"
KINDS = ("eval", "weight", "reduce-check", "recurrence", "ipstar", "vdw", "group-color", "corollary")

EXIT_OK, EXIT_SCHEMA, EXIT_BUDGET, EXIT_INVARIANT = 0, 2, 3, 4


class BudgetExceeded(Exception):
    def __init__(self, partial):
        super().__init__("time budget exceeded")
        self.partial = partial


class CheckFailed(Exception):
    def __init__(self, result):
        super().__init__("internal check failed")
        self.result = result


# -- config schemas ---------------------------------------------------------

_set = {"type": "array", "items": {"type": "integer", "minimum": 1}}
_family = {"type": "array", "items": _set, "minItems": 1}
_poly = {"type": "object"}
_system = {"type": "array", "items": _poly, "minItems": 1}
_limits = {
    "type": "object",
    "properties": {k: {"type": "number", "exclusiveMinimum": 0}
                   for k in ("N", "s", "depth", "radius", "time_budget", "trials")},
}
_action = {
    "type": "object",
    "required": ["generators"],
    "properties": {"generators": {"type": "array", "items": {"type": "object", "required": ["vector"]}}},
}
_common = {"n": {"type": "integer", "minimum": 2, "maximum": 8}, "seed": {"type": "integer"}, "limits": _limits}


def _schema(required, **props):
    return {"type": "object", "required": list(required), "properties": {**_common, **props}}


PAYLOAD_SCHEMAS = {
    "eval": _schema(["polynomial"], polynomial=_poly, alpha=_set, alphas={"type": "array", "items": _set}),
    "weight": _schema([], polynomial=_poly, system=_system),
    "reduce-check": _schema([], dims={"type": "array", "items": {"type": "integer", "minimum": 2, "maximum": 8}},
                            ground_size={"type": "integer", "minimum": 1, "maximum": 8},
                            system=_system, gamma=_set, g={"type": "array"}),
    "recurrence": _schema([], system=_system, action=_action, x={"type": "array"}, epsilon={"type": ["string", "integer"]},
                          maps={"type": "array", "items": {"type": "object"}}, n_max={"type": "integer", "minimum": 1}),
    "ipstar": _schema(["system", "action", "x", "epsilon"], system=_system, action=_action, x={"type": "array"},
                      epsilon={"type": ["string", "integer"]},
                      families={"type": "array", "items": _family},
                      random_families={"type": "object"}, shift_ball={"type": "array"}),
    "vdw": _schema(["k"], k={"type": "integer", "minimum": 3}, N={"type": "integer", "minimum": 1, "maximum": 20},
                   r={"type": "integer", "minimum": 1}, mode={"enum": ["exhaustive", "single"]},
                   coloring={"type": "array", "items": {"type": "integer", "minimum": 0}}),
    "group-color": _schema(["coloring", "ip_systems", "family"], coloring={"type": "object"},
                           ip_systems=_system, family=_family),
    "corollary": _schema(["A", "system", "family"], A={"type": "object"}, system=_system, family=_family,
                         radius={"type": "integer", "minimum": 1}, s={"type": "integer", "minimum": 1}),
}


def load_config(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


# -- encoding ----------------------------------------------------------------

def encode(obj: Any) -> Any:
    """Turn results into JSON values; big integers and rationals become strings."""
    if isinstance(obj, GroupElement):
        return nilgroup.to_json(obj)
    if isinstance(obj, FiniteSet):
        return list(obj.elements)
    if isinstance(obj, Fraction):
        return dynamics.frac_str(obj)
    if isinstance(obj, weight.Weight):
        return obj.as_list()
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return str(obj) if abs(obj) >= 2 ** 53 else obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    raise TypeError(f"cannot encode {type(obj).__name__}")


# -- runners -----------------------------------------------------------------

def _limit(config, name, default=None):
    v = config.get("limits", {}).get(name, config.get(name, default))
    return v


def _system(config, key="system"):
    return polymap.system_from_json(config[key], config.get("n"))


def _run_eval(config, rng, jobs, deadline):
    P = polymap.from_json(config["polynomial"], config.get("n"))
    alphas = config.get("alphas") or [config.get("alpha", [])]
    rows = []
    for a in alphas:
        g = polymap.evaluate(P, semigroup.from_json(a))
        rows.append({"alpha": a, "value": g, "level": g.level()})
    return {"values": rows}, rows


def _weight_row(P):
    a = weight.analyse(P)
    return {
        "weight": a.weight,
        "principal_part": [{"key": list(k), "vector": list(v)} for k, v in a.principal.table],
        "canonical_form": polymap.to_json(weight.canonicalize(P)),
    }


def _run_weight(config, rng, jobs, deadline):
    if "system" in config:
        A = _system(config)
    elif "polynomial" in config:
        A = polymap.System((polymap.from_json(config["polynomial"], config.get("n")),))
    else:
        raise ValueError("weight needs 'polynomial' or 'system'")
    rows = [_weight_row(P) for P in A]
    wv = weight.weight_vector(A)
    table = [{"index": i, "level": r["weight"].level, "degree": r["weight"].degree} for i, r in enumerate(rows)]
    return {"mappings": rows, "weight_vector": wv.to_json()}, table


def _run_reduce(config, rng, jobs, deadline):
    if "system" in config:
        A = _system(config)
        gamma = semigroup.from_json(config["gamma"])
        g = nilgroup.from_json(config["g"]) if "g" in config else nilgroup.identity(A.n)
        items = [r.to_json() for r in weight.check_weight_reduction(A, gamma, g)]
        result = {"items": items}
        if not all(r["passed"] for r in items):
            raise CheckFailed(result)
        return result, items
    dims = config.get("dims", [3, 4])
    trials = int(_limit(config, "trials", 100))
    try:
        records = weight.reduction_trials(dims, trials, config["seed"], config.get("ground_size", 4), deadline)
    except TimeoutError as exc:
        raise BudgetExceeded({"items": exc.args[0]})
    result = {"dims": dims, "trials_per_dim": trials, "items": records}
    if any(r["failures"] for r in records):
        raise CheckFailed(result)
    table = [{"item": r["item"], "trials": r["trials"], "passes": r["passes"]} for r in records]
    return result, table


def _action(config, n):
    return dynamics.action_from_json(n, config["action"]["generators"])


def _query(config, A, N=None):
    N = N or int(_limit(config, "N", 10))
    s = int(_limit(config, "s", N))
    return dynamics.RecurrenceQuery(A, tuple(dynamics.as_fraction(c) for c in config["x"]),
                                    dynamics.as_fraction(config["epsilon"]), N, s)


def _run_recurrence(config, rng, jobs, deadline):
    if "maps" in config:
        maps = [dynamics.affine_from_json(o) for o in config["maps"]]
        x = dynamics.point(dynamics.as_fraction(c) for c in config["x"])
        n = dynamics.commuting_recurrence(maps, x, dynamics.as_fraction(config["epsilon"]), int(config.get("n_max", 1000)))
        return {"mode": "commuting", "n": n, "found": n is not None}, [{"n": n}]
    A = _system(config)
    q = _query(config, A)
    hit = dynamics.recurrence_search(q, _action(config, A.n), jobs)
    if hit is None:
        return {"mode": "polynomial", "found": False, "alpha": None}, [{"alpha": None}]
    alpha, ds = hit
    return ({"mode": "polynomial", "found": True, "alpha": alpha, "distances": ds},
            [{"alpha": " ".join(map(str, alpha)), "distances": " ".join(map(dynamics.frac_str, ds))}])


def _families(config, rng):
    fams = [semigroup.family_from_json(f) for f in config.get("families", [])]
    rf = config.get("random_families")
    if rf:
        for _ in range(int(rf.get("count", 20))):
            fams.append(semigroup.random_family(rng, int(rf.get("length", 8)), int(rf.get("max_block", 3)),
                                                int(rf.get("max_gap", 3))))
    if not fams:
        raise ValueError("ipstar needs 'families' or 'random_families'")
    return fams


def _run_ipstar(config, rng, jobs, deadline):
    A = _system(config)
    fams = _families(config, rng)
    depth = int(_limit(config, "depth", semigroup.DEFAULT_DEPTH))
    ground = max(max(f.generators[-1].elements) for f in fams)
    q = _query(config, A, ground)
    ball = [nilgroup.from_json(m) for m in config["shift_ball"]] if "shift_ball" in config else None
    action = _action(config, A.n)
    rows = []
    for i, fam in enumerate(fams):
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded({"families": rows})
        rep = dynamics.ipstar_fragment_check(q, action, [fam], depth, ball, jobs)
        rows.append({
            "family": [list(g.elements) for g in fam.generators],
            "found": rep["found"],
            "a": rep["a"],
            "witness": rep["witnesses"][0] if rep["found"] else None,
        })
    result = {"depth": depth, "families": rows, "all_found": all(r["found"] for r in rows)}
    table = [{"family": i, "found": r["found"], "witness": " ".join(map(str, r["witness"] or ()))}
             for i, r in enumerate(rows)]
    return result, table


def _run_vdw(config, rng, jobs, deadline):
    k = config["k"]
    if "coloring" in config:
        hit = coloring.vdw_search(config["coloring"], k)
        result = {"mode": "single", "progression": None if hit is None else {"start": hit[0], "step": hit[1]}}
        return result, [{"start": hit and hit[0], "step": hit and hit[1]}]
    N = int(config.get("N", _limit(config, "N", 9)))
    res = coloring.vdw_exhaustive(N, k, config.get("r", 2), jobs)
    verdict = (f"all colorings contain {k}-AP" if res["all_contain_ap"]
               else f"{res['ap_free']} coloring(s) avoid {k}-AP")
    res["verdict"] = verdict
    return res, [{"N": N, "k": k, "colorings": res["colorings"], "ap_free": res["ap_free"]}]


def _integer_coloring(obj) -> coloring.Coloring:
    if "colors" in obj:
        return coloring.Coloring.on_integer_ball(obj["colors"], int(obj["start"]))
    lo, hi = int(obj["start"]), int(obj["stop"])
    mod = int(obj["mod"])
    return coloring.Coloring.on_integer_ball([m % mod for m in range(lo, hi + 1)], lo)


def _indicator(obj):
    if "members" in obj:
        return frozenset(coloring.z(int(m)) for m in obj["members"])
    mod, res = int(obj["mod"]), int(obj.get("residue", 0))
    return lambda g: coloring.z_value(g) % mod == res


def _run_group_color(config, rng, jobs, deadline):
    col = _integer_coloring(config["coloring"])
    systems = [polymap.from_json(o, 2) for o in config["ip_systems"]]
    fam = semigroup.family_from_json(config["family"])
    depth = int(_limit(config, "depth", len(fam)))
    hit = coloring.group_config_search(col, systems, fam, depth)
    if hit is None:
        return {"found": False}, [{"h": None, "alpha": None}]
    h, alpha = hit
    return ({"found": True, "h": coloring.z_value(h), "alpha": alpha},
            [{"h": coloring.z_value(h), "alpha": " ".join(map(str, alpha))}])


def _run_corollary(config, rng, jobs, deadline):
    A = _indicator(config["A"])
    R = polymap.system_from_json(config["system"], 2)
    fam = semigroup.family_from_json(config["family"])
    depth = int(_limit(config, "depth", len(fam)))
    window = coloring.integer_window(int(config.get("radius", _limit(config, "radius", 20))))
    s = int(config.get("s", _limit(config, "s", 1)))
    hit = coloring.corollary_return_set(A, R, fam, depth, window, s)
    params = {"radius": window.radius, "band_width": window.band_width, "s": s}
    if hit is None:
        return {"found": False, "window": params}, [{"beta": None}]
    beta, ret = hit
    members = sorted(coloring.z_value(g) for g in ret)
    band = coloring.syndetic_band(ret, window, s)
    return ({"found": True, "beta": beta, "return_set": members, "band": list(band), "window": params},
            [{"beta": " ".join(map(str, beta)), "size": len(members)}])


RUNNERS = {
    "eval": _run_eval,
    "weight": _run_weight,
    "reduce-check": _run_reduce,
    "recurrence": _run_recurrence,
    "ipstar": _run_ipstar,
    "vdw": _run_vdw,
    "group-color": _run_group_color,
    "corollary": _run_corollary,
}


def run(kind: str, config: dict, seed: Optional[int] = None, jobs: Optional[int] = None) -> tuple[dict, int, list]:
    """Dispatch one experiment; returns (report, exit code, table rows)."""
    start = time.monotonic()
    report: dict = {"schema": SCHEMA, "kind": kind}
    config = dict(config)
    if seed is not None:
        config["seed"] = seed
    config.setdefault("seed", 0)
    report["seed"] = config["seed"]
    report["config"] = config
    table: list = []
    try:
        if kind not in RUNNERS:
            raise ValueError(f"unknown kind {kind!r}")
        jsonschema.validate(config, PAYLOAD_SCHEMAS[kind])
        budget = _limit(config, "time_budget")
        deadline = start + float(budget) if budget else None
        rng = random.Random(config["seed"])
        result, table = RUNNERS[kind](config, rng, resolve_jobs(jobs), deadline)
        report["status"] = "ok"
        report["result"] = result
        code = EXIT_OK
    except BudgetExceeded as exc:
        report["status"] = "budget_exceeded"
        report["result"] = exc.partial
        code = EXIT_BUDGET
    except CheckFailed as exc:
        report["status"] = "check_failed"
        report["result"] = exc.result
        code = EXIT_INVARIANT
    except AssertionError as exc:
        report["status"] = "check_failed"
        report["error"] = str(exc)
        code = EXIT_INVARIANT
    except (jsonschema.ValidationError, ValueError, KeyError, TypeError) as exc:
        report["status"] = "invalid_config"
        report["error"] = f"{type(exc).__name__}: {getattr(exc, 'message', exc)}"
        code = EXIT_SCHEMA
    report["wall_time"] = round(time.monotonic() - start, 6)
    return encode(report), code, encode(table)


def render(report: dict, table: list, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    rows = table or [{"status": report.get("status")}]
    fields = list(dict.fromkeys(k for r in rows for k in r))
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nilrec", description=__doc__.splitlines()[0])
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--config", required=True, help="JSON or TOML experiment file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None, help="worker processes (default: $NILREC_JOBS or 1)")
    parser.add_argument("--emit", choices=("json", "csv"), default="json")
    parser.add_argument("--out", default=None, help="write the report here instead of stdout")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"nilrec: cannot read config: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    report, code, table = run(args.kind, config, args.seed, args.jobs)
    text = render(report, table, args.emit)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if code:
        print(f"nilrec: {report['status']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
