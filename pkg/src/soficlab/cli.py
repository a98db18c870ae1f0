"""``soficlab`` command line.

Every command prints one JSON report on stdout. Exit status is 0 on success,
2 on a configuration error and 1 on a runtime failure (the report then
carries ``"status": "error"`` and whatever was computed).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .entropy import finite_scale_entropy, random_sofic_entropy
from .errors import ConfigError, ExhaustedTries, Infeasible, SoficLabError
from .graphs import lemma_montecarlo
from .groups import FiniteGroup, FreeGroup, Group, Integers, Lattice, ball, group_from_spec, interval, inverse_set
from .keylemma import StabExperimentConfig, run_stab_experiment
from .metrics import FinitePointSet, exact_separated, greedy_separated
from .planner import plan_parameters
from .shift import Neighborhood, Proposal, StabBlock, measure_from_spec, read_configurations
from .sofic import RandomSoficModel, build_cyclic, build_torus, quality, regular_representation, sample_free

SCHEMA_VERSION = 1


class ReportFailure(Exception):
    def __init__(self, partial: dict, error: Exception):
        super().__init__(str(error))
        self.partial = partial
        self.error = error


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o, key=repr)
    if hasattr(o, "to_json"):
        return o.to_json()
    raise TypeError(f"not serializable: {type(o)}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_jsonable, allow_nan=True)


# --- parsing helpers ---------------------------------------------------------------

def parse_window(text: str, group: Group) -> frozenset:
    """``ball:R``, or comma-separated elements; on Z also ranges ``a..b``.

    Lattice elements are written ``x/y``; free-group elements as words such as
    ``aB``.
    """
    text = str(text).strip()
    if text.startswith("ball:"):
        return ball(group, int(text[5:]))
    out = set()
    for tok in filter(None, (t.strip() for t in text.split(","))):
        if isinstance(group, Integers) and ".." in tok[1:]:
            i = tok.index("..", 1)
            out |= interval(int(tok[:i]), int(tok[i + 2:]))
        elif isinstance(group, Integers) or isinstance(group, FiniteGroup):
            out.add(int(tok))
        elif isinstance(group, Lattice):
            out.add(tuple(int(c) for c in tok.split("/")))
        else:
            out.add(group.parse(tok))
    if not out:
        raise ConfigError("empty window")
    return frozenset(out)


def _load_config(path: str | None, section: str) -> dict:
    if not path:
        return {}
    try:
        data = tomllib.loads(Path(path).read_text())
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return dict(data.get(section, data))


def _merge(args: argparse.Namespace, cfg: dict, defaults: dict) -> dict:
    """Flags win over the config file, which wins over defaults."""
    out = dict(defaults)
    out.update({k.replace("-", "_"): v for k, v in cfg.items()})
    for k in defaults:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    return out


def _require_seed(seed):
    if seed is None:
        raise ConfigError("--seed is required for randomized commands")
    return int(seed)


def _build_map(group: Group, approx: str, n: int, support: frozenset, seed, radius: int | None = None):
    if approx in ("cyclic", "auto") and isinstance(group, Integers):
        return build_cyclic(n, support)
    if approx in ("torus", "auto") and isinstance(group, Lattice):
        return build_torus((n,) * group.d, support)
    if approx in ("regular", "auto") and isinstance(group, FiniteGroup):
        return regular_representation(group)
    if approx in ("free", "auto") and isinstance(group, FreeGroup):
        r = radius if radius is not None else max(group.length(g) for g in support)
        return sample_free(group.d, n, r, _require_seed(seed))
    raise ConfigError(f"approximation {approx!r} unavailable for {group!r}")


# --- commands ---------------------------------------------------------------------

def cmd_approx(args) -> dict:
    group = group_from_spec(args.group)
    if args.radius < 0:
        raise ConfigError("radius must be non-negative")
    support = ball(group, args.radius)
    seed = args.seed
    xi = _build_map(group, args.family, args.n, support, seed, args.radius)
    F = ball(group, args.radius // 2)
    q = quality(xi, F)
    return {
        "params": {"group": group.to_spec(), "n": args.n, "radius": args.radius, "family": args.family, "quality_window_radius": args.radius // 2},
        "seeds": {"master": seed},
        "results": {**xi.to_json(with_perms=args.with_perms), "defects": q.to_json(group)},
        "invariants": {"identity_is_identity": bool(np.array_equal(xi.perm(group.identity), np.arange(xi.n))),
                       "symmetric_flag_consistent": (not xi.symmetric) or xi.check_symmetric(),
                       "hom_defect_zero_if_exact": (not xi.exact_hom) or q.max_hom_defect == 0.0},
    }


ENTROPY_DEFAULTS = dict(group="Z", approx="auto", n=2000, depth=1, measure="fair", window="0,1", tv=0.05, delta=0.01,
                        budget=200, trials=1, seed=None, method="auto", proposal="iid", noise=0.0, noise_from=0,
                        stab=None, volume_tries=None, alpha=1e-3)


def _stab_block(spec, group) -> StabBlock | None:
    """``M,delta,eps,F1,F2`` with windows in ``parse_window`` syntax separated by ``;``."""
    if spec is None:
        return None
    if isinstance(spec, dict):
        return StabBlock(int(spec["M"]), float(spec["delta"]), float(spec["eps"]),
                         parse_window(spec["F1"], group), parse_window(spec["F2"], group))
    parts = str(spec).split(";")
    if len(parts) != 5:
        raise ConfigError("stab block must be 'M;delta;eps;F1;F2'")
    return StabBlock(int(parts[0]), float(parts[1]), float(parts[2]), parse_window(parts[3], group), parse_window(parts[4], group))


def cmd_entropy(args) -> dict:
    p = _merge(args, _load_config(args.config, "entropy"), ENTROPY_DEFAULTS)
    seed = _require_seed(p["seed"])
    group = group_from_spec(p["group"])
    mu = measure_from_spec(p["measure"], group, int(p["depth"]))
    O = Neighborhood(parse_window(p["window"], group), mu, float(p["tv"]), _stab_block(p["stab"], group))
    need = inverse_set(O.full_window(), group) | {group.identity}
    proposal = Proposal(p["proposal"], float(p["noise"]), int(p["noise_from"]))
    kw = dict(method=p["method"], proposal=proposal, volume_tries=p["volume_tries"], alpha=float(p["alpha"]))
    n = int(p["n"])
    if isinstance(group, FreeGroup):
        model = RandomSoficModel(group.d, n, max(group.length(g) for g in need))
        est = random_sofic_entropy(mu, model, O, float(p["delta"]), int(p["trials"]), int(p["budget"]), seed, args.threads, **kw)
    else:
        xi = _build_map(group, p["approx"], n, need, seed)
        est = finite_scale_entropy(mu, xi, O, float(p["delta"]), int(p["budget"]), seed, threads=args.threads, **kw)
    lo, hi = est.value_lower, est.value_upper
    return {"params": {k: v for k, v in p.items() if k != "seed"}, "seeds": {"master": seed}, "results": est.to_json(),
            "invariants": {"lower_le_upper": bool(lo <= hi) if not isinstance(hi, float) or not isinstance(lo, float) else lo <= hi + 1e-12}}


LEMMA_DEFAULTS = dict(family="perms:4", n=4096, k=4, M=None, kappa=0.25, trials=400, seed=None, override=False)


def cmd_lemma(args) -> dict:
    p = _merge(args, _load_config(args.config, "lemma32"), LEMMA_DEFAULTS)
    seed = _require_seed(p["seed"])
    M = int(p["M"] if p["M"] is not None else p["k"])
    res = lemma_montecarlo(p["family"], int(p["n"]), int(p["k"]), M, float(p["kappa"]), int(p["trials"]), seed,
                           args.threads, bool(p["override"]))
    if args.jsonl:
        for row in res.per_trial:
            print(json.dumps(row))
    return {"params": {**{k: v for k, v in p.items() if k != "seed"}, "M": M}, "seeds": {"master": seed},
            "results": res.to_json(), "invariants": res.checks}


def cmd_stab(args) -> dict:
    if args.action != "experiment":
        raise ConfigError("only 'stab experiment' is available")
    seed = _require_seed(args.seed)
    raw = _load_config(args.config, "stab")
    known = {f.name for f in fields(StabExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown stab options: {sorted(unknown)}")
    for key in ("pattern", "tv_window"):
        if key in raw:
            raw[key] = tuple(raw[key])
    cfg = StabExperimentConfig(**raw)
    res = run_stab_experiment(cfg, seed, args.threads)
    inv = {}
    if res.get("status") == "ok":
        inv = {"claimA_zero": res["claimA_violations"] == 0,
               "claimD_in_hypothesis_zero": res["claimD"]["in_hypothesis_violations"] == 0}
        if "corrupted_label" in res:
            inv["corruption_detected"] = res["corrupted_label"]["claimA_violations"] >= 1
    return {"params": {f.name: getattr(cfg, f.name) for f in fields(cfg)}, "seeds": {"master": seed}, "results": res, "invariants": inv}


def cmd_plan(args) -> dict:
    group = group_from_spec(args.group)
    mu = measure_from_spec(args.measure, group, args.depth)
    params = {"eta": args.eta, "depth": args.depth, "measure": args.measure, "group": group.to_spec(), "samples": args.samples}
    try:
        out = plan_parameters(args.eta, args.depth, mu, args.samples, args.seed)
    except Infeasible as e:
        raise ReportFailure({"params": params, "seeds": {"master": args.seed},
                             "results": {"infeasible": e.condition, "message": str(e), "report": e.report}}, e) from e
    res = out.to_json()
    return {"params": params, "seeds": {"master": args.seed}, "results": res,
            "invariants": {"all_constraints_hold": out.all_hold, "separation_bound_below_eta": res["separation_bound"] < args.eta}}


def cmd_sep(args) -> dict:
    try:
        text = Path(args.input).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {args.input}: {e}") from e
    S = FinitePointSet.from_configurations(read_configurations(text), args.metric)
    greedy = len(greedy_separated(S, args.delta))
    res = {"points": len(S), "delta": args.delta, "metric": args.metric}
    inv = {}
    if args.greedy:
        res.update(count=greedy, kind="greedy-lower-bound")
    else:
        exact = exact_separated(S, args.delta, args.cap)
        res.update(count=exact, kind="exact", greedy=greedy)
        inv["greedy_le_exact"] = greedy <= exact
    return {"params": {"input": args.input, "delta": args.delta}, "seeds": {}, "results": res, "invariants": inv}


# --- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads; results do not depend on it")
    common.add_argument("--timing", action="store_true", default=argparse.SUPPRESS, help="add wall-clock time to the report")

    ap = argparse.ArgumentParser(prog="soficlab", description=__doc__.splitlines()[0], parents=[common])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("approx", parents=[common], help="build a sofic map and measure its defects")
    a.add_argument("action", choices=["build"])
    a.add_argument("--group", default="Z")
    a.add_argument("--family", default="auto", choices=["auto", "cyclic", "torus", "free", "regular"])
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--radius", type=int, default=2)
    a.add_argument("--seed", type=int)
    a.add_argument("--with-perms", action="store_true")
    a.set_defaults(func=cmd_approx)

    e = sub.add_parser("entropy", parents=[common], help="finite-scale entropy bounds")
    e.add_argument("--config")
    e.add_argument("--group")
    e.add_argument("--approx", choices=["auto", "cyclic", "torus", "free", "regular"])
    e.add_argument("--n", type=int)
    e.add_argument("--depth", type=int)
    e.add_argument("--measure")
    e.add_argument("--window")
    e.add_argument("--tv", type=float)
    e.add_argument("--delta", type=float)
    e.add_argument("--budget", type=int)
    e.add_argument("--trials", type=int)
    e.add_argument("--method", choices=["auto", "exhaustive", "sampled"])
    e.add_argument("--proposal", choices=["iid", "uniform", "planted"])
    e.add_argument("--noise", type=float)
    e.add_argument("--noise-from", dest="noise_from", type=int)
    e.add_argument("--stab", help="M;delta;eps;F1;F2")
    e.add_argument("--volume-tries", dest="volume_tries", type=int)
    e.add_argument("--alpha", type=float)
    e.add_argument("--seed", type=int)
    e.set_defaults(func=cmd_entropy)

    for name in ("lemma32", "domination"):
        g = sub.add_parser(name, parents=[common], help="Monte Carlo check of the dominating-set lemma")
        g.add_argument("--config")
        g.add_argument("--family")
        g.add_argument("--n", type=int)
        g.add_argument("--k", type=int)
        g.add_argument("--M", type=int)
        g.add_argument("--kappa", type=float)
        g.add_argument("--trials", type=int)
        g.add_argument("--seed", type=int)
        g.add_argument("--override", action="store_true", default=None, help="run even outside the lemma's hypotheses")
        g.add_argument("--jsonl", action="store_true", help="emit one JSON line per trial before the report")
        g.set_defaults(func=cmd_lemma)

    s = sub.add_parser("stab", parents=[common], help="stabilizer pipeline experiment")
    s.add_argument("action", choices=["experiment"])
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_stab)

    p = sub.add_parser("plan", parents=[common], help="parameter cascade")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--measure", required=True)
    p.add_argument("--group", default="Z")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_plan)

    q = sub.add_parser("sep", parents=[common], help="separated-set counts of a point file")
    q.add_argument("--input", required=True)
    q.add_argument("--delta", type=float, required=True)
    mode = q.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--greedy", action="store_true")
    q.add_argument("--metric", choices=["avg", "max"], default="avg")
    q.add_argument("--cap", type=int, default=24)
    q.set_defaults(func=cmd_sep)
    return ap


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    args.threads = getattr(args, "threads", 1)
    args.timing = getattr(args, "timing", False)
    if args.threads < 1:
        ap.error("--threads must be >= 1")
    t0 = time.perf_counter()
    # execution settings (threads, timing) stay out of the report so that it is reproducible
    name = " ".join(filter(None, [args.command, getattr(args, "action", None)]))
    base = {"schema_version": SCHEMA_VERSION, "command": name}
    try:
        body = args.func(args)
        report = {**base, "status": "ok", **body}
        code = 0
    except ConfigError as e:
        print(f"soficlab: configuration error: {e}", file=sys.stderr)
        return 2
    except ReportFailure as e:
        report = {**base, "status": "error", "error": f"{type(e.error).__name__}: {e}", **e.partial}
        code = 1
    except ExhaustedTries as e:
        report = {**base, "status": "error", "error": f"ExhaustedTries: {e}", "results": {"found": len(e.found)}}
        code = 1
    except SoficLabError as e:
        report = {**base, "status": "error", "error": f"{type(e).__name__}: {e}"}
        code = 1
    if args.timing:
        report["wall_clock_seconds"] = time.perf_counter() - t0
    inv = report.get("invariants", {})
    report["invariants"] = [{"name": k, "pass": bool(v)} for k, v in inv.items()] if isinstance(inv, dict) else inv
    print(dumps(report), file=out)
    return code


def main(argv=None) -> int:
    return run(argv)
