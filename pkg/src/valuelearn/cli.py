"""Command-line interface: ``valuelearn <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import harness, instances, learners, oracles, price_learning, query_learners
from .itemset import ItemSet
from .valuations import Valuation, load_valuation, valuation_from_dict


def parse_params(text: str | None) -> dict:
    """Parse ``k=v,k2=v2``; values are JSON when they parse, else strings.
    Commas inside brackets belong to the value."""
    out: dict = {}
    if not text:
        return out
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch in "[{":
            depth += 1
        elif ch in "]}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    for part in filter(None, (p.strip() for p in parts)):
        if "=" not in part:
            raise SystemExit(f"--params: expected key=value, got {part!r}")
        key, val = part.split("=", 1)
        try:
            out[key.strip()] = json.loads(val)
        except json.JSONDecodeError:
            out[key.strip()] = val
    return out


def _need(params: dict, key: str, cmd: str):
    if key not in params:
        raise SystemExit(f"{cmd}: missing parameter {key!r} in --params")
    return params[key]


def _emit(obj, args) -> None:
    if isinstance(obj, harness.ExperimentReport):
        text = obj.to_csv() if args.format == "csv" else json.dumps(obj.to_dict(), indent=2)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in obj.items():
            w.writerow([k, json.dumps(v) if isinstance(v, (dict, list)) else v])
        text = buf.getvalue()
    else:
        text = json.dumps(obj, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _parse_set(text: str, n: int) -> ItemSet:
    text = text.strip()
    return ItemSet(n, tuple(int(t) for t in text.split(",") if t.strip())) if text else ItemSet.empty(n)


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_train(path: str) -> list[learners.Sample]:
    samples = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                samples.append(learners.Sample.from_dict(json.loads(line)))
            except (KeyError, ValueError, json.JSONDecodeError) as e:
                raise SystemExit(f"{path}:{lineno}: bad sample ({e})")
    return samples


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> None:
    p = parse_params(args.params)
    if args.kind == "family":
        fam = instances.gen_intersection_family(int(_need(p, "n", "gen")), int(_need(p, "k", "gen")), args.seed)
        _emit(fam.to_dict(), args)
    elif args.kind == "fB":
        k = int(_need(p, "k", "gen"))
        fam = instances.gen_intersection_family(int(_need(p, "n", "gen")), k, args.seed)
        B = p.get("B")
        if B is None:
            B = np.random.default_rng(args.seed).permutation(k)[: k // 2].tolist()
        if any(not 0 <= int(b) < k for b in B):
            raise SystemExit(f"gen: B must index into [0, {k})")
        trees = [{str(i): 1 for i in fam.sets[int(b)].indices} for b in sorted(set(B))]
        _emit({"n": fam.n, "kind": "xos", "trees": trees}, args)
    elif args.kind == "goemans":
        pair = instances.gen_goemans_pair(int(_need(p, "n", "gen")), float(_need(p, "x", "gen")), args.seed)
        _emit(pair.to_dict(), args)
    else:
        tag = _need(p, "class", "gen")
        n = int(_need(p, "n", "gen"))
        extra = {k: v for k, v in p.items() if k not in ("class", "n")}
        _emit(instances.gen_random(tag, n, extra, args.seed).to_dict(), args)


def cmd_learn(args) -> None:
    p = parse_params(args.params)
    samples = _load_train(args.train)
    n = p.get("n")
    eps = float(p.get("eps", 0.1))
    rng = np.random.default_rng(args.seed)
    cls = args.cls
    try:
        if cls == "xos":
            hyp = learners.pmac_xos(samples, eps, rng=rng, n=n)
        elif cls == "subadditive":
            hyp = learners.pmac_subadditive(samples, eps, rng=rng, n=n)
        elif cls == "oxs-r-leaves":
            hyp = learners.pmac_oxs_r_leaves(samples, float(_need(p, "R", "learn")), eps, rng=rng, n=n)
        elif cls == "xos-r-trees":
            hyp = learners.pmac_xos_r_trees(samples, float(_need(p, "R", "learn")),
                                            float(_need(p, "eta", "learn")), eps, rng=rng, n=n)
        elif cls == "unit-demand":
            hyp = learners.unit_demand_learn(samples, n=n)
        else:
            hyp = learners.pac_oxs_const_trees(samples, int(_need(p, "R", "learn")), n=n)
    except learners.LearnerInfeasible as e:
        raise SystemExit(str(e))
    _emit(hyp.to_dict(), args)


def _load_model(path: str):
    d = _load_json(path)
    if "kind" in d:
        return valuation_from_dict(d)
    return learners.hypothesis_from_dict(d)


def cmd_eval(args) -> None:
    model = _load_model(args.input)
    n = model.n
    sets = [_parse_set(s, n) for s in args.sets.split(";")] if args.sets is not None else []
    if isinstance(model, Valuation):
        vals = [model.value(S) for S in sets]
    else:
        vals = [model.predict(S) for S in sets]
    _emit({"values": [{"set": list(S.indices), "value": v} for S, v in zip(sets, vals)]}, args)


def cmd_verify(args) -> None:
    v = load_valuation(args.input)
    names = [c.strip() for c in args.checks.split(",") if c.strip()]
    try:
        report = oracles.run_checks(v, names)
    except ValueError as e:
        raise SystemExit(str(e))
    _emit(report, args)


def cmd_vq_learn(args) -> None:
    v = load_valuation(args.target)
    oracle = query_learners.ValueOracle(v)
    hyp = query_learners.vq_learn_item_based(oracle, args.cls, args.R)
    out = {"hypothesis": hyp.to_dict(), "queries": oracle.queries}
    if args.verify:
        out["check"] = query_learners.vq_hypothesis_check(oracle, hyp, args.R).to_dict()
    _emit(out, args)


def cmd_price_sim(args) -> None:
    v = load_valuation(args.target)
    agent = price_learning.AgentOracle(v, args.H)
    rng = np.random.default_rng(args.seed)
    if args.mode == "vq":
        hyp = price_learning.vq_with_prices(agent, args.cls, args.R)
        out = {"mode": "vq", "hypothesis": hyp.to_dict(), "queries": agent.queries}
        if v.n <= query_learners.CHECK_MAX_N:
            oracle = query_learners.ValueOracle(v)
            out["check"] = query_learners.vq_hypothesis_check(oracle, hyp, 2 * args.R).to_dict()
        _emit(out, args)
        return
    D = harness.UniformSubsets(v.n)
    try:
        hyp, log = price_learning.pmac_with_prices(agent, D, args.approx_beta, args.p, args.eta,
                                                   args.eps, args.delta, args.m, rng, return_log=True)
    except learners.LearnerInfeasible as e:
        raise SystemExit(str(e))
    rep = harness.empirical_factor(hyp, v, D, args.eps, args.M, seed=args.seed + 1)
    if args.log:
        with open(args.log, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["round", "set", "price", "bought"])
            w.writerows(r.csv_row() for r in log)
    _emit({"mode": "pmac", "rounds": len(log), "alpha_hat": rep.alpha_hat,
           "violation_mass": rep.violation_mass, "hypothesis": hyp.to_dict()}, args)


def cmd_experiment(args) -> None:
    cfg = _load_json(args.config)
    try:
        rep = harness.run_pmac_experiment(cfg, workers=args.workers)
    except harness.ConfigError as e:
        raise SystemExit(f"config error: {e}")
    _emit(rep, args)


def cmd_demo(args) -> None:
    _emit(harness.adversarial_demo(args.n, args.k, args.seed), args)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["json", "csv"], default="json")

    ap = argparse.ArgumentParser(prog="valuelearn", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", parents=[common], help="generate instances")
    s.add_argument("--kind", choices=["family", "fB", "goemans", "random"], required=True)
    s.add_argument("--params", help="k=v,... e.g. n=4096,k=64 or class=oxs,n=6")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("learn", parents=[common], help="learn from a JSONL training file")
    s.add_argument("--class", dest="cls", required=True,
                   choices=["xos", "subadditive", "oxs-r-leaves", "xos-r-trees", "unit-demand",
                            "oxs-const-trees"])
    s.add_argument("--params", help="k=v,... e.g. R=4,eta=0.5,eps=0.1")
    s.add_argument("--train", required=True)
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("eval", parents=[common], help="evaluate a valuation or hypothesis")
    s.add_argument("--input", required=True)
    s.add_argument("--sets", help='sets separated by ";", items by ",", e.g. "0,1;2"')
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("verify", parents=[common], help="run exhaustive class checks")
    s.add_argument("--input", required=True)
    s.add_argument("--checks", default="monotone,subadd,submod,gs")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("vq-learn", parents=[common], help="learn from singleton value queries")
    s.add_argument("--target", required=True)
    s.add_argument("--class", dest="cls", required=True, choices=list(query_learners.CLASS_TAGS))
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--verify", action="store_true")
    s.set_defaults(func=cmd_vq_learn)

    s = sub.add_parser("price-sim", parents=[common], help="learn from buy/no-buy decisions")
    s.add_argument("--target", required=True)
    s.add_argument("--mode", choices=["pmac", "vq"], default="pmac")
    s.add_argument("--eta", type=float, default=1.0)
    s.add_argument("--eps", type=float, default=0.1)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--H", type=int, required=True)
    s.add_argument("--m", type=int)
    s.add_argument("--M", type=int, default=2000)
    s.add_argument("--approx-beta", type=float, default=1.0)
    s.add_argument("--p", type=float, default=1.0)
    s.add_argument("--class", dest="cls", default="xos-r-trees", choices=list(query_learners.CLASS_TAGS))
    s.add_argument("--R", type=float, default=1.0)
    s.add_argument("--log", help="decision log CSV path")
    s.set_defaults(func=cmd_price_sim)

    s = sub.add_parser("experiment", parents=[common], help="run a JSON-configured experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("demo-lower-bound", parents=[common], help="intersection-family demonstration")
    s.add_argument("--n", type=int, default=65536)
    s.add_argument("--k", type=int, default=128)
    s.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
