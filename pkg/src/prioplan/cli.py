"""Command-line front end: ``prioplan <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench, instances
from .prioritized import pp, rpp
from .problem import ProblemInstance, validate_instance
from .roadmap import check_rpp_solvable, validate_infrastructure
from .sim import CostTable, SimConfig, load_events, run_ad, run_clad, run_sd


def _load(path) -> ProblemInstance:
    return ProblemInstance.load(path)


def cmd_generate(a) -> int:
    specs = [instances.GenSpec(env, mode, n, a.count, a.seed)
             for env in a.env for mode in a.mode for n in a.n]
    paths = instances.write_suite(specs, a.out)
    print(f"wrote {len(paths)} instances under {a.out}")
    return 0


def cmd_validate(a) -> int:
    bad = 0
    for path in a.instance:
        problems = validate_instance(_load(path))
        print(f"{path}: {'ok' if not problems else '; '.join(problems)}")
        bad += bool(problems)
    return 1 if bad else 0


def cmd_check_infra(a) -> int:
    if a.env:
        env = instances.load_environment(a.env)
        w, rm, eps, r = env.workspace, env.roadmap, env.endpoints, a.radius or env.radius
    else:
        from .geometry import load_map
        from .roadmap import Roadmap

        w = load_map(a.map)
        rm = Roadmap.load(a.roadmap)
        eps = [tuple(p) for p in json.loads(Path(a.endpoints).read_text())]
        r = a.radius or instances.ROBOT_RADIUS
    rep = validate_infrastructure(w, rm, eps, r)
    print(json.dumps({"valid": rep.valid, "endpoints": rep.endpoint_count,
                      "failing_pairs": rep.failing_pairs}))
    return 0 if rep.valid else 1


def cmd_check_solvable(a) -> int:
    rep = check_rpp_solvable(_load(a.instance))
    print(json.dumps({"solvable": rep.solvable, "per_robot": rep.per_robot}))
    return 0 if rep.solvable else 1


def cmd_solve(a) -> int:
    inst = _load(a.instance)
    res = (pp if a.alg == "pp" else rpp)(inst, a.dt)
    if res:
        doc = {"status": "success", "runtime": res.runtime, "trajectories": res.to_json()}
    else:
        doc = {"status": "failure", "robot": res.robot_id, "reason": res.reason,
               "phase": res.phase, "runtime": res.runtime}
    _emit(doc, a.out)
    return 0 if res else 1


def cmd_simulate(a) -> int:
    inst = _load(a.instance)
    costs = CostTable.from_json(json.loads(Path(a.costs).read_text())) if a.costs else None
    variant = a.alg.upper()
    if variant == "CLAD-PP" and costs is None:
        costs = CostTable()
    cfg = SimConfig(variant, latency=a.latency, loss=a.loss, rebroadcast=a.rebroadcast,
                    seed=a.seed, costs=costs, dt=a.dt, end_time=a.end_time)
    if variant.startswith("SD"):
        out = run_sd(inst, cfg)
    elif variant.startswith("AD"):
        out = run_ad(inst, cfg)
    else:
        out = run_clad(inst, cfg, load_events(a.events) if a.events else ())
    _emit(out.to_json(), a.out)
    return 0 if out.success else 1


def cmd_bench(a) -> int:
    cfg = bench.SuiteConfig.load(a.config)
    res = bench.run_suite(cfg)
    for agg in res.aggregates:
        print(f"{agg.environment:11s} {agg.mode:14s} n={agg.n:<3d} {agg.algorithm:7s} "
              f"coverage={agg.coverage:.2f}")
    print(f"results in {cfg.out}")
    return 0


def cmd_plot(a) -> int:
    res = bench.SuiteResult.read_csv(a.input)
    out = a.out or str(Path(a.input).parent / "plots")
    paths = bench.plot(res, out)
    print(f"wrote {len(paths)} charts to {out}")
    return 0


def _emit(doc, out) -> None:
    text = json.dumps(doc, indent=1)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prioplan", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write random instances in the standard layout")
    g.add_argument("--env", nargs="+", default=["empty-hall"], choices=instances.ENVIRONMENTS)
    g.add_argument("--mode", nargs="+", default=["infrastructure"], choices=instances.MODES)
    g.add_argument("--n", nargs="+", type=int, default=[2, 5, 10])
    g.add_argument("--count", type=int, default=25)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="suite")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("validate", help="check instance invariants")
    v.add_argument("instance", nargs="+")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("check-infra", help="check that an endpoint set forms a valid infrastructure")
    c.add_argument("--env", choices=instances.ENVIRONMENTS)
    c.add_argument("--map")
    c.add_argument("--roadmap")
    c.add_argument("--endpoints")
    c.add_argument("--radius", type=float)
    c.set_defaults(func=cmd_check_infra)

    s = sub.add_parser("check-solvable", help="static solvability test for revised prioritized planning")
    s.add_argument("instance")
    s.set_defaults(func=cmd_check_solvable)

    so = sub.add_parser("solve", help="centralized planning")
    so.add_argument("instance")
    so.add_argument("--alg", choices=["pp", "rpp"], default="rpp")
    so.add_argument("--dt", type=float, default=0.5)
    so.add_argument("--out")
    so.set_defaults(func=cmd_solve)

    si = sub.add_parser("simulate", help="decentralized planning in the event simulator")
    si.add_argument("instance")
    si.add_argument("--alg", choices=["sd-pp", "sd-rpp", "ad-pp", "ad-rpp", "clad-pp"],
                    default="ad-rpp")
    si.add_argument("--costs", help="JSON cost table; wall-clock timing if omitted")
    si.add_argument("--events", help="JSON event script (clad-pp)")
    si.add_argument("--latency", type=float, default=0.0)
    si.add_argument("--loss", type=float, default=0.0)
    si.add_argument("--rebroadcast", type=float, default=1.0)
    si.add_argument("--end-time", type=float, default=60.0)
    si.add_argument("--seed", type=int, default=0)
    si.add_argument("--dt", type=float, default=0.5)
    si.add_argument("--out")
    si.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--config", required=True)
    b.set_defaults(func=cmd_bench)

    pl = sub.add_parser("plot", help="charts from a runs CSV")
    pl.add_argument("--in", dest="input", required=True)
    pl.add_argument("--out")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
