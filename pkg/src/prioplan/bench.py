"""Benchmark suite: metrics, per-run records, aggregation over commonly solved instances."""

from __future__ import annotations

import csv
import logging
import math
import signal
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from .geometry import EMPTY_REGIONS
from .planner import lex_field
from .prioritized import pp, rpp
from .problem import Failure, ProblemInstance, Solution
from .sim import CostTable, SimConfig, run_ad, run_sd
from .trajectory import arrival_time

log = logging.getLogger(__name__)

CENTRALIZED = ("PP", "RPP")
DECENTRALIZED = ("SD-PP", "SD-RPP", "AD-PP", "AD-RPP")
ALGORITHMS = CENTRALIZED + DECENTRALIZED
PAIRING = {"SD-PP": "PP", "AD-PP": "PP", "SD-RPP": "RPP", "AD-RPP": "RPP"}
AGG_METRICS = ("runtime", "speedup", "messages", "prolongation")


class UnsolvedInstance(ValueError):
    pass


class NonpositiveRuntime(ValueError):
    pass


class RunTimeout(Exception):
    pass


# --- metrics -------------------------------------------------------------------


def static_durations(inst: ProblemInstance, dt: float = 0.5) -> List[float]:
    """Ignore-others shortest duration t'_i of every robot, quantized to the step lattice."""
    out = []
    for i, r in enumerate(inst.robots):
        steps = lex_field(inst.roadmap, r.radius, r.speed, dt, EMPTY_REGIONS, inst.goal_vertex(i))[0]
        s = steps[inst.start_vertex(i)]
        if math.isinf(s):
            raise UnsolvedInstance(f"robot {r.id} cannot reach its goal at all")
        out.append(s * dt)
    return out


def arrival_times(sol: Solution, inst: ProblemInstance) -> List[float]:
    return [arrival_time(sol.trajectories[r.id], r.goal) for r in inst.robots]


def prolongation_from_times(t_actual: Sequence[float], t_static: Sequence[float]) -> float:
    base = float(sum(t_static))
    if base <= 0.0:
        return 0.0
    return (float(sum(t_actual)) - base) / base


def prolongation(sol: Union[Solution, Failure, None], inst: ProblemInstance,
                 dt: float = 0.5) -> float:
    """Relative excess of the summed arrival times over the ignore-others durations."""
    if not sol:
        raise UnsolvedInstance("prolongation needs a solution")
    return prolongation_from_times(arrival_times(sol, inst), static_durations(inst, dt))


def speedup(central_runtime: float, decentral_runtime: float) -> float:
    if not central_runtime > 0 or not decentral_runtime > 0:
        raise NonpositiveRuntime("runtimes must be positive")
    return central_runtime / decentral_runtime


@dataclass
class Metrics:
    solved: bool
    runtime: float = math.nan
    messages: float = math.nan
    prolongation: float = math.nan
    sum_arrival: float = math.nan
    speedup: float = math.nan


@dataclass
class RunRecord:
    algorithm: str
    environment: str
    mode: str
    n: int
    instance: str
    solved: bool
    timeout: bool
    runtime: float
    messages: float
    prolongation: float
    sum_arrival: float
    speedup: float
    failed_robot: str = ""

    def metrics(self) -> Metrics:
        return Metrics(self.solved, self.runtime, self.messages, self.prolongation,
                       self.sum_arrival, self.speedup)


RECORD_FIELDS = [f.name for f in fields(RunRecord)]


# --- running ----------------------------------------------------------------


@contextmanager
def time_limit(seconds: Optional[float]):
    """Raise RunTimeout if the body runs longer than ``seconds`` (main thread only)."""
    usable = (seconds and seconds > 0 and hasattr(signal, "setitimer")
              and threading.current_thread() is threading.main_thread())
    if not usable:
        yield
        return

    def _fire(signum, frame):
        raise RunTimeout()

    old = signal.signal(signal.SIGALRM, _fire)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def solve(inst: ProblemInstance, algorithm: str, dt: float = 0.5,
          costs: Optional[CostTable] = None, seed: int = 0):
    """Run one algorithm; returns ``(solution_or_failure, runtime, messages)``."""
    if algorithm in CENTRALIZED:
        res = (pp if algorithm == "PP" else rpp)(inst, dt)
        if costs is not None:
            exp = res.stats.get("expansions", [])
            runtime = sum(costs.replan_cost(r.id, e) for r, e in zip(inst.robots, exp))
        else:
            runtime = res.runtime
        return res, runtime, math.nan
    if algorithm in DECENTRALIZED:
        cfg = SimConfig(algorithm, costs=costs, dt=dt, seed=seed)
        out = (run_sd if algorithm.startswith("SD") else run_ad)(inst, cfg)
        if out.success:
            return out.solution, out.time, float(out.messages)
        return Failure(out.failed_robot, out.reason or "", solver=algorithm,
                       runtime=out.time), out.time, float(out.messages)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def run_instance(inst: ProblemInstance, algorithms: Sequence[str], environment: str, mode: str,
                 dt: float = 0.5, costs: Optional[CostTable] = None, timeout: Optional[float] = 60.0,
                 seed: int = 0, keep: Optional[dict] = None) -> List[RunRecord]:
    """One record per algorithm; speedups pair each decentralized run with its centralized twin."""
    recs: Dict[str, RunRecord] = {}
    t_static = None
    for alg in algorithms:
        timed_out = False
        try:
            with time_limit(timeout):
                res, runtime, messages = solve(inst, alg, dt, costs, seed)
        except RunTimeout:
            res, runtime, messages, timed_out = None, math.nan, math.nan, True
        if keep is not None:
            keep[alg] = res
        rec = RunRecord(alg, environment, mode, inst.n, inst.name, bool(res), timed_out,
                        float(runtime), messages, math.nan, math.nan, math.nan,
                        "" if res or res is None else str(res.robot_id))
        if res:
            if t_static is None:
                t_static = static_durations(inst, dt)
            ta = arrival_times(res, inst)
            rec.sum_arrival = float(sum(ta))
            rec.prolongation = prolongation_from_times(ta, t_static)
        recs[alg] = rec
    for alg, rec in recs.items():
        twin = recs.get(PAIRING.get(alg, ""))
        if rec.solved and twin is not None and twin.solved:
            try:
                rec.speedup = speedup(twin.runtime, rec.runtime)
            except NonpositiveRuntime:
                pass
    return [recs[a] for a in algorithms]


# --- aggregation -------------------------------------------------------------


def _mean_se(values: List[float]) -> Tuple[float, float]:
    vals = [v for v in values if not math.isnan(v)]
    if not vals:
        return math.nan, math.nan
    arr = np.asarray(vals, dtype=float)
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return mean, se


@dataclass
class CellAggregate:
    algorithm: str
    environment: str
    mode: str
    n: int
    instances: int
    solved: int
    unsolved: int
    timeouts: int
    coverage: float
    common: int
    means: Dict[str, float] = field(default_factory=dict)
    errors: Dict[str, float] = field(default_factory=dict)


@dataclass
class SuiteResult:
    records: List[RunRecord]
    aggregates: List[CellAggregate] = field(default_factory=list)

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: (r.environment, r.mode, r.n,
                                                           r.instance, r.algorithm))
        if not self.aggregates:
            self.aggregates = aggregate(self.records)

    def cell(self, algorithm: str, environment: str, mode: str, n: int) -> CellAggregate:
        for a in self.aggregates:
            if (a.algorithm, a.environment, a.mode, a.n) == (algorithm, environment, mode, n):
                return a
        raise KeyError((algorithm, environment, mode, n))

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(RECORD_FIELDS)
            for r in self.records:
                w.writerow([_fmt(getattr(r, k)) for k in RECORD_FIELDS])
        return path

    def write_aggregates_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        head = ["algorithm", "environment", "mode", "n", "instances", "solved", "unsolved",
                "timeouts", "coverage", "common"]
        for m in AGG_METRICS:
            head += [f"{m}_mean", f"{m}_se"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(head)
            for a in self.aggregates:
                row = [a.algorithm, a.environment, a.mode, a.n, a.instances, a.solved,
                       a.unsolved, a.timeouts, _fmt(a.coverage), a.common]
                for m in AGG_METRICS:
                    row += [_fmt(a.means[m]), _fmt(a.errors[m])]
                w.writerow(row)
        return path

    @classmethod
    def read_csv(cls, path: str | Path) -> "SuiteResult":
        types = {f.name: f.type for f in fields(RunRecord)}
        recs = []
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                vals = {}
                for k in RECORD_FIELDS:
                    raw = row[k]
                    t = types[k]
                    if t in ("bool", bool):
                        vals[k] = raw == "True"
                    elif t in ("int", int):
                        vals[k] = int(raw)
                    elif t in ("float", float):
                        vals[k] = float(raw)
                    else:
                        vals[k] = raw
                recs.append(RunRecord(**vals))
        return cls(recs)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def aggregate(records: Sequence[RunRecord]) -> List[CellAggregate]:
    """Coverage over all instances; other metrics over instances every algorithm solved."""
    cells: Dict[tuple, List[RunRecord]] = {}
    for r in records:
        cells.setdefault((r.environment, r.mode, r.n), []).append(r)
    out = []
    for (env, mode, n), recs in sorted(cells.items()):
        algs = sorted({r.algorithm for r in recs})
        by_inst: Dict[str, Dict[str, RunRecord]] = {}
        for r in recs:
            by_inst.setdefault(r.instance, {})[r.algorithm] = r
        common = {i for i, d in by_inst.items()
                  if all(a in d and d[a].solved for a in algs)}
        for alg in algs:
            mine = [r for r in recs if r.algorithm == alg]
            solved = sum(r.solved for r in mine)
            timeouts = sum(r.timeout for r in mine)
            agg = CellAggregate(alg, env, mode, n, len(mine), solved,
                                len(mine) - solved - timeouts, timeouts,
                                solved / len(mine), len(common))
            picked = sorted((r for r in mine if r.instance in common), key=lambda r: r.instance)
            for m in AGG_METRICS:
                agg.means[m], agg.errors[m] = _mean_se([getattr(r, m) for r in picked])
            out.append(agg)
    return out


# --- configuration -------------------------------------------------------------


@dataclass
class SuiteConfig:
    """Schema of the YAML benchmark configuration (all keys optional except ``instances``)."""

    instances: str
    environments: List[str] = field(default_factory=lambda: ["empty-hall"])
    modes: List[str] = field(default_factory=lambda: ["infrastructure"])
    n: List[int] = field(default_factory=lambda: [2, 5, 10])
    algorithms: List[str] = field(default_factory=lambda: list(ALGORITHMS))
    timeout: float = 60.0
    dt: float = 0.5
    seed: int = 0
    max_instances: Optional[int] = None
    costs: Optional[dict] = None
    out: str = "results"

    @classmethod
    def load(cls, path: str | Path) -> "SuiteConfig":
        path = Path(path)
        doc = yaml.safe_load(path.read_text()) or {}
        unknown = set(doc) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**doc)
        for key in ("instances", "out"):
            p = Path(getattr(cfg, key))
            if not p.is_absolute():
                setattr(cfg, key, str(path.parent / p))
        return cfg

    def cost_table(self) -> Optional[CostTable]:
        return CostTable.from_json(self.costs) if self.costs is not None else None


def instance_files(root: str | Path, env: str, mode: str, n: int) -> List[Path]:
    d = Path(root) / "instances" / env / mode / f"n{n}"
    if not d.is_dir():
        raise FileNotFoundError(f"missing instance directory {d}")
    files = list(d.glob("i*.json"))
    return sorted(files, key=lambda p: int(p.stem[1:]))


def run_suite(config: Union[str, Path, SuiteConfig], write: bool = True) -> SuiteResult:
    """Run every configured algorithm on every instance; write CSVs to ``cfg.out``."""
    cfg = config if isinstance(config, SuiteConfig) else SuiteConfig.load(config)
    for alg in cfg.algorithms:
        if alg not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {alg!r}")
    costs = cfg.cost_table()
    records: List[RunRecord] = []
    for env in cfg.environments:
        for mode in cfg.modes:
            for n in cfg.n:
                files = instance_files(cfg.instances, env, mode, n)[: cfg.max_instances]
                for f in files:
                    inst = ProblemInstance.load(f)
                    inst = ProblemInstance(inst.workspace, inst.roadmap, inst.robots,
                                           name=f"{env}/{mode}/n{n}/{f.stem}")
                    records += run_instance(inst, cfg.algorithms, env, mode, cfg.dt, costs,
                                            cfg.timeout, cfg.seed)
    result = SuiteResult(records)
    if write:
        out = Path(cfg.out)
        result.write_csv(out / "runs.csv")
        result.write_aggregates_csv(out / "aggregates.csv")
    return result


# --- plotting ---------------------------------------------------------------------

PLOT_METRICS = ("coverage", "runtime", "speedup", "messages", "prolongation")


def plot(result: SuiteResult, out_dir: str | Path) -> List[Path]:
    """One chart per metric per (environment, mode), with standard-error bars."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not result.aggregates:
        raise ValueError("nothing to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result.write_aggregates_csv(out_dir / "aggregates.csv")
    written = []
    groups: Dict[tuple, List[CellAggregate]] = {}
    for a in result.aggregates:
        groups.setdefault((a.environment, a.mode), []).append(a)
    for (env, mode), aggs in sorted(groups.items()):
        ns = sorted({a.n for a in aggs})
        algs = sorted({a.algorithm for a in aggs}, key=lambda s: (ALGORITHMS + (s,)).index(s))
        for metric in PLOT_METRICS:
            series = {}
            for alg in algs:
                ys, es = [], []
                for n in ns:
                    cell = [a for a in aggs if a.algorithm == alg and a.n == n]
                    if not cell:
                        ys.append(math.nan)
                        es.append(math.nan)
                    elif metric == "coverage":
                        ys.append(cell[0].coverage)
                        es.append(0.0)
                    else:
                        ys.append(cell[0].means[metric])
                        es.append(cell[0].errors[metric])
                if not all(math.isnan(y) for y in ys):
                    series[alg] = (ys, es)
            if not series:
                log.info("no %s values for %s/%s; chart omitted", metric, env, mode)
                continue
            fig, ax = plt.subplots(figsize=(5, 3.5))
            if len(ns) == 1:
                names = list(series)
                ax.bar(range(len(names)), [series[a][0][0] for a in names],
                       yerr=[series[a][1][0] for a in names], capsize=3)
                ax.set_xticks(range(len(names)))
                ax.set_xticklabels(names, rotation=30)
            else:
                for alg, (ys, es) in series.items():
                    ax.errorbar(ns, ys, yerr=es, marker="o", capsize=3, label=alg)
                ax.set_xlabel("robots")
                ax.legend(fontsize=7)
            ax.set_ylabel(metric)
            ax.set_title(f"{env} / {mode}")
            fig.tight_layout()
            path = out_dir / f"{env}_{mode}_{metric}.png"
            fig.savefig(path, dpi=100)
            plt.close(fig)
            written.append(path)
    return written
