"""Discrete-event emulation of decentralized prioritized planning.

Every robot is a process with its own trajectory store. Processes exchange
INFORM broadcasts carrying their announced regions; the kernel advances a
virtual clock by the compute time of every handler, either measured on the
wall clock or looked up in a synthetic cost table.
"""

from __future__ import annotations

import heapq
import itertools
import json
import math
import random
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

from .geometry import EMPTY_REGIONS, RegionSet
from .planner import NO_TRAJECTORY, PlanQuery, plan
from .problem import ProblemInstance, Solution
from .trajectory import AnnouncedRegion, Trajectory, TrajectoryStore, consistent

VARIANTS = ("SD-PP", "SD-RPP", "AD-PP", "AD-RPP", "CLAD-PP")


@dataclass(frozen=True)
class CostTable:
    """Deterministic compute times (virtual seconds) of the handler steps.

    A trajectory search costs ``per_robot.get(id, replan) + per_expansion * expansions``;
    a consistency check of an existing trajectory costs ``check``.
    """

    replan: float = 1.0
    check: float = 0.0
    per_robot: Mapping[int, float] = field(default_factory=dict)
    per_expansion: float = 0.0

    def replan_cost(self, robot_id: int, expansions: int = 0) -> float:
        return self.per_robot.get(robot_id, self.replan) + self.per_expansion * expansions

    def to_json(self) -> dict:
        return {"replan": self.replan, "check": self.check,
                "per_robot": {str(k): v for k, v in self.per_robot.items()},
                "per_expansion": self.per_expansion}

    @classmethod
    def from_json(cls, doc: dict) -> "CostTable":
        return cls(float(doc.get("replan", 1.0)), float(doc.get("check", 0.0)),
                   {int(k): float(v) for k, v in doc.get("per_robot", {}).items()},
                   float(doc.get("per_expansion", 0.0)))


ZERO_COST = CostTable(0.0, 0.0)

# fitted to measured handler times of the bundled planner on the empty hall
CALIBRATED_COSTS = CostTable(replan=0.013, check=0.00015, per_expansion=6.6e-5)


@dataclass(frozen=True)
class SimConfig:
    variant: str = "AD-PP"
    latency: float = 0.0
    loss: float = 0.0
    rebroadcast: float = 1.0
    seed: int = 0
    # None means: measure each handler on the wall clock
    costs: Optional[CostTable] = None
    dt: float = 0.5
    end_time: float = 60.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.latency < 0:
            raise ValueError("latency must be non-negative")
        if not 0.0 <= self.loss <= 1.0:
            raise ValueError("loss must be a probability")
        if self.loss > 0 and self.variant != "CLAD-PP":
            raise ValueError("only CLAD-PP tolerates lossy channels")

    @property
    def revised(self) -> bool:
        return self.variant.endswith("RPP")


@dataclass(frozen=True)
class InformMessage:
    sender: int
    payload: AnnouncedRegion
    t_send: float
    t_deliver: float
    dropped: bool = False

    def log_entry(self) -> dict:
        return {"t_send": self.t_send, "t_deliver": self.t_deliver,
                "sender": self.sender, "dropped": self.dropped}


@dataclass
class RobotProcess:
    index: int
    robot_id: int
    radius: float
    speed: float
    start: int
    goal: int
    blocked: RegionSet = EMPTY_REGIONS
    trajectory: Optional[Trajectory] = None
    store: TrajectoryStore = field(default_factory=TrajectoryStore)
    state: str = "idle"
    inbox: deque = field(default_factory=deque)
    broadcasts: int = 0
    epoch: int = 0


@dataclass
class SimOutcome:
    variant: str
    status: str
    failed_robot: Optional[int] = None
    solution: Optional[Solution] = None
    time: float = 0.0
    messages: int = 0
    replans: Dict[int, int] = field(default_factory=dict)
    rounds: int = 0
    log: List[dict] = field(default_factory=list)
    stores: Dict[int, Dict[int, AnnouncedRegion]] = field(default_factory=dict)
    reason: Optional[str] = None

    @property
    def success(self) -> bool:
        return self.status == "success"

    def to_json(self) -> dict:
        return {"variant": self.variant, "status": self.status, "failed_robot": self.failed_robot,
                "reason": self.reason, "time": self.time, "messages": self.messages,
                "replans": {str(k): v for k, v in self.replans.items()}, "rounds": self.rounds,
                "solution": self.solution.to_json() if self.solution else None,
                "log": self.log}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class SimulationError(RuntimeError):
    pass


# --- kernel -----------------------------------------------------------------


class Kernel:
    """Virtual-time event queue ordered by (time, sender priority, sequence number)."""

    def __init__(self):
        self.queue: list = []
        self.now = 0.0
        self._seq = itertools.count()

    def schedule(self, t: float, priority: int, kind: str, payload=None) -> None:
        if t < self.now - 1e-12:
            raise SimulationError("cannot schedule into the past")
        heapq.heappush(self.queue, (t, priority, next(self._seq), kind, payload))

    def pop(self):
        t, prio, _, kind, payload = heapq.heappop(self.queue)
        self.now = t
        return t, prio, kind, payload

    def __len__(self):
        return len(self.queue)


def detect_quiescence(kernel: Kernel, procs: Sequence[RobotProcess]) -> bool:
    """No deliverable message in flight and no process computing or holding work."""
    if any(kind in ("deliver", "done", "start", "local") for _, _, _, kind, _ in kernel.queue):
        return False
    return all(p.state in ("idle", "terminated") and not p.inbox for p in procs)


def _processes(inst: ProblemInstance, revised: bool) -> List[RobotProcess]:
    procs = []
    for i, r in enumerate(inst.robots):
        procs.append(RobotProcess(i, r.id, r.radius, r.speed, inst.start_vertex(i),
                                  inst.goal_vertex(i),
                                  inst.lower_starts(i) if revised else EMPTY_REGIONS))
    return procs


class _Runner:
    """Shared Find-consistent logic and cost accounting."""

    def __init__(self, inst: ProblemInstance, cfg: SimConfig):
        self.inst = inst
        self.cfg = cfg
        self.procs = _processes(inst, cfg.revised)
        self.log: List[dict] = []
        self.messages = 0
        self.rng = random.Random(cfg.seed)

    def search(self, p: RobotProcess, start: Optional[int] = None,
               prefix: Optional[Trajectory] = None):
        q = PlanQuery(self.inst.roadmap, p.radius, p.speed,
                      p.start if start is None else start, p.goal,
                      tuple(p.store.regions()), p.blocked, self.cfg.dt, None, prefix)
        return plan(q)

    def find_consistent(self, p: RobotProcess):
        """Return ``(changed, trajectory | None, cost, reason)`` for process ``p``."""
        costs = self.cfg.costs
        t0 = time.perf_counter()
        if p.trajectory is not None and consistent(p.trajectory, p.radius, p.store):
            cost = costs.check if costs else time.perf_counter() - t0
            return False, p.trajectory, cost, None
        res = self.search(p)
        if costs:
            cost = costs.replan_cost(p.robot_id, res.expansions)
            if p.trajectory is not None:
                cost += costs.check
        else:
            cost = time.perf_counter() - t0
        return True, res.trajectory, cost, res.reason

    def broadcast(self, p: RobotProcess, t: float, deliver) -> None:
        region = AnnouncedRegion(p.robot_id, p.radius, p.trajectory)
        dropped = self.cfg.loss > 0 and self.rng.random() < self.cfg.loss
        msg = InformMessage(p.index, region, t, t + self.cfg.latency, dropped)
        self.log.append(msg.log_entry())
        self.messages += 1
        p.broadcasts += 1
        if not dropped:
            deliver(msg)

    def outcome(self, status: str, t: float, failed: Optional[RobotProcess] = None,
                reason: Optional[str] = None, rounds: int = 0) -> SimOutcome:
        sol = None
        if status == "success":
            sol = Solution({p.robot_id: p.trajectory for p in self.procs}, self.cfg.variant, t,
                           {p.robot_id: p.radius for p in self.procs})
        return SimOutcome(self.cfg.variant, status, failed.robot_id if failed else None, sol, t,
                          self.messages, {p.robot_id: p.broadcasts for p in self.procs}, rounds,
                          self.log, {p.robot_id: dict(p.store._entries) for p in self.procs},
                          reason)


# --- synchronized rounds ------------------------------------------------------


def run_sd(inst: ProblemInstance, cfg: SimConfig) -> SimOutcome:
    """Synchronized rounds separated by a global barrier."""
    if not cfg.variant.startswith("SD"):
        raise ValueError("run_sd needs an SD variant")
    run = _Runner(inst, cfg)
    procs = run.procs
    now = 0.0
    rounds = 0
    while True:
        rounds += 1
        sent: List[InformMessage] = []
        duration = 0.0
        # everyone decides against the store contents of the previous barrier
        results = [run.find_consistent(p) for p in procs]
        for p, (changed, traj, cost, reason) in zip(procs, results):
            if traj is None:
                return run.outcome("failure", now + cost, p, reason or NO_TRAJECTORY, rounds)
            span = cost
            if changed:
                p.trajectory = traj
                run.broadcast(p, now + cost, sent.append)
                span += cfg.latency
            duration = max(duration, span)
        now += duration
        if not sent:
            return run.outcome("success", now, rounds=rounds)
        for msg in sent:
            for q in procs:
                if msg.sender < q.index:
                    q.store.put(msg.payload)


# --- asynchronous event-driven ---------------------------------------------


class _EventRunner(_Runner):
    def __init__(self, inst, cfg):
        super().__init__(inst, cfg)
        self.kernel = Kernel()
        self.failure: Optional[tuple] = None
        self.last_change = 0.0

    def deliver(self, msg: InformMessage) -> None:
        for q in self.procs:
            if q.index != msg.sender:
                self.kernel.schedule(msg.t_deliver, msg.sender, "deliver", (q.index, msg))

    def begin(self, p: RobotProcess, t: float) -> None:
        """Start the next queued job of an idle process."""
        while p.state == "idle" and p.inbox:
            job = p.inbox.popleft()
            self.handle(p, job, t)

    def handle(self, p: RobotProcess, job, t: float) -> None:
        kind, data = job
        if kind == "inform":
            msg = data
            # the handler guard: only higher-priority regions matter
            if msg.sender >= p.index:
                return
            p.store.put(msg.payload)
        changed, traj, cost, reason = self.compute(p, kind, data, t)
        p.state = "computing"
        self.kernel.schedule(t + cost, p.index, "done", (p.index, p.epoch, changed, traj, reason))

    def compute(self, p, kind, data, t):
        return self.find_consistent(p)

    def finish(self, p: RobotProcess, payload, t: float) -> None:
        _, _, changed, traj, reason = payload
        p.state = "idle"
        if traj is None:
            self.failure = (p, reason or NO_TRAJECTORY, t)
            return
        if changed:
            p.trajectory = traj
            self.last_change = t
            self.broadcast(p, t, self.deliver)

    def step(self) -> None:
        t, _, kind, payload = self.kernel.pop()
        if kind == "start":
            p = self.procs[payload]
            p.inbox.append(("init", None))
            self.begin(p, t)
        elif kind == "deliver":
            idx, msg = payload
            p = self.procs[idx]
            p.inbox.append(("inform", msg))
            self.begin(p, t)
        elif kind == "done":
            p = self.procs[payload[0]]
            self.finish(p, payload, t)
            self.begin(p, t)
        else:
            self.other_event(kind, payload, t)

    def other_event(self, kind, payload, t):
        raise SimulationError(f"unexpected event {kind}")


def run_ad(inst: ProblemInstance, cfg: SimConfig) -> SimOutcome:
    """Asynchronous execution; ends when the kernel observes quiescence."""
    if not cfg.variant.startswith("AD"):
        raise ValueError("run_ad needs an AD variant")
    run = _EventRunner(inst, cfg)
    for p in run.procs:
        run.kernel.schedule(0.0, p.index, "start", p.index)
    while run.kernel:
        run.step()
        if run.failure:
            p, reason, t = run.failure
            return run.outcome("failure", t, p, reason)
    if not detect_quiescence(run.kernel, run.procs):
        raise SimulationError("event queue drained without quiescence")
    return run.outcome("success", run.kernel.now)


# --- closed loop ---------------------------------------------------------------


@dataclass(frozen=True)
class ScriptEvent:
    time: float
    robot: int
    kind: str
    point: tuple

    def __post_init__(self):
        if self.kind not in ("retask", "divergence"):
            raise ValueError(f"unknown event kind {self.kind!r}")

    def to_json(self) -> dict:
        key = "goal" if self.kind == "retask" else "position"
        return {"time": self.time, "robot": self.robot, "kind": self.kind, key: list(self.point)}

    @classmethod
    def from_json(cls, doc: dict) -> "ScriptEvent":
        point = doc.get("goal") if doc["kind"] == "retask" else doc.get("position")
        return cls(float(doc["time"]), int(doc["robot"]), doc["kind"], tuple(point))


def load_events(path) -> List[ScriptEvent]:
    with open(path) as fh:
        return [ScriptEvent.from_json(d) for d in json.load(fh)]


class _ClosedLoopRunner(_EventRunner):
    def __init__(self, inst, cfg):
        super().__init__(inst, cfg)
        self.by_id = {p.robot_id: p for p in self.procs}

    def commit_point(self, p: RobotProcess, t: float):
        """First lattice time >= t at which the current trajectory sits on a vertex.

        Returns ``(prefix, vertex)``: the part of the trajectory that is already
        committed and the vertex the new plan starts from.
        """
        dt = self.cfg.dt
        tr = p.trajectory
        xs, ys, K = tr.lattice(dt)
        k = max(0, math.ceil(t / dt - 1e-9))
        rm = self.inst.roadmap
        while k < K:
            v = rm.vertex_at((xs[k], ys[k]))
            if v is not None:
                break
            k += 1
        if k >= K:
            k = max(k, K)
            v = rm.vertex_at(tr.end)
        prefix = tr.prefix_until(k * dt)
        if k * dt > prefix.end_time + 1e-9:
            prefix = Trajectory(prefix.points + (prefix.end,), prefix.times + (k * dt,))
        return prefix, v

    def compute(self, p, kind, data, t):
        costs = self.cfg.costs
        if kind in ("inform", "init") and p.trajectory is not None and consistent(p.trajectory, p.radius, p.store):
            return False, p.trajectory, costs.check, None
        cost = costs.replan_cost(p.robot_id) + (costs.check if p.trajectory is not None else 0.0)
        if p.trajectory is None:
            res = self.search(p)
        else:
            prefix, v = self.commit_point(p, t + cost)
            res = self.search(p, start=v, prefix=prefix if prefix.end_time > 0 else None)
        return True, res.trajectory, cost, res.reason

    def finish(self, p, payload, t):
        _, epoch, changed, traj, reason = payload
        if epoch != p.epoch:
            # diverged while computing; the queued replan supersedes this result
            p.state = "idle"
            return
        super().finish(p, payload, t)

    def diverge(self, p: RobotProcess, point, t: float) -> None:
        rm = self.inst.roadmap
        v = rm.nearest_vertex(point)
        dt = self.cfg.dt
        tf = math.floor(t / dt + 1e-9) * dt
        head = p.trajectory.prefix_until(tf)
        pts, ts = list(head.points), list(head.times)
        if tf > ts[-1] + 1e-9:
            pts.append(pts[-1])
            ts.append(tf)
        target = rm.points[v]
        if math.dist(target, pts[-1]) > 1e-9:
            pts.append(target)
            ts.append(tf + dt)
        p.trajectory = Trajectory(tuple(pts), tuple(ts))
        p.start = v
        p.epoch += 1

    def other_event(self, kind, payload, t):
        if kind == "tick":
            for p in self.procs:
                if p.trajectory is not None:
                    self.broadcast(p, t, self.deliver)
        elif kind == "script":
            ev: ScriptEvent = payload
            p = self.by_id[ev.robot]
            if ev.kind == "retask":
                p.goal = self.inst.roadmap.nearest_vertex(ev.point)
                p.inbox.append(("retask", ev.point))
            else:
                if p.trajectory is not None:
                    self.diverge(p, ev.point, t)
                p.inbox.append(("replan", ev.point))
            self.begin(p, t)
        else:
            raise SimulationError(f"unexpected event {kind}")


def run_clad(inst: ProblemInstance, cfg: SimConfig,
             events: Sequence[ScriptEvent] = ()) -> SimOutcome:
    """Closed-loop asynchronous planning with periodic rebroadcast and lossy links.

    Replanning starts from the first roadmap vertex the robot reaches once the
    computation is done. Success means that the trajectories held at
    ``cfg.end_time`` are pairwise conflict-free.
    """
    if cfg.variant != "CLAD-PP":
        raise ValueError("run_clad needs the CLAD-PP variant")
    if cfg.costs is None:
        raise ValueError("closed-loop runs need a synthetic cost table")
    if not cfg.rebroadcast > 0:
        raise ValueError("rebroadcast period must be positive")
    run = _ClosedLoopRunner(inst, cfg)
    k = run.kernel
    for p in run.procs:
        k.schedule(0.0, p.index, "start", p.index)
    for ev in events:
        if ev.robot not in run.by_id:
            raise ValueError(f"event for unknown robot {ev.robot}")
        k.schedule(ev.time, run.by_id[ev.robot].index, "script", ev)
    n_ticks = int(math.floor(cfg.end_time / cfg.rebroadcast + 1e-9))
    for j in range(1, n_ticks + 1):
        k.schedule(j * cfg.rebroadcast, -1, "tick", None)
    while k and k.queue[0][0] <= cfg.end_time:
        run.step()
        if run.failure:
            p, reason, t = run.failure
            return run.outcome("failure", t, p, reason)
    out = run.outcome("success", run.last_change)
    if any(p.trajectory is None for p in run.procs) or out.solution.conflicts():
        out.status = "failure"
        out.reason = "ConflictAtEndTime"
        out.solution = None
    return out
