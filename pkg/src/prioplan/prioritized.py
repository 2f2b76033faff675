"""Centralized prioritized planners and the constructive wait-then-go oracle."""

from __future__ import annotations

import time
from typing import Optional, Union

from .geometry import EMPTY_REGIONS, RegionSet
from .planner import NO_STATIC_PATH, PlanQuery, PlanResult, edge_steps, plan
from .problem import Failure, ProblemInstance, Solution
from .roadmap import avoidance_regions, shortest_path
from .trajectory import AnnouncedRegion, Trajectory, arrival_time

DEFAULT_DT = 0.5


def plan_for(inst: ProblemInstance, i: int, dynamic, blocked: RegionSet = EMPTY_REGIONS,
             dt: float = DEFAULT_DT, horizon: Optional[float] = None,
             prefix: Optional[Trajectory] = None, start: Optional[int] = None,
             goal: Optional[int] = None) -> PlanResult:
    """Best trajectory for robot index ``i`` against ``dynamic`` regions."""
    robot = inst.robots[i]
    q = PlanQuery(inst.roadmap, robot.radius, robot.speed,
                  inst.start_vertex(i) if start is None else start,
                  inst.goal_vertex(i) if goal is None else goal,
                  tuple(dynamic), blocked, dt, horizon, prefix)
    return plan(q)


def _prioritized(inst: ProblemInstance, revised: bool, dt: float,
                 label: str) -> Union[Solution, Failure]:
    t_start = time.perf_counter()
    regions = []
    trajectories = {}
    expansions = []
    for i, robot in enumerate(inst.robots):
        blocked = inst.lower_starts(i) if revised else EMPTY_REGIONS
        res = plan_for(inst, i, regions, blocked, dt)
        expansions.append(res.expansions)
        if res.trajectory is None:
            return Failure(robot.id, res.reason, phase=f"iteration {i + 1}", solver=label,
                           runtime=time.perf_counter() - t_start,
                           stats={"expansions": expansions})
        trajectories[robot.id] = res.trajectory
        regions.append(AnnouncedRegion(robot.id, robot.radius, res.trajectory))
    return Solution(trajectories, label, time.perf_counter() - t_start,
                    {r.id: r.radius for r in inst.robots}, {"expansions": expansions})


def pp(inst: ProblemInstance, dt: float = DEFAULT_DT) -> Union[Solution, Failure]:
    """Classical prioritized planning: robot i avoids the trajectories of robots 1..i-1."""
    return _prioritized(inst, False, dt, "PP")


def rpp(inst: ProblemInstance, dt: float = DEFAULT_DT) -> Union[Solution, Failure]:
    """Revised prioritized planning: as PP, and robot i also avoids the start
    bodies of all lower-priority robots."""
    return _prioritized(inst, True, dt, "RPP")


def sequential_oracle(inst: ProblemInstance, dt: float = DEFAULT_DT) -> Union[Solution, Failure]:
    """One robot moves at a time.

    Robot i waits at its start until every higher-priority robot has arrived,
    then follows its shortest path that avoids lower-priority starts and
    higher-priority goals at full speed.
    """
    t_start = time.perf_counter()
    rm = inst.roadmap
    pts = rm.points
    trajectories = {}
    t_bar = 0.0
    for i, robot in enumerate(inst.robots):
        path = shortest_path(rm, inst.start_vertex(i), inst.goal_vertex(i), robot.radius,
                             avoidance_regions(inst, i))
        if path is None:
            return Failure(robot.id, NO_STATIC_PATH, phase=f"iteration {i + 1}",
                           solver="oracle", runtime=time.perf_counter() - t_start)
        k = int(round(t_bar / dt))
        points = [pts[path.vertices[0]]]
        times = [0.0]
        if k > 0:
            points.append(pts[path.vertices[0]])
            times.append(k * dt)
        for a, b in zip(path.vertices, path.vertices[1:]):
            k += edge_steps(rm_len(pts, a, b), robot.speed, dt)
            points.append(pts[b])
            times.append(k * dt)
        tr = Trajectory(tuple(points), tuple(times))
        trajectories[robot.id] = tr
        t_bar = max(t_bar, arrival_time(tr, robot.goal))
    return Solution(trajectories, "oracle", time.perf_counter() - t_start,
                    {r.id: r.radius for r in inst.robots})


def rm_len(pts, a: int, b: int) -> float:
    (ax, ay), (bx, by) = pts[a], pts[b]
    return ((ax - bx) ** 2 + (ay - by) ** 2) ** 0.5
