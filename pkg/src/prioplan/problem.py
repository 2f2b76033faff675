"""Problem instances and planner results shared by every solver."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .geometry import EPS_GEOM, Disc, Point, RegionSet, Workspace, disc_free
from .roadmap import Roadmap
from .trajectory import AnnouncedRegion, Trajectory, first_conflict


class MalformedInstance(ValueError):
    pass


@dataclass(frozen=True)
class Robot:
    id: int
    radius: float
    speed: float
    start: Point
    goal: Point

    def __post_init__(self):
        if not self.radius > 0 or not self.speed > 0:
            raise ValueError(f"robot {self.id}: radius and speed must be positive")
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "goal", (float(self.goal[0]), float(self.goal[1])))

    def start_disc(self) -> Disc:
        return Disc(self.start, self.radius)

    def goal_disc(self) -> Disc:
        return Disc(self.goal, self.radius)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Workspace, roadmap and robots in priority order (index 0 plans first)."""

    workspace: Workspace
    roadmap: Roadmap
    robots: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "robots", tuple(self.robots))

    @property
    def n(self) -> int:
        return len(self.robots)

    def start_vertex(self, i: int) -> int:
        v = self.roadmap.vertex_at(self.robots[i].start)
        if v is None:
            raise MalformedInstance(f"start of robot {self.robots[i].id} is not a roadmap vertex")
        return v

    def goal_vertex(self, i: int) -> int:
        v = self.roadmap.vertex_at(self.robots[i].goal)
        if v is None:
            raise MalformedInstance(f"goal of robot {self.robots[i].id} is not a roadmap vertex")
        return v

    def lower_starts(self, i: int) -> RegionSet:
        """Start bodies of robots planned after robot ``i``."""
        return RegionSet.of(r.start_disc() for r in self.robots[i + 1:])

    def higher_goals(self, i: int) -> RegionSet:
        """Goal bodies of robots planned before robot ``i``."""
        return RegionSet.of(r.goal_disc() for r in self.robots[:i])

    def permuted(self, order: Sequence[int]) -> "ProblemInstance":
        if sorted(order) != list(range(self.n)):
            raise ValueError("order must be a permutation of robot indices")
        return replace(self, robots=tuple(self.robots[k] for k in order))

    def subset(self, k: int) -> "ProblemInstance":
        return replace(self, robots=self.robots[:k])

    # --- JSON ---------------------------------------------------------------

    def robots_json(self) -> list:
        return [{"id": r.id, "radius": r.radius, "speed": r.speed,
                 "start": list(r.start), "goal": list(r.goal)} for r in self.robots]

    def to_json(self, map_ref: str, roadmap_ref: str) -> dict:
        return {"map": map_ref, "roadmap": roadmap_ref, "robots": self.robots_json()}

    @staticmethod
    def robots_from_json(items) -> tuple:
        return tuple(Robot(int(d["id"]), float(d["radius"]), float(d["speed"]),
                           tuple(d["start"]), tuple(d["goal"])) for d in items)

    @classmethod
    def load(cls, path: str | Path) -> "ProblemInstance":
        """Load an instance file; ``map``/``roadmap`` refs resolve relative to the file."""
        from .geometry import load_map

        path = Path(path)
        doc = json.loads(path.read_text())
        base = path.parent
        w = load_map(_resolve(base, doc["map"]))
        rm = Roadmap.load(_resolve(base, doc["roadmap"]))
        return cls(w, rm, cls.robots_from_json(doc["robots"]), name=path.stem)


def _resolve(base: Path, ref: str) -> Path:
    p = Path(ref)
    if p.is_absolute():
        return p
    for root in [base, *base.parents]:
        if (root / p).exists():
            return root / p
    return base / p


def validate_instance(inst: ProblemInstance) -> List[str]:
    """Human-readable violations of the instance invariants; empty when well-formed."""
    problems = []
    robots = inst.robots
    ids = [r.id for r in robots]
    if len(set(ids)) != len(ids):
        problems.append("robot ids are not unique")
    for r in robots:
        for what, p in (("start", r.start), ("goal", r.goal)):
            if inst.roadmap.vertex_at(p) is None:
                problems.append(f"robot {r.id}: {what} {p} is not on the roadmap")
            if not disc_free(inst.workspace, p, r.radius):
                problems.append(f"robot {r.id}: {what} {p} body is not inside free space")
    for what in ("start", "goal"):
        for a in range(len(robots)):
            for b in range(a + 1, len(robots)):
                ra, rb = robots[a], robots[b]
                pa, pb = getattr(ra, what), getattr(rb, what)
                if math.dist(pa, pb) < ra.radius + rb.radius - EPS_GEOM:
                    problems.append(f"robots {ra.id} and {rb.id}: {what} bodies overlap")
    return problems


@dataclass
class Solution:
    trajectories: Dict[int, Trajectory]
    solver: str = ""
    runtime: float = 0.0
    radii: Dict[int, float] = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    def regions(self) -> List[AnnouncedRegion]:
        return [AnnouncedRegion(rid, self.radii[rid], tr) for rid, tr in self.trajectories.items()]

    def conflicts(self) -> List[tuple]:
        """All pairs (id_a, id_b, time) whose bodies overlap."""
        regs = self.regions()
        out = []
        for a in range(len(regs)):
            for b in range(a + 1, len(regs)):
                t = first_conflict(regs[a], regs[b])
                if t is not None:
                    out.append((regs[a].robot_id, regs[b].robot_id, t))
        return out

    def to_json(self) -> list:
        return [reg.to_json() for reg in self.regions()]


@dataclass
class Failure:
    robot_id: int
    reason: str
    phase: str = ""
    solver: str = ""
    runtime: float = 0.0
    stats: dict = field(default_factory=dict)

    def __bool__(self):
        return False


def instance_from_points(workspace: Workspace, roadmap: Roadmap,
                         tasks: Sequence[tuple], radius: float = 0.3,
                         speeds: Optional[Sequence[float]] = None, name: str = "") -> ProblemInstance:
    """Convenience constructor: ``tasks`` is a list of ``(start, goal)`` points."""
    speeds = speeds or [1.0] * len(tasks)
    robots = tuple(Robot(i + 1, radius, speeds[i], s, g) for i, (s, g) in enumerate(tasks))
    return ProblemInstance(workspace, roadmap, robots, name=name)
