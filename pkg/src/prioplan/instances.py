"""Bundled desk-scale environments and random instance generation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .geometry import Point, Workspace, load_map, save_map
from .problem import ProblemInstance, Robot
from .roadmap import (Roadmap, build_grid_roadmap, distance_field, endpoint_indices,
                      validate_infrastructure)

ROBOT_RADIUS = 0.3
ROBOT_SPEED = 1.0
ROADMAP_SPACING = 1.0
MAX_ENDPOINTS = 32
MAX_ATTEMPTS = 10_000

# 1 character = 1 m; first row is the top of the map
MAPS: Dict[str, List[str]] = {
    "empty-hall": ["." * 20] * 15,
    "corridor": (
        ["........####........"] * 4
        + ["...................."] * 2
        + ["........####........"] * 5
    ),
    "warehouse": [
        "....................",
        "....................",
        "..#######..#######..",
        "....................",
        "....................",
        "..#######..#######..",
        "....................",
        "....................",
        "..#######..#######..",
        "....................",
        "....................",
        "..#######..#######..",
        "....................",
        "....................",
        "....................",
    ],
}

ENVIRONMENTS = tuple(MAPS)
MODES = ("free-formed", "infrastructure")


class InsufficientEndpoints(ValueError):
    pass


class PlacementFailed(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Environment:
    name: str
    workspace: Workspace
    roadmap: Roadmap
    endpoints: tuple
    radius: float = ROBOT_RADIUS


@dataclass(frozen=True)
class GenSpec:
    environment: str
    mode: str
    n: int
    count: int = 25
    seed: int = 0
    radius: float = ROBOT_RADIUS
    speed: float = ROBOT_SPEED
    speeds: Optional[tuple] = None

    def __post_init__(self):
        if self.environment not in MAPS:
            raise ValueError(f"unknown environment {self.environment!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.n < 1 or self.count < 1:
            raise ValueError("n and count must be at least 1")
        if self.speeds is not None and len(self.speeds) != self.n:
            raise ValueError("speeds must list one value per robot")


# --- environment construction ---------------------------------------------


def build_workspace(name: str) -> Workspace:
    return Workspace.from_ascii(MAPS[name])


def farthest_point_endpoints(w: Workspace, rm: Roadmap, r: float,
                             limit: int = MAX_ENDPOINTS) -> List[Point]:
    """Greedy farthest-point sampling over roadmap vertices, keeping a candidate
    only if the enlarged set still forms a valid infrastructure."""
    pts = rm.points
    n = len(pts)
    # start from the vertex farthest (on the roadmap) from vertex 0
    d0 = distance_field(rm, 0, r)
    finite = np.where(np.isfinite(d0), d0, -1.0)
    chosen = [int(np.argmax(finite))]
    mind = distance_field(rm, chosen[0], r).copy()
    rejected = np.zeros(n, dtype=bool)
    rejected[chosen[0]] = True
    while len(chosen) < limit:
        score = np.where(rejected | ~np.isfinite(mind), -1.0, mind)
        v = int(np.argmax(score))
        if score[v] < 2.0 * r:
            break
        rejected[v] = True
        trial = chosen + [v]
        if validate_infrastructure(w, rm, [pts[k] for k in trial], r).valid:
            chosen = trial
            mind = np.minimum(mind, distance_field(rm, v, r))
    return [pts[k] for k in chosen]


def build_environment(name: str, r: float = ROBOT_RADIUS) -> Environment:
    """Construct an environment from its ASCII map (deterministic)."""
    w = build_workspace(name)
    rm = build_grid_roadmap(w, ROADMAP_SPACING, r)
    return Environment(name, w, rm, tuple(farthest_point_endpoints(w, rm, r)), r)


def write_environment(env: Environment, root: str | Path) -> None:
    root = Path(root)
    for sub in ("maps", "roadmaps", "endpoints"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    save_map(root / "maps" / f"{env.name}.pgm", env.workspace)
    env.roadmap.save(root / "roadmaps" / f"{env.name}.json")
    (root / "endpoints" / f"{env.name}.json").write_text(
        json.dumps([list(p) for p in env.endpoints]) + "\n")


def read_environment(name: str, root: str | Path, r: float = ROBOT_RADIUS) -> Environment:
    root = Path(root)
    w = load_map(root / "maps" / f"{name}.pgm")
    rm = Roadmap.load(root / "roadmaps" / f"{name}.json")
    eps = json.loads((root / "endpoints" / f"{name}.json").read_text())
    return Environment(name, w, rm, tuple(tuple(p) for p in eps), r)


def data_root() -> Path:
    return Path(str(resources.files("prioplan") / "data"))


_ENV_CACHE: Dict[str, Environment] = {}


def load_environment(name: str) -> Environment:
    """A bundled environment, read from the package data directory."""
    if name not in MAPS:
        raise ValueError(f"unknown environment {name!r}")
    env = _ENV_CACHE.get(name)
    if env is None:
        env = read_environment(name, data_root())
        _ENV_CACHE[name] = env
    return env


# --- instance generation ------------------------------------------------------


def _rng(spec: GenSpec, j: int) -> np.random.Generator:
    return np.random.default_rng([spec.seed, spec.n, j, MODES.index(spec.mode),
                                  ENVIRONMENTS.index(spec.environment)])


def _disjoint(points: Sequence[Point], p: Point, r: float) -> bool:
    return all(math.dist(p, q) >= 2.0 * r for q in points)


def _free_formed(env: Environment, spec: GenSpec, rng) -> List[tuple]:
    pts = env.roadmap.points
    for _ in range(MAX_ATTEMPTS):
        starts: List[Point] = []
        goals: List[Point] = []
        ok = True
        for _ in range(spec.n):
            placed = False
            for _ in range(100):
                s = pts[int(rng.integers(len(pts)))]
                g = pts[int(rng.integers(len(pts)))]
                if s != g and _disjoint(starts, s, spec.radius) and _disjoint(goals, g, spec.radius):
                    starts.append(s)
                    goals.append(g)
                    placed = True
                    break
            if not placed:
                ok = False
                break
        if ok:
            return list(zip(starts, goals))
    raise PlacementFailed(f"could not place {spec.n} robots in {env.name}")


def _infrastructure(env: Environment, spec: GenSpec, rng) -> List[tuple]:
    eps = env.endpoints
    if 2 * spec.n > len(eps):
        raise InsufficientEndpoints(f"{spec.n} robots need {2 * spec.n} endpoints, "
                                    f"{env.name} has {len(eps)}")
    pick = rng.permutation(len(eps))[: 2 * spec.n]
    return [(eps[pick[2 * k]], eps[pick[2 * k + 1]]) for k in range(spec.n)]


def generate(spec: GenSpec, env: Optional[Environment] = None) -> List[ProblemInstance]:
    """``spec.count`` instances; a pure function of the spec."""
    env = env or load_environment(spec.environment)
    out = []
    for j in range(spec.count):
        rng = _rng(spec, j)
        tasks = (_infrastructure if spec.mode == "infrastructure" else _free_formed)(env, spec, rng)
        speeds = spec.speeds or (spec.speed,) * spec.n
        robots = tuple(Robot(k + 1, spec.radius, float(speeds[k]), s, g)
                       for k, (s, g) in enumerate(tasks))
        out.append(ProblemInstance(env.workspace, env.roadmap, robots,
                                   name=f"{spec.environment}/{spec.mode}/n{spec.n}/i{j}"))
    return out


def instance_path(root: str | Path, env: str, mode: str, n: int, j: int) -> Path:
    return Path(root) / "instances" / env / mode / f"n{n}" / f"i{j}.json"


def write_suite(specs: Sequence[GenSpec], root: str | Path) -> List[Path]:
    """Write environments and generated instances under ``root`` in the standard layout."""
    root = Path(root)
    written = []
    for name in sorted({s.environment for s in specs}):
        write_environment(load_environment(name), root)
    for spec in specs:
        for j, inst in enumerate(generate(spec)):
            path = instance_path(root, spec.environment, spec.mode, spec.n, j)
            path.parent.mkdir(parents=True, exist_ok=True)
            doc = inst.to_json(f"maps/{spec.environment}.pgm", f"roadmaps/{spec.environment}.json")
            path.write_text(json.dumps(doc, indent=1) + "\n")
            written.append(path)
    return written


def endpoint_vertices(env: Environment) -> List[int]:
    return endpoint_indices(env.roadmap, env.endpoints)


if __name__ == "__main__":  # regenerate the bundled data files
    for name in ENVIRONMENTS:
        write_environment(build_environment(name), data_root())
        print(name, len(load_environment(name).endpoints))
