"""Shared fixtures-by-function for the test suite."""

from __future__ import annotations

import random
from collections import defaultdict
from typing import Dict, List, Tuple

from oracles import dense_violations, solution_bodies
from prioplan.geometry import Workspace
from prioplan.roadmap import build_grid_roadmap, edge_steps
from prioplan.trajectory import AnnouncedRegion, Trajectory

# criterion -> [(passed, detail)], printed at the end of the session
ACCEPTANCE: Dict[str, List[Tuple[bool, str]]] = defaultdict(list)


def record(criterion: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE[criterion].append((bool(passed), detail))
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}")
    return bool(passed)


def violations(sol) -> list:
    return dense_violations(solution_bodies(sol))


def random_walk(rm, rng: random.Random, start: int, moves: int, dt: float,
                speed: float = 1.0) -> Trajectory:
    """Lattice-timed random walk on the roadmap (waits and edge moves)."""
    pts = rm.points
    v, k = start, 0
    wps = [(pts[v], 0.0)]
    for _ in range(moves):
        nbrs = rm.adj[v]
        if nbrs and rng.random() < 0.7:
            w, length = rng.choice(nbrs)
            k += edge_steps(length, speed, dt)
            v = w
        else:
            k += 1
        wps.append((pts[v], k * dt))
    return Trajectory(tuple(p for p, _ in wps), tuple(t for _, t in wps))


def micro_instance(seed: int, dt: float = 0.5):
    """A tiny random map (at most 20 roadmap vertices) with 1 to 3 moving obstacles.

    Returns ``(roadmap, start, goal, obstacles)``.
    """
    rng = random.Random(seed)
    w, h = rng.choice([(5, 4), (4, 4), (5, 3), (4, 5)])
    rows = ["".join("#" if rng.random() < 0.12 else "." for _ in range(w)) for _ in range(h)]
    rm = build_grid_roadmap(Workspace.from_ascii(rows), 1.0, 0.3)
    n = len(rm)
    s, g = rng.randrange(n), rng.randrange(n)
    obs = [AnnouncedRegion(10 + j, 0.3, random_walk(rm, rng, rng.randrange(n), rng.randint(0, 8), dt))
           for j in range(rng.randint(1, 3))]
    return rm, s, g, obs
