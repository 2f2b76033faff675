"""Independent reference implementations used to check the package.

Nothing here calls the package's planners or conflict code; only plain data
(points, waypoint lists, adjacency) crosses the boundary.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

TOUCH_EPS = 1e-6


# --- dense-sampling conflict oracle -------------------------------------------


def _interp(waypoints, ts: np.ndarray) -> np.ndarray:
    w = np.asarray(waypoints, dtype=float)
    return np.stack([np.interp(ts, w[:, 2], w[:, 0]), np.interp(ts, w[:, 2], w[:, 1])], axis=1)


def dense_violations(bodies: Sequence[Tuple[float, Sequence[Sequence[float]]]],
                     step: float = 1e-3) -> List[Tuple[int, int, float]]:
    """Overlapping pairs found by sampling every ``step`` seconds.

    ``bodies`` holds ``(radius, [[x, y, t], ...])``; each body holds its last
    waypoint forever. Returns ``(a, b, first sampled overlap time)``.
    """
    if len(bodies) < 2:
        return []
    end = max(w[-1][2] for _, w in bodies)
    ts = np.arange(0.0, end + 2 * step, step)
    pos = [_interp(w, ts) for _, w in bodies]
    out = []
    for a in range(len(bodies)):
        for b in range(a + 1, len(bodies)):
            reach = bodies[a][0] + bodies[b][0] - TOUCH_EPS
            d = np.hypot(*(pos[a] - pos[b]).T)
            bad = np.nonzero(d < reach)[0]
            if bad.size:
                out.append((a, b, float(ts[bad[0]])))
    return out


def solution_bodies(sol) -> List[Tuple[float, list]]:
    return [(sol.radii[rid], [list(w) for w in tr.waypoints()])
            for rid, tr in sorted(sol.trajectories.items())]


# --- exact pairwise check by closest approach -----------------------------------


def _pos(waypoints, t: float) -> Tuple[float, float]:
    if t <= waypoints[0][2]:
        return waypoints[0][0], waypoints[0][1]
    for (x0, y0, t0), (x1, y1, t1) in zip(waypoints, waypoints[1:]):
        if t <= t1:
            s = (t - t0) / (t1 - t0)
            return x0 + s * (x1 - x0), y0 + s * (y1 - y0)
    return waypoints[-1][0], waypoints[-1][1]


def closest_approach(a0, a1, b0, b1) -> float:
    """Minimum distance between two points moving linearly over the same unit interval."""
    dx, dy = a0[0] - b0[0], a0[1] - b0[1]
    vx = (a1[0] - a0[0]) - (b1[0] - b0[0])
    vy = (a1[1] - a0[1]) - (b1[1] - b0[1])
    vv = vx * vx + vy * vy
    s = 0.0 if vv == 0.0 else min(max(-(dx * vx + dy * vy) / vv, 0.0), 1.0)
    return math.hypot(dx + s * vx, dy + s * vy)


def overlap_during(wa, wb, reach: float, t0: float, t1: float) -> bool:
    """True if the bodies come closer than ``reach`` at some time in [t0, t1]."""
    cuts = sorted({t0, t1} | {w[2] for w in wa if t0 < w[2] < t1} | {w[2] for w in wb if t0 < w[2] < t1})
    for s, e in zip(cuts, cuts[1:]):
        if closest_approach(_pos(wa, s), _pos(wa, e), _pos(wb, s), _pos(wb, e)) < reach - 1e-9:
            return True
    if len(cuts) == 1:
        return math.dist(_pos(wa, t0), _pos(wb, t0)) < reach - 1e-9
    return False


def overlap_ever(wa, wb, reach: float) -> bool:
    end = max(wa[-1][2], wb[-1][2])
    if overlap_during(wa, wb, reach, 0.0, end):
        return True
    return math.dist(_pos(wa, end), _pos(wb, end)) < reach - 1e-9


# --- brute-force space-time search ---------------------------------------------


def brute_arrival_step(points: Sequence[Tuple[float, float]], adj: Sequence[Sequence[int]],
                       start: int, goal: int, radius: float, speed: float, dt: float,
                       obstacles: Sequence[Tuple[float, list]], max_steps: int) -> Optional[int]:
    """Earliest step k at which the robot can be at ``goal`` and stay there forever.

    Layer-by-layer reachable-set propagation over (vertex, step). A move along
    an edge takes ``ceil(length / (speed dt))`` whole steps at constant
    velocity; waiting takes one step. Every move and the final hold are
    checked against each obstacle with :func:`overlap_during`.
    """
    def free(p0, p1, k0, k1) -> bool:
        me = [[p0[0], p0[1], k0 * dt], [p1[0], p1[1], k1 * dt]]
        if k1 == k0:
            me = [[p0[0], p0[1], k0 * dt]]
        for r_o, w in obstacles:
            mine = ([[p0[0], p0[1], 0.0]] if k0 > 0 else []) + me
            if overlap_during(mine, w, radius + r_o, k0 * dt, k1 * dt):
                return False
        return True

    def hold_ok(v, k) -> bool:
        p = points[v]
        mine = ([[p[0], p[1], 0.0]] if k > 0 else []) + [[p[0], p[1], k * dt]]
        for r_o, w in obstacles:
            end = max(k * dt, w[-1][2])
            if overlap_during(mine, w, radius + r_o, k * dt, end):
                return False
            if math.dist(p, (w[-1][0], w[-1][1])) < radius + r_o - 1e-9:
                return False
        return True

    def steps(u, w):
        return max(int(math.ceil(math.dist(points[u], points[w]) / (speed * dt) - 1e-9)), 1)

    if not free(points[start], points[start], 0, 0):
        return None
    layers: Dict[int, set] = {0: {start}}
    for k in range(max_steps + 1):
        here = layers.get(k, set())
        if goal in here and hold_ok(goal, k):
            return k
        for u in here:
            if k + 1 <= max_steps and free(points[u], points[u], k, k + 1):
                layers.setdefault(k + 1, set()).add(u)
            for w in adj[u]:
                m = steps(u, w)
                if k + m <= max_steps and free(points[u], points[w], k, k + m):
                    layers.setdefault(k + m, set()).add(w)
    return None


# --- graphs ----------------------------------------------------------------------


def enumerate_shortest(points, adj, s: int, t: int) -> float:
    """Length of the shortest simple s-t path by exhaustive DFS (tiny graphs only)."""
    best = math.inf
    stack = [(s, 0.0, frozenset([s]))]
    while stack:
        u, d, seen = stack.pop()
        if d >= best:
            continue
        if u == t:
            best = d
            continue
        for w in adj[u]:
            if w not in seen:
                stack.append((w, d + math.dist(points[u], points[w]), seen | {w}))
    return best


def flood_reachable(adj, ok, s: int) -> set:
    if not ok[s]:
        return set()
    seen = {s}
    q = deque([s])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if ok[w] and w not in seen:
                seen.add(w)
                q.append(w)
    return seen


def seg_point_distance(p, a, b) -> float:
    """Distance from p to segment ab by ternary search (deliberately not closed form)."""
    lo, hi = 0.0, 1.0
    def f(s):
        return math.hypot(a[0] + s * (b[0] - a[0]) - p[0], a[1] + s * (b[1] - a[1]) - p[1])
    for _ in range(100):
        m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if f(m1) < f(m2):
            hi = m2
        else:
            lo = m1
    return min(f(0.0), f(1.0), f((lo + hi) / 2))


def static_reachable(points, adj, s: int, t: int, r: float, discs) -> bool:
    """Flood fill over vertices/edges that keep a radius-r body off every (center, radius) disc."""
    ok = [all(math.dist(p, c) >= r + rd - 1e-9 for c, rd in discs) for p in points]
    fadj = [[w for w in adj[u] if all(seg_point_distance(c, points[u], points[w]) >= r + rd - 1e-7
                                      for c, rd in discs)] for u in range(len(points))]
    return ok[t] and t in flood_reachable(fadj, ok, s)


def grid_cells_reachable(grid: np.ndarray, a: Tuple[int, int], b: Tuple[int, int]) -> bool:
    """4-connected flood fill over free cells of a boolean obstacle grid (row = y)."""
    h, w = grid.shape
    if grid[a[1], a[0]] or grid[b[1], b[0]]:
        return False
    seen = {a}
    q = deque([a])
    while q:
        x, y = q.popleft()
        if (x, y) == b:
            return True
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < w and 0 <= ny < h and not grid[ny, nx] and (nx, ny) not in seen:
                seen.add((nx, ny))
                q.append((nx, ny))
    return False
