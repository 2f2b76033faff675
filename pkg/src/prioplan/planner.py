"""Optimal single-robot trajectory search on roadmap x discretized time.

Moves are "traverse an edge in ceil(len / (v*dt)) steps" and "wait one step".
Conflicts with dynamic regions are evaluated exactly per time step, since both
the searching robot and every announced trajectory move linearly between
consecutive multiples of ``dt``.

Once every dynamic region has reached its final position (step ``K_static``)
the world is static, so the remaining cost of any node at or beyond that step is
a plain shortest path that avoids the parked bodies. Such nodes are closed off
with that exact completion cost instead of being expanded further; this keeps
the search finite even without a horizon.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .geometry import EMPTY_REGIONS, EPS_GEOM, Disc, RegionSet
from .roadmap import Roadmap, edge_steps
from .trajectory import AnnouncedRegion, Trajectory

NO_TRAJECTORY = "NoTrajectoryWithinHorizon"
NO_STATIC_PATH = "NoStaticPath"

INF = math.inf


class InvalidQuery(ValueError):
    pass


@dataclass
class PlanQuery:
    roadmap: Roadmap
    radius: float
    speed: float
    start: int
    goal: int
    dynamic: Sequence[AnnouncedRegion] = ()
    blocked: RegionSet = EMPTY_REGIONS
    dt: float = 0.5
    horizon: Optional[float] = None
    # committed motion; the search starts where and when it ends
    prefix: Optional[Trajectory] = None


@dataclass
class PlanResult:
    trajectory: Optional[Trajectory]
    reason: Optional[str] = None
    expansions: int = 0
    horizon: float = 0.0
    stats: dict = field(default_factory=dict)


def step_adjacency(rm: Roadmap, r: float, speed: float, dt: float, blocked: RegionSet):
    key = ("steps", r, speed, dt, blocked)
    hit = rm._cache.get(key)
    if hit is None:
        ok, adj = rm.filtered(r, blocked)
        hit = (ok, [[(w, edge_steps(length, speed, dt), length) for w, length in nbrs]
                    for nbrs in adj])
        rm._cache[key] = hit
    return hit


def lex_field(rm: Roadmap, r: float, speed: float, dt: float, blocked: RegionSet, goal: int):
    """Lexicographic (steps, length) static distance to ``goal`` plus next hops."""
    key = ("field", r, speed, dt, blocked, goal)
    hit = rm._cache.get(key)
    if hit is not None:
        return hit
    ok, adj = step_adjacency(rm, r, speed, dt, blocked)
    n = len(adj)
    steps = [INF] * n
    dist = [INF] * n
    nxt = [-1] * n
    if ok[goal]:
        steps[goal] = 0
        dist[goal] = 0.0
        heap = [(0, 0.0, goal)]
        done = [False] * n
        while heap:
            s, d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for w, m, length in adj[u]:
                if done[w]:
                    continue
                ns, nd = s + m, d + length
                if (ns, nd, u) < (steps[w], dist[w], nxt[w] if nxt[w] >= 0 else n):
                    steps[w], dist[w], nxt[w] = ns, nd, u
                    heapq.heappush(heap, (ns, nd, w))
    out = (steps, dist, nxt)
    rm._cache[key] = out
    return out


class _Dyn:
    """Lattice view of one announced region as seen by a robot of radius ``r``."""

    __slots__ = ("xs", "ys", "K", "R", "R2", "slack2")

    def __init__(self, region: AnnouncedRegion, r: float, own_step: float, dt: float):
        lat = region.trajectory.lattice(dt)
        if lat is None:
            raise InvalidQuery(f"trajectory of robot {region.robot_id} is not on the dt={dt} lattice")
        self.xs, self.ys, self.K = lat
        self.R = r + region.radius - EPS_GEOM
        self.R2 = self.R * self.R
        memo = region.trajectory._memo
        key = ("stepmax", dt)
        smax = memo.get(key)
        if smax is None:
            xs, ys = self.xs, self.ys
            smax = max((math.hypot(xs[j + 1] - xs[j], ys[j + 1] - ys[j]) for j in range(self.K)),
                       default=0.0)
            memo[key] = smax
        self.slack2 = (self.R + own_step + smax) ** 2


def _seg_min_d2(dx, dy, ex, ey):
    """Squared minimum of |d0 + tau*(d1 - d0)| over tau in [0, 1]."""
    fx, fy = ex - dx, ey - dy
    a = fx * fx + fy * fy
    if a == 0.0:
        return dx * dx + dy * dy
    tau = -(dx * fx + dy * fy) / a
    if tau <= 0.0:
        return dx * dx + dy * dy
    if tau >= 1.0:
        return ex * ex + ey * ey
    gx, gy = dx + tau * fx, dy + tau * fy
    return gx * gx + gy * gy


def _move_ok(dyn: List[_Dyn], ux, uy, wx, wy, k, m) -> bool:
    """True iff moving u -> w during steps [k, k+m) overlaps no dynamic body."""
    for d in dyn:
        xs, ys, K = d.xs, d.ys, d.K
        for s in range(m):
            j = k + s
            if j >= K:
                qx0 = qx1 = xs[K]
                qy0 = qy1 = ys[K]
            else:
                qx0, qy0, qx1, qy1 = xs[j], ys[j], xs[j + 1], ys[j + 1]
            a0, a1 = s / m, (s + 1) / m
            dx = ux + a0 * (wx - ux) - qx0
            dy = uy + a0 * (wy - uy) - qy0
            if dx * dx + dy * dy >= d.slack2:
                continue
            ex = ux + a1 * (wx - ux) - qx1
            ey = uy + a1 * (wy - uy) - qy1
            if _seg_min_d2(dx, dy, ex, ey) < d.R2:
                return False
    return True


def _hold_safe_from(dyn: List[_Dyn], gx, gy, k0: int) -> float:
    """Earliest step from which sitting at (gx, gy) forever is conflict-free."""
    k_hold = k0
    for d in dyn:
        xs, ys, K = d.xs, d.ys, d.K
        fx, fy = xs[K] - gx, ys[K] - gy
        if fx * fx + fy * fy < d.R2:
            return INF
        for j in range(K - 1, k0 - 1, -1):
            if j + 1 <= k_hold:
                break
            dx, dy = xs[j] - gx, ys[j] - gy
            ex, ey = xs[j + 1] - gx, ys[j + 1] - gy
            if _seg_min_d2(dx, dy, ex, ey) < d.R2:
                k_hold = j + 1
                break
    return k_hold


def default_horizon(q: PlanQuery, static_steps: float) -> float:
    """Sum of the announced end times, twice the static fallback duration, plus 10 steps."""
    t0 = q.prefix.end_time if q.prefix is not None else 0.0
    ends = sum(reg.trajectory.end_time for reg in q.dynamic)
    static = static_steps * q.dt if not math.isinf(static_steps) else 0.0
    return t0 + ends + 2.0 * static + 10.0 * q.dt


def plan(q: PlanQuery) -> PlanResult:
    """Minimum-arrival-time (then minimum-length) trajectory for the query, if any."""
    rm = q.roadmap
    dt = q.dt
    if not dt > 0 or not q.speed > 0 or not q.radius > 0:
        raise InvalidQuery("dt, speed and radius must be positive")
    n = len(rm)
    if not (0 <= q.start < n and 0 <= q.goal < n):
        raise InvalidQuery("start/goal must be roadmap vertices")
    pts = rm.points
    r = q.radius
    ok, adj = step_adjacency(rm, r, q.speed, dt, q.blocked)
    if not ok[q.start]:
        raise InvalidQuery("start overlaps a blocked region")
    if not ok[q.goal]:
        return PlanResult(None, NO_STATIC_PATH)

    if q.prefix is not None:
        kf = q.prefix.end_time / dt
        if abs(kf - round(kf)) > 1e-6:
            raise InvalidQuery("prefix must end on the dt lattice")
        k0 = int(round(kf))
        if math.dist(q.prefix.end, pts[q.start]) > 1e-6:
            raise InvalidQuery("prefix must end at the start vertex")
    else:
        k0 = 0

    hs, hd, _ = lex_field(rm, r, q.speed, dt, q.blocked, q.goal)
    if math.isinf(hs[q.start]):
        return PlanResult(None, NO_STATIC_PATH)

    own_step = q.speed * dt
    dyn = [_Dyn(reg, r, own_step, dt) for reg in q.dynamic]
    k_static = max([d.K for d in dyn], default=0)

    # static world after k_static: parked bodies become blocked discs
    if dyn:
        parked = RegionSet.of(Disc((d.xs[d.K], d.ys[d.K]), reg.radius)
                              for d, reg in zip(dyn, q.dynamic))
        cblocked = q.blocked | parked
        cok = rm.filtered(r, cblocked)[0]
        cs, cd, cnext = lex_field(rm, r, q.speed, dt, cblocked, q.goal)
    else:
        cok = ok
        cs, cd, cnext = lex_field(rm, r, q.speed, dt, q.blocked, q.goal)

    fallback = cs[q.start] if not math.isinf(cs[q.start]) else hs[q.start]
    t_max = q.horizon if q.horizon is not None else default_horizon(q, fallback)
    k_max = int(math.floor(t_max / dt + 1e-9))

    gx, gy = pts[q.goal]
    k_hold = _hold_safe_from(dyn, gx, gy, k0)

    sx, sy = pts[q.start]
    for d in dyn:
        j = min(k0, d.K)
        ex, ey = d.xs[j] - sx, d.ys[j] - sy
        if ex * ex + ey * ey < d.R2:
            return PlanResult(None, NO_TRAJECTORY, horizon=t_max)

    goal = q.goal
    best = {}
    parent = {}
    heap = []

    def push(v, k, dist, pv, pk):
        if k >= k_static:
            if math.isinf(cs[v]) or not cok[v]:
                return
            fs, fd, hsv = k + cs[v], dist + cd[v], cs[v]
        else:
            fs, fd, hsv = k + hs[v], dist + hd[v], hs[v]
        if fs > k_max:
            return
        key = (v, k)
        old = best.get(key)
        if old is not None and old <= dist:
            return
        best[key] = dist
        parent[key] = (pv, pk)
        heapq.heappush(heap, (fs, fd, hsv, v, k, dist))

    push(q.start, k0, 0.0, -1, -1)
    closed = set()
    expansions = 0
    terminal = None
    while heap:
        fs, fd, _, u, k, dist = heapq.heappop(heap)
        key = (u, k)
        if key in closed or best.get(key, INF) < dist:
            continue
        closed.add(key)
        if k >= k_static:
            terminal = key
            break
        if u == goal and k >= k_hold:
            terminal = key
            break
        expansions += 1
        ux, uy = pts[u]
        if _move_ok(dyn, ux, uy, ux, uy, k, 1):
            push(u, k + 1, dist, u, k)
        for w, m, length in adj[u]:
            wx, wy = pts[w]
            if _move_ok(dyn, ux, uy, wx, wy, k, m):
                push(w, k + m, dist + length, u, k)

    if terminal is None:
        return PlanResult(None, NO_TRAJECTORY, expansions=expansions, horizon=t_max)

    states = []
    key = terminal
    while key[0] >= 0:
        states.append(key)
        key = parent[key]
    states.reverse()
    v, k = terminal
    if k >= k_static:
        while v != goal:
            w = cnext[v]
            k += edge_steps(math.dist(pts[v], pts[w]), q.speed, dt)
            v = w
            states.append((v, k))

    traj = _to_trajectory(states, pts, dt, q.prefix)
    return PlanResult(traj, None, expansions=expansions, horizon=t_max,
                      stats={"k_static": k_static, "k_hold": k_hold})


def _to_trajectory(states: List[Tuple[int, int]], pts, dt: float,
                   prefix: Optional[Trajectory]) -> Trajectory:
    keep = []
    last = len(states) - 1
    for i, (v, k) in enumerate(states):
        if 0 < i < last and states[i - 1][0] == v and states[i + 1][0] == v:
            continue
        keep.append((v, k))
    points = [pts[v] for v, _ in keep]
    times = [k * dt for _, k in keep]
    if prefix is None:
        return Trajectory(tuple(points), tuple(times))
    return Trajectory(prefix.points + tuple(points[1:]), prefix.times + tuple(times[1:]))


def best_traj(q: PlanQuery) -> Optional[Trajectory]:
    return plan(q).trajectory
