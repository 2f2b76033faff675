"""Piecewise-linear space-time trajectories and exact disc/disc conflict tests."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import EPS_GEOM, Point


class NotSatisfying(ValueError):
    pass


@dataclass(frozen=True)
class Trajectory:
    """Waypoints ``(point, time)`` with strictly increasing times starting at 0.

    Between waypoints the position is linearly interpolated; after the last
    waypoint the robot holds its final position forever.
    """

    points: Tuple[Point, ...]
    times: Tuple[float, ...]
    _memo: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        pts = tuple((float(p[0]), float(p[1])) for p in self.points)
        ts = tuple(float(t) for t in self.times)
        if not pts or len(pts) != len(ts):
            raise ValueError("trajectory needs matching, non-empty points and times")
        if abs(ts[0]) > 1e-12:
            raise ValueError("trajectory must start at time 0")
        for a, b in zip(ts, ts[1:]):
            if not b > a:
                raise ValueError("waypoint times must be strictly increasing")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "times", ts)

    @classmethod
    def from_waypoints(cls, waypoints: Iterable[Sequence[float]]) -> "Trajectory":
        """From ``[[x, y, t], ...]`` rows."""
        rows = [tuple(w) for w in waypoints]
        return cls(tuple((r[0], r[1]) for r in rows), tuple(r[2] for r in rows))

    @classmethod
    def stationary(cls, p: Point) -> "Trajectory":
        return cls((p,), (0.0,))

    @property
    def end_time(self) -> float:
        return self.times[-1]

    @property
    def end(self) -> Point:
        return self.points[-1]

    def waypoints(self) -> List[Tuple[float, float, float]]:
        return [(p[0], p[1], t) for p, t in zip(self.points, self.times)]

    def position_at(self, t: float) -> Point:
        return position_at(self, t)

    def max_speed(self) -> float:
        best = 0.0
        for (p, a), (q, b) in zip(zip(self.points, self.times), zip(self.points[1:], self.times[1:])):
            best = max(best, math.dist(p, q) / (b - a))
        return best

    def prefix_until(self, t: float) -> "Trajectory":
        """Waypoints up to and including time ``t`` (interpolated if needed)."""
        if t >= self.end_time:
            return self
        k = bisect.bisect_right(self.times, t)
        pts = list(self.points[:k])
        ts = list(self.times[:k])
        if ts[-1] < t:
            pts.append(position_at(self, t))
            ts.append(t)
        return Trajectory(tuple(pts), tuple(ts))

    def concat(self, tail: "Trajectory", t0: float) -> "Trajectory":
        """This trajectory up to ``t0`` followed by ``tail`` whose own time 0 maps to ``t0``.

        ``tail`` must start where this one is at ``t0``.
        """
        head = self.prefix_until(t0)
        pts = list(head.points)
        ts = list(head.times)
        for p, t in zip(tail.points[1:], tail.times[1:]):
            pts.append(p)
            ts.append(t0 + t)
        return Trajectory(tuple(pts), tuple(ts))

    def lattice(self, dt: float) -> Optional[Tuple[List[float], List[float], int]]:
        """Positions at every multiple of ``dt`` up to the end, or None if some
        waypoint time is off the lattice. Returned as ``(xs, ys, end_step)``."""
        key = ("lattice", dt)
        if key in self._memo:
            return self._memo[key]
        out = None
        steps = [t / dt for t in self.times]
        if all(abs(s - round(s)) <= 1e-6 for s in steps):
            ks = [int(round(s)) for s in steps]
            xs: List[float] = []
            ys: List[float] = []
            for i in range(len(ks)):
                if i == 0:
                    xs.append(self.points[0][0])
                    ys.append(self.points[0][1])
                    continue
                (ax, ay), (bx, by) = self.points[i - 1], self.points[i]
                m = ks[i] - ks[i - 1]
                for j in range(1, m + 1):
                    s = j / m
                    xs.append(ax + s * (bx - ax))
                    ys.append(ay + s * (by - ay))
            out = (xs, ys, ks[-1])
        self._memo[key] = out
        return out


def position_at(tr: Trajectory, t: float) -> Point:
    if t <= 0.0:
        return tr.points[0]
    if t >= tr.times[-1]:
        return tr.points[-1]
    k = bisect.bisect_right(tr.times, t)
    t0, t1 = tr.times[k - 1], tr.times[k]
    (x0, y0), (x1, y1) = tr.points[k - 1], tr.points[k]
    s = (t - t0) / (t1 - t0)
    return x0 + s * (x1 - x0), y0 + s * (y1 - y0)


@dataclass(frozen=True)
class AnnouncedRegion:
    """Space-time region swept by a robot body of ``radius`` following ``trajectory``."""

    robot_id: int
    radius: float
    trajectory: Trajectory

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def to_json(self) -> dict:
        return {"robot": self.robot_id, "radius": self.radius,
                "waypoints": [list(w) for w in self.trajectory.waypoints()]}

    @classmethod
    def from_json(cls, doc: dict) -> "AnnouncedRegion":
        return cls(doc["robot"], float(doc["radius"]), Trajectory.from_waypoints(doc["waypoints"]))


def moving_discs_first_overlap(d0x: float, d0y: float, vx: float, vy: float,
                               duration: float, reach: float) -> Optional[float]:
    """Earliest tau in [0, duration] with |d0 + v*tau| < reach, or None.

    ``d0`` is the initial centre offset and ``v`` the relative velocity of two
    discs moving at constant velocity. Returns the infimum of the open overlap set.
    """
    c = d0x * d0x + d0y * d0y - reach * reach
    if c < 0.0:
        return 0.0
    a = vx * vx + vy * vy
    if a == 0.0:
        return None
    b = 2.0 * (d0x * vx + d0y * vy)
    if b >= 0.0:
        return None
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return None
    tau = (-b - math.sqrt(disc)) / (2.0 * a)
    return tau if tau < duration else None


def first_conflict(a: AnnouncedRegion, b: AnnouncedRegion) -> Optional[float]:
    """Earliest time at which the two bodies overlap, or None if they never do."""
    ta, tb = a.trajectory, b.trajectory
    reach = a.radius + b.radius - EPS_GEOM
    horizon = max(ta.end_time, tb.end_time)
    cuts = sorted(set(ta.times) | set(tb.times))
    if horizon <= 0.0:
        (ax, ay), (bx, by) = ta.points[0], tb.points[0]
        return 0.0 if math.hypot(ax - bx, ay - by) < reach else None
    prev_t = 0.0
    pa = ta.points[0]
    pb = tb.points[0]
    for t in cuts[1:]:
        qa = position_at(ta, t)
        qb = position_at(tb, t)
        span = t - prev_t
        d0x, d0y = pa[0] - pb[0], pa[1] - pb[1]
        vx = ((qa[0] - pa[0]) - (qb[0] - pb[0])) / span
        vy = ((qa[1] - pa[1]) - (qb[1] - pb[1])) / span
        tau = moving_discs_first_overlap(d0x, d0y, vx, vy, span, reach)
        if tau is not None:
            return prev_t + tau
        prev_t, pa, pb = t, qa, qb
    # both hold still from the horizon on
    if math.hypot(pa[0] - pb[0], pa[1] - pb[1]) < reach:
        return horizon
    return None


class TrajectoryStore:
    """A robot's latest view of the regions announced by higher-priority robots."""

    def __init__(self):
        self._entries: Dict[int, AnnouncedRegion] = {}

    def put(self, region: AnnouncedRegion) -> None:
        self._entries[region.robot_id] = region

    def get(self, robot_id: int) -> Optional[AnnouncedRegion]:
        return self._entries.get(robot_id)

    def regions(self) -> List[AnnouncedRegion]:
        return [self._entries[k] for k in sorted(self._entries)]

    def snapshot(self) -> "TrajectoryStore":
        other = TrajectoryStore()
        other._entries = dict(self._entries)
        return other

    def __len__(self):
        return len(self._entries)

    def __contains__(self, robot_id):
        return robot_id in self._entries


def consistent(tr: Trajectory, r: float, store) -> bool:
    """True iff a body of radius ``r`` on ``tr`` never overlaps any stored region."""
    me = AnnouncedRegion(-1, r, tr)
    regions = store.regions() if isinstance(store, TrajectoryStore) else list(store)
    return all(first_conflict(me, reg) is None for reg in regions)


def arrival_time(tr: Trajectory, goal: Point, tol: float = 1e-6) -> float:
    """Earliest waypoint time after which the trajectory stays at ``goal``."""
    if math.dist(tr.end, goal) > tol:
        raise NotSatisfying(f"trajectory ends at {tr.end}, not at goal {tuple(goal)}")
    k = len(tr.points) - 1
    while k > 0 and math.dist(tr.points[k - 1], tr.end) <= 1e-9:
        k -= 1
    return tr.times[k]


def sample_positions(tr: Trajectory, ts: np.ndarray) -> np.ndarray:
    """Vectorized position_at over an array of times; shape (len(ts), 2)."""
    times = np.asarray(tr.times)
    pts = np.asarray(tr.points)
    x = np.interp(ts, times, pts[:, 0])
    y = np.interp(ts, times, pts[:, 1])
    return np.stack([x, y], axis=1)
