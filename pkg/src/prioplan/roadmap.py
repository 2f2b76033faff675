"""Roadmap graphs, static shortest paths and solvability checks."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import (EPS_GEOM, EMPTY_REGIONS, Point, RegionSet, Workspace, disc_free,
                       point_segment_distance, segment_avoids_regions, swept_disc_free)

if TYPE_CHECKING:
    from .problem import ProblemInstance


class EmptyRoadmap(ValueError):
    pass


class EndpointNotOnRoadmap(ValueError):
    pass


@dataclass(eq=False)
class Roadmap:
    """Undirected graph over workspace points; edge weights are Euclidean lengths.

    ``r_max`` is the largest robot radius every vertex and edge was validated for.
    """

    vertices: np.ndarray
    edges: List[Tuple[int, int]]
    r_max: float
    adj: List[List[Tuple[int, float]]] = field(init=False, repr=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        self.vertices.setflags(write=False)
        n = len(self.vertices)
        norm = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"bad edge ({i}, {j})")
            norm.add((min(i, j), max(i, j)))
        self.edges = sorted(norm)
        self.adj = [[] for _ in range(n)]
        pts = self.points
        for i, j in self.edges:
            length = math.dist(pts[i], pts[j])
            self.adj[i].append((j, length))
            self.adj[j].append((i, length))
        for nbrs in self.adj:
            nbrs.sort()
        self._index = {_key(p): k for k, p in enumerate(pts)}

    @property
    def points(self) -> List[Point]:
        pts = self._cache.get("points")
        if pts is None:
            pts = [(float(x), float(y)) for x, y in self.vertices]
            self._cache["points"] = pts
        return pts

    def __len__(self):
        return len(self.vertices)

    def vertex_at(self, p: Point, tol: float = 1e-6) -> Optional[int]:
        k = self._index.get(_key(p))
        if k is not None:
            return k
        if len(self.vertices) == 0:
            return None
        d = np.hypot(self.vertices[:, 0] - p[0], self.vertices[:, 1] - p[1])
        k = int(np.argmin(d))
        return k if d[k] <= tol else None

    def nearest_vertex(self, p: Point) -> int:
        d = np.hypot(self.vertices[:, 0] - p[0], self.vertices[:, 1] - p[1])
        return int(np.argmin(d))

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def components(self) -> List[List[int]]:
        seen = [False] * len(self)
        comps = []
        for s in range(len(self)):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                u = stack.pop()
                comp.append(u)
                for w, _ in self.adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def to_json(self) -> dict:
        return {"vertices": self.vertices.tolist(), "edges": [list(e) for e in self.edges],
                "r_max": self.r_max}

    @classmethod
    def from_json(cls, doc: dict) -> "Roadmap":
        return cls(np.array(doc["vertices"], dtype=float), [tuple(e) for e in doc["edges"]],
                   float(doc.get("r_max", 0.0)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Roadmap":
        return cls.from_json(json.loads(Path(path).read_text()))

    # --- filtered views, cached per (radius, blocked set) ---------------------

    def filtered(self, r: float, blocked: RegionSet = EMPTY_REGIONS):
        """Vertex mask and adjacency restricted to moves that keep a disc of radius r
        clear of every blocked disc."""
        key = ("filtered", r, blocked)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        pts = self.points
        if len(blocked) == 0:
            ok = [True] * len(pts)
            adj = self.adj
        else:
            centers, radii = blocked.as_arrays()
            d = np.hypot(self.vertices[:, None, 0] - centers[None, :, 0],
                         self.vertices[:, None, 1] - centers[None, :, 1])
            ok = np.all(d >= r + radii[None, :] - EPS_GEOM, axis=1).tolist()
            adj = []
            for u, nbrs in enumerate(self.adj):
                if not ok[u]:
                    adj.append([])
                    continue
                adj.append([(w, length) for w, length in nbrs
                            if ok[w] and segment_avoids_regions(pts[u], pts[w], r, blocked)])
        out = (ok, adj)
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[key] = out
        return out


def _key(p) -> Tuple[int, int]:
    return (int(round(float(p[0]) * 1e6)), int(round(float(p[1]) * 1e6)))


@dataclass(frozen=True)
class RoadmapPath:
    vertices: Tuple[int, ...]
    length: float


def build_grid_roadmap(w: Workspace, spacing: float, r_max: float,
                       offset: Optional[Point] = None) -> Roadmap:
    """8-connected lattice roadmap with vertices every ``spacing`` metres.

    Vertices are kept where a disc of radius ``r_max`` is free, edges where the
    swept disc is free. ``offset`` is the lattice origin relative to the map
    origin (default: half a spacing, i.e. cell-centred lattice).
    """
    if not spacing > 0 or not r_max > 0:
        raise ValueError("spacing and r_max must be positive")
    x0, y0, x1, y1 = w.bounds
    ox, oy = offset if offset is not None else (spacing / 2.0, spacing / 2.0)
    nx = int(math.floor((x1 - x0 - ox) / spacing + 1e-9)) + 1
    ny = int(math.floor((y1 - y0 - oy) / spacing + 1e-9)) + 1
    index = {}
    verts = []
    for j in range(ny):
        for i in range(nx):
            p = (x0 + ox + i * spacing, y0 + oy + j * spacing)
            if disc_free(w, p, r_max):
                index[(i, j)] = len(verts)
                verts.append(p)
    if not verts:
        raise EmptyRoadmap("no free vertex for the requested radius")
    edges = []
    for (i, j), u in index.items():
        for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
            v = index.get((i + di, j + dj))
            if v is not None and swept_disc_free(w, verts[u], verts[v], r_max):
                edges.append((u, v))
    return Roadmap(np.array(verts), edges, r_max)


def _dijkstra(adj, ok, source: int, target: Optional[int] = None):
    """Deterministic Dijkstra: equal-cost ties resolve toward the lower vertex index."""
    n = len(adj)
    dist = [math.inf] * n
    parent = [-1] * n
    if not ok[source]:
        return dist, parent
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == target:
            break
        for w, length in adj[u]:
            nd = d + length
            if nd < dist[w] - 1e-12 or (abs(nd - dist[w]) <= 1e-12 and u < parent[w] and not done[w]):
                dist[w] = nd
                parent[w] = u
                heapq.heappush(heap, (nd, w))
    return dist, parent


def shortest_path(rm: Roadmap, start: int, goal: int, r: float,
                  blocked: RegionSet = EMPTY_REGIONS) -> Optional[RoadmapPath]:
    """Minimum-length vertex sequence whose swept disc avoids ``blocked``; None if unreachable."""
    ok, adj = rm.filtered(r, blocked)
    if not ok[start] or not ok[goal]:
        return None
    dist, parent = _dijkstra(adj, ok, start, goal)
    if math.isinf(dist[goal]):
        return None
    seq = [goal]
    while seq[-1] != start:
        seq.append(parent[seq[-1]])
    return RoadmapPath(tuple(reversed(seq)), dist[goal])


def distance_field(rm: Roadmap, goal: int, r: float,
                   blocked: RegionSet = EMPTY_REGIONS) -> np.ndarray:
    """Static shortest-path length from every vertex to ``goal`` (inf if unreachable)."""
    ok, adj = rm.filtered(r, blocked)
    dist, _ = _dijkstra(adj, ok, goal)
    return np.array(dist)


def path_duration_steps(rm: Roadmap, path: RoadmapPath, speed: float, dt: float) -> int:
    """Steps needed to follow ``path`` at ``speed`` when every edge is quantized to whole steps."""
    pts = rm.points
    return sum(edge_steps(math.dist(pts[a], pts[b]), speed, dt)
               for a, b in zip(path.vertices, path.vertices[1:]))


def edge_steps(length: float, speed: float, dt: float) -> int:
    return max(int(math.ceil(length / (speed * dt) - 1e-9)), 1)


# --- infrastructures and solvability --------------------------------------------

@dataclass
class InfrastructureReport:
    valid: bool
    failing_pairs: List[Tuple[int, int]]
    endpoint_count: int


def endpoint_indices(rm: Roadmap, endpoints: Sequence[Point]) -> List[int]:
    out = []
    for e in endpoints:
        v = rm.vertex_at(e)
        if v is None:
            raise EndpointNotOnRoadmap(f"endpoint {tuple(e)} is not a roadmap vertex")
        out.append(v)
    return out


def validate_infrastructure(w: Workspace, rm: Roadmap, endpoints: Sequence[Point],
                            r: float) -> InfrastructureReport:
    """Check that every pair of endpoints is joined by a path with r-clearance to
    obstacles and 2r-clearance to every *other* endpoint.

    ``failing_pairs`` holds index pairs ``(a, b)``, ``a < b``, into ``endpoints``.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    ev = endpoint_indices(rm, endpoints)
    pts = rm.points
    m = len(ev)
    epts = [pts[v] for v in ev]
    clear = 2.0 * r - EPS_GEOM

    if r <= rm.r_max:
        vclear = [True] * len(pts)
    else:
        vclear = [disc_free(w, p, r) for p in pts]

    # endpoints whose exclusion zone each vertex / edge violates
    vbad = []
    for p in pts:
        vbad.append(frozenset(k for k, e in enumerate(epts) if math.dist(p, e) < clear))
    adj = []
    for u, nbrs in enumerate(rm.adj):
        row = []
        for v, _ in nbrs:
            if not (vclear[u] and vclear[v]):
                continue
            if r > rm.r_max and not swept_disc_free(w, pts[u], pts[v], r):
                continue
            bad = frozenset(k for k, e in enumerate(epts)
                            if point_segment_distance(e, pts[u], pts[v]) < clear)
            row.append((v, bad))
        adj.append(row)

    failing = []
    for a in range(m):
        for b in range(a + 1, m):
            allowed = {a, b}
            if not _connected(adj, vbad, vclear, ev[a], ev[b], allowed):
                failing.append((a, b))
    return InfrastructureReport(not failing, failing, m)


def _connected(adj, vbad, vclear, s: int, t: int, allowed) -> bool:
    if not (vclear[s] and vclear[t]) or not vbad[s] <= allowed or not vbad[t] <= allowed:
        return False
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        if u == t:
            return True
        for v, bad in adj[u]:
            if v not in seen and bad <= allowed and vbad[v] <= allowed:
                seen.add(v)
                stack.append(v)
    return False


@dataclass
class SolvabilityReport:
    per_robot: List[Dict]
    solvable: bool


def avoidance_regions(inst: "ProblemInstance", i: int) -> RegionSet:
    """Lower-priority start bodies plus higher-priority goal bodies for robot index ``i``."""
    return inst.lower_starts(i) | inst.higher_goals(i)


def check_rpp_solvable(inst: "ProblemInstance") -> SolvabilityReport:
    """Sufficient condition for revised prioritized planning: every robot has a static
    path that avoids lower-priority starts and higher-priority goals."""
    from .problem import MalformedInstance, validate_instance

    problems = validate_instance(inst)
    if problems:
        raise MalformedInstance("; ".join(problems))
    rows = []
    for i, robot in enumerate(inst.robots):
        p = shortest_path(inst.roadmap, inst.start_vertex(i), inst.goal_vertex(i),
                          robot.radius, avoidance_regions(inst, i))
        rows.append({"robot": robot.id, "has_path": p is not None})
    return SolvabilityReport(rows, all(r["has_path"] for r in rows))
