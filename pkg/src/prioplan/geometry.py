"""Occupancy-grid workspace and static clearance queries for disc robots."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Tuple

import numpy as np

# Strict-overlap tolerance shared by every body/body and body/region test.
EPS_GEOM = 1e-9

Point = Tuple[float, float]


@dataclass(frozen=True, eq=False)
class Workspace:
    """2-D occupancy grid; ``grid[iy, ix]`` is True where the cell is an obstacle.

    ``origin`` is the world position of the lower-left corner of cell (0, 0),
    rows grow along +y.
    """

    grid: np.ndarray
    resolution: float
    origin: Point = (0.0, 0.0)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=bool)
        if grid.ndim != 2 or grid.shape[0] < 1 or grid.shape[1] < 1:
            raise ValueError("grid must be a non-empty 2-D array")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        grid = grid.copy()
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        x0, y0 = self.origin
        return x0, y0, x0 + self.width * self.resolution, y0 + self.height * self.resolution

    def cell_of(self, p: Point) -> Tuple[int, int] | None:
        """(ix, iy) of the cell containing ``p``; None outside the bounding box."""
        x0, y0, x1, y1 = self.bounds
        if not (x0 <= p[0] < x1 and y0 <= p[1] < y1):
            return None
        ix = int((p[0] - x0) // self.resolution)
        iy = int((p[1] - y0) // self.resolution)
        return min(ix, self.width - 1), min(iy, self.height - 1)

    def cell_center(self, ix: int, iy: int) -> Point:
        x0, y0 = self.origin
        return x0 + (ix + 0.5) * self.resolution, y0 + (iy + 0.5) * self.resolution

    def is_free_point(self, p: Point) -> bool:
        cell = self.cell_of(p)
        return cell is not None and not self.grid[cell[1], cell[0]]

    @classmethod
    def empty(cls, width: int, height: int, resolution: float = 1.0,
              origin: Point = (0.0, 0.0)) -> "Workspace":
        return cls(np.zeros((height, width), dtype=bool), resolution, origin)

    @classmethod
    def from_ascii(cls, rows: Sequence[str], resolution: float = 0.25,
                   block: float = 1.0, origin: Point = (0.0, 0.0)) -> "Workspace":
        """Build a map from text rows; ``#`` marks a ``block`` x ``block`` metre obstacle.

        The first row is the top of the map. Any other character is free space.
        """
        k = int(round(block / resolution))
        if k < 1 or abs(k * resolution - block) > 1e-9:
            raise ValueError("block must be an integer multiple of resolution")
        ncols = max(len(r) for r in rows)
        coarse = np.array([[ch == "#" for ch in r.ljust(ncols, "#")] for r in reversed(rows)])
        grid = np.kron(coarse, np.ones((k, k), dtype=bool)).astype(bool)
        return cls(grid, resolution, origin)


@dataclass(frozen=True)
class Disc:
    center: Point
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))


@dataclass(frozen=True)
class RegionSet:
    """A union of discs (start bodies, goal bodies, endpoint exclusion zones)."""

    discs: Tuple[Disc, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "discs", tuple(self.discs))

    def __len__(self):
        return len(self.discs)

    def __iter__(self):
        return iter(self.discs)

    def __or__(self, other: "RegionSet") -> "RegionSet":
        return RegionSet(self.discs + tuple(other.discs))

    @classmethod
    def of(cls, discs: Iterable[Disc]) -> "RegionSet":
        return cls(tuple(discs))

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        if not self.discs:
            return np.zeros((0, 2)), np.zeros(0)
        centers = np.array([d.center for d in self.discs], dtype=float)
        radii = np.array([d.radius for d in self.discs], dtype=float)
        return centers, radii


EMPTY_REGIONS = RegionSet()


def disc_free(w: Workspace, c: Point, r: float) -> bool:
    """True iff the closed disc D(c, r) lies in the bounding box and touches no obstacle cell.

    A cell counts as touched when its center is within ``r + resolution/sqrt(2)``
    of ``c``, which over-approximates exact disc/square intersection.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    x0, y0, x1, y1 = w.bounds
    cx, cy = float(c[0]), float(c[1])
    if cx - r < x0 or cx + r > x1 or cy - r < y0 or cy + r > y1:
        return False
    res = w.resolution
    reach = r + res / math.sqrt(2.0)
    ix0 = max(int(math.floor((cx - reach - x0) / res - 0.5)), 0)
    ix1 = min(int(math.ceil((cx + reach - x0) / res - 0.5)), w.width - 1)
    iy0 = max(int(math.floor((cy - reach - y0) / res - 0.5)), 0)
    iy1 = min(int(math.ceil((cy + reach - y0) / res - 0.5)), w.height - 1)
    window = w.grid[iy0:iy1 + 1, ix0:ix1 + 1]
    if not window.any():
        return True
    xs = x0 + (np.arange(ix0, ix1 + 1) + 0.5) * res - cx
    ys = y0 + (np.arange(iy0, iy1 + 1) + 0.5) * res - cy
    d2 = ys[:, None] ** 2 + xs[None, :] ** 2
    return not bool(np.any(window & (d2 <= reach * reach)))


def swept_disc_free(w: Workspace, p0: Point, p1: Point, r: float) -> bool:
    """disc_free at samples along p0 -> p1 spaced at most resolution/2, both ends included."""
    length = math.dist(p0, p1)
    n = max(int(math.ceil(length / (w.resolution / 2.0))), 1)
    for k in range(n + 1):
        s = k / n
        p = (p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1]))
        if not disc_free(w, p, r):
            return False
    return True


def point_avoids_regions(c: Point, r: float, blocked: RegionSet) -> bool:
    """True iff the disc (c, r) does not overlap any disc in ``blocked`` (touching allowed)."""
    for d in blocked.discs:
        if math.dist(c, d.center) < r + d.radius - EPS_GEOM:
            return False
    return True


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        return math.dist(p, a)
    s = ((p[0] - ax) * dx + (p[1] - ay) * dy) / den
    s = min(max(s, 0.0), 1.0)
    return math.hypot(p[0] - ax - s * dx, p[1] - ay - s * dy)


def segment_avoids_regions(a: Point, b: Point, r: float, blocked: RegionSet) -> bool:
    """True iff a disc of radius r swept from a to b never overlaps a blocked disc."""
    for d in blocked.discs:
        if point_segment_distance(d.center, a, b) < r + d.radius - EPS_GEOM:
            return False
    return True


# --- map files ---------------------------------------------------------------

def _pgm_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping comments, and the byte offset."""
    pos = 0
    n = len(data)
    while pos < n:
        ch = data[pos:pos + 1]
        if ch == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
                pos += 1
            yield data[start:pos], pos


def read_pgm(path: str | Path) -> Tuple[np.ndarray, int]:
    """Read a plain (P2) or raw (P5) PGM image; returns ``(pixels, maxval)``, top row first."""
    data = Path(path).read_bytes()
    tokens = _pgm_tokens(data)
    magic, _ = next(tokens)
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a PGM file (magic {magic!r})")
    width = int(next(tokens)[0])
    height = int(next(tokens)[0])
    maxval_tok, end = next(tokens)
    maxval = int(maxval_tok)
    if magic == b"P2":
        values = [int(t) for t, _ in tokens]
        img = np.array(values[: width * height], dtype=np.int64)
    else:
        # exactly one whitespace byte separates the header from the raster
        raster = data[end + 1:]
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        img = np.frombuffer(raster, dtype=dtype, count=width * height).astype(np.int64)
    if img.size != width * height:
        raise ValueError(f"{path}: truncated raster")
    return img.reshape(height, width), maxval


def write_pgm(path: str | Path, img: np.ndarray, maxval: int = 255, plain: bool = True) -> None:
    img = np.asarray(img, dtype=np.int64)
    height, width = img.shape
    if plain:
        lines = [f"P2\n{width} {height}\n{maxval}\n"]
        for row in img:
            lines.append(" ".join(str(int(v)) for v in row) + "\n")
        Path(path).write_text("".join(lines))
    else:
        header = f"P5\n{width} {height}\n{maxval}\n".encode()
        Path(path).write_bytes(header + img.astype(np.uint8).tobytes())


def load_map(path: str | Path) -> Workspace:
    """Load ``<name>.pgm`` plus its ``<name>.json`` sidecar ``{resolution, origin}``.

    Pixels at least half-way to black (value < maxval/2) are obstacles.
    """
    path = Path(path)
    img, maxval = read_pgm(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    occupied = img < maxval / 2.0
    return Workspace(occupied[::-1], float(meta["resolution"]), tuple(meta.get("origin", (0.0, 0.0))))


def save_map(path: str | Path, w: Workspace, plain: bool = True) -> None:
    path = Path(path)
    img = np.where(w.grid[::-1], 0, 255)
    write_pgm(path, img, 255, plain=plain)
    path.with_suffix(".json").write_text(
        json.dumps({"resolution": w.resolution, "origin": list(w.origin)}, indent=2) + "\n")
