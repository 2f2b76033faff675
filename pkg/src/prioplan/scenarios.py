"""Small hand-built scenarios illustrating where each planner succeeds or fails.

Maps are ASCII (``#`` = wall, 1 m blocks, first row on top); roadmap vertices sit
at block centres, so a point ``(x + 0.5, y + 0.5)`` is the centre of block
``(x, y)`` counted from the lower-left corner.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence

from .geometry import Workspace
from .problem import ProblemInstance, instance_from_points
from .roadmap import build_grid_roadmap
from .sim import CostTable, ScriptEvent

RADIUS = 0.3

CORRIDOR = ["###########",
            "#.........#",
            "###########"]

# one-wide corridor leaving a small room to the east
ROOM_AND_CORRIDOR = ["###########",
                     "#...#######",
                     "#.........#",
                     "#...#######",
                     "###########"]

# two lanes joined at both ends; the lower one is the short way
TWO_LANES = ["###############",
             "#.............#",
             "#.###########.#",
             "#.............#",
             "###############"]

ROOM_7x5 = ["#########",
            "#.......#",
            "#.......#",
            "#.......#",
            "#.......#",
            "#.......#",
            "#########"]

OPEN_9x7 = ["." * 9] * 7
OPEN_9x8 = ["." * 9] * 8


def from_ascii(rows: Sequence[str], tasks, speeds: Optional[Sequence[float]] = None,
               name: str = "", radius: float = RADIUS) -> ProblemInstance:
    w = Workspace.from_ascii(rows)
    rm = build_grid_roadmap(w, 1.0, radius)
    return instance_from_points(w, rm, tasks, radius=radius, speeds=speeds, name=name)


def corridor_swap() -> ProblemInstance:
    """Two robots exchange the ends of a corridor barely wider than one body."""
    return from_ascii(CORRIDOR, [((1.5, 1.5), (9.5, 1.5)), ((9.5, 1.5), (1.5, 1.5))],
                      name="corridor-swap")


def type_a() -> ProblemInstance:
    """Robot 1 parks inside the corridor that robot 2 has to traverse.

    Robot 1's straight route runs over robot 3's start. Classical planning lets
    robot 1 arrive first and robot 2 is stuck behind it; the revised scheme makes
    robot 1 swerve around robot 3's start, which gives robot 2 time to pass.
    """
    return from_ascii(ROOM_AND_CORRIDOR,
                      [((1.5, 2.5), (8.5, 2.5)), ((2.5, 3.5), (9.5, 2.5)),
                       ((2.5, 2.5), (2.5, 1.5))], name="type-a")


def type_b() -> ProblemInstance:
    """A robot twice as fast runs down the short lane behind a slower one."""
    return from_ascii(TWO_LANES, [((1.5, 1.5), (13.5, 1.5)), ((3.5, 1.5), (12.5, 1.5))],
                      speeds=[2.0, 1.0], name="type-b")


def rpp_limitation() -> ProblemInstance:
    """Robot 2 starts right in front of robot 1 in a corridor; only classical planning works."""
    return from_ascii(CORRIDOR, [((1.5, 1.5), (8.5, 1.5)), ((2.5, 1.5), (9.5, 1.5))],
                      name="rpp-limitation")


def start_detour() -> ProblemInstance:
    """Robot 2's start lies on robot 1's straight line; the revised scheme detours."""
    return from_ascii(ROOM_7x5, [((1.5, 3.5), (7.5, 3.5)), ((4.5, 3.5), (4.5, 5.5))],
                      name="start-detour")


def golden() -> Dict[str, ProblemInstance]:
    return {"corridor-swap": corridor_swap(), "type-a": type_a(), "type-b": type_b(),
            "rpp-limitation": rpp_limitation(), "start-detour": start_detour()}


# --- decentralized scenarios -------------------------------------------------


def slow_middle_robot() -> ProblemInstance:
    """Robots 1 and 3 cross; robot 2 works alone in a corner.

    Paired with :data:`SLOW_MIDDLE_COSTS`, robot 2 plans slowly, which holds up
    every synchronized round while the asynchronous run lets robot 3 react to
    robot 1 immediately.
    """
    return from_ascii(OPEN_9x8,
                      [((1.5, 3.5), (7.5, 3.5)), ((1.5, 7.5), (3.5, 7.5)),
                       ((4.5, 6.5), (4.5, 1.5))], name="slow-middle")


SLOW_MIDDLE_COSTS = CostTable(replan=1.0, check=0.1, per_robot={2: 10.0})


def double_conflict() -> ProblemInstance:
    """Robot 3 conflicts with both higher-priority robots."""
    return from_ascii(OPEN_9x7, [((0.5, 0.5), (7.5, 1.5)), ((8.5, 3.5), (2.5, 3.5)),
                                 ((7.5, 4.5), (6.5, 0.5))], name="double-conflict")


def superconflict(half_diagonal: float = 6.0) -> ProblemInstance:
    """Four robots on the corners of a square (rotated 45 degrees), each heading
    to the opposite corner, so that all routes meet in the middle."""
    from .instances import load_environment

    env = load_environment("empty-hall")
    cx, cy, d = 10.5, 7.5, half_diagonal
    w, e, s, n = (cx - d, cy), (cx + d, cy), (cx, cy - d), (cx, cy + d)
    return instance_from_points(env.workspace, env.roadmap, [(w, e), (e, w), (s, n), (n, s)],
                                radius=RADIUS, name="superconflict")


SUPERCONFLICT_COSTS = CostTable(replan=0.5, check=0.05)
SUPERCONFLICT_EVENTS: List[ScriptEvent] = [ScriptEvent(3.0, 3, "retask", (13.5, 12.5))]
