"""Prioritized multi-robot trajectory coordination: planners, simulator, benchmarks."""

from .geometry import Disc, RegionSet, Workspace, disc_free, point_avoids_regions, swept_disc_free
from .planner import InvalidQuery, PlanQuery, PlanResult, best_traj, plan
from .prioritized import pp, rpp, sequential_oracle
from .problem import Failure, MalformedInstance, ProblemInstance, Robot, Solution, validate_instance
from .roadmap import (Roadmap, build_grid_roadmap, check_rpp_solvable, distance_field,
                      shortest_path, validate_infrastructure)
from .trajectory import AnnouncedRegion, Trajectory, TrajectoryStore, first_conflict, position_at

__all__ = [
    "AnnouncedRegion", "Disc", "Failure", "InvalidQuery", "MalformedInstance", "PlanQuery",
    "PlanResult", "ProblemInstance", "RegionSet", "Roadmap", "Robot", "Solution", "Trajectory",
    "TrajectoryStore", "Workspace", "best_traj", "build_grid_roadmap", "check_rpp_solvable",
    "disc_free", "distance_field", "first_conflict", "plan", "point_avoids_regions",
    "position_at", "pp", "rpp", "sequential_oracle", "shortest_path", "swept_disc_free",
    "validate_infrastructure", "validate_instance",
]
