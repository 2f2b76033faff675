import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import micro_instance
from oracles import brute_arrival_step, dense_violations
from prioplan.geometry import Disc, RegionSet, Workspace
from prioplan.planner import (NO_STATIC_PATH, NO_TRAJECTORY, InvalidQuery, PlanQuery, best_traj,
                              default_horizon, lex_field, plan)
from prioplan.roadmap import build_grid_roadmap
from prioplan.trajectory import AnnouncedRegion, Trajectory, arrival_time

DT = 0.5


@pytest.fixture(scope="module")
def room():
    return build_grid_roadmap(Workspace.empty(6, 5), 1.0, 0.3)


def bodies(tr, obs, r=0.3):
    return [(r, [list(w) for w in tr.waypoints()])] + [
        (o.radius, [list(w) for w in o.trajectory.waypoints()]) for o in obs]


def robot_hits(tr, obs):
    """Overlaps between the planned robot (body 0) and any obstacle."""
    return [v for v in dense_violations(bodies(tr, obs)) if v[0] == 0]


def test_free_space_is_static_optimum(room):
    s, g = room.vertex_at((0.5, 0.5)), room.vertex_at((5.5, 2.5))
    tr = best_traj(PlanQuery(room, 0.3, 1.0, s, g))
    steps = lex_field(room, 0.3, 1.0, DT, RegionSet(), g)[0][s]
    assert arrival_time(tr, (5.5, 2.5)) == steps * DT
    # two diagonals (3 steps) and three straight moves (2 steps)
    assert steps == 12
    assert tr.max_speed() <= 1.0 + 1e-9


def test_start_equals_goal(room):
    tr = best_traj(PlanQuery(room, 0.3, 1.0, 3, 3))
    assert arrival_time(tr, room.points[3]) == 0.0


def test_waits_for_crossing_robot(room):
    s, g = room.vertex_at((0.5, 2.5)), room.vertex_at((5.5, 2.5))
    other = Trajectory.from_waypoints([(2.5, 4.5, 0), (2.5, 0.5, 4)])
    obs = [AnnouncedRegion(9, 0.3, other)]
    tr = best_traj(PlanQuery(room, 0.3, 1.0, s, g, tuple(obs)))
    assert tr is not None and not robot_hits(tr, obs)
    assert arrival_time(tr, (5.5, 2.5)) >= 5.0


def test_goal_hold_respects_later_traffic(room):
    s, g = room.vertex_at((0.5, 0.5)), room.vertex_at((1.5, 0.5))
    # another robot sweeps across the goal at t = 6 and leaves
    other = Trajectory.from_waypoints([(1.5, 4.5, 0), (1.5, 4.5, 3), (1.5, 0.5, 7), (5.5, 0.5, 11)])
    obs = [AnnouncedRegion(9, 0.3, other)]
    tr = best_traj(PlanQuery(room, 0.3, 1.0, s, g, tuple(obs)))
    assert not robot_hits(tr, obs)
    assert arrival_time(tr, (1.5, 0.5)) > 1.0


def test_failure_reasons(room):
    s, g = room.vertex_at((0.5, 0.5)), room.vertex_at((5.5, 4.5))
    sitting = [AnnouncedRegion(9, 0.3, Trajectory.stationary((0.7, 0.5)))]
    assert plan(PlanQuery(room, 0.3, 1.0, s, g, tuple(sitting))).reason == NO_TRAJECTORY
    parked = [AnnouncedRegion(9, 0.3, Trajectory.from_waypoints([(2.5, 2.5, 0), (5.5, 4.5, 4)]))]
    assert plan(PlanQuery(room, 0.3, 1.0, s, g, tuple(parked))).reason == NO_TRAJECTORY
    goal_blocked = RegionSet.of([Disc((5.5, 4.5), 0.3)])
    assert plan(PlanQuery(room, 0.3, 1.0, s, g, (), goal_blocked)).reason == NO_STATIC_PATH


def test_invalid_queries(room):
    with pytest.raises(InvalidQuery):
        plan(PlanQuery(room, 0.3, 1.0, 0, 1, dt=0.0))
    with pytest.raises(InvalidQuery):
        plan(PlanQuery(room, 0.3, 1.0, 0, len(room)))
    with pytest.raises(InvalidQuery):
        plan(PlanQuery(room, 0.3, 1.0, 0, 1, (), RegionSet.of([Disc((0.5, 0.5), 0.3)])))


def test_prefix_is_kept(room):
    s = room.vertex_at((1.5, 0.5))
    prefix = Trajectory.from_waypoints([(0.5, 0.5, 0), (1.5, 0.5, 1.0)])
    tr = best_traj(PlanQuery(room, 0.3, 1.0, s, room.vertex_at((3.5, 0.5)), prefix=prefix))
    assert tr.waypoints()[:2] == [(0.5, 0.5, 0.0), (1.5, 0.5, 1.0)]
    assert arrival_time(tr, (3.5, 0.5)) == 3.0
    with pytest.raises(InvalidQuery):
        plan(PlanQuery(room, 0.3, 1.0, s, 0,
                       prefix=Trajectory.from_waypoints([(0.5, 0.5, 0), (1.5, 0.5, 0.7)])))


def test_default_horizon_formula(room):
    obs = (AnnouncedRegion(9, 0.3, Trajectory.from_waypoints([(0.5, 4.5, 0), (1.5, 4.5, 2)])),
           AnnouncedRegion(8, 0.3, Trajectory.from_waypoints([(3.5, 4.5, 0), (4.5, 4.5, 3)])))
    q = PlanQuery(room, 0.3, 1.0, 0, 1, obs)
    assert default_horizon(q, 4) == pytest.approx(2 + 3 + 2 * 4 * DT + 10 * DT)


def test_horizon_cut_reports_no_trajectory(room):
    s, g = room.vertex_at((0.5, 0.5)), room.vertex_at((5.5, 0.5))
    res = plan(PlanQuery(room, 0.3, 1.0, s, g, horizon=3.0))
    assert res.trajectory is None and res.reason == NO_TRAJECTORY


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 100_000))
def test_matches_brute_force_on_micro_instances(seed):
    rm, s, g, obs = micro_instance(seed)
    assert len(rm) <= 20
    tr = best_traj(PlanQuery(rm, 0.3, 1.0, s, g, tuple(obs), dt=DT))
    adj = [[w for w, _ in nbrs] for nbrs in rm.adj]
    ref = brute_arrival_step(rm.points, adj, s, g, 0.3, 1.0, DT,
                             [(o.radius, [list(w) for w in o.trajectory.waypoints()]) for o in obs], 40)
    if ref is None:
        assert tr is None or arrival_time(tr, rm.points[g]) > 40 * DT
    else:
        assert tr is not None
        assert round(arrival_time(tr, rm.points[g]) / DT) == ref
    if tr is not None:
        assert not robot_hits(tr, obs)
        assert tr.max_speed() <= 1.0 + 1e-9
        assert math.dist(tr.points[0], rm.points[s]) < 1e-12
