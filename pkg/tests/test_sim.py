import json

import pytest

from helpers import violations
from prioplan import scenarios
from prioplan.instances import GenSpec, generate
from prioplan.planner import PlanQuery, best_traj
from prioplan.sim import (CALIBRATED_COSTS, ZERO_COST, CostTable, Kernel, ScriptEvent,
                          SimConfig, SimulationError, detect_quiescence, load_events, run_ad,
                          run_clad, run_sd)


def same_trajectories(a, b):
    ta, tb = a.solution.trajectories, b.solution.trajectories
    return ta.keys() == tb.keys() and all(ta[k].waypoints() == tb[k].waypoints() for k in ta)


def test_kernel_orders_by_time_priority_sequence():
    k = Kernel()
    k.schedule(1.0, 2, "x", "late-low")
    k.schedule(1.0, 0, "x", "late-high")
    k.schedule(0.5, 5, "x", "early")
    k.schedule(1.0, 0, "x", "late-high-2")
    assert [k.pop()[3] for _ in range(4)] == ["early", "late-high", "late-high-2", "late-low"]
    with pytest.raises(SimulationError):
        k.schedule(0.2, 0, "x")


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig("XD-PP")
    with pytest.raises(ValueError):
        SimConfig("AD-PP", loss=0.1)
    with pytest.raises(ValueError):
        SimConfig("CLAD-PP", loss=1.5)
    with pytest.raises(ValueError):
        SimConfig("SD-PP", latency=-1)
    with pytest.raises(ValueError):
        run_sd(scenarios.start_detour(), SimConfig("AD-PP"))
    with pytest.raises(ValueError):
        run_clad(scenarios.start_detour(), SimConfig("CLAD-PP"))


def test_cost_table():
    c = CostTable(1.0, 0.1, {2: 10.0}, 0.01)
    assert c.replan_cost(1, 100) == pytest.approx(2.0)
    assert c.replan_cost(2) == 10.0
    assert CostTable.from_json(json.loads(json.dumps(c.to_json()))) == c


def test_single_robot_sd_takes_a_quiet_round():
    inst = scenarios.start_detour().subset(1)
    out = run_sd(inst, SimConfig("SD-PP", costs=CostTable(1.0, 0.1)))
    assert out.success and out.rounds == 2 and out.messages == 1
    assert out.time == pytest.approx(1.1)
    ref = best_traj(PlanQuery(inst.roadmap, 0.3, 1.0, inst.start_vertex(0), inst.goal_vertex(0)))
    assert out.solution.trajectories[1].waypoints() == ref.waypoints()


def test_slow_robot_holds_up_rounds():
    inst = scenarios.slow_middle_robot()
    sd = run_sd(inst, SimConfig("SD-PP", costs=scenarios.SLOW_MIDDLE_COSTS))
    ad = run_ad(inst, SimConfig("AD-PP", costs=scenarios.SLOW_MIDDLE_COSTS))
    assert sd.success and ad.success
    assert ad.time < sd.time
    assert not violations(sd.solution) and not violations(ad.solution)


def test_double_conflict_broadcast_counts():
    inst = scenarios.double_conflict()
    costs = CostTable(1.0, 0.1)
    ad = run_ad(inst, SimConfig("AD-PP", costs=costs))
    sd = run_sd(inst, SimConfig("SD-PP", costs=costs))
    assert ad.replans[1] == 1 and sd.replans[1] == 1
    assert ad.messages >= sd.messages


@pytest.mark.parametrize("variant", ["SD-PP", "SD-RPP", "AD-PP", "AD-RPP"])
def test_runs_are_reproducible_and_sound(variant):
    run = run_sd if variant.startswith("SD") else run_ad
    for inst in generate(GenSpec("warehouse", "infrastructure", 5, 4, seed=3)):
        a = run(inst, SimConfig(variant, costs=CALIBRATED_COSTS))
        b = run(inst, SimConfig(variant, costs=CALIBRATED_COSTS))
        assert a.dumps() == b.dumps()
        assert a.messages == len(a.log) == sum(a.replans.values())
        if variant.endswith("RPP"):
            assert a.success
        if a.success:
            assert a.replans[1] == 1
            assert not violations(a.solution)


def test_latency_delays_delivery():
    inst = scenarios.double_conflict()
    out = run_ad(inst, SimConfig("AD-PP", latency=0.25, costs=CostTable(1.0, 0.1)))
    assert all(e["t_deliver"] == pytest.approx(e["t_send"] + 0.25) for e in out.log)


def test_failure_is_reported():
    inst = scenarios.corridor_swap()
    for run, variant in ((run_sd, "SD-PP"), (run_ad, "AD-PP"), (run_ad, "AD-RPP")):
        out = run(inst, SimConfig(variant, costs=CostTable(1.0, 0.0)))
        assert out.status == "failure" and out.failed_robot in (1, 2) and out.solution is None


def test_quiescence_detection():
    k = Kernel()
    assert detect_quiescence(k, [])
    k.schedule(0.0, 0, "deliver")
    assert not detect_quiescence(k, [])
    k2 = Kernel()
    k2.schedule(5.0, -1, "tick")
    assert detect_quiescence(k2, [])


def test_clad_without_events_reduces_to_ad():
    for inst in generate(GenSpec("warehouse", "free-formed", 6, 5, seed=1)) + [scenarios.double_conflict()]:
        a = run_ad(inst, SimConfig("AD-PP", costs=ZERO_COST))
        c = run_clad(inst, SimConfig("CLAD-PP", costs=ZERO_COST, end_time=20))
        assert a.success == c.success
        if a.success:
            assert same_trajectories(a, c)


def test_clad_retask_and_divergence():
    inst = scenarios.superconflict()
    events = [ScriptEvent(3.0, 3, "retask", (13.5, 12.5)),
              ScriptEvent(4.2, 2, "divergence", (12.7, 7.4))]
    out = run_clad(inst, SimConfig("CLAD-PP", costs=scenarios.SUPERCONFLICT_COSTS, end_time=40),
                   events)
    assert out.success and not violations(out.solution)
    assert out.solution.trajectories[3].end == (13.5, 12.5)
    again = run_clad(inst, SimConfig("CLAD-PP", costs=scenarios.SUPERCONFLICT_COSTS, end_time=40),
                     events)
    assert out.dumps() == again.dumps()


def test_clad_loss_is_seeded():
    inst = scenarios.superconflict()
    cfg = SimConfig("CLAD-PP", loss=0.3, seed=11, costs=scenarios.SUPERCONFLICT_COSTS, end_time=40)
    a = run_clad(inst, cfg, scenarios.SUPERCONFLICT_EVENTS)
    b = run_clad(inst, cfg, scenarios.SUPERCONFLICT_EVENTS)
    assert a.dumps() == b.dumps()
    assert any(e["dropped"] for e in a.log)


def test_events_json(tmp_path):
    evs = [ScriptEvent(1.0, 2, "retask", (3.5, 4.5)), ScriptEvent(2.0, 1, "divergence", (1.0, 1.0))]
    p = tmp_path / "ev.json"
    p.write_text(json.dumps([e.to_json() for e in evs]))
    assert load_events(p) == evs
    assert evs[1].to_json()["position"] == [1.0, 1.0]
    with pytest.raises(ValueError):
        ScriptEvent(1.0, 1, "teleport", (0, 0))
