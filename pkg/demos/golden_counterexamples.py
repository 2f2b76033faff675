"""Run both centralized planners on the hand-built counterexamples."""

from prioplan import scenarios
from prioplan.prioritized import pp, rpp
from prioplan.roadmap import check_rpp_solvable
from prioplan.trajectory import arrival_time


def outcome(res):
    return "solution" if res else f"failure at robot {res.robot_id}"


def main():
    for name, build in [("corridor swap", scenarios.corridor_swap), ("type A", scenarios.type_a),
                        ("type B", scenarios.type_b), ("rpp limitation", scenarios.rpp_limitation),
                        ("start detour", scenarios.start_detour)]:
        inst = build()
        print(f"{name:15s} pp: {outcome(pp(inst)):22s} rpp: {outcome(rpp(inst)):22s} "
              f"static test: {check_rpp_solvable(inst).solvable}")
    inst = scenarios.start_detour()
    goal = inst.robots[0].goal
    print("start detour, robot 1 arrival:",
          arrival_time(pp(inst).trajectories[1], goal), "(pp) vs",
          arrival_time(rpp(inst).trajectories[1], goal), "(rpp)")


if __name__ == "__main__":
    main()
