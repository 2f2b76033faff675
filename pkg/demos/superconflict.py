"""Closed-loop planning on the four-robot square with a mid-run retask and message loss."""

from prioplan import scenarios
from prioplan.sim import SimConfig, run_clad


def main():
    inst = scenarios.superconflict()
    out = run_clad(inst, SimConfig("CLAD-PP", costs=scenarios.SUPERCONFLICT_COSTS, rebroadcast=1.0),
                   scenarios.SUPERCONFLICT_EVENTS)
    print("lossless:", out.status, f"{out.messages} messages")
    for rid, tr in sorted(out.solution.trajectories.items()):
        print(f"  robot {rid}: {tr.position_at(0.0)} -> {tr.end}, done at {tr.end_time:.1f} s")
    wins = sum(run_clad(inst, SimConfig("CLAD-PP", loss=0.3, rebroadcast=1.0, seed=s,
                                        costs=scenarios.SUPERCONFLICT_COSTS),
                        scenarios.SUPERCONFLICT_EVENTS).success for s in range(100))
    print(f"loss 0.3: {wins}/100 seeded runs conflict-free")


if __name__ == "__main__":
    main()
