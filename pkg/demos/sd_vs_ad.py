"""Compare synchronized and asynchronous decentralized planning on a small suite."""

import numpy as np

from prioplan import scenarios
from prioplan.instances import GenSpec, generate
from prioplan.sim import CALIBRATED_COSTS, SimConfig, run_ad, run_sd


def main():
    inst = scenarios.slow_middle_robot()
    sd = run_sd(inst, SimConfig("SD-PP", costs=scenarios.SLOW_MIDDLE_COSTS))
    ad = run_ad(inst, SimConfig("AD-PP", costs=scenarios.SLOW_MIDDLE_COSTS))
    print(f"slow middle robot: SD {sd.time:.2f} s in {sd.rounds} rounds, AD {ad.time:.2f} s")

    times, msgs = {"SD": [], "AD": []}, {"SD": [], "AD": []}
    for inst in generate(GenSpec("empty-hall", "infrastructure", 10, 10, seed=0)):
        for tag, run in (("SD", run_sd), ("AD", run_ad)):
            out = run(inst, SimConfig(f"{tag}-RPP", costs=CALIBRATED_COSTS))
            times[tag].append(out.time)
            msgs[tag].append(out.messages)
    for tag in ("SD", "AD"):
        print(f"{tag}-RPP, 10 robots: mean time {np.mean(times[tag]):.4f} s, "
              f"mean messages {np.mean(msgs[tag]):.1f}")


if __name__ == "__main__":
    main()
