"""Pilot runs behind the ordinal MDS residual threshold.

Uses seeds disjoint from the shipped one. The acceptance threshold (0.1)
sits well above the upper quartile of the aligned residual seen here at
n=30; rerun to check it on other machines.
"""

import numpy as np

from ordinal_embed.harness import ExperimentSpec, run_identifiability_experiment

PILOT_SEEDS = (1, 2, 3)

if __name__ == "__main__":
    res, frac = [], []
    for seed in PILOT_SEEDS:
        rep = run_identifiability_experiment(
            ExperimentSpec("mds", 2, (30,), design="uniform-cube", trials=10, seed=seed))
        res += [r.aligned_residual for r in rep.records]
        frac += [r.violation_fraction for r in rep.records]
    q = np.percentile(res, [50, 75, 95, 100])
    print(f"{len(res)} pilot trials, aligned residual median {q[0]:.4f}, q75 {q[1]:.4f}, "
          f"q95 {q[2]:.4f}, max {q[3]:.4f}")
    print(f"violation fraction max {max(frac):.4f}")
