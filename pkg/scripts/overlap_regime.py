"""Exploratory: internal point unfolding when the object region is shifted
away from the individuals, so the two sets only partly overlap.

Whether an open overlap is enough for identifiability is open; this script
records what the solver recovers and asserts nothing.
"""

from _common import parser

from ordinal_embed.harness import ExperimentSpec, run_identifiability_experiment

SHIFTS = (0.0, 0.5, 1.0, 1.5, 2.5)

if __name__ == "__main__":
    args = parser(__doc__, trials=10).parse_args()
    for shift in SHIFTS:
        spec = ExperimentSpec("internal-point", 2, ((15, 15),), trials=args.trials,
                              seed=args.seed, object_shift=shift)
        rep = run_identifiability_experiment(spec, threads=args.threads)
        s = rep.summary()[0]
        print(f"shift {shift:.1f}: aligned residual median {s['aligned_residual']['median']:.3f} "
              f"(IQR {s['aligned_residual']['iqr']:.3f}), "
              f"zero-violation rate {s['zero_violation_rate']:.2f}")
