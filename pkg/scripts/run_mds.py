"""Ordinal MDS in the unit square and spherical MDS on S^2."""

from _common import parser, run_and_save

from ordinal_embed.harness import ExperimentSpec

if __name__ == "__main__":
    args = parser(__doc__, trials=20).parse_args()
    run_and_save(ExperimentSpec("mds", 2, (10, 20, 30), design="uniform-cube",
                                trials=args.trials, seed=args.seed), args.out, "mds")
    run_and_save(ExperimentSpec("sphere-mds", 3, (15,), design="uniform-sphere",
                                trials=args.trials, seed=args.seed), args.out, "sphere-mds",
                 plot=False)
