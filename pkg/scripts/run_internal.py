"""Joint placement of individuals and objects (distance and inner-product models)."""

from _common import parser, run_and_save

from ordinal_embed.harness import ExperimentSpec

if __name__ == "__main__":
    args = parser(__doc__, trials=20).parse_args()
    for variant, sizes in (("internal-point", ((10, 10), (15, 15))),
                           ("internal-vector", ((10, 20),))):
        spec = ExperimentSpec(variant, 2, sizes, trials=args.trials, seed=args.seed)
        rep = run_and_save(spec, args.out, variant, plot=len(sizes) > 1)
        for size in spec.sizes:
            recs = rep.by_size(size)
            ok = sum(r.violation_fraction <= 0.01 for r in recs)
            print(f"{variant} {size}: {ok}/{len(recs)} trials with violations <= 1%")
