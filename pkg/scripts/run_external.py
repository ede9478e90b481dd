"""Recovery error of the external solvers as the number of anchors grows."""

from _common import parser, run_and_save

from ordinal_embed.harness import ExperimentSpec

if __name__ == "__main__":
    args = parser(__doc__, trials=50).parse_args()
    for variant in ("external-point", "external-vector"):
        spec = ExperimentSpec(variant, 2, (25, 50, 100, 200), trials=args.trials, seed=args.seed)
        rep = run_and_save(spec, args.out, variant)
        ratio = rep.median_error(200) / rep.median_error(25)
        print(f"{variant}: median error ratio n=200 / n=25 = {ratio:.4f}")
