"""Command-line entry point.

Exit codes: 0 on success, 2 when a solver fails (the result is still
written), 1 on usage, input or validation errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import shlex
import sys
from pathlib import Path

import numpy as np

from . import io
from .geometry import (
    Configuration,
    SphericalConfiguration,
    gauge_align_vector_model,
    orthogonal_align,
    similarity_procrustes,
)
from .harness import (
    COUNTEREXAMPLES,
    DESIGNS,
    ExperimentSpec,
    counterexample,
    run_identifiability_experiment,
    sample_design,
)
from .rankings import Model, RankMatrix, row_ranks, triples_from_ranks
from .solvers import (
    VARIANTS,
    SolverError,
    SolverOptions,
    solve_external_point,
    solve_external_vector,
    solve_internal_point,
    solve_internal_vector,
    solve_ordinal_mds,
    solve_sphere_mds,
)

log = logging.getLogger("ordinal_embed")

EXIT_OK, EXIT_ERROR, EXIT_SOLVER = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _common(defaults: bool) -> argparse.ArgumentParser:
    # accepted before or after the subcommand; subparsers must not clobber
    # a value given before it, hence SUPPRESS there
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=d(None), help="root seed")
    p.add_argument("--output", default=d(None), help="output path ('-' for stdout)")
    p.add_argument("--quiet", action="store_true", default=d(False), help="no progress on stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ordinal-embed", parents=[_common(True)],
                     description="Ordinal embedding solvers and identifiability experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = [_common(False)]

    g = sub.add_parser("generate", parents=common, help="sample configurations and rank data")
    g.add_argument("--design", required=True, choices=DESIGNS)
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--count", type=int, required=True, help="number of viewers / items")
    g.add_argument("--objects", type=int, default=None, help="number of objects (unfolding data)")
    g.add_argument("--object-design", choices=DESIGNS, default=None)
    g.add_argument("--model", choices=[m.value for m in Model], default=None,
                   help="also write ranks.csv and triples.csv under this model")
    g.add_argument("--triple-sample", type=int, default=None,
                   help="keep a seeded uniform sample of this many triples")

    s = sub.add_parser("solve", parents=common, help="fit a configuration to rank data")
    s.add_argument("--variant", required=True, choices=VARIANTS)
    s.add_argument("--input", required=True, help="ranks CSV or triples CSV")
    s.add_argument("--anchors", help="known objects for the external variants")
    s.add_argument("--row", type=int, default=0, help="rank row to use for the external variants")
    s.add_argument("--dim", type=int, default=2)
    s.add_argument("--n", type=int, default=None, help="item count for triple input")
    s.add_argument("--opts", help="solver options JSON")

    e = sub.add_parser("experiment", parents=common, help="run an identifiability experiment")
    e.add_argument("--spec", required=True, help="experiment spec JSON")
    e.add_argument("--plot", help="SVG plot of recovery error against size")
    e.add_argument("--threads", type=int, default=None)
    e.add_argument("--timing", action="store_true", help="include wall times (not reproducible)")
    e.add_argument("--fresh-seeds", action="store_true",
                   help="draw a new root seed from the OS (recorded in the manifest)")

    c = sub.add_parser("counterexample", parents=common, help="build a non-uniqueness demo")
    c.add_argument("--which", required=True, choices=COUNTEREXAMPLES)

    a = sub.add_parser("align", parents=common, help="align two configurations under a gauge group")
    a.add_argument("--source", required=True)
    a.add_argument("--target", required=True)
    a.add_argument("--group", choices=("similarity", "orthogonal", "gauge-pair"), default="similarity")
    a.add_argument("--source-objects", help="objects for --group gauge-pair")
    a.add_argument("--target-objects")
    a.add_argument("--proper", action="store_true", help="exclude reflections")

    r = sub.add_parser("rank", parents=common, help="rank matrix from configurations")
    r.add_argument("--viewers", required=True)
    r.add_argument("--objects", help="objects (omit for --model self)")
    r.add_argument("--model", choices=[m.value for m in Model], default="point")
    r.add_argument("--triples", help="also write the comparisons here")
    return parser


def _emit(args, payload: dict, default_name: str | None = None):
    out = args.output or default_name or "-"
    io.dump_json(out, payload)
    if out != "-":
        log.info("wrote %s", out)


def _command_string(argv) -> str:
    return shlex.join(["ordinal-embed", *argv])


# ------------------------------------------------------------ subcommands


def cmd_generate(args, argv) -> int:
    if not args.output:
        raise UsageError("generate needs --output <directory>")
    if args.count < 1 or args.dim < 1 or (args.objects is not None and args.objects < 1):
        raise UsageError("--count, --dim and --objects must be >= 1")
    seed = 0 if args.seed is None else args.seed
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    root = np.random.SeedSequence(seed)
    v_rng, o_rng = (np.random.default_rng(s) for s in root.spawn(2))
    viewers_pts = sample_design(args.design, args.count, args.dim, v_rng)
    viewers = (SphericalConfiguration(viewers_pts) if args.design == "uniform-sphere"
               else Configuration(viewers_pts))
    files = {}
    io.write_configuration(out / "viewers.csv", viewers)
    io.write_configuration(out / "viewers.json", viewers)
    files["viewers"] = ["viewers.csv", "viewers.json"]
    objects = None
    if args.objects is not None:
        design = args.object_design or args.design
        objects = Configuration(sample_design(design, args.objects, args.dim, o_rng))
        io.write_configuration(out / "objects.csv", objects)
        io.write_configuration(out / "objects.json", objects)
        files["objects"] = ["objects.csv", "objects.json"]
    if args.model is not None:
        model = Model(args.model)
        if model is not Model.SELF and objects is None:
            raise UsageError(f"--model {model.value} needs --objects")
        R = row_ranks(model, viewers, objects)
        T = triples_from_ranks(R, model, sample_count=args.triple_sample, seed=seed)
        io.write_ranks(out / "ranks.csv", R)
        io.write_triples(out / "triples.csv", T)
        files["ranks"], files["triples"] = "ranks.csv", "triples.csv"
    manifest = io.RunManifest.build(_command_string(argv), seed=seed)
    io.dump_json(out / "manifest.json", {"manifest": manifest.to_dict(), "files": files})
    log.info("wrote %s", out)
    return EXIT_OK


def _load_opts(args) -> SolverOptions:
    opts = SolverOptions()
    if args.opts:
        try:
            opts = SolverOptions.from_dict(json.loads(Path(args.opts).read_text(encoding="utf-8")))
        except json.JSONDecodeError as e:
            raise io.FormatError(f"bad options JSON: {e}") from None
    if args.seed is not None:
        opts = SolverOptions.from_dict({**opts.to_dict(), "seed": args.seed})
    return opts


def _run_solver(args, opts: SolverOptions):
    v = args.variant
    if v.startswith("external"):
        if not args.anchors:
            raise UsageError(f"--variant {v} needs --anchors")
        R = io.read_ranks(args.input)
        if not 0 <= args.row < R.rows:
            raise UsageError(f"--row {args.row} outside 0..{R.rows - 1}")
        anchors = io.read_configuration(args.anchors)
        fn = solve_external_point if v == "external-point" else solve_external_vector
        return fn(anchors, R.ranks[args.row], opts)
    if v.startswith("internal"):
        R = io.read_ranks(args.input)
        fn = solve_internal_point if v == "internal-point" else solve_internal_vector
        return fn(R, args.dim, opts)
    # mds / sphere-mds take triples, or a self-ranking matrix
    if io.is_triple_file(args.input):
        T = io.read_triples(args.input)
        seen = int(T.triples.max()) + 1 if len(T) else 0
        n = seen if args.n is None else args.n
        if n < seen:
            raise UsageError(f"--n {n} but triples index item {seen - 1}")
    else:
        R = io.read_ranks(args.input)
        T, n = triples_from_ranks(R, Model.SELF), R.cols
    fn = solve_ordinal_mds if v == "mds" else solve_sphere_mds
    return fn(T, n, args.dim, opts)


def cmd_solve(args, argv) -> int:
    opts = _load_opts(args)
    code, error = EXIT_OK, None
    try:
        result = _run_solver(args, opts)
    except SolverError as e:
        result, code, error = e.result, EXIT_SOLVER, str(e)
        log.error("solver failed: %s", e)
    inputs = [args.input] + ([args.anchors] if args.anchors else []) + ([args.opts] if args.opts else [])
    manifest = io.RunManifest.build(_command_string(argv), inputs, seed=opts.seed)
    payload = {"manifest": manifest.to_dict(), "variant": args.variant,
               "options": opts.to_dict(), "result": result.to_dict(), "error": error}
    _emit(args, payload)
    return code


def cmd_experiment(args, argv) -> int:
    try:
        spec_dict = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise io.FormatError(f"bad spec JSON: {e}") from None
    if args.fresh_seeds:
        spec_dict["seed"] = int(np.random.SeedSequence().entropy % (1 << 63))
    elif args.seed is not None:
        spec_dict["seed"] = args.seed
    spec = ExperimentSpec.from_dict(spec_dict)

    def progress(rec):
        log.info("size %s trial %d: %s, violations %d", rec.size, rec.trial, rec.status, rec.violations)

    report = run_identifiability_experiment(spec, threads=args.threads, progress=progress)
    manifest = io.RunManifest.build(_command_string(argv), [args.spec], seed=spec.seed,
                                    fresh_seeds=bool(args.fresh_seeds))
    payload = {"manifest": manifest.to_dict(), **report.to_dict(include_timing=args.timing)}
    _emit(args, payload)
    if args.plot:
        from .plots import plot_report

        plot_report(report, args.plot)
        log.info("wrote %s", args.plot)
    return EXIT_OK


def cmd_counterexample(args, argv) -> int:
    rep = counterexample(args.which)
    manifest = io.RunManifest.build(_command_string(argv), seed=args.seed)
    _emit(args, {"manifest": manifest.to_dict(), **rep.to_dict()})
    return EXIT_OK if rep.passed else EXIT_SOLVER


def cmd_align(args, argv) -> int:
    src, tgt = io.read_configuration(args.source), io.read_configuration(args.target)
    inputs = [args.source, args.target]
    reflect = not args.proper
    if args.group == "similarity":
        res = similarity_procrustes(src, tgt, allow_reflection=reflect)
    elif args.group == "orthogonal":
        res = orthogonal_align(src, tgt, allow_reflection=reflect)
    else:
        if not (args.source_objects and args.target_objects):
            raise UsageError("--group gauge-pair needs --source-objects and --target-objects")
        so, to = io.read_configuration(args.source_objects), io.read_configuration(args.target_objects)
        inputs += [args.source_objects, args.target_objects]
        res = gauge_align_vector_model(src, so, tgt, to)
    manifest = io.RunManifest.build(_command_string(argv), inputs, seed=args.seed)
    payload = {"manifest": manifest.to_dict(), "group": args.group,
               "transform": io.transform_to_dict(res.transform), "residual": res.residual,
               "details": dict(res.details)}
    _emit(args, payload)
    return EXIT_OK


def cmd_rank(args, argv) -> int:
    model = Model(args.model)
    viewers = io.read_configuration(args.viewers)
    objects = io.read_configuration(args.objects) if args.objects else None
    if model is not Model.SELF and objects is None:
        raise UsageError(f"--model {model.value} needs --objects")
    R = row_ranks(model, viewers, objects)
    io.write_ranks(args.output or "-", R)
    if args.triples:
        io.write_triples(args.triples, triples_from_ranks(R, model))
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "experiment": cmd_experiment,
    "counterexample": cmd_counterexample,
    "align": cmd_align,
    "rank": cmd_rank,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr, force=True)
    try:
        return COMMANDS[args.command](args, argv)
    except (UsageError, ValueError, OSError, KeyError) as e:
        # RankValidationError, TieError and FormatError are ValueErrors
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"ordinal-embed {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
