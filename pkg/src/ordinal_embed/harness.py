"""Identifiability experiments and exact non-uniqueness demonstrations.

An experiment samples a ground truth per trial, generates exact rank data,
solves, aligns the solution with the truth under the variant's gauge group
and records how far apart they are. Seeds are derived per ``(size, trial)``
from one root seed, so adding trials or sizes never changes existing ones.
"""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .geometry import (
    Configuration,
    SphericalConfiguration,
    gauge_align_vector_model,
    orthogonal_align,
    random_gauge_pair,
    random_orthogonal,
    random_similarity,
    similarity_procrustes,
)
from .rankings import (
    Model,
    RankMatrix,
    TieError,
    rank_data_equal,
    row_ranks,
    triples_from_ranks,
    violation_count,
)
from .solvers import (
    VARIANTS,
    SolveResult,
    SolverError,
    SolverOptions,
    solve_external_point,
    solve_external_vector,
    solve_internal_point,
    solve_internal_vector,
    solve_ordinal_mds,
    solve_sphere_mds,
)

log = logging.getLogger(__name__)

DESIGNS = ("uniform-ball", "uniform-cube", "uniform-sphere", "grid")
GRID_JITTER = 1e-9
THREADS_ENV = "ORDINAL_EMBED_THREADS"

_MODEL = {
    "external-point": Model.POINT,
    "external-vector": Model.VECTOR,
    "mds": Model.SELF,
    "internal-point": Model.POINT,
    "internal-vector": Model.VECTOR,
    "sphere-mds": Model.SELF,
}


# ------------------------------------------------------------------ designs


def sample_design(design: str, n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points from a sampling design; ``grid`` is deterministic."""
    if n < 1 or dim < 1:
        raise ValueError("n and dim must be >= 1")
    if design == "uniform-ball":
        g = rng.standard_normal((n, dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return g * rng.uniform(size=(n, 1)) ** (1.0 / dim)
    if design == "uniform-cube":
        return rng.uniform(size=(n, dim))
    if design == "uniform-sphere":
        g = rng.standard_normal((n, dim))
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    if design == "grid":
        side = max(1, math.ceil(round(n ** (1.0 / dim), 12)))
        ticks = np.linspace(-1.0, 1.0, side) if side > 1 else np.zeros(1)
        mesh = np.stack(np.meshgrid(*[ticks] * dim, indexing="ij"), axis=-1).reshape(-1, dim)
        return mesh[:n].copy()
    raise ValueError(f"unknown design {design!r}; expected one of {DESIGNS}")


def sphere_points(n: int, dim: int, rng: np.random.Generator) -> SphericalConfiguration:
    return SphericalConfiguration.normalized(sample_design("uniform-sphere", n, dim, rng))


# --------------------------------------------------------------- experiment


@dataclass(frozen=True)
class ExperimentSpec:
    variant: str
    dim: int
    sizes: tuple
    design: str = "uniform-ball"
    trials: int = 10
    seed: int = 0
    solver_opts: SolverOptions = field(default_factory=SolverOptions)
    triple_sample: int | None = None
    allow_reflection: bool = True
    oracle: bool = False
    object_shift: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.design not in DESIGNS:
            raise ValueError(f"unknown design {self.design!r}; expected one of {DESIGNS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        sizes = tuple(self._normalize_size(s) for s in self.sizes)
        if not sizes:
            raise ValueError("sizes must be non-empty")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sizes must be strictly increasing")
        object.__setattr__(self, "sizes", sizes)
        if isinstance(self.solver_opts, dict):
            object.__setattr__(self, "solver_opts", SolverOptions.from_dict(self.solver_opts))

    def _normalize_size(self, s):
        if self.variant.startswith("internal"):
            m, n = (s, s) if np.isscalar(s) else s
            return (int(m), int(n))
        if not np.isscalar(s):
            raise ValueError(f"variant {self.variant!r} takes integer sizes")
        return int(s)

    @property
    def model(self) -> Model:
        return _MODEL[self.variant]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sizes"] = [list(s) if isinstance(s, tuple) else s for s in self.sizes]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        d["sizes"] = tuple(tuple(s) if isinstance(s, list) else s for s in d["sizes"])
        if "solver_opts" in d:
            d["solver_opts"] = SolverOptions.from_dict(d["solver_opts"])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown experiment fields: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class Truth:
    viewers: Configuration
    objects: Configuration | None
    data: object  # rank row, RankMatrix or TripleSet, as the solver expects


@dataclass(frozen=True)
class TrialRecord:
    size: int | tuple
    trial: int
    status: str
    violations: int
    n_comparisons: int
    aligned_residual: float
    recovery_error: float
    wall_time: float
    solution: dict

    @property
    def violation_fraction(self) -> float:
        return self.violations / self.n_comparisons if self.n_comparisons else 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        d = asdict(self)
        d["size"] = list(self.size) if isinstance(self.size, tuple) else self.size
        if not include_timing:
            d.pop("wall_time")
        return d


def trial_rng(root_seed: int, size, trial: int) -> np.random.Generator:
    """Independent stream per ``(size, trial)`` keyed by value, not position."""
    key = tuple(size) if isinstance(size, tuple) else (size,)
    return np.random.default_rng(np.random.SeedSequence(root_seed, spawn_key=key + (trial,)))


def _draw(spec: ExperimentSpec, count: int, rng) -> np.ndarray:
    pts = sample_design(spec.design, count, spec.dim, rng)
    if spec.design == "grid":
        pts = pts + GRID_JITTER * rng.standard_normal(pts.shape)
    return pts


def sample_truth(spec: ExperimentSpec, size, rng: np.random.Generator, max_tries: int = 20) -> Truth:
    """Ground truth plus exact data; tied draws are rejected and redrawn."""
    v = spec.variant
    shift = np.zeros(spec.dim)
    shift[0] = spec.object_shift
    for _ in range(max_tries):
        try:
            if v == "external-point":
                objects = Configuration(_draw(spec, size, rng) + shift)
                viewers = Configuration(_draw(spec, 1, rng))
                return Truth(viewers, objects, row_ranks(Model.POINT, viewers, objects).ranks[0])
            if v == "external-vector":
                objects = Configuration(_draw(spec, size, rng) + shift)
                viewers = sphere_points(1, spec.dim, rng)
                return Truth(viewers, objects, row_ranks(Model.VECTOR, viewers, objects).ranks[0])
            if v in ("mds", "sphere-mds"):
                items = (sphere_points(size, spec.dim, rng) if v == "sphere-mds"
                         else Configuration(_draw(spec, size, rng)))
                R = row_ranks(Model.SELF, items)
                seed = int(rng.integers(2 ** 31))
                return Truth(items, None, triples_from_ranks(R, Model.SELF, spec.triple_sample, seed))
            m, n = size
            objects = Configuration(_draw(spec, n, rng) + shift)
            if v == "internal-point":
                viewers = Configuration(_draw(spec, m, rng))
                return Truth(viewers, objects, row_ranks(Model.POINT, viewers, objects))
            viewers = sphere_points(m, spec.dim, rng)
            return Truth(viewers, objects, row_ranks(Model.VECTOR, viewers, objects))
        except TieError as err:
            log.debug("resampling after %s", err)
    raise RuntimeError(f"could not draw a tie-free configuration in {max_tries} tries")


def _solve(spec: ExperimentSpec, size, truth: Truth) -> SolveResult:
    opts, p, v = spec.solver_opts, spec.dim, spec.variant
    if v == "external-point":
        return solve_external_point(truth.objects, truth.data, opts)
    if v == "external-vector":
        return solve_external_vector(truth.objects, truth.data, opts)
    if v == "mds":
        return solve_ordinal_mds(truth.data, size, p, opts)
    if v == "sphere-mds":
        return solve_sphere_mds(truth.data, size, p, opts)
    if v == "internal-point":
        return solve_internal_point(truth.data, p, opts)
    return solve_internal_vector(truth.data, p, opts)


def _comparisons(spec: ExperimentSpec, truth: Truth):
    if spec.model is Model.SELF:
        return truth.data
    R = truth.data if spec.variant.startswith("internal") else RankMatrix(truth.data)
    return triples_from_ranks(R, spec.model)


def count_violations(spec: ExperimentSpec, truth: Truth, points: Configuration,
                     objects: Configuration | None) -> tuple[int, int]:
    """Violations of the solution against the exact data, recomputed from scratch."""
    triples = _comparisons(spec, truth)
    if spec.variant.startswith("external"):
        objects = truth.objects
    return violation_count(triples, points, objects), len(triples)


def alignment_error(spec: ExperimentSpec, truth: Truth, points: Configuration,
                    objects: Configuration | None) -> float:
    """Residual after the best gauge element of the variant's group."""
    v = spec.variant
    if v == "external-point":
        return float(np.linalg.norm(points.points[0] - truth.viewers.points[0]))
    if v == "external-vector":
        c = float(np.clip(points.points[0] @ truth.viewers.points[0], -1.0, 1.0))
        return math.acos(c)
    if v == "mds":
        return similarity_procrustes(points, truth.viewers, spec.allow_reflection).residual
    if v == "sphere-mds":
        return orthogonal_align(points, truth.viewers, spec.allow_reflection).residual
    if v == "internal-point":
        src = Configuration(np.vstack([points.points, objects.points]))
        tgt = Configuration(np.vstack([truth.viewers.points, truth.objects.points]))
        return similarity_procrustes(src, tgt, spec.allow_reflection).residual
    return gauge_align_vector_model(points, objects, truth.viewers, truth.objects).residual


def run_trial(spec: ExperimentSpec, size, trial: int) -> TrialRecord:
    rng = trial_rng(spec.seed, size, trial)
    truth = sample_truth(spec, size, rng)
    start = time.perf_counter()
    if spec.oracle:
        points = truth.viewers
        objects = truth.objects if spec.variant.startswith("internal") else None
        status = "oracle"
    else:
        try:
            result = _solve(spec, size, truth)
        except SolverError as err:
            result = err.result
        points, objects, status = result.points, result.objects, result.status
    elapsed = time.perf_counter() - start
    violations, n_comp = count_violations(spec, truth, points, objects)
    residual = alignment_error(spec, truth, points, objects)
    solution = {"points": points.to_dict()}
    if objects is not None:
        solution["objects"] = objects.to_dict()
    return TrialRecord(size, trial, status, violations, n_comp, residual, residual, elapsed,
                       solution)


def recompute_violations(spec: ExperimentSpec, record: TrialRecord) -> int:
    """Regenerate the trial's data from its seed and recount on the stored solution."""
    truth = sample_truth(spec, record.size, trial_rng(spec.seed, record.size, record.trial))
    spherical = spec.variant in ("external-vector", "internal-vector", "sphere-mds")
    cls = SphericalConfiguration if spherical else Configuration
    points = cls.from_dict(record.solution["points"])
    objects = record.solution.get("objects")
    objects = Configuration.from_dict(objects) if objects else None
    return count_violations(spec, truth, points, objects)[0]


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return n if n > 0 else (os.cpu_count() or 1)


def _quartiles(values) -> dict:
    a = np.asarray(values, dtype=float)
    q25, q50, q75 = np.percentile(a, [25, 50, 75])
    return {"median": float(q50), "q25": float(q25), "q75": float(q75), "iqr": float(q75 - q25)}


@dataclass(frozen=True)
class ExperimentReport:
    spec: ExperimentSpec
    records: tuple[TrialRecord, ...]

    def by_size(self, size) -> list[TrialRecord]:
        return [r for r in self.records if r.size == size]

    def summary(self) -> list[dict]:
        out = []
        for size in self.spec.sizes:
            recs = self.by_size(size)
            out.append({
                "size": list(size) if isinstance(size, tuple) else size,
                "trials": len(recs),
                "recovery_error": _quartiles([r.recovery_error for r in recs]),
                "aligned_residual": _quartiles([r.aligned_residual for r in recs]),
                "violation_fraction": _quartiles([r.violation_fraction for r in recs]),
                "zero_violation_rate": float(np.mean([r.violations == 0 for r in recs])),
                "failed": sum(r.status not in ("ok", "oracle") for r in recs),
            })
        return out

    def median_error(self, size) -> float:
        return float(np.median([r.recovery_error for r in self.by_size(size)]))

    def to_dict(self, include_timing: bool = False) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "summary": self.summary(),
            "records": [r.to_dict(include_timing) for r in self.records],
        }


def run_identifiability_experiment(spec: ExperimentSpec, threads: int | None = None,
                                   progress: Callable[[TrialRecord], None] | None = None
                                   ) -> ExperimentReport:
    """Run every ``(size, trial)`` of ``spec``; results come back in a fixed order."""
    jobs = [(size, t) for size in spec.sizes for t in range(spec.trials)]
    threads = thread_count() if threads is None else max(1, threads)
    done: dict = {}
    if threads == 1:
        for key in jobs:
            done[key] = run_trial(spec, *key)
            if progress:
                progress(done[key])
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {key: pool.submit(run_trial, spec, *key) for key in jobs}
            for key in jobs:
                done[key] = futures[key].result()
                if progress:
                    progress(done[key])
    return ExperimentReport(spec, tuple(done[key] for key in jobs))


# ----------------------------------------------------------- counterexamples

COUNTEREXAMPLES = (
    "internal-point-ray",
    "internal-vector-coordinatewise",
    "internal-vector-disconnected",
)
SHIPPED_SEED = 20240611


@dataclass(frozen=True)
class CounterexampleReport:
    """Two configurations with identical rank data that no gauge element relates."""

    name: str
    model: Model
    a_viewers: Configuration
    a_objects: Configuration
    b_viewers: Configuration
    b_objects: Configuration
    rank_data_equal: bool
    residual: float
    floor: float

    @property
    def outside_gauge_orbit(self) -> bool:
        return self.residual > self.floor

    @property
    def passed(self) -> bool:
        return self.rank_data_equal and self.outside_gauge_orbit

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "model": self.model.value,
            "rank_data_equal": self.rank_data_equal,
            "residual": self.residual,
            "residual_floor": self.floor,
            "outside_gauge_orbit": self.outside_gauge_orbit,
            "passed": self.passed,
            "config_a": {"viewers": self.a_viewers.to_dict(), "objects": self.a_objects.to_dict()},
            "config_b": {"viewers": self.b_viewers.to_dict(), "objects": self.b_objects.to_dict()},
        }


RAY_SAMPLE = (1.0, 1.3, 1.7, 2.2, 2.8, 3.5)


def counterexample_internal_point_ray(
    n_ball: int = 12,
    ray: tuple = RAY_SAMPLE,
    ray_map: Callable[[np.ndarray], np.ndarray] = np.square,
    dim: int = 2,
    seed: int = SHIPPED_SEED,
) -> CounterexampleReport:
    """Ball of individuals, objects = ball plus points ``a u`` on a ray.

    The second configuration keeps the ball and moves the ray points by an
    increasing map. Ray points with ``a <= 3`` may be nearer than some ball
    object to some individual, so they stay fixed; points beyond ``a = 3``
    are farther than the whole ball from every individual and are moved by
    ``ray_map``, which must stay increasing and above 3 there.
    """
    rng = np.random.default_rng(seed)
    ball = sample_design("uniform-ball", n_ball, dim, rng)
    u = np.zeros(dim)
    u[0] = 1.0
    a = np.asarray(ray, dtype=float)
    if np.any(a < 1) or np.any(np.diff(a) <= 0):
        raise ValueError("ray parameters must be increasing and >= 1")
    safe = 1.0 + 2.0  # ball radius + ball diameter
    far = a > safe
    g = a.copy()
    g[far] = ray_map(a[far])
    if np.any(np.diff(g) <= 0) or np.any(g[far] <= safe):
        raise ValueError("ray_map must be increasing and map (3, inf) into itself")
    viewers = Configuration(ball)
    a_objects = Configuration(np.vstack([ball, a[:, None] * u]))
    b_objects = Configuration(np.vstack([ball, g[:, None] * u]))
    equal = rank_data_equal(viewers, a_objects, viewers, b_objects, Model.POINT)
    src = Configuration(np.vstack([viewers.points, a_objects.points]))
    tgt = Configuration(np.vstack([viewers.points, b_objects.points]))
    residual = similarity_procrustes(src, tgt).residual
    return CounterexampleReport("internal-point-ray", Model.POINT, viewers, a_objects, viewers,
                                b_objects, equal, residual, 0.1)


def _coordinatewise_cube_double(Y: np.ndarray) -> np.ndarray:
    return np.column_stack([Y[:, 0] ** 3, 2.0 * Y[:, 1]] + [Y[:, d] for d in range(2, Y.shape[1])])


def counterexample_internal_vector_coordinatewise(
    n_objects: int = 10,
    g: Callable[[np.ndarray], np.ndarray] = _coordinatewise_cube_double,
    dim: int = 2,
    seed: int = SHIPPED_SEED,
) -> CounterexampleReport:
    """Individuals are the coordinate axes, so only each coordinate's order
    matters and any coordinatewise increasing ``g`` keeps the data."""
    rng = np.random.default_rng(seed)
    Y = sample_design("uniform-ball", n_objects, dim, rng)
    X = SphericalConfiguration(np.eye(dim))
    a_objects, b_objects = Configuration(Y), Configuration(g(Y))
    equal = rank_data_equal(X, a_objects, X, b_objects, Model.VECTOR)
    residual = gauge_align_vector_model(X, a_objects, X, b_objects).residual
    return CounterexampleReport("internal-vector-coordinatewise", Model.VECTOR, X, a_objects, X,
                                b_objects, equal, residual, 0.05)


def counterexample_internal_vector_disconnected(
    per_ball: int = 8,
    shift: tuple = (0.4, 0.4),
    seed: int = SHIPPED_SEED,
) -> CounterexampleReport:
    """Objects in two unit balls, around 0 and ``3 e0``; the far ball is
    translated on its own. Every individual ranks the far ball entirely
    above the near one, so the data are unchanged."""
    dim = 2
    rng = np.random.default_rng(seed)
    e0 = np.ones(dim) / np.sqrt(dim)
    X = SphericalConfiguration(np.vstack([e0, np.eye(dim)]))
    Y0 = sample_design("uniform-ball", per_ball, dim, rng)
    Y1 = 3.0 * e0 + sample_design("uniform-ball", per_ball, dim, rng)
    a_objects = Configuration(np.vstack([Y0, Y1]))
    b_objects = Configuration(np.vstack([Y0, Y1 + np.asarray(shift, dtype=float)]))
    equal = rank_data_equal(X, a_objects, X, b_objects, Model.VECTOR)
    residual = gauge_align_vector_model(X, a_objects, X, b_objects).residual
    return CounterexampleReport("internal-vector-disconnected", Model.VECTOR, X, a_objects, X,
                                b_objects, equal, residual, 0.05)


def counterexample_internal_vector() -> list[CounterexampleReport]:
    return [counterexample_internal_vector_coordinatewise(),
            counterexample_internal_vector_disconnected()]


def counterexample(which: str) -> CounterexampleReport:
    builders = {
        "internal-point-ray": counterexample_internal_point_ray,
        "internal-vector-coordinatewise": counterexample_internal_vector_coordinatewise,
        "internal-vector-disconnected": counterexample_internal_vector_disconnected,
    }
    if which not in builders:
        raise ValueError(f"unknown counterexample {which!r}; expected one of {COUNTEREXAMPLES}")
    return builders[which]()


# ---------------------------------------------------------- gauge invariance

GAUGE_VARIANTS = ("point", "mds", "vector", "sphere")


@dataclass(frozen=True)
class GaugeReport:
    variant: str
    trials: int
    passes: int
    failures: tuple[int, ...]

    @property
    def all_passed(self) -> bool:
        return self.passes == self.trials

    def to_dict(self) -> dict:
        return asdict(self)


def gauge_invariance_suite(variant: str, trials: int, seed: int, identity: bool = False
                           ) -> GaugeReport:
    """Check that rank data are unchanged by random elements of the gauge group.

    ``point`` and ``mds`` use similarities, ``vector`` uses ``(L, tau)``
    pairs and ``sphere`` uses orthogonal maps. ``identity=True`` applies the
    identity element instead.
    """
    if variant not in GAUGE_VARIANTS:
        raise ValueError(f"unknown gauge variant {variant!r}; expected one of {GAUGE_VARIANTS}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    failures = []
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t,)))
        p = int(rng.integers(2, 5))
        m, n = int(rng.integers(3, 12)), int(rng.integers(3, 16))
        if variant in ("point", "mds"):
            X = Configuration(rng.uniform(-1, 1, (m, p)))
            Y = Configuration(rng.uniform(-1, 1, (n, p)))
            T = random_similarity(p, rng)
            if identity:
                T = type(T).identity(p)
            if variant == "point":
                ok = rank_data_equal(X, Y, T(X), T(Y), Model.POINT)
            else:
                ok = rank_data_equal(Y, None, T(Y), None, Model.SELF)
        elif variant == "vector":
            X = sphere_points(m, p, rng)
            Y = Configuration(rng.uniform(-1, 1, (n, p)))
            G = random_gauge_pair(p, rng)
            if identity:
                G = type(G).identity(p)
            ok = rank_data_equal(X, Y, G.apply_individuals(X), G.apply_objects(Y), Model.VECTOR)
        else:
            S = sphere_points(n, p, rng)
            Q = np.eye(p) if identity else random_orthogonal(p, rng)
            S2 = SphericalConfiguration.normalized(S.points @ Q.T)
            ok = rank_data_equal(S, None, S2, None, Model.SELF)
        if not ok:
            failures.append(t)
    return GaugeReport(variant, trials, trials - len(failures), tuple(failures))
