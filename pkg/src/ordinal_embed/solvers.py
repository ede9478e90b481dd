"""Solvers for the ordinal embedding problems.

External unfolding (one individual, known objects) is a linear feasibility
problem: every comparison is a halfspace in the unknown. Those solvers run
a pocket relaxation-perceptron to find a feasible point and then move to
the max-margin point of the feasible cell.

Ordinal MDS, internal unfolding and spherical MDS are non-convex. They
minimize a mean hinge surrogate of the strict comparisons by projected
gradient descent with backtracking (so the recorded loss never increases),
re-projecting onto the gauge slice after every step, with random restarts.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.optimize import linprog
from scipy.special import expit

from .geometry import Configuration, SphericalConfiguration, halfspace
from .rankings import Model, RankMatrix, TripleSet, triples_from_ranks, violation_count

log = logging.getLogger(__name__)

DEGENERACY_RATIO = 1e-6
_MAX_HALVINGS = 30
_PLATEAU_PATIENCE = 50
_MAX_STEP_BOOST = 64.0
INIT_JITTER = 0.1
WARMUP_TEMPERATURE = 0.1
WARMUP_ITERATIONS = 2000


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 5000
    learning_rate: float = 0.05
    margin: float = 0.01
    restarts: int = 5
    seed: int = 0
    tolerance: float = 1e-8
    repulsion_weight: float = 0.0
    repulsion_radius: float = 0.1

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        for name in ("learning_rate", "margin", "tolerance", "repulsion_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.repulsion_weight < 0:
            raise ValueError("repulsion_weight must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SolverOptions":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown solver options: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a solve.

    ``points`` holds the single individual (external variants), the items
    (MDS variants) or the individuals (internal variants); ``objects`` is
    only set for internal unfolding.
    """

    points: Configuration
    violations: int
    loss: float
    iterations_used: int
    converged: bool
    n_comparisons: int
    objects: Configuration | None = None
    loss_trace: tuple[float, ...] = ()
    restarts_used: int = 1
    status: str = "ok"
    margin: float | None = None

    def to_dict(self) -> dict:
        d = {
            "points": self.points.to_dict(),
            "objects": None if self.objects is None else self.objects.to_dict(),
            "violations": self.violations,
            "n_comparisons": self.n_comparisons,
            "loss": self.loss,
            "iterations_used": self.iterations_used,
            "converged": self.converged,
            "restarts_used": self.restarts_used,
            "status": self.status,
            "margin": self.margin,
        }
        trace = self.loss_trace
        d["loss_trace"] = {
            "first": trace[0] if trace else None,
            "last": trace[-1] if trace else None,
            "length": len(trace),
            "samples": list(trace[:: max(1, len(trace) // 20)]),
        }
        return d


class SolverError(RuntimeError):
    """A solve finished without a valid solution; ``result`` holds the best attempt."""

    status = "failed"

    def __init__(self, message: str, result: SolveResult):
        super().__init__(message)
        self.result = replace(result, status=self.status)


class InfeasibleError(SolverError):
    status = "infeasible"


class NonConvergedError(SolverError):
    status = "nonconverged"


class DegenerateSolutionError(SolverError):
    status = "degenerate"


# ---------------------------------------------------------------- external


def _rank_row(row, n: int) -> np.ndarray:
    r = np.asarray(row).reshape(-1)
    if len(r) != n:
        raise ValueError(f"rank row has {len(r)} entries for {n} objects")
    RankMatrix(r)  # permutation check
    return np.argsort(r, kind="stable")


def _pocket_relaxation(A, b, x0, opts: SolverOptions, project=None):
    """Relaxation perceptron for ``A x < b`` keeping the best iterate.

    Each step projects onto the most violated halfspace, overshooting by a
    small margin. The trace records the pocket (best-so-far) loss, the
    normalized total violation.
    """
    norms = np.linalg.norm(A, axis=1)
    An, bn = A / norms[:, None], b / norms

    x = x0
    slack = An @ x - bn
    best_x, best_loss = x, float(np.sum(np.maximum(0.0, slack)))
    trace = [best_loss]
    overshoot = opts.margin * 1e-2
    it = 0
    for it in range(1, opts.max_iterations + 1):
        worst = int(np.argmax(slack))
        if slack[worst] < 0:
            break
        x = x - (slack[worst] + overshoot) * An[worst]
        if project is not None:
            x = project(x)
        slack = An @ x - bn
        cur = float(np.sum(np.maximum(0.0, slack)))
        if cur < best_loss or (cur == best_loss and np.all(slack < 0)):
            best_x, best_loss = x, cur
        trace.append(best_loss)
    return best_x, best_loss, trace, it


def _chebyshev_center(A, b, box: float, x0=None):
    """Max-radius ball inside ``{A x <= b}`` intersected with a box around ``x0``.

    Solved as an LP in ``z = x - x0``; centering on a nearly feasible
    ``x0`` keeps the right-hand side at the scale of the cell, which
    matters once cells shrink toward the solver's absolute tolerances.
    """
    m, p = A.shape
    x0 = np.zeros(p) if x0 is None else x0
    b = b - A @ x0
    norms = np.linalg.norm(A, axis=1)
    A_ub = np.vstack([np.hstack([A, norms[:, None]]),
                      np.hstack([np.eye(p), np.ones((p, 1))]),
                      np.hstack([-np.eye(p), np.ones((p, 1))])])
    b_ub = np.concatenate([b, np.full(2 * p, box)])
    c = np.zeros(p + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * p + [(None, box)],
                  method="highs")
    if res.status != 0:
        return None, -np.inf
    return x0 + res.x[:p], float(res.x[-1])


def _external_result(x, model, objects, order, loss, trace, iterations, margin):
    n = len(objects)
    R = np.empty(n, dtype=np.int64)
    R[order] = np.arange(1, n + 1)
    triples = triples_from_ranks(RankMatrix(R), model)
    cfg = (SphericalConfiguration if model is Model.VECTOR else Configuration)(x[None, :])
    violations = violation_count(triples, cfg, objects)
    result = SolveResult(
        points=cfg, violations=violations, loss=loss, iterations_used=iterations,
        converged=violations == 0, n_comparisons=len(triples), loss_trace=tuple(trace),
        margin=margin,
    )
    if violations:
        raise InfeasibleError(
            f"{violations} of {len(triples)} comparisons violated; row may be unrealizable",
            result,
        )
    return result


def _external_search(draw, pocket, refine, restarts: int):
    """Pocket perceptron from a fresh start, then margin refinement.

    Stops at the first restart whose refinement finds a positive margin;
    otherwise returns the best pocket iterate with ``margin=None``.
    """
    best = None
    for _ in range(restarts):
        x, loss, trace, its = pocket(draw())
        center, margin = refine(x)
        if center is not None:
            return center, loss, trace, its, margin
        if best is None or loss < best[1]:
            best = (x, loss, trace, its, None)
    return best


def solve_external_point(anchors: Configuration, row, opts: SolverOptions = SolverOptions()) -> SolveResult:
    """Locate one individual from its distance ranking of fixed anchors.

    Consecutive pairs in the ranking give the bisector halfspaces
    ``|x - y_a| < |x - y_b|``; the rest follow by transitivity. The
    returned point is the Chebyshev center of the cell (clipped to a box
    a few anchor-radii wide, since cells on the hull are unbounded).
    """
    order = _rank_row(row, len(anchors))
    Y = anchors.points
    p = anchors.dim
    rows = [halfspace(Y[a], Y[b]) for a, b in zip(order[:-1], order[1:])]
    box = 4.0 * max(1.0, float(np.max(np.abs(Y))))
    if not rows:
        x = Y[0].copy() if len(Y) else np.zeros(p)
        return _external_result(x, Model.POINT, anchors, order, 0.0, [0.0], 0, None)
    A = np.array([r[0] for r in rows])
    b = np.array([r[1] for r in rows])

    def refine(x):
        margin = None
        for _ in range(2):
            center, radius = _chebyshev_center(A, b, box, x)
            if center is None or not radius > 0:
                break
            x, margin = center, radius
        return (None, None) if margin is None else (x, margin)

    rng = np.random.default_rng(opts.seed)
    x, loss, trace, its, margin = _external_search(
        lambda: Y.mean(axis=0) + rng.standard_normal(p) * anchors.rms_radius(),
        lambda x0: _pocket_relaxation(A, b, x0, opts), refine, opts.restarts,
    )
    return _external_result(x, Model.POINT, anchors, order, loss, trace, its, margin)


def _max_angular_margin(C: np.ndarray, x0: np.ndarray):
    """Unit ``x`` approximately maximizing ``min_r <x, c_r>``.

    The cone ``{C x > 0}`` is cut by the tangent plane at ``x0`` (gnomonic
    chart), where it becomes a polytope; its Chebyshev center is mapped
    back to the sphere. One recentering pass refines the chart.
    """
    p = C.shape[1]
    x = x0 / np.linalg.norm(x0)
    found = False
    for _ in range(2):
        B = np.linalg.svd(x[None, :])[2][1:]  # orthonormal complement of x
        z, radius = _chebyshev_center(-(C @ B.T), C @ x, 1.0)
        if z is None or not radius > 0:
            break
        x = x + B.T @ z
        x /= np.linalg.norm(x)
        found = True
    if not found or np.min(C @ x) <= 0:
        return None, None
    return x, float(np.min(C @ x))


def solve_external_vector(objects: Configuration, row, opts: SolverOptions = SolverOptions()) -> SolveResult:
    """Find a unit vector whose inner-product ranking of ``objects`` is ``row``.

    Rank 1 is the largest inner product. Each consecutive pair gives
    ``<x, y_a - y_b> > 0``, a homogeneous halfspace, so the feasible set is
    a cone; the answer is its max-angular-margin direction.
    """
    order = _rank_row(row, len(objects))
    Y = objects.points
    p = objects.dim
    if p < 2:
        raise ValueError("vector model needs dim >= 2")
    D = np.array([Y[a] - Y[b] for a, b in zip(order[:-1], order[1:])]).reshape(-1, p)
    if len(D) == 0:
        x = np.zeros(p)
        x[0] = 1.0
        return _external_result(x, Model.VECTOR, objects, order, 0.0, [0.0], 0, None)
    C = D / np.linalg.norm(D, axis=1, keepdims=True)

    def to_sphere(v):
        nv = np.linalg.norm(v)
        return v / nv if nv > 0 else v

    rng = np.random.default_rng(opts.seed)
    x, loss, trace, its, margin = _external_search(
        lambda: to_sphere(rng.standard_normal(p)),
        # A x < b with A = -C, b = 0
        lambda x0: _pocket_relaxation(-C, np.zeros(len(C)), x0, opts, to_sphere),
        lambda x: _max_angular_margin(C, x), opts.restarts,
    )
    return _external_result(to_sphere(x), Model.VECTOR, objects, order, loss, trace, its,
                            margin)


# ------------------------------------------------------- descent machinery


def _scatter(n: int, idx: np.ndarray, vals: np.ndarray) -> np.ndarray:
    out = np.empty((n, vals.shape[1]))
    for d in range(vals.shape[1]):
        out[:, d] = np.bincount(idx, weights=vals[:, d], minlength=n)
    return out


class _PairwiseHinge:
    """Mean hinge over comparisons of two pair scores on stacked points.

    Comparison ``c`` asks pair ``(u1, v1)`` to beat pair ``(u2, v2)``: a
    smaller squared distance (``kind="sqdist"``) or a larger inner product
    (``kind="inner"``). Both scores are quadratic in the stacked points
    ``Z``, so the gradient is ``M @ Z`` for a matrix ``M`` assembled from
    the active comparisons with a single ``bincount``.

    With ``temperature`` set, the hinge ``max(0, h)`` is replaced by its
    smooth upper bound ``t * log(1 + exp(h / t))``; every comparison then
    contributes, weighted by ``sigmoid(h / t)``.
    """

    def __init__(self, u1, v1, u2, v2, sizes, kind: str, margin: float,
                 temperature: float | None = None):
        self.temperature = temperature
        self.sizes = list(sizes)
        N = sum(self.sizes)
        self.N, self.kind, self.margin = N, kind, margin
        u1, v1, u2, v2 = (np.asarray(a, dtype=np.int64) for a in (u1, v1, u2, v2))
        self.count = max(len(u1), 1)
        self.f1, self.f2 = u1 * N + v1, u2 * N + v2
        if kind == "sqdist":
            # d|z_u - z_v|^2 / dZ = 2 (E_uu + E_vv - E_uv - E_vu) Z
            def terms(u, v, w):
                return ([u * N + u, v * N + v, u * N + v, v * N + u],
                        [2 * w, 2 * w, -2 * w, -2 * w])
            i1, w1 = terms(u1, v1, 1.0)
            i2, w2 = terms(u2, v2, -1.0)
        elif kind == "inner":
            # d<z_u, z_v> / dZ = (E_uv + E_vu) Z; hinge is on s2 - s1
            i1, w1 = [u1 * N + v1, v1 * N + u1], [-1.0, -1.0]
            i2, w2 = [u2 * N + v2, v2 * N + u2], [1.0, 1.0]
        else:
            raise ValueError(kind)
        self.idx = np.column_stack(i1 + i2)
        self.wts = np.broadcast_to(np.array(w1 + w2, dtype=float), self.idx.shape)

    def scores(self, Z: np.ndarray) -> np.ndarray:
        G = Z @ Z.T
        if self.kind == "inner":
            return G
        sq = np.diag(G)
        return sq[:, None] + sq[None, :] - 2.0 * G

    def __call__(self, state: list):
        Z = np.vstack(state)
        P = self.scores(Z).ravel()
        if self.kind == "sqdist":
            h = self.margin + P[self.f1] - P[self.f2]
        else:
            h = self.margin + P[self.f2] - P[self.f1]
        t = self.temperature
        if t:
            loss = t * float(np.sum(np.logaddexp(0.0, h / t))) / self.count
            idx, wts = self.idx, self.wts * expit(h / t)[:, None]
        else:
            act = h > 0
            loss = float(np.sum(h[act])) / self.count
            idx, wts = self.idx[act], self.wts[act]
        M = np.bincount(idx.ravel(), weights=wts.ravel(),
                        minlength=self.N * self.N).reshape(self.N, self.N)
        G = (M @ Z) / self.count
        return loss, np.split(G, np.cumsum(self.sizes)[:-1])


def _center_scale(Y: np.ndarray, *others: np.ndarray):
    """Shift and scale so ``Y`` has zero centroid and unit RMS radius."""
    c = Y.mean(axis=0)
    r = np.sqrt(np.mean(np.sum((Y - c) ** 2, axis=1)))
    if r == 0:
        r = 1.0
    return ((Y - c) / r,) + tuple((Z - c) / r for Z in others)


def _unit_rows(X: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(X, axis=1, keepdims=True)
    return X / np.where(n == 0, 1.0, n)


def _tangent_center_scale(grads: list, states: list, scaled: int = 0, carried: tuple = ()):
    """Gradient of ``L(normalize(Z))`` at a normalized point.

    Block ``scaled`` fixes the gauge (zero centroid, unit RMS radius) and
    the blocks in ``carried`` move with it, so the centroid and radial
    components of the combined gradient are removed from ``scaled``.
    """
    G = [g.copy() for g in grads]
    Y = states[scaled]
    n = len(Y)
    blocks = (scaled,) + tuple(carried)
    S = sum(grads[b].sum(axis=0) for b in blocks)
    kappa = sum(float(np.sum(grads[b] * states[b])) for b in blocks)
    G[scaled] = grads[scaled] - S / n - kappa * Y / n
    return G


def _tangent_sphere(g: np.ndarray, X: np.ndarray) -> np.ndarray:
    return g - np.sum(g * X, axis=1, keepdims=True) * X


Objective = Callable[[list], tuple[float, list]]


def _descend(state: list, objective: Objective, project: Callable[[list], list],
             tangent: Callable[[list, list], list], opts: SolverOptions):
    """Projected gradient descent with a cosine step schedule and backtracking.

    The scheduled step is multiplied by an adaptive factor that halves on
    rejection and doubles on acceptance (capped). A step is accepted only
    if it does not increase the loss, so the trace is monotone. Stops at zero loss, at a stationary point (no acceptable
    step after repeated halving), or after the loss stalls for a while.
    """
    loss, grads = objective(state)
    grads = tangent(grads, state)
    trace = [loss]
    boost = 1.0
    stall = 0
    converged = False
    T = opts.max_iterations
    it = 0
    for it in range(1, T + 1):
        if loss == 0.0:
            converged = True
            it -= 1
            break
        base = opts.learning_rate * 0.5 * (1.0 + math.cos(math.pi * (it - 1) / T))
        base = max(base, opts.learning_rate * 1e-3)
        accepted = False
        for _ in range(_MAX_HALVINGS):
            eta = base * boost
            cand = project([s - eta * g for s, g in zip(state, grads)])
            cand_loss, cand_grads = objective(cand)
            if cand_loss <= loss:
                accepted = True
                break
            boost *= 0.5
        if not accepted:
            converged = True
            break
        rel = (loss - cand_loss) / max(loss, 1e-300)
        state, loss, grads = cand, cand_loss, tangent(cand_grads, cand)
        trace.append(loss)
        boost = min(_MAX_STEP_BOOST, boost * 2.0)
        stall = stall + 1 if rel < opts.tolerance else 0
        if stall >= _PLATEAU_PATIENCE:
            converged = True
            break
    return state, loss, trace, it, converged


def _restart_rngs(opts: SolverOptions):
    for child in np.random.SeedSequence(opts.seed).spawn(opts.restarts):
        yield np.random.default_rng(child)


def _run_restarts(init, objective, project, tangent, count_violations, opts: SolverOptions,
                  warmup=None):
    """Run restarts, keeping the fewest violations (then lowest loss).

    Later restarts are skipped once one reaches zero violations. If a
    ``warmup`` objective is given, each restart first descends on it before
    switching to ``objective``; only the second phase is traced.
    """
    best = None
    used = 0
    for rng in _restart_rngs(opts):
        used += 1
        state = project(init(rng))
        if warmup is not None:
            warm = replace(opts, max_iterations=min(opts.max_iterations, WARMUP_ITERATIONS))
            state = _descend(state, warmup, project, tangent, warm)[0]
        state, loss, trace, its, converged = _descend(state, objective, project, tangent, opts)
        v = count_violations(state)
        log.debug("restart %d: loss=%.3g violations=%d iterations=%d", used, loss, v, its)
        if best is None or (v, loss) < (best[1], best[2]):
            best = (state, v, loss, trace, its, converged)
        if v == 0:
            break
    return best, used


def _check_triples(triples: TripleSet, model: Model, n: int):
    if triples.model is not model:
        raise ValueError(f"expected {model.value!r} triples, got {triples.model.value!r}")
    if len(triples) and (triples.triples.min() < 0 or triples.triples.max() >= n):
        raise IndexError("triple index out of range")


# --------------------------------------------------------------------- MDS


def _mds_objective(triples: np.ndarray, n: int, margin: float):
    i, j, k = triples.T
    return _PairwiseHinge(i, j, i, k, [n], "sqdist", margin)


def solve_ordinal_mds(triples: TripleSet, n: int, p: int, opts: SolverOptions = SolverOptions()) -> SolveResult:
    """Embed ``n`` items in R^p so every triple's distance order holds.

    Minimizes the mean of ``max(0, margin + |x_i - x_j|^2 - |x_i - x_k|^2)``
    with the configuration held at zero centroid and unit RMS radius.
    """
    _check_triples(triples, Model.SELF, n)
    if n < 2:
        raise ValueError("need at least two items")
    objective = _mds_objective(triples.triples, n, opts.margin)

    def project(state):
        return list(_center_scale(state[0]))

    def violations(state):
        return violation_count(triples, Configuration(state[0]))

    def tangent(grads, state):
        return _tangent_center_scale(grads, state)

    best, used = _run_restarts(lambda rng: [rng.standard_normal((n, p))], objective, project,
                               tangent, violations, opts)
    state, v, loss, trace, its, converged = best
    result = SolveResult(
        points=Configuration(state[0]), violations=v, loss=loss, iterations_used=its,
        converged=converged, n_comparisons=len(triples), loss_trace=tuple(trace),
        restarts_used=used,
    )
    if v:
        raise NonConvergedError(f"{v} of {len(triples)} triples violated after {used} restarts",
                                result)
    return result


# -------------------------------------------------------- internal unfolding


def _spread(X: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.sum((X - X.mean(axis=0)) ** 2, axis=1))))


def _internal_point_objective(triples: np.ndarray, m: int, n: int, opts: SolverOptions,
                              temperature: float | None = None):
    i, k, l = triples.T
    hinge = _PairwiseHinge(i, m + k, i, m + l, [m, n], "sqdist", opts.margin, temperature)
    lam, rho = opts.repulsion_weight, opts.repulsion_radius
    if lam == 0:
        return hinge

    def objective(state):
        loss, (GX, GY) = hinge(state)
        X, Y = state
        diff = X[:, None, :] - Y[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        near = np.argmin(dist, axis=1)
        rows = np.arange(m)
        dmin = dist[rows, near]
        short = np.maximum(0.0, rho - dmin)
        loss += lam * float(np.sum(short ** 2)) / m
        u = diff[rows, near] / np.where(dmin == 0, 1.0, dmin)[:, None]
        g = (-2.0 * lam / m) * short[:, None] * u
        return loss, [GX + g, GY - _scatter(n, near, g)]

    return objective


def _torgerson(D: np.ndarray, p: int) -> np.ndarray:
    """Classical scaling of a dissimilarity matrix into R^p."""
    N = len(D)
    J = np.eye(N) - 1.0 / N
    B = -0.5 * J @ (D ** 2) @ J
    w, V = np.linalg.eigh(B)
    top = np.argsort(w)[::-1][:p]
    return V[:, top] * np.sqrt(np.maximum(w[top], 1e-12))


def _spectral_init_point(R: RankMatrix, p: int):
    """Starting configuration for distance unfolding from the ranks alone.

    Normalized ranks stand in for individual-object distances; two objects
    (or two individuals) are as far apart as their rank profiles differ.
    """
    r = R.ranks / R.cols
    m = R.rows
    d_yy = np.sqrt(np.mean((r[:, :, None] - r[:, None, :]) ** 2, axis=0))
    d_xx = np.sqrt(np.mean((r[:, None, :] - r[None, :, :]) ** 2, axis=2))
    Z = _torgerson(np.block([[d_xx, r], [r.T, d_yy]]), p)
    return Z[:m], Z[m:]


def _spectral_init_vector(R: RankMatrix, p: int):
    """Rank-``p`` SVD of the row-centered, sign-flipped rank matrix."""
    scores = -(R.ranks - R.ranks.mean(axis=1, keepdims=True)).astype(float)
    U, sv, Vt = np.linalg.svd(scores, full_matrices=False)
    X, Y = np.zeros((R.rows, p)), np.zeros((R.cols, p))
    q = min(p, len(sv))
    X[:, :q], Y[:, :q] = U[:, :q], Vt[:q].T * sv[:q]
    return X, Y


def _jittered(start: list, jitter: float):
    """Restart 0 begins at ``start``; later restarts add Gaussian jitter."""
    first = [True]

    def init(rng):
        if first[0]:
            first[0] = False
            return [a.copy() for a in start]
        return [a + jitter * rng.standard_normal(a.shape) for a in start]

    return init


def _degenerate(X: np.ndarray, Y: np.ndarray) -> bool:
    return _spread(X) < DEGENERACY_RATIO * _spread(Y)


def _finish_internal(result: SolveResult, X: np.ndarray, Y: np.ndarray):
    if _degenerate(X, Y):
        raise DegenerateSolutionError("individuals collapsed to a single location", result)
    if result.violations:
        raise NonConvergedError(
            f"{result.violations} of {result.n_comparisons} comparisons violated", result
        )
    return result


def solve_internal_point(R: RankMatrix, p: int, opts: SolverOptions = SolverOptions()) -> SolveResult:
    """Jointly place individuals and objects from distance rankings.

    Objects are held at zero centroid and unit RMS radius; the same
    similarity is applied to the individuals so the data are unaffected.
    Each restart starts from a classical-scaling embedding of rank-profile
    dissimilarities (jittered after the first) and descends first on a
    softplus-smoothed loss, whose every comparison pulls on the layout,
    before the plain hinge. The hinge alone stalls in partially collapsed
    layouts from most starts. An optional repulsion term ``weight * mean_i
    max(0, radius - min_k |x_i - y_k|)^2`` is off by default.
    """
    m, n = R.rows, R.cols
    if m < 2 or n < 2:
        raise ValueError("need at least two individuals and two objects")
    triples = triples_from_ranks(R, Model.POINT)
    objective = _internal_point_objective(triples.triples, m, n, opts)

    def project(state):
        Y, X = _center_scale(state[1], state[0])
        return [X, Y]

    def violations(state):
        return violation_count(triples, Configuration(state[0]), Configuration(state[1]))

    def tangent(grads, state):
        return _tangent_center_scale(grads, state, scaled=1, carried=(0,))

    warmup = _internal_point_objective(triples.triples, m, n, opts, WARMUP_TEMPERATURE)
    init = _jittered(project(list(_spectral_init_point(R, p))), INIT_JITTER)
    best, used = _run_restarts(init, objective, project, tangent, violations, opts, warmup)
    (X, Y), v, loss, trace, its, converged = best
    result = SolveResult(
        points=Configuration(X), objects=Configuration(Y), violations=v, loss=loss,
        iterations_used=its, converged=converged, n_comparisons=len(triples),
        loss_trace=tuple(trace), restarts_used=used,
    )
    return _finish_internal(result, X, Y)


def _internal_vector_objective(triples: np.ndarray, m: int, n: int, margin: float):
    i, k, l = triples.T
    return _PairwiseHinge(i, m + k, i, m + l, [m, n], "inner", margin)


def solve_internal_vector(R: RankMatrix, p: int, opts: SolverOptions = SolverOptions()) -> SolveResult:
    """Jointly fit unit-vector individuals and point objects from
    inner-product rankings (rank 1 = largest inner product).

    Individuals are renormalized to the sphere and objects held at zero
    centroid and unit RMS radius after every step. The first restart starts
    from a rank-``p`` SVD of the rank matrix, later ones jitter it.
    """
    m, n = R.rows, R.cols
    if p < 2:
        raise ValueError("vector unfolding needs dim >= 2")
    if m < 2 or n < 2:
        raise ValueError("need at least two individuals and two objects")
    triples = triples_from_ranks(R, Model.VECTOR)
    objective = _internal_vector_objective(triples.triples, m, n, opts.margin)

    def project(state):
        return [_unit_rows(state[0]), _center_scale(state[1])[0]]

    def violations(state):
        return violation_count(triples, Configuration(state[0]), Configuration(state[1]))

    def tangent(grads, state):
        GY = _tangent_center_scale([grads[1]], [state[1]])[0]
        return [_tangent_sphere(grads[0], state[0]), GY]

    init = _jittered(project(list(_spectral_init_vector(R, p))), INIT_JITTER)
    best, used = _run_restarts(init, objective, project, tangent, violations, opts)
    (X, Y), v, loss, trace, its, converged = best
    result = SolveResult(
        points=SphericalConfiguration(X), objects=Configuration(Y), violations=v,
        loss=loss, iterations_used=its, converged=converged, n_comparisons=len(triples),
        loss_trace=tuple(trace), restarts_used=used,
    )
    return _finish_internal(result, X, Y)


# --------------------------------------------------------------- sphere MDS


def _sphere_objective(triples: np.ndarray, n: int, margin: float):
    i, j, k = triples.T
    return _PairwiseHinge(i, j, i, k, [n], "inner", margin)


def solve_sphere_mds(triples: TripleSet, n: int, p: int, opts: SolverOptions = SolverOptions()) -> SolveResult:
    """Ordinal MDS on the unit sphere: ``j`` precedes ``k`` for viewer ``i``
    iff ``<x_i, x_j> > <x_i, x_k>``, the chord-distance order.

    Only renormalization to the sphere is applied; the remaining freedom is
    an orthogonal map.
    """
    _check_triples(triples, Model.SELF, n)
    if p < 2:
        raise ValueError("sphere MDS needs dim >= 2")
    if n < 2:
        raise ValueError("need at least two items")
    objective = _sphere_objective(triples.triples, n, opts.margin)

    def project(state):
        return [_unit_rows(state[0])]

    def violations(state):
        return violation_count(triples, Configuration(state[0]))

    def tangent(grads, state):
        return [_tangent_sphere(grads[0], state[0])]

    best, used = _run_restarts(lambda rng: [rng.standard_normal((n, p))], objective, project,
                               tangent, violations, opts)
    (X,), v, loss, trace, its, converged = best
    result = SolveResult(
        points=SphericalConfiguration(X), violations=v, loss=loss,
        iterations_used=its, converged=converged, n_comparisons=len(triples),
        loss_trace=tuple(trace), restarts_used=used,
    )
    if v:
        raise NonConvergedError(f"{v} of {len(triples)} triples violated after {used} restarts",
                                result)
    return result


VARIANTS = ("external-point", "external-vector", "mds", "internal-point", "internal-vector",
            "sphere-mds")
