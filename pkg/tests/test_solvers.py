import itertools

import numpy as np
import pytest

import hypothesis.strategies as st
from hypothesis import given, settings

from ordinal_embed import solvers as S
from ordinal_embed.geometry import (
    Configuration,
    SphericalConfiguration,
    random_gauge_pair,
    similarity_procrustes,
)
from ordinal_embed.rankings import (
    Model,
    RankMatrix,
    TripleSet,
    mds_row_ranks,
    row_ranks,
    row_ranks_point,
    row_ranks_vector,
    triples_from_ranks,
    violation_count,
)
from ordinal_embed.solvers import (
    DegenerateSolutionError,
    InfeasibleError,
    NonConvergedError,
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

seeds = st.integers(0, 2**32 - 1)


def test_options_validation_and_round_trip():
    with pytest.raises(ValueError):
        SolverOptions(restarts=0)
    with pytest.raises(ValueError):
        SolverOptions(margin=0.0)
    with pytest.raises(ValueError, match="unknown"):
        SolverOptions.from_dict({"bogus": 1})
    o = SolverOptions(seed=4, margin=0.02)
    assert SolverOptions.from_dict(o.to_dict()) == o


# ------------------------------------------------------------- external


def test_external_point_interval_oracle():
    # halfspaces by hand: x > -0.5 (0 beats -1), x < 0.5 (-1 beats 2)
    anchors = Configuration([[-1.0], [0.0], [2.0]])
    res = solve_external_point(anchors, [2, 1, 3])
    x = res.points.points[0, 0]
    assert -0.5 < x < 0.5
    assert res.violations == 0


def test_external_point_single_anchor():
    res = solve_external_point(Configuration([[0.3, 0.1]]), [1])
    assert res.violations == 0 and res.n_comparisons == 0


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_external_point_recovers_cell(seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(50, 2))
    Y = Configuration(g / np.linalg.norm(g, axis=1, keepdims=True) * np.sqrt(rng.uniform(size=(50, 1))))
    x_star = Configuration(rng.uniform(-0.5, 0.5, size=(1, 2)))
    row = row_ranks_point(x_star, Y).ranks[0]
    res = solve_external_point(Y, row, SolverOptions(seed=seed % 1000))
    assert res.violations == 0
    T = triples_from_ranks(RankMatrix(row))
    assert violation_count(T, res.points, Y) == 0
    assert res.margin > 0


def test_external_point_unrealizable_row_is_infeasible():
    # collinear anchors: the middle one can never be ranked last by
    # a point on the line, nor by any point in the plane
    anchors = Configuration([[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(InfeasibleError) as e:
        solve_external_point(anchors, [1, 3, 2], SolverOptions(restarts=2, max_iterations=200))
    assert e.value.result.status == "infeasible"
    assert e.value.result.violations > 0


def test_external_vector_halfspace_examples():
    e1 = Configuration([[1.0, 0.0], [2.0, 0.0]])
    res = solve_external_vector(e1, [2, 1])
    x = res.points.points[0]
    assert x[0] > 0 and np.isclose(np.linalg.norm(x), 1.0, atol=1e-12)
    res = solve_external_vector(Configuration([[1.0, 0.0], [-1.0, 0.0]]), [1, 2])
    assert res.points.points[0, 0] > 0 and res.violations == 0


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_external_vector_recovers(seed):
    rng = np.random.default_rng(seed)
    Y = Configuration(rng.uniform(-1, 1, size=(100, 2)))
    x_star = SphericalConfiguration.normalized(rng.normal(size=(1, 2)))
    row = row_ranks_vector(x_star, Y).ranks[0]
    res = solve_external_vector(Y, row)
    assert res.violations == 0
    cos = float(res.points.points[0] @ x_star.points[0])
    assert cos > np.cos(0.1)


def test_external_is_deterministic():
    rng = np.random.default_rng(1)
    Y = Configuration(rng.normal(size=(30, 2)))
    row = row_ranks_point(Configuration([[0.1, 0.2]]), Y).ranks[0]
    a = solve_external_point(Y, row, SolverOptions(seed=5))
    b = solve_external_point(Y, row, SolverOptions(seed=5))
    assert a.points == b.points


# ---------------------------------------------------------- hinge objective


@pytest.mark.parametrize("kind", ["sqdist", "inner"])
@pytest.mark.parametrize("temperature", [None, 0.1])
def test_pairwise_hinge_gradient(kind, temperature):
    rng = np.random.default_rng(0)
    m, n = 4, 5
    i = rng.integers(0, m, 30)
    k = m + rng.integers(0, n, 30)
    l = m + rng.integers(0, n, 30)
    keep = k != l
    obj = S._PairwiseHinge(i[keep], k[keep], i[keep], l[keep], [m, n], kind, 0.5, temperature)
    state = [rng.normal(size=(m, 2)), rng.normal(size=(n, 2))]
    _, grads = obj(state)
    h = 1e-6
    for b in range(2):
        for idx in itertools.product(range(state[b].shape[0]), range(2)):
            plus = [s.copy() for s in state]
            minus = [s.copy() for s in state]
            plus[b][idx] += h
            minus[b][idx] -= h
            fd = (obj(plus)[0] - obj(minus)[0]) / (2 * h)
            assert abs(fd - grads[b][idx]) < 1e-5


def test_softplus_bounds_hinge():
    rng = np.random.default_rng(2)
    i = np.zeros(10, dtype=int)
    k, l = 1 + np.arange(10) % 5, 1 + (np.arange(10) + 1) % 5
    hard = S._PairwiseHinge(i, k, i, l, [6], "sqdist", 0.1)
    soft = S._PairwiseHinge(i, k, i, l, [6], "sqdist", 0.1, temperature=0.05)
    Z = [rng.normal(size=(6, 2))]
    assert soft(Z)[0] >= hard(Z)[0]


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_descent_trace_is_monotone(seed):
    rng = np.random.default_rng(seed)
    Y = Configuration(rng.uniform(size=(10, 2)))
    T = triples_from_ranks(mds_row_ranks(Y), Model.SELF)
    res = solve_ordinal_mds_or_result(T, 10, 2, SolverOptions(seed=seed % 100, restarts=1,
                                                              max_iterations=300))
    trace = np.array(res.loss_trace)
    assert np.all(np.diff(trace) <= 0)


def solve_ordinal_mds_or_result(T, n, p, opts):
    try:
        return solve_ordinal_mds(T, n, p, opts)
    except SolverError as e:
        return e.result


# ------------------------------------------------------------------- MDS


def test_mds_collinear_three_points():
    R = mds_row_ranks(Configuration([[0.0], [1.0], [3.0]]))
    T = triples_from_ranks(R, Model.SELF)
    res = solve_ordinal_mds(T, 3, 1)
    assert res.violations == 0
    x = res.points.points[:, 0]
    # exhaustive oracle: every triple's distance order holds on the output
    for i, j, k in T.triples:
        assert abs(x[i] - x[j]) < abs(x[i] - x[k])


def test_mds_two_points():
    res = solve_ordinal_mds(TripleSet(Model.SELF, np.empty((0, 3))), 2, 2)
    assert res.violations == 0
    assert not np.array_equal(res.points.points[0], res.points.points[1])


def test_mds_recovers_unit_square_config():
    rng = np.random.default_rng(2024)
    Y = Configuration(rng.uniform(size=(20, 2)))
    T = triples_from_ranks(mds_row_ranks(Y), Model.SELF)
    res = solve_ordinal_mds_or_result(T, 20, 2, SolverOptions(seed=1))
    assert res.violations <= 0.01 * len(T)
    assert similarity_procrustes(res.points, Y).residual < 0.1


def test_mds_rejects_wrong_model():
    with pytest.raises(ValueError):
        solve_ordinal_mds(TripleSet(Model.POINT, [[0, 1, 2]]), 3, 2)
    with pytest.raises(IndexError):
        solve_ordinal_mds(TripleSet(Model.SELF, [[0, 1, 7]]), 3, 2)


def test_mds_is_gauge_fixed():
    rng = np.random.default_rng(4)
    Y = Configuration(rng.uniform(size=(12, 2)))
    T = triples_from_ranks(mds_row_ranks(Y), Model.SELF)
    X = solve_ordinal_mds_or_result(T, 12, 2, SolverOptions()).points
    assert np.allclose(X.points.mean(axis=0), 0, atol=1e-12)
    assert np.isclose(X.rms_radius(), 1.0)


# --------------------------------------------------------------- internal


def test_internal_point_symmetric_instance():
    res = solve_internal_point(RankMatrix([[1, 2], [2, 1]]), 2)
    assert res.violations == 0


def _all_perm_rows(n=3):
    return RankMatrix([np.argsort(p) + 1 for p in itertools.permutations(range(n))])


def _single_peaked_order_exists(R: RankMatrix) -> bool:
    # in 1-d every ranking is single-peaked along the object order;
    # try every order exhaustively
    for order in itertools.permutations(range(R.cols)):
        pos = np.empty(R.cols, dtype=int)
        pos[list(order)] = np.arange(R.cols)
        ok = True
        for row in R.ranks:
            vals = row[list(order)]
            peak = int(np.argmin(vals))
            if not (np.all(np.diff(vals[: peak + 1]) < 0) and np.all(np.diff(vals[peak:]) > 0)):
                ok = False
                break
        if ok:
            return True
    return False


def test_triangle_instance_needs_two_dimensions():
    # all six rankings of three objects: realized around a triangle in
    # the plane, impossible on a line
    R = _all_perm_rows()
    assert not _single_peaked_order_exists(R)
    Y = Configuration([[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]])
    ang = np.deg2rad(np.arange(6) * 60 + 30)
    X = Configuration(0.4 * np.column_stack([np.cos(ang), np.sin(ang)]) + [0.01, 0.02])
    truth = row_ranks_point(X, Y)
    assert sorted(map(tuple, truth.ranks.tolist())) == sorted(map(tuple, R.ranks.tolist()))
    with pytest.raises(NonConvergedError) as e:
        solve_internal_point(truth, 1, SolverOptions(restarts=2, max_iterations=500))
    assert e.value.result.violations > 0
    res = solve_internal_point(truth, 2)
    assert res.violations == 0


def test_internal_point_ground_truth():
    rng = np.random.default_rng(31)
    pts = rng.normal(size=(30, 2))
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True) * np.sqrt(rng.uniform(size=(30, 1)))
    R = row_ranks_point(Configuration(pts[:15]), Configuration(pts[15:]))
    res = solve_internal_point(R, 2)
    assert res.violations <= 0.01 * res.n_comparisons
    T = triples_from_ranks(R)
    assert violation_count(T, res.points, res.objects) == res.violations


def test_internal_point_needs_two_by_two():
    with pytest.raises(ValueError):
        solve_internal_point(RankMatrix([[1, 2]]), 2)


def test_internal_vector_antipodal_instance():
    res = solve_internal_vector(RankMatrix([[1, 2], [2, 1]]), 2)
    assert res.violations == 0
    assert np.allclose(np.linalg.norm(res.points.points, axis=1), 1.0)


def test_internal_vector_absorbs_gauge():
    rng = np.random.default_rng(12)
    X = SphericalConfiguration.normalized(rng.normal(size=(10, 2)))
    Y = Configuration(rng.uniform(-1, 1, size=(20, 2)))
    G = random_gauge_pair(2, rng)
    R = row_ranks_vector(G.apply_individuals(X), G.apply_objects(Y))
    assert R == row_ranks_vector(X, Y)
    res = solve_internal_vector(R, 2)
    assert res.violations == 0


def test_degeneracy_detection():
    X = np.zeros((4, 2)) + 0.3
    Y = np.random.default_rng(0).normal(size=(5, 2))
    assert S._degenerate(X, Y)
    dummy = SolveResult(Configuration(X), 0, 0.0, 1, True, 10, objects=Configuration(Y))
    with pytest.raises(DegenerateSolutionError) as e:
        S._finish_internal(dummy, X, Y)
    assert e.value.result.status == "degenerate"


def test_repulsion_term_runs():
    rng = np.random.default_rng(3)
    R = row_ranks_point(Configuration(rng.normal(size=(6, 2))), Configuration(rng.normal(size=(6, 2))))
    opts = SolverOptions(repulsion_weight=0.1, repulsion_radius=0.2, restarts=1, max_iterations=300)
    try:
        res = solve_internal_point(R, 2, opts)
    except SolverError as e:
        res = e.result
    assert res.violations <= 0.05 * res.n_comparisons


# ----------------------------------------------------------------- sphere


def test_sphere_mds_three_equally_spaced():
    # every viewer is equidistant from the other two: no comparisons
    T = TripleSet(Model.SELF, np.empty((0, 3)))
    res = solve_sphere_mds(T, 3, 2)
    assert res.violations == 0
    again = solve_sphere_mds(T, 3, 2)
    assert again.points == res.points


def test_sphere_mds_recovers():
    rng = np.random.default_rng(6)
    Sp = SphericalConfiguration.normalized(rng.normal(size=(15, 3)))
    T = triples_from_ranks(mds_row_ranks(Sp), Model.SELF)
    try:
        res = solve_sphere_mds(T, 15, 3)
    except SolverError as e:
        res = e.result
    assert res.violations <= 0.01 * len(T)
    P = res.points.points
    assert np.allclose(np.linalg.norm(P, axis=1), 1.0)
    # chord identity: distance and inner-product rankings of the output agree
    out = SphericalConfiguration(P)
    assert row_ranks(Model.SELF, out) == row_ranks(Model.VECTOR, out, out)


def test_solver_errors_carry_result():
    res = SolveResult(Configuration([[0.0]]), 3, 1.0, 1, False, 5)
    err = NonConvergedError("x", res)
    assert err.result.status == "nonconverged" and res.status == "ok"
