import itertools

import numpy as np
import pytest

import hypothesis.strategies as st
from hypothesis import given, settings

from ordinal_embed.geometry import Configuration, SphericalConfiguration
from ordinal_embed.rankings import (
    Model,
    RankMatrix,
    RankValidationError,
    TieError,
    TripleSet,
    mds_row_ranks,
    rank_data_equal,
    row_ranks,
    row_ranks_point,
    row_ranks_vector,
    triples_from_ranks,
    violation_count,
    violation_mask,
)

seeds = st.integers(0, 2**32 - 1)


def _brute_ranks(scores):
    # rank of k = 1 + number of strictly better objects
    scores = np.asarray(scores)
    m, n = scores.shape
    out = np.zeros((m, n), dtype=int)
    for i in range(m):
        for k in range(n):
            out[i, k] = 1 + sum(scores[i, l] < scores[i, k] for l in range(n))
    return out


@settings(max_examples=40)
@given(seeds)
def test_point_ranks_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    X = Configuration(rng.normal(size=(4, 2)))
    Y = Configuration(rng.normal(size=(7, 2)))
    d = [[np.linalg.norm(x - y) for y in Y.points] for x in X.points]
    assert np.array_equal(row_ranks_point(X, Y).ranks, _brute_ranks(d))


@settings(max_examples=40)
@given(seeds)
def test_vector_ranks_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    X = SphericalConfiguration.normalized(rng.normal(size=(4, 3)))
    Y = Configuration(rng.normal(size=(6, 3)))
    ip = [[-float(x @ y) for y in Y.points] for x in X.points]
    assert np.array_equal(row_ranks_vector(X, Y).ranks, _brute_ranks(ip))


def test_vector_rank_one_is_largest_inner_product():
    X = Configuration([[1.0, 0.0]])
    Y = Configuration([[0.5, 0.0], [2.0, 0.0], [-1.0, 0.0]])
    assert row_ranks_vector(X, Y).ranks.tolist() == [[2, 1, 3]]


def test_mds_diagonal_is_rank_one():
    rng = np.random.default_rng(1)
    R = mds_row_ranks(Configuration(rng.normal(size=(8, 2))))
    assert np.all(np.diag(R.ranks) == 1)


def test_ties_raise():
    X = Configuration([[0.0, 0.0]])
    Y = Configuration([[1.0, 0.0], [-1.0, 0.0], [0.0, 3.0]])
    with pytest.raises(TieError) as e:
        row_ranks_point(X, Y)
    assert e.value.row == 0 and {e.value.k, e.value.l} == {0, 1}


def test_rank_matrix_validation_names_row():
    with pytest.raises(RankValidationError, match="row 1") as e:
        RankMatrix([[1, 2, 3], [1, 1, 3]])
    assert e.value.row == 1
    with pytest.raises(RankValidationError):
        RankMatrix([[1.5, 2, 3]])


def test_rank_matrix_order():
    R = RankMatrix([[3, 1, 2]])
    assert R.order(0).tolist() == [1, 2, 0]


def test_tripleset_invariants():
    with pytest.raises(ValueError, match="j == k"):
        TripleSet(Model.POINT, [[0, 1, 1]])
    with pytest.raises(ValueError, match="duplicate"):
        TripleSet(Model.POINT, [[0, 1, 2], [0, 1, 2]])
    with pytest.raises(ValueError, match="contradictory"):
        TripleSet(Model.POINT, [[0, 1, 2], [0, 2, 1]])


def test_triples_from_ranks_exhaustive():
    R = RankMatrix([[2, 3, 1], [1, 2, 3]])
    T = triples_from_ranks(R)
    expected = set()
    for i in range(2):
        for j, k in itertools.permutations(range(3), 2):
            if R.ranks[i, j] < R.ranks[i, k]:
                expected.add((i, j, k))
    assert T.as_set() == expected
    assert len(T) == 2 * 3


def test_self_triples_skip_viewer():
    R = mds_row_ranks(Configuration(np.random.default_rng(2).normal(size=(6, 2))))
    T = triples_from_ranks(R, Model.SELF)
    t = T.triples
    assert not np.any((t[:, 1] == t[:, 0]) | (t[:, 2] == t[:, 0]))
    assert len(T) == 6 * 5 * 4 // 2


def test_triple_sampling_is_seeded_subset():
    R = RankMatrix(np.argsort(np.random.default_rng(0).random((5, 8)), axis=1) + 1)
    full = triples_from_ranks(R).as_set()
    a = triples_from_ranks(R, sample_count=30, seed=4)
    b = triples_from_ranks(R, sample_count=30, seed=4)
    assert len(a) == 30 and a.as_set() <= full
    assert np.array_equal(a.triples, b.triples)
    with pytest.raises(ValueError):
        triples_from_ranks(R, sample_count=10_000)


@settings(max_examples=30)
@given(seeds)
def test_truth_has_no_violations(seed):
    rng = np.random.default_rng(seed)
    X = Configuration(rng.normal(size=(5, 2)))
    Y = Configuration(rng.normal(size=(6, 2)))
    for model in (Model.POINT, Model.VECTOR):
        T = triples_from_ranks(row_ranks(model, X, Y), model)
        assert violation_count(T, X, Y) == 0
    T = triples_from_ranks(mds_row_ranks(Y), Model.SELF)
    assert violation_count(T, Y) == 0


def test_violation_counts_ties():
    T = TripleSet(Model.POINT, [[0, 0, 1]])
    X = Configuration([[0.0, 0.0]])
    Y = Configuration([[1.0, 0.0], [-1.0, 0.0]])
    assert violation_mask(T, X, Y).tolist() == [True]


def test_reversing_a_row_violates_everything():
    rng = np.random.default_rng(8)
    X = Configuration(rng.normal(size=(1, 2)))
    Y = Configuration(rng.normal(size=(5, 2)))
    R = row_ranks_point(X, Y)
    flipped = RankMatrix(R.cols + 1 - R.ranks)
    T = triples_from_ranks(flipped)
    assert violation_count(T, X, Y) == len(T)


def test_sphere_distance_and_inner_product_ranks_agree():
    rng = np.random.default_rng(9)
    S = SphericalConfiguration.normalized(rng.normal(size=(25, 3)))
    assert row_ranks(Model.SELF, S) == row_ranks(Model.VECTOR, S, S)


def test_rank_data_equal_detects_change():
    rng = np.random.default_rng(3)
    X = Configuration(rng.normal(size=(4, 2)))
    Y = Configuration(rng.normal(size=(5, 2)))
    assert rank_data_equal(X, Y, X, Y, Model.POINT)
    far = Configuration(Y.points * [40.0, 1.0])
    assert not rank_data_equal(X, Y, X, far, Model.POINT)
