"""Rank matrices and triadic comparisons generated from configurations.

Three preference conventions are supported:

* ``POINT``: viewer ``i`` prefers the object at smaller Euclidean distance.
* ``VECTOR``: viewer ``i`` (a unit vector) prefers the object with the
  larger inner product.
* ``SELF``: ordinal MDS, where every item is a viewer of all items.

Indices are 0-based throughout; rank values are 1-based, rank 1 being the
most preferred. A triple ``(i, j, k)`` always means "from viewpoint ``i``,
``j`` strictly precedes ``k``" regardless of convention.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .geometry import Configuration, DimensionMismatchError


class Model(str, enum.Enum):
    POINT = "point"
    VECTOR = "vector"
    SELF = "self"


class TieError(ValueError):
    """Two objects are equally preferred by one viewer."""

    def __init__(self, row: int, k: int, l: int):
        super().__init__(f"tie in row {row} between objects {k} and {l}")
        self.row, self.k, self.l = row, k, l


class RankValidationError(ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True, eq=False)
class RankMatrix:
    """``ranks[i, k]`` is the position of object ``k`` in viewer ``i``'s order."""

    ranks: np.ndarray

    def __post_init__(self):
        r = np.array(self.ranks)
        if r.ndim == 1:
            r = r[None, :]
        if r.ndim != 2 or r.size == 0:
            raise ValueError("ranks must be a non-empty 2-d array")
        if not np.issubdtype(r.dtype, np.integer):
            if not np.all(r == np.round(r)):
                raise RankValidationError(0, "ranks must be integers")
            r = r.astype(np.int64)
        r = r.astype(np.int64)
        expected = np.arange(1, r.shape[1] + 1)
        for i, row in enumerate(r):
            if not np.array_equal(np.sort(row), expected):
                raise RankValidationError(
                    i, f"{row.tolist()} is not a permutation of 1..{r.shape[1]}"
                )
        r.setflags(write=False)
        object.__setattr__(self, "ranks", r)

    @property
    def rows(self) -> int:
        return self.ranks.shape[0]

    @property
    def cols(self) -> int:
        return self.ranks.shape[1]

    def order(self, i: int) -> np.ndarray:
        """Object indices of row ``i`` from most to least preferred."""
        return np.argsort(self.ranks[i], kind="stable")

    def __eq__(self, other):
        if not isinstance(other, RankMatrix):
            return NotImplemented
        return np.array_equal(self.ranks, other.ranks)

    def __hash__(self):
        return hash(self.ranks.tobytes())


@dataclass(frozen=True, eq=False)
class TripleSet:
    model: Model
    triples: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.triples, dtype=np.int64).reshape(-1, 3)
        if np.any(t[:, 1] == t[:, 2]):
            raise ValueError("triple with j == k")
        keys = {tuple(r) for r in t.tolist()}
        if len(keys) != len(t):
            raise ValueError("duplicate triples")
        if any((i, k, j) in keys for i, j, k in keys):
            raise ValueError("contradictory triples (i, j, k) and (i, k, j)")
        t.setflags(write=False)
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "triples", t)

    def __len__(self):
        return len(self.triples)

    def as_set(self) -> set[tuple[int, int, int]]:
        return {tuple(r) for r in self.triples.tolist()}


def preference_scores(model: Model, viewers: Configuration, objects: Configuration) -> np.ndarray:
    """``(m, n)`` scores where a smaller value means more preferred.

    Point models use squared distances computed from coordinate differences
    (no Gram expansion, so exact duplicates give exact zeros); the vector
    model uses negated inner products.
    """
    if viewers.dim != objects.dim:
        raise DimensionMismatchError(f"viewer dim {viewers.dim} != object dim {objects.dim}")
    X, Y = viewers.points, objects.points
    if Model(model) is Model.VECTOR:
        # elementwise, not BLAS, so violation checks reproduce these exactly
        return -np.sum(X[:, None, :] * Y[None, :, :], axis=2)
    return np.sum((X[:, None, :] - Y[None, :, :]) ** 2, axis=2)


def ranks_from_scores(scores: np.ndarray) -> RankMatrix:
    """Rank each row ascending, raising :class:`TieError` on equal scores."""
    scores = np.asarray(scores, dtype=float)
    order = np.argsort(scores, axis=1, kind="stable")
    sorted_scores = np.take_along_axis(scores, order, axis=1)
    ties = np.argwhere(sorted_scores[:, 1:] == sorted_scores[:, :-1])
    if ties.size:
        i, c = ties[0]
        raise TieError(int(i), int(order[i, c]), int(order[i, c + 1]))
    ranks = np.empty_like(order)
    rows = np.arange(scores.shape[0])[:, None]
    ranks[rows, order] = np.arange(1, scores.shape[1] + 1)
    return RankMatrix(ranks)


def row_ranks_point(viewers: Configuration, objects: Configuration) -> RankMatrix:
    return ranks_from_scores(preference_scores(Model.POINT, viewers, objects))


def row_ranks_vector(viewers: Configuration, objects: Configuration) -> RankMatrix:
    """Rank 1 goes to the object with the largest inner product."""
    return ranks_from_scores(preference_scores(Model.VECTOR, viewers, objects))


def mds_row_ranks(items: Configuration) -> RankMatrix:
    """Every item ranks all items by distance; the diagonal is always rank 1."""
    return ranks_from_scores(preference_scores(Model.SELF, items, items))


def row_ranks(model: Model, viewers: Configuration, objects: Configuration | None = None) -> RankMatrix:
    model = Model(model)
    if model is Model.SELF:
        return mds_row_ranks(viewers)
    if objects is None:
        raise ValueError(f"model {model.value!r} needs objects")
    if model is Model.VECTOR:
        return row_ranks_vector(viewers, objects)
    return row_ranks_point(viewers, objects)


def _all_triples(R: RankMatrix, model: Model) -> np.ndarray:
    n = R.cols
    a, b = np.triu_indices(n, k=1)
    blocks = []
    for i in range(R.rows):
        order = R.order(i)
        j, k = order[a], order[b]
        if model is Model.SELF:
            keep = (j != i) & (k != i)
            j, k = j[keep], k[keep]
        blocks.append(np.column_stack([np.full(len(j), i), j, k]))
    t = np.concatenate(blocks) if blocks else np.empty((0, 3), dtype=np.int64)
    # canonical lexicographic order
    return t[np.lexsort((t[:, 2], t[:, 1], t[:, 0]))]


def triples_from_ranks(
    R: RankMatrix,
    model: Model = Model.POINT,
    sample_count: int | None = None,
    seed: int = 0,
) -> TripleSet:
    """All ordered comparisons implied by ``R``, or a seeded uniform sample.

    Under ``Model.SELF`` comparisons involving the viewer itself are
    dropped, since they carry no information.
    """
    model = Model(model)
    full = _all_triples(R, model)
    if sample_count is None:
        return TripleSet(model, full)
    if sample_count < 0 or sample_count > len(full):
        raise ValueError(f"sample_count {sample_count} outside [0, {len(full)}]")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(full), size=sample_count, replace=False))
    return TripleSet(model, full[idx])


def violation_mask(
    T: TripleSet, viewers: Configuration, objects: Configuration | None = None
) -> np.ndarray:
    """Boolean mask of triples whose strict precedence fails (ties fail)."""
    if T.model is Model.SELF:
        objects = viewers
    elif objects is None:
        raise ValueError(f"model {T.model.value!r} needs objects")
    if viewers.dim != objects.dim:
        raise DimensionMismatchError(f"viewer dim {viewers.dim} != object dim {objects.dim}")
    if len(T) == 0:
        return np.zeros(0, dtype=bool)
    i, j, k = T.triples.T
    if i.min() < 0 or i.max() >= len(viewers):
        raise IndexError("viewer index out of range")
    if min(j.min(), k.min()) < 0 or max(j.max(), k.max()) >= len(objects):
        raise IndexError("object index out of range")
    X, Y = viewers.points, objects.points
    if T.model is Model.VECTOR:
        sj = -np.sum(X[i] * Y[j], axis=1)
        sk = -np.sum(X[i] * Y[k], axis=1)
    else:
        sj = np.sum((X[i] - Y[j]) ** 2, axis=1)
        sk = np.sum((X[i] - Y[k]) ** 2, axis=1)
    return ~(sj < sk)


def violation_count(T: TripleSet, viewers: Configuration, objects: Configuration | None = None) -> int:
    return int(np.count_nonzero(violation_mask(T, viewers, objects)))


def rank_data_equal(
    a_viewers: Configuration,
    a_objects: Configuration | None,
    b_viewers: Configuration,
    b_objects: Configuration | None,
    model: Model,
) -> bool:
    """True iff both configuration pairs generate the same full rank matrix."""
    model = Model(model)
    if len(a_viewers) != len(b_viewers) or (
        model is not Model.SELF and len(a_objects) != len(b_objects)
    ):
        raise DimensionMismatchError("configuration sizes differ")
    return row_ranks(model, a_viewers, a_objects) == row_ranks(model, b_viewers, b_objects)
