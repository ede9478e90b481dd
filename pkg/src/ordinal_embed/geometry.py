"""Configurations, bisector predicates and alignment under the gauge groups.

A configuration is an ``(n, p)`` array of points wrapped in a small frozen
dataclass. Transforms act on configurations and serialize to plain dicts.
Alignment routines find the gauge element that best maps a source
configuration onto a target and report a scale-free residual.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

ORTHOGONALITY_TOL = 1e-10
INVERTIBILITY_TOL = 1e-12
UNIT_NORM_TOL = 1e-12


class DimensionMismatchError(ValueError):
    pass


class DegenerateConfigurationError(ValueError):
    pass


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Configuration:
    """A finite, ordered list of points in R^p."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ValueError(f"points must be a non-empty (n, p) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return type(self) is type(other) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((type(self).__name__, self.points.shape, self.points.tobytes()))

    def __repr__(self):
        return f"{type(self).__name__}(n={len(self)}, dim={self.dim})"

    def centered(self) -> np.ndarray:
        return self.points - self.points.mean(axis=0)

    def rms_radius(self) -> float:
        """Root-mean-square distance of the points to their centroid."""
        return float(np.sqrt(np.mean(np.sum(self.centered() ** 2, axis=1))))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "points": self.points.tolist()}

    @classmethod
    def from_dict(cls, d: dict):
        pts = np.array(d["points"], dtype=float).reshape(len(d["points"]), int(d["dim"]))
        return cls(pts)


@dataclass(frozen=True, eq=False, repr=False)
class SphericalConfiguration(Configuration):
    """Configuration whose points all lie on the unit sphere."""

    def __post_init__(self):
        super().__post_init__()
        norms = np.linalg.norm(self.points, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
        if bad.size:
            raise ValueError(f"point {bad[0]} has norm {norms[bad[0]]!r}, expected 1")

    @classmethod
    def normalized(cls, points) -> "SphericalConfiguration":
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        norms = np.linalg.norm(pts, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise DegenerateConfigurationError("cannot normalize the zero vector")
        return cls(pts / norms)


def _check_same_dim(*configs: Configuration):
    dims = {c.dim for c in configs}
    if len(dims) != 1:
        raise DimensionMismatchError(f"dimension mismatch: {sorted(dims)}")


def _check_same_shape(a: Configuration, b: Configuration):
    _check_same_dim(a, b)
    if len(a) != len(b):
        raise DimensionMismatchError(f"point count mismatch: {len(a)} vs {len(b)}")


@dataclass(frozen=True, eq=False)
class SimilarityTransform:
    """x -> scale * orthogonal @ x + translation."""

    scale: float
    orthogonal: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        q = _frozen(self.orthogonal)
        t = _frozen(self.translation).reshape(-1)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("orthogonal must be a square matrix")
        if t.shape[0] != q.shape[0]:
            raise DimensionMismatchError("translation length must match matrix size")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale!r}")
        err = np.max(np.abs(q.T @ q - np.eye(q.shape[0])))
        if err > ORTHOGONALITY_TOL:
            raise ValueError(f"matrix is not orthogonal (max |Q^T Q - I| = {err:.3g})")
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "orthogonal", q)
        object.__setattr__(self, "translation", t)

    @property
    def dim(self) -> int:
        return self.orthogonal.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "SimilarityTransform":
        return cls(1.0, np.eye(dim), np.zeros(dim))

    def __call__(self, X: Configuration) -> Configuration:
        return apply_similarity(self, X)

    def apply_points(self, pts: np.ndarray) -> np.ndarray:
        return self.scale * pts @ self.orthogonal.T + self.translation

    def compose(self, inner: "SimilarityTransform") -> "SimilarityTransform":
        """Return ``self ∘ inner``: apply ``inner`` first."""
        if inner.dim != self.dim:
            raise DimensionMismatchError("cannot compose transforms of different dimension")
        return SimilarityTransform(
            self.scale * inner.scale,
            self.orthogonal @ inner.orthogonal,
            self.scale * self.orthogonal @ inner.translation + self.translation,
        )

    def __matmul__(self, inner):
        return self.compose(inner)

    def inverse(self) -> "SimilarityTransform":
        qt = self.orthogonal.T
        return SimilarityTransform(1.0 / self.scale, qt, -(qt @ self.translation) / self.scale)

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "orthogonal": self.orthogonal.tolist(),
            "translation": self.translation.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimilarityTransform":
        return cls(d["scale"], d["orthogonal"], d["translation"])


@dataclass(frozen=True, eq=False)
class GaugePair:
    """Gauge element of the vector unfolding model.

    Objects move affinely, ``y -> L y + tau``; individuals move by the
    contragredient map ``x -> L^{-T} x / |L^{-T} x|`` so every row of
    inner-product preferences is preserved.
    """

    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        L = _frozen(self.linear)
        t = _frozen(self.translation).reshape(-1)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError("linear must be a square matrix")
        if t.shape[0] != L.shape[0]:
            raise DimensionMismatchError("translation length must match matrix size")
        det = np.linalg.det(L)
        if not abs(det) > INVERTIBILITY_TOL:
            raise ValueError(f"linear part is not invertible (|det| = {abs(det):.3g})")
        object.__setattr__(self, "linear", L)
        object.__setattr__(self, "translation", t)

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "GaugePair":
        return cls(np.eye(dim), np.zeros(dim))

    def apply_objects(self, Y: Configuration) -> Configuration:
        _check_same_dim(Y, self)
        return Configuration(Y.points @ self.linear.T + self.translation)

    def apply_individuals(self, X: Configuration) -> SphericalConfiguration:
        _check_same_dim(X, self)
        # rows of X @ L^{-1} are L^{-T} x
        v = np.linalg.solve(self.linear.T, X.points.T).T
        return SphericalConfiguration.normalized(v)

    def to_dict(self) -> dict:
        return {"linear": self.linear.tolist(), "translation": self.translation.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "GaugePair":
        return cls(d["linear"], d["translation"])


@dataclass(frozen=True)
class AlignmentResult:
    """Best gauge element found and the normalized RMS mismatch it leaves."""

    transform: SimilarityTransform | GaugePair | np.ndarray
    residual: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        t = self.transform
        tdict = {"orthogonal": t.tolist()} if isinstance(t, np.ndarray) else t.to_dict()
        return {"transform": tdict, "residual": self.residual, **self.details}


def apply_similarity(T: SimilarityTransform, X: Configuration) -> Configuration:
    if T.dim != X.dim:
        raise DimensionMismatchError(f"transform dim {T.dim} != configuration dim {X.dim}")
    return Configuration(T.apply_points(X.points))


class Side(enum.Enum):
    CLOSER_TO_Y = "closer_to_y"
    CLOSER_TO_Y_PRIME = "closer_to_y_prime"
    EQUIDISTANT = "equidistant"


def bisector_side(x, y, y_prime, tie_tol: float = 0.0) -> Side:
    """Which side of the perpendicular bisector of ``y, y_prime`` holds ``x``.

    ``CLOSER_TO_Y`` is membership in the open halfspace of points strictly
    nearer to ``y``.
    """
    x, y, y_prime = (np.asarray(v, dtype=float).reshape(-1) for v in (x, y, y_prime))
    if not (x.shape == y.shape == y_prime.shape):
        raise DimensionMismatchError("x, y, y_prime must share a dimension")
    if np.array_equal(y, y_prime):
        raise ValueError("bisector undefined for y == y_prime")
    d, d_prime = np.linalg.norm(x - y), np.linalg.norm(x - y_prime)
    if abs(d - d_prime) <= tie_tol:
        return Side.EQUIDISTANT
    return Side.CLOSER_TO_Y if d < d_prime else Side.CLOSER_TO_Y_PRIME


def halfspace(y, y_prime) -> tuple[np.ndarray, float]:
    """Return ``(a, b)`` with ``{x : a.x < b}`` the points strictly nearer ``y``."""
    y, y_prime = np.asarray(y, dtype=float), np.asarray(y_prime, dtype=float)
    return 2.0 * (y_prime - y), float(y_prime @ y_prime - y @ y)


def chord_sq(x, x_prime) -> np.ndarray:
    """Squared chord length; equals ``2 (1 - <x, x'>)`` on the unit sphere."""
    x, x_prime = np.asarray(x, dtype=float), np.asarray(x_prime, dtype=float)
    return np.sum((x - x_prime) ** 2, axis=-1)


def _rms(a: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.sum(a ** 2, axis=-1))))


def _orthogonal_polar(M: np.ndarray, allow_reflection: bool) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal Q maximizing trace(Q^T M), with singular values adjusted for Q."""
    U, s, Vt = np.linalg.svd(M)
    if not allow_reflection and np.linalg.det(U @ Vt) < 0:
        U = U.copy()
        U[:, -1] *= -1
        s = s.copy()
        s[-1] *= -1
    return U @ Vt, s


def similarity_procrustes(
    source: Configuration, target: Configuration, allow_reflection: bool = True
) -> AlignmentResult:
    """Least-squares similarity mapping ``source`` onto ``target``.

    Residual is the RMS mismatch divided by the RMS radius of the centered
    target.
    """
    _check_same_shape(source, target)
    target_radius = target.rms_radius()
    if target_radius == 0:
        raise DegenerateConfigurationError("target points are all identical; scale undefined")
    mu_s, mu_t = source.points.mean(axis=0), target.points.mean(axis=0)
    S, T = source.points - mu_s, target.points - mu_t
    ss = float(np.sum(S ** 2))
    if ss == 0:
        raise DegenerateConfigurationError("source points are all identical; scale undefined")
    # maximize trace(Q^T T^T S)
    Q, s = _orthogonal_polar(T.T @ S, allow_reflection)
    scale = float(np.sum(s)) / ss
    if not scale > 0:
        raise DegenerateConfigurationError("optimal scale is not positive")
    t = mu_t - scale * Q @ mu_s
    transform = SimilarityTransform(scale, Q, t)
    residual = _rms(transform.apply_points(source.points) - target.points) / target_radius
    return AlignmentResult(transform, residual, {"allow_reflection": allow_reflection})


def orthogonal_align(
    source: Configuration, target: Configuration, allow_reflection: bool = True
) -> AlignmentResult:
    """Best orthogonal map (no scale, no shift) taking ``source`` to ``target``.

    Residual is the plain RMS mismatch, which for unit vectors is already
    scale-free.
    """
    _check_same_shape(source, target)
    Q, _ = _orthogonal_polar(target.points.T @ source.points, allow_reflection)
    residual = _rms(source.points @ Q.T - target.points)
    return AlignmentResult(Q, residual, {"allow_reflection": allow_reflection})


def gauge_align_vector_model(
    src_individuals: Configuration,
    src_objects: Configuration,
    tgt_individuals: Configuration,
    tgt_objects: Configuration,
) -> AlignmentResult:
    """Fit ``(L, tau)`` on the objects by least squares and check both sides.

    The residual is the larger of the object residual (RMS mismatch over
    the RMS radius of the centered target objects) and the individual
    residual (RMS mismatch of unit vectors).
    """
    _check_same_shape(src_objects, tgt_objects)
    _check_same_shape(src_individuals, tgt_individuals)
    _check_same_dim(src_objects, src_individuals)
    p = src_objects.dim
    Ys = src_objects.points
    design = np.hstack([Ys, np.ones((len(Ys), 1))])
    if np.linalg.matrix_rank(design) < p + 1:
        raise DegenerateConfigurationError("source objects do not span R^p affinely")
    coef, *_ = np.linalg.lstsq(design, tgt_objects.points, rcond=None)
    gauge = GaugePair(coef[:p].T, coef[p])
    mapped_y = gauge.apply_objects(src_objects).points
    tgt_radius = tgt_objects.rms_radius()
    if tgt_radius == 0:
        raise DegenerateConfigurationError("target objects are all identical")
    object_residual = _rms(mapped_y - tgt_objects.points) / tgt_radius
    mapped_x = gauge.apply_individuals(src_individuals).points
    individual_residual = _rms(mapped_x - tgt_individuals.points)
    return AlignmentResult(
        gauge,
        max(object_residual, individual_residual),
        {"object_residual": object_residual, "individual_residual": individual_residual},
    )


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (reflections included)."""
    A = rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(A)
    return Q * np.sign(np.diag(R))


def random_similarity(dim: int, rng: np.random.Generator) -> SimilarityTransform:
    return SimilarityTransform(
        float(np.exp(rng.uniform(-1.5, 1.5))), random_orthogonal(dim, rng), rng.normal(0, 2, dim)
    )


def random_gauge_pair(dim: int, rng: np.random.Generator, max_condition: float = 10.0) -> GaugePair:
    """Random ``(L, tau)`` with ``cond(L) <= max_condition``."""
    s = np.exp(rng.uniform(0, np.log(max_condition), dim))
    L = random_orthogonal(dim, rng) @ np.diag(s) @ random_orthogonal(dim, rng)
    return GaugePair(L, rng.normal(0, 2, dim))
