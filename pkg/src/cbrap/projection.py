"""Random projection matrices and the linear map z = Mx.

A projection matrix is drawn once from a seeded counter-based stream and
then fixed for the whole run.  Three entry distributions are supported:

* ``STANDARD_GAUSSIAN`` -- i.i.d. normal entries with variance 1/m,
* ``RANDOM_SIGN_DENSE`` -- entries +-1/sqrt(m) with probability 1/2 each,
* ``RANDOM_SIGN_SPARSE`` -- entries +-sqrt(3/m) with probability 1/6 each
  and 0 with probability 2/3.

All three approximately preserve inner products: for a Gaussian matrix and
fixed vectors x, theta, the probability that the normalized distortion
exceeds eps1 is below ``kaban_failure_bound(m, eps1)``.
"""

from __future__ import annotations

import enum
import math
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInputError, InvalidDimensionError, InvalidInputError
from .rng import check_seed


class ProjectionKind(enum.Enum):
    """Entry distribution family for a projection matrix."""

    STANDARD_GAUSSIAN = "sg"
    RANDOM_SIGN_DENSE = "rs-dense"
    RANDOM_SIGN_SPARSE = "rs-sparse"


class ContextVector:
    """Feature vector for one arm, stored dense or as sorted index/value pairs.

    Sparse vectors keep ``indices`` strictly increasing and below ``dim``;
    projecting one costs O(m * nnz) instead of O(m * n).
    """

    __slots__ = ("dim", "values", "indices")

    def __init__(self, dim: int, values: np.ndarray, indices: np.ndarray | None = None):
        dim = int(dim)
        if dim < 1:
            raise InvalidDimensionError(f"dim must be positive, got {dim}")
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1:
            raise InvalidInputError("values must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("context values must be finite")
        if indices is None:
            if values.shape[0] != dim:
                raise InvalidDimensionError(
                    f"dense vector has {values.shape[0]} values but dim={dim}"
                )
        else:
            indices = np.asarray(indices, dtype=np.int64)
            if indices.shape != values.shape:
                raise InvalidDimensionError("indices and values must have equal length")
            if indices.size and (indices[0] < 0 or indices[-1] >= dim):
                raise InvalidDimensionError("sparse indices must lie in [0, dim)")
            if indices.size > 1 and not np.all(np.diff(indices) > 0):
                raise InvalidInputError("sparse indices must be strictly increasing")
        self.dim = dim
        self.values = values
        self.indices = indices

    @staticmethod
    def dense(values: Sequence[float] | np.ndarray) -> "ContextVector":
        values = np.asarray(values, dtype=np.float64)
        return ContextVector(values.shape[0], values)

    @staticmethod
    def sparse(dim: int, indices: Sequence[int], values: Sequence[float]) -> "ContextVector":
        return ContextVector(dim, np.asarray(values, dtype=np.float64),
                             np.asarray(indices, dtype=np.int64))

    @property
    def is_sparse(self) -> bool:
        return self.indices is not None

    @property
    def nnz(self) -> int:
        if self.indices is None:
            return int(np.count_nonzero(self.values))
        return int(self.values.shape[0])

    def to_dense(self) -> np.ndarray:
        if self.indices is None:
            return self.values
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def dot_dense(self, other: np.ndarray) -> float:
        """Inner product with a dense vector of matching dimension."""
        if other.shape[0] != self.dim:
            raise InvalidDimensionError(
                f"dot of dim {self.dim} vector with length-{other.shape[0]} array"
            )
        if self.indices is None:
            return float(self.values @ other)
        return float(self.values @ other[self.indices])

    def __repr__(self) -> str:
        tag = "sparse" if self.is_sparse else "dense"
        return f"ContextVector({tag}, dim={self.dim}, nnz={self.nnz})"


def as_context(x: "ContextVector | np.ndarray | Sequence[float]") -> ContextVector:
    """Coerce an array-like to a dense ContextVector; pass ContextVectors through."""
    if isinstance(x, ContextVector):
        return x
    return ContextVector.dense(x)


class ProjectionMatrix:
    """Fixed m x n random matrix together with its construction recipe.

    Immutable after construction (entries are marked read-only), so a single
    instance can be shared across threads.  Matrices built by
    ``build_projection`` are bit-identical functions of (kind, m, n, seed).
    """

    __slots__ = ("kind", "m", "n", "entries", "seed")

    def __init__(self, kind: ProjectionKind | None, m: int, n: int,
                 entries: np.ndarray, seed: int):
        entries = np.ascontiguousarray(entries, dtype=np.float64)
        if entries.shape != (m, n):
            raise InvalidDimensionError(
                f"entries shape {entries.shape} does not match ({m}, {n})"
            )
        if not np.all(np.isfinite(entries)):
            raise InvalidInputError("projection entries must be finite")
        entries.setflags(write=False)
        self.kind = kind
        self.m = int(m)
        self.n = int(n)
        self.entries = entries
        self.seed = int(seed)

    @staticmethod
    def from_entries(entries: np.ndarray, seed: int = 0) -> "ProjectionMatrix":
        """Test hook: wrap explicit entries; no distributional invariants claimed."""
        entries = np.asarray(entries, dtype=np.float64)
        if entries.ndim != 2:
            raise InvalidDimensionError("entries must be a 2-d array")
        return ProjectionMatrix(None, entries.shape[0], entries.shape[1], entries, seed)

    @staticmethod
    def identity(n: int) -> "ProjectionMatrix":
        """Test hook: the identity map (m = n), which preserves everything."""
        return ProjectionMatrix(None, n, n, np.eye(n), 0)

    def __repr__(self) -> str:
        kind = self.kind.value if self.kind is not None else "explicit"
        return f"ProjectionMatrix({kind}, m={self.m}, n={self.n}, seed={self.seed})"


def build_projection(kind: ProjectionKind, m: int, n: int, seed: int) -> ProjectionMatrix:
    """Draw the fixed m x n projection matrix for the given construction.

    Entries come from a single Philox (counter-based) stream keyed by
    ``seed`` and are laid out row-major, so reconstruction from
    (kind, m, n, seed) is exact on any platform.
    """
    m, n = int(m), int(n)
    if m < 1 or n < 1 or m > n:
        raise InvalidDimensionError(f"need 1 <= m <= n, got m={m}, n={n}")
    seed = check_seed(seed)
    rng = np.random.Generator(np.random.Philox(key=seed))
    if kind is ProjectionKind.STANDARD_GAUSSIAN:
        entries = rng.standard_normal((m, n)) / math.sqrt(m)
    elif kind is ProjectionKind.RANDOM_SIGN_DENSE:
        scale = 1.0 / math.sqrt(m)
        entries = np.where(rng.random((m, n)) < 0.5, scale, -scale)
    elif kind is ProjectionKind.RANDOM_SIGN_SPARSE:
        # +-sqrt(3/m) w.p. 1/6 each, zero w.p. 2/3
        scale = math.sqrt(3.0 / m)
        u = rng.random((m, n))
        entries = np.where(u < 1.0 / 6.0, scale, np.where(u >= 5.0 / 6.0, -scale, 0.0))
    else:
        raise InvalidInputError(f"unknown projection kind: {kind!r}")
    return ProjectionMatrix(kind, m, n, entries, seed)


def project(P: ProjectionMatrix, x: ContextVector | np.ndarray) -> ContextVector:
    """Apply z = Mx, exploiting sparsity of x when present."""
    x = as_context(x)
    if x.dim != P.n:
        raise InvalidDimensionError(f"context dim {x.dim} does not match n={P.n}")
    if x.indices is not None:
        z = P.entries[:, x.indices] @ x.values
    else:
        z = P.entries @ x.values
    return ContextVector.dense(z)


def project_rows(P: ProjectionMatrix, contexts: Iterable[ContextVector | np.ndarray]) -> np.ndarray:
    """Project a batch of contexts, returning a (K, m) array of rows z_y."""
    ctxs = [as_context(c) for c in contexts]
    if any(c.dim != P.n for c in ctxs):
        raise InvalidDimensionError("every context must have dim n")
    if any(c.is_sparse for c in ctxs):
        return np.stack([project(P, c).values for c in ctxs])
    return np.stack([c.values for c in ctxs]) @ P.entries.T


def inner_product_error(P: ProjectionMatrix, x: ContextVector | np.ndarray,
                        theta: ContextVector | np.ndarray) -> float:
    """Normalized inner-product distortion |<x,theta> - <Mx,Mtheta>| / (|x||theta|)."""
    x, theta = as_context(x), as_context(theta)
    if x.dim != P.n or theta.dim != P.n:
        raise InvalidDimensionError(
            f"x.dim={x.dim}, theta.dim={theta.dim} must both equal n={P.n}"
        )
    nx, nt = x.norm(), theta.norm()
    if nx == 0.0 or nt == 0.0:
        raise DegenerateInputError("inner_product_error requires nonzero-norm inputs")
    raw = x.dot_dense(theta.to_dense())
    projected = float(project(P, x).values @ project(P, theta).values)
    return abs(raw - projected) / (nx * nt)


def kaban_failure_bound(m: int, eps1: float) -> float:
    """Tail bound min(1, 2 exp(-m eps1^2 / 8)) on the normalized distortion.

    This is the probability, over the draw of a Gaussian projection, that
    ``inner_product_error`` exceeds ``eps1`` for any fixed vector pair.
    """
    m = int(m)
    eps1 = float(eps1)
    if m < 1:
        raise InvalidInputError(f"m must be >= 1, got {m}")
    if eps1 <= 0:
        raise InvalidInputError(f"eps1 must be positive, got {eps1}")
    return min(1.0, 2.0 * math.exp(-m * eps1 * eps1 / 8.0))


def sg_distortion_sample(m: int, n: int, trials: int, seed: int,
                         batch: int = 256) -> np.ndarray:
    """Monte Carlo sample of normalized distortions under Gaussian projection.

    Each trial draws a fresh m x n Gaussian matrix (variance-1/m entries,
    identical in law to ``build_projection`` output) plus an independent
    uniform pair of unit vectors, and evaluates the same error functional
    as ``inner_product_error``.  Matrices are generated in batches from one
    counter-based stream purely for throughput; entries across trials stay
    independent.
    """
    if m < 1 or n < m:
        raise InvalidDimensionError(f"need 1 <= m <= n, got m={m}, n={n}")
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=check_seed(seed)))
    out = np.empty(trials)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        M = rng.standard_normal((b, m, n)) / math.sqrt(m)
        x = rng.standard_normal((b, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        th = rng.standard_normal((b, n))
        th /= np.linalg.norm(th, axis=1, keepdims=True)
        raw = np.einsum("bn,bn->b", x, th)
        zx = np.einsum("bmn,bn->bm", M, x)
        zt = np.einsum("bmn,bn->bm", M, th)
        out[done:done + b] = np.abs(raw - np.einsum("bm,bm->b", zx, zt))
        done += b
    return out
