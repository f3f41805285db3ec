"""Dense linear-algebra primitives and reproducible randomness.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. The helpers
here validate them, factor them (thin QR, SVD, pseudo-inverse) and draw the
random dimension-reduction maps and index samples used by the sketches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


class InvalidArgumentError(ValueError):
    """Raised when a shape, count or configuration is out of range."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D float64 array, or raise."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidArgumentError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains NaN or Inf entries")
    return arr


# --------------------------------------------------------------------------
# Random streams
# --------------------------------------------------------------------------


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RandomStream:
    """A (seed, stream id) pair naming one Philox substream.

    Philox is counter based: the pair is used directly as the 128-bit key, so
    the value sequence depends on nothing but these two integers. ``child``
    derives further substreams deterministically, which lets parallel or
    repeated work be assigned streams up front.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & _MASK64)

    def generator(self) -> np.random.Generator:
        key = self.seed | (self.stream_id << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, index: int) -> "RandomStream":
        mixed = _splitmix64(_splitmix64(self.stream_id) ^ (int(index) & _MASK64))
        return RandomStream(self.seed, mixed)

    def children(self, count: int) -> list["RandomStream"]:
        return [self.child(i) for i in range(count)]


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RandomStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InvalidArgumentError(f"expected RandomStream or numpy Generator, got {type(rng).__name__}")


# --------------------------------------------------------------------------
# Index sets and sampling
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IndexSet:
    """Strictly increasing zero-based indices drawn from ``range(population)``."""

    indices: np.ndarray
    population: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.intp).reshape(-1)
        pop = int(self.population)
        if pop < 1:
            raise InvalidArgumentError(f"population must be positive, got {pop}")
        if idx.size:
            if idx[0] < 0 or idx[-1] >= pop:
                raise InvalidArgumentError(f"indices must lie in [0, {pop}), got range [{idx.min()}, {idx.max()}]")
            if np.any(np.diff(idx) <= 0):
                raise InvalidArgumentError("indices must be strictly increasing")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "population", pop)

    @classmethod
    def full(cls, population: int) -> "IndexSet":
        return cls(np.arange(population), population)

    @property
    def is_full(self) -> bool:
        return self.indices.size == self.population

    def __len__(self) -> int:
        return int(self.indices.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexSet):
            return NotImplemented
        return self.population == other.population and np.array_equal(self.indices, other.indices)

    def __hash__(self):
        return hash((self.population, self.indices.tobytes()))


def sample_without_replacement(count: int, population: int, rng) -> IndexSet:
    """Uniformly random subset of ``count`` indices out of ``population``."""
    count, population = int(count), int(population)
    if population < 1:
        raise InvalidArgumentError(f"population must be positive, got {population}")
    if count < 0 or count > population:
        raise InvalidArgumentError(f"cannot draw {count} of {population} without replacement")
    if count == population:
        return IndexSet.full(population)
    gen = _generator(rng)
    picked = gen.choice(population, size=count, replace=False, shuffle=False)
    return IndexSet(np.sort(picked), population)


# --------------------------------------------------------------------------
# Dimension-reduction maps
# --------------------------------------------------------------------------


def _check_dims(rows, cols):
    if int(rows) < 1 or int(cols) < 1:
        raise InvalidArgumentError(f"map dimensions must be positive, got {rows}x{cols}")


def gaussian_map(rows: int, cols: int, rng) -> np.ndarray:
    """Standard normal ``rows x cols`` matrix (unit variance, no scaling)."""
    _check_dims(rows, cols)
    return _generator(rng).standard_normal((int(rows), int(cols)))


def sparse_sign_map(rows: int, cols: int, rng, nonzeros_per_column: int = 8) -> np.ndarray:
    """Sparse sign matrix, stored densely.

    Each column holds ``nonzeros_per_column`` entries equal to
    ``+-sqrt(rows / nonzeros_per_column)`` at uniformly chosen rows, so every
    entry has unit variance like the Gaussian map.
    """
    _check_dims(rows, cols)
    rows, cols, nnz = int(rows), int(cols), int(nonzeros_per_column)
    if not 1 <= nnz <= rows:
        raise InvalidArgumentError(f"nonzeros_per_column must be in [1, {rows}], got {nnz}")
    gen = _generator(rng)
    out = np.zeros((rows, cols))
    scale = np.sqrt(rows / nnz)
    # argsort of uniform keys gives an independent random permutation per column
    positions = np.argsort(gen.random((rows, cols)), axis=0)[:nnz]
    signs = np.where(gen.random((nnz, cols)) < 0.5, -scale, scale)
    out[positions, np.arange(cols)[None, :]] = signs
    return out


def random_map(kind: str, rows: int, cols: int, rng, nonzeros_per_column: int = 8) -> np.ndarray:
    if kind == "gaussian":
        return gaussian_map(rows, cols, rng)
    if kind == "sparse-sign":
        return sparse_sign_map(rows, cols, rng, min(nonzeros_per_column, int(rows)))
    raise InvalidArgumentError(f"unknown map kind {kind!r}; expected 'gaussian' or 'sparse-sign'")


# --------------------------------------------------------------------------
# Factorizations
# --------------------------------------------------------------------------


def thin_qr(a) -> tuple[np.ndarray, np.ndarray]:
    """Householder thin QR with the diagonal of R made nonnegative."""
    a = as_matrix(a, "A")
    if a.shape[0] < a.shape[1]:
        raise InvalidArgumentError(f"thin QR needs rows >= cols, got {a.shape}")
    q, r = np.linalg.qr(a, mode="reduced")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q *= signs[None, :]
    r *= signs[:, None]
    return q, r


def svd(a, r: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD ``a = U diag(sigma) V^T``; keeps the leading ``r`` triplets if given.

    Returns V (not V^T).
    """
    a = as_matrix(a, "A")
    if r is not None and not 0 <= int(r) <= min(a.shape):
        raise InvalidArgumentError(f"rank {r} out of range for shape {a.shape}")
    u, sigma, vt = np.linalg.svd(a, full_matrices=False)
    if r is not None:
        r = int(r)
        u, sigma, vt = u[:, :r], sigma[:r], vt[:r]
    return u, sigma, vt.T


def default_pinv_tol(shape) -> float:
    return max(shape) * np.finfo(np.float64).eps


def pseudo_inverse(a, tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``tol * sigma_max`` are treated as zero; the default
    ``tol`` is ``max(rows, cols) * eps``.
    """
    return pinv_and_rank(a, tol)[0]


def pinv_and_rank(a, tol: float | None = None) -> tuple[np.ndarray, int]:
    """Pseudo-inverse together with the numerical rank it was built from."""
    a = as_matrix(a, "A")
    if tol is None:
        tol = default_pinv_tol(a.shape)
    u, sigma, vt = np.linalg.svd(a, full_matrices=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0])), 0
    keep = sigma > tol * sigma[0]
    rank = int(np.count_nonzero(keep))
    inv = (vt[:rank].T / sigma[:rank]) @ u[:, :rank].T
    return inv, rank


def submatrix(a, row_set: IndexSet | None = None, col_set: IndexSet | None = None) -> np.ndarray:
    """Rows ``row_set`` and columns ``col_set`` of ``a`` (``None`` means all).

    A full index set returns ``a`` itself rather than a gathered copy.
    """
    a = np.asarray(a)
    if a.ndim != 2:
        raise InvalidArgumentError(f"expected a 2-D matrix, got ndim={a.ndim}")
    for label, iset, dim in (("row", row_set, a.shape[0]), ("column", col_set, a.shape[1])):
        if iset is not None and iset.population != dim:
            raise InvalidArgumentError(
                f"{label} index set has population {iset.population}, matrix dimension is {dim}"
            )
    rows = None if row_set is None or row_set.is_full else row_set.indices
    cols = None if col_set is None or col_set.is_full else col_set.indices
    if rows is not None and cols is not None:
        return a[np.ix_(rows, cols)]
    if rows is not None:
        return a[rows]
    if cols is not None:
        return a[:, cols]
    return a


def row_coherence(basis, rank_scale: int) -> float:
    """Smallest mu with every row norm of ``basis`` at most sqrt(mu * rank_scale / rows)."""
    basis = np.asarray(basis)
    row_sq = np.einsum("ij,ij->i", basis, basis)
    return float(basis.shape[0] / int(rank_scale) * row_sq.max())
