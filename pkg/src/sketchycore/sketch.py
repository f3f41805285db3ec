"""SketchySVD and SketchyCoreSVD pipelines.

Both methods build a left sketch ``X``, a right sketch ``Y`` and a core
sketch ``Z``; SketchyCoreSVD builds them from uniformly subsampled rows and
columns of the data matrix, SketchySVD (``p = q = 1``) from all of it. The
rest of the pipeline is shared: orthonormal bases ``P`` and ``Q`` from thin
QR of ``X^T`` and ``Y``, a ``k x k`` core ``C`` solved through two
pseudo-inverses, and a rank-``r`` truncation of ``C``.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from .matcore import (
    IndexSet,
    InvalidArgumentError,
    RandomStream,
    pinv_and_rank,
    random_map,
    row_coherence,
    sample_without_replacement,
    svd,
    thin_qr,
)

log = logging.getLogger(__name__)

MAP_KINDS = ("gaussian", "sparse-sign")

# substream indices under the run's root stream
_DELTA, _THETA, _DELTA_PRIME, _THETA_PRIME, _GAMMA, _OMEGA, _PHI, _PSI = range(8)


def ratio_count(ratio: float, total: int) -> int:
    # round first so that e.g. 0.4 * 2500 does not ceil to 1001
    return min(total, max(1, math.ceil(round(ratio * total, 9))))


@dataclass(frozen=True)
class SketchConfig:
    """Sketch sizes, sampling ratios and seed.

    ``k`` defaults to ``4r + 1``, ``s`` to ``2k + 1`` and ``q`` to ``p``.
    Sample counts are ``m = ceil(p M)``, ``n = ceil(p N)``, ``m' = ceil(q M)``
    and ``n' = ceil(q N)``; their feasibility is checked against a concrete
    matrix shape by :meth:`sample_counts`.
    """

    r: int
    k: int | None = None
    s: int | None = None
    p: float = 1.0
    q: float | None = None
    map_kind: str = "gaussian"
    seed: int = 0
    sparsity: int = 8
    adaptive_core: bool = False

    def __post_init__(self):
        r = int(self.r)
        k = 4 * r + 1 if self.k is None else int(self.k)
        s = 2 * k + 1 if self.s is None else int(self.s)
        p = float(self.p)
        q = p if self.q is None else float(self.q)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if r < 1:
            raise InvalidArgumentError(f"r >= 1 violated: r={r}")
        if not r <= k:
            raise InvalidArgumentError(f"r <= k violated: r={r}, k={k}")
        if not k <= s:
            raise InvalidArgumentError(f"k <= s violated: k={k}, s={s}")
        if not 0.0 < p <= 1.0:
            raise InvalidArgumentError(f"0 < p <= 1 violated: p={p}")
        if not 0.0 < q <= 1.0:
            raise InvalidArgumentError(f"0 < q <= 1 violated: q={q}")
        if not p <= q:
            raise InvalidArgumentError(f"p <= q violated: p={p}, q={q}")
        if self.map_kind not in MAP_KINDS:
            raise InvalidArgumentError(f"map_kind must be one of {MAP_KINDS}, got {self.map_kind!r}")
        if int(self.sparsity) < 1:
            raise InvalidArgumentError(f"sparsity >= 1 violated: {self.sparsity}")

    @property
    def is_full(self) -> bool:
        return self.p == 1.0 and self.q == 1.0

    def full(self) -> "SketchConfig":
        """The same configuration with ``p = q = 1`` (SketchySVD)."""
        return dataclasses.replace(self, p=1.0, q=1.0, adaptive_core=False)

    def sample_counts(self, M: int, N: int) -> tuple[int, int, int, int]:
        """``(m, n, m', n')`` for an ``M x N`` matrix, after checking feasibility."""
        m, n = ratio_count(self.p, M), ratio_count(self.p, N)
        mp, np_ = ratio_count(self.q, M), ratio_count(self.q, N)
        bound = min(m, n, mp, np_)
        if self.s > bound:
            raise InvalidArgumentError(
                f"s <= min(m, n, m', n') violated: s={self.s}, (m, n, m', n')=({m}, {n}, {mp}, {np_}) "
                f"for a {M}x{N} matrix with p={self.p}, q={self.q}"
            )
        return m, n, mp, np_

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


class DenseAccessor:
    """Row, column and block access to an in-memory (or memory-mapped) matrix.

    The sketch builders only touch the data through this interface, so a
    subsampled build reads the sampled rows, the sampled columns and their
    intersection block, nothing else.
    """

    def __init__(self, data):
        data = np.asarray(data) if not isinstance(data, np.memmap) else data
        if data.ndim != 2 or min(data.shape) < 1:
            raise InvalidArgumentError(f"expected a nonempty 2-D matrix, got shape {data.shape}")
        if data.dtype != np.float64:
            data = data.astype(np.float64)
        self.data = data

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def rows(self, iset: IndexSet) -> np.ndarray:
        self._check(iset, 0)
        return self.data if iset.is_full else self.data[iset.indices]

    def cols(self, iset: IndexSet) -> np.ndarray:
        self._check(iset, 1)
        return self.data if iset.is_full else self.data[:, iset.indices]

    def block(self, row_set: IndexSet, col_set: IndexSet) -> np.ndarray:
        self._check(row_set, 0)
        self._check(col_set, 1)
        if row_set.is_full and col_set.is_full:
            return self.data
        if row_set.is_full:
            return self.data[:, col_set.indices]
        if col_set.is_full:
            return self.data[row_set.indices]
        return self.data[np.ix_(row_set.indices, col_set.indices)]

    def row_block(self, start: int, stop: int) -> np.ndarray:
        return np.asarray(self.data[start:stop], dtype=np.float64)

    def _check(self, iset, axis):
        if iset.population != self.data.shape[axis]:
            raise InvalidArgumentError(
                f"index set population {iset.population} does not match dimension {self.data.shape[axis]}"
            )


def as_accessor(a) -> DenseAccessor:
    if isinstance(a, DenseAccessor):
        return a
    return DenseAccessor(a)


@dataclass(frozen=True, eq=False)
class CoreSketch:
    """The three sketches, the four index sets and the retained core maps."""

    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    delta: IndexSet
    theta: IndexSet
    delta_prime: IndexSet
    theta_prime: IndexSet
    phi: np.ndarray
    psi: np.ndarray
    config: SketchConfig
    M: int
    N: int

    def __post_init__(self):
        k, s = self.config.k, self.config.s
        expected = {
            "X": (k, self.N),
            "Y": (self.M, k),
            "Z": (s, s),
            "phi": (s, len(self.delta_prime)),
            "psi": (s, len(self.theta_prime)),
        }
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise InvalidArgumentError(f"CoreSketch.{name} has shape {got}, expected {shape}")
        for name, iset, pop in (
            ("delta", self.delta, self.M),
            ("theta", self.theta, self.N),
            ("delta_prime", self.delta_prime, self.M),
            ("theta_prime", self.theta_prime, self.N),
        ):
            if iset.population != pop:
                raise InvalidArgumentError(f"CoreSketch.{name} population {iset.population} != {pop}")

    def with_core(self, Z: np.ndarray) -> "CoreSketch":
        return dataclasses.replace(self, Z=np.asarray(Z, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class ApproxFactors:
    """Initial approximation ``Q C P^T``."""

    Q: np.ndarray
    C: np.ndarray
    P: np.ndarray
    warnings: tuple[str, ...] = ()

    def to_dense(self) -> np.ndarray:
        return self.Q @ self.C @ self.P.T


@dataclass(frozen=True, eq=False)
class RankRFactors:
    """A rank-r approximation ``U diag(sigma) V^T`` in SVD form."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    warnings: tuple[str, ...] = ()

    @property
    def rank(self) -> int:
        return int(self.sigma.size)

    def to_dense(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T


@dataclass
class Timing:
    """Wall-clock seconds per pipeline phase."""

    sketch: float = 0.0
    qr: float = 0.0
    core: float = 0.0
    truncate: float = 0.0

    @property
    def build(self) -> float:
        """Time to the factored output, excluding the final truncation."""
        return self.sketch + self.qr + self.core

    @property
    def total(self) -> float:
        return self.build + self.truncate

    def to_dict(self) -> dict:
        return {**dataclasses.asdict(self), "total": self.total}


# --------------------------------------------------------------------------
# Sketch construction
# --------------------------------------------------------------------------


def _root(config: SketchConfig, stream: RandomStream | None) -> RandomStream:
    return RandomStream(config.seed) if stream is None else stream


def _core_product(phi, block, psi):
    # pick the association with the s^2 * min(rows, cols) term
    if block.shape[0] >= block.shape[1]:
        return (phi @ block) @ psi.T
    return phi @ (block @ psi.T)


def build_core_sketches(a, config: SketchConfig, stream: RandomStream | None = None) -> CoreSketch:
    """Build ``X``, ``Y`` and ``Z`` from sampled rows, columns and their intersection.

    Every random object (four index sets, four maps) comes from its own
    child of ``stream`` (default ``RandomStream(config.seed)``), so the
    result does not depend on the order in which the sketches are built.
    """
    acc = as_accessor(a)
    M, N = acc.shape
    m, n, mp, np_ = config.sample_counts(M, N)
    root = _root(config, stream)
    k, s, kind, nnz = config.k, config.s, config.map_kind, config.sparsity

    delta = sample_without_replacement(m, M, root.child(_DELTA))
    theta = sample_without_replacement(n, N, root.child(_THETA))
    gamma = random_map(kind, k, m, root.child(_GAMMA), nnz)
    X = gamma @ acc.rows(delta)
    del gamma
    omega = random_map(kind, k, n, root.child(_OMEGA), nnz)
    Y = acc.cols(theta) @ omega.T
    del omega

    if config.adaptive_core:
        mp, np_ = _adaptive_core_counts(X, Y, config, M, N)
    delta_p = sample_without_replacement(mp, M, root.child(_DELTA_PRIME))
    theta_p = sample_without_replacement(np_, N, root.child(_THETA_PRIME))
    phi = random_map(kind, s, mp, root.child(_PHI), nnz)
    psi = random_map(kind, s, np_, root.child(_PSI), nnz)
    Z = _core_product(phi, acc.block(delta_p, theta_p), psi)
    # only the sampled entries are read, so finiteness is checked through the sketches
    for name, sketch in (("X", X), ("Y", Y), ("Z", Z)):
        if not np.all(np.isfinite(sketch)):
            raise InvalidArgumentError(f"sketch {name} is not finite: matrix has NaN or Inf in sampled entries")
    return CoreSketch(X, Y, Z, delta, theta, delta_p, theta_p, phi, psi, config, M, N)


def _adaptive_core_counts(X, Y, config, M, N):
    # core sample sizes from the measured coherence of Q and P: ceil(8 mu' k log k)
    k = config.k
    P, _ = thin_qr(X.T)
    Q, _ = thin_qr(Y)
    factor = 8.0 * k * math.log(k) if k > 1 else 8.0
    mp = math.ceil(factor * row_coherence(Q, k))
    np_ = math.ceil(factor * row_coherence(P, k))
    return min(M, max(config.s, mp)), min(N, max(config.s, np_))


def build_full_sketches(a, config: SketchConfig, stream: RandomStream | None = None) -> CoreSketch:
    """SketchySVD sketches: the core-sketch builder with ``p = q = 1``."""
    return build_core_sketches(a, config.full(), stream)


# --------------------------------------------------------------------------
# Recovery and truncation
# --------------------------------------------------------------------------


def _recover(sk: CoreSketch, timing: Timing | None = None) -> ApproxFactors:
    t0 = time.perf_counter()
    P, _ = thin_qr(sk.X.T)
    Q, _ = thin_qr(sk.Y)
    t1 = time.perf_counter()
    k = sk.config.k
    phi1 = sk.phi @ Q[sk.delta_prime.indices]
    psi1 = sk.psi @ P[sk.theta_prime.indices]
    phi1_pinv, rank_phi = pinv_and_rank(phi1)
    psi1_pinv, rank_psi = pinv_and_rank(psi1)
    C = phi1_pinv @ sk.Z @ psi1_pinv.T
    t2 = time.perf_counter()
    notes = []
    if rank_phi < k:
        notes.append(f"Phi Q(delta', :) numerically rank deficient: rank {rank_phi} < k={k}")
    if rank_psi < k:
        notes.append(f"Psi P(theta', :) numerically rank deficient: rank {rank_psi} < k={k}")
    for msg in notes:
        log.warning(msg)
    if timing is not None:
        timing.qr += t1 - t0
        timing.core += t2 - t1
    return ApproxFactors(Q, C, P, tuple(notes))


def recover(sk: CoreSketch) -> ApproxFactors:
    """Orthonormal bases and core: ``Q C P^T`` approximates the data matrix.

    A numerically rank-deficient core system is recorded in
    ``ApproxFactors.warnings`` instead of raising.
    """
    return _recover(sk)


def truncate(factors: ApproxFactors, r: int) -> RankRFactors:
    """Best rank-``r`` truncation of the core, lifted back through ``Q`` and ``P``."""
    k = factors.C.shape[0]
    if not 1 <= int(r) <= k:
        raise InvalidArgumentError(f"r <= k violated: r={r}, k={k}")
    uc, sigma, vc = svd(factors.C, int(r))
    return RankRFactors(factors.Q @ uc, sigma, factors.P @ vc, factors.warnings)


def _pipeline(a, config, stream, builder):
    timing = Timing()
    t0 = time.perf_counter()
    sk = builder(a, config, stream)
    timing.sketch = time.perf_counter() - t0
    factors = _recover(sk, timing)
    t0 = time.perf_counter()
    out = truncate(factors, config.r)
    timing.truncate = time.perf_counter() - t0
    return out, timing


def sketchy_core_svd(a, config: SketchConfig, stream: RandomStream | None = None) -> tuple[RankRFactors, Timing]:
    """Rank-``config.r`` SVD estimate from subsampled sketches, with phase timings."""
    return _pipeline(a, config, stream, build_core_sketches)


def sketchy_svd(a, config: SketchConfig, stream: RandomStream | None = None) -> tuple[RankRFactors, Timing]:
    """SketchySVD: :func:`sketchy_core_svd` with ``p = q = 1``."""
    return _pipeline(a, config, stream, build_full_sketches)
