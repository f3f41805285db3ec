"""Spectra, error metrics and incoherence measurements."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..matcore import InvalidArgumentError, as_matrix, row_coherence, svd
from ..sketch import RankRFactors, as_accessor

# rows per block when accumulating residuals: keeps the temporary near 32 MB
_BLOCK_ELEMENTS = 1 << 22


@dataclass(frozen=True, eq=False)
class SpectrumSummary:
    """Singular values of an ``M x N`` matrix plus tail-norm helpers."""

    singular_values: np.ndarray
    M: int
    N: int

    def __post_init__(self):
        sv = np.asarray(self.singular_values, dtype=np.float64).reshape(-1)
        if np.any(sv < 0) or np.any(np.diff(sv) > 0):
            raise InvalidArgumentError("singular values must be nonnegative and nonincreasing")
        object.__setattr__(self, "singular_values", sv)

    @classmethod
    def from_matrix(cls, a) -> "SpectrumSummary":
        a = as_matrix(a, "A")
        return cls(np.linalg.svd(a, compute_uv=False), *a.shape)

    @property
    def total_fro(self) -> float:
        return float(math.sqrt(math.fsum(self.singular_values**2)))

    def tail_fro(self, r: int) -> float:
        return float(math.sqrt(math.fsum(self.singular_values[int(r):] ** 2)))

    def tail_op(self, r: int) -> float:
        r = int(r)
        return float(self.singular_values[r]) if r < self.singular_values.size else 0.0

    def scree(self) -> np.ndarray:
        return scree_curve(self.singular_values)


def scree_curve(sigma) -> np.ndarray:
    """``scree(r)`` for ``r = 0 .. len(sigma)``: energy fraction past the first r values."""
    sigma = np.asarray(sigma, dtype=np.float64).reshape(-1)
    if sigma.size == 0 or np.any(sigma < 0):
        raise InvalidArgumentError("spectrum must be a nonempty nonnegative vector")
    if np.any(np.diff(sigma) > 0):
        raise InvalidArgumentError("spectrum must be nonincreasing")
    if sigma[0] == 0.0:
        raise InvalidArgumentError("scree is undefined for an all-zero spectrum")
    # scale first so tiny spectra do not underflow when squared
    sq = (sigma / sigma[0]) ** 2
    total = math.fsum(sq)
    # suffix sums, accumulated from the small end for accuracy
    tail = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
    out = tail / total
    out[0] = 1.0
    return np.minimum.accumulate(out)


def approx_error(a, approx: RankRFactors, block_rows: int | None = None) -> float:
    """Relative squared Frobenius error ``||A - U diag(sigma) V^T||_F^2 / ||A||_F^2``.

    ``A`` is read in row blocks, so no second ``M x N`` buffer is allocated.
    """
    acc = as_accessor(a)
    M, N = acc.shape
    if approx.U.shape[0] != M or approx.V.shape[0] != N:
        raise InvalidArgumentError(
            f"approximation of shape {approx.U.shape[0]}x{approx.V.shape[0]} does not match matrix {M}x{N}"
        )
    if block_rows is None:
        block_rows = max(1, _BLOCK_ELEMENTS // max(N, 1))
    us = approx.U * approx.sigma
    vt = approx.V.T
    resid, total = [], []
    for start in range(0, M, block_rows):
        stop = min(M, start + block_rows)
        block = acc.row_block(start, stop)
        diff = block - us[start:stop] @ vt
        resid.append(float(np.einsum("ij,ij->", diff, diff)))
        total.append(float(np.einsum("ij,ij->", block, block)))
    denom = math.fsum(total)
    if denom == 0.0:
        raise InvalidArgumentError("relative error is undefined for a zero matrix")
    if not math.isfinite(denom):
        raise InvalidArgumentError("matrix contains NaN or Inf entries")
    return math.fsum(resid) / denom


def incoherence(basis, rank_scale: int, atol: float = 1e-8) -> float:
    """Tight coherence ``(rows / rank_scale) * max_i ||basis[i]||^2`` of an orthonormal basis."""
    basis = as_matrix(basis, "basis")
    rank_scale = int(rank_scale)
    if rank_scale < 1:
        raise InvalidArgumentError(f"rank_scale must be positive, got {rank_scale}")
    gram = basis.T @ basis
    if np.linalg.norm(gram - np.eye(basis.shape[1])) > atol * max(1.0, math.sqrt(basis.shape[1])):
        raise InvalidArgumentError("basis columns are not orthonormal")
    return row_coherence(basis, rank_scale)


def psnr(truth, estimate) -> float:
    """Peak signal-to-noise ratio in dB, after fixing the sign ambiguity.

    ``estimate`` is flipped when its inner product with ``truth`` is
    negative. The peak is ``max|truth|``. A zero residual returns ``inf``.
    """
    truth = np.asarray(truth, dtype=np.float64).reshape(-1)
    estimate = np.asarray(estimate, dtype=np.float64).reshape(-1)
    if truth.size != estimate.size:
        raise InvalidArgumentError(f"length mismatch: {truth.size} vs {estimate.size}")
    peak = float(np.max(np.abs(truth))) if truth.size else 0.0
    if peak == 0.0:
        raise InvalidArgumentError("PSNR is undefined for an all-zero reference")
    if float(truth @ estimate) < 0:
        estimate = -estimate
    rmse = math.sqrt(float(np.mean((truth - estimate) ** 2)))
    if rmse == 0.0:
        return math.inf
    return 20.0 * math.log10(peak / rmse)


@dataclass(frozen=True)
class IncoherenceStats:
    """Coherence of the leading singular subspaces (``mu``, ``nu`` at scale r)
    and of the computed bases ``Q``, ``P`` (``mu_prime``, ``nu_prime`` at scale k)."""

    mu: float
    nu: float
    mu_prime: float | None = None
    nu_prime: float | None = None


def incoherence_stats(a, r: int, Q=None, P=None) -> IncoherenceStats:
    """Measure ``mu, nu`` from the SVD of ``a`` and, if given, ``mu', nu'`` of ``Q, P``."""
    u, _, v = svd(a, int(r))
    mu_p = nu_p = None
    if Q is not None:
        mu_p = incoherence(Q, Q.shape[1])
    if P is not None:
        nu_p = incoherence(P, P.shape[1])
    return IncoherenceStats(incoherence(u, r), incoherence(v, r), mu_p, nu_p)
