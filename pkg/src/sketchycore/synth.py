"""Synthetic test matrices with a prescribed spectrum and coherence.

``generate`` builds ``U diag(sigma) V^T`` from random orthonormal factors, so
the singular values are exactly the requested ones and the optimal rank-r
error is known in closed form. Factors are either Haar-like (incoherent) or
carry one coordinate-aligned spike in their leading column, which sets the
row coherence to a chosen target.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .matcore import InvalidArgumentError, RandomStream, thin_qr

FAMILIES = ("explicit", "polynomial", "exponential", "lowrank_noise")
COHERENCE_MODES = ("incoherent", "spiked")


@dataclass(frozen=True)
class SynthSpec:
    """Shape, spectrum family, coherence mode and seed of a synthetic matrix.

    Spectrum families (``length`` values, default ``min(M, N)``):

    * ``explicit``: ``values`` as given
    * ``polynomial``: ``sigma_i = i^(-alpha)``, ``i = 1..length``
    * ``exponential``: ``sigma_i = beta^i``
    * ``lowrank_noise``: ``rank`` ones followed by ``noise`` (exact-rank when 0)
    """

    M: int
    N: int
    family: str = "polynomial"
    values: tuple[float, ...] | None = None
    length: int | None = None
    alpha: float = 1.0
    beta: float = 0.9
    rank: int = 10
    noise: float = 0.0
    coherence_mode: str = "incoherent"
    mu_target: float | None = None
    nu_target: float | None = None
    coherence_rank: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.values is not None:
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if int(self.M) < 1 or int(self.N) < 1:
            raise InvalidArgumentError(f"M, N must be positive, got {self.M}x{self.N}")
        if self.family not in FAMILIES:
            raise InvalidArgumentError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.coherence_mode not in COHERENCE_MODES:
            raise InvalidArgumentError(f"coherence_mode must be one of {COHERENCE_MODES}, got {self.coherence_mode!r}")
        sigma = self.spectrum()
        if sigma.size > min(self.M, self.N):
            raise InvalidArgumentError(f"spectrum length {sigma.size} exceeds min(M, N)={min(self.M, self.N)}")
        if np.any(sigma < 0) or np.any(np.diff(sigma) > 0) or not np.all(np.isfinite(sigma)):
            raise InvalidArgumentError("spectrum must be finite, nonnegative and nonincreasing")

    @property
    def spectrum_length(self) -> int:
        if self.family == "explicit":
            if not self.values:
                raise InvalidArgumentError("explicit family needs a nonempty values tuple")
            return len(self.values)
        return int(self.length) if self.length is not None else min(int(self.M), int(self.N))

    @property
    def spike_rank(self) -> int:
        if self.coherence_rank is not None:
            return int(self.coherence_rank)
        return self.rank if self.family == "lowrank_noise" else self.spectrum_length

    def spectrum(self) -> np.ndarray:
        L = self.spectrum_length
        if self.family == "explicit":
            return np.asarray(self.values, dtype=np.float64)
        i = np.arange(1, L + 1, dtype=np.float64)
        if self.family == "polynomial":
            return i ** (-float(self.alpha))
        if self.family == "exponential":
            if not 0 < self.beta <= 1:
                raise InvalidArgumentError(f"beta must be in (0, 1], got {self.beta}")
            return float(self.beta) ** i
        rank = int(self.rank)
        if not 0 <= rank <= L:
            raise InvalidArgumentError(f"rank must be in [0, {L}], got {rank}")
        if not 0 <= self.noise <= 1:
            raise InvalidArgumentError(f"noise must be in [0, 1], got {self.noise}")
        return np.concatenate([np.ones(rank), np.full(L - rank, float(self.noise))])

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["values"] is not None:
            d["values"] = list(d["values"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise InvalidArgumentError(f"unknown SynthSpec fields: {sorted(unknown)}")
        return cls(**d)


def _haar(rows, cols, stream):
    q, _ = thin_qr(stream.generator().standard_normal((rows, cols)))
    return q


def _spiked(rows, cols, target, scale_rank, stream):
    # leading column puts weight tau on one row so that rows/scale_rank * tau = target
    if target < 1:
        raise InvalidArgumentError(f"coherence target must be >= 1, got {target}")
    if target > rows / scale_rank:
        raise InvalidArgumentError(
            f"coherence target {target} infeasible: must be <= rows / rank = {rows}/{scale_rank} = {rows / scale_rank:g}"
        )
    gen = stream.generator()
    tau = target * scale_rank / rows
    spike = int(gen.integers(rows))
    w = gen.standard_normal(rows)
    w[spike] = 0.0
    w /= np.linalg.norm(w)
    lead = math.sqrt(1 - tau) * w
    lead[spike] = math.sqrt(tau)
    rest = gen.standard_normal((rows, cols - 1))
    q, _ = thin_qr(np.column_stack([lead, rest]))
    return q


def _factor(rows, cols, target, scale_rank, mode, stream):
    if mode == "spiked" and target is not None:
        return _spiked(rows, cols, float(target), scale_rank, stream)
    return _haar(rows, cols, stream)


def generate(spec: SynthSpec) -> np.ndarray:
    """The ``M x N`` matrix ``U diag(spectrum) V^T`` described by ``spec``."""
    sigma = spec.spectrum()
    L = sigma.size
    root = RandomStream(spec.seed)
    c = max(1, min(spec.spike_rank, L))
    U = _factor(spec.M, L, spec.mu_target, c, spec.coherence_mode, root.child(0))
    V = _factor(spec.N, L, spec.nu_target, c, spec.coherence_mode, root.child(1))
    return (U * sigma) @ V.T


def polynomial_scree_exponent(length: int, r: int, target: float) -> float:
    """Exponent ``alpha`` with ``scree(r) = target`` for ``sigma_i = i^(-alpha)``, ``i <= length``."""
    i = np.arange(1, int(length) + 1, dtype=np.float64)
    logi = np.log(i)

    def gap(alpha):
        w = np.exp(-2 * alpha * logi)
        return w[int(r):].sum() / w.sum() - target

    if not 0 < target < (length - r) / length:
        raise InvalidArgumentError(f"scree target {target} unreachable for length {length}, r={r}")
    return float(brentq(gap, 1e-6, 50.0, xtol=1e-12))


def _calibrated(M, N, r, scree_target, mu, nu, seed):
    L = min(M, N)
    return SynthSpec(
        M=M,
        N=N,
        family="polynomial",
        alpha=polynomial_scree_exponent(L, r, scree_target),
        coherence_mode="spiked",
        mu_target=min(mu, M / r),
        nu_target=min(nu, N / r),
        coherence_rank=r,
        seed=seed,
    )


def yale_like_spec(M: int = 2500, N: int = 640, r: int = 20, seed: int = 0) -> SynthSpec:
    """Face-image-like matrix: optimal rank-20 error 0.033, mu = 4.1137, nu = 2.7068."""
    return _calibrated(M, N, r, 0.033, 4.1137, 2.7068, seed)


def cardiac_like_spec(M: int = 45056, N: int = 160, r: int = 5, seed: int = 0) -> SynthSpec:
    """Tall MRI-sequence-like matrix: optimal rank-5 error 0.0011, mu = 127.5935, nu = 2.1507."""
    return _calibrated(M, N, r, 0.0011, 127.5935, 2.1507, seed)


def video_like_spec(M: int = 518400, N: int = 2200, r: int = 25, seed: int = 0) -> SynthSpec:
    """Video-frame-like matrix: optimal rank-25 error 0.0066, mu = 20.3505, nu = 14.0194.

    The default shape needs about 9 GB; pass a smaller ``M`` for desk runs.
    """
    return _calibrated(M, N, r, 0.0066, 20.3505, 14.0194, seed)
