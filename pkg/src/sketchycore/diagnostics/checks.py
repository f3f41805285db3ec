"""Empirical checks of the auxiliary results behind the error bounds.

Each check either evaluates a deterministic statement on one instance
(range-capture inequality, core decomposition identity) or estimates how
often a probabilistic statement holds over seeded Monte Carlo trials.
Trial ``i`` always draws from ``stream.child(i)``, so results do not depend
on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..matcore import (
    IndexSet,
    InvalidArgumentError,
    RandomStream,
    as_matrix,
    pinv_and_rank,
    row_coherence,
    sample_without_replacement,
    svd,
    thin_qr,
)
from ..sketch import ApproxFactors, CoreSketch, SketchConfig, as_accessor, build_core_sketches, recover, truncate
from .metrics import IncoherenceStats, SpectrumSummary, incoherence
from .theory import TheoryReport, evaluate_bounds


def _stream(rng) -> RandomStream:
    return rng if isinstance(rng, RandomStream) else RandomStream(int(rng))


@dataclass(frozen=True)
class RateRecord:
    """Outcome of a Monte Carlo pass-rate check."""

    name: str
    trials: int
    passes: int
    expected_floor: float
    detail: dict

    @property
    def pass_rate(self) -> float:
        return self.passes / self.trials if self.trials else float("nan")

    @property
    def violations(self) -> int:
        return self.trials - self.passes


# --------------------------------------------------------------------------
# Sampled rows of an incoherent orthonormal basis
# --------------------------------------------------------------------------


def check_lemma1(V1, n: int, trials: int, rng=0) -> RateRecord:
    """How often ``sqrt(n/6N) <= sigma_r(V1[Theta]) and sigma_1(V1[Theta]) <= sqrt(13n/6N)``
    for ``Theta`` a uniform ``n``-subset of the rows."""
    V1 = as_matrix(V1, "V1")
    N, r = V1.shape
    n, trials = int(n), int(trials)
    if n > N:
        raise InvalidArgumentError(f"n <= N violated: n={n}, N={N}")
    if r > N:
        raise InvalidArgumentError(f"basis has more columns ({r}) than rows ({N})")
    mu = incoherence(V1, r)
    lower, upper = math.sqrt(n / (6 * N)), math.sqrt(13 * n / (6 * N))
    floor_n = 8 * mu * r * math.log(r) if r > 1 else 0.0
    root = _stream(rng)
    passes = 0
    for i in range(trials):
        theta = sample_without_replacement(n, N, root.child(i))
        sv = np.linalg.svd(V1[theta.indices], compute_uv=False)
        smallest = sv[r - 1] if sv.size >= r else 0.0
        passes += bool(smallest >= lower and sv[0] <= upper)
    return RateRecord(
        "lemma1",
        trials,
        passes,
        1 - 2 / r**3,
        {"N": N, "r": r, "n": n, "mu": mu, "sample_floor": floor_n, "floor_met": n >= floor_n,
         "lower": lower, "upper": upper},
    )


# --------------------------------------------------------------------------
# Deterministic range-capture inequality
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class InequalityRecord:
    lhs: float
    rhs: float
    scale: float
    degenerate: bool

    def holds(self, rel_slack: float = 1e-12) -> bool:
        """``lhs <= rhs`` up to ``rel_slack`` times ``||A||_F^2``."""
        return self.lhs <= self.rhs + rel_slack * self.scale


def check_lemma3(a, theta: IndexSet, omega, r: int) -> InequalityRecord:
    """Both sides of ``||A - QQ^T A||_F^2 <= ||S2||_F^2 + ||S2 O2 pinv(O1)||_F^2``.

    ``Q`` comes from the thin QR of ``A[:, theta] @ omega.T``;
    ``O1 = V1[theta]^T omega^T`` and ``O2 = V2[theta]^T omega^T`` use the
    exact SVD of ``A``. A rank-deficient ``O1`` is reported as degenerate.
    """
    a = as_matrix(a, "A")
    omega = as_matrix(omega, "omega")
    r = int(r)
    if theta.population != a.shape[1]:
        raise InvalidArgumentError(f"theta population {theta.population} != N={a.shape[1]}")
    if omega.shape[1] != len(theta):
        raise InvalidArgumentError(f"omega has {omega.shape[1]} columns, theta has {len(theta)} indices")
    if not 1 <= r <= min(a.shape):
        raise InvalidArgumentError(f"r={r} out of range for shape {a.shape}")
    u, sigma, v = svd(a)
    Y = a[:, theta.indices] @ omega.T
    Q, _ = thin_qr(Y)
    resid = a - Q @ (Q.T @ a)
    lhs = float(np.einsum("ij,ij->", resid, resid))
    vt_theta = v[theta.indices].T
    omega1 = vt_theta[:r] @ omega.T
    omega2 = vt_theta[r:] @ omega.T
    o1_pinv, rank = pinv_and_rank(omega1)
    s2 = sigma[r:]
    term = (s2[:, None] * omega2) @ o1_pinv
    rhs = float(np.sum(s2**2) + np.einsum("ij,ij->", term, term))
    return InequalityRecord(lhs, rhs, float(np.sum(sigma**2)), rank < r)


# --------------------------------------------------------------------------
# Gaussian pseudo-inverse tail and the second-moment identity
# --------------------------------------------------------------------------


def lemma4_bound(k: int, r: int) -> float:
    g = k - r + 1
    return math.e * math.sqrt(k) / g * k ** (3 / g)


def check_lemma4(k: int, r: int, trials: int, rng=0, batch: int = 2000) -> RateRecord:
    """How often a standard Gaussian ``k x r`` matrix has ``||pinv(G)||_2`` within the tail bound."""
    k, r, trials = int(k), int(r), int(trials)
    if r < 1:
        raise InvalidArgumentError(f"r >= 1 violated: r={r}")
    if k < r + 4:
        raise InvalidArgumentError(f"k >= r + 4 violated: k={k}, r={r}")
    bound = lemma4_bound(k, r)
    root = _stream(rng)
    passes, worst = 0, 0.0
    for b, start in enumerate(range(0, trials, batch)):
        size = min(batch, trials - start)
        G = root.child(b).generator().standard_normal((size, k, r))
        smallest = np.linalg.svd(G, compute_uv=False)[:, -1]
        norms = 1.0 / smallest
        passes += int(np.count_nonzero(norms <= bound))
        worst = max(worst, float(norms.max()))
    return RateRecord("lemma4", trials, passes, 1 - 1 / k**3, {"k": k, "r": r, "bound": bound, "max_norm": worst})


@dataclass(frozen=True)
class MomentRecord:
    mean: float
    target: float
    trials: int

    @property
    def deviation(self) -> float:
        return abs(self.mean - self.target) / self.target


def check_lemma5(S, T, trials: int, rng=0, batch: int = 5000) -> MomentRecord:
    """Monte Carlo mean of ``||S G T||_F^2`` against ``||S||_F^2 ||T||_F^2``."""
    S = as_matrix(S, "S")
    T = as_matrix(T, "T")
    target = float(np.sum(S**2) * np.sum(T**2))
    if target == 0.0:
        raise InvalidArgumentError("S and T must both be nonzero")
    root = _stream(rng)
    totals = []
    for b, start in enumerate(range(0, int(trials), batch)):
        size = min(batch, int(trials) - start)
        G = root.child(b).generator().standard_normal((size, S.shape[1], T.shape[0]))
        prod = np.einsum("ab,tbc,cd->tad", S, G, T)
        totals.append(np.einsum("tad,tad->t", prod, prod))
    values = np.concatenate(totals)
    return MomentRecord(math.fsum(values) / values.size, target, int(trials))


# --------------------------------------------------------------------------
# Core decomposition identity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityRecord:
    residual: float
    lhs_norm: float
    rhs_norm: float
    degenerate: bool


def _complement(B):
    q, _ = np.linalg.qr(B, mode="complete")
    return q[:, B.shape[1]:]


def check_lemma7(a, factors: ApproxFactors, sk: CoreSketch) -> IdentityRecord:
    """Relative residual of the three-term expansion of ``C - Q^T A P``.

    Residual is ``||lhs - rhs||_F / max(||C||_F, eps)``; the expansion is
    exact whenever ``Phi Q[delta']`` and ``Psi P[theta']`` have full column rank.
    """
    a = as_matrix(a, "A")
    Q, C, P = factors.Q, factors.C, factors.P
    k = C.shape[0]
    Q_perp, P_perp = _complement(Q), _complement(P)
    dp, tp = sk.delta_prime.indices, sk.theta_prime.indices
    phi1, phi2 = sk.phi @ Q[dp], sk.phi @ Q_perp[dp]
    psi1, psi2 = sk.psi @ P[tp], sk.psi @ P_perp[tp]
    phi1_pinv, rank_phi = pinv_and_rank(phi1)
    psi1_pinv, rank_psi = pinv_and_rank(psi1)
    left = phi1_pinv @ phi2
    right = psi2.T @ psi1_pinv.T
    AP, AP_perp = a @ P, a @ P_perp
    rhs = left @ (Q_perp.T @ AP) + (Q.T @ AP_perp) @ right + left @ (Q_perp.T @ AP_perp) @ right
    lhs = C - Q.T @ AP
    scale = max(float(np.linalg.norm(C)), np.finfo(float).eps)
    return IdentityRecord(
        float(np.linalg.norm(lhs - rhs)) / scale,
        float(np.linalg.norm(lhs)),
        float(np.linalg.norm(rhs)),
        rank_phi < k or rank_psi < k,
    )


# --------------------------------------------------------------------------
# Coverage of the two main error bounds
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverageRecord:
    trials: int
    range_passes: int
    initial_passes: int
    final_passes: int
    conditioned: int
    report: TheoryReport
    mu_prime_max: float
    nu_prime_max: float
    worst_range_ratio: float
    worst_final_ratio: float

    @property
    def range_rate(self) -> float:
        return self.range_passes / self.trials

    @property
    def initial_rate(self) -> float:
        return self.initial_passes / self.conditioned if self.conditioned else float("nan")

    @property
    def final_rate(self) -> float:
        return self.final_passes / self.conditioned if self.conditioned else float("nan")


def theorem_coverage(a, config: SketchConfig, trials: int, rng=None) -> CoverageRecord:
    """Fraction of seeded pipeline runs meeting the range bound and, among
    those, the initial and final approximation bounds."""
    a = as_matrix(a, "A")
    root = RandomStream(config.seed) if rng is None else _stream(rng)
    spec = SpectrumSummary.from_matrix(a)
    u, _, v = svd(a, config.r)
    inc = IncoherenceStats(row_coherence(u, config.r), row_coherence(v, config.r))
    report = evaluate_bounds(spec, inc, config)
    slack = 1e-10 * spec.total_fro
    acc = as_accessor(a)
    rng_pass = init_pass = final_pass = cond = 0
    mu_p = nu_p = 0.0
    worst_range = worst_final = 0.0
    for i in range(int(trials)):
        sk = build_core_sketches(acc, config, root.child(i))
        f = recover(sk)
        Q, P = f.Q, f.P
        e_range = max(
            float(np.linalg.norm(a - Q @ (Q.T @ a))),
            float(np.linalg.norm(a - (a @ P) @ P.T)),
        )
        mu_p = max(mu_p, row_coherence(Q, config.k))
        nu_p = max(nu_p, row_coherence(P, config.k))
        worst_range = max(worst_range, e_range / max(report.bound_range, slack))
        if e_range > report.bound_range + slack:
            continue
        rng_pass += 1
        cond += 1
        e_init = float(np.linalg.norm(a - f.to_dense()))
        e_final = float(np.linalg.norm(a - truncate(f, config.r).to_dense()))
        init_pass += e_init <= report.bound_initial + slack
        final_pass += e_final <= report.bound_final + slack
        worst_final = max(worst_final, e_final / max(report.bound_final, slack))
    return CoverageRecord(
        int(trials), rng_pass, init_pass, final_pass, cond, report, mu_p, nu_p, worst_range, worst_final
    )
