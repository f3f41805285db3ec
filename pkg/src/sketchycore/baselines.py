"""Earlier sketch-based low-rank approximations, kept as comparison baselines.

All five build ``X = Gamma A`` and ``Y = A Omega^T`` from Gaussian (or
sparse-sign) maps of the same shapes the sketchy pipelines use; ``boutsidis``
additionally builds a core sketch ``Z = Phi A Psi^T``. Every method returns
its estimate re-factored into SVD form.

Transcription notes:

* ``woodruff`` and ``cohen`` project the left sketch ``X``; projecting ``Y``
  (which has ``M`` rows) onto ``U`` is dimensionally impossible.
* ``cohen`` forms ``Gamma V = U T`` with ``V`` the leading left singular
  vectors of ``Y``, the only orthonormal basis available at that point.
"""

from __future__ import annotations

import numpy as np

from .matcore import InvalidArgumentError, RandomStream, as_matrix, pseudo_inverse, random_map, svd, thin_qr
from .sketch import RankRFactors

METHODS = ("hmt", "woodruff", "cohen", "boutsidis", "tropp17")

_GAMMA, _OMEGA, _PHI, _PSI = range(4)


def svd_from_product(left: np.ndarray, right_t: np.ndarray, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Leading ``r`` SVD triplets of ``left @ right_t`` without forming it."""
    ql, rl = np.linalg.qr(left, mode="reduced")
    qr_, rr = np.linalg.qr(right_t.T, mode="reduced")
    u, sigma, v = svd(rl @ rr.T, min(r, rl.shape[0], rr.shape[0]))
    return ql @ u, sigma, qr_ @ v


def _truncated(a, r):
    u, sigma, v = svd(a, min(r, *a.shape))
    return u, sigma, v


def _hmt(A, X, Y, gamma, omega, r):
    P, _, _ = _truncated(X.T, r)
    Q, _, _ = _truncated(Y, r)
    C1 = Q.T @ Y @ pseudo_inverse(omega @ P).T
    C2 = pseudo_inverse(gamma @ Q) @ X @ P
    u, sigma, v = svd((C1 + C2) / 2.0)
    return Q @ u, sigma, P @ v


def _woodruff(A, X, Y, gamma, omega, r):
    Q, _ = thin_qr(Y)
    U, T = thin_qr(gamma @ Q)
    w_u, w_s, w_v = _truncated(U.T @ X, r)
    return svd_from_product(Q @ pseudo_inverse(T) @ (w_u * w_s), w_v.T, r)


def _cohen(A, X, Y, gamma, omega, r):
    V, _, _ = _truncated(Y, r)
    U, T = thin_qr(gamma @ V)
    w_u, w_s, w_v = _truncated(U.T @ X, r)
    return svd_from_product(V @ pseudo_inverse(T) @ (w_u * w_s), w_v.T, r)


def _boutsidis(A, X, Y, gamma, omega, r, phi, psi):
    P, _ = thin_qr(X.T)
    Q, _ = thin_qr(Y)
    Z = phi @ A @ psi.T
    u1, s1, v1 = svd(phi @ Q)
    u2, s2, v2 = svd(psi @ P)
    c_u, c_s, c_v = _truncated(u1.T @ Z @ u2, r)
    s1_inv = pseudo_inverse(np.diag(s1))
    s2_inv = pseudo_inverse(np.diag(s2))
    left = Q @ v1 @ s1_inv @ (c_u * c_s)
    right_t = c_v.T @ s2_inv @ v2.T @ P.T
    return svd_from_product(left, right_t, r)


def _tropp17(A, X, Y, gamma, omega, r):
    Q, _ = thin_qr(Y)
    w_u, w_s, w_v = _truncated(pseudo_inverse(gamma @ Q) @ X, r)
    return Q @ w_u, w_s, w_v


_DISPATCH = {
    "hmt": _hmt,
    "woodruff": _woodruff,
    "cohen": _cohen,
    "tropp17": _tropp17,
}


def baseline_approx(
    A,
    method: str,
    r: int,
    k: int,
    s: int | None = None,
    rng: RandomStream | int = 0,
    map_kind: str = "gaussian",
    sparsity: int = 8,
) -> RankRFactors:
    """Rank-``r`` approximation of ``A`` by one of :data:`METHODS`.

    ``s`` (core sketch size) is only used by ``boutsidis`` and defaults to
    ``2k + 1``. Maps come from fixed children of ``rng``.
    """
    if method not in METHODS:
        raise InvalidArgumentError(f"unknown baseline {method!r}; expected one of {METHODS}")
    A = as_matrix(A, "A")
    M, N = A.shape
    r, k = int(r), int(k)
    s = 2 * k + 1 if s is None else int(s)
    if method != "boutsidis":
        if not 1 <= r <= k <= min(M, N):
            raise InvalidArgumentError(f"1 <= r <= k <= min(M, N) violated: r={r}, k={k}, shape={A.shape}")
    elif not 1 <= r <= k <= s <= min(M, N):
        raise InvalidArgumentError(
            f"1 <= r <= k <= s <= min(M, N) violated: r={r}, k={k}, s={s}, shape={A.shape}"
        )
    root = rng if isinstance(rng, RandomStream) else RandomStream(int(rng))
    gamma = random_map(map_kind, k, M, root.child(_GAMMA), sparsity)
    omega = random_map(map_kind, k, N, root.child(_OMEGA), sparsity)
    X = gamma @ A
    Y = A @ omega.T
    if method == "boutsidis":
        phi = random_map(map_kind, s, M, root.child(_PHI), sparsity)
        psi = random_map(map_kind, s, N, root.child(_PSI), sparsity)
        U, sigma, V = _boutsidis(A, X, Y, gamma, omega, r, phi, psi)
    else:
        U, sigma, V = _DISPATCH[method](A, X, Y, gamma, omega, r)
    return _pad(U, sigma, V, r)


def _pad(U, sigma, V, r):
    # methods can return fewer than r triplets only on degenerate input
    if sigma.size == r:
        return RankRFactors(U, sigma, V)
    extra = r - sigma.size
    U = np.hstack([U, np.zeros((U.shape[0], extra))])
    V = np.hstack([V, np.zeros((V.shape[0], extra))])
    return RankRFactors(U, np.concatenate([sigma, np.zeros(extra)]), V, ("fewer than r nonzero triplets",))
