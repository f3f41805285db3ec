import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exact_rank
from sketchycore.diagnostics import approx_error
from sketchycore.matcore import InvalidArgumentError, RandomStream
from sketchycore.sketch import (
    ApproxFactors,
    DenseAccessor,
    SketchConfig,
    build_core_sketches,
    build_full_sketches,
    ratio_count,
    recover,
    sketchy_core_svd,
    sketchy_svd,
    truncate,
)


# ---------------------------------------------------------------- config


def test_defaults():
    cfg = SketchConfig(r=20, p=0.4)
    assert (cfg.k, cfg.s, cfg.q) == (81, 163, 0.4)


@pytest.mark.parametrize(
    "kw, needle",
    [
        (dict(r=5, k=4), "r <= k"),
        (dict(r=2, k=5, s=4), "k <= s"),
        (dict(r=2, p=0.5, q=0.4), "p <= q"),
        (dict(r=2, p=0.0), "0 < p <= 1"),
        (dict(r=0), "r >= 1"),
        (dict(r=2, map_kind="ssrft"), "map_kind"),
    ],
)
def test_config_rejects(kw, needle):
    with pytest.raises(InvalidArgumentError, match=needle):
        SketchConfig(**kw)


def test_sample_counts():
    assert SketchConfig(r=20, p=0.4).sample_counts(2500, 640) == (1000, 256, 1000, 256)
    with pytest.raises(InvalidArgumentError, match="s <= min"):
        SketchConfig(r=20, p=0.2).sample_counts(2500, 640)


def test_k_at_least_min_dimension_rejected():
    # k beyond min(M, N) leaves no room for s <= min(m, n)
    with pytest.raises(InvalidArgumentError):
        SketchConfig(r=2, k=31, s=31).sample_counts(40, 30)
    with pytest.raises(InvalidArgumentError):
        SketchConfig(r=2, k=30).sample_counts(40, 30)


def test_ratio_count_rounding():
    assert ratio_count(0.4, 2500) == 1000
    assert ratio_count(0.3, 10) == 3
    assert ratio_count(1e-9, 10) == 1


@given(st.floats(0.01, 1.0), st.integers(1, 10**6))
@settings(max_examples=200, deadline=None)
def test_ratio_count_bounds(p, total):
    m = ratio_count(p, total)
    assert 1 <= m <= total
    assert m >= p * total - 1e-6


# ---------------------------------------------------------------- sketches


def test_shapes(rng):
    A = rng.standard_normal((100, 80))
    sk = build_core_sketches(A, SketchConfig(r=2, k=10, s=21, p=0.5))
    assert sk.X.shape == (10, 80) and sk.Y.shape == (100, 10) and sk.Z.shape == (21, 21)
    assert (len(sk.delta), len(sk.theta), len(sk.delta_prime), len(sk.theta_prime)) == (50, 40, 50, 40)
    assert sk.phi.shape == (21, 50) and sk.psi.shape == (21, 40)


def test_full_sets_at_p_one(rng):
    A = rng.standard_normal((30, 25))
    sk = build_core_sketches(A, SketchConfig(r=2, k=5, s=11))
    assert all(s.is_full for s in (sk.delta, sk.theta, sk.delta_prime, sk.theta_prime))


def test_full_entry_points_identical(rng):
    A = rng.standard_normal((30, 25))
    cfg = SketchConfig(r=2, k=5, s=11, seed=3)
    a, b = build_core_sketches(A, cfg), build_full_sketches(A, cfg)
    for name in ("X", "Y", "Z", "phi", "psi"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_sketch_formulas(rng):
    A = rng.standard_normal((40, 30))
    cfg = SketchConfig(r=2, k=6, s=13, p=0.5, seed=9)
    sk = build_core_sketches(A, cfg)
    # Y uses only sampled columns, Z only the sampled intersection block
    blk = A[np.ix_(sk.delta_prime.indices, sk.theta_prime.indices)]
    assert np.allclose(sk.Z, sk.phi @ blk @ sk.psi.T, atol=1e-12)
    B = A.copy()
    outside = np.setdiff1d(np.arange(30), sk.theta.indices)
    B[:, outside] = 1e6
    assert np.array_equal(build_core_sketches(B, cfg).Y, sk.Y)


def test_non_finite_detected(rng):
    A = rng.standard_normal((30, 25))
    A[3, 4] = np.nan
    with pytest.raises(InvalidArgumentError, match="not finite"):
        build_core_sketches(A, SketchConfig(r=2, k=5, s=11))


def test_memmap_accessor(tmp_path, rng):
    A = rng.standard_normal((40, 30))
    path = tmp_path / "a.dat"
    mm = np.memmap(path, dtype=np.float64, mode="w+", shape=A.shape)
    mm[:] = A
    mm.flush()
    ro = np.memmap(path, dtype=np.float64, mode="r", shape=A.shape)
    cfg = SketchConfig(r=2, k=6, s=13, p=0.5)
    assert np.array_equal(build_core_sketches(DenseAccessor(ro), cfg).Z, build_core_sketches(A, cfg).Z)


# ---------------------------------------------------------------- recovery


def test_orthonormal_bases(rng):
    A = rng.standard_normal((60, 50))
    f = recover(build_core_sketches(A, SketchConfig(r=3, k=10, s=21, p=0.5)))
    assert np.linalg.norm(f.Q.T @ f.Q - np.eye(10)) <= 1e-10
    assert np.linalg.norm(f.P.T @ f.P - np.eye(10)) <= 1e-10


@pytest.mark.parametrize("p", [0.4, 0.7, 1.0])
def test_exact_rank_recovery(p):
    A = exact_rank(200, 150, 4, seed=1)
    cfg = SketchConfig(r=4, k=17, s=35, p=p, seed=2)
    f = recover(build_core_sketches(A, cfg))
    assert np.linalg.norm(f.to_dense() - A) / np.linalg.norm(A) <= 1e-10
    out, _ = sketchy_core_svd(A, cfg)
    assert approx_error(A, out) <= 1e-10


def test_rank_k_full_sampling():
    A = exact_rank(80, 60, 9, seed=4)
    f = recover(build_full_sketches(A, SketchConfig(r=3, k=9, s=19)))
    assert np.linalg.norm(f.to_dense() - A) / np.linalg.norm(A) <= 1e-10


@given(st.integers(0, 2**31))
@settings(max_examples=15, deadline=None)
def test_exact_rank_any_seed(seed):
    A = exact_rank(90, 70, 3, seed=5)
    out, _ = sketchy_core_svd(A, SketchConfig(r=3, k=13, s=27, p=0.45, seed=seed))
    assert approx_error(A, out) <= 1e-10


def test_rank_deficient_core_warns(rng, caplog):
    A = rng.standard_normal((40, 30))
    sk = build_core_sketches(A, SketchConfig(r=1, k=5, s=11))
    sk = dataclasses.replace(sk, phi=np.zeros_like(sk.phi))
    f = recover(sk)
    assert f.warnings and "rank deficient" in f.warnings[0]
    assert np.all(np.isfinite(f.C))
    assert "rank deficient" in caplog.text


# ---------------------------------------------------------------- truncation


def _factors(C, rng):
    k = C.shape[0]
    Q, _ = np.linalg.qr(rng.standard_normal((20, k)))
    P, _ = np.linalg.qr(rng.standard_normal((15, k)))
    return ApproxFactors(Q, C, P)


def test_truncate_examples(rng):
    f = _factors(np.diag([5.0, 3.0, 1.0]), rng)
    assert np.allclose(truncate(f, 2).sigma, [5, 3])
    C = rng.standard_normal((4, 4))
    f = _factors(C, rng)
    full = truncate(f, 4)
    assert np.linalg.norm(full.to_dense() - f.to_dense()) <= 1e-10 * np.linalg.norm(C)
    s = np.linalg.svd(C, compute_uv=False)
    for r in range(1, 5):
        gap = np.linalg.norm(f.to_dense() - truncate(f, r).to_dense())
        assert gap == pytest.approx(np.sqrt(np.sum(s[r:] ** 2)), abs=1e-10)
    with pytest.raises(InvalidArgumentError, match="r <= k"):
        truncate(f, 5)


def test_truncation_monotone(rng):
    # monotone against the initial approximation; against A itself it need not be
    A = rng.standard_normal((50, 40))
    f = recover(build_core_sketches(A, SketchConfig(r=2, k=12, s=25, p=0.7)))
    Ahat = f.to_dense()
    gaps = [np.linalg.norm(Ahat - truncate(f, r).to_dense()) for r in range(1, 13)]
    assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))


def test_final_vs_initial_relation(rng):
    A = rng.standard_normal((50, 40))
    r = 3
    f = recover(build_core_sketches(A, SketchConfig(r=r, k=12, s=25, p=0.7)))
    tail = np.sqrt(np.sum(np.linalg.svd(A, compute_uv=False)[r:] ** 2))
    final = np.linalg.norm(A - truncate(f, r).to_dense())
    assert final <= 2 * np.linalg.norm(A - f.to_dense()) + tail + 1e-12


# ---------------------------------------------------------------- end to end


def test_reduction_bitwise(rng):
    A = rng.standard_normal((60, 45))
    for seed in range(3):
        cfg = SketchConfig(r=3, k=13, s=27, seed=seed)
        a, _ = sketchy_core_svd(A, cfg)
        b, _ = sketchy_svd(A, cfg)
        assert np.array_equal(a.U, b.U) and np.array_equal(a.sigma, b.sigma) and np.array_equal(a.V, b.V)


def test_output_valid(rng):
    A = rng.standard_normal((60, 45))
    out, timing = sketchy_core_svd(A, SketchConfig(r=4, k=13, s=27, p=0.6))
    assert out.U.shape == (60, 4) and out.V.shape == (45, 4)
    assert np.linalg.norm(out.U.T @ out.U - np.eye(4)) <= 1e-10
    assert np.linalg.norm(out.V.T @ out.V - np.eye(4)) <= 1e-10
    assert np.all(np.diff(out.sigma) <= 0)
    assert min(timing.to_dict().values()) >= 0


def test_seed_determinism(rng):
    A = rng.standard_normal((60, 45))
    cfg = SketchConfig(r=3, p=0.5, k=9, s=19, seed=42)
    a, _ = sketchy_core_svd(A, cfg)
    b, _ = sketchy_core_svd(A, cfg, RandomStream(42))
    assert np.array_equal(a.U, b.U)


def test_adaptive_core(rng):
    A = exact_rank(200, 150, 3, seed=7)
    cfg = SketchConfig(r=3, k=13, s=27, p=0.3, adaptive_core=True)
    sk = build_core_sketches(A, cfg)
    assert 27 <= len(sk.delta_prime) <= 200
    out, _ = sketchy_core_svd(A, cfg)
    assert approx_error(A, out) <= 1e-10
