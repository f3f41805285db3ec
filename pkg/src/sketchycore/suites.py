"""Verification suites run by ``sketchycore verify``.

Each suite returns a dict ``{suite, passed, criterion, measured}``. Default
sizes and trial counts are desk-scale (well under a minute each except the
500-trial coverage suites).
"""

from __future__ import annotations

import math

from .diagnostics import (
    check_lemma1,
    check_lemma3,
    check_lemma4,
    check_lemma5,
    check_lemma7,
    incoherence,
    theorem_coverage,
)
from .matcore import RandomStream, gaussian_map, sample_without_replacement, thin_qr
from .sketch import SketchConfig, build_core_sketches, recover
from .synth import SynthSpec, generate, yale_like_spec

SUITES = ("lemma1", "lemma3", "lemma4", "lemma5", "lemma7", "thm1", "thm2")


def _result(suite, passed, criterion, **measured):
    return {"suite": suite, "passed": bool(passed), "criterion": criterion, "measured": measured}


def lemma1_suite(seed=0, trials=200, N=2000, r=8):
    root = RandomStream(seed, 1)
    V1, _ = thin_qr(root.child(0).generator().standard_normal((N, r)))
    mu = incoherence(V1, r)
    n = min(N, math.ceil(8 * mu * r * math.log(r)))
    rec = check_lemma1(V1, n, trials, root.child(1))
    return _result(
        "lemma1",
        rec.pass_rate >= 0.95,
        "pass rate >= 0.95",
        pass_rate=rec.pass_rate,
        trials=trials,
        n=n,
        N=N,
        r=r,
        mu=mu,
    )


def lemma3_instances(seed=0, count=100, M=50, N=40, r=5, k=10, n=20):
    """Random ``(A, theta, omega)`` triples for the range-capture inequality."""
    root = RandomStream(seed, 3)
    for i in range(count):
        s = root.child(i)
        A = s.child(0).generator().standard_normal((M, N))
        theta = sample_without_replacement(n, N, s.child(1))
        omega = gaussian_map(k, n, s.child(2))
        yield A, theta, omega


def lemma3_suite(seed=0, trials=100, r=5):
    records = [check_lemma3(A, theta, omega, r) for A, theta, omega in lemma3_instances(seed, trials, r=r)]
    holds = sum(rec.holds(1e-12) for rec in records)
    worst = max(rec.lhs / rec.rhs for rec in records)
    return _result(
        "lemma3",
        holds == len(records),
        "lhs <= rhs (1e-12 relative slack) on every instance",
        holds=holds,
        instances=len(records),
        degenerate=sum(rec.degenerate for rec in records),
        worst_lhs_over_rhs=worst,
    )


def lemma4_tolerance(k, trials):
    floor = 1 / k**3
    return floor + 3 * math.sqrt(floor / trials)


def lemma4_suite(seed=0, trials=10_000, k=20, r=8):
    rec = check_lemma4(k, r, trials, RandomStream(seed, 4))
    rate = rec.violations / trials
    tol = lemma4_tolerance(k, trials)
    return _result(
        "lemma4",
        rate <= tol,
        f"violation rate <= 1/k^3 + 3 sqrt((1/k^3)/trials) = {tol:.6g}",
        violation_rate=rate,
        violations=rec.violations,
        trials=trials,
        bound=rec.detail["bound"],
    )


def lemma5_suite(seed=0, trials=10_000):
    root = RandomStream(seed, 5)
    S = root.child(0).generator().standard_normal((3, 5))
    T = root.child(1).generator().standard_normal((4, 2))
    rec = check_lemma5(S, T, trials, root.child(2))
    return _result(
        "lemma5",
        rec.deviation <= 0.05,
        "relative deviation of the Monte Carlo mean <= 0.05",
        deviation=rec.deviation,
        mean=rec.mean,
        target=rec.target,
        trials=trials,
    )


def lemma7_instances(seed=0, count=10, M=120, N=90):
    """Pipeline-consistent ``(A, factors, sketch)`` triples."""
    root = RandomStream(seed, 7)
    cfg = SketchConfig(r=4, k=17, s=35, p=0.5)
    for i in range(count):
        spec = SynthSpec(M=M, N=N, family="polynomial", alpha=1.0, seed=int(root.child(i).stream_id))
        A = generate(spec)
        sk = build_core_sketches(A, cfg, root.child(i).child(1))
        yield A, recover(sk), sk


def lemma7_suite(seed=0, trials=10):
    residuals, controls = [], []
    for i, (A, factors, sk) in enumerate(lemma7_instances(seed, trials)):
        residuals.append(check_lemma7(A, factors, sk).residual)
        noise = RandomStream(seed, 70).child(i).generator().standard_normal(sk.Z.shape) * 1e-3
        bad = sk.with_core(sk.Z + noise)
        controls.append(check_lemma7(A, recover(bad), bad).residual)
    passed = max(residuals) <= 1e-10 and min(controls) >= 1e-6
    return _result(
        "lemma7",
        passed,
        "residual <= 1e-10 on every instance; perturbed-core control >= 1e-6",
        max_residual=max(residuals),
        min_control_residual=min(controls),
        instances=len(residuals),
    )


def coverage_setup(seed=0):
    spec = yale_like_spec(M=400, N=300, r=6, seed=seed)
    cfg = SketchConfig(r=6, k=25, s=51, p=0.5, q=0.5, seed=seed)
    return generate(spec), cfg


def _coverage(seed, trials):
    A, cfg = coverage_setup(seed)
    return theorem_coverage(A, cfg, trials, RandomStream(seed, 11))


def thm1_suite(seed=0, trials=500, record=None):
    rec = record or _coverage(seed, trials)
    floor = rec.report.probability_floor_range
    return _result(
        "thm1",
        rec.range_rate >= floor,
        f"range-bound coverage >= 1 - 4/r^3 - 4/k^3 = {floor:.6g}",
        coverage=rec.range_rate,
        trials=rec.trials,
        bound_range=rec.report.bound_range,
        worst_error_over_bound=rec.worst_range_ratio,
        C1=rec.report.C1,
        C2=rec.report.C2,
    )


def thm2_suite(seed=0, trials=500, record=None):
    rec = record or _coverage(seed, trials)
    floor = rec.report.probability_floor_core
    return _result(
        "thm2",
        rec.final_rate >= floor and rec.initial_rate >= floor,
        f"initial and final bound coverage >= 1 - 4/k^3 - 6/s^3 = {floor:.6g}",
        initial_coverage=rec.initial_rate,
        final_coverage=rec.final_rate,
        conditioned_trials=rec.conditioned,
        bound_initial=rec.report.bound_initial,
        bound_final=rec.report.bound_final,
        worst_final_over_bound=rec.worst_final_ratio,
        C3=rec.report.C3,
        C4=rec.report.C4,
    )


def run_suites(names, seed=0, trials=None):
    """Run the named suites; ``trials`` overrides each suite's default count."""
    kw = {} if trials is None else {"trials": int(trials)}
    out = []
    shared = None
    for name in names:
        if name in ("thm1", "thm2"):
            if shared is None:
                shared = _coverage(seed, kw.get("trials", 500))
            fn = thm1_suite if name == "thm1" else thm2_suite
            out.append(fn(seed, record=shared))
        else:
            out.append(globals()[f"{name}_suite"](seed, **kw))
    return out
