"""Command-line entry point: ``sketchycore <verb> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import io as mio
from .baselines import METHODS as BASELINES
from .baselines import baseline_approx
from .diagnostics import (
    IncoherenceStats,
    SpectrumSummary,
    approx_error,
    evaluate_bounds,
)
from .matcore import InvalidArgumentError, RandomStream, as_matrix, row_coherence, svd
from .reports import SCHEMA_VERSION, RunReport, dumps
from .sketch import SketchConfig, as_accessor, sketchy_core_svd, sketchy_svd
from .suites import SUITES, run_suites
from .synth import SynthSpec, cardiac_like_spec, generate, video_like_spec, yale_like_spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SKETCHY = ("sketchy_core_svd", "sketchy_svd")
ALL_METHODS = SKETCHY + BASELINES
PRESETS = {"yale": yale_like_spec, "cardiac": cardiac_like_spec, "video": video_like_spec}
DEFAULT_MAX_DENSE = 50_000_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _load(args):
    fmt = args.format or mio.infer_format(args.input)
    return mio.load_matrix(args.input, fmt, mmap=(fmt == "binary"))


def _guard(shape, limit, what):
    size = int(shape[0]) * int(shape[1])
    if size > limit:
        raise InvalidArgumentError(
            f"{what} needs a dense {shape[0]}x{shape[1]} matrix ({size} entries) which exceeds "
            f"--max-dense={limit}; raise the limit to proceed"
        )


def _config(args, p=None, q=None):
    p = args.p if p is None else p
    q = args.q if q is None else q
    return SketchConfig(r=args.rank, k=args.k, s=args.s, p=p, q=q, seed=args.seed, map_kind=args.map)


def _echo(cfg, method):
    d = {"r": cfg.r, "k": cfg.k, "s": cfg.s, "p": cfg.p, "q": cfg.q, "seed": cfg.seed, "map_kind": cfg.map_kind}
    if method not in ("sketchy_core_svd",):
        d["p"] = d["q"] = 1.0
    return d


def run_method(a, method, cfg, trials):
    """``(errors, times, warnings)`` over ``trials`` runs; trial i uses ``RandomStream(seed).child(i)``."""
    if method not in ALL_METHODS:
        raise InvalidArgumentError(f"unknown method {method!r}; expected one of {ALL_METHODS}")
    acc = as_accessor(a)
    dense = None
    root = RandomStream(cfg.seed)
    errors, times, warnings = [], [], []
    for i in range(int(trials)):
        stream = root.child(i)
        if method in SKETCHY:
            fn = sketchy_core_svd if method == "sketchy_core_svd" else sketchy_svd
            fac, timing = fn(acc, cfg, stream)
            times.append(timing.to_dict())
        else:
            if dense is None:
                dense = as_matrix(a, "A")
            t0 = time.perf_counter()
            fac = baseline_approx(dense, method, cfg.r, cfg.k, cfg.s, stream, cfg.map_kind, cfg.sparsity)
            times.append({"total": time.perf_counter() - t0})
        warnings.extend(fac.warnings)
        errors.append(approx_error(acc.data, fac))
    return errors, times, warnings


def _extras(a, cfg, args):
    """Optimal error, incoherence and theory blocks; each needs a full SVD."""
    if not (args.optimal or args.incoherence or args.theory):
        return None, None, None
    _guard(a.shape, args.max_dense, "exact spectrum")
    dense = as_matrix(a, "A")
    u, sigma, v = svd(dense)
    spec = SpectrumSummary(sigma, *dense.shape)
    opt = float(spec.scree()[cfg.r]) if cfg.r < sigma.size else 0.0
    inc = IncoherenceStats(row_coherence(u[:, : cfg.r], cfg.r), row_coherence(v[:, : cfg.r], cfg.r))
    theory = evaluate_bounds(spec, inc, cfg).to_dict() if args.theory else None
    return (
        opt if args.optimal or args.theory else None,
        {"mu": inc.mu, "nu": inc.nu} if args.incoherence else None,
        theory,
    )


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v):
    return "-" if v is None else (format(v, ".10g") if isinstance(v, float) else str(v))


# --------------------------------------------------------------------------
# verbs
# --------------------------------------------------------------------------


def cmd_approx(args):
    a = _load(args)
    cfg = _config(args)
    errors, times, warns = run_method(a, args.method, cfg, args.trials)
    opt, inc, theory = _extras(a, cfg, args)
    report = RunReport(args.method, _echo(cfg, args.method), args.trials, errors, times, a.shape, opt, inc, theory, warns)
    payload = report.to_dict()
    _emit(dumps(payload), args.json)
    if args.json not in (None, "-"):
        print(f"{args.method}: mean err {payload['err']['mean']:.6g} (std {payload['err']['std']:.3g}) over {args.trials} trials")
    return EXIT_OK


def _compare_rows(a, args):
    methods = list(ALL_METHODS) if args.method == "all" else [m.strip() for m in args.method.split(",")]
    unknown = [m for m in methods if m not in ALL_METHODS]
    if unknown:
        raise InvalidArgumentError(f"unknown method(s) {unknown}; expected a subset of {ALL_METHODS}")
    sweep = args.p_sweep or [args.p]
    base = _config(args, p=max(sweep), q=args.q)
    rows = []
    for method in methods:
        cells = [(p, max(p, args.q) if args.q is not None else None) for p in sweep] if method == "sketchy_core_svd" else [(None, None)]
        for p, q in cells:
            cfg = _config(args, p=p, q=q) if p is not None else base
            errors, times, warns = run_method(a, method, cfg, args.trials)
            rows.append((p, RunReport(method, _echo(cfg, method), args.trials, errors, times, a.shape, warnings=warns)))
    return rows


def cmd_compare(args):
    a = _load(args)
    rows = _compare_rows(a, args)
    opt = None
    if args.optimal:
        _guard(a.shape, args.max_dense, "exact spectrum")
        sigma = np.linalg.svd(as_matrix(a, "A"), compute_uv=False)
        opt = float(SpectrumSummary(sigma, *a.shape).scree()[args.rank]) if args.rank < sigma.size else 0.0
    dicts = []
    for _, rep in rows:
        rep.optimal_err = opt
        dicts.append(rep.to_dict())
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "compare",
        "shape": list(a.shape),
        "trials": args.trials,
        "optimal_err": opt,
        "rows": dicts,
    }
    header = ["method", "p", "q", "r", "k", "s", "trials", "err_mean", "err_std",
              "t_sketch", "t_qr", "t_core", "t_truncate", "t_total"]
    table = []
    for (p, _), d in zip(rows, dicts):
        c, t = d["config"], d["times"]
        table.append([
            d["method"], _fmt(p), _fmt(c["q"] if p is not None else None), c["r"], c["k"], c["s"], d["trials"],
            _fmt(d["err"]["mean"]), _fmt(d["err"]["std"]),
            *(_fmt(t.get(ph)) for ph in ("sketch", "qr", "core", "truncate", "total")),
        ])
    text = _csv_text(header, table)
    if args.json:
        _emit(dumps(payload), args.json)
    if args.csv:
        _emit(text, args.csv)
    if not args.json and not args.csv:
        _emit(text, None)
    return EXIT_OK


def cmd_scree(args):
    a = _load(args)
    _guard(a.shape, args.max_dense, "scree")
    sigma = np.linalg.svd(as_matrix(a, "A"), compute_uv=False)
    curve = SpectrumSummary(sigma, *a.shape).scree()
    r_max = curve.size - 1 if args.r_max is None else min(int(args.r_max), curve.size - 1)
    if r_max < 0:
        raise InvalidArgumentError(f"r-max must be nonnegative, got {args.r_max}")
    text = _csv_text(["r", "scree"], [[r, format(float(curve[r]), ".17g")] for r in range(r_max + 1)])
    _emit(text, args.csv)
    return EXIT_OK


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    checks = run_suites(names, seed=args.seed, trials=args.trials)
    passed = all(c["passed"] for c in checks)
    payload = {"schema_version": SCHEMA_VERSION, "kind": "verify", "seed": args.seed, "passed": passed, "checks": checks}
    if args.json:
        _emit(dumps(payload), args.json)
    for c in checks:
        line = f"{'PASS' if c['passed'] else 'FAIL'} {c['suite']}: {c['criterion']}"
        print(line, file=sys.stderr if args.json in (None, "-") else sys.stdout)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_bench(args):
    _guard((args.M, args.N), args.max_dense, "bench")
    L = min(args.M, args.N, args.spectrum_length)
    a = generate(SynthSpec(M=args.M, N=args.N, family="polynomial", length=L, alpha=1.0, seed=args.seed))
    sweep = args.p_sweep or [0.2, 0.4, 0.6, 0.8, 1.0]
    phases = ("sketch", "qr", "core", "truncate", "build", "total")
    rows = []

    def medians(fn, cfg):
        samples = [fn(a, cfg, RandomStream(args.seed).child(i))[1] for i in range(args.reps)]
        return [statistics.median(getattr(t, ph) for t in samples) for ph in phases]

    for p in sweep:
        q = p if args.q is None else max(p, args.q)
        cfg = _config(args, p=p, q=q)
        cfg.sample_counts(args.M, args.N)
        rows.append(["sketchy_core_svd", _fmt(p), _fmt(q), args.reps, *(format(v, ".6g") for v in medians(sketchy_core_svd, cfg))])
    cfg = _config(args, p=1.0, q=1.0)
    rows.append(["sketchy_svd", "-", "-", args.reps, *(format(v, ".6g") for v in medians(sketchy_svd, cfg))])
    _emit(_csv_text(["method", "p", "q", "reps", *phases], rows), args.csv)
    return EXIT_OK


def _synth_spec(args):
    if args.spec:
        try:
            d = json.loads(Path(args.spec).read_text())
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"{args.spec}: line {exc.lineno}, column {exc.colno}: {exc.msg}")
        return SynthSpec.from_dict(d)
    if not args.preset:
        raise InvalidArgumentError("synth needs --preset or --spec")
    kw = {"seed": args.seed}
    for name in ("M", "N"):
        if getattr(args, name) is not None:
            kw[name] = getattr(args, name)
    if args.rank is not None:
        kw["r"] = args.rank
    return PRESETS[args.preset](**kw)


def cmd_synth(args):
    spec = _synth_spec(args)
    _guard((spec.M, spec.N), args.max_dense, "synth")
    a = generate(spec)
    mio.save_matrix(args.output, a, args.format)
    if args.json:
        _emit(dumps({"schema_version": SCHEMA_VERSION, "kind": "synth", "spec": spec.to_dict()}), args.json)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _add_input(p):
    p.add_argument("--input", "-i", required=True, help="matrix file (.skcm/.bin, .csv, .mtx)")
    p.add_argument("--format", choices=mio.FORMATS, help="override the format inferred from the extension")


def _add_config(p, rank_required=True):
    p.add_argument("--rank", "-r", type=int, required=rank_required, help="target rank r")
    p.add_argument("-k", type=int, help="range sketch size (default 4r+1)")
    p.add_argument("-s", type=int, help="core sketch size (default 2k+1)")
    p.add_argument("-p", type=float, default=1.0, help="row/column sampling ratio for the range sketches")
    p.add_argument("-q", type=float, help="sampling ratio for the core sketch (default p)")
    p.add_argument("--map", choices=("gaussian", "sparse-sign"), default="gaussian", help="random map family")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-dense", type=int, default=DEFAULT_MAX_DENSE,
                   help="largest entry count allowed for full-SVD or generation work")


def build_parser():
    parser = _Parser(prog="sketchycore", description="Sketch-based rank-r SVD from subsampled rows and columns.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("approx", help="run one method and report its error")
    _add_input(p)
    _add_config(p)
    _add_common(p)
    p.add_argument("--method", "-m", choices=ALL_METHODS, default="sketchy_core_svd")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--json", help="write the report here (default stdout)")
    p.add_argument("--optimal", action="store_true", help="also report the optimal rank-r error (full SVD)")
    p.add_argument("--incoherence", action="store_true", help="also report mu and nu (full SVD)")
    p.add_argument("--theory", action="store_true", help="also evaluate the error bounds (full SVD)")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("compare", help="run several methods with a shared configuration")
    _add_input(p)
    _add_config(p)
    _add_common(p)
    p.add_argument("--method", "-m", default="all", help="'all' or a comma-separated list")
    p.add_argument("--p-sweep", type=_floats, help="comma-separated p values for sketchy_core_svd")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--json")
    p.add_argument("--csv")
    p.add_argument("--optimal", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("scree", help="exact scree curve (full SVD)")
    _add_input(p)
    _add_common(p)
    p.add_argument("--r-max", type=int)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_scree)

    p = sub.add_parser("verify", help="run the lemma and theorem check suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--trials", type=int, help="override each suite's trial count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="per-phase median timings across a p sweep")
    p.add_argument("--M", type=int, default=5000)
    p.add_argument("--N", type=int, default=2000)
    _add_config(p)
    _add_common(p)
    p.add_argument("--p-sweep", type=_floats)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--spectrum-length", type=int, default=300)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write a synthetic matrix to a file")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=tuple(PRESETS))
    src.add_argument("--spec", help="JSON file with SynthSpec fields")
    p.add_argument("--M", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--rank", "-r", type=int)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--format", choices=mio.FORMATS)
    p.add_argument("--json", help="also write the generating spec here")
    _add_common(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        if getattr(args, "trials", None) is not None and args.trials < 1:
            raise InvalidArgumentError(f"trials >= 1 violated: {args.trials}")
        return args.func(args)
    except mio.MatrixFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvalidArgumentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
