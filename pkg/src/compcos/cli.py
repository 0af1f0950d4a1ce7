"""Command-line front end: ``compcos {mu,classify,verify,transform}``.

Exit codes: 0 success, 1 a verification case failed, 2 bad arguments or an
input outside the domain of the requested operation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from .cone import as_index, batch_composite_power
from .config import ConfigError, load_config, suite_samples
from .errors import CompcosError
from .geometry import is_frame, sample_stiefel, transpose
from .mc import McEstimate, RngStream
from .special import in_L_set, injectivity_classify, multiplier_mu, stiefel_volume
from .suites import SUITES, run_suites
from .transforms import constant_one, cosine_transform, make_h_polynomial

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_k_range(text: str) -> list[int]:
    """``"a..b"`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError as exc:
        raise UsageError(f"bad k range {text!r}") from exc
    if hi < lo or lo < 0:
        raise UsageError(f"empty or negative k range {text!r}")
    return list(range(lo, hi + 1))


def parse_lambda(text: str, m: int) -> list[np.ndarray]:
    """One index ``"l1,l2,..."`` (a scalar is broadcast) or a constant grid ``"start:stop:step"``."""
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise UsageError("grid step must be positive")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [np.full(m, start + i * step, dtype=complex) for i in range(max(count, 0))]
        parts = [complex(p.replace(" ", "").replace("i", "j")) for p in text.split(",")]
        return [as_index(parts, m)]
    except ValueError as exc:
        raise UsageError(f"bad lambda {text!r}: {exc}") from exc


def _write_text(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fmt_real(x: float) -> str:
    return repr(float(x))


# -- verbs -------------------------------------------------------------------

def cmd_mu(args, cfg) -> int:
    if not (1 <= args.m < args.n):
        raise UsageError("need 1 <= m < n")
    ks = parse_k_range(args.k)
    lams = [lam for text in (args.lam or ["0"]) for lam in parse_lambda(text, args.m)]
    if not lams:
        raise UsageError("empty lambda grid")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"lambda_{j}" for j in range(1, args.m + 1)] + ["k", "kind", "value_re", "value_im", "order"])
    for lam in lams:
        for k in ks:
            tv = multiplier_mu(lam, k, args.n)
            comps = [_fmt_real(c.real) if c.imag == 0 else str(c) for c in lam]
            writer.writerow(comps + [k, tv.kind, _fmt_real(tv.value.real), _fmt_real(tv.value.imag), tv.order])
    _write_text(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_classify(args, cfg) -> int:
    lam = parse_lambda(args.lam, args.m)
    if len(lam) != 1:
        raise UsageError("classify takes a single lambda")
    verdict = injectivity_classify(lam[0], args.n)
    out = {"n": args.n, "m": args.m, "lambda": [[c.real, c.imag] for c in lam[0]], **verdict.to_dict()}
    _write_text(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    seed = args.seed if args.seed is not None else cfg.get("seed", 42)
    partitions = args.partitions if args.partitions is not None else cfg.get("partitions", 1)
    if partitions < 1:
        raise UsageError("partitions must be positive")
    if args.samples is not None:
        if args.samples < 2:
            raise UsageError("samples must be at least 2")
        cfg = {**cfg, "samples": args.samples}
    report = run_suites(names, seed, lambda s: suite_samples(cfg, s), partitions)
    _write_text(report.to_json() + "\n", args.out)
    failed = [c.name for c in report.cases if not c.passed]
    for name in failed:
        print(f"FAIL {name}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_FAIL


def load_frame_table(path: str, n: int, m: int):
    """Read ``v_11, ..., v_nm, f_re[, f_im]`` rows (``v`` row-major) into frames and values."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    if not rows:
        raise UsageError("frame table is empty")
    width = n * m
    data = []
    for r in rows:
        if len(r) not in (width + 1, width + 2):
            raise UsageError(f"frame table rows need {width + 1} or {width + 2} columns")
        data.append([float(x) for x in r])
    v = np.array([d[:width] for d in data]).reshape(-1, n, m)
    f = np.array([d[width] + 1j * (d[width + 1] if len(d) > width + 1 else 0.0) for d in data])
    if not all(is_frame(x, 1e-8) for x in v):
        raise UsageError("frame table contains matrices without orthonormal columns")
    return v, f


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def cmd_transform(args, cfg) -> int:
    n, m = args.n, args.m
    if not (1 <= m <= n):
        raise UsageError("need 1 <= m <= n")
    lams = parse_lambda(args.lam, m)
    if len(lams) != 1:
        raise UsageError("transform takes a single lambda")
    lam = lams[0]
    if not in_L_set(lam) and not args.force:
        raise UsageError("lambda lies outside the convergence set (use --force to override)")
    if not in_L_set(lam):
        print("warning: lambda lies outside the convergence set; the estimate has no limit", file=sys.stderr)
    seed = args.seed if args.seed is not None else cfg.get("seed", 42)
    samples = args.samples if args.samples is not None else cfg.get("samples.default", 1_000_000)
    partitions = args.partitions if args.partitions is not None else cfg.get("partitions", 1)
    rng = RngStream(seed, 0)
    if args.u:
        try:
            u = np.array([float(x) for x in args.u.split(",")]).reshape(n, m)
        except ValueError as exc:
            raise UsageError("--u needs n*m comma-separated numbers (row-major)") from exc
        if not is_frame(u, 1e-10):
            raise UsageError("--u must have orthonormal columns")
    else:
        u = sample_stiefel(n, m, rng.child(0).generator())

    fname = args.f
    if fname.startswith("file:"):
        v, fv = load_frame_table(fname[5:], n, m)
        b = transpose(v) @ u
        vals = fv * batch_composite_power(transpose(b) @ b, lam)
        good = np.isfinite(vals)
        mean = vals[good].mean()
        err = max(vals[good].real.std(ddof=1), vals[good].imag.std(ddof=1)) / np.sqrt(good.sum())
        sigma = stiefel_volume(n, m)
        est = McEstimate(complex(mean * sigma), float(err * sigma), int(vals.size), int((~good).sum()))
    else:
        if fname == "one":
            f = constant_one()
        elif fname.startswith("hpoly:"):
            try:
                k = int(fname[6:])
            except ValueError as exc:
                raise UsageError(f"bad degree in {fname!r}") from exc
            f = make_h_polynomial(n, m, k).as_angle_function()
        else:
            raise UsageError(f"unknown function {fname!r}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore" if args.force else "default")
            est = cosine_transform(f, lam, u, samples, rng.child(1), partitions, force=args.force)
    out = {
        "n": n,
        "m": m,
        "lambda": [[c.real, c.imag] for c in lam],
        "u": u.tolist(),
        "f": fname,
        "estimate": est.to_dict(),
        "inside_convergence_set": in_L_set(lam),
    }
    _write_text(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # the verb parsers use SUPPRESS defaults so a flag given before the verb
    # is not reset by the verb's own copy of it
    none = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=none, help="base seed (u64)")
    p.add_argument("--samples", type=int, default=none, help="Monte Carlo draws per estimate")
    p.add_argument("--partitions", type=int, default=none, help="sample-stream partitions")
    p.add_argument("--out", default=none, help="output path (default: stdout)")
    p.add_argument("--config", default=none, help="flat key = value config file")
    p.add_argument("--force", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="allow lambda outside the convergence set")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    parser = argparse.ArgumentParser(
        prog="compcos", description=__doc__.splitlines()[0], parents=[_global_flags(suppress=False)]
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("mu", parents=[common], help="multiplier table as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", required=True, help="degree range a..b or a single degree")
    p.add_argument("--lambda", dest="lam", action="append",
                   help="index l1,l2,... or constant grid start:stop:step (repeatable)")
    p.set_defaults(func=cmd_mu)

    p = sub.add_parser("classify", parents=[common], help="injectivity verdict as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--lambda", dest="lam", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", required=True, choices=list(SUITES) + ["all"])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("transform", parents=[common], help="estimate a composite cosine transform")
    p.add_argument("--f", required=True, help="one | hpoly:k | file:<path>")
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--u", default=None, help="frame entries, row-major, comma-separated (default: random)")
    p.set_defaults(func=cmd_transform)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (UsageError, ConfigError, CompcosError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
