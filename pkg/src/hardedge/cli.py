"""Command-line front end: hardedge {kernel,det,coeffs,asymfit,verify,sample}."""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys
import warnings
from importlib import metadata
from pathlib import Path

import numpy as np

from .errors import HardEdgeError, ValidationError
from .models import ModelParams, c_constants, ell_schedule

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


def _version() -> str:
    try:
        return metadata.version("hardedge")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# ---------------------------------------------------------------- parsing helpers

def parse_grid(spec: str) -> np.ndarray:
    """'a:b:n' (linear), 'a:b:nlog' (geometric) or a comma list."""
    spec = spec.strip()
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            geo = n.endswith("log")
            n = int(n[:-3] if geo else n)
            a, b = float(a), float(b)
            if n < 1:
                raise ValueError
            if geo:
                if a <= 0 or b <= 0:
                    raise ValidationError("log grids need positive end points")
                return np.geomspace(a, b, n)
            return np.linspace(a, b, n)
        return np.array([float(v) for v in spec.split(",") if v.strip()])
    except ValueError:
        raise ValidationError(f"cannot parse grid {spec!r}; use a:b:n, a:b:nlog or a comma list") from None


def load_model(path: str) -> ModelParams:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read model file {path!r}: {exc.strerror}") from None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ModelParams.from_json(text)


def fmt(v) -> str:
    return f"{v:.17g}" if isinstance(v, (float, np.floating)) else str(v)


def manifest(args, params: ModelParams | None, **knobs) -> dict:
    return {
        "command": args.command,
        "argv": args.argv,
        "model": params.to_dict() if params is not None else None,
        "knobs": knobs,
        "seed": knobs.get("seed"),
        "version": _version(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _emit_csv(args, header, rows, man: dict):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    _emit(args, buf.getvalue(), man)


def _emit_json(args, obj, man: dict):
    _emit(args, json.dumps({**obj, "manifest": man}, indent=2) + "\n", None)


def _emit(args, text: str, man: dict | None):
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        if man is not None:
            out.with_name(out.name + ".manifest.json").write_text(json.dumps(man, indent=2) + "\n")
    else:
        sys.stdout.write(text)
        if man is not None and args.manifest:
            Path(args.manifest).write_text(json.dumps(man, indent=2) + "\n")


def _cx(z) -> list:
    return [float(np.real(z)), float(np.imag(z))]


# ---------------------------------------------------------------- commands

def cmd_kernel(args) -> int:
    from .kernels import KernelEvaluator, _check_real

    p = load_model(args.model)
    xs, ys = parse_grid(args.x), parse_grid(args.y or args.x)
    ev = KernelEvaluator.build(p, mode=args.mode, order=args.order)
    Kc = ev.kernel_matrix(xs, ys, check=False)
    K = _check_real(Kc, "kernel")
    rows = [(x, y, K[i, j], abs(Kc[i, j].imag)) for i, x in enumerate(xs) for j, y in enumerate(ys)]
    _emit_csv(args, ["x", "y", "K", "abs_im_residual"], rows, manifest(args, p, mode=args.mode, order=args.order))
    return EXIT_OK


def cmd_det(args) -> int:
    from .fredholm import DetCurve, det_hs_arb, det_hs_contour, det_nystrom, logdet_derivative
    from .kernels import KernelEvaluator

    p = load_model(args.model)
    grid = np.unique(parse_grid(args.s_grid))
    if args.method == "nystrom":
        ev = KernelEvaluator.build(p)
        res = [det_nystrom(ev, float(s), args.order) for s in grid]
        dld = [logdet_derivative(ev, float(s), args.order)[0] for s in grid]
    else:
        if args.method == "hs":
            res = [det_hs_contour(p, float(s)) for s in grid]
        else:
            res = [det_hs_arb(p, float(s), order=args.order) for s in grid]
        ld = np.array([r.logdet for r in res])
        dld = np.gradient(ld, grid) if len(grid) > 2 else np.full(len(grid), np.nan)
    curve = DetCurve(p, res)
    rows = [(r.s, r.det, r.logdet, d, r.err, r.order, r.method) for r, d in zip(res, dld)]
    _emit_csv(args, ["s", "det", "logdet", "dlogdet", "err", "order", "method"], rows,
              manifest(args, p, method=args.method, order=args.order, monotone=curve.is_monotone()))
    return EXIT_OK


def cmd_coeffs(args) -> int:
    from .asymptotics import asymptotic_data, p1_leading, thm12_closed, thm12_reconstructed

    p = load_model(args.model)
    d = asymptotic_data(p)
    closed, recon = thm12_closed(p), thm12_reconstructed(p)
    agree = all(abs(u - v) <= 1e-12 * max(1.0, abs(u)) for u, v in zip(closed, recon))
    out = {
        "rho": closed[0],
        "a": {"closed": closed[1], "reconstructed": recon[1]},
        "b": {"closed": closed[2], "reconstructed": recon[2]},
        "paths_agree": agree,
        "phi": d.phi, "b1": _cx(d.b1), "b2": _cx(d.b2), "g1": _cx(d.g1), "ell": _cx(d.ell),
        "p1_leading": _cx(p1_leading(d)),
        "c": c_constants(p).as_dict(),
    }
    _emit_json(args, out, manifest(args, p))
    return EXIT_OK if agree else EXIT_NUMERIC


def _read_curve(path: str):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read curve {path!r}: {exc.strerror}") from None
    if not rows or "s" not in rows[0] or "logdet" not in rows[0]:
        raise ValidationError("curve CSV needs columns s and logdet")
    s = np.array([float(r["s"]) for r in rows])
    ld = np.array([float(r["logdet"]) for r in rows])
    order = np.argsort(s)
    return s[order], ld[order]


def cmd_asymfit(args) -> int:
    from .asymptotics import fit_lndet, fit_lndet_free_exponent, tail_fit, thm12_closed

    p = load_model(args.model)
    s, ld = _read_curve(args.curve)
    rho, a, b = thm12_closed(p)
    tf = tail_fit((s, ld), (rho, a, b))
    full = fit_lndet(s, ld, rho)
    free = fit_lndet_free_exponent(s, ld, 2 * rho)
    out = {
        "theory": {"rho": rho, "a": a, "b": b},
        "tail_fit": {"c": tf.c, "c_stderr": tf.c_err, "C": tf.C, "lnC_stderr": tf.lnC_err,
                     "residuals": tf.residuals.tolist()},
        "full_fit": {"a": full.a, "b": full.b, "c": full.c, "k": full.k, "stderr": full.errors,
                     "rel_err_a": abs(full.a - a) / a},
        "free_exponent_fit": {"exponent": free.exponent, "a": free.a, "b": free.b, "c": free.c,
                              "rel_err_exponent": abs(free.exponent - 2 * rho) / (2 * rho)},
    }
    _emit_json(args, out, manifest(args, p, curve=args.curve))
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify

    suites = verify.MODULE_SUITES if args.suite == "all" else [args.suite]
    failures = []
    for name in suites:
        for res in verify.run_suite(name, echo=print if args.verbose else None):
            if not res.passed:
                failures.append(res)
                print(res.line())
    if args.out:
        Path(args.out).write_text(json.dumps({"failures": [f.line() for f in failures]}, indent=2) + "\n")
    return EXIT_OK if not failures else EXIT_NUMERIC


def cmd_sample(args) -> int:
    from .ensemble import SampleConfig, ks_distance, sample, survival_interpolant
    from .fredholm import det_nystrom
    from .kernels import KernelEvaluator

    p = load_model(args.model)
    if p.j == 2 and p.ell is None:
        p = p.with_ell(ell_schedule(p, args.n, args.growth))
    emp = sample(SampleConfig(p, args.n, args.samples, args.seed))
    summary = {"n": args.n, "samples": args.samples, "seed": args.seed, "cn": emp.cn,
               "quantiles": emp.quantiles()}
    if args.det_curve:
        s, ld = _read_curve(args.det_curve)
        surv = lambda x: np.interp(x, np.concatenate([[0.0], s]), np.concatenate([[1.0], np.exp(ld)]), right=0.0)
        summary["ks_vs_curve"] = ks_distance(emp, surv)
    elif args.ks_limit:
        ev = KernelEvaluator.build(p)
        lim = survival_interpolant(lambda t: det_nystrom(ev, t).det, float(emp.samples[-1]))
        summary["ks_vs_limit"] = ks_distance(emp, lim)
    man = manifest(args, p, n=args.n, samples=args.samples, seed=args.seed)
    _emit_csv(args, ["scaled_smallest_eigenvalue"], [(v,) for v in emp.samples], man)
    summary_path = Path(args.summary) if args.summary else (Path(args.out).with_suffix(".summary.json") if args.out else None)
    text = json.dumps({**summary, "manifest": man}, indent=2) + "\n"
    if summary_path:
        summary_path.write_text(text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardedge", description=__doc__)
    ap.add_argument("--version", action="version", version=f"hardedge {_version()}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        if model:
            p.add_argument("--model", required=True, help="model JSON file")
        p.add_argument("--out", help="output file (default: stdout); a manifest is written beside it")
        p.add_argument("--manifest", help="manifest path when writing to stdout")

    p = sub.add_parser("kernel", help="evaluate the limiting kernel on a grid")
    common(p)
    p.add_argument("--x", required=True, help="x grid: a:b:n, a:b:nlog or a comma list")
    p.add_argument("--y", help="y grid (default: same as x)")
    p.add_argument("--mode", choices=["separable", "directdouble"], default="separable")
    p.add_argument("--order", type=int, default=16, help="Gauss-Legendre points per panel")
    p.set_defaults(fn=cmd_kernel)

    p = sub.add_parser("det", help="Fredholm determinants det(1 - K|[0,s]) on an s grid")
    common(p)
    p.add_argument("--s-grid", required=True, help="a:b:n, a:b:nlog or a comma list")
    p.add_argument("--method", choices=["nystrom", "hs", "hs-arb"], default="nystrom")
    p.add_argument("--order", type=int, default=64, help="Nystrom size, or points per panel for hs-arb")
    p.set_defaults(fn=cmd_det)

    p = sub.add_parser("coeffs", help="rho, a, b by both derivations and the steepest-descent data")
    common(p)
    p.set_defaults(fn=cmd_coeffs)

    p = sub.add_parser("asymfit", help="fit a det curve against the large-s expansion")
    common(p)
    p.add_argument("--curve", required=True, help="CSV written by `det`")
    p.set_defaults(fn=cmd_asymfit)

    p = sub.add_parser("verify", help="run invariant batteries")
    common(p, model=False)
    from .verify import SUITES
    p.add_argument("--suite", choices=["all", *SUITES], default="all",
                   help="'all' runs the module invariants, 'acceptance' the full acceptance battery")
    p.add_argument("-v", "--verbose", action="store_true", help="print every check, not only failures")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("sample", help="Monte-Carlo smallest eigenvalues")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--growth", choices=["2n", "sqrt"], default="2n", help="ell growth for truncated models")
    p.add_argument("--det-curve", help="det CSV to compute the Kolmogorov distance against")
    p.add_argument("--ks-limit", action="store_true", help="Kolmogorov distance to the limiting law")
    p.add_argument("--summary", help="summary JSON path (default: beside --out, else stderr)")
    p.set_defaults(fn=cmd_sample)
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    threads = os.environ.get("HARDEDGE_THREADS")
    if threads is not None and not threads.isdigit():
        print("hardedge: HARDEDGE_THREADS must be a positive integer", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.fn(args)
    except HardEdgeError as exc:
        print(f"hardedge {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"hardedge {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
