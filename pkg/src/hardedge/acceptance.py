"""Acceptance battery: one check per criterion, each returning a CriterionResult."""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .asymptotics import (asymptotic_data, fit_derivative, fit_lndet, fit_lndet_free_exponent,
                          g1_tail_limit, g_boundary, g_value, h_value, i_integrals, lemma31_check,
                          thm12_closed, thm12_coeffs)
from .errors import ConsistencyError, HardEdgeError
from .ensemble import SampleConfig, binomial_band_check, ks_distance, sample, survival_interpolant
from .fredholm import det_curve_hs, det_hs_contour, det_nystrom, logdet_derivative
from .kernels import KernelEvaluator, bessel_kernel, convergence_study
from .models import ModelParams


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0
    budget: float | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        head = f"criterion {self.number:2d}" if self.number else "check"
        return f"{head} {status}  {self.title}  [{self.seconds:.1f}s]  {info}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, complex):
        return f"{v.real:.4g}{v.imag:+.4g}j"
    return str(v)


def _timed(number: int, title: str, budget: float | None):
    def deco(fn: Callable[..., tuple[bool, dict]]):
        def run(**kw) -> CriterionResult:
            t0 = time.perf_counter()
            try:
                ok, detail = fn(**kw)
            except HardEdgeError as exc:
                ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
            dt = time.perf_counter() - t0
            if budget is not None and dt > budget:
                ok = False
                detail["over_budget"] = f"{dt:.0f}s > {budget:.0f}s"
            return CriterionResult(number, title, ok, detail, dt, budget)
        run.number = number
        run.title = title
        return run
    return deco


def _quiet_params(fn, *a, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*a, **kw)


# representative parameter sets, one per variant
def variant_sets() -> dict:
    return {
        "ginibre r=2 nu=(0,0)": ModelParams.ginibre((0, 0)),
        "truncated r=2 q=1 nu=(0,1) mu=(2)": ModelParams.truncated((0, 1), (2,)),
        "muttalib-borodin alpha=0.5 theta=2": ModelParams.muttalib_borodin(0.5, 2.0),
    }


@_timed(1, "Bessel reduction of K3 at theta=1", 30.0)
def criterion1():
    x = np.array([0.5, 1.0, 1.5, 2.0])
    worst = 0.0
    for alpha in (0.0, 0.5, 1.0):
        ev = KernelEvaluator.build(ModelParams.muttalib_borodin(alpha, 1.0))
        K = ev.kernel_matrix(x, x)
        B = 4 * bessel_kernel(4 * x[:, None], 4 * x[None, :], alpha)
        worst = max(worst, float(np.max(np.abs(K - B))))
    return worst <= 1e-8, {"max_err": worst, "tol": 1e-8}


@_timed(2, "det(1-K) = det(1-H_s) at s in {0.5, 1, 2}", 120.0)
def criterion2():
    worst = 0.0
    for name, p in variant_sets().items():
        ev = KernelEvaluator.build(p)
        for s in (0.5, 1.0, 2.0):
            a = det_nystrom(ev, s).det
            b = det_hs_contour(p, s).det
            worst = max(worst, abs(a - b))
    return worst <= 1e-6, {"max_diff": worst, "tol": 1e-6}


@_timed(3, "closed-form special values of (rho, a, b)", None)
def criterion3():
    checks = []
    _, a, _ = thm12_coeffs(ModelParams.ginibre((0, 0)))
    checks.append(abs(a - 9 / 2 ** (7 / 3)))
    _, _, b = _quiet_params(lambda: thm12_coeffs(ModelParams.ginibre((-0.5, 0))))
    checks.append(abs(b + 3 / 2 ** (5 / 3)))
    _, a, b = thm12_coeffs(ModelParams.muttalib_borodin(0.0, 2.0))
    checks += [abs(a - 9 / 2 ** (11 / 3)), abs(b + 3 / 2 ** (7 / 3))]
    for alpha in (0.0, 0.5, 1.0, 2.5):
        rho, a, b = thm12_coeffs(ModelParams.muttalib_borodin(alpha, 1.0))
        checks += [abs(rho - 0.5), abs(a - 1), abs(b - 2 * alpha)]
    worst = max(checks)
    return worst <= 1e-12, {"max_err": worst, "tol": 1e-12}


def random_params(rng: np.random.Generator) -> ModelParams:
    j = rng.integers(1, 4)
    if j == 3:
        return ModelParams.muttalib_borodin(float(rng.uniform(-0.9, 4.0)), float(rng.uniform(0.2, 5.0)))
    r = int(rng.integers(1, 6))
    nu = tuple(float(v) for v in rng.uniform(0, 5, r))
    if j == 1:
        return _quiet_params(ModelParams.ginibre, nu)
    q = int(rng.integers(0, r))
    mu = tuple(nu[k] + float(rng.uniform(0.1, 5)) for k in range(q))
    return _quiet_params(ModelParams.truncated, nu, mu)


@_timed(4, "dual-path coefficient identity on 1000 random draws", 10.0)
def criterion4(seed: int = 12345, draws: int = 1000):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(draws):
        try:
            thm12_coeffs(random_params(rng), tol=1e-12)
        except ConsistencyError:
            bad += 1
    return bad == 0, {"draws": draws, "failures": bad}


@_timed(5, "Bessel d/ds ln det fit on [15, 60]", 300.0)
def criterion5(N: int = 128, points: int = 10):
    ev = KernelEvaluator.build(ModelParams.muttalib_borodin(0.0, 1.0))
    s = np.linspace(15, 60, points)
    d = np.array([logdet_derivative(ev, float(t), N)[0] for t in s])
    A, B, _ = fit_derivative(s, d, 0.5)
    ok = abs(A - 1) <= 0.01 and abs(B) <= 0.05
    return ok, {"A": A, "B": B, "N": N}


@_timed(6, "product case r=2 ln det fit on [1e2, 1e4]", 1200.0)
def criterion6(order: int = 56, points: int = 12):
    p = ModelParams.ginibre((0, 0))
    rho, a, b = thm12_closed(p)
    s = np.geomspace(1e2, 1e4, points)
    curve = det_curve_hs(p, s, order=order)
    fit = fit_lndet(curve.s, curve.logdet, rho)
    free = fit_lndet_free_exponent(curve.s, curve.logdet, 2 * rho)
    a_rel = abs(fit.a - a) / a
    e_rel = abs(free.exponent - 2 * rho) / (2 * rho)
    ok = a_rel <= 0.03 and e_rel <= 0.02 and bool(np.all(np.isfinite(curve.logdet)))
    return ok, {"a_fit": fit.a, "a_rel_err": a_rel, "b_fit": fit.b, "exponent": free.exponent,
                "exp_rel_err": e_rel, "lndet(1e4)": float(curve.logdet[-1])}


@_timed(7, "I-integrals: quadrature vs closed forms", None)
def criterion7():
    worst = 0.0
    for p in variant_sets().values():
        d = asymptotic_data(p)
        q, c = i_integrals(d), i_integrals(d, "closed")
        worst = max(worst, max(abs(u - v) for u, v in zip(q, c)))
    return worst <= 1e-10, {"max_err": worst, "tol": 1e-10}


def lemma_sets() -> dict:
    return {
        "bessel": ModelParams.muttalib_borodin(0.0, 1.0),
        "ginibre r=2": ModelParams.ginibre((0, 0)),
        "ginibre r=3": ModelParams.ginibre((0, 0, 0)),
        "truncated r=2 q=1": ModelParams.truncated((0, 1), (2,)),
        "theta=2 (mirrored)": ModelParams.muttalib_borodin(0.0, 2.0),
        "theta=2 alpha=0.5 (mirrored)": ModelParams.muttalib_borodin(0.5, 2.0),
    }


@_timed(8, "phase-function sign conditions, 1000 samples per contour", None)
def criterion8(n_samples: int = 1000):
    bad, worst = 0, math.inf
    for p in lemma_sets().values():
        rep = lemma31_check(asymptotic_data(p), n_samples=n_samples, raise_on_fail=False)
        bad += rep.violations
        worst = min(worst, min(rep.margins.values()))
    return bad == 0, {"violations": bad, "min_margin": worst}


@_timed(9, "g-function: jump, normalisation at infinity, g1", None)
def criterion9():
    jump = zg = tail = zg_extrap = 0.0
    for p in lemma_sets().values():
        d = asymptotic_data(p)
        t = np.linspace(0.02, 0.98, 25)
        z = np.concatenate([d.b1 * (1 - t), d.b2 * t])
        gp, gm = g_boundary(z, d)
        jump = max(jump, float(np.max(np.abs(gp + gm - 1j * h_value(z, d) + d.ell))))
        zeta = 1e3 * np.exp(0.7j)
        zg = max(zg, abs(zeta * g_value(np.array([zeta]), d)[0] - d.g1))
        # the same limit with the O(1/zeta) remainder removed by Richardson steps
        zs = zeta * 2.0 ** np.arange(4)
        v = list(zs * g_value(zs, d))
        for m in range(1, 4):
            v = [(2 ** m * v[i + 1] - v[i]) / (2 ** m - 1) for i in range(len(v) - 1)]
        zg_extrap = max(zg_extrap, abs(v[0] - d.g1))
        tail = max(tail, abs(g1_tail_limit(d) - d.g1))
    ok = jump <= 1e-8 and zg <= 1e-8 and tail <= 1e-8
    return ok, {"jump": jump, "|zeta g - g1| at 1e3": zg, "extrapolated": zg_extrap, "g1_tail": tail}


@_timed(10, "finite-n kernel convergence n=20 -> 40", None)
def criterion10():
    x = [0.5, 1.0, 1.5, 2.0]
    grid = [(a, b) for a in x for b in x]
    rep = convergence_study(ModelParams.ginibre((0,)), [20, 40], grid)
    return rep.ratios[0] >= 1.6, {"err20": rep.errors[0], "err40": rep.errors[1], "ratio": rep.ratios[0]}


@_timed(11, "Monte-Carlo scaling limit r=1, nu=0", 600.0)
def criterion11(seed: int = 2026, samples: int = 20_000):
    p = ModelParams.ginibre((0,))
    s_pts = np.linspace(0.1, 3.0, 10)
    ev30 = KernelEvaluator.finite_n(p, 30)
    exact = [det_nystrom(ev30, float(t)).det for t in s_pts]
    band = binomial_band_check(sample(SampleConfig(p, 30, samples, seed)), s_pts, exact)
    ev = KernelEvaluator.build(p)
    limit = survival_interpolant(lambda t: det_nystrom(ev, t).det, 15.0)
    ks = {n: ks_distance(sample(SampleConfig(p, n, samples, seed + n)), limit) for n in (20, 40)}
    ok = band["ok"] and ks[40] < ks[20]
    return ok, {"max_z": max(band["z"]), "ks20": ks[20], "ks40": ks[40]}


CRITERIA = [criterion1, criterion2, criterion3, criterion4, criterion5, criterion6,
            criterion7, criterion8, criterion9, criterion10, criterion11]


def run(numbers=None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    out = []
    for fn in CRITERIA:
        if numbers and fn.number not in numbers:
            continue
        res = fn()
        if echo:
            echo(res.line())
        out.append(res)
    return out
