"""Limiting and finite-n hard-edge kernels as contour integrals, plus closed-form oracles.

The double integral factorizes through 1/(v-u) = int_0^1 w^(v-u-1) dw into

    K(x, y) = int_0^1 P(x w) Q(y w) dw,
    P(xi)  = (1/2 pi i) int_gamma F(u) xi^-u du,
    Q(eta) = (1/2 pi i) int_gamma~ eta^(v-1) / F(v) dv,

so a kernel matrix is a product of two tall matrices.  For large arguments
P and Q are evaluated on contours through their saddle points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .contours import (SADDLE_MIN_HEIGHT, Contour, QuadratureGrid, SymbolGeometry,
                       build_limit_contours, gauss_legendre, p_contour, q_contour,
                       quadrature_on, symbol_geometry)
from .errors import ModeMismatch, ToleranceError, ValidationError
from .models import ModelParams, log_F_scaled, scaling_constant
from .specialfn import bessel_j, bessel_jp, wright_bessel

TWO_PI_I = 2j * math.pi
IM_TOL = 1e-9
BUCKET = 1.15  # ratio between arguments sharing one saddle contour


def _check_real(vals: np.ndarray, what: str) -> np.ndarray:
    vals = np.asarray(vals)
    scale = np.maximum(1.0, np.abs(vals.real))
    bad = np.abs(vals.imag) > IM_TOL * scale
    if np.any(bad):
        worst = float(np.max(np.abs(vals.imag) / scale))
        raise ToleranceError(f"{what}: imaginary residue {worst:.3g} exceeds {IM_TOL}")
    return vals.real


@dataclass(frozen=True)
class TGrid:
    """Nodes/weights for int_0^1 f(w) dw after w = e^-t (weights include e^-t)."""

    w: np.ndarray
    weights: np.ndarray


def t_grid(geom: SymbolGeometry, x_max: float, order: int = 16, t_max: float | None = None) -> TGrid:
    sigma = geom.zero_min - geom.pole_max - 1.0
    T = t_max if t_max is not None else 40.0 / (sigma + 1.0)
    zs = abs(geom.zstar)
    # local oscillation frequency of P(x w) Q(y w) in t
    omega = lambda t: 4 * geom.rho * zs * (x_max * math.exp(-t)) ** geom.rho
    edges = [0.0]
    while edges[-1] < T:
        t = edges[-1]
        h = min(1.0, 2.0 / max(omega(t), 1e-30), 0.1 + 0.25 * t)
        edges.append(min(T, t + h))
    x, wq = gauss_legendre(order)
    a, b = np.array(edges[:-1]), np.array(edges[1:])
    t = ((a + b)[:, None] + (b - a)[:, None] * x[None, :]).ravel() / 2
    wt = ((b - a)[:, None] / 2 * wq[None, :]).ravel()
    w = np.exp(-t)
    return TGrid(w, wt * w)


@dataclass(frozen=True)
class KernelEvaluator:
    """Evaluates a hard-edge kernel built from a symbol F (given through ln F)."""

    params: ModelParams
    gamma_grid: QuadratureGrid
    gamma_tilde_grid: QuadratureGrid
    mode: str = "separable"
    geom: SymbolGeometry | None = None
    margin: float = 0.25
    order: int = 16
    saddle: bool = True
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def build(cls, params: ModelParams, mode: str = "separable", order: int = 16, margin: float = 0.25,
              log_f: Callable | None = None, saddle: bool = True, x_max: float | None = None) -> "KernelEvaluator":
        """Standard contours serve arguments up to the saddle switch; beyond it
        (or up to `x_max` when saddle contours are disabled) saddle contours or
        longer rays take over."""
        mode = mode.lower().replace("_", "")
        if mode not in ("separable", "directdouble"):
            raise ValidationError(f"unknown kernel mode {mode!r}")
        geom = symbol_geometry(params, log_f)
        switch = (SADDLE_MIN_HEIGHT / abs(geom.zstar)) ** (1 / geom.rho) * BUCKET
        top = switch if saddle else max(switch, x_max or 10.0)
        gam, til = build_limit_contours(params, margin, (1e-3, top), geom=geom)
        return cls(params, quadrature_on(gam, order), quadrature_on(til, order), mode, geom, margin, order, saddle)

    @classmethod
    def finite_n(cls, params: ModelParams, n: int, **kw) -> "KernelEvaluator":
        """Evaluator of (1/c_n) K_n(x/c_n, y/c_n)."""
        return cls.build(params, log_f=lambda z: log_F_scaled(z, params, n), **kw)

    # ---------------------------------------------------------- transforms
    @property
    def _switch(self) -> float:
        if not self.saddle:
            return math.inf
        return (SADDLE_MIN_HEIGHT / abs(self.geom.zstar)) ** (1 / self.geom.rho)

    def _grid_for(self, which: str, bucket: int) -> QuadratureGrid:
        key = (which, bucket)
        if key not in self._cache:
            arg = BUCKET ** (bucket + 0.5)
            c = (p_contour if which == "P" else q_contour)(self.geom, arg, self.margin)
            if c is None:
                grid = self.gamma_grid if which == "P" else self.gamma_tilde_grid
            else:
                grid = quadrature_on(c, self.order)
            self._cache[key] = grid
        return self._cache[key]

    def _base(self, which: str, grid: QuadratureGrid):
        key = ("base", which, id(grid))
        if key not in self._cache:
            lf = self.geom.log_f(grid.nodes)
            self._cache[key] = (lf if which == "P" else -lf, grid)
        return self._cache[key][0]

    def _transform(self, which: str, arg) -> np.ndarray:
        arg = np.asarray(arg, dtype=float)
        if np.any(arg <= 0):
            raise ValidationError("transform argument must be > 0")
        flat = arg.ravel()
        out = np.empty(flat.shape, dtype=complex)
        la = np.log(flat)
        buckets = np.where(flat < self._switch, -10**9, np.floor(la / math.log(BUCKET)).astype(np.int64))
        for b in np.unique(buckets):
            idx = np.nonzero(buckets == b)[0]
            grid = (self.gamma_grid if which == "P" else self.gamma_tilde_grid) if b == -10**9 \
                else self._grid_for(which, int(b))
            base = self._base(which, grid)
            z = grid.nodes
            for chunk in np.array_split(idx, max(1, len(idx) * len(z) // 4_000_000 + 1)):
                if which == "P":
                    expo = base[None, :] - np.outer(la[chunk], z)
                else:
                    expo = base[None, :] + np.outer(la[chunk], z - 1)
                out[chunk] = np.exp(expo) @ grid.weights / TWO_PI_I
        return out.reshape(arg.shape)

    def p_complex(self, xi) -> np.ndarray:
        return self._transform("P", xi)

    def q_complex(self, eta) -> np.ndarray:
        return self._transform("Q", eta)

    # ---------------------------------------------------------- kernel
    def kernel_matrix(self, x, y, check: bool = True) -> np.ndarray:
        """K(x_i, y_j) for 1-d arrays x, y."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValidationError("kernel arguments must be > 0")
        if self.mode == "directdouble":
            K = self._direct(x, y)
        else:
            tg = t_grid(self.geom, float(max(x.max(), y.max())), self.order)
            P = self.p_complex(np.outer(x, tg.w))
            Q = self.q_complex(np.outer(y, tg.w))
            K = (P * tg.weights[None, :]) @ Q.T
        return _check_real(K, "kernel") if check else K

    def _direct(self, x, y):
        gu, gv = self.gamma_grid, self.gamma_tilde_grid
        if not gu.parent.crossing < gv.parent.crossing:
            raise ModeMismatch("gamma must cross the real axis left of gamma-tilde")
        u, v = gu.nodes, gv.nodes
        lf_u, lf_v = self._base("P", gu), self._base("Q", gv)
        Au = np.exp(lf_u[None, :] - np.outer(np.log(x), u)) * gu.weights
        Bv = np.exp(lf_v[None, :] + np.outer(np.log(y), v - 1)) * gv.weights
        C = 1.0 / (v[None, :] - u[:, None])
        return (Au @ C @ Bv.T) / TWO_PI_I ** 2

    def __call__(self, x: float, y: float) -> float:
        return float(self.kernel_matrix([x], [y])[0, 0])


# ---------------------------------------------------------------- scalar ops

def p_transform(xi: float, ev: KernelEvaluator) -> float:
    if xi <= 0:
        raise ValidationError("xi must be > 0")
    return float(_check_real(ev.p_complex(np.array([xi])), "P")[0])


def q_transform(eta: float, ev: KernelEvaluator) -> float:
    if eta <= 0:
        raise ValidationError("eta must be > 0")
    return float(_check_real(ev.q_complex(np.array([eta])), "Q")[0])


def kernel_eval(x: float, y: float, ev: KernelEvaluator) -> float:
    return ev(x, y)


def bessel_kernel(x, y, alpha: float):
    """Hard-edge Bessel kernel; the diagonal and near-diagonal use the integral
    form (1/2) int_0^1 J(sqrt x t) J(sqrt y t) t dt, which is exact there."""
    x_in, y_in = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    xb, yb = np.broadcast_arrays(np.atleast_1d(x_in), np.atleast_1d(y_in))
    if np.any(xb <= 0) or np.any(yb <= 0):
        raise ValidationError("bessel_kernel needs x, y > 0")
    sx, sy = np.sqrt(xb), np.sqrt(yb)
    near = np.abs(xb - yb) <= 1e-3 * (xb + yb)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (bessel_j(alpha, sx) * sy * bessel_jp(alpha, sy)
               - bessel_j(alpha, sy) * sx * bessel_jp(alpha, sx)) / (2 * (xb - yb))
    if np.any(near):
        t, w = _jacobi01(48, 2 * alpha + 1)
        a, b = sx[near][:, None] * t, sy[near][:, None] * t
        # J_a(z) z^-a is entire: integrate it against the Jacobi weight t^(2a+1)
        fa = special.jv(alpha, a) / np.power(t, alpha)
        fb = special.jv(alpha, b) / np.power(t, alpha)
        out[near] = 0.5 * (fa * fb) @ w
    if x_in.ndim == 0 and y_in.ndim == 0:
        return float(out[0])
    return out.reshape(np.broadcast(x_in, y_in).shape)


def _jacobi01(n: int, a: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi on [0,1] with weight t^a."""
    x, w = special.roots_jacobi(n, 0.0, a)
    return (x + 1) / 2, w / 2 ** (a + 1)


def kernel3_wright(x: float, y: float, alpha: float, theta: float, order: int = 60) -> float:
    """theta (xy)^(alpha/2) int_0^1 J_{(alpha+1)/theta, 1/theta}(x t) J_{alpha+1, theta}((y t)^theta) t^alpha dt.

    The Wright series alternate, so accuracy degrades for arguments of a few
    tens; this is an oracle for moderate x, y."""
    if x <= 0 or y <= 0 or alpha <= -1 or theta <= 0:
        raise ValidationError("kernel3_wright needs x, y > 0, alpha > -1, theta > 0")
    # t = tau^k makes (y t)^theta smooth when theta = p/k is a simple fraction
    frac = Fraction(theta).limit_denominator(12)
    k = frac.denominator if abs(float(frac) - theta) < 1e-12 else 1
    tau, w = _jacobi01(order, k * alpha + k - 1)
    t, w = tau ** k, k * w
    f1 = wright_bessel((alpha + 1) / theta, 1 / theta, x * t)
    f2 = wright_bessel(alpha + 1, theta, (y * t) ** theta)
    return float(theta * (x * y) ** (alpha / 2) * np.dot(w, f1 * f2))


def kernel_finite_n(x: float, y: float, params: ModelParams, n: int, ev: KernelEvaluator | None = None) -> float:
    """K_n(x, y) of the size-n ensemble (j=3 includes the x^(a/2) y^(-a/2) gauge
    of the limit form)."""
    ev = ev or KernelEvaluator.finite_n(params, n)
    cn = scaling_constant(params, n)
    return cn * ev(cn * x, cn * y)


@dataclass(frozen=True)
class ConvergenceReport:
    n_list: tuple
    errors: tuple
    order: float
    ratios: tuple

    def as_dict(self) -> dict:
        return {"n": list(self.n_list), "error": list(self.errors), "order": self.order, "ratios": list(self.ratios)}


def convergence_study(params: ModelParams, n_list: Sequence[int], grid: Sequence[tuple], order: int = 16) -> ConvergenceReport:
    """Sup-grid error of (1/c_n) K_n(x/c_n, y/c_n) against the limiting kernel."""
    n_list = tuple(int(n) for n in n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValidationError("n_list must be increasing")
    xs = np.array([g[0] for g in grid], dtype=float)
    ys = np.array([g[1] for g in grid], dtype=float)
    ux, uy = np.unique(xs), np.unique(ys)
    ix, iy = np.searchsorted(ux, xs), np.searchsorted(uy, ys)
    ref = KernelEvaluator.build(params, order=order).kernel_matrix(ux, uy)[ix, iy]
    errs = []
    for n in n_list:
        Kn = KernelEvaluator.finite_n(params, n, order=order).kernel_matrix(ux, uy)[ix, iy]
        errs.append(float(np.max(np.abs(Kn - ref))))
    ratios = tuple(a / b for a, b in zip(errs, errs[1:]))
    if len(n_list) > 1:
        slope = np.polyfit(np.log(n_list), np.log(errs), 1)[0]
    else:
        slope = float("nan")
    return ConvergenceReport(n_list, tuple(errs), float(-slope), ratios)
