"""Large-gap asymptotics: endpoints, the g-function, I-integrals, coefficients and fits."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.integrate import quad_vec

from .contours import build_sigma_contours, gauss_legendre
from .errors import BranchError, ConsistencyError, FitError, PathError, SignViolation, ValidationError
from .geometry import endpoints, h_func
from .models import CConstants, ModelParams, c_constants, log_F, scaling_info

__all__ = [
    "AsymptoticData", "asymptotic_data", "endpoints", "r_func", "r_boundary", "g_second",
    "g_series_coeffs", "g_prime", "g_value", "g_boundary", "h_value", "G_value", "log_G",
    "ell_constant", "Lemma31Report", "lemma31_check", "IIntegrals", "i_integrals",
    "thm12_closed", "thm12_reconstructed", "thm12_coeffs", "g1_coeff", "g1_tail_limit",
    "p1_leading", "p1_quadrature", "TailFit", "tail_fit", "LnDetFit", "fit_lndet",
    "fit_lndet_free_exponent", "fit_derivative",
]

ANCHOR = 1.0e4          # |zeta_0| where the series tail takes over
SERIES_TERMS = 40
PATH_TOL = 1e-14         # abs/rel tolerance of the adaptive path integrals


@dataclass(frozen=True)
class AsymptoticData:
    params: ModelParams
    rho: float
    tau: float
    a: float
    b: float
    phi: float
    b1: complex
    b2: complex
    cconst: CConstants
    g1: complex
    ell: complex = complex("nan")
    fitted_c: float | None = None
    fitted_C: float | None = None
    fit_ci: dict = field(default_factory=dict)

    @property
    def csum(self) -> float:
        return self.cconst.c1 + self.cconst.c2

    @property
    def y(self) -> float:
        return self.b1.imag

    @property
    def mirrored(self) -> bool:
        return self.b1.imag < 0

    def as_dict(self) -> dict:
        cx = lambda z: [z.real, z.imag]
        out = {"rho": self.rho, "tau": self.tau, "a": self.a, "b": self.b, "phi": self.phi,
               "b1": cx(self.b1), "b2": cx(self.b2), "g1": cx(self.g1), "ell": cx(self.ell),
               "c": self.cconst.as_dict()}
        if self.fitted_c is not None:
            out.update(fitted_c=self.fitted_c, fitted_C=self.fitted_C, fit_ci=self.fit_ci)
        return out


def asymptotic_data(params: ModelParams, with_ell: bool = True) -> AsymptoticData:
    cc = c_constants(params)
    info = scaling_info(params)
    phi, b1, b2 = endpoints(cc)
    rho, a, b = thm12_closed(params)
    data = AsymptoticData(params, info.rho, info.tau, a, b, phi, b1, b2, cc, g1_coeff_from(b1, cc))
    if with_ell:
        data = replace(data, ell=ell_constant(data))
    return data


def g1_coeff_from(b1: complex, cc: CConstants) -> complex:
    return 1j * b1.real ** 2 * (cc.c1 + cc.c2) / 8


def g1_coeff(data: AsymptoticData) -> complex:
    """g(zeta) = g1/zeta + O(zeta^-2) at infinity."""
    return g1_coeff_from(data.b1, data.cconst)


# ---------------------------------------------------------------- r(zeta)

def _on_cut(z, b1, b2, tol=1e-12):
    """Distance test for the bent segment b1 -> 0 -> b2; returns (mask, segment index)."""
    scale = abs(b1)
    seg = np.zeros(z.shape, dtype=int)
    mask = np.zeros(z.shape, dtype=bool)
    for k, b in ((1, b1), (2, b2)):
        t = np.clip((z * np.conj(b)).real / (scale * scale), 0.0, 1.0)
        d = np.abs(z - t * b)
        hit = d <= tol * scale
        seg = np.where(hit & ~mask, k, seg)
        mask |= hit
    return mask, seg


def _in_triangle(z, b1, b2):
    def side(p, q):
        return ((q - p).conjugate() * (z - p)).imag
    s1, s2, s3 = side(b1, 0j), side(0j, b2), side(b2, b1)
    return ((s1 > 0) & (s2 > 0) & (s3 > 0)) | ((s1 < 0) & (s2 < 0) & (s3 < 0))


def _r_raw(z, b1, b2, off=None):
    # `off` = (z - b1, z - b2) when the caller knows them without cancellation
    d1, d2 = off if off is not None else (z - b1, z - b2)
    d2 = np.array(d2, dtype=complex)
    if b1.imag != 0:
        # on the segment b1 -> b2 itself take the limit from outside the triangle
        d2.imag[(d2.imag == 0) & (d2.real < 0)] = math.copysign(0.0, b1.imag)
    v = np.sqrt(d1) * np.sqrt(d2)
    return np.where(_in_triangle(z, b1, b2), -v, v)


def r_func(zeta, data: AsymptoticData):
    """sqrt((zeta-b1)(zeta-b2)) with its cut on Sigma_5 and r ~ zeta at infinity."""
    z = np.asarray(zeta, dtype=complex)
    if np.any(_on_cut(z, data.b1, data.b2)[0]):
        raise BranchError("r is evaluated on its cut; use r_boundary")
    return _r_raw(z, data.b1, data.b2)


def _tangent(seg, b1, b2):
    return np.where(seg == 1, -b1 / abs(b1), b2 / abs(b2))


def r_boundary(zeta, data: AsymptoticData, side: int = 1, off=None):
    """Boundary values r_+ (side=+1, left of b1 -> 0 -> b2) or r_- on Sigma_5."""
    b1, b2 = data.b1, data.b2
    z = np.asarray(zeta, dtype=complex)
    mask, seg = _on_cut(z, b1, b2)
    if not np.all(mask):
        raise BranchError("boundary values need points on Sigma_5")
    d1, d2 = off if off is not None else (z - b1, z - b2)
    v = np.sqrt(d1) * np.sqrt(d2)
    dist = np.minimum(np.minimum(np.abs(z - b1), np.abs(z - b2)), np.abs(z))
    probe = z + 1j * side * 1e-4 * np.maximum(dist, 1e-300) * _tangent(seg, b1, b2)
    ref = _r_raw(probe, b1, b2)
    return np.where((ref * np.conj(v)).real >= 0, v, -v)


# ---------------------------------------------------------------- g-function

def _g2_from_r(z, r, data: AsymptoticData):
    # -iC/2 (1/z - (z - iy)/(z r)) with the cancellation done analytically:
    # r^2 - (z - iy)^2 = -(Re b1)^2
    x2 = data.b1.real ** 2
    return 0.5j * data.csum * x2 / (z * r * (r + z - 1j * data.y))


def g_second(zeta, data: AsymptoticData, side: int | None = None):
    """g''; on Sigma_5 pass side=+1/-1 for the boundary values."""
    z = np.asarray(zeta, dtype=complex)
    r = r_boundary(z, data, side) if side else r_func(z, data)
    return _g2_from_r(z, r, data)


def g_series_coeffs(data: AsymptoticData, n_terms: int = SERIES_TERMS) -> np.ndarray:
    """e_k (k = 0..n_terms+2) with g'' = sum_{k>=3} e_k zeta^{-k}."""
    beta, p = 1j * data.y, data.b1 * data.b2
    n = n_terms + 3
    a = np.zeros(n, dtype=complex)
    a[0], a[1] = 1.0, beta
    for m in range(1, n - 1):
        a[m + 1] = ((2 * m + 1) * beta * a[m] - m * p * a[m - 1]) / (m + 1)
    e = np.zeros(n, dtype=complex)
    for k in range(3, n):
        e[k] = -0.5j * data.csum * (-a[k - 1] + 1j * data.y * a[k - 2])
    return e


def _series(z, data, n_terms=SERIES_TERMS):
    e = g_series_coeffs(data, n_terms)
    k = np.arange(3, len(e))
    z = np.asarray(z, dtype=complex)[..., None]
    g1 = np.sum(e[k] * z ** (1 - k) / (1 - k), axis=-1)
    g0 = np.sum(e[k] * z ** (2 - k) / ((k - 1) * (k - 2)), axis=-1)
    return g0, g1


def _graded_rule(order=20, levels=14, toward=1.0):
    """Composite Gauss-Legendre on [0, 1], panels halving toward `toward`."""
    x, w = gauss_legendre(order)
    edges = [0.0] + [1.0 - 0.5 ** k for k in range(1, levels)] + [1.0]
    if toward == 0.0:
        edges = sorted(1.0 - e for e in edges)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes.append(lo + (hi - lo) * (x + 1) / 2)
        weights.append(w * (hi - lo) / 2)
    return np.concatenate(nodes), np.concatenate(weights)


def _path_integrals(z, fn, toward: float):
    """(int g'' dxi, int (z - xi) g'' dxi) over s in [0, 1].

    fn(s, sel) returns (xi, dxi/ds, g''(xi)) for the points z[sel], with s
    broadcasting against them.  Two graded Gauss-Legendre rules are compared
    first; points where they disagree (paths grazing Sigma_5) are redone with
    adaptive quadrature."""
    n = len(z)
    sel = np.arange(n)

    def fixed(order):
        t, w = _graded_rule(order, toward=toward)
        xi, dxi, g2 = fn(t[:, None], sel)
        v = g2 * dxi * w[:, None]
        return v.sum(axis=0), ((z[None, :] - xi) * v).sum(axis=0)

    a1, a2 = fixed(20)
    i1, i2 = fixed(30)
    scale = 1.0 + np.abs(z)
    bad = np.flatnonzero(np.maximum(np.abs(a1 - i1), np.abs(a2 - i2)) > PATH_TOL * scale)
    if bad.size:
        zb = z[bad]

        def f(s):
            xi, dxi, g2 = fn(s, bad)
            v = g2 * dxi
            return np.concatenate([v, (zb - xi) * v])

        out, _ = quad_vec(f, 0.0, 1.0, epsabs=PATH_TOL * (1.0 + np.abs(zb).max()), epsrel=PATH_TOL,
                          norm="max", limit=4000)
        i1[bad], i2[bad] = out[:bad.size], out[bad.size:]
    return i1, i2


def _radial(z, data):
    """(g, g') by a radial path from the anchor |zeta_0| = ANCHOR inward."""
    z = np.asarray(z, dtype=complex)
    out_g = np.empty(z.shape, dtype=complex)
    out_gp = np.empty(z.shape, dtype=complex)
    far = np.abs(z) >= 3 * abs(data.b1)
    if np.any(far):
        out_g[far], out_gp[far] = _series(z[far], data)
    near = ~far
    if np.any(near):
        zn = z[near]
        mu0 = np.abs(zn) / ANCHOR
        z0 = zn / mu0
        g0, gp0 = _series(z0, data)

        def fn(sig, sel):
            zs, m0 = zn[sel], mu0[sel]
            one_mu = (1 - m0) * sig ** 2
            mu = 1 - one_mu                              # mu = 1 at the target
            xi = zs / mu
            dxi = zs / mu ** 2 * 2 * (1 - m0) * sig      # d xi along the inward direction
            # xi - b = (zs - b + b (1 - mu)) / mu stays accurate when zs is an endpoint
            off = tuple((zs - b + b * one_mu) / mu for b in (data.b1, data.b2))
            return xi, dxi, _g2_from_r(xi, _r_raw(xi, data.b1, data.b2, off), data)

        i1, i2 = _path_integrals(zn, fn, toward=0.0)
        out_g[near] = g0 + gp0 * (zn - z0) - i2
        out_gp[near] = gp0 - i1
    return out_g, out_gp


def _from_base(z, base, gb, gpb, data, side=None):
    """(g, g') along the straight line base -> z, with base an endpoint b_k."""
    z = np.asarray(z, dtype=complex)
    d = z - base

    def fn(t, sel):
        ds = d[sel]
        xi = base + ds * t ** 2   # t^2 absorbs the square-root behaviour at base
        off = tuple(base - b + ds * t ** 2 for b in (data.b1, data.b2))
        r = r_boundary(xi, data, side, off) if side else _r_raw(xi, data.b1, data.b2, off)
        return xi, 2 * t * ds, _g2_from_r(xi, r, data)

    i1, i2 = _path_integrals(z, fn, toward=1.0)
    return gb + gpb * d + i2, gpb + i1


def _endpoint_values(data):
    g, gp = _radial(np.array([data.b1, data.b2]), data)
    return {1: (data.b1, g[0], gp[0]), 2: (data.b2, g[1], gp[1])}


def _evaluate(zeta, data, side=None, path="auto"):
    z = np.atleast_1d(np.asarray(zeta, dtype=complex))
    mask, seg = _on_cut(z, data.b1, data.b2)
    g = np.empty(z.shape, dtype=complex)
    gp = np.empty(z.shape, dtype=complex)
    if np.any(mask):
        if side not in (1, -1):
            raise PathError("zeta lies on Sigma_5: pass side=+1 or side=-1")
        ends = _endpoint_values(data)
        for k in (1, 2):
            sel = mask & (seg == k)
            if np.any(sel):
                base, gb, gpb = ends[k]
                g[sel], gp[sel] = _from_base(z[sel], base, gb, gpb, data, side)
    off = ~mask
    if np.any(off):
        zo = z[off]
        if path in ("auto", "radial"):
            g[off], gp[off] = _radial(zo, data)
        elif path in ("b1", "b2"):
            k = 1 if path == "b1" else 2
            base, gb, gpb = _endpoint_values(data)[k]
            if _segment_hits_cut(base, zo, data):
                raise PathError(f"straight path from {path} crosses Sigma_5")
            g[off], gp[off] = _from_base(zo, base, gb, gpb, data)
        else:
            raise ValidationError(f"unknown path {path!r}")
    return g.reshape(np.shape(zeta)), gp.reshape(np.shape(zeta))


def _segment_hits_cut(base, z, data):
    """True where the segment base -> z meets Sigma_5 away from `base`."""
    z = np.asarray(z, dtype=complex)
    d = z - base
    hit = np.zeros(z.shape, dtype=bool)
    cross = lambda a, b: (np.conj(a) * b).imag
    for e0, e1 in ((data.b1, 0j), (0j, data.b2)):
        e = e1 - e0
        den = cross(d, e)
        ok = np.abs(den) > 1e-14 * np.abs(d) * abs(e)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = cross(e0 - base, e) / den   # position along base -> z
            u = cross(e0 - base, d) / den   # position along the edge
        hit |= ok & (t > 1e-9) & (t <= 1 + 1e-12) & (u >= -1e-12) & (u <= 1 + 1e-12)
    return bool(np.any(hit))


def g_value(zeta, data: AsymptoticData, side: int | None = None, path: str = "auto"):
    """g(zeta) = int_inf^zeta g'. Off Sigma_5 `path` picks 'radial', 'b1' or 'b2'."""
    return _evaluate(zeta, data, side, path)[0]


def g_prime(zeta, data: AsymptoticData, side: int | None = None, path: str = "auto"):
    return _evaluate(zeta, data, side, path)[1]


def g_boundary(zeta, data: AsymptoticData):
    """(g_+, g_-) on Sigma_5."""
    return g_value(zeta, data, 1), g_value(zeta, data, -1)


def _check_axis(z):
    if np.any((np.asarray(z).real == 0) & (np.asarray(z).imag != 0)):
        raise BranchError("h has its cuts on the imaginary axis")


def h_value(zeta, data_or_cc):
    cc = data_or_cc.cconst if isinstance(data_or_cc, AsymptoticData) else data_or_cc
    _check_axis(zeta)
    return h_func(zeta, cc)


def log_G(zeta, s: float, data: AsymptoticData):
    """ln G = ln F(i s^rho zeta + tau) - i s^rho (zeta ln s - h(zeta))."""
    z = np.asarray(zeta, dtype=complex)
    _check_axis(z)
    S = s ** data.rho
    return log_F(1j * S * z + data.tau, data.params) - 1j * S * (z * math.log(s) - h_func(z, data.cconst))


def G_value(zeta, s: float, data: AsymptoticData):
    return np.exp(log_G(zeta, s, data))


def log_G_leading(zeta, s: float, data: AsymptoticData):
    cc = data.cconst
    z = np.asarray(zeta, dtype=complex)
    return cc.c4 * math.log(s) + cc.c5 * np.log(1j * z) + cc.c6 * np.log(-1j * z) + cc.c7


def ell_constant(data: AsymptoticData, from_end: int = 1) -> complex:
    """ell = i h(b) - 2 g(b) at b = b1 (or b2)."""
    b = data.b1 if from_end == 1 else data.b2
    g = _radial(np.array([b]), data)[0][0]
    return complex(1j * h_func(b, data.cconst) - 2 * g)


def _phase_fn(z, data, side=None):
    return 2 * g_value(z, data, side) - 1j * h_func(z, data.cconst) + data.ell


# ---------------------------------------------------------------- sign conditions of the phase function

@dataclass(frozen=True)
class Lemma31Report:
    eps: float
    n_samples: int
    mirrored: bool
    margins: dict       # condition -> min of the value that must be positive
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _contour_points(contour, n, skip_end):
    """n points along a contour, avoiding the endpoint b_k (and 0 for Sigma_5)."""
    segs = contour.segments
    pts = []
    per = max(1, n // len(segs))
    for a, b in segs:
        t = (np.arange(per) + 0.5) / per
        pts.append(a + (b - a) * t)
    return np.concatenate(pts)[:n]


def lemma31_check(data: AsymptoticData, eps: float = math.pi / 20, n_samples: int = 1000,
                  ray_len: float | None = None, raise_on_fail: bool = True) -> Lemma31Report:
    """Sample Re[g+ - g-] > 0 on Sigma_5, Re(2g - ih + ell) < 0 on Sigma_1,2 and > 0 on Sigma_3,4."""
    sig = build_sigma_contours(data.b1, data.b2, eps, ray_len)
    margins, bad = {}, 0
    worst = None
    for k, c in enumerate(sig, start=1):
        z = _contour_points(c, n_samples, True)
        if k == 5:
            z = z[np.abs(z) > 1e-9 * abs(data.b1)]
            gp, gm = g_boundary(z, data)
            val = (gp - gm).real
        else:
            val = _phase_fn(z, data).real
            if k in (1, 2):
                val = -val
        margins[f"sigma{k}"] = float(val.min())
        nbad = int(np.sum(val <= 0))
        if nbad and worst is None:
            worst = complex(z[np.argmin(val)])
        bad += nbad
    rep = Lemma31Report(eps, n_samples, data.mirrored, margins, bad)
    if bad and raise_on_fail:
        raise SignViolation(f"{bad} sign violations, margins {margins}", zeta=worst)
    return rep


# ---------------------------------------------------------------- I-integrals and p1

class IIntegrals(NamedTuple):
    I1: complex
    I2: complex
    I3: complex


def _sigma5_rule(data: AsymptoticData, levels: int = 40, order: int = 20):
    """Nodes/weights for int_{Sigma_5} f(xi) dxi/(2 pi i) with r_+ resolved at b_k.

    Each segment is parametrised from its endpoint b_k, xi = b_k (1 - t^2), with
    panels graded geometrically toward xi = 0 (log singularity)."""
    t, w = _graded_rule(order, levels)
    nodes, weights = [], []
    for k, b in ((1, data.b1), (2, data.b2)):
        xi = b * (1 - t ** 2)
        dxi = -2 * t * b * w                 # from b_k toward 0
        # Sigma_5 runs b1 -> 0 (same as parametrisation) and 0 -> b2 (reversed)
        sgn = 1.0 if k == 1 else -1.0
        keep = np.abs(xi) > 0
        nodes.append(xi[keep])
        weights.append(sgn * dxi[keep] / (2j * math.pi))
    return np.concatenate(nodes), np.concatenate(weights)


def i_integrals(data: AsymptoticData, method: str = "quadrature") -> IIntegrals:
    """I1, I2, I3 by quadrature along Sigma_5 ('quadrature') or in closed form ('closed')."""
    if method == "closed":
        ab, y = abs(data.b1), data.y
        i3 = 0.5j * (ab - y)
        return IIntegrals(0j, i3 - 1j * ab, i3)
    if method != "quadrature":
        raise ValidationError("method is 'quadrature' or 'closed'")
    xi, w = _sigma5_rule(data)
    base = (xi - 1j * data.y) / r_boundary(xi, data, 1) * w
    return IIntegrals(complex(base.sum()), complex((base * np.log(1j * xi)).sum()),
                      complex((base * np.log(-1j * xi)).sum()))


def p1_leading(data: AsymptoticData) -> complex:
    """s-independent part of p1 from the closed-form I-integrals."""
    cc = data.cconst
    ab, y = abs(data.b1), data.y
    return complex(-1j * cc.c5 * ab + 0.5j * (cc.c5 + cc.c6) * (ab - y))


def p1_quadrature(data: AsymptoticData, s: float = 1.0e6) -> complex:
    """p1(s) = int_{Sigma_5} (xi - i Im b1) ln G(xi) / r_+(xi) dxi/(2 pi i).

    The branch of ln G on each half of Sigma_5 is the one matching its large-s
    expansion with principal logarithms."""
    xi, w = _sigma5_rule(data)
    lg = log_G(xi, s, data)
    ref = log_G_leading(xi, s, data)
    mid_ok = np.abs(xi) * s ** data.rho > 10.0
    out = np.empty_like(lg)
    for half in (xi.real < 0, xi.real >= 0) if abs(data.b1.real) > 0 else (np.ones(xi.shape, bool),):
        sel = half
        k = np.round(np.median(((lg - ref)[sel & mid_ok]).imag) / (2 * math.pi))
        out[sel] = lg[sel] - 2j * math.pi * k
    return complex(np.sum((xi - 1j * data.y) * out / r_boundary(xi, data, 1) * w))


# ---------------------------------------------------------------- coefficients

def thm12_closed(params: ModelParams) -> tuple[float, float, float]:
    """(rho, a, b) in closed form."""
    if params.j in (1, 2):
        r = params.r - params.q
        rho = 1.0 / (r + 1)
        a = r ** ((1 - r) / (1 + r)) * (r + 1) ** 2 / 4
        b = (r + 1) * r ** (-r / (r + 1)) * (sum(params.nu) - sum(params.mu))
        return rho, a, b
    th, al = params.theta, params.alpha
    rho = th / (th + 1)
    a = th ** ((1 - 3 * th) / (1 + th)) * (1 + th) ** 2 / 4
    b = (th + 1) / 2 * th ** (-2 * th / (th + 1)) * (1 + 2 * al - th)
    return rho, a, b


def thm12_reconstructed(params: ModelParams) -> tuple[float, float, float]:
    """(rho, a, b) rebuilt from the endpoints, g1 and the leading part of p1."""
    data = asymptotic_data(params, with_ell=False)
    a = (-1j * data.g1 / (2 * data.rho)).real
    b = (1j * p1_leading(data) / data.rho).real
    return data.rho, a, b


def thm12_coeffs(params: ModelParams, tol: float = 1e-12) -> tuple[float, float, float]:
    """Closed-form (rho, a, b), checked against the endpoint reconstruction."""
    closed = thm12_closed(params)
    recon = thm12_reconstructed(params)
    for name, u, v in zip(("rho", "a", "b"), closed, recon):
        if abs(u - v) > tol * max(1.0, abs(u)):
            raise ConsistencyError(f"{name}: closed form {u!r} vs reconstruction {v!r}")
    return closed


def g1_tail_limit(data: AsymptoticData, radius: float = 1.0e3, levels: int = 5,
                  direction: complex = cmath.exp(0.3j)) -> complex:
    """lim zeta^3 g''(zeta)/2 by Richardson extrapolation over radius * 2^k."""
    zs = radius * direction * 2.0 ** np.arange(levels)
    vals = list(zs ** 3 * g_second(zs, data) / 2)
    # the error is a power series in 1/zeta
    for m in range(1, levels):
        f = 2.0 ** m
        vals = [(f * vals[i + 1] - vals[i]) / (f - 1) for i in range(len(vals) - 1)]
    return complex(vals[0])


# ---------------------------------------------------------------- fits

@dataclass(frozen=True)
class TailFit:
    c: float
    C: float
    c_err: float
    lnC_err: float
    residuals: np.ndarray


def _lstsq(A, y):
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    dof = max(1, len(y) - A.shape[1])
    sigma2 = float(res @ res) / dof
    cov = sigma2 * np.linalg.pinv(A.T @ A)
    return coef, np.sqrt(np.maximum(np.diag(cov), 0.0)), res


def _curve_arrays(curve):
    if hasattr(curve, "s"):
        return np.asarray(curve.s, float), np.asarray(curve.logdet, float)
    s, ld = curve
    return np.asarray(s, float), np.asarray(ld, float)


def tail_fit(curve, coeffs: Sequence[float]) -> TailFit:
    """Fit ln det + a s^{2 rho} - b s^rho = c ln s + ln C.

    `curve` is a DetCurve or an (s, logdet) pair. Raises FitError when the
    residual does not shrink toward large s."""
    rho, a, b = coeffs
    s, ld = _curve_arrays(curve)
    if len(s) < 4 or s.max() < 10 * s.min():
        raise FitError("need at least 4 points spanning one decade of s")
    if not np.all(np.isfinite(ld)):
        raise FitError("non-finite log-determinants")
    y = ld + a * s ** (2 * rho) - b * s ** rho
    A = np.column_stack([np.log(s), np.ones_like(s)])
    coef, err, res = _lstsq(A, y)
    order = np.argsort(s)
    half = len(s) // 2
    lo, hi = np.abs(res[order[:half]]).max(), np.abs(res[order[half:]]).max()
    scale = 1e-9 * (1 + np.abs(ld).max())
    if hi > lo and hi > scale:
        raise FitError(f"residual grows with s ({lo:.3g} -> {hi:.3g})")
    return TailFit(float(coef[0]), float(math.exp(coef[1])), float(err[0]), float(err[1]), res)


@dataclass(frozen=True)
class LnDetFit:
    a: float
    b: float
    c: float
    k: float
    exponent: float
    errors: dict
    residuals: np.ndarray


def fit_lndet(s, logdet, rho: float) -> LnDetFit:
    """Least squares of ln det on -a s^{2 rho} + b s^rho + c ln s + k."""
    s, y = np.asarray(s, float), np.asarray(logdet, float)
    A = np.column_stack([-s ** (2 * rho), s ** rho, np.log(s), np.ones_like(s)])
    coef, err, res = _lstsq(A, y)
    return LnDetFit(*map(float, coef), 2 * rho, dict(zip("abck", map(float, err))), res)


def fit_lndet_free_exponent(s, logdet, beta0: float, bracket: float = 0.5) -> LnDetFit:
    """As fit_lndet with s^{2 rho} -> s^beta, s^rho -> s^{beta/2} and beta free."""
    from scipy.optimize import minimize_scalar

    s, y = np.asarray(s, float), np.asarray(logdet, float)

    def fit(beta):
        A = np.column_stack([-s ** beta, s ** (beta / 2), np.log(s), np.ones_like(s)])
        return _lstsq(A, y)

    def cost(beta):
        res = fit(beta)[2]
        return float(res @ res)

    opt = minimize_scalar(cost, bounds=(beta0 * (1 - bracket), beta0 * (1 + bracket)),
                          method="bounded", options={"xatol": 1e-10})
    if not opt.success:
        raise FitError("exponent fit did not converge")
    coef, err, res = fit(opt.x)
    return LnDetFit(*map(float, coef), float(opt.x), dict(zip("abck", map(float, err))), res)


def fit_derivative(s, dlogdet, rho: float) -> tuple[float, float, np.ndarray]:
    """Fit d/ds ln det on -A s^{2 rho - 1} + B s^{rho - 1}; returns (A, B, residuals).

    With rho = 1/2 this is the Bessel-case model -A + B s^{-1/2}."""
    s, y = np.asarray(s, float), np.asarray(dlogdet, float)
    A = np.column_stack([-s ** (2 * rho - 1), s ** (rho - 1)])
    coef, _, res = _lstsq(A, y)
    return float(coef[0]), float(coef[1]), res
