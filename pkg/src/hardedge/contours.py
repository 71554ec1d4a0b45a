"""Integration paths for the kernels, the H_s operator and the Sigma contours.

Every contour is a polyline; `quadrature_on` puts Gauss-Legendre nodes on each
straight piece, so refinement is done by splitting pieces into panels.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import GeometryError, ValidationError
from .geometry import endpoints, saddle
from .models import ModelParams, c_constants, log_F, scaling_info, singularity_window

RAY_ANGLE = math.pi / 8
LOG_TOL = math.log(1e-18)


@dataclass(frozen=True)
class Contour:
    segments: tuple
    kind: str = "generic"
    crossing: float | None = None
    oriented_up: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        segs = tuple((complex(a), complex(b)) for a, b in self.segments)
        for (_, b), (a, _) in zip(segs, segs[1:]):
            if abs(a - b) > 1e-12 * max(1.0, abs(a)):
                raise GeometryError("contour segments are not contiguous")
        object.__setattr__(self, "segments", segs)

    @property
    def start(self) -> complex:
        return self.segments[0][0]

    @property
    def end(self) -> complex:
        return self.segments[-1][1]

    def length(self) -> float:
        return sum(abs(b - a) for a, b in self.segments)

    def vertices(self) -> np.ndarray:
        return np.array([self.segments[0][0]] + [b for _, b in self.segments])

    def conj(self) -> "Contour":
        """Mirror in the real axis (orientation of each piece is mirrored too)."""
        return replace(self, segments=tuple((a.conjugate(), b.conjugate()) for a, b in self.segments),
                       oriented_up=not self.oriented_up)

    def reversed(self) -> "Contour":
        return replace(self, segments=tuple((b, a) for a, b in reversed(self.segments)),
                       oriented_up=not self.oriented_up)

    def refined(self, pieces: Sequence[Sequence[complex]]) -> "Contour":
        return replace(self, segments=tuple(pieces))


@dataclass(frozen=True)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray  # include dz
    parent: Contour

    def integrate(self, values) -> complex:
        return complex(np.dot(self.weights, values))

    def __len__(self):
        return len(self.nodes)


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def quadrature_on(contour: Contour, order: int) -> QuadratureGrid:
    """Composite Gauss-Legendre: `order` nodes on every segment."""
    if order < 8:
        raise ValidationError("quadrature order must be >= 8")
    x, w = gauss_legendre(order)
    a = np.array([s[0] for s in contour.segments])
    b = np.array([s[1] for s in contour.segments])
    mid, half = (a + b) / 2, (b - a) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return QuadratureGrid(nodes, weights, contour)


# ------------------------------------------------------------- panelling

def _polyline_dist(z: complex, verts: np.ndarray) -> float:
    a, b = verts[:-1], verts[1:]
    d = b - a
    L2 = np.maximum(np.abs(d) ** 2, 1e-300)
    t = np.clip(((z - a) * np.conj(d)).real / L2, 0.0, 1.0)
    return float(np.min(np.abs(z - (a + t * d))))


@dataclass
class PanelRule:
    """Local panel-length control: h <= min(h_max, var/|d log f/du|, kappa*dist)."""

    log_f: Callable | None = None
    singularities: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    avoid: tuple = ()  # polylines (vertex arrays) that must be resolved
    h_max: float = 1.0
    var: float = 2.5
    kappa: float = 0.8
    h_min: float = 1e-6

    def allowed(self, z: complex) -> float:
        h = self.h_max
        if self.singularities.size:
            h = min(h, self.kappa * float(np.min(np.abs(z - self.singularities))))
        for verts in self.avoid:
            h = min(h, self.kappa * _polyline_dist(z, verts))
        if self.log_f is not None:
            d = 1e-6 * max(1.0, abs(z))
            fp, fm = self.log_f(np.array([z + d, z - d]))
            deriv = abs(fp - fm) / (2 * d)
            if deriv > 0:
                h = min(h, self.var / deriv)
        return max(h, self.h_min)


def panels_on_segment(a: complex, b: complex, rule: PanelRule, growth: float = 1.6) -> list:
    L = abs(b - a)
    if L == 0:
        return []
    e = (b - a) / L
    out, t, h_prev = [], 0.0, None
    while t < L * (1 - 1e-12):
        z = a + t * e
        h = rule.allowed(z)
        if h_prev is not None:
            h = min(h, growth * h_prev)
        # do not step past a point that needs smaller panels
        while h > rule.h_min and rule.allowed(a + min(t + h, L) * e) < h / growth:
            h /= growth
        h = min(h, L - t)
        if L - t - h < 0.25 * h:  # absorb a tiny remainder
            h = L - t
        out.append((a + t * e, a + (t + h) * e))
        t += h
        h_prev = h
    out[-1] = (out[-1][0], b)
    return out


def panelize(vertices: Sequence[complex], rule: PanelRule) -> list:
    pieces = []
    for a, b in zip(vertices[:-1], vertices[1:]):
        pieces.extend(panels_on_segment(complex(a), complex(b), rule))
    return pieces


def ray_length(z0: complex, direction: complex, log_f: Callable, drop: float, t_max: float = 1e4) -> float:
    """Length after which log|f| along z0 + t*direction stays `drop` below its
    running maximum (probed on a geometric grid)."""
    ts = np.concatenate([[0.0], np.geomspace(0.05, t_max, 400)])
    vals = np.real(log_f(z0 + ts * direction))
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    ref = np.maximum.accumulate(vals)
    below = vals < ref[-1] - drop
    # first index after which everything is below
    bad = np.nonzero(~below)[0]
    k = bad[-1] + 1 if bad.size else 1
    if k >= len(ts):
        raise GeometryError("integrand does not decay along the truncation ray")
    return float(ts[k])


# ------------------------------------------------------------- symbols

@dataclass(frozen=True)
class SymbolGeometry:
    """Pole/zero window and saddle data of a symbol F (limit or scaled finite-n)."""

    log_f: Callable
    pole_max: float
    zero_min: float
    pole_step: float
    zero_step: float
    rho: float
    tau: float
    zstar: complex  # saddle of h in the zeta-plane
    phi: float
    b1: complex
    b2: complex

    right_points: tuple = ()
    c12: float = 2.0  # c1 + c2

    def poles(self, count: int = 40) -> np.ndarray:
        return self.pole_max - self.pole_step * np.arange(count) + 0j

    def zeros(self, count: int = 40) -> np.ndarray:
        if self.right_points:
            return np.array(self.right_points[:count], dtype=complex)
        return self.zero_min + self.zero_step * np.arange(count) + 0j

    def singular(self, count: int = 40) -> np.ndarray:
        return np.concatenate([self.poles(count), self.zeros(count)])


def symbol_geometry(params: ModelParams, log_f: Callable | None = None) -> SymbolGeometry:
    p, z = singularity_window(params)
    si, cc = scaling_info(params), c_constants(params)
    phi, b1, b2 = endpoints(cc)
    zstep = params.theta if params.j == 3 else 1.0
    if log_f is None:
        log_f = lambda w: log_F(w, params)
    if params.j == 3:
        right = ()
    else:
        # zeros of 1/Gamma(1+nu-z) and poles of Gamma(1+mu-z), all on the right
        right = tuple(sorted({1 + v + k for v in params.nu + params.mu for k in range(40)}))
    return SymbolGeometry(log_f, p, z, 1.0, zstep, si.rho, si.tau, saddle(cc), phi, b1, b2, right, cc.c1 + cc.c2)


def crossing_points(geom: SymbolGeometry, margin: float = 0.25) -> tuple[float, float]:
    if not 0 < margin < 0.5:
        raise ValidationError("margin must lie in (0, 1/2)")
    if not geom.pole_max < 0.5 < geom.zero_min:
        raise GeometryError(
            f"no admissible crossing window: poles up to {geom.pole_max}, zeros from {geom.zero_min}")
    c = 0.5 - 2 * margin * min(0.5 - geom.pole_max, 1.0)
    ct = 0.5 + 2 * margin * min(geom.zero_min - 0.5, 1.0)
    return c, ct


# ------------------------------------------------------------- standard contours

def _two_rays(cross: float, angle: float, L: float, rule: PanelRule, kind: str) -> Contour:
    """Upward contour made of two rays leaving `cross` at +-angle."""
    up = cross + L * cmath.exp(1j * angle)
    lo = cross + L * cmath.exp(-1j * angle)
    pieces_up = panels_on_segment(complex(cross), up, rule)
    pieces_lo = [(b, a) for a, b in reversed(panels_on_segment(complex(cross), lo, rule))]
    return Contour(tuple(pieces_lo + pieces_up), kind=kind, crossing=cross)


def build_limit_contours(params: ModelParams, margin: float = 0.25, x_range=(1e-3, 10.0),
                         geom: SymbolGeometry | None = None, h_max: float = 1.0) -> tuple[Contour, Contour]:
    """gamma (poles on its left) and gamma-tilde (zeros on its right), each made
    of two rays at angle pi/8 off the real axis from its crossing point, and
    truncated where |F(u) x^-u| (resp. |x^(v-1)/F(v)|) has dropped by 1e-18 for
    every x in x_range."""
    geom = geom or symbol_geometry(params)
    c, ct = crossing_points(geom, margin)
    lx = [math.log(x) for x in x_range]
    lf = geom.log_f

    def f_gam(u):
        base = np.real(lf(u))
        return np.max([base - np.real(u) * l for l in lx], axis=0)

    def f_til(v):
        base = -np.real(lf(v))
        return np.max([base + np.real(v - 1) * l for l in lx], axis=0)

    ang_g, ang_t = math.pi - RAY_ANGLE, RAY_ANGLE
    Lg = max(ray_length(c, cmath.exp(1j * ang_g), f_gam, -LOG_TOL),
             ray_length(c, cmath.exp(-1j * ang_g), f_gam, -LOG_TOL))
    Lt = max(ray_length(ct, cmath.exp(1j * ang_t), f_til, -LOG_TOL),
             ray_length(ct, cmath.exp(-1j * ang_t), f_til, -LOG_TOL))
    rule_g = PanelRule(None, geom.singular(), h_max=h_max)
    rule_t = PanelRule(None, geom.singular(), h_max=h_max)
    gam = _two_rays(c, ang_g, Lg, rule_g, "gamma")
    til = _two_rays(ct, ang_t, Lt, rule_t, "gamma_tilde")
    return gam, til


# ------------------------------------------------------------- saddle contours for P and Q

SADDLE_MIN_HEIGHT = 2.0


def _saddle_contour(geom: SymbolGeometry, arg: float, which: str, margin: float = 0.25,
                    var: float = 2.0) -> Contour | None:
    """Contour through the two saddle points of the P (which='P') or Q
    integrand at argument `arg`; None when the saddles are too close to the
    real axis to matter (callers then use the standard contour)."""
    S = arg ** geom.rho
    zs = geom.zstar
    if S * abs(zs) < SADDLE_MIN_HEIGHT:
        return None
    c, ct = crossing_points(geom, margin)
    w_plus = geom.tau + 1j * S * zs
    la = math.log(arg)
    if which == "P":
        lf = lambda u: geom.log_f(u) - u * la
        direction = cmath.exp(1j * (0.75 * math.pi + cmath.phase(zs) / 2))
        sing = geom.singular()
        cross = c
        bent = w_plus.real < c
    else:
        lf = lambda v: -geom.log_f(v) + (v - 1) * la
        direction = cmath.exp(1j * (0.25 * math.pi + cmath.phase(zs) / 2))
        sing = geom.singular()
        cross = ct
        bent = w_plus.real > ct
    rule = PanelRule(lf, sing, h_max=2.0, var=var)
    L = ray_length(w_plus, direction, lambda z: np.real(lf(z)), -LOG_TOL, t_max=1e3 + 50 * S)
    far = w_plus + L * direction
    if bent:
        verts = [cross, w_plus, far]
    else:
        verts = [w_plus.real + 0j, w_plus, far]
        cross = w_plus.real
    upper = panelize(verts, rule)
    lower = [(b.conjugate(), a.conjugate()) for a, b in reversed(upper)]
    kind = "gamma" if which == "P" else "gamma_tilde"
    return Contour(tuple(lower + upper), kind=kind, crossing=float(cross), meta={"arg": arg})


def p_contour(geom: SymbolGeometry, xi: float, margin: float = 0.25) -> Contour | None:
    return _saddle_contour(geom, xi, "P", margin)


def q_contour(geom: SymbolGeometry, eta: float, margin: float = 0.25) -> Contour | None:
    return _saddle_contour(geom, eta, "Q", margin)


# ------------------------------------------------------------- H_s contours

def build_hs_contours(geom: SymbolGeometry, s: float, margin: float = 0.25, eps: float = math.pi / 4,
                      digits: float = 18.0, var: float = 2.5, h_max: float = 2.0, kappa: float = 0.8,
                      eta: float = 0.15) -> tuple[Contour, Contour]:
    """gamma and gamma-tilde for the H_s operator in the Sigma layout scaled by
    s^rho: with u = tau + i s^rho zeta, gamma runs from the Sigma_1 ray to
    b1 + i eta|b1|, through its real-axis crossing to b2 + i eta|b1| and out
    along Sigma_2; gamma-tilde does the same below Sigma_5 with Sigma_3/4.
    The two contours are a wedge apart, so only the neighbourhood of the
    crossing needs short panels.  For Im b1 < 0 the ray roles follow the
    mirrored picture."""
    c, ct = crossing_points(geom, margin)
    S = s ** geom.rho
    tau = geom.tau
    b1, b2, phi = geom.b1, geom.b2, geom.phi
    off = 1j * eta * abs(b1)
    ph = abs(phi)
    d1 = cmath.exp(1j * (math.pi - ph - eps))  # Sigma_1 direction away from b1
    d2 = cmath.exp(1j * (ph + eps))
    d3 = cmath.exp(1j * (math.pi + eps))
    d4 = cmath.exp(-1j * eps)
    if phi < 0:
        g_in, g_out, t_in, t_out = d3.conjugate(), d4.conjugate(), d1.conjugate(), d2.conjugate()
    else:
        g_in, g_out, t_in, t_out = d1, d2, d3, d4
    g_mid = [b1 + off, 1j * (tau - c) / S, b2 + off]
    t_mid = [b1 - off, 1j * (tau - ct) / S, b2 - off]
    to_u = lambda z: tau + 1j * S * z
    ls = math.log(s)
    lf_g = lambda u: geom.log_f(u) - u * ls
    lf_t = lambda v: -geom.log_f(v) + v * ls
    drop = digits * math.log(10.0)

    def along(mid):
        z = np.concatenate([np.linspace(mid[0], mid[1], 60), np.linspace(mid[1], mid[2], 60)])
        return to_u(z)

    # truncation: a ray contribution must be negligible against the largest
    # partner factor on the other contour
    peak_g = float(np.max(np.real(lf_g(along(g_mid)))))
    peak_t = float(np.max(np.real(lf_t(along(t_mid)))))

    def ray(z0, dirz, lf, partner_peak):
        u0 = to_u(z0)
        du_dir = 1j * dirz
        ts = np.concatenate([[0.0], np.geomspace(0.05, 1e3 + 100 * S, 800)])
        vals = np.real(lf(u0 + ts * du_dir)) + partner_peak
        ok = np.nonzero(vals > -drop)[0]
        L = ts[min(ok[-1] + 1, len(ts) - 1)] if ok.size else ts[1]
        return [u0, u0 + max(L, 1.0) * du_dir]

    g_verts = ray(g_mid[0], g_in, lf_g, peak_t)[::-1] + [to_u(g_mid[1])] + ray(g_mid[2], g_out, lf_g, peak_t)
    t_verts = ray(t_mid[0], t_in, lf_t, peak_g)[::-1] + [to_u(t_mid[1])] + ray(t_mid[2], t_out, lf_t, peak_g)
    g_arr, t_arr = np.array(g_verts), np.array(t_verts)
    rule_g = PanelRule(lf_g, geom.singular(), avoid=(t_arr,), h_max=h_max, var=var, kappa=kappa)
    rule_t = PanelRule(lf_t, geom.singular(), avoid=(g_arr,), h_max=h_max, var=var, kappa=kappa)
    gam = Contour(tuple(symmetric_panels(g_verts, rule_g)), kind="gamma", crossing=c, meta={"s": s})
    til = Contour(tuple(symmetric_panels(t_verts, rule_t)), kind="gamma_tilde", crossing=ct, meta={"s": s})
    return gam, til


def symmetric_panels(vertices: Sequence[complex], rule: PanelRule) -> list:
    """Panels for an upward polyline symmetric under conjugation whose middle
    vertex is its real-axis crossing: the upper half is panelled outward and
    mirrored, so nodes come in conjugate pairs."""
    k = len(vertices) // 2
    upper = panelize([complex(vertices[k].real, 0.0)] + list(vertices[k + 1:]), rule)
    lower = [(b.conjugate(), a.conjugate()) for a, b in reversed(upper)]
    return lower + upper


# ------------------------------------------------------------- Sigma contours

def build_sigma_contours(b1: complex, b2: complex, eps: float = math.pi / 20,
                         ray_len: float | None = None) -> list[Contour]:
    """Sigma_1..Sigma_5 (rays truncated at `ray_len`). Sigma_1, Sigma_3 run into
    b1, Sigma_2, Sigma_4 leave b2, Sigma_5 goes b1 -> 0 -> b2. With Im b1 < 0
    the mirrored layout is returned."""
    if not 0 < eps < math.pi / 10:
        raise ValidationError("eps must lie in (0, pi/10)")
    if abs(b2 + b1.conjugate()) > 1e-12 * max(1.0, abs(b1)):
        raise ValidationError("need b2 = -conj(b1)")
    L = ray_len if ray_len is not None else 10.0 * abs(b1)
    mirrored = b1.imag < 0
    B1, B2 = (b1.conjugate(), b2.conjugate()) if mirrored else (b1, b2)
    phi = cmath.phase(B2)
    rays = {
        1: B1 + L * cmath.exp(1j * (math.pi - phi - eps)),
        2: B2 + L * cmath.exp(1j * (phi + eps)),
        3: B1 + L * cmath.exp(1j * (math.pi + eps)),
        4: B2 + L * cmath.exp(-1j * eps),
    }
    std = {
        1: [(rays[1], B1)],
        2: [(B2, rays[2])],
        3: [(rays[3], B1)],
        4: [(B2, rays[4])],
        5: [(B1, 0j), (0j, B2)],
    }
    if mirrored:
        conj = lambda segs: [(a.conjugate(), b.conjugate()) for a, b in segs]
        std = {1: conj(std[3]), 2: conj(std[4]), 3: conj(std[1]), 4: conj(std[2]), 5: conj(std[5])}
    return [Contour(tuple(std[k]), kind=f"sigma{k}", meta={"mirrored": mirrored}) for k in range(1, 6)]
