"""Complex log-Gamma, Wright's generalized Bessel function, Bessel J."""
from __future__ import annotations

import numpy as np
from scipy import special

from .errors import ConvergenceError, PoleError, ValidationError

_LN2PI_HALF = 0.5 * np.log(2.0 * np.pi)
_LNPI = np.log(np.pi)

# B_{2k} / (2k (2k-1)), k = 1..12
_STIRLING = np.array([
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
    77683.0 / 5796.0,
    -236364091.0 / 1506960.0,
])
_SHIFT_RADIUS = 16.0


def _stirling(z):
    # valid for |z| >= _SHIFT_RADIUS, Re z > 0
    w = 1.0 / z
    w2 = w * w
    tail = np.zeros_like(z)
    for c in _STIRLING[::-1]:
        tail = tail * w2 + c
    return (z - 0.5) * np.log(z) - z + _LN2PI_HALF + tail * w


def _loggamma_right(z):
    """Principal log Gamma for Re z >= 1/2 (upward recurrence, then Stirling)."""
    z = z.astype(complex)
    nshift = np.where(np.abs(z) < _SHIFT_RADIUS,
                      np.ceil(np.maximum(_SHIFT_RADIUS - z.real, 0.0)), 0.0)
    acc = np.zeros_like(z)
    zz = z.copy()
    for _ in range(int(nshift.max(initial=0.0))):
        m = nshift > 0
        acc = acc + np.where(m, np.log(np.where(m, zz, 1.0)), 0.0)
        zz = np.where(m, zz + 1.0, zz)
        nshift = nshift - m
    return _stirling(zz) - acc


def _logsinpi_upper(z):
    # log sin(pi z) continuous on Im z >= 0:
    # sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 pi i z})
    return -np.log(2.0) + 0.5j * np.pi - 1j * np.pi * z + np.log1p(-np.exp(2j * np.pi * z))


def log_gamma(z):
    """Principal branch of ln Gamma(z) for complex (array) input.

    Stirling series after an upward shift for Re z >= 1/2, reflection with a
    continuous log-sine elsewhere; the lower half-plane is obtained by
    conjugation, the negative real axis as the limit from above.
    """
    z_in = np.asarray(z)
    zc = np.atleast_1d(z_in).astype(complex)
    if not np.all(np.isfinite(zc)):
        raise ValidationError("log_gamma: non-finite argument")
    near = (zc.real <= 0.5) & (np.abs(zc - np.round(zc.real)) < 1e-12) & (np.round(zc.real) <= 0)
    if np.any(near):
        raise PoleError(f"log_gamma: pole at {zc[near][0]}")

    out = np.empty_like(zc)
    right = zc.real >= 0.5
    if np.any(right):
        out[right] = _loggamma_right(zc[right])
    left = ~right
    if np.any(left):
        zl = zc[left]
        lower = zl.imag < 0
        zu = np.where(lower, np.conj(zl), zl)
        val = _LNPI - _logsinpi_upper(zu) - _loggamma_right(1.0 - zu)
        out[left] = np.where(lower, np.conj(val), val)
    if z_in.ndim == 0:
        return complex(out[0])
    return out.reshape(z_in.shape)


def log_rgamma_real(x):
    """(log|1/Gamma(x)|, sign of 1/Gamma(x)) for real x; sign 0 at the poles."""
    x = np.asarray(x, dtype=float)
    pole = (x <= 0) & (x == np.round(x))
    xs = np.where(pole, 0.5, x)
    lg = -special.gammaln(xs)
    sg = special.gammasgn(xs)
    return np.where(pole, -np.inf, lg), np.where(pole, 0.0, sg)


def wright_bessel(a: float, b: float, x, tol: float = 1e-17, max_terms: int = 10_000):
    """J_{a,b}(x) = sum_m (-x)^m / (m! Gamma(a + b m)).

    Summed with reciprocal Gamma so pole terms vanish; stops once |term| is
    below tol*|sum| for three consecutive terms past the largest term.
    """
    if b <= 0:
        raise ValidationError("wright_bessel requires b > 0")
    x_in = np.asarray(x, dtype=float)
    xv = np.atleast_1d(x_in)
    total = np.zeros_like(xv)
    comp = np.zeros_like(xv)  # Kahan compensation
    lx = np.log(np.abs(xv), where=xv != 0, out=np.full_like(xv, -np.inf))
    sx = np.where(xv > 0, -1.0, 1.0)  # sign of (-x)
    quiet = np.zeros(xv.shape, dtype=int)
    peak = np.full(xv.shape, -np.inf)
    zero = xv == 0  # only the m = 0 term survives
    for m in range(max_terms):
        lr, sr = log_rgamma_real(a + b * m)
        lt = (m * lx if m else np.zeros_like(xv)) - special.gammaln(m + 1.0) + lr
        term = np.where(sr == 0, 0.0, sr * (sx ** m) * np.exp(lt))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        peak = np.maximum(peak, np.where(sr == 0, peak, lt))
        past_peak = lt < peak - 1.0
        small = np.abs(term) < tol * np.abs(total)
        small |= (term == 0) & (lt < peak - 40.0)
        quiet = np.where(small & past_peak, quiet + 1, 0)
        if np.all((quiet >= 3) | zero):
            break
    else:
        raise ConvergenceError(f"wright_bessel: no convergence in {max_terms} terms")
    if x_in.ndim == 0:
        return float(total[0])
    return total.reshape(x_in.shape)


def bessel_j(alpha: float, x):
    """J_alpha(x) for x >= 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValidationError("bessel_j requires x >= 0")
    return special.jv(alpha, x)


def bessel_jp(alpha: float, x):
    """Derivative J_alpha'(x)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValidationError("bessel_jp requires x >= 0")
    return special.jvp(alpha, x)
