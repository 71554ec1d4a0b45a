"""Closed-form steepest-descent geometry shared by contours and asymptotics."""
from __future__ import annotations

import cmath
import math

from .models import CConstants


def endpoints(cc: CConstants) -> tuple[float, complex, complex]:
    """(phi, b1, b2) with sin(phi) = (c2-c1)/(c2+c1) and b2 = -conj(b1) = b e^{i phi}."""
    if cc.c1 <= 0 or cc.c2 <= 0:
        raise ValueError("endpoints need c1, c2 > 0")
    s1 = cc.c1 + cc.c2
    phi = math.asin((cc.c2 - cc.c1) / s1)
    re_b1 = -2.0 * (cc.c2 / cc.c1) ** (-(cc.c2 - cc.c1) / (2 * s1)) * math.exp(-(cc.c1 + cc.c2 + cc.c3) / s1)
    re_b2 = -re_b1
    im_b = re_b2 * math.tan(phi)
    return phi, complex(re_b1, im_b), complex(re_b2, im_b)


def saddle(cc: CConstants) -> complex:
    """Upper-right critical point of h: c1 ln(i z) + c2 ln(-i z) = -(c1+c2+c3)."""
    s1 = cc.c1 + cc.c2
    mod = math.exp(-(cc.c1 + cc.c2 + cc.c3) / s1)
    ang = (cc.c2 - cc.c1) * math.pi / (2 * s1)
    return mod * cmath.exp(1j * ang)


def h_func(zeta, cc: CConstants):
    import numpy as np

    zeta = np.asarray(zeta, dtype=complex)
    return -cc.c1 * zeta * np.log(1j * zeta) - cc.c2 * zeta * np.log(-1j * zeta) - cc.c3 * zeta
