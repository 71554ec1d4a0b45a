import cmath
import math

import numpy as np
import pytest

from hardedge.contours import (Contour, build_limit_contours, build_sigma_contours, crossing_points,
                               gauss_legendre, quadrature_on, symbol_geometry)
from hardedge.errors import GeometryError, ValidationError
from hardedge.geometry import endpoints
from hardedge.models import ModelParams, c_constants

SQUARE = Contour(((1 - 1j, 1 + 1j), (1 + 1j, -1 + 1j), (-1 + 1j, -1 - 1j), (-1 - 1j, 1 - 1j)))


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(10)
    assert abs(w.sum() - 2) < 1e-14
    assert abs(np.dot(w, x ** 18) - 2 / 19) < 1e-14
    assert not x.flags.writeable


def test_closed_square_integrals():
    g = quadrature_on(SQUARE, 24)
    assert abs(g.integrate(g.nodes)) < 1e-14
    assert abs(g.integrate(1 / g.nodes) / (2j * math.pi) - 1) < 1e-13
    assert len(g) == 96


def test_deformation_invariance():
    # int exp(-z^2) over a bent path equals the straight segment
    a, b = -3.0, 3.0
    bent = Contour(((a, 0.5j), (0.5j, 1.0 + 1j), (1.0 + 1j, b)))
    g = quadrature_on(bent, 40)
    ref = math.sqrt(math.pi) * math.erf(3.0)
    assert abs(g.integrate(np.exp(-g.nodes ** 2)) - ref) < 1e-12


def test_contour_validation():
    with pytest.raises(GeometryError):
        Contour(((0, 1), (2, 3)))
    with pytest.raises(ValidationError):
        quadrature_on(SQUARE, 4)


@pytest.mark.parametrize("p", [ModelParams.ginibre((0, 0)), ModelParams.truncated((0, 1), (2,)),
                               ModelParams.muttalib_borodin(0.5, 2.0)])
def test_limit_contours_separate_poles_and_zeros(p):
    geom = symbol_geometry(p)
    gam, til = build_limit_contours(p, geom=geom)
    assert geom.pole_max < gam.crossing < 0.5 < til.crossing < geom.zero_min
    assert gam.end.imag > 0 > gam.start.imag and til.end.imag > 0 > til.start.imag
    assert gam.end.real < gam.crossing and til.end.real > til.crossing


def test_crossing_window_bessel():
    c, ct = crossing_points(symbol_geometry(ModelParams.muttalib_borodin(0.0, 1.0)))
    assert 0 < c < 0.5 < ct < 1


@pytest.mark.parametrize("p,mirrored", [(ModelParams.ginibre((0, 0)), False),
                                        (ModelParams.muttalib_borodin(0.0, 2.0), True)])
def test_sigma_contours(p, mirrored):
    _, b1, b2 = endpoints(c_constants(p))
    sig = build_sigma_contours(b1, b2)
    assert [c.kind for c in sig] == [f"sigma{k}" for k in range(1, 6)]
    assert all(c.meta["mirrored"] == mirrored for c in sig)
    assert abs(sig[0].end - b1) < 1e-14 and abs(sig[2].end - b1) < 1e-14
    assert abs(sig[1].start - b2) < 1e-14 and abs(sig[3].start - b2) < 1e-14
    assert abs(sig[4].start - b1) < 1e-14 and abs(sig[4].end - b2) < 1e-14
    assert abs(sig[4].segments[0][1]) == 0
    with pytest.raises(ValidationError):
        build_sigma_contours(b1, b2, eps=math.pi / 5)
