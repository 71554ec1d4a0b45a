import math

import numpy as np
import pytest
from scipy import integrate, special

from hardedge.errors import ValidationError
from hardedge.kernels import (KernelEvaluator, bessel_kernel, convergence_study, kernel3_wright,
                              kernel_finite_n)
from hardedge.models import ModelParams

X = np.array([0.5, 1.0, 1.5, 2.0])


def _bessel_integral(x, y, a):
    f = lambda t: special.jv(a, math.sqrt(x * t)) * special.jv(a, math.sqrt(y * t)) / 4
    return integrate.quad(f, 0, 1, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


@pytest.mark.parametrize("a", [0.0, 0.5, 1.3])
def test_bessel_kernel_vs_integral_form(a):
    for x, y in [(0.7, 2.3), (4.0, 4.0), (10.0, 10.001), (1.0, 30.0)]:
        assert abs(bessel_kernel(x, y, a) - _bessel_integral(x, y, a)) < 1e-12


def test_bessel_kernel_half_integer_elementary():
    # J_{1/2}(z) = sqrt(2/(pi z)) sin z gives a sine-type closed form
    x, y = 2.0, 5.0
    sx, sy = math.sqrt(x), math.sqrt(y)
    J = lambda z: math.sqrt(2 / (math.pi * z)) * math.sin(z)
    Jp = lambda z: math.sqrt(2 / (math.pi * z)) * (math.cos(z) - math.sin(z) / (2 * z))
    ref = (J(sx) * sy * Jp(sy) - J(sy) * sx * Jp(sx)) / (2 * (x - y))
    assert abs(bessel_kernel(x, y, 0.5) - ref) < 1e-15


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_theta1_reduces_to_bessel(alpha):
    K = KernelEvaluator.build(ModelParams.muttalib_borodin(alpha, 1.0)).kernel_matrix(X, X)
    B = 4 * bessel_kernel(4 * X[:, None], 4 * X[None, :], alpha)
    assert np.max(np.abs(K - B)) < 1e-8


def test_separable_matches_direct_double():
    p = ModelParams.ginibre((0, 1))
    a = KernelEvaluator.build(p).kernel_matrix(X, X[::-1])
    b = KernelEvaluator.build(p, mode="direct_double").kernel_matrix(X, X[::-1])
    assert np.max(np.abs(a - b)) < 1e-9


def test_theta2_vs_wright_oracle():
    ev = KernelEvaluator.build(ModelParams.muttalib_borodin(0.5, 2.0))
    assert abs(ev(0.3, 0.7) - kernel3_wright(0.3, 0.7, 0.5, 2.0)) < 1e-9


def test_theta1_wright_oracle_is_bessel():
    assert abs(kernel3_wright(0.6, 1.4, 0.0, 1.0) - 4 * bessel_kernel(2.4, 5.6, 0.0)) < 1e-12


def test_finite_n1_kernel_is_exponential():
    # one Ginibre row: K_1(x, y) = exp(-y) in this gauge
    p = ModelParams.ginibre((0,))
    ev = KernelEvaluator.finite_n(p, 1)
    for x, y in [(0.2, 0.5), (1.0, 1.0), (2.0, 0.3)]:
        assert abs(kernel_finite_n(x, y, p, 1, ev) - math.exp(-y)) < 1e-10


def test_diagonal_is_positive_and_continuous():
    ev = KernelEvaluator.build(ModelParams.ginibre((0, 0)))
    d = ev.kernel_matrix([1.0], [1.0])[0, 0]
    near = ev.kernel_matrix([1.0], [1.0 + 1e-6])[0, 0]
    assert d > 0 and abs(d - near) < 1e-5


def test_convergence_is_monotone():
    grid = [(a, b) for a in (0.5, 1.5) for b in (0.5, 1.5)]
    rep = convergence_study(ModelParams.ginibre((0,)), [10, 20, 40], grid)
    assert rep.errors[0] > rep.errors[1] > rep.errors[2]
    assert rep.order > 0.8


def test_validation():
    ev = KernelEvaluator.build(ModelParams.muttalib_borodin(0.0, 1.0))
    with pytest.raises(ValidationError):
        ev.kernel_matrix([0.0], [1.0])
    with pytest.raises(ValidationError):
        KernelEvaluator.build(ModelParams.ginibre((0,)), mode="bogus")
