import math

import numpy as np
import pytest
from scipy import integrate

from hardedge.errors import ValidationError
from hardedge.fredholm import (DetCurve, DetResult, det_curve, det_hs_arb, det_hs_contour, det_nystrom,
                               logdet_derivative)
from hardedge.kernels import KernelEvaluator
from hardedge.models import ModelParams

GIN2 = ModelParams.ginibre((0, 0))


@pytest.fixture(scope="module")
def ev_gin2():
    return KernelEvaluator.build(GIN2)


@pytest.mark.parametrize("s", [0.5, 2.0, 5.0])
def test_bessel_case_is_exponential(s):
    # theta = 1, alpha = 0: the gap probability is exactly exp(-s)
    ev = KernelEvaluator.build(ModelParams.muttalib_borodin(0.0, 1.0))
    r = det_nystrom(ev, s)
    assert abs(r.logdet + s) < 1e-9 and r.err < 1e-10


def test_small_s_trace(ev_gin2):
    s = 1e-3
    tr = integrate.quad(lambda x: ev_gin2(x, x), 0, s, epsrel=1e-12)[0]
    d = det_nystrom(ev_gin2, s).det
    assert abs((1 - d) - tr) < 1e-3 * tr


@pytest.mark.parametrize("p", [GIN2, ModelParams.truncated((0, 1), (2,)), ModelParams.muttalib_borodin(0.5, 2.0)])
def test_kernel_det_equals_hs_det(p):
    a = det_nystrom(KernelEvaluator.build(p), 1.0).det
    b = det_hs_contour(p, 1.0).det
    assert abs(a - b) < 1e-8


def test_arb_matches_double_precision():
    a = det_hs_arb(GIN2, 2.0)
    b = det_hs_contour(GIN2, 2.0)
    assert abs(a.logdet - b.logdet) < 1e-10 and a.err < 1e-15 and a.method.startswith("hs")


def test_curve_is_monotone(ev_gin2):
    c = det_curve(ev_gin2, [0.25, 0.5, 1.0, 2.0, 4.0])
    assert c.is_monotone() and np.all((c.det > 0) & (c.det < 1))


def test_derivative_integrates_to_difference(ev_gin2):
    s = np.linspace(1.0, 3.0, 9)
    d = np.array([logdet_derivative(ev_gin2, float(t))[0] for t in s])
    lhs = integrate.simpson(d, x=s)
    rhs = det_nystrom(ev_gin2, 3.0).logdet - det_nystrom(ev_gin2, 1.0).logdet
    assert abs(lhs - rhs) < 1e-4


def test_derivative_on_callable():
    val, err = logdet_derivative(lambda t: -t ** 1.5, 4.0)
    assert abs(val + 3.0) < 1e-8 and err < 1e-4


def test_validation(ev_gin2):
    with pytest.raises(ValidationError):
        det_nystrom(ev_gin2, -1.0)
    with pytest.raises(ValidationError):
        DetCurve(GIN2, [DetResult(2.0, 0.5, math.log(0.5), 0.0), DetResult(1.0, 0.7, math.log(0.7), 0.0)])
