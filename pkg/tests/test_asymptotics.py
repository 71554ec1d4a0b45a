import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardedge.asymptotics import (_on_cut, asymptotic_data, ell_constant, fit_derivative, fit_lndet,
                                  fit_lndet_free_exponent, g1_tail_limit, g_boundary, g_value, h_value,
                                  i_integrals, lemma31_check, p1_leading, p1_quadrature, r_func,
                                  tail_fit, thm12_closed, thm12_coeffs, thm12_reconstructed)
from hardedge.errors import BranchError, FitError, PathError
from hardedge.models import ModelParams

SETS = {
    "bessel": ModelParams.muttalib_borodin(0.0, 1.0),
    "ginibre r=2": ModelParams.ginibre((0, 0)),
    "ginibre r=3": ModelParams.ginibre((0, 1, 0)),
    "truncated": ModelParams.truncated((0, 1), (2,)),
    "theta=2": ModelParams.muttalib_borodin(0.5, 2.0),
}


@pytest.fixture(scope="module", params=list(SETS), ids=list(SETS))
def data(request):
    return asymptotic_data(SETS[request.param])


def test_endpoint_symmetry(data):
    assert abs(data.b2 + data.b1.conjugate()) < 1e-14
    assert abs(data.g1.real) < 1e-14  # g1 is purely imaginary
    assert data.mirrored == (data.b1.imag < 0)


def test_jump_relation(data):
    t = np.linspace(0.03, 0.97, 15)
    z = np.concatenate([data.b1 * (1 - t), data.b2 * t])
    gp, gm = g_boundary(z, data)
    assert np.max(np.abs(gp + gm - 1j * h_value(z, data) + data.ell)) < 1e-8


def test_ell_same_from_both_ends(data):
    assert abs(ell_constant(data, 1) - ell_constant(data, 2)) < 1e-12
    assert abs(data.ell.imag) < 1e-12


def test_path_independence(data):
    # a forced straight path either refuses to cross Sigma_5 or agrees with the radial one
    z = np.array([2.0 * data.b1 + 0.1j, 0.5 * (data.b1 + data.b2) + 0.05, 0.5 * data.b1 + 0.2,
                  2.0 * data.b2 + 0.3j, -1.5 + 2.5j])
    z = z[~_on_cut(z, data.b1, data.b2)[0]]
    ref = g_value(z, data, path="radial")
    for k, zk in enumerate(z):
        agreed = 0
        for path in ("b1", "b2"):
            try:
                v = g_value(np.array([zk]), data, path=path)[0]
            except PathError:
                continue
            assert abs(v - ref[k]) < 1e-10
            agreed += 1
        assert agreed > 0


def test_straight_path_refuses_to_cross_cut():
    d = asymptotic_data(SETS["ginibre r=2"])
    # just outside the edge 0 -> b2, so the path from b1 runs through the edge
    n = 1j * d.b2 / abs(d.b2)
    n = n if ((d.b1 - 0.5 * d.b2) * np.conj(n)).real < 0 else -n
    z = np.array([0.5 * d.b2 + 0.05 * n])
    with pytest.raises(PathError):
        g_value(z, d, path="b1")
    assert abs(g_value(z, d, path="b2")[0] - g_value(z, d)[0]) < 1e-10


def test_zeta_g_tends_to_g1(data):
    # zeta g - g1 = O(1/zeta): the error must drop by about 10 per decade
    e = [abs(z * g_value(np.array([z]), data)[0] - data.g1) for z in (1e2 * np.exp(0.7j), 1e3 * np.exp(0.7j))]
    assert e[1] < 0.2 * e[0] or e[1] < 1e-12
    assert abs(g1_tail_limit(data) - data.g1) < 1e-8


def test_i_integrals(data):
    q, c = i_integrals(data), i_integrals(data, "closed")
    assert max(abs(u - v) for u, v in zip(q, c)) < 1e-10


def test_lemma31(data):
    rep = lemma31_check(data, n_samples=200, raise_on_fail=False)
    assert rep.violations == 0 and min(rep.margins.values()) > 0


def test_p1_quadrature_approaches_leading(data):
    assert abs(p1_quadrature(data) - p1_leading(data)) < 2e-3


def test_closed_form_values():
    assert abs(thm12_coeffs(ModelParams.ginibre((0, 0)))[1] - 9 / 2 ** (7 / 3)) < 1e-12
    _, a, b = thm12_coeffs(ModelParams.muttalib_borodin(0.0, 2.0))
    assert abs(a - 9 / 2 ** (11 / 3)) < 1e-12 and abs(b + 3 / 2 ** (7 / 3)) < 1e-12
    for alpha in (0.0, 1.5):
        assert np.allclose(thm12_coeffs(ModelParams.muttalib_borodin(alpha, 1.0)), (0.5, 1.0, 2 * alpha), atol=1e-12)


@settings(max_examples=40)
@given(st.floats(-0.9, 4.0), st.floats(0.2, 5.0))
def test_dual_path_variant3(alpha, theta):
    p = ModelParams.muttalib_borodin(alpha, theta)
    assert np.allclose(thm12_closed(p), thm12_reconstructed(p), rtol=1e-12, atol=1e-12)


@settings(max_examples=40)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=5), st.data())
def test_dual_path_products(nu, draw):
    q = draw.draw(st.integers(0, len(nu) - 1))
    mu = [nu[k] + draw.draw(st.integers(1, 4)) for k in range(q)]
    p = ModelParams.truncated(nu, mu) if q else ModelParams.ginibre(nu)
    assert np.allclose(thm12_closed(p), thm12_reconstructed(p), rtol=1e-12, atol=1e-12)


def test_branch_errors():
    d = asymptotic_data(SETS["ginibre r=2"])
    with pytest.raises(BranchError):
        r_func(np.array([0.5 * d.b1]), d)
    with pytest.raises(BranchError):
        h_value(np.array([2.0j]), d)
    with pytest.raises(PathError):
        g_value(np.array([0.5 * d.b2]), d)


def _synthetic(s, a=1.2, b=0.7, c=-0.25, lnC=0.3, rho=1 / 3):
    return -a * s ** (2 * rho) + b * s ** rho + c * np.log(s) + lnC


def test_tail_fit_recovers_constants():
    s = np.geomspace(1e2, 1e4, 8)
    fit = tail_fit((s, _synthetic(s)), (1 / 3, 1.2, 0.7))
    assert abs(fit.c + 0.25) < 1e-10 and abs(math.log(fit.C) - 0.3) < 1e-9


def test_tail_fit_rejects_bad_input():
    s = np.geomspace(1e2, 1e4, 8)
    with pytest.raises(FitError):
        tail_fit((s[:3], _synthetic(s[:3])), (1 / 3, 1.2, 0.7))
    with pytest.raises(FitError):
        tail_fit((s, _synthetic(s) + 1e-3 * s ** 0.8), (1 / 3, 1.2, 0.7))


def test_lndet_fits():
    s = np.geomspace(1e2, 1e4, 12)
    y = _synthetic(s)
    fit = fit_lndet(s, y, 1 / 3)
    assert np.allclose([fit.a, fit.b, fit.c, fit.k], [1.2, 0.7, -0.25, 0.3], atol=1e-8)
    free = fit_lndet_free_exponent(s, y, 2 / 3)
    assert abs(free.exponent - 2 / 3) < 1e-6
    A, B, _ = fit_derivative(s, -1.2 * (2 / 3) * s ** (-1 / 3) * 1.0, 1 / 3)
    assert abs(A - 0.8) < 1e-12 and abs(B) < 1e-12
