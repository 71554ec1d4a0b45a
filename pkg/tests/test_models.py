import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardedge.errors import AdmissibilityError, PoleError, ValidationError
from hardedge.models import (ModelParams, c_constants, check_admissible, ell_schedule, log_F,
                             log_F_finite_n, scaling_constant, scaling_info, symbol_tail_check)
from hardedge.specialfn import log_gamma


def test_log_F_symmetric_point():
    assert abs(log_F(0.5, ModelParams.muttalib_borodin(0.0, 1.0))) < 1e-15


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
def test_shift_identity_variant1_to_variant3(alpha):
    z = np.array([0.3 + 1.2j, -0.2 - 0.7j, 0.45 + 3j])
    f1 = log_F(z + alpha / 2, ModelParams.ginibre((alpha,)))
    f3 = log_F(z, ModelParams.muttalib_borodin(alpha, 1.0))
    assert np.allclose(f1, f3, atol=1e-13)


def test_log_F_gamma_oracles():
    # mpmath values at 40 digits, frozen
    v1 = log_F(2 + 0.5j, ModelParams.ginibre((0, 0)))
    assert abs(v1 - complex(-0.8606335349617966208528316313570751052419, -8.7660100304832446547244234171621028409)) < 1e-13
    v2 = log_F(0.3 + 1.7j, ModelParams.truncated((0, 1), (2,)))
    assert abs(v2 - complex(0.6701452506250757355289182249580785970913, -2.355356560735324392279664752685839670876)) < 1e-13
    v3 = log_F(0.3 + 1.7j, ModelParams.muttalib_borodin(0.5, 2.0))
    assert abs(v3 - complex(-1.312971252395500753484196423788680222697, -1.668239562174809181519024221641766207638)) < 1e-13


def test_log_F_pole():
    with pytest.raises(PoleError):
        log_F(0.0, ModelParams.ginibre((0, 0)))


def test_finite_n_variant1_n1():
    p = ModelParams.ginibre((0,))
    z = 0.4 + 0.9j
    ref = log_gamma(-z) - 2 * log_gamma(1 - z)
    d = complex(log_F_finite_n(z, p, 1) - ref)
    assert abs(d - 2j * math.pi * round(d.imag / (2 * math.pi))) < 1e-13


def test_finite_n_variant3_ratio():
    a, th, n = 0.5, 2.0, 7
    p = ModelParams.muttalib_borodin(a, th)
    z = 0.3 + 0.8j
    d = complex(log_F_finite_n(z, p, n) - log_F(z, p) - log_gamma(n + (a / 2 + 1 - z) / th))
    assert abs(d - 2j * math.pi * round(d.imag / (2 * math.pi))) < 1e-12


def test_scaling_info_values():
    assert scaling_info(ModelParams.ginibre((0, 0))).rho == pytest.approx(1 / 3, abs=1e-15)
    assert scaling_info(ModelParams.muttalib_borodin(0.3, 1.0)).rho == 0.5
    assert scaling_info(ModelParams.truncated((0, 0, 0), (1,))).rho == pytest.approx(1 / 3, abs=1e-15)
    assert scaling_info(ModelParams.ginibre((2, 1))).tau == 1.0
    assert scaling_info(ModelParams.muttalib_borodin(0.3, 3.0)).tau == 0.5


def test_c_constants_examples():
    alpha = 0.7
    cc = c_constants(ModelParams.muttalib_borodin(alpha, 1.0))
    assert (cc.c1, cc.c2, cc.c3) == (1.0, 1.0, -2.0)
    assert cc.c5 == pytest.approx(alpha / 2) and cc.c6 == pytest.approx(-alpha / 2)
    cc = c_constants(ModelParams.ginibre((0,)))
    assert (cc.c1, cc.c2, cc.c3, cc.c4, cc.c5, cc.c6, cc.c7) == (1.0, 1.0, -2.0, 0.0, 0.0, 0.0, 0.0)
    assert cc.c8 == pytest.approx(-1 / 12, abs=1e-15)
    cc = c_constants(ModelParams.truncated((0, 0), (1,)))
    assert cc.c2 == 1.0 and cc.c6 == 1.0


@given(st.integers(1, 6), st.lists(st.floats(0, 6), min_size=6, max_size=6))
def test_c_sum_vanishes_for_products(r, nus):
    cc = c_constants(ModelParams.ginibre(nus[:r]))
    assert cc.c1 + cc.c2 + cc.c3 == 0.0


def test_symbol_tail_check():
    rep = symbol_tail_check(ModelParams.ginibre((0,)), 0.5, np.geomspace(20, 2000, 12))
    assert rep.ok and abs(rep.rate_fit) < 1e-3
    rep = symbol_tail_check(ModelParams.ginibre((0, 1, 2)), 0.3, np.geomspace(20, 2000, 12))
    assert rep.ok
    rep = symbol_tail_check(ModelParams.muttalib_borodin(0.0, 1.0), 0.5, np.geomspace(20, 2000, 12))
    assert rep.ok


def test_validation():
    with pytest.raises(ValidationError):
        ModelParams.ginibre(())
    with pytest.raises(ValidationError):
        ModelParams.truncated((1, 2), (0.5,))  # mu_1 <= nu_1
    with pytest.raises(ValidationError):
        ModelParams.muttalib_borodin(-1.0, 1.0)
    with pytest.raises(ValidationError):
        ModelParams.muttalib_borodin(0.0, 0.0)
    with pytest.raises(ValidationError):
        ModelParams.from_json('{"variant": "GinibreProduct", "r": 1, "nu": [0], "extra": 1}')
    with pytest.raises(ValidationError):
        ModelParams.from_json("not json")


@pytest.mark.parametrize("p", [
    ModelParams.ginibre((0, 1)),
    ModelParams.truncated((0, 1, 0), (2,), ell=(30, 12, 30)),
    ModelParams.muttalib_borodin(0.5, 2.0),
])
def test_json_round_trip(p):
    text = p.to_json()
    assert set(json.loads(text)) == {"variant", "r", "nu", "q", "mu", "alpha", "theta", "ell"}
    q = ModelParams.from_json(text)
    assert q == p and json.loads(q.to_json()) == json.loads(text)


def test_variant2_admissibility_and_scaling():
    p = ModelParams.truncated((0, 0), (1,))
    ell = ell_schedule(p, 10)
    q = p.with_ell(ell)
    check_admissible(q, 10)
    assert scaling_constant(q, 10) == 10 * (ell[0] - 10)
    with pytest.raises(AdmissibilityError):
        check_admissible(p.with_ell((10, 11)), 10)
