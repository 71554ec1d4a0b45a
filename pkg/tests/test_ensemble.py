import math

import numpy as np
import pytest

from hardedge.errors import AdmissibilityError, ValidationError
from hardedge.ensemble import (EmpiricalCdf, SampleConfig, binomial_band_check, haar_unitary, ks_distance,
                               ks_two_sample, sample, smallest_eig_hermitian, survival_interpolant)
from hardedge.models import ModelParams, ell_schedule

GIN1 = ModelParams.ginibre((0,))


def test_seed_determinism_and_thread_independence(monkeypatch):
    a = sample(SampleConfig(GIN1, 8, 1200, 7)).samples
    monkeypatch.setenv("HARDEDGE_THREADS", "3")
    b = sample(SampleConfig(GIN1, 8, 1200, 7)).samples
    c = sample(SampleConfig(GIN1, 8, 1200, 8)).samples
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_haar_unitary():
    rng = np.random.default_rng(0)
    U = haar_unitary(20, rng)
    assert np.max(np.abs(U.conj().T @ U - np.eye(20))) < 1e-13
    V = haar_unitary(20, rng, cols=5, batch=(3,))
    assert V.shape == (3, 20, 5)
    assert np.max(np.abs(np.conj(np.swapaxes(V, -1, -2)) @ V - np.eye(5))) < 1e-13


def test_smallest_eig():
    assert smallest_eig_hermitian(np.diag([3.0, -1.0, 2.0])) == -1.0
    M = np.array([[2, 1j], [-1j, 2]])
    assert abs(smallest_eig_hermitian(M) - 1.0) < 1e-15
    stack = np.stack([np.eye(2), 2 * np.eye(2)])
    assert np.allclose(smallest_eig_hermitian(stack), [1.0, 2.0])
    with pytest.raises(ValidationError):
        smallest_eig_hermitian(np.ones((2, 3)))


def test_square_ginibre_law_is_exponential():
    # for one square complex Ginibre matrix, P(n x* > s) = exp(-s) at every n
    emp = sample(SampleConfig(GIN1, 6, 6000, 11))
    s = np.linspace(0.1, 3.0, 8)
    assert binomial_band_check(emp, s, np.exp(-s), n_sigma=4)["ok"]
    assert ks_distance(emp, lambda x: np.exp(-x)) < 1.63 / math.sqrt(6000) * 1.5


def test_truncated_sampler():
    p = ModelParams.truncated((0,), ())
    p = p.with_ell(ell_schedule(p, 5))
    emp = sample(SampleConfig(p, 5, 500, 3))
    assert len(emp) == 500 and emp.samples[0] >= 0 and emp.cn > 0
    with pytest.raises(AdmissibilityError):
        SampleConfig(ModelParams.truncated((0, 0), (1,), ell=(5, 5)), 5, 200, 0)


def test_empirical_cdf_and_ks():
    emp = EmpiricalCdf(np.array([0.1, 0.2, 0.3, 0.4]), 1.0)
    assert emp.cdf(0.25) == 0.5 and emp.survival(0.4) == 0.0
    assert abs(ks_distance(emp, lambda x: 1 - np.clip(x / 0.4, 0, 1)) - 0.25) < 1e-15
    assert ks_two_sample(emp, emp) == 0.0
    with pytest.raises(ValidationError):
        EmpiricalCdf(np.array([0.3, 0.1]), 1.0)


def test_survival_interpolant():
    fn = survival_interpolant(lambda t: math.exp(-t), 10.0)
    x = np.array([0.0, 0.5, 3.0, 20.0])
    assert np.allclose(fn(x)[:3], np.exp(-x[:3]), atol=2e-3) and fn(x)[3] == 0.0


def test_config_validation():
    with pytest.raises(ValidationError):
        SampleConfig(GIN1, 1, 200)
    with pytest.raises(ValidationError):
        SampleConfig(GIN1, 5, 50)
    with pytest.raises(ValidationError):
        SampleConfig(ModelParams.muttalib_borodin(0.0, 1.0), 5, 200)
    with pytest.raises(ValidationError):
        SampleConfig(GIN1, 5, 200, seed=-1)
