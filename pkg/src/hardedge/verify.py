"""Invariant batteries behind `hardedge verify`."""
from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np

from .acceptance import CriterionResult, _timed, lemma_sets, variant_sets
from .acceptance import run as run_acceptance

MODULE_SUITES = ["specialfn", "models", "kernels", "fredholm", "asymptotics", "ensemble"]
SUITES = MODULE_SUITES + ["acceptance"]


def _check(name: str, fn: Callable[[], tuple[bool, dict]]) -> CriterionResult:
    return _timed(0, name, None)(fn)()


def _specialfn():
    from scipy.special import loggamma

    from .specialfn import bessel_j, log_gamma, wright_bessel

    rng = np.random.default_rng(0)
    z = rng.uniform(-20, 20, 1000) + 1j * rng.uniform(-50, 50, 1000)
    z = z[np.abs(z - np.round(z.real)) > 1e-3]

    def reflection():
        v = np.exp(log_gamma(z) + log_gamma(1 - z)) * np.sin(np.pi * z) / np.pi
        err = float(np.max(np.abs(v - 1)))
        return err <= 1e-10, {"max_err": err}

    def recurrence():
        d = log_gamma(z + 1) - log_gamma(z) - np.log(z)
        err = float(np.max(np.abs(d - 2j * np.pi * np.round(d.imag / (2 * np.pi)))))
        return err <= 1e-11, {"max_err": err}

    def scipy_match():
        err = float(np.max(np.abs(log_gamma(z) - loggamma(z)) / np.maximum(1, np.abs(loggamma(z)))))
        return err <= 1e-13, {"max_rel_err": err}

    def wright():
        x = np.linspace(0, 10, 41)
        err = float(np.max(np.abs(wright_bessel(1, 1, x) - bessel_j(0, 2 * np.sqrt(x)))))
        return err <= 1e-10, {"max_err": err}

    return [_check("log_gamma reflection", reflection), _check("log_gamma recurrence", recurrence),
            _check("log_gamma vs scipy", scipy_match), _check("Wright J_{1,1} vs J_0", wright)]


def _models():
    from .geometry import endpoints
    from .models import ModelParams, c_constants, scaling_info

    sets = {**variant_sets(), **lemma_sets()}

    def constants():
        bad = []
        for name, p in sets.items():
            cc, rho = c_constants(p), scaling_info(p).rho
            if not (cc.c1 > 0 and cc.c2 > 0 and 0 < rho < 1):
                bad.append(name)
            if p.j in (1, 2) and abs(cc.c1 + cc.c2 + cc.c3) > 1e-15:
                bad.append(name)
            phi, b1, b2 = endpoints(cc)
            if abs(b2 + b1.conjugate()) > 1e-14 or abs(math.sin(phi) - (cc.c2 - cc.c1) / (cc.c2 + cc.c1)) > 1e-14:
                bad.append(name)
        return not bad, {"bad": bad}

    def roundtrip():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ok = all(ModelParams.from_json(p.to_json()) == p for p in sets.values())
        return ok, {}

    return [_check("constants and endpoints", constants), _check("model JSON round trip", roundtrip)]


def _kernels():
    from .kernels import KernelEvaluator, kernel3_wright
    from .models import ModelParams

    def symmetric_bessel():
        ev = KernelEvaluator.build(ModelParams.muttalib_borodin(0.0, 1.0))
        x = np.array([0.3, 0.9, 1.7])
        K = ev.kernel_matrix(x, x)
        err = float(np.max(np.abs(K - K.T)))
        return err <= 1e-10, {"asym": err}

    def wright_oracle():
        ev = KernelEvaluator.build(ModelParams.muttalib_borodin(0.5, 2.0))
        x = np.array([0.4, 1.1])
        K = ev.kernel_matrix(x, x)
        ref = np.array([[kernel3_wright(a, b, 0.5, 2.0) for b in x] for a in x])
        err = float(np.max(np.abs(K - ref)))
        return err <= 1e-8, {"max_err": err}

    return [_check("Bessel-case symmetry", symmetric_bessel), _check("theta=2 vs Wright series", wright_oracle)]


def _fredholm():
    from .fredholm import det_nystrom
    from .kernels import KernelEvaluator
    from .models import ModelParams

    def bessel_exp():
        ev = KernelEvaluator.build(ModelParams.muttalib_borodin(0.0, 1.0))
        err = max(abs(det_nystrom(ev, s).logdet + s) for s in (0.5, 2.0, 5.0))
        return err <= 1e-8, {"max_err": err}

    def monotone():
        ev = KernelEvaluator.build(ModelParams.ginibre((0, 0)))
        d = [det_nystrom(ev, s).det for s in (0.5, 1.0, 2.0, 4.0)]
        return bool(np.all(np.diff(d) < 0) and 0 < d[-1] < 1), {"det": d}

    return [_check("theta=1, alpha=0 det = exp(-s)", bessel_exp), _check("monotone det curve", monotone)]


def _asymptotics():
    from .acceptance import criterion9

    def g_machinery():
        # criterion 9 without its point check at |zeta| = 1e3, which measures
        # the O(1/zeta) remainder rather than an error
        res = criterion9()
        d = res.detail
        if "error" in d:
            return False, d
        ok = d["jump"] <= 1e-8 and d["extrapolated"] <= 1e-8 and d["g1_tail"] <= 1e-8
        return ok, {k: d[k] for k in ("jump", "extrapolated", "g1_tail")}

    return [f() for f in _acc(3, 4, 7, 8)] + [_check("g-function invariants", g_machinery)]


def _ensemble():
    from .ensemble import SampleConfig, haar_unitary, sample
    from .models import ModelParams

    def determinism():
        p = ModelParams.ginibre((0,))
        a = sample(SampleConfig(p, 10, 1000, 5)).samples
        b = sample(SampleConfig(p, 10, 1000, 5)).samples
        return bool(np.array_equal(a, b)), {}

    def unitary():
        U = haar_unitary(12, np.random.default_rng(1))
        err = float(np.max(np.abs(U.conj().T @ U - np.eye(12))))
        return err < 1e-12, {"err": err}

    return [_check("seed determinism", determinism), _check("Haar unitarity", unitary)]


def _acc(*numbers):
    from .acceptance import CRITERIA

    return [f for f in CRITERIA if f.number in numbers]


_SUITE_FNS = {"specialfn": _specialfn, "models": _models, "kernels": _kernels, "fredholm": _fredholm,
              "asymptotics": _asymptotics, "ensemble": _ensemble}


def run_suite(name: str, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    if name == "acceptance":
        return run_acceptance(echo=echo)
    if name not in _SUITE_FNS:
        raise KeyError(name)
    res = _SUITE_FNS[name]()
    if echo:
        for r in res:
            echo(r.line())
    return res
