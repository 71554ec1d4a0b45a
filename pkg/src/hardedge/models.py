"""Model parameters, symbol functions F and F_n, and closed-form constants."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AdmissibilityError, ValidationError
from .specialfn import log_gamma

VARIANTS = ("GinibreProduct", "TruncatedUnitaryProduct", "MuttalibBorodin")
_ALIASES = {
    "1": "GinibreProduct", "ginibre": "GinibreProduct",
    "2": "TruncatedUnitaryProduct", "truncated": "TruncatedUnitaryProduct",
    "3": "MuttalibBorodin", "muttalib-borodin": "MuttalibBorodin",
}
JSON_FIELDS = ("variant", "r", "nu", "q", "mu", "alpha", "theta", "ell")


@dataclass(frozen=True)
class ModelParams:
    variant: str
    r: int | None = None
    nu: tuple = ()
    q: int = 0
    mu: tuple = ()
    alpha: float | None = None
    theta: float | None = None
    ell: tuple | None = None

    def __post_init__(self):
        v = _ALIASES.get(str(self.variant).lower(), self.variant)
        if v not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}")
        object.__setattr__(self, "variant", v)
        object.__setattr__(self, "nu", tuple(float(x) for x in self.nu))
        object.__setattr__(self, "mu", tuple(float(x) for x in self.mu))
        if self.ell is not None:
            object.__setattr__(self, "ell", tuple(int(x) for x in self.ell))
        if self.j in (1, 2):
            if self.r is None or int(self.r) != self.r or self.r < 1:
                raise ValidationError("r must be a positive integer")
            object.__setattr__(self, "r", int(self.r))
            if len(self.nu) != self.r:
                raise ValidationError(f"nu must have length r={self.r}")
            if any(x <= -1 for x in self.nu):
                raise ValidationError("nu_j must exceed -1")
            if any(x != int(x) or x < 0 for x in self.nu):
                warnings.warn("non-integer or negative nu: symbol-level use only", stacklevel=3)
            if self.j == 1 and (self.q or self.mu):
                raise ValidationError("q/mu only apply to TruncatedUnitaryProduct")
            if self.j == 2:
                if not 0 <= self.q < self.r:
                    raise ValidationError("need 0 <= q < r")
                if len(self.mu) != self.q:
                    raise ValidationError(f"mu must have length q={self.q}")
                if any(m <= n for m, n in zip(self.mu, self.nu)):
                    raise ValidationError("need mu_k > nu_k")
            if self.alpha is not None or self.theta is not None:
                raise ValidationError("alpha/theta only apply to MuttalibBorodin")
        else:
            if self.alpha is None or self.theta is None:
                raise ValidationError("MuttalibBorodin needs alpha and theta")
            object.__setattr__(self, "alpha", float(self.alpha))
            object.__setattr__(self, "theta", float(self.theta))
            if self.alpha <= -1:
                raise ValidationError("alpha must exceed -1")
            if self.theta <= 0:
                raise ValidationError("theta must be positive")
            if self.r is not None or self.nu or self.q or self.mu:
                raise ValidationError("r/nu/q/mu do not apply to MuttalibBorodin")

    @property
    def j(self) -> int:
        return VARIANTS.index(self.variant) + 1

    # constructors
    @classmethod
    def ginibre(cls, nu: Sequence[float]) -> "ModelParams":
        return cls("GinibreProduct", r=len(nu), nu=tuple(nu))

    @classmethod
    def truncated(cls, nu, mu=(), ell=None) -> "ModelParams":
        return cls("TruncatedUnitaryProduct", r=len(nu), nu=tuple(nu), q=len(mu), mu=tuple(mu), ell=ell)

    @classmethod
    def muttalib_borodin(cls, alpha: float, theta: float) -> "ModelParams":
        return cls("MuttalibBorodin", alpha=alpha, theta=theta)

    # serialization
    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "r": self.r,
            "nu": list(self.nu) if self.j != 3 else None,
            "q": self.q if self.j == 2 else None,
            "mu": list(self.mu) if self.j == 2 else None,
            "alpha": self.alpha,
            "theta": self.theta,
            "ell": list(self.ell) if self.ell is not None else None,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        extra = set(d) - set(JSON_FIELDS)
        if extra:
            raise ValidationError(f"unknown model fields: {sorted(extra)}")
        if "variant" not in d:
            raise ValidationError("model JSON needs 'variant'")
        return cls(
            variant=d["variant"],
            r=d.get("r"),
            nu=tuple(d.get("nu") or ()),
            q=d.get("q") or 0,
            mu=tuple(d.get("mu") or ()),
            alpha=d.get("alpha"),
            theta=d.get("theta"),
            ell=tuple(d["ell"]) if d.get("ell") is not None else None,
        )

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"model JSON does not parse: {exc}") from None
        if not isinstance(d, dict):
            raise ValidationError("model JSON must be an object")
        return cls.from_dict(d)

    def with_ell(self, ell) -> "ModelParams":
        return ModelParams(self.variant, self.r, self.nu, self.q, self.mu, self.alpha, self.theta, tuple(ell))


@dataclass(frozen=True)
class ScalingInfo:
    rho: float
    tau: float
    nu_min: float


@dataclass(frozen=True)
class CConstants:
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float
    c7: float
    c8: float

    def as_dict(self) -> dict:
        return {f"c{i}": getattr(self, f"c{i}") for i in range(1, 9)}


# ---------------------------------------------------------------- symbols

def log_F(z, params: ModelParams):
    """ln F(z), a sum of principal log-Gamma values."""
    z = np.asarray(z, dtype=complex)
    if params.j == 3:
        a, th = params.alpha, params.theta
        return log_gamma(z + a / 2) - log_gamma((a / 2 + 1 - z) / th)
    out = log_gamma(z)
    for m in params.mu:
        out = out + log_gamma(1 + m - z)
    for n in params.nu:
        out = out - log_gamma(1 + n - z)
    return out


def ell_schedule(params: ModelParams, n: int, growth: str = "2n") -> tuple:
    """Truncation sizes l_1..l_r for variant 2 at size n.

    Indices k = 2..q+1 form the fixed set J with l_k = n + mu_{k-1}; the
    remaining l_k grow like 2n or n + ceil(sqrt n).
    """
    if params.j != 2:
        raise ValidationError("ell only applies to TruncatedUnitaryProduct")
    if growth == "2n":
        big = lambda k: 2 * n + int(math.ceil(params.nu[k])) + 1
    elif growth == "sqrt":
        big = lambda k: n + int(math.ceil(math.sqrt(n))) + int(math.ceil(params.nu[k])) + 1
    else:
        raise ValidationError(f"unknown growth {growth!r}")
    ell = []
    for k in range(params.r):
        if 1 <= k <= params.q:
            ell.append(n + int(round(params.mu[k - 1])))
        else:
            ell.append(big(k))
    return tuple(ell)


def fixed_set(params: ModelParams) -> tuple:
    """1-based indices of J (truncations with l_k - n held fixed)."""
    return tuple(range(2, params.q + 2)) if params.j == 2 else ()


def check_admissible(params: ModelParams, n: int) -> None:
    if params.j != 2:
        return
    if params.ell is None or len(params.ell) != params.r:
        raise AdmissibilityError("variant 2 at finite n needs ell of length r")
    for k, (l, v) in enumerate(zip(params.ell, params.nu), start=1):
        if l < n + v + 1:
            raise AdmissibilityError(f"l_{k}={l} < n + nu_{k} + 1")
    if sum(l - n - v for l, v in zip(params.ell, params.nu)) < n:
        raise AdmissibilityError("sum(l_k - n - nu_k) must be >= n")
    for k in fixed_set(params):
        if params.ell[k - 1] - n <= params.nu[k - 2]:
            raise AdmissibilityError(f"l_{k} - n must exceed nu_{k - 1}")


def log_F_finite_n(z, params: ModelParams, n: int):
    """ln F_n(z) for the size-n ensembles."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    z = np.asarray(z, dtype=complex)
    if params.j == 1:
        out = log_gamma(-n + 1 - z) - log_gamma(1 - z)
        for v in params.nu:
            out = out - log_gamma(1 + v - z)
        return out
    if params.j == 2:
        check_admissible(params, n)
        out = log_gamma(1 - n - z) - log_gamma(1 - z)
        for l, v in zip(params.ell, params.nu):
            out = out + log_gamma(1 + l - n - z) - log_gamma(1 + v - z)
        return out
    a, th = params.alpha, params.theta
    return log_F(z, params) + log_gamma(n + (a / 2 + 1 - z) / th)


def scaling_constant(params: ModelParams, n: int) -> float:
    if params.j == 1:
        return float(n)
    if params.j == 2:
        check_admissible(params, n)
        J = set(fixed_set(params))
        return float(n) * math.prod(l - n for k, l in enumerate(params.ell, start=1) if k not in J)
    return float(n) ** (1.0 / params.theta)


def log_F_scaled(z, params: ModelParams, n: int):
    """ln of c_n^z F_n(z) up to a z-independent constant, normalized at z=1/2
    against F.  Tends to ln F(z) as n grows; built from the reflected forms so
    that no Gamma factor with a huge argument cancels catastrophically."""
    z = np.asarray(z, dtype=complex)
    lc = math.log(scaling_constant(params, n))
    if params.j == 1:
        # F_n = (-1)^n F(z) / Gamma(z + n)
        f = lambda w: log_F(w, params) - log_gamma(w + n)
    elif params.j == 2:
        # Gamma(1-n-z)/Gamma(1-z) = (-1)^n Gamma(z)/Gamma(z+n)
        def f(w):
            out = log_gamma(w) - log_gamma(w + n)
            for l, v in zip(params.ell, params.nu):
                out = out + log_gamma(1 + l - n - w) - log_gamma(1 + v - w)
            return out
    else:
        f = lambda w: log_F_finite_n(w, params, n)
    const = f(np.array(0.5 + 0j)) + 0.5 * lc - log_F(np.array(0.5 + 0j), params)
    return f(z) + z * lc - const


# ---------------------------------------------------------------- constants

def nu_min(params: ModelParams) -> float:
    return min(params.nu) if params.j != 3 else float("nan")


def scaling_info(params: ModelParams) -> ScalingInfo:
    if params.j == 1:
        return ScalingInfo(1.0 / (params.r + 1), (nu_min(params) + 1) / 2, nu_min(params))
    if params.j == 2:
        return ScalingInfo(1.0 / (params.r - params.q + 1), (nu_min(params) + 1) / 2, nu_min(params))
    th = params.theta
    return ScalingInfo(th / (th + 1), 0.5, float("nan"))


def c_constants(params: ModelParams) -> CConstants:
    if params.j in (1, 2):
        r = params.r - params.q  # effective order; q = 0 for variant 1
        nm = nu_min(params)
        snu, smu = sum(params.nu), sum(params.mu)
        snu2, smu2 = sum(v * v for v in params.nu), sum(m * m for m in params.mu)
        d = snu - smu
        return CConstants(
            c1=1.0,
            c2=float(r),
            c3=-float(r + 1),
            c4=nm / 2 - d / (r + 1),
            c5=nm / 2,
            c6=r * nm / 2 - d,
            c7=(1 - r) / 2 * math.log(2 * math.pi),
            c8=(r + 1) / 8 * (nm * nm - 1.0 / 3) + 0.5 * (snu2 - smu2) - nm / 2 * d,
        )
    a, th = params.alpha, params.theta
    b2 = lambda x: x * x - x + 1.0 / 6  # Bernoulli polynomial B_2
    return CConstants(
        c1=1.0,
        c2=1.0 / th,
        c3=-(th + 1 + math.log(th)) / th,
        c4=(th + (th - 1) * a - 1) / (2 * (th + 1)),
        c5=a / 2,
        c6=(th - a - 1) / (2 * th),
        c7=-(th - a - 1) / (2 * th) * math.log(th),
        # 1/z coefficient of the Stirling expansion of both Gamma factors
        c8=(b2((1 + a) / 2) + th * b2((1 + a) / (2 * th))) / 2,
    )


def singularity_window(params: ModelParams) -> tuple[float, float]:
    """(largest pole of F on the left, smallest zero of F on the right)."""
    if params.j == 3:
        return -params.alpha / 2, params.alpha / 2 + 1
    # zeros come from 1/Gamma(1+nu-z); a numerator Gamma(1+mu-z) can cancel
    # some of them, so count multiplicities at the candidate points
    cands = sorted({1 + v + m for v in params.nu for m in range(64)})
    for p in cands:
        mult = sum(float(p - 1 - v).is_integer() and p - 1 - v >= 0 for v in params.nu)
        mult -= sum(float(p - 1 - m).is_integer() and p - 1 - m >= 0 for m in params.mu)
        if mult > 0:
            return 0.0, float(p)
    return 0.0, float("inf")


@dataclass(frozen=True)
class TailReport:
    x: float
    rate_fit: float
    rate_expected: float
    power_fit: float
    power_expected: float
    ok: bool
    details: dict = field(default_factory=dict)


def tail_exponents(params: ModelParams, x: float) -> tuple[float, float]:
    """(exponential rate, power) of |F(x+iy)| as |y| -> infinity."""
    if params.j == 1:
        r = params.r
        return math.pi * (r - 1) / 2, (r + 1) * (x - 0.5) - sum(params.nu)
    if params.j == 2:
        rq = params.r - params.q
        return math.pi * (rq - 1) / 2, (rq + 1) * (x - 0.5) + sum(params.mu) - sum(params.nu)
    a, th = params.alpha, params.theta
    return math.pi / 2 * (1 / th - 1), (1 + 1 / th) * x - 1 / th + a / 2 * (1 - 1 / th)


def symbol_tail_check(params: ModelParams, x: float, y_grid: Sequence[float], rel_tol: float = 0.02) -> TailReport:
    """Fit ln|F(x+iy)| = A|y| + B ln|y| + C over y_grid and compare A, B with
    the Stirling exponents."""
    y = np.abs(np.asarray(y_grid, dtype=float))
    if np.any(y < 10):
        raise ValidationError("symbol_tail_check needs |y| >= 10")
    val = log_F(x + 1j * np.asarray(y_grid, dtype=float), params).real
    X = np.column_stack([y, np.log(y), np.ones_like(y), 1.0 / y])
    coef, *_ = np.linalg.lstsq(X, val, rcond=None)
    rate_e, pow_e = tail_exponents(params, x)
    ok_rate = abs(coef[0] - rate_e) <= rel_tol * max(1.0, abs(rate_e))
    ok_pow = abs(coef[1] - pow_e) <= rel_tol * max(1.0, abs(pow_e))
    return TailReport(x, float(coef[0]), rate_e, float(coef[1]), pow_e, bool(ok_rate and ok_pow),
                      {"const": float(coef[2])})
