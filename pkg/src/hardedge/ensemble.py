"""Monte-Carlo sampling of the smallest squared singular value of matrix products."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AdmissibilityError, ConvergenceError, ValidationError
from .models import ModelParams, check_admissible, scaling_constant

__all__ = [
    "SampleConfig", "EmpiricalCdf", "haar_unitary", "sample_ginibre_product",
    "sample_truncated_unitary_product", "sample", "smallest_eig_hermitian", "ks_distance",
    "ks_two_sample", "survival_interpolant", "binomial_band_check",
]

CHUNK = 500  # samples per RNG stream; fixes the stream layout independently of threads


@dataclass(frozen=True)
class SampleConfig:
    params: ModelParams
    n: int
    num_samples: int
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("n must be >= 2")
        if self.num_samples < 100:
            raise ValidationError("num_samples must be >= 100")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.params.j == 3:
            raise ValidationError("sampling is available for variants 1 and 2 only")
        if self.params.j == 2:
            check_admissible(self.params, self.n)
        if any(float(v) != int(v) or v < 0 for v in self.params.nu):
            raise ValidationError("sampling needs non-negative integer nu")


@dataclass(frozen=True)
class EmpiricalCdf:
    samples: np.ndarray     # sorted scaled smallest eigenvalues c_n x*
    cn: float

    def __post_init__(self):
        if np.any(np.diff(self.samples) < 0):
            raise ValidationError("samples must be sorted")

    def __len__(self):
        return len(self.samples)

    def cdf(self, s):
        return np.searchsorted(self.samples, np.asarray(s, float), side="right") / len(self.samples)

    def survival(self, s):
        """Empirical P(c_n x* > s)."""
        return 1.0 - self.cdf(s)

    def quantiles(self, qs=(0.05, 0.25, 0.5, 0.75, 0.95)) -> dict:
        return {str(q): float(np.quantile(self.samples, q)) for q in qs}


def smallest_eig_hermitian(M) -> np.ndarray | float:
    """Smallest eigenvalue of a Hermitian matrix (or a stack of them)."""
    M = np.asarray(M)
    if M.shape[-1] != M.shape[-2]:
        raise ValidationError("matrix must be square")
    if not np.all(np.isfinite(M)):
        raise ConvergenceError("non-finite matrix entries")
    try:
        w = np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    out = w[..., 0]
    return float(out) if out.ndim == 0 else out


def _ginibre(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_unitary(n: int, rng: np.random.Generator, cols: int | None = None, batch: tuple = ()):
    """First `cols` columns of Haar unitaries: QR of a Ginibre matrix with the diagonal-phase fix."""
    cols = n if cols is None else cols
    q, r = np.linalg.qr(_ginibre(rng, batch + (n, cols)))
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def _sizes(params: ModelParams, n: int):
    nu = [0] + [int(v) for v in params.nu]
    return [(n + nu[j], n + nu[j - 1]) for j in range(1, params.r + 1)]


def _chunk_ginibre(params, n, m, rng):
    y = None
    for rows, cols in _sizes(params, n):
        g = _ginibre(rng, (m, rows, cols))
        y = g if y is None else g @ y
    return smallest_eig_hermitian(np.conj(np.swapaxes(y, -1, -2)) @ y)


def _chunk_truncated(params, n, m, rng):
    y = None
    for (rows, cols), ell in zip(_sizes(params, n), params.ell):
        t = haar_unitary(ell, rng, cols, (m,))[:, :rows, :]
        y = t if y is None else t @ y
    return smallest_eig_hermitian(np.conj(np.swapaxes(y, -1, -2)) @ y)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("HARDEDGE_THREADS", "1")))
    except ValueError:
        return 1


def _run(cfg: SampleConfig, chunk_fn) -> EmpiricalCdf:
    counts = [CHUNK] * (cfg.num_samples // CHUNK)
    if cfg.num_samples % CHUNK:
        counts.append(cfg.num_samples % CHUNK)
    streams = np.random.SeedSequence(cfg.seed).spawn(len(counts))

    def job(i):
        return chunk_fn(cfg.params, cfg.n, counts[i], np.random.default_rng(streams[i]))

    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        parts = list(pool.map(job, range(len(counts))))
    cn = scaling_constant(cfg.params, cfg.n)
    return EmpiricalCdf(np.sort(np.concatenate(parts) * cn), cn)


def sample_ginibre_product(cfg: SampleConfig) -> EmpiricalCdf:
    """Scaled smallest eigenvalue n x* of (G_r...G_1)^* (G_r...G_1)."""
    if cfg.params.j != 1:
        raise ValidationError("expected a GinibreProduct model")
    return _run(cfg, _chunk_ginibre)


def sample_truncated_unitary_product(cfg: SampleConfig) -> EmpiricalCdf:
    """Scaled smallest eigenvalue c_n x* of (T_r...T_1)^* (T_r...T_1)."""
    if cfg.params.j != 2:
        raise ValidationError("expected a TruncatedUnitaryProduct model")
    if cfg.params.ell is None:
        raise AdmissibilityError("truncation sizes ell are required")
    return _run(cfg, _chunk_truncated)


def sample(cfg: SampleConfig) -> EmpiricalCdf:
    return sample_ginibre_product(cfg) if cfg.params.j == 1 else sample_truncated_unitary_product(cfg)


def ks_distance(emp: EmpiricalCdf, survival: Callable) -> float:
    """sup_s |F_emp(s) - (1 - survival(s))| over the sample points."""
    x = emp.samples
    F = 1.0 - np.asarray(survival(x), float)
    m = len(x)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - F), np.max(F - (i - 1) / m)))


def ks_two_sample(a: EmpiricalCdf, b: EmpiricalCdf) -> float:
    from scipy.stats import ks_2samp

    return float(ks_2samp(a.samples, b.samples).statistic)


def survival_interpolant(det_fn: Callable[[float], float], s_max: float, n_points: int = 40) -> Callable:
    """Monotone interpolant of s -> det(1 - K|[0, s]) on [0, s_max] (1 at 0, clamped beyond)."""
    from scipy.interpolate import PchipInterpolator

    s = np.concatenate([[0.0], np.geomspace(s_max * 1e-3, s_max, n_points)])
    vals = np.array([1.0] + [det_fn(float(t)) for t in s[1:]])
    spline = PchipInterpolator(s, vals)

    def fn(x):
        x = np.asarray(x, float)
        return np.where(x <= s_max, spline(np.clip(x, 0.0, s_max)), vals[-1] * 0.0)

    return fn


def binomial_band_check(emp: EmpiricalCdf, s_points, expected, n_sigma: float = 3.0) -> dict:
    """Compare empirical survival at s_points with expected probabilities."""
    p = np.asarray(expected, float)
    obs = emp.survival(s_points)
    sigma = np.sqrt(np.maximum(p * (1 - p), 1e-300) / len(emp))
    z = np.abs(obs - p) / sigma
    return {"s": list(map(float, s_points)), "empirical": obs.tolist(), "expected": p.tolist(),
            "z": z.tolist(), "ok": bool(np.all(z <= n_sigma))}
