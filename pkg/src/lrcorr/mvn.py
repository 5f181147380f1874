"""Multivariate normal rectangle probabilities and PSD repair.

The integrator uses the separation-of-variables transform over a
Cholesky factor whose variables are greedily reordered by conditional
interval probability, evaluated with a randomized quasi-Monte-Carlo
rule (Richtmyer lattice, tent periodization, independent random
shifts).  Results are deterministic given rng_seed: the generator is
numpy's PCG64 and all reductions run in a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DomainError, NotPSDError

_SQRT_PRIMES = np.sqrt(np.array(
    [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67],
    dtype=np.float64,
))
_MIN_EIG = 1e-8
_MAX_DIM = 20


def std_normal_cdf(x: float) -> float:
    """Standard normal distribution function."""
    return float(ndtr(x))


def std_normal_quantile(p: float) -> float:
    """Inverse of std_normal_cdf on (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile argument must be in (0, 1), got {p}")
    return float(ndtri(p))


def psd_repair(corr: np.ndarray) -> np.ndarray:
    """Project a symmetric unit-diagonal matrix onto the PSD cone.

    Returns the input unchanged when its smallest eigenvalue is already
    >= 1e-8; otherwise clips eigenvalues at 1e-8, reconstructs, and
    rescales back to a unit diagonal.
    """
    m = np.asarray(corr, dtype=np.float64)
    sym = (m + m.T) / 2.0
    w, v = np.linalg.eigh(sym)
    if w.min() >= _MIN_EIG:
        return m
    w = np.maximum(w, _MIN_EIG)
    b = (v * w) @ v.T
    d = np.sqrt(np.diag(b))
    out = b / np.outer(d, d)
    out = (out + out.T) / 2.0
    np.fill_diagonal(out, 1.0)
    return out


@dataclass(frozen=True)
class MvnProblem:
    """Rectangle probability problem P(lower <= Z <= upper), Z ~ N(mean, corr).

    Bounds may be +-inf.  target_abs_error steers how many lattice
    points the integrator spends; est_error in the result is a 3-sigma
    internal error estimate over the random shifts.
    """

    mean: np.ndarray
    corr: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    rng_seed: int = 0
    target_abs_error: float = 5e-5

    def __post_init__(self):
        for name in ("mean", "lower", "upper"):
            object.__setattr__(
                self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64))
            )
        object.__setattr__(self, "corr", np.atleast_2d(np.asarray(self.corr, dtype=np.float64)))


def _norm_pdf(x):
    return np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)


def _interval_prob(a, b):
    """P(a < Z < b) for scalars that may be +-inf."""
    fa = 0.0 if a == -np.inf else ndtr(a)
    fb = 1.0 if b == np.inf else ndtr(b)
    return fb - fa


def _ordered_cholesky(corr, lo, hi):
    """Cholesky factor with variables greedily reordered so that the
    tightest conditional intervals integrate first (stabilizes the
    separation-of-variables product)."""
    J = len(lo)
    r = np.array(corr, dtype=np.float64)
    lo = lo.copy()
    hi = hi.copy()
    perm = np.arange(J)
    chol = np.zeros((J, J))
    y = np.zeros(J)
    for k in range(J):
        best, best_p = k, np.inf
        for m in range(k, J):
            diag = r[m, m] - chol[m, :k] @ chol[m, :k]
            denom = np.sqrt(max(diag, 0.0))
            shift = chol[m, :k] @ y[:k]
            if denom > 1e-10:
                pm = _interval_prob((lo[m] - shift) / denom, (hi[m] - shift) / denom)
            else:
                pm = 1.0 if lo[m] < shift < hi[m] else 0.0
            if pm < best_p:
                best_p, best = pm, m
        if best != k:
            ix, xi = [k, best], [best, k]
            r[ix, :] = r[xi, :]
            r[:, ix] = r[:, xi]
            chol[ix, :] = chol[xi, :]
            lo[ix], hi[ix] = lo[xi], hi[xi]
            perm[ix] = perm[xi]
        diag = r[k, k] - chol[k, :k] @ chol[k, :k]
        if diag <= 1e-14:
            chol[k, k] = 0.0
            y[k] = chol[k, :k] @ y[:k]
            continue
        ck = np.sqrt(diag)
        chol[k, k] = ck
        for m in range(k + 1, J):
            chol[m, k] = (r[m, k] - chol[m, :k] @ chol[k, :k]) / ck
        shift = chol[k, :k] @ y[:k]
        a = (lo[k] - shift) / ck
        b = (hi[k] - shift) / ck
        pk = _interval_prob(a, b)
        if pk > 1e-300:
            y[k] = (_norm_pdf(a) - _norm_pdf(b)) / pk
        else:
            finite = [v for v in (a, b) if np.isfinite(v)]
            y[k] = float(np.mean(finite)) if finite else 0.0
    return chol, lo, hi


def _bound_cdfs(bound, s, ck, size):
    """Vector of conditional cdf values for one (possibly infinite) bound."""
    if bound == -np.inf:
        return np.zeros(size)
    if bound == np.inf:
        return np.ones(size)
    return ndtr((bound - s) / ck)


def _sov_batch(chol, lo, hi, x):
    """Mean separation-of-variables integrand over one point batch."""
    J = len(lo)
    npts = x.shape[0]
    if chol[0, 0] > 0.0:
        d = _bound_cdfs(lo[0], 0.0, chol[0, 0], npts)
        e = _bound_cdfs(hi[0], 0.0, chol[0, 0], npts)
    else:
        inside = 1.0 if lo[0] < 0.0 < hi[0] else 0.0
        d, e = np.zeros(npts), np.full(npts, inside)
    prob = e - d
    y = np.empty((npts, max(J - 1, 1)))
    for k in range(1, J):
        u = d + x[:, k - 1] * (e - d)
        y[:, k - 1] = ndtri(np.clip(u, 1e-16, 1.0 - 1e-16))
        s = y[:, :k] @ chol[k, :k]
        ck = chol[k, k]
        if ck > 0.0:
            d = _bound_cdfs(lo[k], s, ck, npts)
            e = _bound_cdfs(hi[k], s, ck, npts)
        else:
            inside = ((lo[k] < s) & (s < hi[k])).astype(np.float64)
            d, e = np.zeros(npts), inside
        prob = prob * np.maximum(e - d, 0.0)
    return float(prob.mean())


def _lattice(npts, q, shifts):
    i = np.arange(1, npts + 1, dtype=np.float64)[:, None]
    z = i * q[None, :] + shifts[None, :]
    z -= np.floor(z)
    return np.abs(2.0 * z - 1.0)


def mvn_probability(problem: MvnProblem, n_shifts: int = 10) -> "ProbabilityEstimate":
    """Estimate P(lower <= Z <= upper) for Z ~ N(mean, corr).

    The correlation matrix must already be PSD (run psd_repair first);
    an indefinite input raises NotPSDError.  Deterministic given
    problem.rng_seed.
    """
    mean, corr = problem.mean, problem.corr
    j_dim = mean.shape[0]
    if j_dim > _MAX_DIM:
        raise DomainError(f"dimension {j_dim} exceeds the supported {_MAX_DIM}")
    if corr.shape != (j_dim, j_dim):
        raise DomainError(f"corr shape {corr.shape} does not match dimension {j_dim}")
    if not np.allclose(corr, corr.T, atol=1e-8) or not np.allclose(
        np.diag(corr), 1.0, atol=1e-8
    ):
        raise DomainError("corr must be symmetric with unit diagonal")
    lo = problem.lower - mean
    hi = problem.upper - mean
    if not (lo < hi).all():
        raise DomainError("need lower < upper in every coordinate")

    if j_dim == 1:
        return ProbabilityEstimate(
            value=float(min(max(_interval_prob(lo[0], hi[0]), 0.0), 1.0)),
            est_error=1e-15,
        )

    w = np.linalg.eigvalsh((corr + corr.T) / 2.0)
    if w.min() < -_MIN_EIG:
        raise NotPSDError(
            f"correlation matrix is indefinite (min eigenvalue {w.min():.3e}); "
            "run psd_repair first"
        )

    try:
        chol, lo_p, hi_p = _ordered_cholesky(corr, lo, hi)
    except FloatingPointError:
        jittered = corr + 1e-10 * np.eye(j_dim)
        chol, lo_p, hi_p = _ordered_cholesky(jittered, lo, hi)

    q = _SQRT_PRIMES[: j_dim - 1]
    rng = np.random.Generator(np.random.PCG64(problem.rng_seed))
    npts = 2048
    value, err = 0.0, np.inf
    while True:
        batch = np.empty(n_shifts)
        for s in range(n_shifts):
            x = _lattice(npts, q, rng.random(j_dim - 1))
            batch[s] = _sov_batch(chol, lo_p, hi_p, x)
        value = float(batch.mean())
        err = 3.0 * float(batch.std(ddof=1)) / np.sqrt(n_shifts)
        if err <= problem.target_abs_error or npts >= (1 << 16):
            break
        npts *= 2
    return ProbabilityEstimate(value=min(max(value, 0.0), 1.0), est_error=err)


@dataclass(frozen=True)
class ProbabilityEstimate:
    """Integration result: value in [0,1] plus a 3-sigma error estimate."""

    value: float
    est_error: float
