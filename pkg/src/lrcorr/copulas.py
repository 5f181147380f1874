"""Bivariate copula samplers with uniform margins.

gaussian: correlated normal pair mapped through the normal cdf.
clayton: gamma-frailty construction.
frank: conditional-distribution inversion.
gumbel: positive-stable frailty (Chambers-Mallows-Stuck stable draw);
    the parameter is the standard generator exponent alpha >= 1, with
    alpha = 1 giving independence.  The name "gumbel_paper" is accepted
    as an alias mapping theta to alpha = theta + 1 for configurations
    written against the shifted convention where theta = 0 means
    independence.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

from .errors import BadThetaError

COPULAS = ("gaussian", "clayton", "frank", "gumbel")


def _gaussian(theta, n, rng):
    if not -1.0 < theta < 1.0:
        raise BadThetaError(f"gaussian copula needs |theta| < 1, got {theta}")
    z = rng.standard_normal((n, 2))
    w = theta * z[:, 0] + np.sqrt(1.0 - theta * theta) * z[:, 1]
    return ndtr(z[:, 0]), ndtr(w)


def _clayton(theta, n, rng):
    if theta <= 0.0:
        raise BadThetaError(f"clayton copula needs theta > 0, got {theta}")
    g = rng.gamma(1.0 / theta, 1.0, n)
    e = rng.exponential(1.0, (n, 2))
    u = (1.0 + e / g[:, None]) ** (-1.0 / theta)
    return u[:, 0], u[:, 1]


def _frank(theta, n, rng):
    if theta == 0.0:
        raise BadThetaError("frank copula needs theta != 0")
    u1 = rng.random(n)
    p = rng.random(n)
    a = np.exp(-theta * u1)
    d = np.expm1(-theta)
    b = p * d / (a * (1.0 - p) + p)
    u2 = -np.log1p(b) / theta
    return u1, u2


def _gumbel(alpha, n, rng):
    if alpha < 1.0:
        raise BadThetaError(f"gumbel copula needs alpha >= 1, got {alpha}")
    if alpha == 1.0:
        u = rng.random((n, 2))
        return u[:, 0], u[:, 1]
    at = 1.0 / alpha
    v = rng.uniform(0.0, np.pi, n)
    w = rng.exponential(1.0, n)
    # positive-stable frailty with exponent at
    s = (np.sin((1.0 - at) * v) / w) ** ((1.0 - at) / at) * np.sin(at * v) / np.sin(v) ** (1.0 / at)
    e = rng.exponential(1.0, (n, 2))
    u = np.exp(-((e / s[:, None]) ** at))
    return u[:, 0], u[:, 1]


_SAMPLERS = {
    "gaussian": _gaussian,
    "clayton": _clayton,
    "frank": _frank,
    "gumbel": _gumbel,
}


def sample_copula(copula: str, theta: float, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Draw n dependent pairs (u1, u2) with uniform(0,1) margins."""
    if copula == "gumbel_paper":
        copula, theta = "gumbel", theta + 1.0
    try:
        sampler = _SAMPLERS[copula]
    except KeyError:
        raise BadThetaError(
            f"unknown copula {copula!r}; expected one of {COPULAS}"
        ) from None
    return sampler(theta, n, rng)
