"""Per-subject influence contributions to standardized log-rank
statistics, and the correlation matrix between endpoints.

Each subject's contribution decomposes the centered statistic
n*(G - E(G)) into independent terms, so stacking columns across
endpoints and taking Pearson correlations estimates the correlation
between the standardized log-rank z-statistics.  Columns are computed
with prefix sums over the event grid; cost is O(n log n) per endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ZeroDenominatorError
from .survival import EndpointTimeline, TrialDataset, build_timeline


@dataclass(frozen=True)
class InfluenceMatrix:
    """Standardized influence values, one row per subject.

    scale[j] is the standardization denominator
    sqrt(pi*(1-pi)*D_j/n) with D_j the endpoint's event count;
    values[:, j] already include the division by scale[j].
    """

    values: np.ndarray
    endpoint_names: tuple[str, ...]
    scale: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "scale", np.asarray(self.scale, dtype=np.float64))
        object.__setattr__(self, "endpoint_names", tuple(self.endpoint_names))


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric unit-diagonal correlation estimate between endpoints."""

    entries: np.ndarray
    endpoint_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", np.asarray(self.entries, dtype=np.float64))
        object.__setattr__(self, "endpoint_names", tuple(self.endpoint_names))

    def __getitem__(self, pair):
        a, b = pair
        ia = self.endpoint_names.index(a) if isinstance(a, str) else a
        ib = self.endpoint_names.index(b) if isinstance(b, str) else b
        return float(self.entries[ia, ib])


def _prefix(values: np.ndarray) -> np.ndarray:
    out = np.empty(len(values) + 1)
    out[0] = 0.0
    np.cumsum(values, out=out[1:])
    return out


def _raw_column(data: TrialDataset, j: int, tl: EndpointTimeline) -> np.ndarray:
    """Unstandardized influence column for endpoint j."""
    n = data.n
    e = tl.e_hat
    dg0 = tl.hazard_increments(0)
    dg1 = tl.hazard_increments(1)
    diff = dg1 - dg0
    one_e = 1.0 - e

    p_dg0 = _prefix(dg0)
    p_e_dg0 = _prefix(e * dg0)
    p_1e_diff = _prefix(one_e * diff)
    p_1e2_diff = _prefix(one_e**2 * diff)
    p_e2_diff = _prefix(e**2 * diff)

    # deterministic centering constants: whole-grid sums weighted by the
    # per-arm at-risk fractions (these make the column sum identity exact)
    c1 = float(np.sum(tl.y1 / n * one_e**2 * diff))
    c0 = float(np.sum(tl.y0 / n * e**2 * diff))

    t_i = data.time[:, j]
    s_i = data.status[:, j].astype(np.float64)
    a_i = data.arm.astype(np.float64)

    # number of grid times <= each subject's observed time
    k = np.searchsorted(tl.times, t_i, side="right")

    # treated at-risk fraction at the subject's own time, from the full
    # dataset; the subject itself is at risk so the denominator is >= 1
    mask1 = data.arm == 1
    t0 = np.sort(t_i[~mask1])
    t1 = np.sort(t_i[mask1])
    y0_own = t0.size - np.searchsorted(t0, t_i, side="left")
    y1_own = t1.size - np.searchsorted(t1, t_i, side="left")
    e_own = y1_own / (y0_own + y1_own)

    return (
        (a_i - e_own) * s_i
        - a_i * p_dg0[k]
        + p_e_dg0[k]
        - a_i * p_1e_diff[k]
        + a_i * p_1e2_diff[k]
        - c1
        + (1.0 - a_i) * p_e2_diff[k]
        - c0
    )


def _scale(data: TrialDataset, tl: EndpointTimeline) -> float:
    pi = data.pi_hat
    return float(np.sqrt(pi * (1.0 - pi) * tl.total_events / data.n))


def influence_column(data: TrialDataset, endpoint, standardized: bool = True) -> np.ndarray:
    """Influence values for one endpoint, one entry per subject.

    With standardized=False the raw column is returned, whose sum equals
    n*(G - E(G)) exactly; the default divides by the standardization
    scale so that column correlations estimate z-statistic correlations.
    """
    j = data.endpoint_index(endpoint)
    tl = build_timeline(data, j)
    phi = _raw_column(data, j, tl)
    if standardized:
        phi = phi / _scale(data, tl)
    return phi


def expected_numerator(data: TrialDataset, endpoint) -> float:
    """Plug-in estimate of E(G): (1/n) * sum_t y1*(1-e_hat)*(dG1 - dG0)."""
    tl = build_timeline(data, endpoint)
    diff = tl.hazard_increments(1) - tl.hazard_increments(0)
    return float(np.sum(tl.y1 * (1.0 - tl.e_hat) * diff) / data.n)


def influence_matrix(
    data: TrialDataset, endpoints: Sequence | None = None
) -> InfluenceMatrix:
    """Stack standardized influence columns for several endpoints."""
    if endpoints is None:
        endpoints = data.endpoint_names
    names = tuple(
        data.endpoint_names[data.endpoint_index(e)] for e in endpoints
    )
    values = np.empty((data.n, len(names)))
    scale = np.empty(len(names))
    for col, e in enumerate(endpoints):
        j = data.endpoint_index(e)
        tl = build_timeline(data, j)
        scale[col] = _scale(data, tl)
        values[:, col] = _raw_column(data, j, tl) / scale[col]
    return InfluenceMatrix(values, names, scale)


def correlation_from_columns(values: np.ndarray, names: Sequence[str]) -> CorrelationMatrix:
    """Pearson correlations of the columns of an (n, J) matrix."""
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    means = values.mean(axis=0)
    centered = values - means
    ss = np.einsum("ij,ij->j", centered, centered)
    floor = n * (1e-12 * np.maximum(1.0, np.abs(means))) ** 2
    degenerate = np.nonzero(ss <= floor)[0]
    if degenerate.size:
        j = int(degenerate[0])
        raise ZeroDenominatorError(
            f"influence column {names[j]!r} has zero variance"
        )
    m = (centered.T @ centered) / np.sqrt(np.outer(ss, ss))
    m = np.clip((m + m.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(m, 1.0)
    return CorrelationMatrix(m, tuple(names))


def correlation_matrix(
    data: TrialDataset, endpoints: Sequence | None = None
) -> CorrelationMatrix:
    """Estimated correlation matrix between standardized log-rank
    statistics, from stacked influence columns."""
    infl = influence_matrix(data, endpoints)
    return correlation_from_columns(infl.values, infl.endpoint_names)
