"""Counting-process primitives for two-arm survival data.

Datasets are stored column-wise (numpy arrays) so that risk sets, event
counts, Nelson-Aalen increments and the log-rank statistic can be
computed with sort/searchsorted passes instead of per-subject loops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DatasetError,
    EmptyArmError,
    NegativeTimeError,
    NoEventsError,
    RaggedEndpointsError,
    UnknownStatusError,
    ZeroVarianceError,
)


@dataclass(frozen=True)
class SubjectRecord:
    """One participant: arm label plus per-endpoint (time, status) pairs."""

    subject_id: str
    arm: int
    times: dict[str, float]
    status: dict[str, int]


@dataclass(frozen=True)
class TrialDataset:
    """Two-arm multi-endpoint survival dataset in column form.

    Attributes
    ----------
    arm : (n,) int array of 0/1 labels.
    time : (n, J) float array of observed times (event or censoring).
    status : (n, J) int array, 1 = event, 0 = censored.
    endpoint_names : J distinct labels, in column order.
    subject_ids : optional row labels, carried through I/O only.
    """

    arm: np.ndarray
    time: np.ndarray
    status: np.ndarray
    endpoint_names: tuple[str, ...]
    subject_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "arm", np.asarray(self.arm, dtype=np.int64))
        time = np.atleast_2d(np.asarray(self.time, dtype=np.float64))
        status = np.atleast_2d(np.asarray(self.status, dtype=np.int64))
        if time.shape[0] == 1 and self.arm.shape[0] != 1:
            time = time.T
            status = status.T
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "endpoint_names", tuple(self.endpoint_names))

    @property
    def n(self) -> int:
        return self.arm.shape[0]

    @property
    def n_endpoints(self) -> int:
        return len(self.endpoint_names)

    @property
    def pi_hat(self) -> float:
        """Observed treated allocation fraction."""
        return float(self.arm.mean())

    def endpoint_index(self, endpoint) -> int:
        if isinstance(endpoint, (int, np.integer)):
            j = int(endpoint)
            if not 0 <= j < self.n_endpoints:
                raise KeyError(f"endpoint index {j} out of range")
            return j
        try:
            return self.endpoint_names.index(endpoint)
        except ValueError:
            raise KeyError(f"unknown endpoint {endpoint!r}") from None

    @classmethod
    def from_records(
        cls,
        records: Iterable[SubjectRecord],
        endpoint_names: Sequence[str] | None = None,
    ) -> "TrialDataset":
        records = list(records)
        if not records:
            raise DatasetError("dataset has no subjects")
        if endpoint_names is None:
            endpoint_names = tuple(records[0].times.keys())
        names = tuple(endpoint_names)
        n = len(records)
        time = np.empty((n, len(names)))
        status = np.empty((n, len(names)), dtype=np.int64)
        arm = np.empty(n, dtype=np.int64)
        ids = []
        for i, rec in enumerate(records):
            arm[i] = rec.arm
            ids.append(rec.subject_id)
            for j, name in enumerate(names):
                if name not in rec.times or name not in rec.status:
                    raise RaggedEndpointsError(
                        f"subject {rec.subject_id!r} is missing endpoint {name!r}"
                    )
                time[i, j] = rec.times[name]
                status[i, j] = rec.status[name]
            extra = set(rec.times) - set(names)
            if extra:
                raise RaggedEndpointsError(
                    f"subject {rec.subject_id!r} has unknown endpoints {sorted(extra)}"
                )
        return cls(arm, time, status, names, tuple(ids))


def validate_dataset(data: TrialDataset) -> TrialDataset:
    """Check structural invariants, returning the dataset unchanged.

    Raises
    ------
    EmptyArmError, NegativeTimeError, UnknownStatusError,
    RaggedEndpointsError, DatasetError
    """
    if data.n < 2:
        raise DatasetError(f"need at least 2 subjects, got {data.n}")
    if len(set(data.endpoint_names)) != data.n_endpoints:
        raise DatasetError("endpoint names are not distinct")
    if data.time.shape != (data.n, data.n_endpoints):
        raise RaggedEndpointsError(
            f"time table has shape {data.time.shape}, "
            f"expected {(data.n, data.n_endpoints)}"
        )
    if data.status.shape != data.time.shape:
        raise RaggedEndpointsError(
            f"status table has shape {data.status.shape}, "
            f"expected {data.time.shape}"
        )
    bad_arm = ~np.isin(data.arm, (0, 1))
    if bad_arm.any():
        raise DatasetError(
            f"arm labels must be 0 or 1; offending rows {np.nonzero(bad_arm)[0][:5].tolist()}"
        )
    for a in (0, 1):
        if not (data.arm == a).any():
            raise EmptyArmError(f"arm {a} has no subjects")
    if not np.isfinite(data.time).all() or (data.time < 0).any():
        rows = np.nonzero(~(np.isfinite(data.time)) | (data.time < 0))[0]
        raise NegativeTimeError(
            f"observed times must be finite and >= 0; offending rows {rows[:5].tolist()}"
        )
    bad_status = ~np.isin(data.status, (0, 1))
    if bad_status.any():
        rows = np.nonzero(bad_status.any(axis=1))[0]
        raise UnknownStatusError(
            f"status values must be 0 or 1; offending rows {rows[:5].tolist()}"
        )
    return data


@dataclass(frozen=True)
class EndpointTimeline:
    """Aggregated event history for one endpoint.

    times are the distinct observed times with >= 1 event, ascending;
    d0/d1 are per-arm event counts at each time, y0/y1 the per-arm
    at-risk counts just before it (observed time >= t).
    """

    endpoint: str
    times: np.ndarray
    d0: np.ndarray
    d1: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    n: int

    @property
    def e_hat(self) -> np.ndarray:
        """Treated at-risk fraction y1/(y0+y1) at each listed time."""
        return self.y1 / (self.y0 + self.y1)

    @property
    def total_events(self) -> int:
        return int(self.d0.sum() + self.d1.sum())

    def hazard_increments(self, arm: int) -> np.ndarray:
        """Nelson-Aalen increments d_a(t)/y_a(t); 0 where y_a(t) = 0."""
        d = self.d1 if arm == 1 else self.d0
        y = self.y1 if arm == 1 else self.y0
        return np.divide(d, y, out=np.zeros(len(d)), where=y > 0)


def _counts_at(sorted_values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    lo = np.searchsorted(sorted_values, grid, side="left")
    hi = np.searchsorted(sorted_values, grid, side="right")
    return hi - lo


def build_timeline(data: TrialDataset, endpoint) -> EndpointTimeline:
    """Aggregate one endpoint's events into the distinct-time form.

    Ties are collapsed into counts at a single time; a subject censored
    exactly at an event time is still in the risk set there.
    """
    j = data.endpoint_index(endpoint)
    t = data.time[:, j]
    s = data.status[:, j]
    event_times = np.unique(t[s == 1])
    if event_times.size == 0:
        raise NoEventsError(f"endpoint {data.endpoint_names[j]!r} has no events")
    mask1 = data.arm == 1
    t0 = np.sort(t[~mask1])
    t1 = np.sort(t[mask1])
    y0 = t0.size - np.searchsorted(t0, event_times, side="left")
    y1 = t1.size - np.searchsorted(t1, event_times, side="left")
    d0 = _counts_at(np.sort(t[~mask1 & (s == 1)]), event_times)
    d1 = _counts_at(np.sort(t[mask1 & (s == 1)]), event_times)
    return EndpointTimeline(
        endpoint=data.endpoint_names[j],
        times=event_times,
        d0=d0,
        d1=d1,
        y0=y0,
        y1=y1,
        n=data.n,
    )


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function: value y[k] on [x[k], x[k+1])."""

    x: np.ndarray
    y: np.ndarray

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.x, t_arr, side="right") - 1
        out = np.where(idx >= 0, self.y[np.maximum(idx, 0)], 0.0)
        if t_arr.ndim == 0:
            return float(out)
        return out


def nelson_aalen(tl: EndpointTimeline, arm: int) -> StepFunction:
    """Cumulative-hazard estimate for one arm, as a step function."""
    if arm not in (0, 1):
        raise DatasetError(f"arm must be 0 or 1, got {arm}")
    return StepFunction(tl.times, np.cumsum(tl.hazard_increments(arm)))


def logrank_numerator(data: TrialDataset, endpoint) -> float:
    """G = (1/n) * sum over event times of [d1 - e_hat*(d0+d1)].

    Equals the per-subject sum (1/n) * sum_i (A_i - e_hat(T_i))*status_i.
    """
    tl = build_timeline(data, endpoint)
    return _numerator_from_timeline(tl)


def _numerator_from_timeline(tl: EndpointTimeline) -> float:
    e = tl.e_hat
    return float(np.sum(tl.d1 - e * (tl.d0 + tl.d1)) / tl.n)


def logrank_z(data: TrialDataset, endpoint) -> float:
    """Standardized log-rank statistic, positive when the treated arm
    has more events than expected under equal hazards."""
    tl = build_timeline(data, endpoint)
    return _z_from_timeline(tl)


def _z_from_timeline(tl: EndpointTimeline) -> float:
    y = tl.y0 + tl.y1
    d = tl.d0 + tl.d1
    num = float(np.sum(tl.d1 - tl.e_hat * d))
    # hypergeometric variance with tie correction; y = 1 contributes 0
    ok = y > 1
    yk, dk = y[ok], d[ok]
    var = float(
        np.sum(dk * (tl.y0[ok] * tl.y1[ok] / yk**2) * ((yk - dk) / (yk - 1)))
    )
    if var <= 0.0:
        raise ZeroVarianceError(
            f"endpoint {tl.endpoint!r}: zero log-rank variance "
            f"({tl.total_events} events, all at singleton risk sets)"
        )
    return num / np.sqrt(var)
