"""Marginal and conjunctive power for hierarchically tested endpoints.

All non-centrality means are magnitudes under the convention that every
endpoint's beneficial direction gives a positive standardized statistic,
so each hypothesis rejects when Z > z_(1-alpha).  alpha is one-sided:
callers wanting a two-sided 5% test pass alpha = 0.025.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np

from .errors import DomainError
from .mvn import (
    MvnProblem,
    mvn_probability,
    psd_repair,
    std_normal_cdf,
    std_normal_quantile,
)


def delta_from_hr(hr: float, events: int) -> float:
    """Non-centrality mean |ln(hr)| * sqrt(events/4) of a balanced
    log-rank test with the given event count."""
    if hr <= 0:
        raise DomainError(f"hazard ratio must be positive, got {hr}")
    if events < 1:
        raise DomainError(f"events must be >= 1, got {events}")
    return abs(math.log(hr)) * math.sqrt(events / 4.0)


def events_for_power(hr: float, power: float, alpha: float) -> int:
    """Smallest event count d with |ln(hr)|*sqrt(d/4) >= z_(1-alpha) + z_power."""
    if hr <= 0 or hr == 1.0:
        raise DomainError(f"need a positive hazard ratio != 1, got {hr}")
    if not 0.0 < power < 1.0:
        raise DomainError(f"power must be in (0, 1), got {power}")
    if not 0.0 < alpha < 0.5:
        raise DomainError(f"alpha must be in (0, 0.5), got {alpha}")
    needed = std_normal_quantile(1.0 - alpha) + std_normal_quantile(power)
    d = max(1, math.ceil(4.0 * (needed / abs(math.log(hr))) ** 2 - 1e-12))
    while delta_from_hr(hr, d) < needed:
        d += 1
    while d > 1 and delta_from_hr(hr, d - 1) >= needed:
        d -= 1
    return d


def marginal_power(delta: float, alpha: float) -> float:
    """Phi(delta - z_(1-alpha))."""
    if not 0.0 < alpha < 0.5:
        raise DomainError(f"alpha must be in (0, 0.5), got {alpha}")
    return std_normal_cdf(delta - std_normal_quantile(1.0 - alpha))


@dataclass(frozen=True)
class EndpointPlan:
    """One endpoint's planning inputs reduced to its non-centrality mean."""

    name: str
    delta: float

    @classmethod
    def from_hr(cls, name: str, hr: float, events: int) -> "EndpointPlan":
        return cls(name, delta_from_hr(hr, events))


@dataclass(frozen=True)
class PowerSpec:
    """Endpoints, their correlation matrix, and the testing level.

    corr rows/columns align with the endpoints tuple.  primary defaults
    to the first endpoint.
    """

    endpoints: tuple[EndpointPlan, ...]
    corr: np.ndarray
    alpha: float = 0.025
    primary: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "endpoints", tuple(self.endpoints))
        object.__setattr__(self, "corr", np.atleast_2d(np.asarray(self.corr, dtype=np.float64)))
        names = [e.name for e in self.endpoints]
        if len(set(names)) != len(names):
            raise DomainError("endpoint names must be distinct")
        if self.corr.shape != (len(names), len(names)):
            raise DomainError(
                f"corr shape {self.corr.shape} does not match {len(names)} endpoints"
            )
        if not 0.0 < self.alpha < 0.5:
            raise DomainError(f"alpha must be in (0, 0.5), got {self.alpha}")
        if self.primary is None:
            object.__setattr__(self, "primary", names[0])
        elif self.primary not in names:
            raise DomainError(f"primary {self.primary!r} is not an endpoint")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.endpoints)

    def delta_of(self, name: str) -> float:
        return self.endpoints[self.names.index(name)].delta


@dataclass(frozen=True)
class HierarchyResult:
    """A testing order (primary first) with its stepwise conjunctive powers."""

    order: tuple[str, ...]
    stepwise_power: tuple[float, ...]


def conjunctive_power(spec: PowerSpec, subset: Sequence[str] | None = None, seed: int = 0) -> float:
    """P(Z_j > z_(1-alpha) for every endpoint j in subset).

    Z is multivariate normal with the spec's deltas as means and its
    (PSD-repaired) correlation submatrix.  Deterministic given seed.
    """
    names = spec.names
    if subset is None:
        subset = names
    if not subset:
        raise DomainError("subset must be non-empty")
    idx = [names.index(s) for s in subset]
    deltas = np.array([spec.endpoints[i].delta for i in idx])
    sub = psd_repair(spec.corr[np.ix_(idx, idx)])
    z = std_normal_quantile(1.0 - spec.alpha)
    est = mvn_probability(
        MvnProblem(
            mean=deltas,
            corr=sub,
            lower=np.full(len(idx), z),
            upper=np.full(len(idx), np.inf),
            rng_seed=seed,
        )
    )
    return est.value


def optimize_hierarchy(spec: PowerSpec, seed: int = 0, exhaustive: bool = False) -> HierarchyResult:
    """Choose a testing order, primary first.

    Greedy (default): at each position pick the unplaced endpoint
    maximizing the conjunctive power of the prefix; ties broken by
    higher marginal power, then lexicographic name.  Exhaustive mode
    (<= 8 endpoints) scores every order by its total stepwise power
    (the expected number of rejections) as a cross-check.
    """
    names = spec.names
    secondaries = [n for n in names if n != spec.primary]
    if not secondaries:
        raise DomainError("need at least one secondary endpoint")
    if not exhaustive:
        order = [spec.primary]
        stepwise = [conjunctive_power(spec, order, seed)]
        remaining = sorted(secondaries)
        while remaining:
            scored = sorted(
                (
                    -conjunctive_power(spec, order + [c], seed),
                    -marginal_power(spec.delta_of(c), spec.alpha),
                    c,
                )
                for c in remaining
            )
            neg_p, _, best = scored[0]
            order.append(best)
            remaining.remove(best)
            stepwise.append(-neg_p)
        return HierarchyResult(tuple(order), tuple(stepwise))

    if len(names) > 8:
        raise DomainError("exhaustive mode supports at most 8 endpoints")
    best_key, best_result = None, None
    for perm in permutations(sorted(secondaries)):
        order = (spec.primary, *perm)
        stepwise = tuple(
            conjunctive_power(spec, order[: k + 1], seed) for k in range(len(order))
        )
        key = (-sum(stepwise), perm)
        if best_key is None or key < best_key:
            best_key, best_result = key, HierarchyResult(order, stepwise)
    return best_result


def sensitivity_sweep(
    spec: PowerSpec, shifts: Sequence[float], seed: int = 0
) -> list[dict]:
    """Recompute full-set power and the greedy order under additive
    off-diagonal correlation shifts (clamped to [-0.999, 0.999])."""
    rows = []
    j_dim = len(spec.names)
    off = ~np.eye(j_dim, dtype=bool)
    for shift in shifts:
        shifted = spec.corr.copy()
        shifted[off] = np.clip(shifted[off] + shift, -0.999, 0.999)
        shifted_spec = PowerSpec(spec.endpoints, psd_repair(shifted), spec.alpha, spec.primary)
        result = optimize_hierarchy(shifted_spec, seed)
        rows.append(
            {
                "shift": float(shift),
                "power": conjunctive_power(shifted_spec, None, seed),
                "order": result.order,
                "stepwise_power": result.stepwise_power,
            }
        )
    return rows
