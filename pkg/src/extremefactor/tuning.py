"""Threshold schedules and data-driven choice of delta."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .clustering import PurePartition, ScramResult, scram
from .errors import InvalidParameter
from .extremal_stats import chi_values
from .loading import as_array

log = logging.getLogger(__name__)

DEFAULT_C1 = 1.2
DEFAULT_C2 = 1.0
DEFAULT_GRID = tuple(float(c) for c in np.geomspace(0.2, 2.5, 25))
# points evaluated between the coarse winner's neighbours
DEFAULT_REFINE = 21


@dataclass
class DeltaSchedule:
    d_m: float
    c1: float
    c2: float
    k: int
    m: int
    d: int
    value: float


@dataclass
class TuningPoint:
    c: float
    delta: float
    k_hat: int | None
    criterion: float
    # False when delta fell outside (0, 0.5) and the fit was skipped
    valid: bool = True
    stage: str = "coarse"


@dataclass
class TuningTrace:
    grid: list[TuningPoint]
    selected: int
    warnings: list[str] = field(default_factory=list)

    @property
    def delta_star(self) -> float:
        return self.grid[self.selected].delta

    @property
    def c_star(self) -> float:
        return self.grid[self.selected].c


def _check_dims(m, k, d):
    if m < 1:
        raise InvalidParameter(f"block size m must be >= 1, got {m}")
    if k < 2:
        raise InvalidParameter(f"block count k must be >= 2, got {k}")
    if d < 2:
        raise InvalidParameter(f"dimension d must be >= 2, got {d}")


def practical_delta(m: int, k: int, d: int, c1: float = DEFAULT_C1, c2: float = DEFAULT_C2) -> DeltaSchedule:
    """``c2 / m + c1 * sqrt(ln(d) / k)``."""
    _check_dims(m, k, d)
    if c1 < 0 or c2 < 0:
        raise InvalidParameter("c1 and c2 must be nonnegative")
    d_m = c2 / m
    value = d_m + c1 * math.sqrt(math.log(d) / k)
    return DeltaSchedule(d_m=d_m, c1=c1, c2=c2, k=k, m=m, d=d, value=value)


def theoretical_delta(d_m: float, k: int, d: int, c1: float) -> float:
    """``d_m + c1 * (sqrt(ln(kd)/k) + ln(k) ln(ln(k)) ln(kd) / k)``."""
    if k < 4:
        raise InvalidParameter(f"k must be >= 4, got {k}")
    if d < 2:
        raise InvalidParameter(f"d must be >= 2, got {d}")
    if d_m < 0:
        raise InvalidParameter("d_m must be nonnegative")
    lkd = math.log(k * d)
    lk = math.log(k)
    return d_m + c1 * (math.sqrt(lkd / k) + lk * math.log(lk) * lkd / k)


def goodness_criterion(A_hat, chi_hat, partition: PurePartition) -> float:
    """Squared gap between each positive loading and the variable's average
    correlation with that column's pure group.

    A pure variable compared with its own group contributes nothing.
    """
    A = as_array(A_hat)
    chi = chi_values(chi_hat)
    if A.shape[1] != partition.k_hat:
        raise InvalidParameter("A_hat columns do not match the partition")
    owner = {j: a for a, g in enumerate(partition.groups) for j in g}
    total = 0.0
    for j in range(A.shape[0]):
        for a in np.flatnonzero(A[j] > 0):
            if owner.get(j) == a:
                continue
            chi_bar = chi[list(partition.groups[a]), j].mean()
            total += (A[j, a] - chi_bar) ** 2
    return float(total)


def criterion_of(fit: ScramResult, chi_hat) -> float:
    return goodness_criterion(fit.loading, chi_hat, fit.partition)


def _evaluate(chi, c: float, base: float, d: int, solver: str, stage: str) -> TuningPoint:
    delta = c * base
    if not 0.0 < delta < 0.5:
        return TuningPoint(c, delta, None, math.inf, valid=False, stage=stage)
    fit = scram(chi, delta, solver)
    crit = criterion_of(fit, chi)
    log.debug("c=%.4g delta=%.4g k_hat=%d criterion=%.6g", c, delta, fit.k_hat, crit)
    return TuningPoint(c, delta, fit.k_hat, crit, stage=stage)


def _argmin(points: list[TuningPoint]) -> int:
    valid = [i for i, p in enumerate(points) if p.valid]
    return min(valid, key=lambda i: (points[i].criterion, points[i].delta))


def select_delta(chi_hat, m: int, k: int, d: int | None = None, grid: Sequence[float] | None = None,
                 c2: float = DEFAULT_C2, solver: str = "branch_and_bound",
                 refine: int = DEFAULT_REFINE) -> TuningTrace:
    """Fit on ``delta_l = c_l * (c2/m + sqrt(ln(d)/k))`` for every ``c_l`` and
    keep the fit with the smallest criterion (ties go to the smaller delta).

    With ``refine > 0`` a second pass evaluates ``refine`` evenly spaced
    values between the grid neighbours of the first-pass winner, and the
    minimiser is taken over both passes. Grid points whose delta is not in
    ``(0, 0.5)`` are recorded as invalid and skipped.
    """
    chi = chi_values(chi_hat)
    d = chi.shape[0] if d is None else d
    _check_dims(m, k, d)
    grid = sorted(float(c) for c in (DEFAULT_GRID if grid is None else grid))
    if not grid:
        raise InvalidParameter("grid must be non-empty")
    if grid[0] <= 0:
        raise InvalidParameter("grid values must be positive")
    base = c2 / m + math.sqrt(math.log(d) / k)
    points = [_evaluate(chi, c, base, d, solver, "coarse") for c in grid]
    warnings = []
    if not any(p.valid for p in points):
        warnings.append("no grid point gives delta in (0, 0.5)")
        log.warning(warnings[-1])
        return TuningTrace(points, 0, warnings)
    if all(p.k_hat == d for p in points if p.valid):
        warnings.append("every grid point gave a degenerate fit (k_hat = d)")
        log.warning(warnings[-1])
    i = _argmin(points)
    if refine > 0 and len(grid) > 1:
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        seen = set(grid)
        for c in np.linspace(lo, hi, refine):
            c = float(c)
            if c not in seen:
                points.append(_evaluate(chi, c, base, d, solver, "refine"))
    return TuningTrace(points, _argmin(points), warnings)
