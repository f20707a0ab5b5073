"""Pure-variable detection and loading-matrix estimation.

Pipeline on an extremal correlation matrix ``chi`` and threshold ``delta``:

1. :func:`pure_var` builds the graph of nearly independent pairs
   (``chi <= delta``), takes a maximum clique and grows one group of
   near-duplicates (``1 - chi <= delta``) around each clique vertex.
2. :func:`estimate_pure_rows` gives every grouped variable a basis row.
3. :func:`htsp` averages each remaining variable's correlation with every
   group, zeroes averages at or below ``delta`` and projects the survivors
   onto the simplex.
4. :func:`scram` chains the above and reads off overlapping clusters.

All indices are 0-based.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .clique import build_independence_graph, max_clique
from .errors import ContractViolation, InvalidInput, InvalidParameter
from .extremal_stats import chi_values
from .loading import LoadingMatrix

log = logging.getLogger(__name__)

SUM_TOL = 1e-12


@dataclass
class SimplexVector:
    weights: np.ndarray
    support: tuple[int, ...]

    @classmethod
    def from_weights(cls, w: np.ndarray) -> "SimplexVector":
        return cls(weights=w, support=tuple(int(i) for i in np.flatnonzero(w > 0)))


@dataclass
class PurePartition:
    groups: list[tuple[int, ...]]
    # clique the groups were seeded from, and how many merges shrank a group
    clique: tuple[int, ...] = ()
    merge_shrinks: int = 0

    @property
    def k_hat(self) -> int:
        return len(self.groups)

    @property
    def pure_set(self) -> set[int]:
        return {j for g in self.groups for j in g}

    def validate(self, d: int | None = None) -> "PurePartition":
        seen: set[int] = set()
        for g in self.groups:
            if not g:
                raise ContractViolation("empty pure group")
            if seen.intersection(g):
                raise ContractViolation("pure groups overlap")
            seen.update(g)
        if d is not None and any(j < 0 or j >= d for j in seen):
            raise ContractViolation("pure group index out of range")
        return self


@dataclass
class SoftClusters:
    groups: list[tuple[int, ...]]
    d: int

    @classmethod
    def from_loading(cls, A) -> "SoftClusters":
        A = A.entries if isinstance(A, LoadingMatrix) else np.asarray(A)
        return cls(
            groups=[tuple(int(j) for j in np.flatnonzero(A[:, a] > 0)) for a in range(A.shape[1])],
            d=A.shape[0],
        )


@dataclass
class HtspRows:
    rows: dict[int, np.ndarray]
    # cluster-averaged correlations, per estimated row
    chi_bar: dict[int, np.ndarray]
    empty_support_rows: list[int] = field(default_factory=list)


@dataclass
class ScramResult:
    loading: LoadingMatrix
    clusters: SoftClusters
    partition: PurePartition
    delta: float
    chi_bar: dict[int, np.ndarray]
    flags: dict[str, list[int] | int]

    def __iter__(self):
        return iter((self.loading, self.clusters, self.partition))

    @property
    def k_hat(self) -> int:
        return self.partition.k_hat


def simplex_project(v) -> SimplexVector:
    """Euclidean projection of ``v`` onto ``{x >= 0, sum(x) = 1}``.

    Sort descending, take ``rho`` as the largest ``k`` with
    ``v_(k) > (sum_{i<=k} v_(i) - 1) / k``, shift by that ``tau`` and clip.
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise InvalidInput("cannot project an empty vector")
    if not np.all(np.isfinite(v)):
        raise InvalidInput("vector has non-finite entries")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    rho = int(np.nonzero(u > css / ks)[0][-1]) + 1
    tau = css[rho - 1] / rho
    w = np.maximum(v - tau, 0.0)
    # clean up rounding so the sum is 1 to machine precision
    pos = w > 0
    w[pos] += (1.0 - w.sum()) / pos.sum()
    w = np.maximum(w, 0.0)
    return SimplexVector.from_weights(w)


def merge(new_group: Iterable[int], partition: PurePartition | Sequence[Iterable[int]]) -> PurePartition:
    """Fold ``new_group`` into the partition.

    The first existing group that meets ``new_group`` is replaced by the
    intersection; if none does, ``new_group`` is appended.
    """
    new = set(int(j) for j in new_group)
    if not new:
        raise InvalidInput("new group must be non-empty")
    if isinstance(partition, PurePartition):
        groups, clique, shrinks = list(partition.groups), partition.clique, partition.merge_shrinks
    else:
        groups, clique, shrinks = [tuple(sorted(set(g))) for g in partition], (), 0
    for idx, g in enumerate(groups):
        inter = new.intersection(g)
        if inter:
            if len(inter) < len(g):
                shrinks += 1
                log.info("merge shrank group %s to %s", g, sorted(inter))
            groups[idx] = tuple(sorted(inter))
            return PurePartition(groups, clique, shrinks)
    groups.append(tuple(sorted(new)))
    return PurePartition(groups, clique, shrinks)


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 < delta < 0.5:
        raise InvalidParameter(f"delta must lie in (0, 0.5), got {delta}")
    return delta


def pure_var(chi_hat, delta: float, solver: str = "branch_and_bound") -> PurePartition:
    """Detect pure variables and the number of factors."""
    delta = _check_delta(delta)
    chi = chi_values(chi_hat)
    g = build_independence_graph(chi, delta)
    clique = max_clique(g, solver).vertices
    part = PurePartition([], clique=clique)
    for i in clique:
        near = np.flatnonzero(1.0 - chi[i] <= delta)
        members = {int(j) for j in near if j != i} | {int(i)}
        part = merge(members, part)
    return part


def estimate_pure_rows(partition: PurePartition) -> dict[int, np.ndarray]:
    """Basis-vector rows for every grouped variable, keyed by variable index."""
    K = partition.k_hat
    rows = {}
    for a, g in enumerate(partition.groups):
        e = np.zeros(K)
        e[a] = 1.0
        for j in g:
            rows[j] = e.copy()
    return rows


def cluster_average(chi, partition: PurePartition, j: int) -> np.ndarray:
    """``chi_bar[a]`` = mean of ``chi[i, j]`` over ``i`` in group ``a``."""
    return np.array([chi[list(g), j].mean() for g in partition.groups])


def htsp_row(chi_bar, delta: float) -> tuple[SimplexVector, bool]:
    """Threshold one row of cluster averages and project onto the simplex.

    Returns the estimate and whether the empty-support fallback fired
    (all weight on the largest average, lowest index on ties).
    """
    chi_bar = np.asarray(chi_bar, dtype=float)
    beta = np.where(chi_bar > delta, chi_bar, 0.0)
    S = np.flatnonzero(beta > 0)
    w = np.zeros_like(chi_bar)
    if S.size == 0:
        w[int(np.argmax(chi_bar))] = 1.0
        return SimplexVector.from_weights(w), True
    w[S] = simplex_project(beta[S]).weights
    return SimplexVector.from_weights(w), False


def htsp(chi_hat, delta: float, partition: PurePartition) -> HtspRows:
    """Estimate the rows of every variable outside the pure set."""
    delta = _check_delta(delta)
    if partition.k_hat < 1:
        raise InvalidInput("partition must contain at least one group")
    chi = chi_values(chi_hat)
    pure = partition.pure_set
    out = HtspRows(rows={}, chi_bar={})
    for j in range(chi.shape[0]):
        if j in pure:
            continue
        cb = cluster_average(chi, partition, j)
        sv, fallback = htsp_row(cb, delta)
        out.rows[j] = sv.weights
        out.chi_bar[j] = cb
        if fallback:
            out.empty_support_rows.append(j)
    return out


def _weak_signal_rows(chi_bar: dict[int, np.ndarray], delta: float) -> list[int]:
    # mixed rows whose surviving averages fall outside [2 delta, 1 - 2 delta]
    # or that keep fewer than two clusters
    flagged = []
    for j, cb in chi_bar.items():
        kept = cb[cb > delta]
        if kept.size < 2 or np.any(kept < 2 * delta) or np.any(kept > 1 - 2 * delta):
            flagged.append(j)
    return flagged


def scram(chi_hat, delta: float, solver: str = "branch_and_bound") -> ScramResult:
    """Estimate the loading matrix and its overlapping clusters."""
    delta = _check_delta(delta)
    chi = chi_values(chi_hat)
    d = chi.shape[0]
    partition = pure_var(chi, delta, solver).validate(d)
    rows = estimate_pure_rows(partition)
    mixed = htsp(chi, delta, partition)
    rows.update(mixed.rows)
    if len(rows) != d:
        raise AssertionError("some variable received no row estimate")
    A = np.vstack([rows[j] for j in range(d)])
    loading = LoadingMatrix(A)
    dev = np.abs(A.sum(axis=1) - 1.0)
    if np.any(dev > 1e-9) or np.any(A < 0):
        raise ContractViolation("estimated rows are not on the simplex")
    flags = {
        "empty_support_rows": mixed.empty_support_rows,
        "merge_shrinks": partition.merge_shrinks,
        "tie_warnings": [],
        "ssc_warning_rows": _weak_signal_rows(mixed.chi_bar, delta),
    }
    return ScramResult(
        loading=loading,
        clusters=SoftClusters.from_loading(A),
        partition=partition,
        delta=delta,
        chi_bar=mixed.chi_bar,
        flags=flags,
    )
