"""Scores for an estimated loading matrix against the truth, and tail
probabilities of cluster failure sets."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidCluster, InvalidInput
from .extremal_stats import BlockMaximaPanel
from .loading import as_array

log = logging.getLogger(__name__)

EXACT_PERMUTATION_MAX_K = 8
_PERM_CHUNK = 4096


@dataclass
class L2Result:
    value: float
    # perm[a] = column of A_hat matched to true column a
    perm: tuple[int, ...]
    heuristic: bool


@dataclass
class EvalReport:
    k_true: int
    k_hat: int
    exact_recovery: bool
    l2_loss: float | None = None
    tfpp: float | None = None
    tfnp: float | None = None
    centroid_distance: float | None = None
    flags: dict = field(default_factory=dict)


@dataclass
class TailQuery:
    cluster: int
    thresholds: np.ndarray

    def __post_init__(self):
        self.thresholds = np.asarray(self.thresholds, dtype=float)
        if np.any(~(self.thresholds > 0)):
            raise InvalidInput("thresholds must be positive")


def _pair(A_hat, A) -> tuple[np.ndarray, np.ndarray]:
    Ah, At = as_array(A_hat), as_array(A)
    if Ah.shape != At.shape:
        raise InvalidInput(f"shape mismatch: {Ah.shape} vs {At.shape}")
    return Ah, At


def _bottleneck(Ah: np.ndarray, At: np.ndarray, perm) -> float:
    diff = Ah[:, list(perm)] - At
    return float(np.sqrt((diff ** 2).sum(axis=1)).max()) if diff.size else 0.0


def _exact_l2(Ah: np.ndarray, At: np.ndarray) -> L2Result:
    K = At.shape[1]
    best_val, best_perm = math.inf, tuple(range(K))
    perms = itertools.permutations(range(K))
    while True:
        chunk = np.array(list(itertools.islice(perms, _PERM_CHUNK)), dtype=int)
        if chunk.size == 0:
            break
        # (d, P, K) differences for a chunk of permutations
        diff = Ah[:, chunk] - At[:, None, :]
        vals = np.sqrt((diff ** 2).sum(axis=2)).max(axis=0)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_perm = float(vals[i]), tuple(int(x) for x in chunk[i])
    return L2Result(best_val, best_perm, heuristic=False)


def assignment_permutation(Ah: np.ndarray, At: np.ndarray) -> tuple[int, ...]:
    """Column matching minimising the summed Euclidean column distances."""
    cost = np.sqrt(((Ah[:, :, None] - At[:, None, :]) ** 2).sum(axis=0))
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(At.shape[1], dtype=int)
    perm[cols] = rows
    return tuple(int(x) for x in perm)


def l2_loss_detail(A_hat, A, perm: Sequence[int] | None = None) -> L2Result:
    """``min_P max_j ||(A_hat P)_j - A_j||_2``.

    Exhaustive over permutations for ``K <= 8``; above that the assignment
    match is used and the result is flagged as heuristic (an upper bound).
    A caller-supplied ``perm`` is evaluated as is.
    """
    Ah, At = _pair(A_hat, A)
    K = At.shape[1]
    if perm is not None:
        if sorted(perm) != list(range(K)):
            raise InvalidInput("perm is not a permutation of the columns")
        return L2Result(_bottleneck(Ah, At, perm), tuple(int(x) for x in perm), heuristic=False)
    if K <= EXACT_PERMUTATION_MAX_K:
        return _exact_l2(Ah, At)
    p = assignment_permutation(Ah, At)
    return L2Result(_bottleneck(Ah, At, p), p, heuristic=True)


def l2_loss(A_hat, A) -> float:
    return l2_loss_detail(A_hat, A).value


def pure_group_permutation(A_hat, A, pure_groups: Sequence[Sequence[int]]) -> tuple[int, ...] | None:
    """Match estimated columns to true ones through the estimated pure groups.

    Estimated column ``a`` is paired with the true column on which the rows
    of its pure group load most. Returns ``None`` unless this yields a
    bijection.
    """
    Ah, At = _pair(A_hat, A)
    K = At.shape[1]
    if len(pure_groups) != K:
        return None
    perm = [-1] * K
    for a, g in enumerate(pure_groups):
        b = int(np.argmax(At[list(g)].sum(axis=0)))
        if perm[b] != -1:
            return None
        perm[b] = a
    return tuple(perm)


def support_errors(A_hat, A, perm: Sequence[int] | None = None) -> tuple[float, float, dict]:
    """False positive and false negative proportions of the support.

    Columns of ``A_hat`` are reordered by ``perm`` (default: the permutation
    :func:`l2_loss_detail` picks). A zero denominator gives 0 and a flag.
    """
    Ah, At = _pair(A_hat, A)
    if perm is None:
        perm = l2_loss_detail(Ah, At).perm
    est = Ah[:, list(perm)] > 0
    true = At > 0
    flags = {}
    n_zero, n_pos = int((~true).sum()), int(true.sum())
    if n_zero == 0:
        flags["tfpp_empty_denominator"] = True
        tfpp = 0.0
    else:
        tfpp = float((est & ~true).sum()) / n_zero
    if n_pos == 0:
        flags["tfnp_empty_denominator"] = True
        tfnp = 0.0
    else:
        tfnp = float((~est & true).sum()) / n_pos
    return tfpp, tfnp, flags


def _unit_columns(A: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise InvalidInput("zero column cannot be normalised")
    return A / norms


def centroid_distance(A_hat, A) -> float:
    """``min_pi sqrt(sum_k ||a_hat_pi(k) - a_k||^2)`` over unit-norm columns."""
    Ah, At = as_array(A_hat), as_array(A)
    if Ah.shape[1] != At.shape[1] or Ah.shape[0] != At.shape[0]:
        raise InvalidInput("centroid distance needs equal shapes")
    Uh, Ut = _unit_columns(Ah), _unit_columns(At)
    cost = ((Uh[:, :, None] - Ut[:, None, :]) ** 2).sum(axis=0)
    r, c = linear_sum_assignment(cost)
    return float(math.sqrt(max(cost[r, c].sum(), 0.0)))


def evaluate(A_hat, A, pure_groups: Sequence[Sequence[int]] | None = None) -> EvalReport:
    """Full report; loss and support errors only when the column counts agree."""
    Ah, At = as_array(A_hat), as_array(A)
    k_hat, k_true = Ah.shape[1], At.shape[1]
    report = EvalReport(k_true=k_true, k_hat=k_hat, exact_recovery=k_hat == k_true)
    if k_hat != k_true or Ah.shape[0] != At.shape[0]:
        return report
    perm = pure_group_permutation(Ah, At, pure_groups) if pure_groups is not None else None
    res = l2_loss_detail(Ah, At, perm)
    report.l2_loss = res.value
    if res.heuristic:
        report.flags["l2_heuristic"] = True
    if perm is not None:
        report.flags["permutation_from_pure_groups"] = True
    report.tfpp, report.tfnp, f = support_errors(Ah, At, res.perm)
    report.flags.update(f)
    try:
        report.centroid_distance = centroid_distance(Ah, At)
    except InvalidInput:
        report.flags["centroid_zero_column"] = True
    return report


def tail_probability(A_hat, cluster: Sequence[int], thresholds) -> tuple[float, bool]:
    """``sum_l max_{j in cluster} A_hat[j, l] / x_j`` over every column ``l``.

    Returns the value and whether it exceeds 1 (reported unclamped).
    """
    A = as_array(A_hat)
    idx = list(cluster)
    if not idx:
        raise InvalidCluster("cluster is empty")
    x = np.asarray(thresholds, dtype=float)
    if x.shape != (A.shape[0],):
        raise InvalidInput(f"need one threshold per variable ({A.shape[0]}), got shape {x.shape}")
    if np.any(~(x > 0)):
        raise InvalidInput("thresholds must be positive")
    p = float((A[idx] / x[idx, None]).max(axis=0).sum())
    return p, p > 1.0


def tail_probability_query(A_hat, clusters, q: TailQuery) -> tuple[float, bool]:
    groups = clusters.groups if hasattr(clusters, "groups") else clusters
    if not 0 <= q.cluster < len(groups):
        raise InvalidCluster(f"cluster index {q.cluster} out of range")
    return tail_probability(A_hat, groups[q.cluster], q.thresholds)


def empirical_tail_probability(bm: BlockMaximaPanel | np.ndarray, cluster: Sequence[int], thresholds) -> float:
    """Fraction of blocks where some member of ``cluster`` exceeds its threshold."""
    M = bm.maxima if isinstance(bm, BlockMaximaPanel) else np.asarray(bm, dtype=float)
    idx = list(cluster)
    if not idx:
        raise InvalidCluster("cluster is empty")
    x = np.asarray(thresholds, dtype=float)
    if x.ndim == 0:
        x = np.full(M.shape[1], float(x))
    ratios = M[:, idx] / x[idx]
    return float(np.mean(ratios.max(axis=1) > 1.0))
