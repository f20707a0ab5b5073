"""Block maxima, rank pseudo-observations, madograms and extremal correlations.

The empirical pipeline is::

    series (n x d) -> block maxima (k x d) -> ranks / (k + 1) -> madogram -> chi

and :func:`min_sum_product` gives the population extremal correlation
matrix implied by a loading matrix.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import ContractViolation, InvalidBlockSize, InvalidInput, InvalidSubset
from .loading import check_loading

MADOGRAM_CAP = 1.0 / 6.0


@dataclass
class BlockMaximaPanel:
    maxima: np.ndarray
    block_size: int

    @property
    def k(self) -> int:
        return self.maxima.shape[0]

    @property
    def d(self) -> int:
        return self.maxima.shape[1]


@dataclass
class PseudoObservations:
    ranks: np.ndarray
    # column indices containing at least one tie
    tied_columns: list[int]

    @property
    def k(self) -> int:
        return self.ranks.shape[0]

    @property
    def has_ties(self) -> bool:
        return bool(self.tied_columns)


@dataclass
class MadogramMatrix:
    values: np.ndarray
    clipped: np.ndarray
    raw: np.ndarray


@dataclass
class ExtremalCorrelationMatrix:
    values: np.ndarray
    source: Literal["empirical", "theoretical"] = "empirical"

    @property
    def d(self) -> int:
        return self.values.shape[0]


def chi_values(chi) -> np.ndarray:
    """Plain array view of an :class:`ExtremalCorrelationMatrix` or array."""
    if isinstance(chi, ExtremalCorrelationMatrix):
        return chi.values
    return np.asarray(chi, dtype=float)


def as_series_panel(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise InvalidInput("series panel must be a non-empty n x d matrix")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("series panel contains non-finite values")
    return x


def extract_block_maxima(series, m: int) -> BlockMaximaPanel:
    """Componentwise maxima over consecutive disjoint blocks of length ``m``.

    Trailing rows that do not fill a complete block are dropped.
    """
    x = as_series_panel(series)
    n = x.shape[0]
    if int(m) != m or m < 1 or m > n:
        raise InvalidBlockSize(f"block size must satisfy 1 <= m <= n={n}, got {m}")
    m = int(m)
    k = n // m
    maxima = x[: k * m].reshape(k, m, x.shape[1]).max(axis=1)
    return BlockMaximaPanel(maxima=maxima, block_size=m)


def rank_transform(bm: BlockMaximaPanel | np.ndarray) -> PseudoObservations:
    """Scaled ranks ``#{i' : M_i' <= M_i} / (k + 1)`` per column.

    Equal values all receive the largest rank of their tie group.
    """
    maxima = bm.maxima if isinstance(bm, BlockMaximaPanel) else np.asarray(bm, dtype=float)
    if maxima.ndim == 1:
        maxima = maxima[:, None]
    k = maxima.shape[0]
    if k < 1:
        raise InvalidInput("need at least one block")
    counts = rankdata(maxima, method="max", axis=0)
    tied = [
        j for j in range(maxima.shape[1])
        if np.unique(maxima[:, j]).size < k
    ]
    return PseudoObservations(ranks=counts / (k + 1.0), tied_columns=tied)


def _madogram_row(u: np.ndarray, i: int) -> np.ndarray:
    # pairs (i, j) for j > i; one row per task keeps summation order fixed
    return 0.5 * np.mean(np.abs(u[:, i + 1:] - u[:, [i]]), axis=0)


def pairwise_madogram(u: PseudoObservations | np.ndarray, workers: int = 1) -> MadogramMatrix:
    """Empirical bivariate madograms, capped at 1/6.

    ``raw`` keeps the uncapped estimates; ``clipped`` marks pairs where the
    cap was applied. Each pair's value is computed independently, so the
    result does not depend on ``workers``.
    """
    ranks = u.ranks if isinstance(u, PseudoObservations) else np.asarray(u, dtype=float)
    k, d = ranks.shape
    if k < 1:
        raise InvalidInput("need at least one block")
    raw = np.zeros((d, d))
    rows = range(d - 1)
    if workers > 1 and d > 2:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: _madogram_row(ranks, i), rows))
    else:
        results = [_madogram_row(ranks, i) for i in rows]
    for i, vals in enumerate(results):
        raw[i, i + 1:] = vals
        raw[i + 1:, i] = vals
    clipped = raw > MADOGRAM_CAP
    np.fill_diagonal(clipped, False)
    values = np.minimum(raw, MADOGRAM_CAP)
    return MadogramMatrix(values=values, clipped=clipped, raw=raw)


def multivariate_madogram(u: PseudoObservations | np.ndarray, subset: Sequence[int]) -> float:
    """Mean over blocks of ``max_j U_j - mean_j U_j`` for ``j`` in ``subset``.

    Not capped. For two columns this equals the raw pairwise madogram.
    """
    ranks = u.ranks if isinstance(u, PseudoObservations) else np.asarray(u, dtype=float)
    idx = list(dict.fromkeys(int(j) for j in subset))
    if len(idx) < 2:
        raise InvalidSubset("multivariate madogram needs at least two distinct columns")
    sub = ranks[:, idx]
    return float(np.mean(sub.max(axis=1) - sub.mean(axis=1)))


def madogram_to_chi(nu):
    """``2 - (1/2 + nu) / (1/2 - nu)``, elementwise."""
    nu = np.asarray(nu, dtype=float)
    return 2.0 - (0.5 + nu) / (0.5 - nu)


def chi_from_madogram(mado: MadogramMatrix | np.ndarray) -> ExtremalCorrelationMatrix:
    values = mado.values if isinstance(mado, MadogramMatrix) else np.asarray(mado, dtype=float)
    off = ~np.eye(values.shape[0], dtype=bool)
    if np.any(values[off] < 0) or np.any(values[off] > MADOGRAM_CAP):
        raise ContractViolation("madogram entries must lie in [0, 1/6]")
    chi = np.clip(madogram_to_chi(values), 0.0, 1.0)
    np.fill_diagonal(chi, 1.0)
    return ExtremalCorrelationMatrix(values=chi, source="empirical")


def empirical_chi(series, m: int, workers: int = 1):
    """Convenience: raw series to ``(chi_hat, madogram, block maxima, ranks)``."""
    bm = extract_block_maxima(series, m)
    u = rank_transform(bm)
    mado = pairwise_madogram(u, workers=workers)
    return chi_from_madogram(mado), mado, bm, u


def min_sum_product(A) -> ExtremalCorrelationMatrix:
    """Extremal correlation implied by a row-stochastic loading matrix.

    ``chi[i, j] = sum_a min(A[i, a], A[j, a])``.
    """
    A = check_loading(A)
    chi = np.minimum(A[:, None, :], A[None, :, :]).sum(axis=2)
    np.fill_diagonal(chi, 1.0)
    return ExtremalCorrelationMatrix(values=chi, source="theoretical")
