"""Row-stochastic loading matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidLoading

ROW_SUM_TOL = 1e-9


@dataclass
class LoadingMatrix:
    """A d x K nonnegative matrix whose rows sum to one.

    ``row_labels`` and ``col_labels`` default to ``range(d)`` and
    ``range(K)``.
    """

    entries: np.ndarray
    row_labels: list[int] = field(default_factory=list)
    col_labels: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.entries = np.atleast_2d(np.asarray(self.entries, dtype=float))
        if self.entries.ndim != 2:
            raise InvalidLoading("loading matrix must be two-dimensional")
        d, K = self.entries.shape
        if not self.row_labels:
            self.row_labels = list(range(d))
        if not self.col_labels:
            self.col_labels = list(range(K))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def K(self) -> int:
        return self.entries.shape[1]

    def validate(self, tol: float = ROW_SUM_TOL) -> "LoadingMatrix":
        check_loading(self.entries, tol)
        return self

    def support(self) -> np.ndarray:
        return self.entries > 0


def as_array(A) -> np.ndarray:
    if isinstance(A, LoadingMatrix):
        return A.entries
    return np.atleast_2d(np.asarray(A, dtype=float))


def check_loading(A, tol: float = ROW_SUM_TOL) -> np.ndarray:
    """Return ``A`` as an array, raising if it is not row-stochastic."""
    A = as_array(A)
    if not np.all(np.isfinite(A)):
        raise InvalidLoading("loading matrix has non-finite entries")
    if np.any(A < 0):
        raise InvalidLoading("loading matrix has negative entries")
    dev = np.abs(A.sum(axis=1) - 1.0)
    if np.any(dev > tol):
        worst = int(np.argmax(dev))
        raise InvalidLoading(
            f"row {worst} sums to {A[worst].sum():.15g}, deviation {dev[worst]:.3g} > {tol:g}"
        )
    return A
