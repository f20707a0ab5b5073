"""Synthetic data: Clayton-dependent Pareto innovations, moving-maxima
factors, sparse row-stochastic loadings and the noisy observed panel."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .errors import InvalidLength, InvalidParameter
from .loading import LoadingMatrix

STREAMS = ("innovations", "supports", "weights", "noise")


@dataclass
class SimConfig:
    n: int = 5000
    d: int = 200
    K: int = 20
    rho: float = 0.8
    p: int = 2
    theta: float = 1.0
    seed: int = 1
    support_sizes: tuple[int, ...] = (2, 3, 4)
    weight_range: tuple[float, float] = (0.35, 0.65)
    noise: str = "standard_normal"

    def validate(self) -> "SimConfig":
        if self.n < 1:
            raise InvalidParameter("n must be >= 1")
        if self.d < 2:
            raise InvalidParameter("d must be >= 2")
        if not 1 <= self.K <= self.d:
            raise InvalidParameter("need 1 <= K <= d")
        if not 0.0 < self.rho < 1.0:
            raise InvalidParameter("rho must lie in (0, 1)")
        if self.p < 0:
            raise InvalidParameter("p must be >= 0")
        if self.theta <= 0:
            raise InvalidParameter("theta must be > 0")
        if self.noise != "standard_normal":
            raise InvalidParameter(f"unsupported noise {self.noise!r}")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GeneratedModel:
    A: LoadingMatrix
    Z: np.ndarray
    E: np.ndarray
    X: np.ndarray


def stream_rng(seed: int, label: str) -> np.random.Generator:
    """Independent generator for one named stream of a master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(zlib.crc32(label.encode()),)))


def _as_rng(seed_or_rng, label: str) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return stream_rng(int(seed_or_rng), label)


def sample_archimedean_pareto(K: int, theta: float, count: int, seed=0) -> np.ndarray:
    """``count`` draws of a K-vector with Clayton copula and Pareto(1) margins.

    Frailty construction: ``V ~ Gamma(1/theta)``, ``E_k ~ Exp(1)``,
    ``U_k = (1 + E_k / V) ** (-1/theta)`` and ``eps_k = 1 / (1 - U_k)``.
    """
    if theta <= 0:
        raise InvalidParameter(f"theta must be > 0, got {theta}")
    rng = _as_rng(seed, "innovations")
    V = rng.gamma(1.0 / theta, 1.0, size=(count, 1))
    E = rng.exponential(1.0, size=(count, K))
    # 1 - U computed without cancellation near U = 1
    one_minus_u = -np.expm1(-np.log1p(E / V) / theta)
    return 1.0 / one_minus_u


def moving_maxima(eps, rho: float, p: int) -> np.ndarray:
    """``Z_t = max_{l=0..p} rho**l * eps_{t+l}``; ``n + p`` rows give ``n``."""
    eps = np.asarray(eps, dtype=float)
    if eps.ndim == 1:
        eps = eps[:, None]
    if not 0.0 < rho < 1.0:
        raise InvalidParameter("rho must lie in (0, 1)")
    if p < 0:
        raise InvalidParameter("p must be >= 0")
    n = eps.shape[0] - p
    if n < 1:
        raise InvalidLength(f"need more than p={p} innovation rows, got {eps.shape[0]}")
    Z = eps[:n].copy()
    for lag in range(1, p + 1):
        np.maximum(Z, rho ** lag * eps[lag: lag + n], out=Z)
    return Z


def generate_loading(d: int, K: int, support_sizes: Sequence[int] = (2, 3, 4),
                     weight_range: tuple[float, float] = (0.35, 0.65), seed=0,
                     rng: np.random.Generator | None = None) -> np.ndarray:
    """Identity block on the first ``K`` rows; each later row picks a support
    size uniformly from ``support_sizes``, a uniform subset of columns and
    uniform weights, normalised to sum to one."""
    if K > d:
        raise InvalidParameter(f"K={K} exceeds d={d}")
    if max(support_sizes) > K:
        raise InvalidParameter("support size exceeds K")
    sizes = np.asarray(support_sizes)
    lo, hi = weight_range
    if rng is not None:
        r_sup = r_w = rng
    else:
        r_sup, r_w = _as_rng(seed, "supports"), _as_rng(seed, "weights")
    A = np.zeros((d, K))
    A[:K] = np.eye(K)
    for j in range(K, d):
        s = int(r_sup.choice(sizes))
        cols = r_sup.choice(K, size=s, replace=False)
        w = r_w.uniform(lo, hi, size=s)
        A[j, cols] = w / w.sum()
    return A


def synthesize_panel(cfg: SimConfig) -> GeneratedModel:
    cfg.validate()
    A = generate_loading(cfg.d, cfg.K, cfg.support_sizes, cfg.weight_range, seed=cfg.seed)
    eps = sample_archimedean_pareto(cfg.K, cfg.theta, cfg.n + cfg.p, seed=cfg.seed)
    Z = moving_maxima(eps, cfg.rho, cfg.p)
    E = stream_rng(cfg.seed, "noise").standard_normal((cfg.n, cfg.d))
    X = Z @ A.T + E
    return GeneratedModel(A=LoadingMatrix(A), Z=Z, E=E, X=X)
