"""Independence graphs and maximum clique search.

Vertex sets are handled as Python ``int`` bitsets: bit ``v`` set means
vertex ``v`` is in the set. Both solvers return the lexicographically
smallest maximum clique (as a sorted tuple), so downstream results do not
depend on which solver ran.
"""

from __future__ import annotations

import logging
import math
import sys
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import SolverDisagreement
from .extremal_stats import chi_values, min_sum_product

log = logging.getLogger(__name__)

Solver = Literal["bron_kerbosch", "branch_and_bound", "brute_force"]

# auto picks branch-and-bound below this complement-edge density
AUTO_COMPLEMENT_DENSITY = 0.25


@dataclass
class IndependenceGraph:
    adjacency: np.ndarray
    delta: float = float("nan")
    neighbors: list[int] = field(init=False, repr=False)

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        adj = adj | adj.T
        np.fill_diagonal(adj, False)
        self.adjacency = adj
        self.neighbors = [_mask_from_bools(row) for row in adj]

    @property
    def d(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def complement_density(self) -> float:
        pairs = self.d * (self.d - 1) / 2
        if pairs == 0:
            return 0.0
        return (pairs - self.n_edges) / pairs

    def is_clique(self, vertices: Sequence[int]) -> bool:
        vs = list(vertices)
        return all(self.adjacency[a, b] for a, b in combinations(vs, 2))

    def with_edge(self, i: int, j: int) -> "IndependenceGraph":
        adj = self.adjacency.copy()
        adj[i, j] = adj[j, i] = True
        return IndependenceGraph(adj, self.delta)

    @classmethod
    def from_edges(cls, d: int, edges) -> "IndependenceGraph":
        adj = np.zeros((d, d), dtype=bool)
        for i, j in edges:
            adj[i, j] = adj[j, i] = True
        return cls(adj)


@dataclass
class CliqueResult:
    vertices: tuple[int, ...]
    solver: Solver
    elapsed: float
    nodes_explored: int

    @property
    def size(self) -> int:
        return len(self.vertices)


@dataclass
class BenchmarkRecord:
    d: int
    s: int
    rep: int
    t_bk: float
    t_bnb: float
    clique_size: int
    sizes_agree: bool


def build_independence_graph(chi, delta: float) -> IndependenceGraph:
    """Edge ``(i, j)`` iff ``i != j`` and ``chi[i, j] <= delta``."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    values = chi_values(chi)
    adj = values <= delta
    np.fill_diagonal(adj, False)
    return IndependenceGraph(adj, float(delta))


# -- bitset helpers ---------------------------------------------------------

def _mask_from_bools(row) -> int:
    mask = 0
    for v in np.flatnonzero(row):
        mask |= 1 << int(v)
    return mask


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _to_tuple(mask: int) -> tuple[int, ...]:
    return tuple(_iter_bits(mask))


def greedy_coloring_bound(neighbors: list[int], P: int) -> int:
    """Number of colours used by sequential greedy colouring of ``P``.

    Any clique inside ``P`` uses distinct colours, so this bounds its size.
    """
    colors = 0
    uncolored = P
    while uncolored:
        colors += 1
        q = uncolored
        while q:
            low = q & -q
            v = low.bit_length() - 1
            uncolored ^= low
            q &= ~neighbors[v]
            q ^= low
    return colors


# -- searches ---------------------------------------------------------------
# Each search returns (mask, nodes) with ``mask`` a clique in ``P`` of size
# strictly greater than ``lower``, or 0 if none exists.

class _Counter:
    __slots__ = ("nodes",)

    def __init__(self):
        self.nodes = 0


def _bk_search(neighbors: list[int], P: int, lower: int) -> tuple[int, int]:
    best_size = lower
    best = 0
    ctr = _Counter()

    def expand(R: int, rsize: int, P: int, X: int):
        nonlocal best_size, best
        ctr.nodes += 1
        if not P:
            if rsize > best_size:
                best_size, best = rsize, R
            return
        if rsize + P.bit_count() <= best_size:
            return
        # Tomita pivot: maximise |P & N(u)|
        pivot_cover = -1
        pivot = 0
        for u in _iter_bits(P | X):
            c = (P & neighbors[u]).bit_count()
            if c > pivot_cover:
                pivot_cover, pivot = c, u
        for v in _iter_bits(P & ~neighbors[pivot]):
            bit = 1 << v
            nv = neighbors[v]
            expand(R | bit, rsize + 1, P & nv, X & nv)
            P &= ~bit
            X |= bit
            if rsize + P.bit_count() <= best_size:
                return

    expand(0, 0, P, 0)
    return best, ctr.nodes


def _degree_order(neighbors: list[int], P: int) -> list[int]:
    """Degeneracy order: repeatedly move a minimum-degree vertex (lowest
    index on ties) to the back, so the front holds the densest core."""
    remaining = P
    deg = {v: (neighbors[v] & P).bit_count() for v in _iter_bits(P)}
    back = []
    while remaining:
        v = min(_iter_bits(remaining), key=lambda u: (deg[u], u))
        back.append(v)
        remaining &= ~(1 << v)
        for u in _iter_bits(neighbors[v] & remaining):
            deg[u] -= 1
    return back[::-1]


def _bnb_search(neighbors: list[int], P: int, lower: int) -> tuple[int, int]:
    """Depth-first search over the binary program ``max sum x`` subject to
    ``x_i + x_j <= 1`` on non-edges.

    Setting ``x_v = 1`` drops every non-neighbour of ``v``; ``x_v = 0``
    drops ``v``. Vertices are relabelled by decreasing degree, so greedy
    colouring visits high-degree vertices first. Each node colours its
    candidates once and branches on them in decreasing colour order; the
    colour of a vertex bounds any clique among it and the candidates still
    ahead of it.
    """
    order = _degree_order(neighbors, P)
    pos = {v: i for i, v in enumerate(order)}
    nbr = []
    for v in order:
        m = 0
        for u in _iter_bits(neighbors[v] & P):
            m |= 1 << pos[u]
        nbr.append(m)

    best_size = lower
    best = 0
    ctr = _Counter()

    def expand(R: int, rsize: int, P: int):
        nonlocal best_size, best
        ctr.nodes += 1
        # greedy sequential colouring, colour classes in label order
        verts = []
        cols = []
        uncolored = P
        col = 0
        kmin = best_size - rsize
        while uncolored:
            col += 1
            q = uncolored
            while q:
                low = q & -q
                v = low.bit_length() - 1
                q &= ~(nbr[v] | low)
                uncolored ^= low
                if col >= kmin:
                    verts.append(v)
                    cols.append(col)
        for idx in range(len(verts) - 1, -1, -1):
            if rsize + cols[idx] <= best_size:
                return
            v = verts[idx]
            bit = 1 << v
            sub = P & nbr[v]
            if sub:
                expand(R | bit, rsize + 1, sub)
            elif rsize + 1 > best_size:
                best_size, best = rsize + 1, R | bit
            P &= ~bit

    if P:
        expand(0, 0, (1 << len(order)) - 1)
    mask = 0
    for i in _iter_bits(best):
        mask |= 1 << order[i]
    return mask, ctr.nodes


def _brute_search(neighbors: list[int], P: int, lower: int) -> tuple[int, int]:
    verts = _to_tuple(P)
    nodes = 0
    for size in range(len(verts), lower, -1):
        for combo in combinations(verts, size):
            nodes += 1
            ok = True
            for a, b in combinations(combo, 2):
                if not (neighbors[a] >> b) & 1:
                    ok = False
                    break
            if ok:
                mask = 0
                for v in combo:
                    mask |= 1 << v
                return mask, nodes
    return 0, nodes


def _lexicographic_maximum(neighbors: list[int], d: int, omega: int, witness: int,
                           search: Callable[[list[int], int, int], tuple[int, int]]
                           ) -> tuple[int, int]:
    """Smallest sorted maximum clique, scanning vertices in ascending order.

    Vertex ``v`` is kept iff some maximum clique extends the vertices kept
    so far plus ``v``. ``witness`` is any maximum clique found earlier; it
    answers the question for free whenever it contains the current prefix.
    """
    chosen = 0
    size = 0
    P = (1 << d) - 1
    nodes = 0
    for v in range(d):
        if size == omega:
            break
        if not (P >> v) & 1:
            continue
        bit = 1 << v
        need = omega - size - 1
        sub = P & neighbors[v] & ~((bit << 1) - 1)
        if (witness & bit) and not (chosen & ~witness):
            keep = True
        elif need == 0:
            keep = True
        elif sub.bit_count() < need:
            keep = False
        else:
            found, n = search(neighbors, sub, need - 1)
            nodes += n
            keep = found != 0
            if keep:
                witness = chosen | bit | found
        if keep:
            chosen |= bit
            size += 1
            P = sub
        else:
            P &= ~bit
    if size != omega:
        raise AssertionError("canonical clique extraction lost the optimum")
    return chosen, nodes


_SEARCHES = {
    "bron_kerbosch": _bk_search,
    "branch_and_bound": _bnb_search,
    "brute_force": _brute_search,
}


def _solve(g: IndependenceGraph, solver: Solver) -> CliqueResult:
    search = _SEARCHES[solver]
    d = g.d
    if d == 0:
        return CliqueResult((), solver, 0.0, 0)
    limit = sys.getrecursionlimit()
    if limit < 4 * d + 100:
        sys.setrecursionlimit(4 * d + 100)
    t0 = time.perf_counter()
    full = (1 << d) - 1
    witness, nodes = search(g.neighbors, full, 0)
    omega = witness.bit_count()
    clique, extra = _lexicographic_maximum(g.neighbors, d, omega, witness, search)
    elapsed = time.perf_counter() - t0
    vertices = _to_tuple(clique)
    if __debug__ and not g.is_clique(vertices):
        raise AssertionError(f"{solver} returned a non-clique {vertices}")
    return CliqueResult(vertices, solver, elapsed, nodes + extra)


def max_clique_bron_kerbosch(g: IndependenceGraph) -> CliqueResult:
    """Maximum clique by Bron-Kerbosch with Tomita pivoting.

    Only the incumbent is tracked, with the ``|R| + |P|`` size bound.
    """
    return _solve(g, "bron_kerbosch")


def max_clique_branch_and_bound(g: IndependenceGraph) -> CliqueResult:
    """Maximum clique via branch-and-bound on the edge-constrained binary program."""
    return _solve(g, "branch_and_bound")


def max_clique_brute_force(g: IndependenceGraph) -> CliqueResult:
    """Exhaustive subset enumeration, largest sizes first. Only for small ``d``."""
    return _solve(g, "brute_force")


SOLVER_ALIASES = {
    "bk": "bron_kerbosch",
    "bron_kerbosch": "bron_kerbosch",
    "bnb": "branch_and_bound",
    "branch_and_bound": "branch_and_bound",
    "brute_force": "brute_force",
}


def choose_solver(g: IndependenceGraph) -> Solver:
    if g.complement_density() < AUTO_COMPLEMENT_DENSITY:
        return "branch_and_bound"
    return "bron_kerbosch"


def max_clique(g: IndependenceGraph, solver: str = "auto") -> CliqueResult:
    if solver == "auto":
        name = choose_solver(g)
    else:
        try:
            name = SOLVER_ALIASES[solver]
        except KeyError:
            raise ValueError(f"unknown solver {solver!r}") from None
    return _solve(g, name)


# -- benchmark --------------------------------------------------------------

def benchmark_graph(d: int, s: int, rng: np.random.Generator, n_pure: int = 20) -> IndependenceGraph:
    """Graph at threshold 0 for a loading matrix with ``n_pure`` pure rows and
    mixed rows of support size exactly ``s``."""
    from .simulate import generate_loading

    A = generate_loading(d, n_pure, support_sizes=[s], rng=rng)
    return build_independence_graph(min_sum_product(A), 0.0)


def run_clique_benchmark(dims: Sequence[int], sparsities: Sequence[int], reps: int,
                         seed: int = 0, n_pure: int = 20) -> list[BenchmarkRecord]:
    """Time both solvers on identical graphs for every ``(d, s, rep)``.

    Raises :class:`SolverDisagreement` if the clique sizes differ.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    records = []
    for d in dims:
        for s in sparsities:
            for rep in range(reps):
                ss = np.random.SeedSequence(seed, spawn_key=(int(d), int(s), rep))
                g = benchmark_graph(int(d), int(s), np.random.default_rng(ss), n_pure)
                bk = max_clique_bron_kerbosch(g)
                bnb = max_clique_branch_and_bound(g)
                if bk.size != bnb.size:
                    raise SolverDisagreement(
                        f"d={d} s={s} rep={rep}: bron_kerbosch size {bk.size} != "
                        f"branch_and_bound size {bnb.size}"
                    )
                log.debug("d=%d s=%d rep=%d t_bk=%.4g t_bnb=%.4g", d, s, rep, bk.elapsed, bnb.elapsed)
                records.append(BenchmarkRecord(
                    d=int(d), s=int(s), rep=rep,
                    t_bk=max(bk.elapsed, 1e-9), t_bnb=max(bnb.elapsed, 1e-9),
                    clique_size=bk.size, sizes_agree=True,
                ))
    return records


def aggregate_log_ratios(records: Sequence[BenchmarkRecord]) -> list[dict]:
    """Per ``(d, s)``: mean of ``ln(t_bk / t_bnb)`` and the ratio of mean times."""
    groups: dict[tuple[int, int], list[BenchmarkRecord]] = {}
    for r in records:
        groups.setdefault((r.d, r.s), []).append(r)
    out = []
    for (d, s), rs in groups.items():
        logs = [math.log(r.t_bk / r.t_bnb) for r in rs]
        out.append({
            "d": d,
            "s": s,
            "reps": len(rs),
            "mean_log_ratio": float(np.mean(logs)),
            "ratio_of_means": float(np.mean([r.t_bk for r in rs]) / np.mean([r.t_bnb for r in rs])),
        })
    return out
