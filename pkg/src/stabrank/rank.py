"""Exact and approximate stabilizer rank by dictionary subset search.

``chi_delta(psi) <= M`` iff some ``M``-subset ``S`` of the dictionary has
``||psi - P_S psi|| <= delta``: the approximant may be unnormalized, so the best
member of ``span(S)`` is the orthogonal projection. The search therefore tests
least-squares residuals of subsets in ascending size.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import stab
from .dense import DenseState, as_array
from .errors import BudgetExceeded
from .stab import Dictionary

RESIDUAL_TOL = 1e-9
DEPENDENCE_TOL = 1e-8
DEFAULT_BUDGET = 50_000_000
EXHAUSTIVE = "exhaustive"
HEURISTIC = "heuristic"
SCHEMA = "stabrank.rank/1"


@dataclass(frozen=True)
class RankCertificate:
    rank: int
    subset: tuple[int, ...]
    coefficients: tuple[complex, ...]
    residual: float
    mode: str
    delta: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)

    def reconstruct(self, dictionary: Dictionary) -> np.ndarray:
        mat = dictionary.matrix
        if not self.subset:
            return np.zeros(mat.shape[1], dtype=complex)
        return np.asarray(self.coefficients) @ mat[list(self.subset)]

    def recompute_residual(self, psi: DenseState | np.ndarray, dictionary: Dictionary) -> float:
        return float(np.linalg.norm(as_array(psi) - self.reconstruct(dictionary)))

    def to_json(self) -> dict:
        out = {
            "schema": SCHEMA,
            "rank": self.rank,
            "mode": self.mode,
            "delta": self.delta,
            "subset": list(self.subset),
            "coefficients": [[c.real, c.imag] for c in self.coefficients],
            "residual": self.residual,
        }
        out.update(self.extra)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> RankCertificate:
        return cls(
            rank=int(obj["rank"]),
            subset=tuple(obj["subset"]),
            coefficients=tuple(complex(re, im) for re, im in obj["coefficients"]),
            residual=float(obj["residual"]),
            mode=obj["mode"],
            delta=float(obj["delta"]),
        )


def _fit(mat: np.ndarray, psi: np.ndarray, subset: Sequence[int]) -> tuple[np.ndarray, float]:
    a = mat[list(subset)].T
    coef, *_ = np.linalg.lstsq(a, psi, rcond=None)
    return coef, float(np.linalg.norm(psi - a @ coef))


def _certificate(mat, psi, subset, mode, delta, **extra) -> RankCertificate:
    subset = tuple(int(i) for i in subset)
    coef, res = _fit(mat, psi, subset)
    return RankCertificate(len(subset), subset, tuple(complex(c) for c in coef), res, mode, delta, extra)


# -- exhaustive search ----------------------------------------------------------


class _Counter:
    def __init__(self, budget: int):
        self.left = budget

    def spend(self, k: int) -> bool:
        self.left -= k
        return self.left >= 0


def _last_level(mat, psi, q, r_psi, cand, target):
    """Residuals of ``prefix + {c}`` for every ``c`` in ``cand`` (vectorized)."""
    block = mat[cand]  # (C, d)
    if q is not None:
        block = block - (block @ q.conj()) @ q.T
    norms = np.linalg.norm(block, axis=1)
    ok = norms > DEPENDENCE_TOL
    if not ok.any():
        return None
    unit = block[ok] / norms[ok, None]
    proj = unit.conj() @ r_psi
    res = np.linalg.norm(r_psi[None, :] - proj[:, None] * unit, axis=1)
    hits = np.nonzero(res <= target)[0]
    if hits.size == 0:
        return None
    return int(np.asarray(cand)[ok][hits[0]])


def _dfs(mat, psi, order, size, target, counter, first_positions=None):
    """First ``size``-subset (in ``order``-combination order) within ``target``.

    Returns positions into ``order`` or ``None``. Prefixes whose new member is
    linearly dependent on the previous ones are pruned: their span already
    occurs at a smaller size.
    """
    n_cand = len(order)
    d = mat.shape[1]

    def rec(start, depth, q, r_psi, chosen):
        if depth == size - 1:
            cand = order[start:]
            if not counter.spend(len(cand)):
                raise _OutOfBudget
            hit = _last_level(mat, psi, q, r_psi, cand, target)
            if hit is None:
                return None
            pos = start + int(np.nonzero(np.asarray(cand) == hit)[0][0])
            return chosen + [pos]
        stop = n_cand - (size - 1 - depth)
        positions = range(start, stop)
        if depth == 0 and first_positions is not None:
            positions = [p for p in first_positions if p < stop]
        for pos in positions:
            v = mat[order[pos]]
            if q is not None:
                v = v - q @ (q.conj().T @ v)
                v = v - q @ (q.conj().T @ v)
            nv = np.linalg.norm(v)
            if nv < DEPENDENCE_TOL:
                continue
            u = (v / nv)[:, None]
            q2 = u if q is None else np.hstack([q, u])
            r2 = r_psi - u[:, 0] * np.vdot(u[:, 0], r_psi)
            if q2.shape[1] > d:
                continue
            found = rec(pos + 1, depth + 1, q2, r2, chosen + [pos])
            if found is not None:
                return found
        return None

    if size == 1:
        if not counter.spend(n_cand):
            raise _OutOfBudget
        if first_positions is not None:
            sub = [order[p] for p in first_positions]
            hit = _last_level(mat, psi, None, psi, sub, target)
            return None if hit is None else [int(order.index(hit))]
        hit = _last_level(mat, psi, None, psi, order, target)
        return None if hit is None else [order.index(hit)]
    return rec(0, 0, None, psi, [])


class _OutOfBudget(Exception):
    pass


def _worker(args):
    mat, psi, order, size, target, budget, positions = args
    counter = _Counter(budget)
    try:
        return _dfs(mat, psi, order, size, target, counter, positions), False
    except _OutOfBudget:
        return None, True


def _exhaustive(mat, psi, target, max_rank, budget, workers):
    overlaps = np.abs(mat.conj() @ psi)
    order = [int(i) for i in np.argsort(-overlaps, kind="stable")]
    d = mat.shape[1]
    max_rank = min(max_rank, d, len(order))
    counter = _Counter(budget)
    for size in range(1, max_rank + 1):
        if workers > 1 and size >= 3:
            lead = range(len(order) - size + 1)
            parts = [list(lead[w::workers]) for w in range(workers)]
            share = max(counter.left // workers, 1)
            jobs = [(mat, psi, order, size, target, share, p) for p in parts]
            with ProcessPoolExecutor(workers) as ex:
                results = list(ex.map(_worker, jobs))
            if any(over for _, over in results):
                raise _OutOfBudget
            counter.left -= share * workers
            hits = [r for r, _ in results if r is not None]
            found = min(hits) if hits else None
        else:
            found = _dfs(mat, psi, order, size, target, counter)
        if found is not None:
            return [order[p] for p in found]
    return None


# -- heuristic search -----------------------------------------------------------


def _gain_scores(mat, q, r_psi):
    block = mat if q is None else mat - (mat @ q.conj()) @ q.T
    norms = np.linalg.norm(block, axis=1)
    ok = norms > DEPENDENCE_TOL
    scores = np.full(mat.shape[0], -1.0)
    scores[ok] = np.abs(block[ok].conj() @ r_psi) ** 2 / norms[ok] ** 2
    return scores


def _orth(mat, subset):
    if not subset:
        return None
    q, _ = np.linalg.qr(mat[list(subset)].T)
    return q


def _greedy(mat, psi, target, max_rank):
    chosen: list[int] = []
    q = None
    r_psi = psi.copy()
    while np.linalg.norm(r_psi) > target and len(chosen) < max_rank:
        scores = _gain_scores(mat, q, r_psi)
        scores[chosen] = -1
        j = int(np.argmax(scores))
        if scores[j] <= 0:
            break
        chosen.append(j)
        q = _orth(mat, chosen)
        r_psi = psi - q @ (q.conj().T @ psi)
    return chosen


def _swap_refine(mat, psi, subset, target, rounds=20):
    """Local swaps: replace one member at a time by the best complement."""
    cur = list(subset)
    best = _fit(mat, psi, cur)[1]
    for _ in range(rounds):
        improved = False
        for i in range(len(cur)):
            rest = cur[:i] + cur[i + 1:]
            q = _orth(mat, rest)
            r_psi = psi if q is None else psi - q @ (q.conj().T @ psi)
            scores = _gain_scores(mat, q, r_psi)
            scores[rest] = -1
            j = int(np.argmax(scores))
            cand = rest[:i] + [j] + rest[i:]
            res = _fit(mat, psi, cand)[1]
            if res < best - 1e-14:
                cur, best, improved = cand, res, True
            if best <= target:
                return cur, best
        if not improved:
            break
    return cur, best


def _heuristic(mat, psi, target, max_rank):
    chosen = _greedy(mat, psi, target, max_rank)
    if _fit(mat, psi, chosen)[1] > target:
        return None
    best = chosen
    size = len(chosen) - 1
    while size >= 1:
        cand, res = _swap_refine(mat, psi, best[:size], target)
        if res > target:
            break
        best = cand
        size -= 1
    return best


# -- public API -----------------------------------------------------------------


def _resolve(psi, dictionary):
    if isinstance(dictionary, str):
        n = psi.n if isinstance(psi, DenseState) else int(math.log2(len(as_array(psi))))
        dictionary = stab.enumerate_dictionary(n, dictionary)
    vec = as_array(psi)
    if vec.shape[0] != dictionary.matrix.shape[1]:
        raise ValueError(f"state has {vec.shape[0]} amplitudes, dictionary is on {dictionary.n} qubits")
    return vec, dictionary


def approx_rank(
    psi: DenseState | np.ndarray,
    delta: float,
    dictionary: Dictionary | str = stab.FULL,
    mode: str = EXHAUSTIVE,
    max_rank: int | None = None,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    tol: float = RESIDUAL_TOL,
) -> RankCertificate:
    """Smallest ``M`` with an ``M``-subset whose span is within ``delta`` of ``psi``.

    ``exhaustive`` certifies minimality; ``heuristic`` only gives an upper bound.
    On budget exhaustion a :class:`BudgetExceeded` carries the heuristic bound.
    """
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    vec, dictionary = _resolve(psi, dictionary)
    mat = dictionary.matrix
    target = delta + tol
    cap = mat.shape[1] if max_rank is None else max_rank
    if mode == HEURISTIC:
        found = _heuristic(mat, vec, target, cap)
    elif mode == EXHAUSTIVE:
        try:
            found = _exhaustive(mat, vec, target, cap, budget, workers)
        except _OutOfBudget:
            h = _heuristic(mat, vec, target, mat.shape[1])
            best = None if h is None else _certificate(mat, vec, h, HEURISTIC, delta)
            raise BudgetExceeded(f"search budget of {budget} subsets exhausted", best) from None
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if found is None:
        raise BudgetExceeded(f"no subset of size <= {cap} reaches residual {delta}", None)
    return _certificate(mat, vec, found, mode, delta)


def exact_rank(
    psi: DenseState | np.ndarray,
    dictionary: Dictionary | str = stab.FULL,
    mode: str = EXHAUSTIVE,
    **kw,
) -> RankCertificate:
    return approx_rank(psi, 0.0, dictionary, mode, **kw)


def projection_norm2(psi: DenseState | np.ndarray, dictionary: Dictionary, subset: Sequence[int]) -> float:
    """``||P_S psi||^2`` from dense dictionary rows (fast path for certificates)."""
    vec = as_array(psi)
    q = _orth(dictionary.matrix, list(subset))
    if q is None:
        return 0.0
    return float(np.linalg.norm(q.conj().T @ vec) ** 2)


def all_subsets_min_residual(psi: np.ndarray, mat: np.ndarray, size: int) -> float:
    """Brute-force oracle: minimum least-squares residual over all ``size``-subsets."""
    best = math.inf
    for sub in itertools.combinations(range(mat.shape[0]), size):
        best = min(best, _fit(mat, psi, sub)[1])
    return best
