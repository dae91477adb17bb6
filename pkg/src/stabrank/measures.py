"""Stabilizerness measures, the fidelity-rank bound, the rank-gap construction
and the mod-8 decomposition identities."""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import stab
from .dense import DenseState, as_array, haar_sample, t_state
from .errors import BudgetExceeded, NumericError, ResourceLimitError
from .f2 import common_constant_subspace
from .rank import EXHAUSTIVE, RankCertificate, approx_rank, exact_rank
from .stab import Dictionary

EXTENT_TOL = 1e-7
GOWERS_LIMIT = 5
AMPLITUDE_ZERO = 1e-12


def _dict_for(psi: DenseState, dictionary: Dictionary | str) -> Dictionary:
    if isinstance(dictionary, str):
        dictionary = stab.enumerate_dictionary(psi.n, dictionary)
    if dictionary.n != psi.n:
        raise ValueError(f"dictionary on {dictionary.n} qubits, state on {psi.n}")
    return dictionary


def stab_fidelity(psi: DenseState, dictionary: Dictionary | str = stab.FULL) -> float:
    """``max_s |<s|psi>|^2`` over the dictionary."""
    d = _dict_for(psi, dictionary)
    return float(np.max(np.abs(d.matrix.conj() @ psi.amps) ** 2))


# -- stabilizer extent ----------------------------------------------------------


@dataclass(frozen=True)
class ExtentResult:
    value: float  # ||c||_1^2 of the best feasible point
    lower: float  # squared dual objective, a certified lower bound
    coefficients: np.ndarray
    dual: np.ndarray
    iterations: int

    @property
    def gap(self) -> float:
        return self.value - self.lower


def _soft(z: np.ndarray, t: float) -> np.ndarray:
    a = np.abs(z)
    scale = np.where(a > t, 1 - t / np.where(a > t, a, 1.0), 0.0)
    return scale * z


def stab_extent(
    psi: DenseState,
    dictionary: Dictionary | str = stab.FULL,
    tol: float = EXTENT_TOL,
    max_iter: int = 500_000,
    check_every: int = 50,
) -> ExtentResult:
    """``min ||c||_1^2`` subject to ``sum_i c_i s_i = psi`` by primal-dual hybrid gradient.

    Each check projects the iterate onto the affine constraint (upper bound) and
    rescales the dual to feasibility ``max_i |<s_i|w>| <= 1`` (lower bound
    ``Re<w|psi>``). Stops when the squared bounds differ by at most ``tol``.
    """
    d = _dict_for(psi, dictionary)
    a = d.matrix.T
    target = psi.amps
    step = 0.99 / np.linalg.norm(a, 2)
    correction = a.conj().T @ np.linalg.inv(a @ a.conj().T)
    x = np.zeros(a.shape[1], dtype=complex)
    xbar = x.copy()
    y = np.zeros(a.shape[0], dtype=complex)
    ub, lb = math.inf, -math.inf
    best_x, best_w = x, y
    for k in range(1, max_iter + 1):
        y = y + step * (a @ xbar - target)
        xn = _soft(x - step * (a.conj().T @ y), step)
        xbar = 2 * xn - x
        x = xn
        if k % check_every:
            continue
        feas = x + correction @ (target - a @ x)
        u = float(np.abs(feas).sum())
        if u < ub:
            ub, best_x = u, feas
        w = -y
        w = w / max(float(np.abs(a.conj().T @ w).max()), 1e-300)
        lo = float(np.vdot(w, target).real)
        if lo > lb:
            lb, best_w = lo, w
        if lb > 0 and ub ** 2 - lb ** 2 <= tol:
            return ExtentResult(ub ** 2, lb ** 2, best_x, best_w, k)
    raise NumericError(
        f"extent solver stopped after {max_iter} iterations", achieved=ub ** 2 - max(lb, 0) ** 2
    )


# -- Gowers U3 ------------------------------------------------------------------


def _u3_eighth(f: np.ndarray) -> float:
    size = f.shape[0]
    idx = np.arange(size)
    shifted = f[idx[:, None] ^ idx[None, :]]  # shifted[h, x] = f(x + h)
    total = 0.0
    for h1 in range(size):
        a = f * np.conj(f[idx ^ h1])
        b = np.conj(shifted) * shifted[:, idx ^ h1]
        total += float(np.sum(np.abs(b @ a) ** 2))
    return total / size ** 4


def gowers_u3_eighth(psi: DenseState, limit: int = GOWERS_LIMIT) -> float:
    """``||f||_{U3}^8`` via ``(1/16^n) sum_{h1,h2} |sum_x Delta_{h1,h2} f(x)|^2``."""
    if psi.n > limit:
        raise ResourceLimitError(f"Gowers norm limited to n <= {limit}")
    val = _u3_eighth(psi.f_values())
    if val < -1e-9:
        raise NumericError("negative Gowers sum", achieved=val)
    return max(val, 0.0)


def gowers_u3(psi: DenseState, limit: int = GOWERS_LIMIT) -> float:
    return gowers_u3_eighth(psi, limit) ** 0.125


def gowers_u3_direct(psi: DenseState) -> float:
    """Eighth root of the literal ``16^n``-term sum (no reformulation)."""
    f = psi.f_values()
    size = f.shape[0]
    total = 0j
    for x in range(size):
        for h1 in range(size):
            for h2 in range(size):
                for h3 in range(size):
                    term = 1 + 0j
                    for s in range(8):
                        pt = x
                        if s & 1:
                            pt ^= h1
                        if s & 2:
                            pt ^= h2
                        if s & 4:
                            pt ^= h3
                        v = f[pt]
                        term *= np.conj(v) if bin(s).count("1") % 2 else v
                    total += term
    val = total / size ** 4
    if abs(val.imag) > 1e-9 or val.real < -1e-9:
        raise NumericError("direct Gowers sum not real non-negative", achieved=val.real)
    return max(val.real, 0.0) ** 0.125


# -- fidelity-rank bound --------------------------------------------------------


def f_chi_bound(psi: DenseState, dictionary: Dictionary | str = stab.FULL) -> float | None:
    """``(2/3) log2(alpha^2 / (beta sqrt F))``; ``None`` when some amplitude vanishes."""
    mags = np.abs(psi.f_values())
    alpha, beta = float(mags.min()), float(mags.max())
    if alpha < AMPLITUDE_ZERO:
        return None
    fid = stab_fidelity(psi, dictionary)
    return (2 / 3) * math.log2(alpha ** 2 / (beta * math.sqrt(fid)))


def fchi_witness(psi: DenseState, cert: RankCertificate, dictionary: Dictionary | str = stab.FULL) -> dict:
    """The subspace step behind the fidelity-rank bound, checked on a certificate.

    Builds ``U`` with every support indicator of the decomposition constant on
    it, so on ``U`` the state is a combination of only those terms whose
    support contains ``U``.
    """
    d = _dict_for(psi, dictionary)
    states = [d[i] for i in cert.subset]
    u = common_constant_subspace([s.support for s in states], psi.n)
    pts = np.fromiter(u.points(), dtype=np.int64)
    active = [k for k, s in enumerate(states) if u.is_subset_of(s.support)]
    partial = sum((cert.coefficients[k] * d.matrix[cert.subset[k]][pts] for k in active), np.zeros(len(pts), complex))
    return {
        "u_dim": u.dim,
        "dim_bound": psi.n - cert.rank,
        "active_terms": [cert.subset[k] for k in active],
        "restriction_error": float(np.max(np.abs(psi.amps[pts] - partial))),
    }


@dataclass(frozen=True)
class MeasureReport:
    fidelity: float
    extent: float
    extent_gap: float
    gowers_u3: float | None
    fchi_bound: float | None

    def to_json(self) -> dict:
        return {"schema": "stabrank.measure/1", **asdict(self)}


def measure_report(psi: DenseState, dictionary: Dictionary | str = stab.FULL) -> MeasureReport:
    d = _dict_for(psi, dictionary)
    ext = stab_extent(psi, d)
    u3 = gowers_u3(psi) if psi.n <= GOWERS_LIMIT else None
    return MeasureReport(stab_fidelity(psi, d), ext.value, ext.gap, u3, f_chi_bound(psi, d))


# -- gap construction -----------------------------------------------------------


@dataclass(frozen=True)
class GapDemo:
    state: DenseState
    delta: float
    slack: float
    exact: RankCertificate
    approx: RankCertificate

    def to_json(self) -> dict:
        return {
            "schema": "stabrank.gap/1",
            "n": self.state.n,
            "delta": self.delta,
            "slack": self.slack,
            "exact": self.exact.to_json(),
            "approx": self.approx.to_json(),
        }


def gap_state(n: int, delta: float, rng_seed: int) -> DenseState:
    """``delta |psi> + sqrt(1 - delta^2) |0^n>`` with Haar ``psi`` orthogonal to ``|0^n>``."""
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    psi = haar_sample(n, rng_seed).amps.copy()
    psi[0] = 0
    psi /= np.linalg.norm(psi)
    phi = delta * psi
    phi[0] += math.sqrt(1 - delta ** 2)
    return DenseState(n, phi)


def gap_demo(
    n: int,
    delta: float,
    rng_seed: int,
    slack: float = 1.0,
    dictionary: Dictionary | str = stab.FULL,
    **search,
) -> GapDemo:
    phi = gap_state(n, delta, rng_seed)
    d = _dict_for(phi, dictionary)
    ex = exact_rank(phi, d, EXHAUSTIVE, **search)
    ap = approx_rank(phi, min(slack * delta, 1 - 1e-12), d, EXHAUSTIVE, **search)
    return GapDemo(phi, delta, slack, ex, ap)


# -- mod-8 machinery ------------------------------------------------------------


def weights(n: int) -> np.ndarray:
    x = np.arange(1 << n, dtype=np.int64)
    w = np.zeros_like(x)
    for q in range(n):
        w += (x >> q) & 1
    return w


def mod8_indicator(n: int, j: int) -> np.ndarray:
    """``M_j(x) = 1`` iff ``|x| = j mod 8``, over all ``x`` in index order."""
    return (weights(n) % 8 == j % 8).astype(np.int64)


def padded_indicator(n: int, pad: int) -> np.ndarray:
    """``M_0(1^pad, x)`` as a function of ``x``."""
    return ((weights(n) + pad) % 8 == 0).astype(np.int64)


def mod8_machinery(
    n: int,
    rank_n: int | None = None,
    deltas: Sequence[float] = (0.3, 0.5),
    budget: int = 2_000_000,
) -> dict:
    """Exhaustive check of the mod-8 decomposition and its padding reduction.

    ``identity`` compares ``T(x)`` with ``sum_j e^{2 pi i j/8} M_j(x)`` both as
    exact residues and in floating point. ``padding`` records, for each ``j``,
    whether ``j`` ones (``literal``) and ``(8 - j) mod 8`` ones (``corrected``)
    turn ``M_0`` into ``M_j``. ``ranks`` holds quadratic-phase approximate ranks
    of the normalized ``T`` state for ``rank_n <= 3`` qubits.
    """
    if n > 20:
        raise ResourceLimitError("exhaustive loops limited to n <= 20")
    w = weights(n)
    t_vals = np.exp(2j * np.pi * w / 8)
    roots = np.exp(2j * np.pi * np.arange(8) / 8)
    indicators = np.stack([mod8_indicator(n, j) for j in range(8)])
    recon = roots @ indicators
    exact_ok = bool(np.all(indicators.sum(axis=0) == 1) and np.all(np.argmax(indicators, axis=0) == w % 8))
    err = float(np.max(np.abs(t_vals - recon)))
    padding = []
    for j in range(8):
        target = indicators[j]
        padding.append({
            "j": j,
            "literal": bool(np.array_equal(padded_indicator(n, j), target)),
            "corrected_pad": (8 - j) % 8,
            "corrected": bool(np.array_equal(padded_indicator(n, (8 - j) % 8), target)),
        })
    report = {
        "schema": "stabrank.mod8/1",
        "n": n,
        "points": 1 << n,
        "identity_exact": exact_ok,
        "identity_max_error": err,
        "padding": padding,
    }
    if rank_n is not None:
        if rank_n > 3:
            raise ResourceLimitError("quadratic-phase rank search limited to n <= 3")
        psi = t_state(rank_n)
        qd = stab.enumerate_dictionary(rank_n, stab.QUADRATIC)
        ranks = []
        for delta in deltas:
            try:
                cert = approx_rank(psi, delta, qd, EXHAUSTIVE, budget=budget)
                ranks.append({"delta": delta, "rank": cert.rank, "mode": cert.mode, "residual": cert.residual})
            except BudgetExceeded as exc:
                best = exc.best
                ranks.append({
                    "delta": delta,
                    "rank_upper": None if best is None else best.rank,
                    "mode": "heuristic",
                    "budget_exceeded": True,
                })
        report["ranks"] = {"n": rank_n, "dictionary": qd.kind, "results": ranks}
    return report


def t_phase(n: int) -> np.ndarray:
    """``T(x) = e^{2 pi i |x| / 8}``."""
    return np.exp(2j * np.pi * weights(n) / 8)


def omega(k: int) -> complex:
    return cmath.exp(1j * math.pi * k / 4)
