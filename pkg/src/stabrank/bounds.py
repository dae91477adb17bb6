"""Closed-form tail bounds, thresholds, the main-theorem constant pipeline,
Haar moments and the t-design gate-count formulas.

Everything that can overflow is evaluated as a natural logarithm with mpmath.
Logarithm policy: ``e^x`` and ``ln`` as written; every other ``log`` is base 2
(switchable through ``log_base`` where it matters).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import stab
from .dense import haar_samples
from .report import jsonable as _jsonable

mpmath.mp.dps = 30

LOG2 = mpmath.log(2)
UNION_COEFF = mpmath.mpf("0.54")
INLINE_COEFF = mpmath.mpf("0.0026")
DEFAULT_CONSTANTS = {"c": 1.0, "C": 1 / 1000, "C1": 1.0, "C2": 1.0}


def _log(x, base: float | None = 2):
    x = mpmath.mpf(x)
    return mpmath.ln(x) if base is None else mpmath.ln(x) / mpmath.ln(base)


@dataclass
class BoundReport:
    """``log_value`` is the natural log of ``value``; ``value`` is ``None`` on overflow."""

    name: str
    inputs: dict
    log_value: mpmath.mpf | None
    certifies: str
    value: float | None = None
    flags: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.value is None and self.log_value is not None:
            lv = mpmath.mpf(self.log_value)
            if lv > 700:
                self.flags.setdefault("overflow", True)
            else:
                self.value = float(mpmath.exp(lv))

    def to_json(self) -> dict:
        return {
            "schema": "stabrank.bound/1",
            "name": self.name,
            "inputs": {k: _jsonable(v) for k, v in self.inputs.items()},
            "value": self.value,
            "log_value": None if self.log_value is None else mpmath.nstr(self.log_value, 17),
            "certifies": self.certifies,
            "flags": {k: _jsonable(v) for k, v in self.flags.items()},
        }


# -- Haar tail ------------------------------------------------------------------


def haar_tail_exponent(n: int, M, delta: float) -> mpmath.mpf:
    """``0.54 n^2 M - (1 - delta^2 - M/2^n)^2 2^n / (100 pi)``."""
    two_n = mpmath.mpf(2) ** n
    M = mpmath.mpf(M)
    gap = 1 - mpmath.mpf(delta) ** 2 - M / two_n
    return UNION_COEFF * n * n * M - gap ** 2 * two_n / (100 * mpmath.pi)


def haar_tail(n: int, M, delta: float) -> BoundReport:
    """``P[chi_delta <= M] <= 2 exp(exponent)`` for a Haar-random ``n``-qubit state."""
    two_n = mpmath.mpf(2) ** n
    if 1 - mpmath.mpf(delta) ** 2 - mpmath.mpf(M) / two_n <= 0:
        raise ValueError("requires 1 - delta^2 - M/2^n > 0")
    expo = haar_tail_exponent(n, M, delta)
    return BoundReport(
        "haar_tail",
        {"n": n, "M": M, "delta": delta},
        LOG2 + expo,
        "P[chi_delta(phi) <= M] <= value",
        flags={"exponent": expo},
    )


def guaranteed_rank(n: int, delta: float, integer: bool = False):
    """``M(n) = (1 - delta^2)^2 2^n / (1000 n^2)``, optionally rounded up."""
    val = (1 - mpmath.mpf(delta) ** 2) ** 2 * mpmath.mpf(2) ** n / (1000 * n * n)
    return int(mpmath.ceil(val)) if integer else val


def inline_estimate(n: int, delta: float) -> dict:
    """The proof's estimate ``exponent <= -0.0026 (1 - delta^2)^2 2^n`` at real ``M(n)``."""
    M = guaranteed_rank(n, delta)
    expo = haar_tail_exponent(n, M, delta)
    rhs = -INLINE_COEFF * (1 - mpmath.mpf(delta) ** 2) ** 2 * mpmath.mpf(2) ** n
    return {"n": n, "delta": delta, "M": M, "exponent": expo, "estimate": rhs, "holds": bool(expo <= rhs)}


def existence_threshold(delta: float, log_base: float | None = 2) -> int:
    """``n0 = ceil(2 log(1/(1 - delta^2)) + 9)``."""
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    return int(mpmath.ceil(2 * _log(1 / (1 - mpmath.mpf(delta) ** 2), log_base) + 9))


def haar_exists_threshold(delta: float, horizon: int = 64, log_base: float | None = 2) -> dict:
    """Threshold ``n0``, ``M(n0)`` and the tail at ``(n0, M(n0))``.

    The tail is evaluated at the real-valued ``M(n)`` used in the argument;
    the integer ``ceil(M(n))`` is reported alongside with its own tail and the
    first ``n`` from which that version is also below 1.
    """
    n0 = existence_threshold(delta, log_base)
    M = guaranteed_rank(n0, delta)
    tail = haar_tail(n0, M, delta)
    sweep_ok = all(
        haar_tail(n, guaranteed_rank(n, delta), delta).log_value < 0 for n in range(n0, n0 + horizon)
    )
    Mi = guaranteed_rank(n0, delta, integer=True)
    tail_int = haar_tail(n0, Mi, delta)
    first_int = next(
        (
            n
            for n in range(n0, n0 + 4 * horizon)
            if haar_tail(n, guaranteed_rank(n, delta, True), delta).log_value < 0
        ),
        None,
    )
    return {
        "schema": "stabrank.threshold/1",
        "delta": delta,
        "n0": n0,
        "M_n0": M,
        "tail_n0": tail.value,
        "tail_below_one": bool(tail.log_value < 0),
        "tail_below_one_through": n0 + horizon - 1 if sweep_ok else None,
        "M_n0_ceiling": Mi,
        "tail_n0_ceiling": tail_int.value,
        "log_tail_n0_ceiling": tail_int.log_value,
        "first_n_ceiling_below_one": first_int,
    }


# -- main pipeline --------------------------------------------------------------


def largest_n(m: float, c: float = 1.0) -> int:
    """``max{n >= 1 : c n 2^{n/2} <= m}``."""
    if m < c * math.sqrt(2):
        raise ValueError(f"no n satisfies c n 2^(n/2) <= m for m = {m}, c = {c}")
    n = 1
    while c * (n + 1) * 2 ** ((n + 1) / 2) <= m:
        n += 1
    return n


def main_lower_bound(
    m: float, delta: float, c: float = DEFAULT_CONSTANTS["c"], C: float = DEFAULT_CONSTANTS["C"]
) -> BoundReport:
    """``C (1 - (delta + 4^-n)^2)^2 2^n / n^2`` at the largest admissible ``n``."""
    n = largest_n(m, c)
    eff = mpmath.mpf(delta) + mpmath.mpf(4) ** (-n)
    if eff >= 1:
        raise ValueError("requires delta + 4^-n < 1")
    bound = C * (1 - eff ** 2) ** 2 * mpmath.mpf(2) ** n / (n * n)
    log_m = _log(m)
    upper = math.sqrt(2) * c * (n + 1) * 2 ** (n / 2)
    lower = m / (math.sqrt(2) * c * (2 * float(log_m) + 1))
    applicable = n >= 2 * _log(1 / (1 - eff ** 2)) + 9
    return BoundReport(
        "main_lower_bound",
        {"m": m, "delta": delta, "c": c, "C": C},
        mpmath.ln(bound),
        "chi_delta(|T>^m) >= value",
        flags={
            "n": n,
            "bracket_upper": bool(m < upper),
            "bracket_lower": bool(2 ** n > lower),
            "n_condition_holds": bool(applicable),
        },
    )


def bracket_sweep(m_values: Sequence[int] | np.ndarray, c: float = 1.0) -> dict:
    """Both bracketing inequalities over many ``m`` (vectorized)."""
    m = np.asarray(m_values, dtype=float)
    if m.min() < c * math.sqrt(2):
        raise ValueError("some m admits no n")
    ns = np.arange(1, 200)
    need = c * ns * 2.0 ** (ns / 2)
    n = np.searchsorted(need, m, side="right")  # count of admissible n = largest n
    upper_ok = m < math.sqrt(2) * c * (n + 1) * 2.0 ** (n / 2)
    lower_ok = 2.0 ** n > m / (math.sqrt(2) * c * (2 * np.log2(m) + 1))
    return {
        "count": int(m.size),
        "bracket_upper": bool(upper_ok.all()),
        "bracket_lower": bool(lower_ok.all()),
        "first_failure": None if (upper_ok & lower_ok).all() else float(m[~(upper_ok & lower_ok)][0]),
        "n_range": [int(n.min()), int(n.max())],
    }


# -- t-designs ------------------------------------------------------------------


def _logaddexp(a, b):
    if a == -mpmath.inf:
        return b
    if b == -mpmath.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + mpmath.log1p(mpmath.exp(lo - hi))


def tdesign_tail(
    n: int, M, delta: float, t: int, epsilon: float | None = None, log_epsilon=None
) -> BoundReport:
    """``e^{0.54 n^2 M} (((M+t-1)/(2^n+t-1))^t + eps) / (1 - delta^2)^t``.

    ``log_epsilon`` lets callers pass ``eps`` values far below double range.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    if log_epsilon is None:
        if epsilon is None or epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        log_eps = mpmath.ln(epsilon) if epsilon > 0 else -mpmath.inf
    else:
        log_eps = mpmath.mpf(log_epsilon)
    M = mpmath.mpf(M)
    moment = t * mpmath.ln((M + t - 1) / (mpmath.mpf(2) ** n + t - 1))
    markov = _logaddexp(moment, log_eps) - t * mpmath.ln(1 - mpmath.mpf(delta) ** 2)
    return BoundReport(
        "tdesign_tail",
        {"n": n, "M": M, "delta": delta, "t": t, "epsilon": epsilon, "log_epsilon": log_eps},
        UNION_COEFF * n * n * M + markov,
        "P[chi_delta(U|0^n>) <= M] <= value",
        flags={"log_markov_part": markov},
    )


def poly_rank_tail(n: int, d: int, delta: float) -> BoundReport:
    """The t-design tail at ``M = n^d``, ``t = n^{d+1}``, ``eps = e^{-n^{d+2}}``."""
    return tdesign_tail(n, n ** d, delta, n ** (d + 1), log_epsilon=-mpmath.mpf(n) ** (d + 2))


def poly_rank_threshold(d: int = 1, delta: float = 0.5, n_max: int = 400) -> dict:
    """Smallest ``n0`` with the tail below 1 for every ``n`` in ``[n0, n_max]``."""
    below = [poly_rank_tail(n, d, delta).log_value < 0 for n in range(1, n_max + 1)]
    n0 = None
    for i in range(n_max - 1, -1, -1):
        if not below[i]:
            n0 = i + 2
            break
    else:
        n0 = 1
    return {"d": d, "delta": delta, "n0": n0 if n0 <= n_max else None, "checked_through": n_max}


def haar_moment(n: int, M: int, t: int) -> Fraction:
    """``prod_{j<t} (M + j) / (2^n + j)``."""
    d = 1 << n
    if not 1 <= M <= d:
        raise ValueError("need 1 <= M <= 2^n")
    if t < 1:
        raise ValueError("t must be >= 1")
    out = Fraction(1)
    for j in range(t):
        out *= Fraction(M + j, d + j)
    return out


def stabilizer_projector(n: int, M: int, rng_seed: int) -> tuple[list[int], np.ndarray]:
    """Random dictionary states spanning a rank-``M`` subspace, and an orthonormal basis."""
    d = stab.enumerate_dictionary(n)
    rng = np.random.default_rng(rng_seed)
    chosen: list[int] = []
    q = np.zeros((1 << n, 0), dtype=complex)
    for i in rng.permutation(len(d)):
        v = d.matrix[i]
        v = v - q @ (q.conj().T @ v)
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            q = np.hstack([q, (v / nv)[:, None]])
            chosen.append(int(i))
        if len(chosen) == M:
            return chosen, q
    raise ValueError("dictionary does not span the requested rank")


def projection_samples(
    n: int, q: np.ndarray, samples: int, rng_seed: int, workers: int = 1, batch: int = 1 << 15
) -> np.ndarray:
    """``||P psi||^2`` for Haar samples ``0 .. samples-1`` of the seeded stream."""
    out = np.empty(samples)
    for start in range(0, samples, batch):
        cnt = min(batch, samples - start)
        z = haar_samples(n, rng_seed, cnt, start=start, workers=workers)
        out[start:start + cnt] = np.sum(np.abs(z @ q.conj()) ** 2, axis=1)
    return out


def haar_moment_mc(
    n: int, M: int, t_values: Sequence[int], samples: int, rng_seed: int, workers: int = 1
) -> list[dict]:
    """Monte Carlo ``E ||P psi||^{2t}`` for a stabilizer-spanned rank-``M`` projector."""
    subset, q = stabilizer_projector(n, M, rng_seed)
    vals = projection_samples(n, q, samples, rng_seed + 1, workers)
    rows = []
    for t in t_values:
        x = vals ** t
        mean = float(x.mean())
        se = float(x.std(ddof=1) / math.sqrt(samples))
        exact = haar_moment(n, M, t)
        z = (mean - float(exact)) / se if se > 0 else 0.0
        rows.append({
            "n": n, "M": M, "t": t, "samples": samples, "mean": mean, "stderr": se,
            "exact": exact, "z": z, "within_4se": abs(z) <= 4, "subset": subset,
        })
    return rows


def tdesign_tail_mc(
    n: int, M: int, delta: float, t: int, samples: int, rng_seed: int, workers: int = 1
) -> dict:
    """Fraction of Haar samples with ``||P_S psi||^2 >= 1 - delta^2`` against the
    Markov part ``((M+t-1)/(2^n+t-1))^t / (1-delta^2)^t`` of the eps = 0 tail."""
    subset, q = stabilizer_projector(n, M, rng_seed)
    vals = projection_samples(n, q, samples, rng_seed + 1, workers)
    hit = vals >= 1 - delta ** 2
    frac = float(hit.mean())
    se = math.sqrt(max(frac * (1 - frac), 1 / samples) / samples)
    rep = tdesign_tail(n, M, delta, t, 0.0)
    markov = float(mpmath.exp(rep.flags["log_markov_part"]))
    return {
        "n": n, "M": M, "delta": delta, "t": t, "samples": samples, "fraction": frac,
        "stderr": se, "markov_bound": markov, "tail_value": rep.value,
        "consistent": frac - 4 * se <= markov, "subset": subset,
    }


# -- gate-count formulas --------------------------------------------------------


def _circuit_design_log(n: int, t: int, log_inv_eps, C: float):
    """ln of ``C n ln^5(t) t^{4 + 3/sqrt(log t)} (2 n t + log(1/eps))``."""
    expo = 4 + 3 / mpmath.sqrt(_log(t))
    return (
        mpmath.ln(C * n) + 5 * mpmath.ln(mpmath.ln(t)) + expo * mpmath.ln(t)
        + mpmath.ln(2 * n * t + log_inv_eps / LOG2)
    )


def design_gate_formulas(
    n: int,
    t: int,
    epsilon: float | None,
    d: int,
    delta: float = 0.5,
    C1: float = DEFAULT_CONSTANTS["C1"],
    C: float = 1.0,
    C_rank: float = DEFAULT_CONSTANTS["C"],
    log_epsilon=None,
) -> dict[str, BoundReport]:
    """The T-count design size, the random-circuit design size, the poly-rank
    circuit size, and the Haar-route size, with the comparison of the last two.

    ``C`` is the random-circuit constant; ``C_rank`` the rank constant used by
    the Haar route (smallest ``k`` with ``C_rank (1-delta^2)^2 2^k / k^2 >= n^d``,
    size ``k 2^k``).
    """
    log_inv_eps = -mpmath.mpf(log_epsilon) if log_epsilon is not None else (
        -mpmath.ln(epsilon) if epsilon and epsilon > 0 else None
    )
    out: dict[str, BoundReport] = {}

    # T-count design: C1 log^2(t)(t^4 + t log(1/eps))
    lt = _log(t)
    flags = {"degenerate": bool(t == 1)}
    if log_inv_eps is None:
        out["tcount_design"] = BoundReport("tcount_design", {"t": t, "C1": C1}, None, "", flags={"invalid": "epsilon"})
    else:
        val = C1 * lt ** 2 * (mpmath.mpf(t) ** 4 + t * log_inv_eps / LOG2)
        out["tcount_design"] = BoundReport(
            "tcount_design",
            {"t": t, "epsilon": epsilon, "C1": C1},
            mpmath.ln(val) if val > 0 else None,
            "T gates per design element <= value",
            value=0.0 if val == 0 else None,
            flags=flags,
        )

    # random-circuit design: C n ln^5(t) t^{4 + 3/sqrt(log t)} (2 n t + log(1/eps))
    if t == 1 or log_inv_eps is None:
        out["circuit_design"] = BoundReport(
            "circuit_design", {"n": n, "t": t, "C": C}, None, "", flags={"degenerate": True}
        )
    else:
        out["circuit_design"] = BoundReport(
            "circuit_design", {"n": n, "t": t, "epsilon": epsilon, "C": C},
            _circuit_design_log(n, t, log_inv_eps, C),
            "two-qubit gates per design element <= value",
        )

    # poly-rank circuit size: log^5(n) n^{3 + 5d + 3 sqrt(d+1)/sqrt(log n)}
    ln_ = _log(n)
    if n <= 1:
        out["poly_rank_size"] = BoundReport("poly_rank_size", {"n": n, "d": d}, None, "", flags={"degenerate": True})
    else:
        expo = 3 + 5 * d + 3 * mpmath.sqrt(d + 1) / mpmath.sqrt(ln_)
        out["poly_rank_size"] = BoundReport(
            "poly_rank_size", {"n": n, "d": d}, 5 * mpmath.ln(ln_) + expo * mpmath.ln(n),
            "gates for chi_delta >= n^d via t-designs (up to O)",
        )

    # t-design route with the prescribed t = n^{d+1}, eps = e^{-n^{d+2}}
    td = n ** (d + 1)
    out["design_route"] = BoundReport(
        "design_route", {"n": n, "d": d, "t": td, "log_epsilon": -mpmath.mpf(n) ** (d + 2), "C": C},
        _circuit_design_log(n, td, mpmath.mpf(n) ** (d + 2), C) if td > 1 else None,
        "gates for chi_delta >= n^d via the random-circuit design",
    )

    # Haar route: smallest k with C_rank (1-delta^2)^2 2^k / k^2 >= n^d, size k 2^k
    target = mpmath.mpf(n) ** d
    k = 1
    while C_rank * (1 - mpmath.mpf(delta) ** 2) ** 2 * mpmath.mpf(2) ** k / (k * k) < target:
        k += 1
    out["haar_route"] = BoundReport(
        "haar_route", {"M": target, "delta": delta, "C": C_rank}, mpmath.ln(k) + k * LOG2,
        "gates for chi_delta >= M via a Haar state on k qubits (k 2^k)", flags={"k": k},
    )
    dr = out["design_route"].log_value
    out["haar_route"].flags["design_route_larger"] = bool(dr is not None and dr > out["haar_route"].log_value)
    return out
