"""Clifford+T circuits, T-gadget rewriting, exact branch simulation and the
rank-monotonicity experiments."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import stab
from .dense import DENSE_LIMIT, DenseState, apply_gate_dense, basis, t_state
from .errors import BudgetExceeded, ResourceLimitError
from .rank import EXHAUSTIVE, approx_rank

GATE_ARITY = {"H": 1, "S": 1, "X": 1, "Z": 1, "T": 1, "CNOT": 2, "CZ": 2}
_ALIASES = {"CX": "CNOT"}
CORRECTION = "S"
INFIDELITY_TOL = 1e-9
UNIFORM_TOL = 1e-10

Gate = tuple[str, tuple[int, ...]]


def _norm_gate(name: str, qubits: Sequence[int], n: int) -> Gate:
    g = name.upper()
    g = _ALIASES.get(g, g)
    if g not in GATE_ARITY:
        raise ValueError(f"unknown gate {name!r}")
    qs = tuple(int(q) for q in qubits)
    if len(qs) != GATE_ARITY[g]:
        raise ValueError(f"{g} takes {GATE_ARITY[g]} qubit(s), got {len(qs)}")
    if len(set(qs)) != len(qs):
        raise ValueError(f"{g} needs distinct qubits")
    for q in qs:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    return g, qs


@dataclass(frozen=True)
class CliffordTCircuit:
    n: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(_norm_gate(g, q, self.n) for g, q in self.gates))

    @property
    def t_count(self) -> int:
        return sum(1 for g, _ in self.gates if g == "T")

    def run_dense(self, state: DenseState | None = None) -> DenseState:
        psi = basis(self.n) if state is None else state
        if psi.n != self.n:
            raise ValueError("input state has the wrong qubit count")
        amps = psi.amps
        for g, qs in self.gates:
            amps = apply_gate_dense(amps, self.n, g, qs)
        return DenseState(self.n, amps)

    def to_text(self) -> str:
        lines = [f"qubits {self.n}"]
        lines += [" ".join([g, *map(str, qs)]) for g, qs in self.gates]
        return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> CliffordTCircuit:
    """``qubits <n>`` header, then one gate per line (``H 0``, ``CNOT 0 1``); ``#`` comments."""
    n = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if parts[0].lower() != "qubits" or len(parts) != 2:
                raise ValueError(f"line {lineno}: expected header 'qubits <n>'")
            n = int(parts[1])
            continue
        try:
            gates.append(_norm_gate(parts[0], [int(p) for p in parts[1:]], n))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if n is None:
        raise ValueError("missing 'qubits <n>' header")
    return CliffordTCircuit(n, tuple(gates))


def read_circuit(path: str | Path) -> CliffordTCircuit:
    return parse_circuit(Path(path).read_text())


def random_circuit(
    n: int, k: int, rng: np.random.Generator, cliffords_per_block: int = 4
) -> CliffordTCircuit:
    """``k`` T gates on random qubits, separated by random generator words."""
    one = ["H", "S", "X", "Z"]
    two = ["CNOT", "CZ"] if n > 1 else []
    names = one + two

    def word():
        out = []
        for _ in range(cliffords_per_block):
            g = names[rng.integers(len(names))]
            if g in two:
                out.append((g, tuple(int(v) for v in rng.choice(n, 2, replace=False))))
            else:
                out.append((g, (int(rng.integers(n)),)))
        return out

    gates = word()
    for _ in range(k):
        gates.append(("T", (int(rng.integers(n)),)))
        gates += word()
    return CliffordTCircuit(n, tuple(gates))


# -- gadget rewriting -----------------------------------------------------------


@dataclass(frozen=True)
class GadgetizedCircuit:
    """Blocks ``C_0 .. C_k`` on ``n + k`` qubits with ``k`` measurement sites.

    The ``i``-th T gate (1-based) teleports through ancilla ``n + k - i``, so
    measurements always consume the current last qubit. Block ``C_i`` starts
    with the correction on ``data_qubits[i-1]`` when ``x_i = 1``.
    """

    n: int
    k: int
    blocks: tuple[tuple[Gate, ...], ...]
    data_qubits: tuple[int, ...]
    correction: str = CORRECTION

    @property
    def n_total(self) -> int:
        return self.n + self.k

    def ancilla(self, i: int) -> int:
        return self.n + self.k - i

    def block(self, i: int, outcome: int = 0) -> tuple[Gate, ...]:
        """``C_i^{outcome}`` (the outcome only matters for ``i >= 1``)."""
        body = self.blocks[i]
        if i >= 1 and outcome:
            return ((self.correction, (self.data_qubits[i - 1],)),) + body
        return body


def rewrite_gadgets(c: CliffordTCircuit, correction: str = CORRECTION) -> GadgetizedCircuit:
    k = c.t_count
    blocks: list[list[Gate]] = [[]]
    data: list[int] = []
    for g, qs in c.gates:
        if g == "T":
            i = len(data) + 1
            blocks[-1].append(("CNOT", (qs[0], c.n + k - i)))
            data.append(qs[0])
            blocks.append([])
        else:
            blocks[-1].append((g, qs))
    return GadgetizedCircuit(c.n, k, tuple(tuple(b) for b in blocks), tuple(data), correction)


def _apply_block(amps: np.ndarray, nq: int, gates: Iterable[Gate]) -> np.ndarray:
    for g, qs in gates:
        amps = apply_gate_dense(amps, nq, g, qs)
    return amps


def _initial(g: GadgetizedCircuit, state: DenseState | None) -> np.ndarray:
    if g.n_total > DENSE_LIMIT:
        raise ResourceLimitError(f"{g.n_total} qubits exceeds the dense limit")
    psi = basis(g.n) if state is None else state
    if psi.n != g.n:
        raise ValueError("input state has the wrong qubit count")
    return np.kron(psi.amps, t_state(g.k).amps)


def _branch(g: GadgetizedCircuit, outcomes: Sequence[int], amps: np.ndarray) -> np.ndarray:
    """Unnormalized state after ``C_0`` and the first ``len(outcomes)`` projections."""
    nq = g.n_total
    amps = _apply_block(amps, nq, g.block(0))
    for i, x in enumerate(outcomes, 1):
        amps = amps[int(x)::2]  # <x| on the last qubit
        nq -= 1
        amps = _apply_block(amps, nq, g.block(i, x))
    return amps


def simulate_branch(
    g: GadgetizedCircuit, outcomes: Sequence[int], state: DenseState | None = None
) -> tuple[float, DenseState | None]:
    """Probability of ``outcomes`` and the normalized surviving ``n``-qubit state."""
    if len(outcomes) != g.k:
        raise ValueError(f"expected {g.k} outcomes, got {len(outcomes)}")
    amps = _branch(g, outcomes, _initial(g, state))
    p = float(np.vdot(amps, amps).real)
    if p <= 1e-300:
        return 0.0, None
    return p, DenseState(g.n, amps / np.sqrt(p))


@dataclass(frozen=True)
class OutcomeStats:
    probabilities: dict
    max_deviation: float  # from 2^{-k}
    max_conditional_deviation: float  # from 1/2, over every site and prefix
    total: float

    @property
    def uniform(self) -> bool:
        return self.max_deviation < UNIFORM_TOL and self.max_conditional_deviation < UNIFORM_TOL


def outcome_stats(g: GadgetizedCircuit, state: DenseState | None = None) -> OutcomeStats:
    """Exact branch probabilities, walking the outcome tree."""
    probs: dict[tuple[int, ...], float] = {}
    cond_dev = 0.0
    start = _apply_block(_initial(g, state), g.n_total, g.block(0))

    def walk(prefix: tuple[int, ...], amps: np.ndarray, nq: int):
        nonlocal cond_dev
        if len(prefix) == g.k:
            probs[prefix] = float(np.vdot(amps, amps).real)
            return
        p_node = float(np.vdot(amps, amps).real)
        for x in (0, 1):
            child = amps[x::2]
            if p_node > 1e-300:
                cond = float(np.vdot(child, child).real) / p_node
                cond_dev = max(cond_dev, abs(cond - 0.5))
            child = _apply_block(child, nq - 1, g.block(len(prefix) + 1, x))
            walk(prefix + (x,), child, nq - 1)

    walk((), start, g.n_total)
    dev = max(abs(p - 2.0 ** -g.k) for p in probs.values())
    return OutcomeStats(probs, dev, cond_dev, sum(probs.values()))


@dataclass(frozen=True)
class EquivalenceReport:
    max_infidelity: float
    worst_outcome: tuple[int, ...]
    branches: int
    ok: bool
    correction: str

    def to_json(self) -> dict:
        return {
            "schema": "stabrank.gadget/1",
            "max_infidelity": self.max_infidelity,
            "worst_outcome": list(self.worst_outcome),
            "branches": self.branches,
            "ok": self.ok,
            "correction": self.correction,
        }


def verify_equivalence(
    c: CliffordTCircuit, state: DenseState | None = None, correction: str = CORRECTION
) -> EquivalenceReport:
    """Compare every corrected branch with direct simulation, up to global phase."""
    g = rewrite_gadgets(c, correction)
    direct = c.run_dense(state).amps
    worst, worst_x = -1.0, ()
    for x in itertools.product((0, 1), repeat=g.k):
        p, out = simulate_branch(g, x, state)
        inf = 1.0 if out is None else max(0.0, 1 - abs(np.vdot(direct, out.amps)) ** 2)
        if inf > worst:
            worst, worst_x = inf, x
    return EquivalenceReport(worst, worst_x, 2 ** g.k, worst <= INFIDELITY_TOL, correction)


def select_correction() -> str:
    """Which of S or S-dagger makes the single-T gadget exact on ``|+>``."""
    c = CliffordTCircuit(1, (("H", (0,)), ("T", (0,))))
    for corr in ("S", "SDG"):
        if verify_equivalence(c, correction=corr).ok:
            return corr
    raise AssertionError("neither correction convention reproduces the T gate")


# -- rank experiments -----------------------------------------------------------


@dataclass
class MonotonicityReport:
    n: int
    k: int
    delta: float
    trials: int
    rhs: int
    lhs: list[int] = field(default_factory=list)
    violations: list[int] = field(default_factory=list)
    gadget_checks: int = 0
    gadget_violations: list[dict] = field(default_factory=list)
    inconclusive: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations and not self.gadget_violations

    def to_json(self) -> dict:
        return {
            "schema": "stabrank.monotonicity/1",
            "n": self.n,
            "k": self.k,
            "delta": self.delta,
            "trials": self.trials,
            "rhs_chi_delta_T_k": self.rhs,
            "lhs": self.lhs,
            "violations": self.violations,
            "gadget_checks": self.gadget_checks,
            "gadget_violations": self.gadget_violations,
            "inconclusive": self.inconclusive,
            "ok": self.ok,
        }


def _chi(amps: np.ndarray, nq: int, delta: float, budget: int) -> int:
    if nq == 0:
        return 1
    d = stab.enumerate_dictionary(nq)
    return approx_rank(amps / np.linalg.norm(amps), delta, d, EXHAUSTIVE, budget=budget).rank


def gadget_lemma_check(amps: np.ndarray, nq: int, delta: float, budget: int) -> dict | None:
    """``min_b chi_delta(post-measurement b) <= chi_delta(state)`` for a balanced last qubit.

    Returns ``None`` when the marginal is unbalanced or the state has one qubit.
    """
    p0 = float(np.vdot(amps[0::2], amps[0::2]).real)
    p1 = float(np.vdot(amps[1::2], amps[1::2]).real)
    if nq < 2 or abs(p0 - p1) > 1e-10:
        return None
    whole = _chi(amps, nq, delta, budget)
    post = [_chi(amps[b::2], nq - 1, delta, budget) for b in (0, 1)]
    return {"state": whole, "post": post, "ok": min(post) <= whole}


def rank_monotonicity_experiment(
    n: int,
    k: int,
    delta: float,
    trials: int,
    rng_seed: int,
    budget: int = 5_000_000,
    check_gadget_lemma: bool = True,
) -> MonotonicityReport:
    """``chi_delta(V|0^n>) <= chi_delta(|T>^k)`` on random circuits with ``k`` T gates.

    With ``check_gadget_lemma`` every balanced intermediate state of the gadget
    chain along outcome ``0...0`` is also checked against the one-measurement
    inequality.
    """
    if n + k > 3:
        raise ResourceLimitError("exhaustive ranks limited to n + k <= 3 qubits")
    rng = np.random.default_rng(rng_seed)
    rhs = _chi(t_state(k).amps, k, delta, budget)
    rep = MonotonicityReport(n, k, delta, trials, rhs)
    for trial in range(trials):
        c = random_circuit(n, k, rng)
        try:
            lhs = _chi(c.run_dense().amps, n, delta, budget)
        except BudgetExceeded:
            rep.inconclusive += 1
            continue
        rep.lhs.append(lhs)
        if lhs > rhs:
            rep.violations.append(trial)
        if check_gadget_lemma and k:
            g = rewrite_gadgets(c)
            amps, nq = _initial(g, None), g.n_total
            amps = _apply_block(amps, nq, g.block(0))
            for i in range(1, k + 1):
                try:
                    res = gadget_lemma_check(amps, nq, delta, budget)
                except BudgetExceeded:
                    rep.inconclusive += 1
                    res = None
                if res is not None:
                    rep.gadget_checks += 1
                    if not res["ok"]:
                        rep.gadget_violations.append({"trial": trial, "site": i, **res})
                amps = _apply_block(amps[0::2], nq - 1, g.block(i, 0))
                nq -= 1
    return rep
