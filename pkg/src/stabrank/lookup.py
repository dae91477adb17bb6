"""SELECT-SWAP table lookup: a reversible circuit, its functional check, and
T-count accounting.

Qubit layout (qubit 0 is the most significant address bit):

* ``0 .. n-1``: address ``x``;
* ``n + r*b .. n + r*b + b - 1``: bank ``r`` for ``r < lam``; bank 0 is the
  output register, banks ``1 .. lam-1`` hold the garbage ``g_x``;
* ``n + lam*b``: the SELECT flag.

SELECT runs over the high ``n - log2(lam)`` address bits. For each value ``h``
a multi-controlled X sets the flag, flag-controlled CNOTs write entries
``h*lam .. h*lam + lam - 1`` into the banks, and the flag is reset. A CSWAP
network on the low address bits then routes the addressed bank into bank 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ResourceLimitError

FUNCTIONAL_LIMIT = 22  # total qubits for permutation simulation


@dataclass(frozen=True)
class LookupSpec:
    n: int
    b: int
    data: tuple[int, ...]
    lam: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", tuple(int(v) for v in self.data))
        if self.n < 0 or self.b < 1:
            raise ValueError("need n >= 0 and b >= 1")
        if len(self.data) != 1 << self.n:
            raise ValueError(f"table must have {1 << self.n} entries, got {len(self.data)}")
        for v in self.data:
            if not 0 <= v < 1 << self.b:
                raise ValueError(f"entry {v} does not fit in {self.b} bits")
        check_lambda(self.n, self.lam)

    @property
    def swap_bits(self) -> int:
        return self.lam.bit_length() - 1

    @property
    def select_bits(self) -> int:
        return self.n - self.swap_bits


def check_lambda(n: int, lam: int) -> None:
    if lam < 1 or lam & (lam - 1):
        raise ValueError(f"lambda must be a power of two, got {lam}")
    cap = min(1 << n, 1 << math.ceil(n / 2)) if n else 1
    if lam > cap:
        raise ValueError(f"lambda must lie in [1, {cap}] for n = {n}")


@dataclass(frozen=True)
class RevGate:
    """``X``, ``CNOT``, ``MCX`` (with control polarities) or ``CSWAP``."""

    kind: str
    controls: tuple[int, ...]
    targets: tuple[int, ...]
    polarity: tuple[int, ...] = ()

    def apply(self, bits: int, width: int) -> int:
        def get(q):
            return (bits >> (width - 1 - q)) & 1

        pol = self.polarity or (1,) * len(self.controls)
        if any(get(c) != p for c, p in zip(self.controls, pol)):
            return bits
        if self.kind == "CSWAP":
            a, b = self.targets
            if get(a) != get(b):
                bits ^= (1 << (width - 1 - a)) | (1 << (width - 1 - b))
            return bits
        (t,) = self.targets
        return bits ^ (1 << (width - 1 - t))


@dataclass(frozen=True)
class LookupCircuit:
    spec: LookupSpec
    gates: tuple[RevGate, ...]
    width: int
    address: tuple[int, ...]
    output: tuple[int, ...]
    garbage: tuple[int, ...]
    flag: int

    def run(self, bits: int, gates: Sequence[RevGate] | None = None) -> int:
        for g in self.gates if gates is None else gates:
            bits = g.apply(bits, self.width)
        return bits

    def run_inverse(self, bits: int) -> int:
        return self.run(bits, self.gates[::-1])  # every gate is self-inverse

    def encode(self, x: int, regs: dict[tuple[int, ...], int] | None = None) -> int:
        bits = _place(0, self.address, x, self.width)
        for reg, val in (regs or {}).items():
            bits = _place(bits, reg, val, self.width)
        return bits

    def read(self, bits: int, reg: Sequence[int]) -> int:
        v = 0
        for q in reg:
            v = (v << 1) | ((bits >> (self.width - 1 - q)) & 1)
        return v

    def gate_counts(self) -> dict:
        out: dict[str, int] = {}
        for g in self.gates:
            key = g.kind if g.kind != "MCX" else f"MCX{len(g.controls)}"
            out[key] = out.get(key, 0) + 1
        return out


def _place(bits: int, reg: Sequence[int], val: int, width: int) -> int:
    m = len(reg)
    for i, q in enumerate(reg):
        if (val >> (m - 1 - i)) & 1:
            bits |= 1 << (width - 1 - q)
        else:
            bits &= ~(1 << (width - 1 - q))
    return bits


def build_lookup(spec: LookupSpec) -> LookupCircuit:
    n, b, lam = spec.n, spec.b, spec.lam
    s, l = spec.select_bits, spec.swap_bits
    bank = [tuple(range(n + r * b, n + (r + 1) * b)) for r in range(lam)]
    flag = n + lam * b
    width = flag + 1
    gates: list[RevGate] = []
    high = tuple(range(s))

    for h in range(1 << s):
        pol = tuple((h >> (s - 1 - i)) & 1 for i in range(s))
        if s:
            gates.append(RevGate("MCX", high, (flag,), pol))
        for r in range(lam):
            val = spec.data[h * lam + r]
            for i, q in enumerate(bank[r]):
                if (val >> (b - 1 - i)) & 1:
                    gates.append(RevGate("CNOT", (flag,), (q,)) if s else RevGate("X", (), (q,)))
        if s:
            gates.append(RevGate("MCX", high, (flag,), pol))

    # low address bit t (weight 2^t) is qubit n-1-t; walk weights high to low
    for t in reversed(range(l)):
        ctrl = n - 1 - t
        v = 1 << t
        for r in range(v):
            for qa, qb in zip(bank[r], bank[r + v]):
                gates.append(RevGate("CSWAP", (ctrl,), (qa, qb)))

    garbage = tuple(q for r in range(1, lam) for q in bank[r])
    return LookupCircuit(spec, tuple(gates), width, tuple(range(n)), bank[0], garbage, flag)


@dataclass(frozen=True)
class FunctionalReport:
    correct: bool
    uncomputed: bool
    superposition_ok: bool
    failures: tuple[int, ...]
    width: int

    def to_json(self) -> dict:
        return {
            "schema": "stabrank.lookup/1",
            "correct": self.correct,
            "uncomputed": self.uncomputed,
            "superposition_ok": self.superposition_ok,
            "failures": list(self.failures),
            "width": self.width,
        }


def permutation(circ: LookupCircuit) -> np.ndarray:
    """Images of every basis index; the circuit's dense action as a permutation."""
    if circ.width > FUNCTIONAL_LIMIT:
        raise ResourceLimitError(f"{circ.width} qubits exceeds the simulation limit")
    idx = np.arange(1 << circ.width, dtype=np.int64)
    w = circ.width
    for g in circ.gates:
        pol = g.polarity or (1,) * len(g.controls)
        mask = np.ones_like(idx, dtype=bool)
        for c, p in zip(g.controls, pol):
            mask &= ((idx >> (w - 1 - c)) & 1) == p
        if g.kind == "CSWAP":
            a, bq = g.targets
            differ = (((idx >> (w - 1 - a)) ^ (idx >> (w - 1 - bq))) & 1).astype(bool)
            flip = mask & differ
            idx = np.where(flip, idx ^ ((1 << (w - 1 - a)) | (1 << (w - 1 - bq))), idx)
        else:
            (t,) = g.targets
            idx = np.where(mask, idx ^ (1 << (w - 1 - t)), idx)
    return idx


def verify_lookup(spec: LookupSpec) -> FunctionalReport:
    """Exhaustive check on basis inputs, a dense superposition check, and
    uncomputation (running the gates backwards returns every register but the
    address to zero)."""
    circ = build_lookup(spec)
    failures = []
    uncomputed = True
    for x in range(1 << spec.n):
        out = circ.run(circ.encode(x))
        ok = circ.read(out, circ.output) == spec.data[x]
        ok &= circ.read(out, circ.address) == x
        ok &= circ.read(out, (circ.flag,)) == 0
        if not ok:
            failures.append(x)
        back = circ.run_inverse(out)
        if back != circ.encode(x):
            uncomputed = False

    # dense: uniform superposition over addresses, zero elsewhere
    perm = permutation(circ)
    vec = np.zeros(1 << circ.width, dtype=complex)
    for x in range(1 << spec.n):
        vec[circ.encode(x)] = 2 ** (-spec.n / 2)
    out = np.zeros_like(vec)
    out[perm] = vec
    expected_out = {}
    for x in range(1 << spec.n):
        expected_out[x] = spec.data[x]
    sup_ok = True
    for idx in np.nonzero(np.abs(out) > 1e-12)[0]:
        idx = int(idx)
        x = circ.read(idx, circ.address)
        if circ.read(idx, circ.output) != expected_out[x] or circ.read(idx, (circ.flag,)):
            sup_ok = False
    sup_ok &= abs(np.linalg.norm(out) - 1) < 1e-12
    return FunctionalReport(not failures, uncomputed, bool(sup_ok), tuple(failures), circ.width)


def verify_uncompute_with_copy(spec: LookupSpec) -> bool:
    """Lookup, CNOT-copy the output to fresh qubits, reverse: only ``x`` and the copy survive."""
    circ = build_lookup(spec)
    wide = circ.width + spec.b
    copy = tuple(range(circ.width, wide))
    ext = LookupCircuit(spec, circ.gates, wide, circ.address, circ.output, circ.garbage, circ.flag)
    fan = tuple(RevGate("CNOT", (o,), (c,)) for o, c in zip(circ.output, copy))
    for x in range(1 << spec.n):
        bits = ext.encode(x)
        bits = ext.run(bits)
        bits = ext.run(bits, fan)
        bits = ext.run(bits, circ.gates[::-1])
        if bits != ext.encode(x, {copy: spec.data[x]}):
            return False
    return True


# -- T-count accounting ---------------------------------------------------------


def default_mcx_cost(controls: int) -> int:
    """Toffoli ladder with clean ancillae: ``7 (c - 1)`` T gates, free for ``c <= 1``."""
    return 7 * max(controls - 1, 0)


@dataclass(frozen=True)
class TCountModel:
    mcx: Callable[[int], int] = field(default=default_mcx_cost)
    cswap_per_bit: int = 7

    def check(self, max_controls: int = 64) -> None:
        costs = [self.mcx(c) for c in range(max_controls + 1)]
        if any(c < 0 for c in costs) or any(b < a for a, b in zip(costs, costs[1:])):
            raise ValueError("MCX cost must be non-negative and monotone")
        if self.cswap_per_bit < 0:
            raise ValueError("CSWAP cost must be non-negative")


DEFAULT_MODEL = TCountModel()


def t_count_formula(n: int, b: int, lam: int, model: TCountModel = DEFAULT_MODEL) -> int:
    """SELECT over ``2^n/lam`` values with ``ceil(log2(2^n/lam))`` controls each, plus
    ``lam*b`` controlled swaps per layer over ``log2 lam`` layers."""
    branches = (1 << n) // lam
    controls = math.ceil(math.log2(branches)) if branches > 1 else 0
    layers = lam.bit_length() - 1
    return branches * model.mcx(controls) + lam * b * layers * model.cswap_per_bit


def t_count(spec: LookupSpec, model: TCountModel = DEFAULT_MODEL) -> int:
    return t_count_formula(spec.n, spec.b, spec.lam, model)


def built_t_count(circ: LookupCircuit, model: TCountModel = DEFAULT_MODEL) -> int:
    """T count of the constructed circuit (flag set and reset, ``(lam-1) b`` CSWAPs)."""
    total = 0
    for g in circ.gates:
        if g.kind == "MCX":
            total += model.mcx(len(g.controls))
        elif g.kind == "CSWAP":
            total += model.cswap_per_bit
    return total


def network_t_count(n: int, b: int, lam: int, model: TCountModel = DEFAULT_MODEL) -> int:
    """Closed form of :func:`built_t_count`: two MCX per SELECT value, ``(lam-1) b`` CSWAPs."""
    branches = (1 << n) // lam
    controls = n - (lam.bit_length() - 1)
    mcx = 2 * branches * model.mcx(controls) if controls else 0
    return mcx + (lam - 1) * b * model.cswap_per_bit


COUNTERS = {"formula": t_count_formula, "network": network_t_count}


def lambda_sweep(
    n: int, b: int = 1, model: TCountModel = DEFAULT_MODEL, counter: str = "formula"
) -> list[dict]:
    count = COUNTERS[counter]
    out = []
    lam = 1
    cap = 1 << math.ceil(n / 2)
    while lam <= min(cap, 1 << n):
        out.append({"n": n, "b": b, "lam": lam, "t_count": count(n, b, lam, model)})
        lam *= 2
    return out


def best_lambda(
    n: int, b: int = 1, model: TCountModel = DEFAULT_MODEL, counter: str = "formula"
) -> dict:
    rows = lambda_sweep(n, b, model, counter)
    best = min(rows, key=lambda r: (r["t_count"], r["lam"]))
    return {**best, "ratio": best["t_count"] / 2 ** (n / 2), "ratio_over_n": best["t_count"] / (2 ** (n / 2) * n)}


# -- data table files -----------------------------------------------------------


def read_table(path: str | Path) -> tuple[int, int, tuple[int, ...]]:
    """One ``b``-bit binary string per line; returns ``(n, b, data)``."""
    rows = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    rows = [r for r in rows if r]
    if not rows:
        raise ValueError("empty table")
    b = len(rows[0])
    for r in rows:
        if len(r) != b or set(r) - {"0", "1"}:
            raise ValueError(f"bad table row {r!r}")
    n = len(rows).bit_length() - 1
    if len(rows) != 1 << n:
        raise ValueError(f"table length {len(rows)} is not a power of two")
    return n, b, tuple(int(r, 2) for r in rows)


def write_table(path: str | Path, b: int, data: Sequence[int]) -> None:
    Path(path).write_text("".join(format(v, f"0{b}b") + "\n" for v in data))
