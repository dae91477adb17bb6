"""Dense state vectors: the numeric oracle, Haar sampling and subspace projections."""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import stab
from .errors import ResourceLimitError
from .stab import StabilizerState

DENSE_LIMIT = stab.DENSE_LIMIT
HAAR_BLOCK = 1024
NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DenseState:
    """``n``-qubit amplitude vector, big-endian basis order (qubit 0 is the MSB)."""

    n: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.amps, dtype=complex).reshape(-1)
        if a.shape[0] != 1 << self.n:
            raise ValueError(f"expected {1 << self.n} amplitudes, got {a.shape[0]}")
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    @classmethod
    def from_array(cls, amps: np.ndarray) -> DenseState:
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        n = amps.shape[0].bit_length() - 1
        if amps.shape[0] != 1 << n:
            raise ValueError("length is not a power of two")
        return cls(n, amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm ** 2 - 1) <= tol

    def normalized(self) -> DenseState:
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return DenseState(self.n, self.amps / nrm)

    def tensor(self, other: DenseState) -> DenseState:
        return DenseState(self.n + other.n, np.kron(self.amps, other.amps))

    def f_values(self) -> np.ndarray:
        """``f(x) = 2^{n/2} <x|psi>``."""
        return self.amps * 2 ** (self.n / 2)

    def __array__(self, dtype=None, copy=None):
        return self.amps if dtype is None else self.amps.astype(dtype)


def from_stabilizer(s: StabilizerState, limit: int = DENSE_LIMIT) -> DenseState:
    return DenseState(s.n, stab.to_dense(s, limit))


def as_array(psi: DenseState | np.ndarray) -> np.ndarray:
    return psi.amps if isinstance(psi, DenseState) else np.asarray(psi, dtype=complex)


def basis(n: int, x: int = 0) -> DenseState:
    a = np.zeros(1 << n, dtype=complex)
    a[x] = 1
    return DenseState(n, a)


def t_state(m: int) -> DenseState:
    """``|T>^{(x) m}`` with amplitudes ``prod_j e^{i pi x_j / 4} / 2^{m/2}``."""
    x = np.arange(1 << m)
    weights = np.array([bin(v).count("1") for v in range(1 << m)]) if m else np.zeros(1, int)
    return DenseState(m, np.exp(1j * np.pi * weights / 4) / 2 ** (m / 2) * np.ones_like(x))


def plus_state(n: int) -> DenseState:
    return DenseState(n, np.full(1 << n, 2 ** (-n / 2), dtype=complex))


_NAMED = re.compile(r"^(T|0|\+)\^(\d+)$")


def named_state(name: str) -> DenseState:
    """``T^m``, ``0^n`` or ``+^n``."""
    m = _NAMED.match(name.strip())
    if not m:
        raise ValueError(f"unknown state name {name!r}")
    kind, k = m.group(1), int(m.group(2))
    if k > DENSE_LIMIT:
        raise ResourceLimitError(f"{k} qubits exceeds the dense limit {DENSE_LIMIT}")
    return {"T": t_state, "0": basis, "+": plus_state}[kind](k)


def read_state_file(path: str | Path) -> DenseState:
    """Header ``n=<int>`` then one ``re im`` pair per line; ``#`` starts a comment."""
    n = None
    vals: list[complex] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            if not line.startswith("n="):
                raise ValueError("state file must start with a header line n=<int>")
            n = int(line[2:])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"expected 're im', got {line!r}")
        vals.append(complex(float(parts[0]), float(parts[1])))
    if n is None:
        raise ValueError("empty state file")
    return DenseState(n, np.array(vals))


def write_state_file(psi: DenseState, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(f"n={psi.n}\n")
        for a in psi.amps:
            fh.write(f"{float(a.real)!r} {float(a.imag)!r}\n")


def load_state(spec: str) -> DenseState:
    """A named state (``T^2``) or a path to a state file."""
    if _NAMED.match(spec.strip()):
        return named_state(spec)
    return read_state_file(spec)


# -- Haar sampling --------------------------------------------------------------


def _haar_block(n: int, seed: int, block: int) -> np.ndarray:
    ss = np.random.SeedSequence([int(seed), int(n), int(block)])
    rng = np.random.Generator(np.random.Philox(ss))
    z = rng.standard_normal((HAAR_BLOCK, 1 << n)) + 1j * rng.standard_normal((HAAR_BLOCK, 1 << n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_samples(
    n: int, seed: int, count: int, start: int = 0, workers: int = 1, limit: int = DENSE_LIMIT
) -> np.ndarray:
    """Rows ``start .. start+count-1`` of the Haar stream keyed by ``seed``.

    Sample ``i`` comes from block ``i // HAAR_BLOCK`` of a counter-keyed Philox
    generator, so the result does not depend on ``workers``.
    """
    if n > limit:
        raise ResourceLimitError(f"{n} qubits exceeds the dense limit {limit}")
    if count <= 0:
        return np.zeros((0, 1 << n), dtype=complex)
    first, last = start // HAAR_BLOCK, (start + count - 1) // HAAR_BLOCK
    blocks = range(first, last + 1)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda b: _haar_block(n, seed, b), blocks))
    else:
        parts = [_haar_block(n, seed, b) for b in blocks]
    allrows = np.concatenate(parts, axis=0)
    off = start - first * HAAR_BLOCK
    return allrows[off:off + count]


def haar_sample(n: int, rng_seed: int, index: int = 0, limit: int = DENSE_LIMIT) -> DenseState:
    return DenseState(n, haar_samples(n, rng_seed, 1, start=index, limit=limit)[0])


# -- overlaps and projections ---------------------------------------------------


def fidelity(psi: DenseState, phi: DenseState) -> float:
    if psi.n != phi.n:
        raise ValueError(f"qubit counts differ: {psi.n} vs {phi.n}")
    return float(abs(np.vdot(psi.amps, phi.amps)) ** 2)


def gram_matrix(states: Sequence[StabilizerState]) -> np.ndarray:
    """``G_ij = <s_i|s_j>`` from exact symbolic inner products."""
    k = len(states)
    g = np.zeros((k, k), dtype=complex)
    for i in range(k):
        g[i, i] = stab.inner_product(states[i], states[i])
        for j in range(i + 1, k):
            g[i, j] = stab.inner_product(states[i], states[j])
            g[j, i] = g[i, j].conjugate()
    return g


def pinv_quadratic(g: np.ndarray, beta: np.ndarray, cutoff: float = 1e-10) -> float:
    """``beta^H G^+ beta`` with eigenvalues below ``cutoff * lambda_max`` dropped."""
    w, v = np.linalg.eigh(g)
    lam_max = w.max() if w.size else 0.0
    if lam_max <= 0:
        return 0.0
    keep = w > cutoff * lam_max
    proj = v[:, keep].conj().T @ beta
    return float(np.sum(np.abs(proj) ** 2 / w[keep]))


def project_norm2(psi: DenseState, S: Sequence[StabilizerState], cutoff: float = 1e-10) -> float:
    """``||P_S psi||^2`` for the projector onto ``span(S)``, via the Gram matrix."""
    if not S:
        raise ValueError("S must contain at least one state")
    for s in S:
        if s.n != psi.n:
            raise ValueError(f"state on {s.n} qubits, psi on {psi.n}")
    beta = np.array([np.vdot(stab.to_dense(s), psi.amps) for s in S])
    return pinv_quadratic(gram_matrix(S), beta, cutoff)


def random_clifford_word(n: int, length: int, rng: np.random.Generator) -> list[tuple[str, tuple[int, ...]]]:
    """Uniformly chosen generator gates (not a uniform Clifford)."""
    one = ["H", "S", "X", "Z"]
    two = ["CNOT", "CZ"] if n > 1 else []
    names = one + two
    word = []
    for _ in range(length):
        g = names[rng.integers(len(names))]
        if g in two:
            q = tuple(int(v) for v in rng.choice(n, size=2, replace=False))
        else:
            q = (int(rng.integers(n)),)
        word.append((g, q))
    return word


_GATE_MATS = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "S": np.diag([1, 1j]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "SDG": np.diag([1, -1j]),
}


def apply_gate_dense(amps: np.ndarray, n: int, gate: str, qubits: Sequence[int]) -> np.ndarray:
    """Apply one gate of {H, S, SDG, X, Z, T, CNOT, CZ} to a dense vector."""
    gate = gate.upper()
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    psi = np.asarray(amps, dtype=complex).reshape([2] * n)
    if gate in _GATE_MATS:
        (q,) = qubits
        psi = np.moveaxis(np.tensordot(_GATE_MATS[gate], psi, axes=([1], [q])), 0, q)
    elif gate == "CNOT":
        c, t = qubits
        psi = psi.copy()
        idx = [slice(None)] * n
        idx[c] = 1
        sub = psi[tuple(idx)]
        psi[tuple(idx)] = np.flip(sub, axis=t - (1 if t > c else 0))
    elif gate == "CZ":
        a, b = qubits
        psi = psi.copy()
        idx = [slice(None)] * n
        idx[a] = 1
        idx[b] = 1
        psi[tuple(idx)] *= -1
    else:
        raise ValueError(f"unsupported gate {gate!r}")
    return psi.reshape(-1)


def apply_word_dense(amps: np.ndarray, n: int, word) -> np.ndarray:
    for g, qs in word:
        amps = apply_gate_dense(amps, n, g, qs)
    return amps
