"""Independent reference implementations used only by the tests.

Nothing here imports the package's numeric code paths: gates are full
``2^n x 2^n`` Kronecker matrices, projections use QR, sums are literal loops.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

I2 = np.eye(2, dtype=complex)
ONE_QUBIT = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.diag([1.0 + 0j, -1.0]),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
}


def embed(n: int, q: int, g: np.ndarray) -> np.ndarray:
    """Full matrix of ``g`` on qubit ``q`` (qubit 0 is the leading Kronecker factor)."""
    out = np.eye(1, dtype=complex)
    for j in range(n):
        out = np.kron(out, g if j == q else I2)
    return out


def controlled(n: int, c: int, t: int, g: np.ndarray) -> np.ndarray:
    p0 = np.diag([1.0 + 0j, 0])
    p1 = np.diag([0j, 1.0])
    return embed(n, c, p0) + embed(n, c, p1) @ embed(n, t, g)


def gate_matrix(n: int, name: str, qubits) -> np.ndarray:
    name = name.upper()
    if name in ONE_QUBIT:
        return embed(n, qubits[0], ONE_QUBIT[name])
    if name in ("CNOT", "CX"):
        return controlled(n, qubits[0], qubits[1], ONE_QUBIT["X"])
    if name == "CZ":
        return controlled(n, qubits[0], qubits[1], ONE_QUBIT["Z"])
    raise ValueError(name)


def run_word(vec: np.ndarray, n: int, word) -> np.ndarray:
    for g, qs in word:
        vec = gate_matrix(n, g, qs) @ vec
    return vec


def t_power(m: int) -> np.ndarray:
    t = np.array([1, np.exp(1j * math.pi / 4)]) / math.sqrt(2)
    out = np.ones(1, dtype=complex)
    for _ in range(m):
        out = np.kron(out, t)
    return out


def _basis(vecs: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    u, s, _ = np.linalg.svd(np.asarray(vecs).T, full_matrices=False)
    return u[:, s > tol * max(s.max(), 1e-300)]


def projection_norm2(psi: np.ndarray, vecs: np.ndarray, tol: float = 1e-10) -> float:
    """``||P psi||^2`` by orthonormalising the rows of ``vecs`` with an SVD."""
    q = _basis(vecs, tol)
    return float(np.sum(np.abs(q.conj().T @ psi) ** 2))


def projection_residual(psi: np.ndarray, vecs: np.ndarray) -> float:
    """``||psi - P psi||`` (computed directly, not via ``1 - ||P psi||^2``)."""
    q = _basis(vecs)
    return float(np.linalg.norm(psi - q @ (q.conj().T @ psi)))


def brute_rank(psi: np.ndarray, mat: np.ndarray, delta: float = 0.0, tol: float = 1e-9, max_m: int = 4) -> int:
    """Smallest ``M`` with an ``M``-subset of rows within ``delta`` of ``psi`` (plain itertools)."""
    for m in range(1, max_m + 1):
        for sub in itertools.combinations(range(mat.shape[0]), m):
            if projection_residual(psi, mat[list(sub)]) <= delta + tol:
                return m
    raise RuntimeError("rank above max_m")


def gowers_u3_eighth_direct(amps: np.ndarray) -> float:
    """``16^{-n} sum_{x,h1,h2,h3} prod_S C^{|S|} f(x + h_S)`` by literal loops."""
    N = len(amps)
    n = N.bit_length() - 1
    f = amps * 2 ** (n / 2)
    total = 0j
    for x, h1, h2, h3 in itertools.product(range(N), repeat=4):
        term = 1 + 0j
        for mask in range(8):
            y = x
            if mask & 1:
                y ^= h1
            if mask & 2:
                y ^= h2
            if mask & 4:
                y ^= h3
            v = f[y]
            term *= np.conj(v) if bin(mask).count("1") % 2 else v
        total += term
    return float(total.real) / 16 ** n


def gadget_branch(n: int, gates, outcomes, correction: str = "S") -> np.ndarray:
    """Unnormalized data-register state of one gadget branch, on the full register.

    The ``i``-th T on qubit ``q`` becomes CNOT(q, a_i) with ``a_i = n + k - i``,
    a projector onto ``|x_i>`` on ``a_i`` and the correction on ``q`` when
    ``x_i = 1``; no qubit is ever removed.
    """
    k = len(outcomes)
    N = n + k
    vec = np.zeros(1 << n, dtype=complex)
    vec[0] = 1
    vec = np.kron(vec, t_power(k))
    i = 0
    for g, qs in gates:
        if g == "T":
            i += 1
            a = N - i
            vec = gate_matrix(N, "CNOT", (qs[0], a)) @ vec
            proj = np.zeros((2, 2), dtype=complex)
            proj[outcomes[i - 1], outcomes[i - 1]] = 1
            vec = embed(N, a, proj) @ vec
            if outcomes[i - 1]:
                vec = gate_matrix(N, correction, (qs[0],)) @ vec
        else:
            vec = gate_matrix(N, g, qs) @ vec
    # ancillae a_1 .. a_k hold x_1 .. x_k; qubit a_i is bit i - 1 of the low k bits
    anc = sum(int(x) << (i) for i, x in enumerate(outcomes))
    return vec.reshape(1 << n, 1 << k)[:, anc]
