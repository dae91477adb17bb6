"""Stabilizer states in quadratic-form representation.

A state is ``scale * sum_{x in A} i^{ell(x)} (-1)^{Q(x)} |x>`` for an affine
subspace ``A``. Basis index ``x`` is big-endian: qubit ``q`` of an ``n``-qubit
register is bit ``n - 1 - q`` of ``x``, so ``np.kron`` of two dense vectors puts
the first factor on the low qubit indices.

Canonical form: ``A`` in RREF with a reduced offset, and ``ell``/``Q`` written
only in the pivot coordinates of ``A``. Two canonical states describe the same
ray iff their (support, phase) pair is identical.
"""

from __future__ import annotations

import cmath
import functools
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from ._z4 import Z4Form, gauss_sum, gauss_value, remove_bit
from .errors import ResourceLimitError
from .f2 import AffineSubspace, QuadraticPhase, Span, i_power, reduce_vector

CLIFFORD_GATES = {"H": 1, "S": 1, "X": 1, "Z": 1, "CNOT": 2, "CZ": 2}
_OMEGA = cmath.exp(1j * math.pi / 4)
DENSE_LIMIT = 20


@dataclass(frozen=True)
class StabilizerState:
    n: int
    support: AffineSubspace
    phase: QuadraticPhase
    scale: complex = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.support.n != self.n or self.phase.n != self.n:
            raise ValueError("support and phase must live in F2^n")
        if self.scale is None:
            object.__setattr__(self, "scale", complex(1 / math.sqrt(self.support.size)))
        else:
            object.__setattr__(self, "scale", complex(self.scale))

    @property
    def key(self) -> tuple:
        """Hashable identity of the ray (ignores ``scale``)."""
        s, p = self.support, self.phase
        return (self.n, s.basis, s.offset, p.q_rows, p.lin, p.ell)

    @property
    def norm(self) -> float:
        return abs(self.scale) * math.sqrt(self.support.size)

    def normalized(self) -> StabilizerState:
        return StabilizerState(self.n, self.support, self.phase)

    def __repr__(self) -> str:
        return (
            f"StabilizerState(n={self.n}, basis={[hex(b) for b in self.support.basis]}, "
            f"offset={self.support.offset:#x}, q={[hex(r) for r in self.phase.q_rows]}, "
            f"lin={self.phase.lin:#x}, ell={self.phase.ell:#x}, scale={self.scale:.6g})"
        )


def zero_state(n: int) -> StabilizerState:
    return basis_state(n, 0)


def basis_state(n: int, x: int) -> StabilizerState:
    return StabilizerState(n, AffineSubspace.point(n, x), QuadraticPhase.zero(n), 1.0)


def _bit(n: int, qubit: int) -> int:
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n} qubits")
    return n - 1 - qubit


# -- parametric working form --------------------------------------------------


@dataclass
class _Param:
    """``scale * sum_y i^{form(y)} |v XOR (XOR_k y_k L_k)>`` with independent ``L``."""

    n: int
    v: int
    L: list[int]
    form: Z4Form
    scale: complex

    def copy(self) -> _Param:
        return _Param(self.n, self.v, list(self.L), self.form.copy(), self.scale)

    def bit_parity(self, p: int) -> tuple[int, int]:
        """``x_p`` as ``(mask over y, constant)``."""
        mask = 0
        for k, l in enumerate(self.L):
            if (l >> p) & 1:
                mask |= 1 << k
        return mask, (self.v >> p) & 1


def _x_form(phase: QuadraticPhase) -> Z4Form:
    """The phase as a Z4 form in the ``n`` coordinates of ``x``."""
    n = phase.n
    f = Z4Form(n)
    f.add_parity(phase.ell, 1)
    f.add_twice_parity(phase.lin)
    for i, r in enumerate(phase.q_rows):
        f.b[i] ^= r
    return f


def _substitution_rows(n: int, offset: int, gens: Sequence[int]) -> list[tuple[int, int]]:
    rows = []
    for i in range(n):
        mask = 0
        for k, g in enumerate(gens):
            if (g >> i) & 1:
                mask |= 1 << k
        rows.append((mask, (offset >> i) & 1))
    return rows


def _to_param(s: StabilizerState) -> _Param:
    L = list(s.support.basis)
    rows = _substitution_rows(s.n, s.support.offset, L)
    form = _x_form(s.phase).substitute(rows, len(L))
    return _Param(s.n, s.support.offset, L, form, s.scale)


def _canonical(p: _Param) -> StabilizerState:
    span = Span(p.L)
    m = len(p.L)
    if span.dim != m:
        raise AssertionError("parametrization is not injective")
    v_red, combo_v = span.express(p.v)
    rows = []
    for j in range(m):
        mask = 0
        for k, cb in enumerate(span.combos):
            if (cb >> j) & 1:
                mask |= 1 << k
        rows.append((mask, (combo_v >> j) & 1))
    g = p.form.substitute(rows, m)
    scale = p.scale * i_power(g.c)
    q_rows = [0] * p.n
    lin = 0
    ell = 0
    piv = span.pivots
    for k in range(m):
        ak = g.a[k]
        e = ak & 1
        if e:
            ell |= 1 << piv[k]
        if ((ak - e) & 3) >> 1:
            lin |= 1 << piv[k]
    for j in range(m):
        for k in range(j + 1, m):
            bit = ((g.b[j] >> k) & 1) ^ (g.a[j] & g.a[k] & 1)
            if bit:
                lo, hi = min(piv[j], piv[k]), max(piv[j], piv[k])
                q_rows[lo] ^= 1 << hi
    support = AffineSubspace(p.n, tuple(span.basis), v_red)
    return StabilizerState(p.n, support, QuadraticPhase(p.n, tuple(q_rows), lin, ell), scale)


def canonicalize(s: StabilizerState) -> StabilizerState:
    """Rewrite any valid (support, phase, scale) triple in canonical form."""
    return _canonical(_to_param(s))


def from_parts(
    n: int,
    gens: Iterable[int],
    offset: int,
    phase: QuadraticPhase | None = None,
    scale: complex | None = None,
) -> StabilizerState:
    """Build a canonical state from arbitrary generators and an ``F2^n`` phase."""
    gens = list(gens)
    span = Span(gens)
    if span.dim != len(gens):
        gens = list(span.basis)
    phase = phase or QuadraticPhase.zero(n)
    L = gens
    rows = _substitution_rows(n, offset, L)
    form = _x_form(phase).substitute(rows, len(L))
    if scale is None:
        scale = 1 / math.sqrt(1 << len(L))
    return _canonical(_Param(n, offset, L, form, scale))


# -- evaluation ---------------------------------------------------------------


def amplitude(s: StabilizerState, x: int) -> complex:
    if x < 0 or x >> s.n:
        raise ValueError(f"basis index {x} out of range for {s.n} qubits")
    if not s.support.contains(x):
        return 0j
    return s.scale * i_power(s.phase.exponent(x))


def _points_and_exponents(s: StabilizerState) -> tuple[np.ndarray, np.ndarray]:
    n, m = s.n, s.support.dim
    ys = np.arange(1 << m, dtype=np.int64)
    xs = np.full(ys.shape, s.support.offset, dtype=np.int64)
    for k, b in enumerate(s.support.basis):
        xs ^= ((ys >> k) & 1) * b
    if n == 0:
        return xs, np.zeros_like(xs)
    xbits = (xs[:, None] >> np.arange(n)) & 1
    ph = s.phase
    ell = np.array([(ph.ell >> i) & 1 for i in range(n)])
    lin = np.array([(ph.lin >> i) & 1 for i in range(n)])
    qm = np.array([[(r >> j) & 1 for j in range(n)] for r in ph.q_rows])
    quad = ((xbits @ qm) * xbits).sum(axis=1) + xbits @ lin
    e = (((xbits @ ell) & 1) + 2 * quad) & 3
    return xs, e


_I4 = np.array([1, 1j, -1, -1j])


def to_dense(s: StabilizerState, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Amplitude vector of length ``2**n`` (raw array; see ``dense.DenseState``)."""
    if s.n > limit:
        raise ResourceLimitError(f"{s.n} qubits exceeds the dense limit {limit}")
    out = np.zeros(1 << s.n, dtype=complex)
    xs, e = _points_and_exponents(s)
    out[xs] = s.scale * _I4[e]
    return out


def inner_product(s1: StabilizerState, s2: StabilizerState) -> complex:
    """Exact ``<s1|s2>`` by a quadratic Gauss sum over the support intersection."""
    if s1.n != s2.n:
        raise ValueError(f"qubit counts differ: {s1.n} vs {s2.n}")
    inter = s1.support.intersect(s2.support)
    if inter is None:
        return 0j
    rows = _substitution_rows(s1.n, inter.offset, inter.basis)
    m = inter.dim
    f1 = _x_form(s1.phase).substitute(rows, m)
    f2 = _x_form(s2.phase).substitute(rows, m)
    g = gauss_sum(f1.conj() + f2)
    return s1.scale.conjugate() * s2.scale * gauss_value(g)


# -- Clifford action ----------------------------------------------------------


def _apply_h(p: _Param, bit: int) -> _Param:
    e = 1 << bit
    span = Span(p.L)
    rem, combo = span.express(e)
    if rem != 0:
        # e_bit outside the span: new free variable u carries x_bit
        lam, vb = p.bit_parity(bit)
        m = len(p.L)
        L = [l & ~e for l in p.L] + [e]
        f = Z4Form(m + 1, p.form.a + [0], p.form.b + [0], p.form.c)
        f.add_twice_product(1 << m, 0, lam, vb)
        return _Param(p.n, p.v & ~e, L, f, p.scale / math.sqrt(2))
    # e_bit inside the span: pick r so that y_r alone drives x_bit
    r = (combo & -combo).bit_length() - 1
    newL = []
    for k, l in enumerate(p.L):
        newL.append(e if k == r else (l ^ e if (l >> bit) & 1 else l))
    newv = p.v & ~e
    q = _reparametrize(p, newL, newv)
    f = q.form
    a_r = f.a[r]
    nb = 0
    for k in range(f.m):
        if k != r and ((f.b[min(k, r)] >> max(k, r)) & 1):
            nb |= 1 << k
    f.a[r] = 0
    for k in range(r):
        f.b[k] &= ~(1 << r)
    f.b[r] = 0
    if a_r % 2 == 0:
        # x_bit is forced to a_r/2 XOR nb.y; drop the variable
        L2 = []
        for k, l in enumerate(q.L):
            if k == r:
                continue
            L2.append(l ^ e if (nb >> k) & 1 else l)
        v2 = q.v ^ (e if (a_r >> 1) & 1 else 0)
        f2 = f.drop_variable(r)
        return _Param(p.n, v2, L2, f2, q.scale * math.sqrt(2))
    s = -1 if a_r == 1 else 1
    f.add_parity(nb | (1 << r), s)
    w = _OMEGA if a_r == 1 else _OMEGA.conjugate()
    return _Param(p.n, q.v, q.L, f, q.scale * w)


def _reparametrize(p: _Param, newL: list[int], newv: int) -> _Param:
    """Same state over generators ``newL`` (same span) and offset ``newv``."""
    span = Span(p.L)
    rem_v, cv = span.express(newv ^ p.v)
    if rem_v:
        raise AssertionError("new offset not in the affine span")
    combos = []
    for l in newL:
        rem, c = span.express(l)
        if rem:
            raise AssertionError("new generator outside the span")
        combos.append(c)
    rows = []
    for j in range(len(p.L)):
        mask = 0
        for k, c in enumerate(combos):
            if (c >> j) & 1:
                mask |= 1 << k
        rows.append((mask, (cv >> j) & 1))
    return _Param(p.n, newv, newL, p.form.substitute(rows, len(newL)), p.scale)


def _apply(p: _Param, gate: str, qubits: Sequence[int]) -> _Param:
    n = p.n
    gate = gate.upper()
    if gate not in CLIFFORD_GATES:
        raise ValueError(f"unsupported Clifford gate {gate!r}")
    if len(qubits) != CLIFFORD_GATES[gate]:
        raise ValueError(f"{gate} takes {CLIFFORD_GATES[gate]} qubit(s), got {len(qubits)}")
    bits = [_bit(n, q) for q in qubits]
    if len(set(bits)) != len(bits):
        raise ValueError("repeated qubit index")
    p = p.copy()
    if gate == "X":
        p.v ^= 1 << bits[0]
    elif gate == "Z":
        lam, vb = p.bit_parity(bits[0])
        p.form.add_twice_parity(lam, vb)
    elif gate == "S":
        lam, vb = p.bit_parity(bits[0])
        p.form.add_parity(lam, 1, vb)
    elif gate == "CZ":
        l1, c1 = p.bit_parity(bits[0])
        l2, c2 = p.bit_parity(bits[1])
        p.form.add_twice_product(l1, c1, l2, c2)
    elif gate == "CNOT":
        c, t = bits
        p.v ^= ((p.v >> c) & 1) << t
        p.L = [l ^ (((l >> c) & 1) << t) for l in p.L]
    elif gate == "H":
        p = _apply_h(p, bits[0])
    return p


def _qubit_tuple(qubits: int | Sequence[int]) -> tuple[int, ...]:
    if isinstance(qubits, (int, np.integer)):
        return (int(qubits),)
    return tuple(int(q) for q in qubits)


def apply_gate(s: StabilizerState, gate: str, qubits: int | Sequence[int]) -> StabilizerState:
    """``gate |s>`` in canonical form, global scalar included in ``scale``."""
    return _canonical(_apply(_to_param(s), gate, _qubit_tuple(qubits)))


def apply_circuit(s: StabilizerState, gates: Iterable[tuple[str, Sequence[int]]]) -> StabilizerState:
    p = _to_param(s)
    for g, qs in gates:
        p = _apply(p, g, _qubit_tuple(qs))
    return _canonical(p)


def postselect(s: StabilizerState, qubit: int, b: int) -> tuple[complex, StabilizerState] | None:
    """``(I x <b|) |s>`` on ``qubit`` as ``(scalar, normalized (n-1)-qubit state)``.

    Returns ``None`` when the projection vanishes.
    """
    bit = _bit(s.n, qubit)
    p = _to_param(s)
    lam, vb = p.bit_parity(bit)
    if lam == 0:
        if vb != (b & 1):
            return None
        L, v, f = p.L, p.v, p.form
    else:
        r = (lam & -lam).bit_length() - 1
        rest = lam & ~(1 << r)
        rows = []
        for k in range(len(p.L)):
            rows.append((rest, (b ^ vb) & 1) if k == r else (1 << k, 0))
        f = p.form.substitute(rows, len(p.L)).drop_variable(r)
        v = p.v ^ (p.L[r] if (b ^ vb) & 1 else 0)
        L = [l ^ (p.L[r] if (rest >> k) & 1 else 0) for k, l in enumerate(p.L) if k != r]
    L = [remove_bit(l, bit) for l in L]
    v = remove_bit(v, bit)
    out = _canonical(_Param(s.n - 1, v, L, f, p.scale))
    scalar = out.scale * math.sqrt(out.support.size)
    return scalar, out.normalized()


def tensor(s1: StabilizerState, s2: StabilizerState) -> StabilizerState:
    """``|s1> (x) |s2>`` with ``s1`` on the leading qubits."""
    n2 = s2.n
    p1, p2 = _to_param(s1), _to_param(s2)
    m1, m2 = p1.form.m, p2.form.m
    f = Z4Form(m1 + m2, p1.form.a + p2.form.a, [r for r in p1.form.b] + [r << m1 for r in p2.form.b])
    f.c = (p1.form.c + p2.form.c) & 3
    L = [l << n2 for l in p1.L] + p2.L
    return _canonical(_Param(s1.n + n2, (p1.v << n2) | p2.v, L, f, p1.scale * p2.scale))


# -- dictionaries -------------------------------------------------------------

FULL = "full-stabilizer"
QUADRATIC = "quadratic-phase"
_KIND_ALIASES = {"stab": FULL, FULL: FULL, "full": FULL, "quadphase": QUADRATIC, QUADRATIC: QUADRATIC}
DICT_LIMITS = {FULL: 4, QUADRATIC: 5}


def stab_count(n: int) -> int:
    """``|Stab_n| = 2^n prod_{k=1..n} (2^k + 1)``."""
    out = 1 << n
    for k in range(1, n + 1):
        out *= (1 << k) + 1
    return out


def _rref_bases(n: int, m: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    for piv in itertools.combinations(range(n - 1, -1, -1), m):
        pset = set(piv)
        frees = [[j for j in range(p) if j not in pset] for p in piv]
        choices = [range(1 << len(fr)) for fr in frees]
        for pick in itertools.product(*choices):
            basis = []
            for p, fr, c in zip(piv, frees, pick):
                vec = 1 << p
                for t, j in enumerate(fr):
                    if (c >> t) & 1:
                        vec |= 1 << j
                basis.append(vec)
            yield tuple(basis), piv


def _phases_on(n: int, piv: Sequence[int], with_ell: bool) -> Iterator[QuadraticPhase]:
    m = len(piv)
    pairs = [(j, k) for j in range(m) for k in range(j + 1, m)]
    ells = range(1 << m) if with_ell else (0,)
    for ell_c in ells:
        for lin_c in range(1 << m):
            for q_c in range(1 << len(pairs)):
                rows = [0] * n
                for t, (j, k) in enumerate(pairs):
                    if (q_c >> t) & 1:
                        lo, hi = min(piv[j], piv[k]), max(piv[j], piv[k])
                        rows[lo] |= 1 << hi
                ell = sum(1 << piv[k] for k in range(m) if (ell_c >> k) & 1)
                lin = sum(1 << piv[k] for k in range(m) if (lin_c >> k) & 1)
                yield QuadraticPhase(n, tuple(rows), lin, ell)


@dataclass(frozen=True)
class Dictionary:
    n: int
    kind: str
    states: tuple[StabilizerState, ...]

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[StabilizerState]:
        return iter(self.states)

    def __getitem__(self, i: int) -> StabilizerState:
        return self.states[i]

    @functools.cached_property
    def _index(self) -> dict:
        return {s.key: i for i, s in enumerate(self.states)}

    def index(self, s: StabilizerState) -> int:
        """Position of the ray of ``s`` (raises ``KeyError`` when absent)."""
        return self._index[s.key]

    def __contains__(self, s: StabilizerState) -> bool:
        return s.key in self._index

    @functools.cached_property
    def matrix(self) -> np.ndarray:
        """Dense vectors as rows, shape ``(len, 2**n)``; read-only."""
        mat = np.zeros((len(self.states), 1 << self.n), dtype=complex)
        for i, s in enumerate(self.states):
            xs, e = _points_and_exponents(s)
            mat[i, xs] = s.scale * _I4[e]
        mat.setflags(write=False)
        return mat


@functools.lru_cache(maxsize=None)
def enumerate_dictionary(n: int, kind: str = FULL) -> Dictionary:
    """All stabilizer rays (``full-stabilizer``) or all real quadratic phases
    ``(-1)^{Q(x)}`` with full support (``quadratic-phase``), canonical and in a
    fixed order."""
    kind = _KIND_ALIASES.get(kind, kind)
    if kind not in DICT_LIMITS:
        raise ValueError(f"unknown dictionary kind {kind!r}")
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > DICT_LIMITS[kind]:
        raise ResourceLimitError(f"{kind} dictionary limited to n <= {DICT_LIMITS[kind]}")
    states = []
    if kind == FULL:
        for m in range(n + 1):
            for basis, piv in _rref_bases(n, m):
                free_bits = [j for j in range(n) if j not in set(piv)]
                offsets = [
                    sum(1 << free_bits[t] for t in range(len(free_bits)) if (c >> t) & 1)
                    for c in range(1 << len(free_bits))
                ]
                phases = list(_phases_on(n, piv, True))
                for off in offsets:
                    sup = AffineSubspace(n, basis, off)
                    for ph in phases:
                        states.append(StabilizerState(n, sup, ph))
        expected = stab_count(n)
    else:
        sup = AffineSubspace.full(n)
        piv = sup.pivots
        for ph in _phases_on(n, piv, False):
            states.append(StabilizerState(n, sup, ph))
        expected = 1 << (n * (n + 1) // 2)
    if len(states) != expected:  # pragma: no cover - enumeration bug guard
        raise AssertionError(f"enumerated {len(states)} states, expected {expected}")
    return Dictionary(n, kind, tuple(states))


# -- dump format ----------------------------------------------------------------

DUMP_VERSION = 1


def _hex_list(vals: Sequence[int]) -> str:
    return ",".join(f"{v:x}" for v in vals) if vals else "-"


def _parse_hex_list(tok: str) -> list[int]:
    return [] if tok == "-" else [int(t, 16) for t in tok.split(",")]


def format_state_line(s: StabilizerState) -> str:
    """``basis offset Q ell re im``; Q rows carry ``lin`` on the diagonal."""
    q = [r | (((s.phase.lin >> i) & 1) << i) for i, r in enumerate(s.phase.q_rows)]
    return " ".join(
        [
            _hex_list(s.support.basis),
            f"{s.support.offset:x}",
            _hex_list(q),
            f"{s.phase.ell:x}",
            repr(s.scale.real),
            repr(s.scale.imag),
        ]
    )


def parse_state_line(n: int, line: str) -> StabilizerState:
    toks = line.split()
    if len(toks) != 6:
        raise ValueError(f"expected 6 fields, got {len(toks)}: {line!r}")
    basis = _parse_hex_list(toks[0])
    offset = int(toks[1], 16)
    q = _parse_hex_list(toks[2])
    if len(q) != n:
        q = q + [0] * (n - len(q))
    lin = sum(((r >> i) & 1) << i for i, r in enumerate(q))
    rows = tuple(r & ~((1 << (i + 1)) - 1) for i, r in enumerate(q))
    phase = QuadraticPhase(n, rows, lin, int(toks[3], 16))
    return StabilizerState(n, AffineSubspace(n, tuple(basis), offset), phase, complex(float(toks[4]), float(toks[5])))


def dump_dictionary(d: Dictionary, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# stabrank-dictionary v{DUMP_VERSION} n={d.n} kind={d.kind} count={len(d)}\n")
        fh.write("# fields: basis offset Q ell scale_re scale_im (hex; Q rows include diagonal)\n")
        for s in d.states:
            fh.write(format_state_line(s) + "\n")


def load_dictionary(path: str | Path) -> Dictionary:
    n = kind = None
    states = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("n="):
                        n = int(tok[2:])
                    elif tok.startswith("kind="):
                        kind = tok[5:]
                    elif tok.startswith("v") and tok[1:].isdigit() and int(tok[1:]) != DUMP_VERSION:
                        raise ValueError(f"unsupported dump version {tok}")
                continue
            if n is None:
                raise ValueError("missing header line with n=")
            states.append(parse_state_line(n, line))
    return Dictionary(n, kind or FULL, tuple(states))


def is_canonical(s: StabilizerState) -> bool:
    """Support in RREF, reduced offset, and phase confined to pivot coordinates."""
    basis, piv = s.support.basis, s.support.pivots
    if list(piv) != sorted(piv, reverse=True):
        return False
    for b, p in zip(basis, piv):
        if any((b >> q) & 1 for q in piv if q != p):
            return False
    if reduce_vector(s.support.offset, basis, piv) != s.support.offset:
        return False
    pmask = sum(1 << p for p in piv)
    ph = s.phase
    if ph.ell & ~pmask or ph.lin & ~pmask:
        return False
    return all((r & ~pmask) == 0 and (r == 0 or (pmask >> i) & 1) for i, r in enumerate(ph.q_rows))
