"""Linear algebra over F2 on int bitsets.

Vectors are Python ints: bit ``j`` is coordinate ``j``. Matrices are tuples of
row ints, so elimination is word-parallel (one XOR per row operation).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


def parity(x: int) -> int:
    return bin(x).count("1") & 1


def popcount(x: int) -> int:
    return bin(x).count("1")


def bits_of(x: int, n: int) -> list[int]:
    return [(x >> j) & 1 for j in range(n)]


def from_bits(bits: Sequence[int]) -> int:
    out = 0
    for j, b in enumerate(bits):
        if b & 1:
            out |= 1 << j
    return out


def _check_vec(x: int, n: int, what: str = "vector") -> None:
    if x < 0 or x >> n:
        raise ValueError(f"{what} {x:#x} does not fit in {n} bits")


@dataclass(frozen=True)
class F2Matrix:
    """Row-major bit matrix; row ``i`` is an int whose bit ``j`` is entry (i, j)."""

    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        for r in self.rows:
            _check_vec(r, self.ncols, "row")

    @classmethod
    def from_array(cls, arr: Sequence[Sequence[int]]) -> F2Matrix:
        arr = [list(r) for r in arr]
        ncols = len(arr[0]) if arr else 0
        return cls(tuple(from_bits(r) for r in arr), ncols)

    @classmethod
    def identity(cls, n: int) -> F2Matrix:
        return cls(tuple(1 << i for i in range(n)), n)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def to_array(self) -> list[list[int]]:
        return [bits_of(r, self.ncols) for r in self.rows]

    def matvec(self, x: int) -> int:
        """Return ``A x`` as an int whose bit ``i`` is row ``i``'s dot product."""
        out = 0
        for i, r in enumerate(self.rows):
            if parity(r & x):
                out |= 1 << i
        return out

    def rank(self) -> int:
        return len(row_reduce(self.rows)[0])


def row_reduce(rows: Iterable[int]) -> tuple[list[int], list[int]]:
    """Reduced row-echelon form keyed on the highest set bit.

    Returns ``(basis, pivots)`` sorted by pivot descending; every basis row has
    a zero in every other row's pivot column.
    """
    basis: list[int] = []
    pivots: list[int] = []
    for r in rows:
        for b, p in zip(basis, pivots):
            if (r >> p) & 1:
                r ^= b
        if r == 0:
            continue
        p = r.bit_length() - 1
        for i in range(len(basis)):
            if (basis[i] >> p) & 1:
                basis[i] ^= r
        basis.append(r)
        pivots.append(p)
    order = sorted(range(len(basis)), key=lambda i: -pivots[i])
    return [basis[i] for i in order], [pivots[i] for i in order]


def reduce_vector(x: int, basis: Sequence[int], pivots: Sequence[int]) -> int:
    for b, p in zip(basis, pivots):
        if (x >> p) & 1:
            x ^= b
    return x


class Span:
    """Span of generators, tracking how each reduced row combines them.

    ``express(t)`` returns ``(remainder, combo)``: ``t = remainder XOR
    (XOR of gens[j] for j in combo)``, with ``remainder`` reduced.
    """

    def __init__(self, gens: Sequence[int]):
        self.gens = list(gens)
        basis: list[int] = []
        combos: list[int] = []
        pivots: list[int] = []
        for j, g in enumerate(self.gens):
            c = 1 << j
            for b, cb, p in zip(basis, combos, pivots):
                if (g >> p) & 1:
                    g ^= b
                    c ^= cb
            if g == 0:
                continue
            p = g.bit_length() - 1
            for i in range(len(basis)):
                if (basis[i] >> p) & 1:
                    basis[i] ^= g
                    combos[i] ^= c
            basis.append(g)
            combos.append(c)
            pivots.append(p)
        order = sorted(range(len(basis)), key=lambda i: -pivots[i])
        self.basis = [basis[i] for i in order]
        self.combos = [combos[i] for i in order]
        self.pivots = [pivots[i] for i in order]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def express(self, t: int) -> tuple[int, int]:
        combo = 0
        for b, cb, p in zip(self.basis, self.combos, self.pivots):
            if (t >> p) & 1:
                t ^= b
                combo ^= cb
        return t, combo


def solve_f2(A: F2Matrix, b: int, nrows: int | None = None) -> tuple[int | None, list[int]]:
    """Solve ``A x = b`` over F2.

    ``b`` is an int with bit ``i`` the right-hand side of row ``i``. Returns
    ``(x, kernel)`` where ``x`` is one solution (or ``None`` when the system is
    inconsistent) and ``kernel`` is a basis of ``ker(A)``.
    """
    m = A.nrows if nrows is None else nrows
    if m != A.nrows:
        raise ValueError(f"right-hand side has {m} entries, matrix has {A.nrows} rows")
    _check_vec(b, m, "right-hand side")
    n = A.ncols
    # augmented column sits at bit n
    aug = [r | (((b >> i) & 1) << n) for i, r in enumerate(A.rows)]
    piv_rows: list[int] = []
    piv_cols: list[int] = []
    row = 0
    for col in range(n):
        sel = next((r for r in range(row, len(aug)) if (aug[r] >> col) & 1), None)
        if sel is None:
            continue
        aug[row], aug[sel] = aug[sel], aug[row]
        for r in range(len(aug)):
            if r != row and (aug[r] >> col) & 1:
                aug[r] ^= aug[row]
        piv_rows.append(row)
        piv_cols.append(col)
        row += 1
    consistent = all(aug[r] != (1 << n) for r in range(row, len(aug)))
    pivot_set = set(piv_cols)
    free = [c for c in range(n) if c not in pivot_set]
    kernel = []
    for f in free:
        k = 1 << f
        for r, c in zip(piv_rows, piv_cols):
            if (aug[r] >> f) & 1:
                k |= 1 << c
        kernel.append(k)
    if not consistent:
        return None, kernel
    x = 0
    for r, c in zip(piv_rows, piv_cols):
        if (aug[r] >> n) & 1:
            x |= 1 << c
    return x, kernel


@dataclass(frozen=True)
class AffineSubspace:
    """``{offset XOR (XOR of a subset of basis)}`` inside F2^n.

    Stored canonically: basis in RREF (pivot = highest bit, sorted descending)
    and offset reduced against the pivots, so the offset is the smallest point.
    """

    n: int
    basis: tuple[int, ...]
    offset: int

    @classmethod
    def from_generators(cls, n: int, gens: Iterable[int], offset: int = 0) -> AffineSubspace:
        gens = list(gens)
        for g in gens:
            _check_vec(g, n, "generator")
        _check_vec(offset, n, "offset")
        basis, pivots = row_reduce(gens)
        return cls(n, tuple(basis), reduce_vector(offset, basis, pivots))

    @classmethod
    def full(cls, n: int) -> AffineSubspace:
        return cls(n, tuple(1 << j for j in reversed(range(n))), 0)

    @classmethod
    def point(cls, n: int, x: int) -> AffineSubspace:
        _check_vec(x, n)
        return cls(n, (), x)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def size(self) -> int:
        return 1 << len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(b.bit_length() - 1 for b in self.basis)

    def contains(self, x: int) -> bool:
        _check_vec(x, self.n)
        return reduce_vector(x ^ self.offset, self.basis, self.pivots) == 0

    def point_at(self, y: int) -> int:
        """Point with coordinates ``y`` (bit ``k`` of ``y`` multiplies ``basis[k]``)."""
        x = self.offset
        k = 0
        while y:
            if y & 1:
                x ^= self.basis[k]
            y >>= 1
            k += 1
        return x

    def coords(self, x: int) -> int:
        """Inverse of :meth:`point_at` for points of the subspace."""
        y = 0
        for k, p in enumerate(self.pivots):
            if (x >> p) & 1:
                y |= 1 << k
        return y

    def points(self) -> Iterator[int]:
        for y in range(self.size):
            yield self.point_at(y)

    def is_subset_of(self, other: AffineSubspace) -> bool:
        if not other.contains(self.offset):
            return False
        return all(reduce_vector(b, other.basis, other.pivots) == 0 for b in self.basis)

    def intersect(self, other: AffineSubspace) -> AffineSubspace | None:
        if self.n != other.n:
            raise ValueError("ambient dimensions differ")
        d1, d2 = self.dim, other.dim
        # columns: basis of self then basis of other; rows: coordinates
        cols = list(self.basis) + list(other.basis)
        rows = tuple(
            sum(((c >> i) & 1) << j for j, c in enumerate(cols)) for i in range(self.n)
        )
        sol, kernel = solve_f2(F2Matrix(rows, d1 + d2), self.offset ^ other.offset)
        if sol is None:
            return None
        mask1 = (1 << d1) - 1
        point = self.point_at(sol & mask1)
        gens = [self.point_at(k & mask1) ^ self.offset for k in kernel]
        return AffineSubspace.from_generators(self.n, gens, point)

    def hyperplanes(self) -> Iterator[AffineSubspace]:
        """Codimension-1 affine subspaces ``{y : w.y = c}`` in lexicographic (w, c) order."""
        d = self.dim
        for w in range(1, 1 << d):
            j = (w & -w).bit_length() - 1
            gens = []
            for k in range(d):
                if k == j:
                    continue
                v = 1 << k
                if (w >> k) & 1:
                    v |= 1 << j
                gens.append(self.point_at(v) ^ self.offset)
            for c in (0, 1):
                start = self.point_at(1 << j) if c else self.offset
                yield AffineSubspace.from_generators(self.n, gens, start)


def common_constant_subspace(subspaces: Sequence[AffineSubspace], n: int) -> AffineSubspace:
    """Affine ``U`` of dimension at least ``n - len(subspaces)`` on which every
    indicator ``1_{A_i}`` is constant.

    Each step keeps ``U`` when ``U`` lies inside ``A_i`` and otherwise moves to
    the first codimension-1 subspace of ``U`` (in :meth:`AffineSubspace.hyperplanes`
    order) that misses ``A_i``.
    """
    for a in subspaces:
        if a.n != n:
            raise ValueError(f"subspace lives in F2^{a.n}, expected F2^{n}")
    u = AffineSubspace.full(n)
    for a in subspaces:
        if u.is_subset_of(a) or u.dim == 0:
            continue  # a point outside ``a`` is already disjoint from it
        for h in u.hyperplanes():
            if h.intersect(a) is None:
                u = h
                break
        else:  # pragma: no cover - impossible when u is not inside a
            raise AssertionError("no disjoint hyperplane found")
    return u


@dataclass(frozen=True)
class QuadraticPhase:
    """The phase ``i^{ell(x)} (-1)^{Q(x)}`` with ``Q(x) = sum_{i<j} q_ij x_i x_j + lin.x``.

    ``q_rows[i]`` holds the bits ``j > i`` of row ``i`` (strictly upper
    triangular); diagonal terms live in ``lin`` because ``x^2 = x`` over F2.
    """

    n: int
    q_rows: tuple[int, ...]
    lin: int = 0
    ell: int = 0

    def __post_init__(self) -> None:
        if len(self.q_rows) != self.n:
            raise ValueError("q_rows must have one row per coordinate")
        for i, r in enumerate(self.q_rows):
            if r & ((1 << (i + 1)) - 1):
                raise ValueError("q_rows must be strictly upper triangular")
            _check_vec(r, self.n, "row")
        _check_vec(self.lin, self.n, "lin")
        _check_vec(self.ell, self.n, "ell")

    @classmethod
    def zero(cls, n: int) -> QuadraticPhase:
        return cls(n, (0,) * n)

    @classmethod
    def from_matrix(cls, A: F2Matrix, lin: int = 0, ell: int = 0) -> QuadraticPhase:
        """Fold an arbitrary ``x^T A x + lin.x`` into canonical storage."""
        n = A.ncols
        if A.nrows != n:
            raise ValueError("quadratic matrix must be square")
        rows = [0] * n
        for i in range(n):
            for j in range(n):
                if (A.rows[i] >> j) & 1:
                    if i == j:
                        lin ^= 1 << i
                    else:
                        a, b = min(i, j), max(i, j)
                        rows[a] ^= 1 << b
        return cls(n, tuple(rows), lin, ell)

    def q_value(self, x: int) -> int:
        acc = parity(self.lin & x)
        for i, r in enumerate(self.q_rows):
            if r and (x >> i) & 1:
                acc ^= parity(r & x)
        return acc

    def exponent(self, x: int) -> int:
        """Return ``e`` in Z4 with phase ``i^e``."""
        return (parity(self.ell & x) + 2 * self.q_value(x)) & 3


_I_POWERS = (1 + 0j, 1j, -1 + 0j, -1j)


def eval_quadratic(phase: QuadraticPhase, x: int, n: int | None = None) -> complex:
    """Fourth root of unity ``i^{ell(x)} (-1)^{Q(x)}``."""
    if n is not None and n != phase.n:
        raise ValueError(f"point has dimension {n}, phase has {phase.n}")
    _check_vec(x, phase.n, "point")
    return _I_POWERS[phase.exponent(x)]


def i_power(e: int) -> complex:
    return _I_POWERS[e & 3]
