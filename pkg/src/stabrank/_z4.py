"""Z4-valued quadratic forms ``i^{c + sum a_k y_k + 2 sum_{j<k} b_jk y_j y_k}``.

This is the working representation behind gate updates, canonicalization and
exact inner products. All exponent bookkeeping is integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .f2 import parity


def _sym_row(b: Sequence[int], k: int) -> int:
    """Neighbours of variable ``k`` in the symmetric closure of ``b``."""
    row = b[k]
    for j in range(k):
        if (b[j] >> k) & 1:
            row |= 1 << j
    return row


@dataclass
class Z4Form:
    m: int
    a: list[int] = field(default_factory=list)
    b: list[int] = field(default_factory=list)  # strictly upper rows
    c: int = 0

    def __post_init__(self) -> None:
        if not self.a:
            self.a = [0] * self.m
        if not self.b:
            self.b = [0] * self.m

    def copy(self) -> Z4Form:
        return Z4Form(self.m, list(self.a), list(self.b), self.c)

    def exponent(self, y: int) -> int:
        e = self.c
        for k in range(self.m):
            if (y >> k) & 1:
                e += self.a[k]
                e += 2 * parity(self.b[k] & y)
        return e & 3

    # -- elementary updates -------------------------------------------------
    def add_pair(self, j: int, k: int) -> None:
        """Add ``2 y_j y_k``."""
        if j == k:
            self.a[j] = (self.a[j] + 2) & 3
        else:
            lo, hi = min(j, k), max(j, k)
            self.b[lo] ^= 1 << hi

    def add_parity(self, mask: int, s: int = 1, const: int = 0) -> None:
        """Add ``s * (const XOR (XOR_{k in mask} y_k))`` for ``s`` in {+1, -1}.

        Uses ``XOR u = sum u - 2 sum_{pairs} u u`` (mod 4); the pair terms carry
        coefficient ``-2s = 2`` mod 4 independent of sign. A constant bit is
        handled by ``1 XOR u = 1 - u``.
        """
        if const & 1:
            self.c = (self.c + s) & 3
            s = -s
        ks = [k for k in range(self.m) if (mask >> k) & 1]
        for i, k in enumerate(ks):
            self.a[k] = (self.a[k] + s) & 3
            for j in ks[i + 1:]:
                self.b[k] ^= 1 << j

    def add_twice_parity(self, mask: int, const: int = 0) -> None:
        """Add ``2 * (const XOR parity)``; linear because ``2 XOR = 2 sum`` mod 4."""
        self.c = (self.c + 2 * (const & 1)) & 3
        for k in range(self.m):
            if (mask >> k) & 1:
                self.a[k] = (self.a[k] + 2) & 3

    def add_twice_product(self, mask1: int, c1: int, mask2: int, c2: int) -> None:
        """Add ``2 (c1 XOR l1(y)) (c2 XOR l2(y))`` for parities ``l1, l2``."""
        if c1 & c2 & 1:
            self.c = (self.c + 2) & 3
        if c1 & 1:
            self.add_twice_parity(mask2)
        if c2 & 1:
            self.add_twice_parity(mask1)
        k1 = [k for k in range(self.m) if (mask1 >> k) & 1]
        k2 = [k for k in range(self.m) if (mask2 >> k) & 1]
        for j in k1:
            for k in k2:
                self.add_pair(j, k)

    # -- structural operations ----------------------------------------------
    def substitute(self, rows: Sequence[tuple[int, int]], m_new: int) -> Z4Form:
        """Affine change of variables ``y_k = c_k XOR (XOR_{l in mask_k} z_l)``.

        ``rows[k] = (mask_k, c_k)``; returns the form in the ``z`` variables.
        """
        out = Z4Form(m_new, c=self.c)
        for k in range(self.m):
            mask, cst = rows[k]
            ak = self.a[k]
            if ak == 1:
                out.add_parity(mask, 1, cst)
            elif ak == 3:
                out.add_parity(mask, -1, cst)
            elif ak == 2:
                out.add_twice_parity(mask, cst)
        for j in range(self.m):
            r = self.b[j]
            while r:
                k = (r & -r).bit_length() - 1
                r &= r - 1
                mj, cj = rows[j]
                mk, ck = rows[k]
                out.add_twice_product(mj, cj, mk, ck)
        return out

    def __add__(self, other: Z4Form) -> Z4Form:
        if self.m != other.m:
            raise ValueError("forms over different variable counts")
        return Z4Form(
            self.m,
            [(x + y) & 3 for x, y in zip(self.a, other.a)],
            [x ^ y for x, y in zip(self.b, other.b)],
            (self.c + other.c) & 3,
        )

    def conj(self) -> Z4Form:
        return Z4Form(self.m, [(-x) & 3 for x in self.a], list(self.b), (-self.c) & 3)

    def drop_variable(self, k: int) -> Z4Form:
        """Remove variable ``k`` (its terms must already be zero)."""
        keep = [j for j in range(self.m) if j != k]
        idx = {j: i for i, j in enumerate(keep)}
        out = Z4Form(self.m - 1, c=self.c)
        for j in keep:
            out.a[idx[j]] = self.a[j]
            r = self.b[j]
            while r:
                t = (r & -r).bit_length() - 1
                r &= r - 1
                if t != k:
                    out.add_pair(idx[j], idx[t])
        return out


def remove_bit(x: int, k: int) -> int:
    low = x & ((1 << k) - 1)
    return ((x >> (k + 1)) << k) | low


def gauss_sum(form: Z4Form) -> tuple[int, int] | None:
    """Exact ``sum_{y in F2^m} i^{f(y)}`` as ``(p, q)`` meaning ``sqrt(2)^p * w^q``.

    ``w = exp(i pi / 4)``. Returns ``None`` when the sum vanishes. One variable
    is eliminated per step: an isolated variable contributes ``1 + i^a``; a
    coupled variable with even ``a`` forces a linear constraint; with odd
    ``a`` it contributes ``sqrt(2) w^{+-1}`` times a parity phase.
    """
    f = form.copy()
    p = 0
    q = 0
    while f.m:
        k = f.m - 1
        nb = _sym_row(f.b, k)
        a = f.a[k]
        # strip variable k, then fold its sum back in
        f.a[k] = 0
        for v in range(k):
            f.b[v] &= ~(1 << k)
        f = f.drop_variable(k)
        if nb == 0:
            if a == 0:
                p += 2
            elif a == 2:
                return None
            elif a == 1:
                p += 1
                q += 1
            else:
                p += 1
                q -= 1
        elif a % 2 == 0:
            # 1 + (-1)^{a/2 + nb.y} = 2 [nb.y = a/2]; solve for the highest y_j
            p += 2
            j = nb.bit_length() - 1
            rest = nb & ~(1 << j)
            rows = [((rest, (a >> 1) & 1) if v == j else (1 << v, 0)) for v in range(f.m)]
            f = f.substitute(rows, f.m).drop_variable(j)
        else:
            # 1 + i^a (-1)^{nb.y} = sqrt2 w^{+-1} i^{-+ nb.y}
            p += 1
            q += 1 if a == 1 else -1
            f.add_parity(nb, -1 if a == 1 else 1)
    return p, (q + 2 * f.c) & 7


def gauss_value(res: tuple[int, int] | None) -> complex:
    import cmath
    import math

    if res is None:
        return 0j
    p, q = res
    return math.sqrt(2.0) ** p * cmath.exp(1j * math.pi * q / 4)
