from __future__ import annotations

import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabrank.f2 import (
    AffineSubspace,
    F2Matrix,
    QuadraticPhase,
    bits_of,
    common_constant_subspace,
    eval_quadratic,
    from_bits,
    parity,
    solve_f2,
)


def brute_solutions(A: F2Matrix, b: int) -> set[int]:
    return {x for x in range(1 << A.ncols) if A.matvec(x) == b}


def random_affine(rng: random.Random, n: int) -> AffineSubspace:
    gens = [rng.randrange(1 << n) for _ in range(rng.randint(0, n))]
    return AffineSubspace.from_generators(n, gens, rng.randrange(1 << n))


def random_phase(rng: random.Random, n: int) -> QuadraticPhase:
    rows = tuple(rng.randrange(1 << n) & ~((1 << (i + 1)) - 1) for i in range(n))
    return QuadraticPhase(n, rows, rng.randrange(1 << n), rng.randrange(1 << n))


# -- solve_f2 ---------------------------------------------------------------------


def test_identity_system():
    x, kernel = solve_f2(F2Matrix.identity(4), from_bits([1, 0, 1, 0]))
    assert bits_of(x, 4) == [1, 0, 1, 0]
    assert kernel == []


def test_inconsistent_system():
    x, _ = solve_f2(F2Matrix.from_array([[1, 1], [1, 1]]), from_bits([1, 0]))
    assert x is None


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        solve_f2(F2Matrix.identity(3), 0, nrows=4)
    with pytest.raises(ValueError):
        solve_f2(F2Matrix.identity(2), 0b100)


@settings(max_examples=300, deadline=None)
@given(
    rows=st.lists(st.integers(0, 15), min_size=1, max_size=5),
    b=st.integers(0, 31),
)
def test_solve_matches_enumeration(rows, b):
    A = F2Matrix(tuple(rows), 4)
    b &= (1 << len(rows)) - 1
    x, kernel = solve_f2(A, b)
    sols = brute_solutions(A, b)
    for k in kernel:
        assert A.matvec(k) == 0
    if x is None:
        assert not sols
        return
    assert A.matvec(x) == b
    assert len(sols) == 1 << len(kernel)
    # the kernel spans exactly the difference set
    span = {0}
    for k in kernel:
        span |= {s ^ k for s in span}
    assert {x ^ s for s in span} == sols


# -- affine subspaces --------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5), st.lists(st.integers(0, 31), max_size=5), st.integers(0, 31))
def test_affine_points_and_membership(n, gens, off):
    gens = [g & ((1 << n) - 1) for g in gens]
    off &= (1 << n) - 1
    a = AffineSubspace.from_generators(n, gens, off)
    span = {0}
    for g in gens:
        span |= {s ^ g for s in span}
    expected = {off ^ s for s in span}
    assert set(a.points()) == expected
    assert a.size == len(expected)
    assert all(a.contains(x) == (x in expected) for x in range(1 << n))
    assert a.offset == min(expected)


def test_intersection_matches_sets():
    rng = random.Random(5)
    for _ in range(300):
        n = rng.randint(1, 5)
        a, b = random_affine(rng, n), random_affine(rng, n)
        both = set(a.points()) & set(b.points())
        c = a.intersect(b)
        assert (c is None) == (not both)
        if c is not None:
            assert set(c.points()) == both


# -- common constant subspace ------------------------------------------------------


def test_empty_list_gives_full_space():
    assert common_constant_subspace([], 3) == AffineSubspace.full(3)


def test_all_full_subspaces():
    full = AffineSubspace.full(3)
    u = common_constant_subspace([full, full], 3)
    assert u == full


def test_mixed_ambient_dimensions():
    with pytest.raises(ValueError):
        common_constant_subspace([AffineSubspace.full(2)], 3)


def _constant_on(u: AffineSubspace, a: AffineSubspace) -> bool:
    return len({a.contains(x) for x in u.points()}) == 1


def test_two_subspaces_in_f2_cubed():
    rng = random.Random(11)
    for _ in range(200):
        subs = [random_affine(rng, 3) for _ in range(2)]
        u = common_constant_subspace(subs, 3)
        assert u.dim >= 1
        assert all(_constant_on(u, a) for a in subs)


def test_dimension_bound_random_instances():
    rng = random.Random(2024)
    for _ in range(1000):
        n = rng.randint(1, 6)
        M = rng.randint(0, 4)
        subs = [random_affine(rng, n) for _ in range(M)]
        u = common_constant_subspace(subs, n)
        assert u.dim >= n - M
        assert all(_constant_on(u, a) for a in subs)


def test_hyperplane_order_is_lexicographic():
    u = AffineSubspace.full(2)
    hs = list(u.hyperplanes())
    assert len(hs) == 2 * 3
    # coordinates follow the RREF basis (0b10, 0b01); (w, c) = (1, 0) fixes y0 = 0
    assert set(hs[0].points()) == {0b00, 0b01}
    assert set(hs[1].points()) == {0b10, 0b11}


# -- quadratic phases ---------------------------------------------------------------


def test_zero_phase_is_one():
    ph = QuadraticPhase.zero(3)
    assert all(eval_quadratic(ph, x) == 1 for x in range(8))


def test_forced_example():
    # Q = x1 x2, ell = x1, x = (1, 1)
    ph = QuadraticPhase(2, (0b10, 0), 0, 0b01)
    assert eval_quadratic(ph, 0b11) == -1j


def test_eval_dimension_mismatch():
    with pytest.raises(ValueError):
        eval_quadratic(QuadraticPhase.zero(2), 0b100)
    with pytest.raises(ValueError):
        eval_quadratic(QuadraticPhase.zero(2), 1, n=3)


def test_strict_upper_triangular_enforced():
    with pytest.raises(ValueError):
        QuadraticPhase(2, (0b01, 0))


def _monomial_eval(ph: QuadraticPhase, x: int) -> complex:
    n = ph.n
    xs = np.array(bits_of(x, n))
    q = np.array([bits_of(r, n) for r in ph.q_rows])
    quad = int(xs @ q @ xs) + int(np.dot(bits_of(ph.lin, n), xs))
    ell = int(np.dot(bits_of(ph.ell, n), xs)) % 2  # ell is F2-valued
    return 1j ** ell * (-1) ** quad


def test_random_phase_matches_monomial_evaluator():
    rng = random.Random(7)
    for _ in range(50):
        ph = random_phase(rng, 3)
        for x in range(8):
            assert eval_quadratic(ph, x) == pytest.approx(_monomial_eval(ph, x), abs=1e-15)


def test_from_matrix_folds_diagonal():
    A = F2Matrix.from_array([[1, 1, 0], [1, 0, 1], [0, 0, 1]])
    ph = QuadraticPhase.from_matrix(A)
    for x in range(8):
        xs = np.array(bits_of(x, 3))
        direct = int(xs @ np.array(A.to_array()) @ xs) & 1
        assert ph.q_value(x) == direct


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_polarization_identity(n):
    rng = random.Random(n)
    for _ in range(10):
        ph = random_phase(rng, n)
        for x, y in itertools.product(range(1 << n), repeat=2):
            bilinear = 0
            for i in range(n):
                for j in range(i + 1, n):
                    if (ph.q_rows[i] >> j) & 1:
                        bilinear ^= ((x >> i) & (y >> j) ^ (x >> j) & (y >> i)) & 1
            # a XOR b = a + b - 2ab, so i^{ell(x+y)} = i^{ell(x) + ell(y)} (-1)^{ell(x) ell(y)}
            sign = (-1) ** (bilinear ^ (parity(ph.ell & x) & parity(ph.ell & y)))
            lhs = eval_quadratic(ph, x) * eval_quadratic(ph, y)
            assert lhs == pytest.approx(sign * eval_quadratic(ph, x ^ y), abs=1e-15)
