from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from oracles import projection_norm2, run_word, t_power
from stabrank import dense, stab
from stabrank.dense import DenseState
from stabrank.errors import ResourceLimitError


def test_state_validates_length():
    with pytest.raises(ValueError):
        DenseState(2, np.ones(3))
    with pytest.raises(ValueError):
        DenseState.from_array(np.ones(3))


def test_state_is_read_only():
    psi = dense.t_state(1)
    with pytest.raises(ValueError):
        psi.amps[0] = 0


def test_named_states():
    np.testing.assert_allclose(dense.named_state("T^3").amps, t_power(3), atol=1e-15)
    np.testing.assert_allclose(dense.named_state("0^2").amps, [1, 0, 0, 0])
    np.testing.assert_allclose(dense.named_state("+^2").amps, [0.5] * 4)
    with pytest.raises(ValueError):
        dense.named_state("Q^2")


def test_state_file_round_trip(tmp_path):
    psi = dense.haar_sample(3, 4)
    path = tmp_path / "psi.txt"
    dense.write_state_file(psi, path)
    back = dense.load_state(str(path))
    np.testing.assert_array_equal(back.amps, psi.amps)


def test_state_file_comments_and_errors(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("# a comment\nn=1\n1 0  # |0>\n0 0\n")
    np.testing.assert_allclose(dense.read_state_file(path).amps, [1, 0])
    path.write_text("1 0\n0 0\n")
    with pytest.raises(ValueError):
        dense.read_state_file(path)


def test_f_values():
    psi = dense.plus_state(3)
    np.testing.assert_allclose(psi.f_values(), np.ones(8))


# -- Haar sampling -------------------------------------------------------------------


def test_haar_unit_norm_and_deterministic():
    a = dense.haar_samples(3, 9, 50)
    assert np.allclose(np.linalg.norm(a, axis=1), 1, atol=1e-12)
    np.testing.assert_array_equal(a, dense.haar_samples(3, 9, 50))
    assert not np.allclose(a, dense.haar_samples(3, 10, 50))


def test_haar_independent_of_workers_and_slicing():
    whole = dense.haar_samples(2, 5, 3000)
    np.testing.assert_array_equal(whole, dense.haar_samples(2, 5, 3000, workers=4))
    np.testing.assert_array_equal(whole[1000:2500], dense.haar_samples(2, 5, 1500, start=1000))
    np.testing.assert_array_equal(whole[17], dense.haar_sample(2, 5, 17).amps)


def test_haar_limit():
    with pytest.raises(ResourceLimitError):
        dense.haar_samples(5, 0, 1, limit=4)


def test_haar_first_moment_of_zero_overlap():
    z = dense.haar_samples(3, 123, 100_000)
    x = np.abs(z[:, 0]) ** 2
    se = x.std(ddof=1) / math.sqrt(len(x))
    assert abs(x.mean() - 1 / 8) <= 4 * se


def test_haar_overlap_distribution_is_state_independent():
    z = dense.haar_samples(3, 77, 20_000)
    d = stab.enumerate_dictionary(3)
    s1, s2 = d.matrix[0], d.matrix[500]
    # use disjoint halves so the samples are independent
    a = np.abs(z[:10_000] @ s1.conj()) ** 2
    b = np.abs(z[10_000:] @ s2.conj()) ** 2
    assert stats.ks_2samp(a, b).pvalue > 0.01


# -- projections -----------------------------------------------------------------------


def test_project_single_state():
    z = stab.zero_state(3)
    assert dense.project_norm2(dense.basis(3, 0), [z]) == pytest.approx(1)


def test_project_full_dictionary():
    psi = dense.haar_sample(2, 3)
    assert dense.project_norm2(psi, list(stab.enumerate_dictionary(2))) == pytest.approx(1, abs=1e-9)


def test_project_matches_orthonormalisation_oracle():
    rng = np.random.default_rng(8)
    d = stab.enumerate_dictionary(3)
    for i in range(100):
        psi = dense.haar_sample(3, 8, i)
        sub = rng.choice(len(d), 5, replace=False)
        expect = projection_norm2(psi.amps, d.matrix[sub])
        assert dense.project_norm2(psi, [d[j] for j in sub]) == pytest.approx(expect, abs=1e-9)


def test_project_invariant_to_dependence():
    d = stab.enumerate_dictionary(1)
    psi = dense.t_state(1)
    base = dense.project_norm2(psi, [d[0], d[1]])
    # a third state on one qubit is dependent on any two others
    assert dense.project_norm2(psi, [d[0], d[1], d[2], d[0]]) == pytest.approx(base, abs=1e-12)
    assert base == pytest.approx(1, abs=1e-12)


def test_project_monotone_and_bounded():
    rng = np.random.default_rng(9)
    d = stab.enumerate_dictionary(3)
    for i in range(20):
        psi = dense.haar_sample(3, 19, i)
        chain, prev = [], 0.0
        for j in rng.choice(len(d), 12, replace=False):
            chain.append(d[j])
            val = dense.project_norm2(psi, chain)
            assert val >= prev - 1e-12
            assert -1e-12 <= val <= 1 + 1e-9
            prev = val


def test_project_dimension_mismatch():
    with pytest.raises(ValueError):
        dense.project_norm2(dense.basis(2, 0), [stab.zero_state(3)])


def test_projection_is_two_lipschitz():
    d = stab.enumerate_dictionary(3)
    rng = np.random.default_rng(10)
    for i in range(200):
        S = [d[j] for j in rng.choice(len(d), 4, replace=False)]
        psi, phi = dense.haar_sample(3, 20, 2 * i), dense.haar_sample(3, 20, 2 * i + 1)
        lhs = abs(dense.project_norm2(psi, S) - dense.project_norm2(phi, S))
        assert lhs <= 2 * np.linalg.norm(psi.amps - phi.amps) + 1e-12


def test_gram_matrix_matches_dense():
    d = stab.enumerate_dictionary(2)
    S = [d[i] for i in (0, 7, 13, 42)]
    g = dense.gram_matrix(S)
    vecs = d.matrix[[0, 7, 13, 42]]
    np.testing.assert_allclose(g, vecs.conj() @ vecs.T, atol=1e-12)


# -- fidelity -------------------------------------------------------------------------


def test_fidelity_basics():
    psi = dense.haar_sample(2, 1)
    assert dense.fidelity(psi, psi) == pytest.approx(1)
    assert dense.fidelity(dense.basis(1, 0), dense.plus_state(1)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        dense.fidelity(dense.basis(1, 0), dense.basis(2, 0))


def test_fidelity_invariant_under_clifford_word():
    rng = np.random.default_rng(11)
    for i in range(20):
        psi, phi = dense.haar_sample(3, 30, 2 * i), dense.haar_sample(3, 30, 2 * i + 1)
        word = dense.random_clifford_word(3, 25, rng)
        a = DenseState(3, dense.apply_word_dense(psi.amps, 3, word))
        b = DenseState(3, dense.apply_word_dense(phi.amps, 3, word))
        assert dense.fidelity(a, b) == pytest.approx(dense.fidelity(psi, phi), abs=1e-10)


def test_dense_gates_match_kronecker_oracle():
    rng = np.random.default_rng(12)
    for _ in range(30):
        word = dense.random_clifford_word(3, 15, rng) + [("T", (int(rng.integers(3)),))]
        psi = dense.haar_sample(3, 40, int(rng.integers(1000))).amps
        np.testing.assert_allclose(dense.apply_word_dense(psi, 3, word), run_word(psi, 3, word), atol=1e-12)


def test_haar_moment_formula_t1():
    from stabrank.bounds import haar_moment

    assert haar_moment(3, 1, 1) == Fraction(1, 8)
