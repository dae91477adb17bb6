from __future__ import annotations

import json
import math

import numpy as np
import pytest

from oracles import brute_rank, projection_norm2, run_word, t_power
from stabrank import dense, rank, stab
from stabrank.dense import DenseState
from stabrank.errors import BudgetExceeded

SIN8 = math.sin(math.pi / 8)


def d(n: int) -> stab.Dictionary:
    return stab.enumerate_dictionary(n)


def check_certificate(cert: rank.RankCertificate, psi: np.ndarray, dictionary) -> None:
    assert cert.rank == len(cert.subset) == len(cert.coefficients)
    assert abs(cert.recompute_residual(psi, dictionary) - cert.residual) < 1e-9
    # Pythagoras: residual^2 = 1 - ||P_S psi||^2
    p2 = projection_norm2(psi, dictionary.matrix[list(cert.subset)])
    assert cert.residual ** 2 == pytest.approx(1 - p2, abs=1e-9)


def test_stabilizer_has_rank_one():
    cert = rank.exact_rank(dense.basis(2, 0), d(2))
    assert cert.rank == 1 and cert.residual < 1e-12


@pytest.mark.parametrize("m,expected", [(1, 2), (2, 2)])
def test_t_power_ranks_match_brute_force(m, expected):
    psi = t_power(m)
    assert brute_rank(psi, d(m).matrix) == expected
    cert = rank.exact_rank(dense.t_state(m), d(m))
    assert cert.rank == expected and cert.residual <= 1e-9
    check_certificate(cert, psi, d(m))


def test_approx_threshold_at_sin_pi_8():
    psi = dense.t_state(1)
    assert rank.approx_rank(psi, SIN8 - 1e-6, d(1)).rank == 2
    assert rank.approx_rank(psi, SIN8 + 1e-6, d(1)).rank == 1


def test_delta_range_checked():
    with pytest.raises(ValueError):
        rank.approx_rank(dense.t_state(1), 1.0, d(1))
    with pytest.raises(ValueError):
        rank.approx_rank(dense.t_state(1), -0.1, d(1))
    with pytest.raises(ValueError):
        rank.approx_rank(dense.t_state(1), 0.1, d(1), mode="magic")


def test_dictionary_dimension_mismatch():
    with pytest.raises(ValueError):
        rank.exact_rank(dense.t_state(2), d(1))


@pytest.mark.parametrize("delta", [0.0, 0.3, 0.6])
def test_random_states_against_brute_force(delta):
    # Haar states at delta = 0 have rank 4 and the oracle walks every 4-subset
    for i in range(2 if delta == 0 else 12):
        psi = dense.haar_sample(2, 50, i)
        expect = brute_rank(psi.amps, d(2).matrix, delta)
        cert = rank.approx_rank(psi, delta, d(2))
        assert cert.rank == expect
        check_certificate(cert, psi.amps, d(2))


def test_constructed_low_rank_against_brute_force():
    mat = d(2).matrix
    rng = np.random.default_rng(56)
    for m in (1, 2, 3):
        for _ in range(4):
            c = rng.normal(size=m) + 1j * rng.normal(size=m)
            psi = c @ mat[rng.choice(len(mat), m, replace=False)]
            psi /= np.linalg.norm(psi)
            expect = brute_rank(psi, mat)
            assert expect <= m
            cert = rank.exact_rank(psi, d(2))
            assert cert.rank == expect
            check_certificate(cert, psi, d(2))


def test_chi_zero_equals_exact_on_random_states():
    for i in range(50):
        psi = dense.haar_sample(2, 51, i)
        assert rank.approx_rank(psi, 0.0, d(2)).rank == rank.exact_rank(psi, d(2)).rank


def test_monotone_in_delta():
    for i in range(10):
        psi = dense.haar_sample(2, 52, i)
        ranks = [rank.approx_rank(psi, dl, d(2)).rank for dl in (0.0, 0.2, 0.4, 0.6, 0.8, 0.95)]
        assert ranks == sorted(ranks, reverse=True)


def test_clifford_invariance():
    rng = np.random.default_rng(53)
    for i in range(10):
        psi = dense.haar_sample(2, 53, i)
        word = dense.random_clifford_word(2, 12, rng)
        phi = DenseState(2, run_word(psi.amps, 2, word))
        for dl in (0.0, 0.5):
            assert rank.approx_rank(psi, dl, d(2)).rank == rank.approx_rank(phi, dl, d(2)).rank


def test_low_rank_superposition():
    mat = d(3).matrix
    rng = np.random.default_rng(54)
    for _ in range(5):
        idx = rng.choice(len(mat), 2, replace=False)
        psi = mat[idx[0]] + 0.7j * mat[idx[1]]
        psi /= np.linalg.norm(psi)
        cert = rank.exact_rank(psi, d(3))
        assert cert.rank <= 2
        check_certificate(cert, psi, d(3))


def test_workers_do_not_change_result():
    psi = dense.t_state(3)
    one = rank.exact_rank(psi, d(3))
    many = rank.exact_rank(psi, d(3), workers=3)
    assert (one.rank, one.subset) == (many.rank, many.subset) == (3, one.subset)


def test_heuristic_is_an_upper_bound():
    for i in range(10):
        psi = dense.haar_sample(2, 55, i)
        for dl in (0.0, 0.4):
            h = rank.approx_rank(psi, dl, d(2), mode=rank.HEURISTIC)
            e = rank.approx_rank(psi, dl, d(2))
            assert h.rank >= e.rank
            assert h.residual <= dl + 1e-9
            assert h.mode == rank.HEURISTIC


def test_budget_exceeded_carries_upper_bound():
    with pytest.raises(BudgetExceeded) as info:
        rank.exact_rank(dense.t_state(3), d(3), budget=50)
    best = info.value.best
    assert best is not None and best.mode == rank.HEURISTIC
    assert best.residual <= 1e-9


def test_perturbation_separates_membership():
    # a stabilizer state nudged by 1e-6 is no longer rank one at delta = 0
    base = d(2).matrix[5]
    nudged = base + 1e-6 * d(2).matrix[17]
    nudged /= np.linalg.norm(nudged)
    assert rank.exact_rank(nudged, d(2)).rank == 2
    assert rank.approx_rank(nudged, 1e-5, d(2)).rank == 1


def test_certificate_json_round_trip():
    cert = rank.exact_rank(dense.t_state(2), d(2))
    obj = json.loads(json.dumps(cert.to_json()))
    assert obj["schema"] == rank.SCHEMA
    back = rank.RankCertificate.from_json(obj)
    assert back == cert


def test_quadratic_phase_dictionary_search():
    q = stab.enumerate_dictionary(2, "quadphase")
    psi = dense.t_state(2)
    assert rank.exact_rank(psi, q).rank == brute_rank(psi.amps, q.matrix)


def test_projection_norm2_helper():
    cert = rank.approx_rank(dense.t_state(1), 0.5, d(1))
    assert rank.projection_norm2(dense.t_state(1), d(1), cert.subset) == pytest.approx(math.cos(math.pi / 8) ** 2)
