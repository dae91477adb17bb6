from __future__ import annotations

import math

import cvxpy as cp
import numpy as np
import pytest

from oracles import gowers_u3_eighth_direct, t_power
from stabrank import dense, measures, rank, stab
from stabrank.dense import DenseState
from stabrank.errors import ResourceLimitError

COS8 = math.cos(math.pi / 8)


def extent_oracle(psi: np.ndarray, mat: np.ndarray) -> float:
    c = cp.Variable(mat.shape[0], complex=True)
    prob = cp.Problem(cp.Minimize(cp.norm1(c)), [mat.T @ c == psi])
    prob.solve()
    return float(prob.value) ** 2


# -- fidelity -------------------------------------------------------------------------


def test_fidelity_of_stabilizer():
    assert measures.stab_fidelity(dense.basis(2, 3)) == pytest.approx(1)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_fidelity_of_t_powers(m):
    assert measures.stab_fidelity(dense.t_state(m)) == pytest.approx(COS8 ** (2 * m), abs=1e-9)


def test_fidelity_matches_dense_maximum():
    mat = stab.enumerate_dictionary(3).matrix
    for i in range(10):
        psi = dense.haar_sample(3, 60, i)
        assert measures.stab_fidelity(psi) == pytest.approx(float(np.max(np.abs(mat.conj() @ psi.amps) ** 2)))


# -- extent ---------------------------------------------------------------------------


def test_extent_of_stabilizer_is_one():
    res = measures.stab_extent(dense.basis(2, 1))
    assert res.value == pytest.approx(1, abs=1e-6)


@pytest.mark.parametrize("m", [1, 2])
def test_extent_matches_convex_solver(m):
    psi = dense.t_state(m)
    res = measures.stab_extent(psi)
    assert res.gap <= 1e-7
    assert res.lower <= res.value
    assert res.value == pytest.approx(extent_oracle(psi.amps, stab.enumerate_dictionary(m).matrix), abs=1e-5)
    # dual lower bound from the fidelity
    assert res.value >= 1 / COS8 ** (2 * m) - 1e-6


def test_extent_random_states_match_convex_solver():
    mat = stab.enumerate_dictionary(2).matrix
    for i in range(3):
        psi = dense.haar_sample(2, 61, i)
        res = measures.stab_extent(psi)
        assert res.value == pytest.approx(extent_oracle(psi.amps, mat), rel=1e-5)
        # the returned coefficients are a feasible decomposition
        np.testing.assert_allclose(res.coefficients @ mat, psi.amps, atol=1e-9)
        assert float(np.abs(res.coefficients).sum()) ** 2 == pytest.approx(res.value, rel=1e-12)


def test_extent_submultiplicative():
    one = measures.stab_extent(dense.t_state(1)).value
    two = measures.stab_extent(dense.t_state(2)).value
    assert two <= one ** 2 + 1e-6


def test_extent_fidelity_duality():
    states = [dense.t_state(m) for m in (1, 2)] + [dense.haar_sample(2, 62, i) for i in range(4)]
    for psi in states:
        xi = measures.stab_extent(psi).value
        assert xi >= 1 - 1e-9
        assert xi * measures.stab_fidelity(psi) >= 1 - 1e-6


# -- Gowers ---------------------------------------------------------------------------


def test_gowers_constant_function():
    assert measures.gowers_u3(dense.plus_state(3)) == pytest.approx(1, abs=1e-12)


def test_gowers_quadratic_phase():
    f = np.array([1, 1, 1, -1]) / 2  # (-1)^{x1 x2}
    assert gowers_u3_eighth_direct(f) == pytest.approx(1, abs=1e-12)
    assert measures.gowers_u3(DenseState(2, f)) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_gowers_matches_literal_sum(n):
    for i in range(3):
        psi = dense.haar_sample(n, 63, i)
        assert measures.gowers_u3_eighth(psi) == pytest.approx(gowers_u3_eighth_direct(psi.amps), abs=1e-12)
        assert measures.gowers_u3_direct(psi) == pytest.approx(measures.gowers_u3(psi), abs=1e-12)


def test_gowers_t_phase_decreasing():
    vals = [measures.gowers_u3_direct(DenseState(n, t_power(n))) for n in (1, 2, 3)]
    assert gowers_u3_eighth_direct(t_power(2)) == pytest.approx(vals[1] ** 8, abs=1e-12)
    assert all(v < 1 for v in vals)
    assert vals[0] > vals[1] > vals[2]


def test_gowers_random_quadratic_phases():
    from stabrank.experiments import random_quadratic_phase

    rng = np.random.default_rng(64)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        assert measures.gowers_u3(random_quadratic_phase(n, rng)) == pytest.approx(1, abs=1e-9)


def test_gowers_multiplicative():
    for i in range(5):
        a, b = dense.haar_sample(1, 65, i), dense.haar_sample(2, 66, i)
        lhs = measures.gowers_u3_eighth(a.tensor(b))
        assert lhs == pytest.approx(measures.gowers_u3_eighth(a) * measures.gowers_u3_eighth(b), abs=1e-9)


def test_gowers_limit():
    with pytest.raises(ResourceLimitError):
        measures.gowers_u3(dense.plus_state(3), limit=2)


# -- f-chi bound ------------------------------------------------------------------------


def test_fchi_plus_state():
    assert measures.f_chi_bound(dense.plus_state(2)) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_fchi_t_powers(m):
    val = measures.f_chi_bound(dense.t_state(m))
    assert val == pytest.approx((2 * m / 3) * math.log2(1 / COS8), abs=1e-9)
    assert 0.076 * m < val < 0.077 * m


def test_fchi_inapplicable_without_full_support():
    assert measures.f_chi_bound(dense.basis(2, 0)) is None


def test_fchi_sound_on_random_states():
    for i in range(10):
        psi = dense.haar_sample(2, 67, i)
        bound = measures.f_chi_bound(psi)
        assert bound <= rank.exact_rank(psi, "stab").rank


def test_fchi_witness_subspace():
    for psi in [dense.t_state(2), dense.t_state(3), dense.haar_sample(2, 68)]:
        cert = rank.exact_rank(psi, "stab")
        w = measures.fchi_witness(psi, cert)
        assert w["u_dim"] >= w["dim_bound"]
        assert w["restriction_error"] < 1e-12


def test_measure_report_fields():
    rep = measures.measure_report(dense.t_state(1))
    assert 0 < rep.fidelity <= 1 and rep.extent >= 1 and rep.gowers_u3 >= 0
    assert rep.to_json()["schema"] == "stabrank.measure/1"


# -- gap construction -------------------------------------------------------------------


def test_gap_state_distance():
    for seed in range(5):
        phi = measures.gap_state(2, 0.1, seed)
        assert phi.is_normalized()
        resid = phi.amps.copy()
        resid[0] = 0
        assert np.linalg.norm(resid) == pytest.approx(0.1)


def test_gap_demo_ranks():
    g = measures.gap_demo(2, 0.1, 0)
    assert g.exact.rank >= 2
    assert g.approx.rank == 1 and g.approx.subset == (stab.enumerate_dictionary(2).index(stab.zero_state(2)),)


def test_gap_demo_delta_zero():
    g = measures.gap_demo(2, 0.0, 0)
    assert g.exact.rank == g.approx.rank == 1


# -- mod 8 ------------------------------------------------------------------------------


def test_mod8_point_example():
    n = 8
    x = (1 << n) - 1
    assert measures.weights(n)[x] == 8
    assert measures.mod8_indicator(n, 0)[x] == 1
    assert measures.t_phase(n)[x] == pytest.approx(1)


def test_mod8_identity_n10():
    rep = measures.mod8_machinery(10)
    assert rep["identity_exact"] and rep["identity_max_error"] < 1e-12
    assert rep["points"] == 1024


def test_mod8_padding_n4():
    pad = measures.mod8_machinery(4)["padding"]
    assert all(p["corrected"] for p in pad)
    # j padding ones shift the weight by +j, which selects |x| = -j mod 8
    assert [p["j"] for p in pad if p["literal"]] == [0, 4]
    ind = measures.padded_indicator(4, 5)
    assert np.array_equal(ind, measures.mod8_indicator(4, 3))


def test_mod8_quadratic_phase_ranks():
    rep = measures.mod8_machinery(2, rank_n=2, deltas=(0.0, 0.5))
    ranks = [r["rank"] for r in rep["ranks"]["results"]]
    assert ranks == sorted(ranks, reverse=True)
    psi = dense.t_state(2)
    qd = stab.enumerate_dictionary(2, "quadphase")
    assert ranks[0] == rank.exact_rank(psi, qd).rank
