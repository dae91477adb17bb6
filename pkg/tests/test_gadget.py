from __future__ import annotations

import itertools

import numpy as np
import pytest

from oracles import gadget_branch, run_word
from stabrank import dense, gadget
from stabrank.gadget import CliffordTCircuit

T_PLUS = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)


def fid(a: np.ndarray, b: np.ndarray) -> float:
    return abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)


# -- circuits and files ------------------------------------------------------------


def test_parse_and_round_trip():
    text = "# demo\nqubits 2\nH 0\nCX 0 1  # alias\nT 1\n"
    c = gadget.parse_circuit(text)
    assert c.n == 2 and c.t_count == 1
    assert c.gates[1] == ("CNOT", (0, 1))
    assert gadget.parse_circuit(c.to_text()) == c


@pytest.mark.parametrize("text", ["H 0\n", "qubits 1\nH 1\n", "qubits 2\nCNOT 0\n", "qubits 1\nRX 0\n",
                                  "qubits 2\nCZ 1 1\n"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        gadget.parse_circuit(text)


def test_run_dense_matches_kronecker_oracle():
    rng = np.random.default_rng(70)
    for _ in range(20):
        c = gadget.random_circuit(3, 3, rng)
        start = np.zeros(8, complex)
        start[0] = 1
        np.testing.assert_allclose(c.run_dense().amps, run_word(start, 3, c.gates), atol=1e-12)


# -- rewriting ------------------------------------------------------------------------


def test_no_t_gates():
    c = CliffordTCircuit(2, (("H", (0,)), ("CNOT", (0, 1))))
    g = gadget.rewrite_gadgets(c)
    assert g.k == 0 and g.n_total == 2 and g.blocks == (c.gates,)


def test_single_t_structure():
    g = gadget.rewrite_gadgets(CliffordTCircuit(1, (("T", (0,)),)))
    assert g.n_total == 2 and g.k == 1
    assert g.blocks[0] == (("CNOT", (0, 1)),)
    assert g.block(1, 1) == (("S", (0,)),)


def test_ancillae_in_reverse_order():
    c = CliffordTCircuit(2, (("T", (0,)), ("H", (1,)), ("T", (1,)), ("T", (0,))))
    g = gadget.rewrite_gadgets(c)
    assert g.k == 3 and len(g.blocks) == 4
    targets = [gates[-1][1] for gates in g.blocks[:3]]
    assert targets == [(0, 4), (1, 3), (0, 2)]
    assert [g.ancilla(i) for i in (1, 2, 3)] == [4, 3, 2]
    assert g.data_qubits == (0, 1, 0)


# -- branch simulation -------------------------------------------------------------------


@pytest.mark.parametrize("x", [0, 1])
def test_single_t_on_plus(x):
    c = CliffordTCircuit(1, (("H", (0,)), ("T", (0,))))
    p, out = gadget.simulate_branch(gadget.rewrite_gadgets(c), (x,))
    assert p == pytest.approx(0.5, abs=1e-12)
    assert fid(out.amps, T_PLUS) == pytest.approx(1, abs=1e-12)


def test_zero_t_branch():
    c = CliffordTCircuit(2, (("H", (0,)), ("CNOT", (0, 1))))
    p, out = gadget.simulate_branch(gadget.rewrite_gadgets(c), ())
    assert p == pytest.approx(1)
    np.testing.assert_allclose(out.amps, c.run_dense().amps, atol=1e-12)
    st = gadget.outcome_stats(gadget.rewrite_gadgets(c))
    assert st.probabilities == {(): pytest.approx(1)}


def test_branch_length_checked():
    g = gadget.rewrite_gadgets(CliffordTCircuit(1, (("T", (0,)),)))
    with pytest.raises(ValueError):
        gadget.simulate_branch(g, (0, 1))


def test_branches_match_full_register_oracle():
    rng = np.random.default_rng(71)
    for _ in range(30):
        n, k = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        c = gadget.random_circuit(n, k, rng)
        g = gadget.rewrite_gadgets(c)
        for x in itertools.product((0, 1), repeat=k):
            ref = gadget_branch(n, c.gates, x)
            p, out = gadget.simulate_branch(g, x)
            assert p == pytest.approx(np.vdot(ref, ref).real, abs=1e-12)
            np.testing.assert_allclose(out.amps * np.sqrt(p), ref, atol=1e-12)


# -- lemmas ----------------------------------------------------------------------------


def test_single_t_uniform_for_any_input():
    c = CliffordTCircuit(1, (("T", (0,)),))
    g = gadget.rewrite_gadgets(c)
    for i in range(20):
        st = gadget.outcome_stats(g, dense.haar_sample(1, 72, i))
        assert st.max_deviation < 1e-12


def test_uniform_outcomes_random_circuits():
    rng = np.random.default_rng(73)
    for _ in range(100):
        n, k = int(rng.integers(1, 4)), int(rng.integers(0, 4))
        g = gadget.rewrite_gadgets(gadget.random_circuit(n, k, rng))
        st = gadget.outcome_stats(g)
        assert st.total == pytest.approx(1, abs=1e-10)
        assert st.max_deviation < 1e-10 and st.max_conditional_deviation < 1e-10
        assert len(st.probabilities) == 2 ** k


def test_equivalence_random_n2_k2():
    rng = np.random.default_rng(74)
    worst = 0.0
    for _ in range(100):
        rep = gadget.verify_equivalence(gadget.random_circuit(2, 2, rng))
        worst = max(worst, rep.max_infidelity)
        assert rep.ok and rep.branches == 4
    assert worst < 1e-9


def test_equivalence_clifford_only_and_t_on_zero():
    c = CliffordTCircuit(2, (("H", (0,)), ("CZ", (0, 1)), ("S", (1,))))
    assert gadget.verify_equivalence(c).max_infidelity < 1e-15
    t0 = CliffordTCircuit(1, (("T", (0,)),))
    rep = gadget.verify_equivalence(t0)
    assert rep.ok and rep.max_infidelity < 1e-15


def test_correction_convention():
    assert gadget.select_correction() == "S"
    c = CliffordTCircuit(1, (("H", (0,)), ("T", (0,))))
    wrong = gadget.verify_equivalence(c, correction="SDG")
    assert not wrong.ok and wrong.worst_outcome == (1,)


def test_monotonicity_small():
    rep = gadget.rank_monotonicity_experiment(1, 0, 0.0, 5, 75)
    assert rep.rhs == 1 and rep.lhs == [1] * 5
    rep = gadget.rank_monotonicity_experiment(1, 1, 0.0, 50, 76)
    assert rep.rhs == 2 and rep.ok and len(rep.lhs) == 50
    rep = gadget.rank_monotonicity_experiment(1, 2, 0.2, 20, 77)
    assert rep.ok and len(rep.lhs) == 20 and max(rep.lhs) <= rep.rhs


def test_gadget_lemma_check_balanced_only():
    amps = np.kron(np.array([1, 0]), np.array([1, 1]) / np.sqrt(2)).astype(complex)
    res = gadget.gadget_lemma_check(amps, 2, 0.0, 10_000)
    assert res == {"state": 1, "post": [1, 1], "ok": True}
    assert gadget.gadget_lemma_check(np.array([1, 0, 0, 0], complex), 2, 0.0, 10_000) is None


def test_monotonicity_size_limit():
    with pytest.raises(gadget.ResourceLimitError):
        gadget.rank_monotonicity_experiment(2, 2, 0.0, 1, 0)
