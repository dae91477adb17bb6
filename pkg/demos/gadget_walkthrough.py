"""Replace each T gate by a CNOT onto a |T> ancilla plus a measured S correction.

Run: python demos/gadget_walkthrough.py [circuit.qc]
"""

from __future__ import annotations

import sys
from pathlib import Path

from stabrank import gadget


def main(path: str) -> None:
    circ = gadget.read_circuit(path)
    g = gadget.rewrite_gadgets(circ)
    print(f"{path}: {circ.n} data qubits, {g.k} T gates -> {g.k} ancillae")
    stats = gadget.outcome_stats(g)
    print(f"outcome probabilities max deviation from 2^-k: {stats.max_deviation:.2e}")
    eq = gadget.verify_equivalence(circ)
    print(f"corrected branches vs direct simulation: max infidelity {eq.max_infidelity:.2e}, ok={eq.ok}")
    print(f"correction that works: {gadget.select_correction()}")


if __name__ == "__main__":
    default = Path(__file__).parent / "circuits" / "t1.qc"
    main(sys.argv[1] if len(sys.argv) > 1 else str(default))
