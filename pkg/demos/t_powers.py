"""Magic-state powers |T>^m: fidelity, extent, Gowers norm and stabilizer rank.

Run: python demos/t_powers.py
"""

from __future__ import annotations

import math

from stabrank import dense, measures, rank, stab


def main() -> None:
    cos8 = math.cos(math.pi / 8)
    print(" m   fidelity   cos^2m(pi/8)   extent   U3      f-chi   rank")
    for m in (1, 2, 3):
        psi = dense.t_state(m)
        d = stab.enumerate_dictionary(m)
        rep = measures.measure_report(psi, d)
        chi = rank.exact_rank(psi, d).rank
        print(f" {m}   {rep.fidelity:.6f}   {cos8 ** (2 * m):.6f}       {rep.extent:.4f}   "
              f"{rep.gowers_u3:.4f}  {rep.fchi_bound:.4f}  {chi}")

    # chi_delta(|T>) drops from 2 to 1 once delta passes sin(pi/8)
    psi, d1 = dense.t_state(1), stab.enumerate_dictionary(1)
    s8 = math.sin(math.pi / 8)
    for delta in (s8 - 1e-6, s8 + 1e-6):
        cert = rank.approx_rank(psi, delta, d1)
        print(f"chi_{delta:.7f}(T) = {cert.rank}  (residual {cert.residual:.7f})")


if __name__ == "__main__":
    main()
