"""Closed-form bounds: Haar tail threshold, the lower bound for |T>^m, t-design tail.

Run: python demos/bounds_pipeline.py
"""

from __future__ import annotations

from stabrank import bounds


def main() -> None:
    for delta in (0.0, 0.5, 0.9):
        th = bounds.haar_exists_threshold(delta)
        print(f"delta={delta}: n0={th['n0']}  tail(n0, M(n0))={th['tail_n0']:.3f}  "
              f"ceil(M) tail < 1 from n={th['first_n_ceiling_below_one']}")

    for m in (1000, 10 ** 4, 10 ** 6):
        rep = bounds.main_lower_bound(m, 0.5)
        print(f"m={m}: n={rep.flags['n']}  chi_0.5(T^m) >= {rep.value:.4g}")
    print("brackets over m in [10, 1e6]:", bounds.bracket_sweep(range(10, 10 ** 6 + 1)))

    print("poly-rank threshold (d=1, delta=0.5):", bounds.poly_rank_threshold()["n0"])
    rows = bounds.haar_moment_mc(3, 5, [1, 2, 3], 100_000, 0)
    for r in rows:
        print(f"E||P psi||^{2 * r['t']}: MC {r['mean']:.5f}  exact {float(r['exact']):.5f}  z={r['z']:+.2f}")


if __name__ == "__main__":
    main()
