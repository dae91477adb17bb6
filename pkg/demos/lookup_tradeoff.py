"""SELECT-SWAP table lookup: functional check, then the T-count trade-off in lambda.

Run: python demos/lookup_tradeoff.py
"""

from __future__ import annotations

import numpy as np

from stabrank import lookup


def main() -> None:
    rng = np.random.default_rng(0)
    spec = lookup.LookupSpec(3, 2, tuple(int(v) for v in rng.integers(0, 4, 8)), 2)
    rep = lookup.verify_lookup(spec)
    print(f"table {spec.data}, lambda={spec.lam}: correct={rep.correct} uncomputed={rep.uncomputed}")

    print("\n n=12, b=1: lambda vs T count")
    for row in lookup.lambda_sweep(12, 1):
        print(f"  lambda={row['lam']:3d}  T={row['t_count']}")
    print("\n  n   best lambda   T / (2^(n/2) n)")
    for n in range(8, 21, 2):
        best = lookup.best_lambda(n, 1)
        print(f" {n:3d}   {best['lam']:6d}        {best['ratio_over_n']:.3f}")


if __name__ == "__main__":
    main()
