"""Geometry of the worst admissible uncertainty.

A sector [alpha, beta] around the nominal feedthrough recenters to a ball
||w|| <= theta*||u||. Against a constraint direction a, the w that hurts
most is the one anti-aligned with a at full radius; its multiplier makes
the stationarity condition a + 2*lambda*w = 0 exact. This script prints
the closed form next to a brute-force scan of the ball.
"""

import numpy as np

from rcbf_shield.sectors import (
    SectorBound,
    normalize_sector,
    optimal_multiplier,
    worst_case_input,
    worst_case_oracle,
)


def main():
    bound = SectorBound(alpha=0.5, beta=1.5)
    unc = normalize_sector(bound)
    print(f"sector [{bound.alpha}, {bound.beta}] -> theta = {unc.theta}, "
          f"input gain = {unc.scale}")

    u = np.array([3.0, 4.0])
    a = np.array([1.0, 0.0])
    print(f"\ninput u = {u}, constraint direction a = {a}")
    print(f"ball radius theta*||u|| = {unc.theta * np.linalg.norm(u)}")

    w_star = worst_case_input(u, a, unc.theta)
    lam = optimal_multiplier(u, a, unc.theta)
    print(f"\nclosed-form worst case w* = {w_star}")
    print(f"multiplier lambda* = {lam}")
    print(f"stationarity |a + 2 lambda w*| = "
          f"{np.linalg.norm(a + 2.0 * lam * w_star):.3e}")

    w_sampled = worst_case_oracle(u, a, unc.theta, samples=50_000)
    obj_star = float(a @ (u + w_star))
    obj_samp = float(a @ (u + w_sampled))
    print(f"\nobjective a@(u+w):")
    print(f"  closed form   {obj_star:.6f}")
    print(f"  50k samples   {obj_samp:.6f}  (gap {obj_samp - obj_star:.2e})")

    # the worst case scales linearly with ||u||: doubling u doubles w*
    for k in (1.0, 2.0, 4.0):
        w = worst_case_input(k * u, a, unc.theta)
        print(f"  ||u|| scaled by {k:g}: ||w*|| = {np.linalg.norm(w):.3f}")


if __name__ == "__main__":
    main()
