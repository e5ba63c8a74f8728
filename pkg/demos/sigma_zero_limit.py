#!/usr/bin/env python3
"""The sigma -> 0 limit: perfectly periodic breathing of the defect.

When every level couples equally strongly (after the divergent constant is
removed as a global phase), the dynamics closes on itself with period
2 pi / J; the closed forms match the small-sigma mode series.

Run with: python demos/sigma_zero_limit.py
"""

import numpy as np

from hdyson import TruncationPolicy, probability_thermo, sigma_zero_probability


def main():
    J = 1.0
    t = np.linspace(0.0, 4 * np.pi, 9)

    print("=" * 60)
    print("sigma = 0 closed form: P(0,t) = 1 / (5 - 4 cos Jt)")
    print("=" * 60)
    print("   Jt/pi    P(0)      P(1)      P(2)     sum over shells")
    for ti in t:
        p0 = sigma_zero_probability(0, ti, J)
        p1 = sigma_zero_probability(1, ti, J)
        p2 = sigma_zero_probability(2, ti, J)
        total = p0 + sum(sigma_zero_probability(r, ti, J) for r in range(1, 60))
        print(f"  {ti / np.pi:6.2f}  {p0:.6f}  {p1:.6f}  {p2:.6f}   {total:.12f}")

    print(f"\nminimum return probability 1/9 = {1/9:.6f} at Jt = pi "
          f"(computed {sigma_zero_probability(0, np.pi, J):.6f})")

    grid = np.linspace(0.0, 2 * np.pi, 500)
    drift = np.max(np.abs(
        sigma_zero_probability(0, grid + 2 * np.pi, J)
        - sigma_zero_probability(0, grid, J)
    ))
    print(f"period-2pi recurrence error: {drift:.2e}")

    policy = TruncationPolicy(512)
    worst = 0.0
    for r in range(6):
        series = probability_thermo(r, grid, 1e-5, J, policy)
        worst = max(worst, float(np.max(np.abs(series - sigma_zero_probability(r, grid, J)))))
    print(f"sigma = 1e-5 mode series vs closed form, max gap over r <= 5: {worst:.2e}")
    print("\nThe recurrence is exactly shared by every shell: the breathing is global.")


if __name__ == "__main__":
    main()
