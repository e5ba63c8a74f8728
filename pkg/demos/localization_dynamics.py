#!/usr/bin/env python3
"""Spreading of the excitation: the defect stays near its starting site.

Evaluates the thermodynamic-limit shell probabilities P(r, t) and shows
that the return probability oscillates on the 1/J scale while the weight
beyond shell R never exceeds 2^(1-R), at any time.  Writes the time series
to localization_dynamics.csv (same schema as `hdyson evolve`).

Run with: python demos/localization_dynamics.py
"""

import numpy as np

from hdyson import probability_thermo, psi_thermo, tail_bound


def main():
    sigma, J = 1.0, 1.0
    r_max = 10
    times = np.linspace(0.0, 60.0, 1201)

    print("=" * 64)
    print(f"Thermodynamic limit, sigma = {sigma}: shell probabilities P(r, t)")
    print("=" * 64)

    shells = {r: probability_thermo(r, times, sigma, J) for r in range(r_max + 1)}

    print("\n   Jt    P(0)     P(1)     P(2)     P(3)     P(4)    sum(r<=10)")
    for i in range(0, len(times), 120):
        total = sum(shells[r][i] for r in range(r_max + 1))
        print(f"{times[i]:6.1f}  " +
              "  ".join(f"{shells[r][i]:.5f}" for r in range(5)) +
              f"   {total:.6f}")

    print("\nPeak occupation of each shell over the whole window:")
    for r in range(r_max + 1):
        print(f"  r = {r:2d}: max_t P = {np.max(shells[r]):.6f}"
              f"   (bound for the tail beyond r: {tail_bound(r):.5f})")

    # empirical first return: the return probability revisits its running
    # maximum on a time scale ~ 1/J, independent of system size
    p0 = shells[0]
    dips = np.where((p0[1:-1] < p0[:-2]) & (p0[1:-1] < p0[2:]))[0]
    revivals = np.where((p0[1:-1] > p0[:-2]) & (p0[1:-1] > p0[2:]))[0]
    if revivals.size:
        t_rev = times[revivals[0] + 1]
        print(f"\nfirst minimum of P(0,t) near Jt = {times[dips[0] + 1]:.2f}, "
              f"first revival near Jt = {t_rev:.2f} (scale ~ 1/J)")

    with open("localization_dynamics.csv", "w") as fh:
        fh.write("t,r,psi_re,psi_im,P\n")
        for i, t in enumerate(times):
            for r in range(r_max + 1):
                amp = psi_thermo(r, t, sigma, J)
                fh.write(f"{t:.17g},{r},{amp.real:.17g},{amp.imag:.17g},"
                         f"{shells[r][i]:.17g}\n")
    print("wrote localization_dynamics.csv")


if __name__ == "__main__":
    main()
