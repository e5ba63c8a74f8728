#!/usr/bin/env python3
"""Entanglement of the bipartition [1..x] vs [x+1..L].

A single-defect state carries binary entanglement: S(x) is the binary
entropy of the probability of finding the defect left of the cut.  Because
the defect is localized, S(x) dies off with the cut position.  The exact
many-body run at small L reproduces the same profile through a Schmidt
decomposition.

Run with: python demos/entanglement_profile.py
"""

import numpy as np

from hdyson import (
    ModelParams,
    SpinState,
    TreeGeometry,
    build_spin_hamiltonian,
    evolve_spin,
    single_particle_entropy,
    wave_profile_thermo,
)


def main():
    sigma, J = 2.0, 1.0
    print("=" * 64)
    print(f"Single-particle entanglement in the thermodynamic limit, sigma = {sigma}")
    print("=" * 64)
    print("\n    Jt |  S at cuts x = 2, 4, 8, 16, 64, 256, 1024")
    for t in (0.0, 1.0, 5.0, 20.0):
        profile = wave_profile_thermo(t, sigma, J, r_max=24)
        row = "  ".join(
            f"{single_particle_entropy(x, t, profile):.5f}"
            for x in (2, 4, 8, 16, 64, 256, 1024)
        )
        print(f"  {t:4.0f} |  {row}")
    print("\nS(x) decays with the cut position (asymptotically like log(x)/x):")
    profile = wave_profile_thermo(5.0, sigma, J, r_max=24)
    for r in range(1, 11):
        x = 1 << r
        print(f"  x = {x:5d}: S = {single_particle_entropy(x, 5.0, profile):.3e}")

    L = 8
    print("\n" + "=" * 64)
    print(f"Exact many-body Schmidt entropy at L = {L}, h = 40J, sigma = {sigma}")
    print("=" * 64)
    params = ModelParams(TreeGeometry.from_length(L), J=J, sigma=sigma, h=40.0)
    times = np.linspace(0.0, 5.0, 6)
    series = evolve_spin(
        build_spin_hamiltonian(params), SpinState.single_flip(L), times,
        compute_entropy=True,
    )
    print("    Jt |  S at cuts x = 1..7")
    for i, t in enumerate(times):
        row = "  ".join(f"{s:.5f}" for s in series.entropy[i])
        print(f"  {t:4.1f} |  {row}")
    print("\nLarge fields keep the entanglement pinned to the first few cuts;")
    print("lowering h lets pair production light up the whole chain.")


if __name__ == "__main__":
    main()
