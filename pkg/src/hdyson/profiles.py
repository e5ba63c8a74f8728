"""Wavefunction and probability containers shared across modules.

Two indexing modes exist.  "site" mode stores one complex amplitude per
lattice site x = 1..L (array index x-1).  "shell" mode exploits the fact
that the amplitude of the spreading excitation depends on the site only
through its hierarchical distance r from site 1, and stores one amplitude
per shell r = 0..r_max.  Times are measured in units of 1/J.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .geometry import TreeGeometry

__all__ = [
    "SITE_MODE",
    "SHELL_MODE",
    "TruncationPolicy",
    "WaveProfile",
    "ProbabilityProfile",
    "expand_shells_to_sites",
    "collapse_sites_to_shells",
    "shell_weights",
]

SITE_MODE = "site"
SHELL_MODE = "shell"


@dataclass(frozen=True)
class TruncationPolicy:
    """Cutoff K of the thermodynamic-limit mode series.

    The discarded tail is a geometric remainder, so its modulus is bounded
    by 2^-K; the default K = 64 pushes it below double precision.
    """

    K: int = 64

    def __post_init__(self):
        if self.K < 1:
            raise InputError(f"series cutoff K must be >= 1, got {self.K}")

    @property
    def tail_bound(self) -> float:
        return 2.0 ** (-self.K)


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class WaveProfile:
    """Complex amplitudes of a single-particle state at a fixed time."""

    amplitudes: np.ndarray
    time: float
    mode: str = SITE_MODE

    def __post_init__(self):
        if self.mode not in (SITE_MODE, SHELL_MODE):
            raise InputError(f"unknown profile mode {self.mode!r}")
        amp = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amp)
        if self.mode == SITE_MODE and (amp.size < 2 or amp.size & (amp.size - 1)):
            raise InputError("site-mode profile length must be a power of two >= 2")

    @property
    def length(self) -> int:
        return int(self.amplitudes.size)

    def norm_squared(self) -> float:
        """Total probability; meaningful in site mode only."""
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class ProbabilityProfile:
    """Shell-resolved occupation probabilities P(r) at a fixed time."""

    values: np.ndarray
    time: float
    mode: str = SHELL_MODE

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def total(self) -> float:
        return float(np.sum(self.values))


def shell_weights(r_max: int) -> np.ndarray:
    """Multiplicity of each shell r = 0..r_max: [1, 1, 2, 4, ...]."""
    w = np.ones(r_max + 1)
    if r_max >= 1:
        w[1:] = 2.0 ** (np.arange(1, r_max + 1) - 1)
    return w


def expand_shells_to_sites(shell_values: np.ndarray, geom: TreeGeometry) -> np.ndarray:
    """Broadcast per-shell values onto the L sites of the chain.

    Shell r >= 1 occupies sites 2^(r-1)+1 .. 2^r, i.e. array indices
    2^(r-1) .. 2^r - 1.
    """
    shell_values = np.asarray(shell_values)
    if shell_values.size != geom.levels + 1:
        raise InputError(
            f"need {geom.levels + 1} shell values for N={geom.levels}, "
            f"got {shell_values.size}"
        )
    out = np.empty(geom.length, dtype=shell_values.dtype)
    out[0] = shell_values[0]
    for r in range(1, geom.levels + 1):
        out[1 << (r - 1) : 1 << r] = shell_values[r]
    return out


def collapse_sites_to_shells(site_values: np.ndarray, geom: TreeGeometry) -> np.ndarray:
    """Read one representative value per shell from a site-indexed array.

    Valid when the array is constant on shells (the permutation symmetry of
    the couplings guarantees this for states launched from site 1).
    """
    site_values = np.asarray(site_values)
    if site_values.size != geom.length:
        raise InputError("site array length does not match geometry")
    out = np.empty(geom.levels + 1, dtype=site_values.dtype)
    out[0] = site_values[0]
    for r in range(1, geom.levels + 1):
        out[r] = site_values[1 << (r - 1)]
    return out
