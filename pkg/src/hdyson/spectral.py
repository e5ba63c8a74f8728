"""Exact eigensystem of the hierarchical hopping matrix.

The single-excitation hopping matrix couples sites i != j with amplitude
-J_{r(i,j)-1}, where J_p = J / 2^((1+sigma) p) is the level-p interaction.
Its eigenvectors are fixed by the tree symmetry alone: a uniform mode plus,
for each k = 1..N, a multiplet of 2^(k-1) "half-block difference" wavelets
supported on disjoint blocks of size 2^(N-k+1).  Only N+1 distinct
eigenvalues occur:

    eps_k = -J/(1 - 2^-sigma) (1 - 2^(k sigma)/L^sigma)
            + J 2^(k sigma)/L^sigma  (k >= 1),

with eps_0 the fully symmetric level.  Reindexed from the top of the band
(k -> N - k) the spectrum is a pure geometric ladder

    eps_{N-k} = Jt_sigma 2^(-sigma k) + const,
    Jt_sigma  = J (2^(sigma+1) - 1) / (2^sigma - 1),

which is what makes the thermodynamic-limit dynamics a fast-converging
series (see `analytic`).  The delta state at site 1 overlaps exactly one
member of each multiplet, so its expansion has only N+1 terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ResourceLimitError, SingularLimitError
from .geometry import TreeGeometry
from .profiles import SITE_MODE, WaveProfile

__all__ = [
    "ModelParams",
    "SpectrumData",
    "EigvecDescriptor",
    "multiplet_degeneracy",
    "degeneracy_list",
    "eigenvalues",
    "eigenvector",
    "eigvec_descriptor",
    "build_hopping_matrix",
    "delta_decomposition",
    "renormalized_coupling",
    "shifted_spectrum",
    "DENSE_CAP",
]

# Largest L for which an O(L^2) dense matrix is built by default.
DENSE_CAP = 1 << 12


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of a run: couplings, field, and system size.

    `level_couplings`, when given, overrides the geometric law
    J_p = J / 2^((1+sigma) p) with an arbitrary per-level profile
    (tuple of length N).  The closed-form spectrum formulas only apply to
    the geometric law; with a custom profile the eigenvalues are obtained
    from the level-coupling sums instead.
    """

    geom: TreeGeometry
    J: float = 1.0
    sigma: float = 1.0
    h: float = 0.0
    level_couplings: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.J < 0:
            raise InputError(f"coupling J must be >= 0, got {self.J}")
        if self.sigma < 0:
            raise InputError(f"decay exponent sigma must be >= 0, got {self.sigma}")
        if self.h < 0:
            raise InputError(f"transverse field h must be >= 0, got {self.h}")
        if self.level_couplings is not None:
            couplings = tuple(float(c) for c in self.level_couplings)
            if len(couplings) != self.geom.levels:
                raise InputError(
                    f"need {self.geom.levels} level couplings, got {len(couplings)}"
                )
            object.__setattr__(self, "level_couplings", couplings)

    def level_coupling(self, p: int) -> float:
        """Interaction J_p between sibling blocks of the level-p partition."""
        if not 0 <= p < self.geom.levels:
            raise InputError(f"level {p} outside 0..{self.geom.levels - 1}")
        if self.level_couplings is not None:
            return self.level_couplings[p]
        return self.J * 2.0 ** (-(1.0 + self.sigma) * p)

    def level_coupling_array(self) -> np.ndarray:
        return np.array([self.level_coupling(p) for p in range(self.geom.levels)])


@dataclass(frozen=True)
class SpectrumData:
    """Distinct eigenvalues eps[k], k = 0..N ascending, with multiplicities."""

    eps: np.ndarray
    degeneracy: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eps", np.asarray(self.eps, dtype=float))
        object.__setattr__(self, "degeneracy", np.asarray(self.degeneracy, dtype=int))

    @property
    def levels(self) -> int:
        return int(self.eps.size - 1)


@dataclass(frozen=True)
class EigvecDescriptor:
    """Compact form of one tree eigenvector.

    The vector equals +amplitude on `plus_sites` and -amplitude on
    `minus_sites` (both inclusive 1-based ranges); `minus_sites` is None for
    the uniform k = 0 mode.
    """

    k: int
    m: int
    plus_sites: tuple[int, int]
    minus_sites: tuple[int, int] | None
    amplitude: float

    def expand(self, geom: TreeGeometry) -> np.ndarray:
        v = np.zeros(geom.length)
        a, b = self.plus_sites
        v[a - 1 : b] = self.amplitude
        if self.minus_sites is not None:
            a, b = self.minus_sites
            v[a - 1 : b] = -self.amplitude
        return v


def multiplet_degeneracy(k: int) -> int:
    """Dimension of the k-th eigenspace: 1, 1, 2, 4, ..., 2^(k-1)."""
    if k < 0:
        raise InputError(f"multiplet index must be >= 0, got {k}")
    return 1 if k <= 1 else 1 << (k - 1)


def degeneracy_list(levels: int) -> np.ndarray:
    return np.array([multiplet_degeneracy(k) for k in range(levels + 1)], dtype=int)


def renormalized_coupling(sigma: float, J: float) -> float:
    """Prefactor of the geometric band ladder, J (2^(sigma+1)-1)/(2^sigma-1)."""
    if sigma <= 0:
        raise SingularLimitError(
            "the band-ladder prefactor diverges at sigma = 0; "
            "use the sigma-zero closed forms"
        )
    return J * (2.0 ** (sigma + 1.0) - 1.0) / (2.0 ** sigma - 1.0)


def shifted_spectrum(k: int, sigma: float, J: float) -> float:
    """Mode frequency Jt_sigma 2^(-sigma k), measured from the top of the band.

    The additive constant of the exact reindexed spectrum is dropped: it
    only contributes a global phase to the evolved state.
    """
    if k < 0:
        raise InputError(f"mode index must be >= 0, got {k}")
    return renormalized_coupling(sigma, J) * 2.0 ** (-sigma * k)


def _eigenvalues_from_coupling_sums(params: ModelParams) -> np.ndarray:
    """Eigenvalues for an arbitrary level-coupling profile.

    eps_k = -sum_{r=1}^{N-k} 2^(r-1) J_{r-1} + 2^(N-k) J_{N-k} (1 - delta_k0):
    the interaction of site 1 with its own half of the support block, minus
    the sign-flipped half.
    """
    n = params.geom.levels
    couplings = params.level_coupling_array()
    eps = np.empty(n + 1)
    for k in range(n + 1):
        attract = -sum((1 << (r - 1)) * couplings[r - 1] for r in range(1, n - k + 1))
        if k == 0:
            eps[k] = attract
        else:
            eps[k] = attract + (1 << (n - k)) * couplings[n - k]
    return eps


def eigenvalues(params: ModelParams) -> SpectrumData:
    """All distinct eigenvalues of the hopping matrix with multiplicities."""
    n = params.geom.levels
    if params.level_couplings is not None:
        return SpectrumData(_eigenvalues_from_coupling_sums(params), degeneracy_list(n))
    if params.sigma == 0:
        raise SingularLimitError(
            "closed-form spectrum diverges at sigma = 0; "
            "route sigma = 0 runs through the analytic sigma-zero path"
        )
    sigma, J = params.sigma, params.J
    k = np.arange(n + 1)
    band = np.exp2(sigma * (k - n))  # 2^(k sigma) / L^sigma
    eps = -J / (1.0 - 2.0 ** -sigma) * (1.0 - band) + J * band * (k != 0)
    return SpectrumData(eps, degeneracy_list(n))


def eigvec_descriptor(k: int, m: int, geom: TreeGeometry) -> EigvecDescriptor:
    """Descriptor of the m-th member of multiplet k.

    Members are ordered left to right by support block, so m = 1 is always
    the one whose support contains site 1.
    """
    n = geom.levels
    if not 0 <= k <= n:
        raise InputError(f"multiplet index {k} outside 0..{n}")
    if not 1 <= m <= multiplet_degeneracy(k):
        raise InputError(
            f"member index {m} outside 1..{multiplet_degeneracy(k)} for k={k}"
        )
    if k == 0:
        return EigvecDescriptor(0, 1, (1, geom.length), None, geom.length ** -0.5)
    width = 1 << (n - k + 1)  # support block size
    first = (m - 1) * width + 1
    half = width >> 1
    amplitude = math.sqrt(2.0 ** (k - 1.0) / geom.length)
    return EigvecDescriptor(
        k, m, (first, first + half - 1), (first + half, first + width - 1), amplitude
    )


def eigenvector(k: int, m: int, geom: TreeGeometry) -> WaveProfile:
    """Unit-norm eigenvector (k, m) expanded over the L sites."""
    vec = eigvec_descriptor(k, m, geom).expand(geom)
    return WaveProfile(vec.astype(complex), time=0.0, mode=SITE_MODE)


def build_hopping_matrix(params: ModelParams, dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Dense L x L hopping matrix: -J_{r(i,j)-1} off the diagonal, 0 on it."""
    geom = params.geom
    if geom.length > dense_cap:
        raise ResourceLimitError(
            f"L = {geom.length} exceeds the dense cap {dense_cap}"
        )
    couplings = params.level_coupling_array()
    L = geom.length
    labels = np.arange(L)
    # r(i, j) - 1 = index of the highest differing bit of the 0-based labels
    xor = labels[:, None] ^ labels[None, :]
    mat = np.zeros((L, L))
    nz = xor != 0
    level = np.zeros_like(xor)
    level[nz] = np.floor(np.log2(xor[nz])).astype(int)
    mat[nz] = -couplings[level[nz]]
    return mat


def delta_decomposition(geom: TreeGeometry) -> list[tuple[int, int, float]]:
    """Expansion of the site-1 delta state over the tree eigenbasis.

    Exactly one member per multiplet appears (always m = 1): the uniform
    mode with weight 1/sqrt(L) and, for k = 1..N, the member containing
    site 1 with weight sqrt(2^(k-1)/L).
    """
    L = geom.length
    terms = [(0, 1, L ** -0.5)]
    for k in range(1, geom.levels + 1):
        terms.append((k, 1, math.sqrt(2.0 ** (k - 1.0) / L)))
    return terms
