"""Closed-form single-particle dynamics of the hierarchical chain.

A spin flip created at site 1 on the polarized background evolves, deep in
the paramagnetic phase, under the hierarchical hopping matrix.  Because the
initial delta state overlaps exactly one tree eigenvector per multiplet
(`spectral.delta_decomposition`), its amplitude at hierarchical distance r
is an (N+1)-term sum at finite L and, in the thermodynamic limit, the
exponentially convergent mode series

    psi(0, t) = sum_{k>=0} 2^(-k-1) exp(-i Jt_sigma t 2^(-sigma k)),
    psi(r, t) = 2^(-r) F(2^(-sigma r) t),          r >= 1,
    F(s)      = psi(0, s) - exp(-i Jt_sigma 2^sigma s),

with Jt_sigma the renormalized band coupling.  F is the universal scaling
function: space and time enter only through s = 2^(-sigma r) t, which is
the t ~ x^sigma dynamical scaling.  This module evaluates both forms, the
occupation probabilities P(r, t), their long-time averages and rigorous
bounds, the periodic sigma -> 0 closed forms, and the binary-entropy
entanglement of a single-defect state.

Conventions: hbar = 1, times in units of 1/J, natural logarithms.  The
thermodynamic-limit amplitudes drop a k-independent phase (the additive
constant of the reindexed spectrum); `finite_to_thermo_phase` supplies the
gauge factor that aligns them with the finite-L amplitudes.  All
time-dependent evaluators accept scalar or array t.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import InputError, SingularLimitError
from .geometry import TreeGeometry
from .profiles import (
    DEFAULT_POLICY,
    SHELL_MODE,
    SITE_MODE,
    ProbabilityProfile,
    TruncationPolicy,
    WaveProfile,
    expand_shells_to_sites,
)
from .spectral import ModelParams, eigenvalues, renormalized_coupling

__all__ = [
    "SIGMA_NEAR_ZERO",
    "psi_finite",
    "psi_thermo",
    "scaling_function",
    "finite_to_thermo_phase",
    "probability",
    "probability_thermo",
    "wave_profile_finite",
    "wave_profile_thermo",
    "probability_profile",
    "time_average",
    "closed_form_average",
    "tail_average",
    "tail_bound",
    "sigma_zero",
    "sigma_zero_probability",
    "binary_entropy",
    "cumulative_probability",
    "single_particle_entropy",
    "entropy_profile",
    "estimate_dynamical_exponent",
]

# Below this the 1/(1 - 2^-sigma) prefactors overflow their useful range;
# such runs are rerouted to the sigma = 0 closed forms.
SIGMA_NEAR_ZERO = 1e-6


def _as_time_array(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _shell_weight(r: int) -> float:
    return 1.0 if r == 0 else 2.0 ** (r - 1)


def _check_sigma(sigma: float) -> None:
    if sigma == 0:
        raise SingularLimitError(
            "thermodynamic-limit series diverges at sigma = 0; "
            "use sigma_zero / sigma_zero_probability"
        )
    if sigma < 0:
        raise InputError(f"sigma must be >= 0, got {sigma}")


def _near_zero(sigma: float) -> bool:
    return sigma < SIGMA_NEAR_ZERO


# ---------------------------------------------------------------------------
# finite chain
# ---------------------------------------------------------------------------

def psi_finite(r: int, t, params: ModelParams):
    """Amplitude of the evolved delta state at hierarchical distance r.

    Exact for any L = 2^N: a uniform-mode term, the partial multiplet sum
    for the modes whose positive support still contains shell r, and the
    single sign-flipped term of the shell's own multiplet.  At t = 0 the
    profile reconstructs the site-1 delta exactly.
    """
    n = params.geom.levels
    if not 0 <= r <= n:
        raise InputError(f"shell index {r} outside 0..{n}")
    eps = eigenvalues(params).eps
    L = params.geom.length
    tarr, scalar = _as_time_array(t)
    acc = np.full(tarr.shape, 1.0 / L, dtype=complex) * np.exp(-1j * eps[0] * tarr)
    k_top = n if r == 0 else n - r
    for k in range(1, k_top + 1):
        acc += (2.0 ** (k - 1) / L) * np.exp(-1j * eps[k] * tarr)
    if r >= 1:
        acc -= 2.0 ** (-r) * np.exp(-1j * eps[n - r + 1] * tarr)
    return complex(acc[()]) if scalar else acc


def wave_profile_finite(t: float, params: ModelParams) -> WaveProfile:
    """Site-resolved finite-chain profile at time t (unit norm)."""
    shells = np.array(
        [psi_finite(r, t, params) for r in range(params.geom.levels + 1)]
    )
    return WaveProfile(expand_shells_to_sites(shells, params.geom), float(t), SITE_MODE)


def finite_to_thermo_phase(t, sigma: float, J: float = 1.0):
    """Gauge factor g(t) with psi_thermo ~= g(t) * psi_finite as N -> inf.

    The thermodynamic series drops the additive constant
    -J/(1 - 2^-sigma) of the reindexed spectrum; multiplying the finite-L
    amplitudes by g(t) = exp(-i J t / (1 - 2^-sigma)) restores the match.
    """
    _check_sigma(sigma)
    return np.exp(-1j * J * np.asarray(t, dtype=float) / (1.0 - 2.0 ** -sigma))


# ---------------------------------------------------------------------------
# thermodynamic limit
# ---------------------------------------------------------------------------

def _return_series(s, sigma: float, J: float, policy: TruncationPolicy):
    """Truncated mode series for psi(0, s); remainder modulus <= 2^-K."""
    coupling = renormalized_coupling(sigma, J)
    sarr = np.asarray(s, dtype=float)
    acc = np.zeros(sarr.shape, dtype=complex)
    for k in range(policy.K):
        acc += 2.0 ** (-k - 1) * np.exp(-1j * coupling * 2.0 ** (-sigma * k) * sarr)
    return acc


def _scaling_array(sarr: np.ndarray, sigma: float, J: float,
                   policy: TruncationPolicy) -> np.ndarray:
    coupling = renormalized_coupling(sigma, J)
    return _return_series(sarr, sigma, J, policy) - np.exp(
        -1j * coupling * 2.0 ** sigma * sarr
    )


def scaling_function(s, sigma: float, J: float = 1.0,
                     policy: TruncationPolicy = DEFAULT_POLICY):
    """Universal collapse function F(s) = psi(0, s) - exp(-i Jt_sigma 2^sigma s).

    Satisfies psi(r, t) = 2^-r F(2^(-sigma r) t) identically for r >= 1,
    |F| <= 2, and F(0) = 0 (up to the 2^-K series remainder).
    """
    _check_sigma(sigma)
    if _near_zero(sigma):
        raise SingularLimitError(
            "the scaling function has no sigma -> 0 limit; "
            "use sigma_zero for the amplitudes"
        )
    sarr, scalar = _as_time_array(s)
    out = _scaling_array(sarr, sigma, J, policy)
    return complex(out[()]) if scalar else out


def psi_thermo(r: int, t, sigma: float, J: float = 1.0,
               policy: TruncationPolicy = DEFAULT_POLICY):
    """Thermodynamic-limit amplitude at hierarchical distance r.

    r = 0 is the truncated return series; r >= 1 is evaluated through the
    scaling function so the collapse identity holds to the bit.  Truncation
    error is bounded by policy.tail_bound.  For 0 < sigma < 1e-6 the call
    falls through to the sigma = 0 closed form (with a warning): that form
    fixes amplitudes only up to a global phase, probabilities exactly.
    """
    if r < 0:
        raise InputError(f"shell index must be >= 0, got {r}")
    _check_sigma(sigma)
    if _near_zero(sigma):
        warnings.warn(
            f"sigma = {sigma} is below {SIGMA_NEAR_ZERO}; using the sigma = 0 "
            "closed form (global phase convention differs)",
            stacklevel=2,
        )
        return sigma_zero(r, t, J)
    tarr, scalar = _as_time_array(t)
    if r == 0:
        out = _return_series(tarr, sigma, J, policy)
    else:
        out = 2.0 ** (-r) * _scaling_array(
            tarr * 2.0 ** (-sigma * r), sigma, J, policy
        )
    return complex(out[()]) if scalar else out


def wave_profile_thermo(t: float, sigma: float, J: float = 1.0,
                        policy: TruncationPolicy = DEFAULT_POLICY,
                        r_max: int = 24) -> WaveProfile:
    """Shell-mode thermodynamic profile for r = 0..r_max.

    The shells beyond r_max carry total probability at most 2^(1-r_max).
    """
    if r_max < 0:
        raise InputError(f"r_max must be >= 0, got {r_max}")
    shells = np.array([psi_thermo(r, t, sigma, J, policy) for r in range(r_max + 1)])
    return WaveProfile(shells, float(t), SHELL_MODE)


# ---------------------------------------------------------------------------
# probabilities
# ---------------------------------------------------------------------------

def probability(r: int, t, source):
    """Probability of finding the excitation at hierarchical distance r.

    P(r, t) = 2^(r-1) |psi(r, t)|^2 for r >= 1 (one factor per shell site)
    and |psi(0, t)|^2 for r = 0.  `source` is either ModelParams (finite
    chain, evaluated at time t) or a WaveProfile (its stored time must
    match t).
    """
    if isinstance(source, ModelParams):
        amp = psi_finite(r, t, source)
        return _shell_weight(r) * np.abs(amp) ** 2
    if isinstance(source, WaveProfile):
        if not np.isclose(source.time, float(np.asarray(t)), atol=1e-12, rtol=1e-9):
            raise InputError(
                f"profile holds t = {source.time}, probability asked at t = {t}"
            )
        if source.mode == SHELL_MODE:
            if r >= source.length:
                raise InputError(f"profile truncated at r_max = {source.length - 1}")
            return _shell_weight(r) * abs(source.amplitudes[r]) ** 2
        geom = TreeGeometry.from_length(source.length)
        if r > geom.levels:
            raise InputError(f"shell index {r} outside 0..{geom.levels}")
        if r == 0:
            return abs(source.amplitudes[0]) ** 2
        block = source.amplitudes[1 << (r - 1) : 1 << r]
        return float(np.sum(np.abs(block) ** 2))
    raise InputError(f"unsupported probability source {type(source).__name__}")


def probability_thermo(r: int, t, sigma: float, J: float = 1.0,
                       policy: TruncationPolicy = DEFAULT_POLICY):
    """Thermodynamic-limit P(r, t); vectorized over t."""
    amp = psi_thermo(r, t, sigma, J, policy)
    return _shell_weight(r) * np.abs(amp) ** 2


def probability_profile(source: WaveProfile) -> ProbabilityProfile:
    """Shell-resolved probabilities of a profile (either mode)."""
    if source.mode == SHELL_MODE:
        r = np.arange(source.length)
        weights = np.where(r == 0, 1.0, 2.0 ** np.clip(r - 1, 0, None))
        values = weights * np.abs(source.amplitudes) ** 2
    else:
        geom = TreeGeometry.from_length(source.length)
        values = np.empty(geom.levels + 1)
        values[0] = abs(source.amplitudes[0]) ** 2
        for r in range(1, geom.levels + 1):
            block = source.amplitudes[1 << (r - 1) : 1 << r]
            values[r] = np.sum(np.abs(block) ** 2)
    return ProbabilityProfile(values, source.time)


# ---------------------------------------------------------------------------
# long-time averages and bounds
# ---------------------------------------------------------------------------

def closed_form_average(r: int) -> float:
    """Infinite-horizon average of P(r, t): 1/3 for r in {0, 1}, 2^(1-r)/3."""
    if r < 0:
        raise InputError(f"shell index must be >= 0, got {r}")
    return 1.0 / 3.0 if r == 0 else 2.0 ** (1 - r) / 3.0


def tail_average(R: int) -> float:
    """Average probability of being at distance r > R: 2^(1-R)/3."""
    if R < 0:
        raise InputError(f"shell index must be >= 0, got {R}")
    return 2.0 ** (1 - R) / 3.0


def tail_bound(R: int) -> float:
    """Bound valid at every time: sum_{r>R} P(r, t) <= 2^(1-R)."""
    if R < 0:
        raise InputError(f"shell index must be >= 0, got {R}")
    return 2.0 ** (1 - R)


def time_average(r: int, T: float, sigma: float, J: float = 1.0,
                 policy: TruncationPolicy = DEFAULT_POLICY,
                 dt: float | None = None) -> float:
    """Finite-horizon average (1/T) int_0^T P(r, t) dt, composite trapezoid.

    The grid step defaults to 0.01/J, about two hundred points per period
    of the fastest mode.  Convergence to `closed_form_average(r)` requires
    a horizon with 2^(r sigma) << J T; the relative error then decays like
    2^(r sigma) / (J T).  Evaluation is chunked so arbitrarily long
    horizons use bounded memory.
    """
    if T <= 0:
        raise InputError(f"averaging horizon must be positive, got T = {T}")
    if dt is None:
        dt = 0.01 / J if J > 0 else 0.01
    n_steps = max(1, int(round(T / dt)))
    step = T / n_steps
    total = 0.0
    chunk = 1 << 20
    for start in range(0, n_steps + 1, chunk):
        idx = np.arange(start, min(start + chunk, n_steps + 1))
        values = probability_thermo(r, idx * step, sigma, J, policy)
        total += float(np.sum(values))
        if start == 0:
            total -= 0.5 * float(values[0])
    # remove the half-weight of the final grid point
    total -= 0.5 * float(probability_thermo(r, T, sigma, J, policy))
    return total * step / T


# ---------------------------------------------------------------------------
# singular limit sigma -> 0
# ---------------------------------------------------------------------------

def sigma_zero(r: int, t, J: float = 1.0):
    """Amplitude in the sigma -> 0 limit, global divergent phase removed.

    psi(0, t) = 1/(2 - e^{iJt});
    psi(r, t) = 2^(1-r) e^{iJrt} (1 - e^{-iJt}) / (2 - e^{iJt}) for r >= 1.
    Periodic in t with period 2 pi / J.
    """
    if r < 0:
        raise InputError(f"shell index must be >= 0, got {r}")
    tarr, scalar = _as_time_array(t)
    rotor = np.exp(1j * J * tarr)
    if r == 0:
        out = 1.0 / (2.0 - rotor)
    else:
        out = 2.0 ** (1 - r) * rotor ** r * (1.0 - np.conj(rotor)) / (2.0 - rotor)
    return complex(out[()]) if scalar else out


def sigma_zero_probability(r: int, t, J: float = 1.0):
    """P(r, t) in the sigma -> 0 limit: 1/(5 - 4 cos Jt) at r = 0 and
    2^-r (4 - 4 cos Jt)/(5 - 4 cos Jt) beyond; sums to 1 over shells."""
    if r < 0:
        raise InputError(f"shell index must be >= 0, got {r}")
    tarr, scalar = _as_time_array(t)
    c = np.cos(J * tarr)
    if r == 0:
        out = 1.0 / (5.0 - 4.0 * c)
    else:
        out = 2.0 ** (-r) * (4.0 - 4.0 * c) / (5.0 - 4.0 * c)
    return float(out[()]) if scalar else out


# ---------------------------------------------------------------------------
# single-defect entanglement
# ---------------------------------------------------------------------------

def binary_entropy(p: float) -> float:
    """-p ln p - (1-p) ln(1-p), with 0 ln 0 = 0; p clipped to [0, 1]."""
    p = min(1.0, max(0.0, float(p)))
    out = 0.0
    if p > 0.0:
        out -= p * math.log(p)
    if p < 1.0:
        out -= (1.0 - p) * math.log(1.0 - p)
    return out


def cumulative_probability(source: WaveProfile, x: int) -> float:
    """Probability that the excitation lies in sites 1..x.

    Shell-mode profiles count whole shells inside the cut plus the covered
    fraction of the cut shell; shells beyond the profile truncation are
    treated as empty (their total weight is <= 2^(1-r_max)).
    """
    if x < 1:
        raise InputError(f"cut position must be >= 1, got {x}")
    if source.mode == SITE_MODE:
        if x > source.length:
            raise InputError(f"cut {x} beyond chain of length {source.length}")
        return float(np.sum(np.abs(source.amplitudes[:x]) ** 2))
    total = abs(source.amplitudes[0]) ** 2
    for r in range(1, source.length):
        inside = min(max(x - (1 << (r - 1)), 0), 1 << (r - 1))
        if inside == 0:
            break
        total += inside * abs(source.amplitudes[r]) ** 2
    return float(total)


def single_particle_entropy(x: int, t, source: WaveProfile) -> float:
    """Entanglement entropy of the cut [1..x] for a single-defect state.

    Equals the binary entropy of P_A, the probability of finding the defect
    left of the cut; natural-log convention.
    """
    if not np.isclose(source.time, float(np.asarray(t)), atol=1e-12, rtol=1e-9):
        raise InputError(f"profile holds t = {source.time}, entropy asked at t = {t}")
    if source.mode == SITE_MODE and not 1 <= x < source.length:
        raise InputError(f"cut {x} outside 1..{source.length - 1}")
    return binary_entropy(cumulative_probability(source, x))


def entropy_profile(source: WaveProfile, cuts) -> np.ndarray:
    """Entanglement entropy at each cut position (vectorized convenience)."""
    return np.array(
        [single_particle_entropy(x, source.time, source) for x in np.asarray(cuts)]
    )


# ---------------------------------------------------------------------------
# blind recovery of the dynamical exponent
# ---------------------------------------------------------------------------

def estimate_dynamical_exponent(psi_fn, r_values, s_grid,
                                z_min: float = 0.1, z_max: float = 6.0,
                                scan: int = 3001, refine: int = 60) -> float:
    """Exponent z that best collapses 2^r psi(r, t) onto one curve of t 2^(-z r).

    `psi_fn(r, t_array)` supplies the amplitudes; nothing else about the
    model is used, so recovering z = sigma from the hierarchical dynamics
    is a blind check of the t ~ x^z scaling.  The mean pairwise spread has
    an extremely narrow global zero at the true exponent (its width shrinks
    with the largest r and rescaled time in play), so a dense geometric
    scan locates the dip before golden-section refinement; keep the s grid
    within a few oscillation periods or sharpen the scan accordingly.
    """
    r_values = sorted(set(int(r) for r in r_values))
    if len(r_values) < 2:
        raise InputError("need at least two distinct r values to collapse")
    s_grid = np.asarray(s_grid, dtype=float)
    r0 = r_values[0]

    def spread(z: float) -> float:
        ref = 2.0 ** r0 * psi_fn(r0, s_grid * 2.0 ** (z * r0))
        acc = 0.0
        for r in r_values[1:]:
            cur = 2.0 ** r * psi_fn(r, s_grid * 2.0 ** (z * r))
            acc += float(np.mean(np.abs(cur - ref) ** 2))
        return acc / (len(r_values) - 1)

    zs = np.geomspace(z_min, z_max, scan)
    costs = np.array([spread(z) for z in zs])
    best = int(np.argmin(costs))
    lo = zs[max(best - 1, 0)]
    hi = zs[min(best + 1, scan - 1)]

    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - ratio * (b - a)
    d = a + ratio * (b - a)
    fc, fd = spread(c), spread(d)
    for _ in range(refine):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = spread(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = spread(d)
    return 0.5 * (a + b)
