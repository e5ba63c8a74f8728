import numpy as np
import pytest

from hdyson import (
    InputError,
    ModelParams,
    ResourceLimitError,
    SpinState,
    TreeGeometry,
    build_spin_hamiltonian,
    binary_entropy,
    build_hopping_matrix,
    entanglement_entropy,
    evolve_spin,
    magnetization_profile,
    one_defect_state,
    quasi_conservation_report,
    shell_probability,
    total_excitations,
    wave_profile_finite,
)
from hdyson.manybody import spin_parity_expectation

from reference import dense_expm_evolve, two_spin_defect_occupations


def params_for(length, sigma=1.0, J=1.0, h=0.0):
    return ModelParams(TreeGeometry.from_length(length), J=J, sigma=sigma, h=h)


def single_particle_occupations(t, params):
    return np.abs(wave_profile_finite(t, params).amplitudes) ** 2


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------

def test_two_site_hamiltonian_matrix():
    H = build_spin_hamiltonian(params_for(2, h=0.0)).matrix.toarray()
    # basis 00,10,01,11 (site 1 = lowest bit); sx sx couples 0<->3 and 1<->2
    expected = np.zeros((4, 4))
    expected[0, 3] = expected[3, 0] = -1.0
    expected[1, 2] = expected[2, 1] = -1.0
    assert np.allclose(H, expected)
    H_field = build_spin_hamiltonian(params_for(2, h=3.0)).matrix.toarray()
    assert np.allclose(np.diag(H_field), [-6.0, 0.0, 0.0, 6.0])


def test_polarized_diagonal_and_offdiag_count():
    length = 8
    ham = build_spin_hamiltonian(params_for(length, h=5.0))
    mat = ham.matrix
    assert mat[0, 0] == pytest.approx(-5.0 * length)
    dense = mat.toarray()
    assert np.allclose(dense, dense.T)
    offdiag = (dense != 0).sum(axis=0) - (np.diag(dense) != 0)
    assert np.all(offdiag == length * (length - 1) // 2)


def test_sparse_cap():
    with pytest.raises(ResourceLimitError):
        build_spin_hamiltonian(params_for(16), cap=8)


def test_paramagnetic_ground_state_overlap():
    params = params_for(8, h=40.0)
    dense = build_spin_hamiltonian(params).matrix.toarray()
    evals, evecs = np.linalg.eigh(dense)
    ground = evecs[:, 0]
    overlap = abs(ground[0]) ** 2  # |up...up> is basis state 0
    assert overlap > 1.0 - 5.0 * (1.0 / 40.0) ** 2


def test_single_defect_block_is_hopping_matrix():
    params = params_for(8, sigma=0.7, h=11.0)
    dense = build_spin_hamiltonian(params).matrix.toarray()
    idx = [1 << x for x in range(8)]
    block = dense[np.ix_(idx, idx)]
    block = block - np.diag(np.diag(block))  # remove the constant h diagonal
    hop = build_hopping_matrix(params)
    assert np.max(np.abs(block - hop)) < 1e-14
    assert np.allclose(np.diag(dense)[idx], -params.h * (8 - 2))


# ---------------------------------------------------------------------------
# states and observables
# ---------------------------------------------------------------------------

def test_magnetization_of_product_states():
    flip = SpinState.single_flip(6, site=1)
    n = magnetization_profile(flip)
    assert np.allclose(n, [1, 0, 0, 0, 0, 0])
    assert np.allclose(magnetization_profile(SpinState.all_up(6)), np.zeros(6))


def test_one_defect_state_occupations():
    amps = np.full(8, 8 ** -0.5, dtype=complex)
    state = one_defect_state(amps)
    assert np.allclose(magnetization_profile(state), np.full(8, 1.0 / 8.0))


def test_shell_probability_partitions_total():
    rng = np.random.default_rng(2)
    geom = TreeGeometry(3)
    n = rng.uniform(size=(5, 8))
    shells = shell_probability(n, geom)
    assert shells.shape == (5, 4)
    assert np.allclose(shells.sum(axis=1), n.sum(axis=1), atol=1e-12)
    single = shell_probability(n[0], geom)
    assert np.allclose(single, shells[0])
    assert single[0] == n[0, 0]


def test_entanglement_entropy_special_states():
    assert entanglement_entropy(SpinState.single_flip(4), 2) == pytest.approx(0.0, abs=1e-12)
    bell = np.zeros(16, dtype=complex)
    bell[0b0000] = 2 ** -0.5
    bell[0b0110] = 2 ** -0.5  # sites 2 and 3 maximally entangled across cut 2
    assert entanglement_entropy(SpinState(bell), 2) == pytest.approx(np.log(2.0))
    with pytest.raises(InputError):
        entanglement_entropy(SpinState.single_flip(4), 4)


def test_single_defect_entropy_is_binary_formula():
    rng = np.random.default_rng(9)
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    amps /= np.linalg.norm(amps)
    state = one_defect_state(amps)
    for cut in range(1, 8):
        inside = float(np.sum(np.abs(amps[:cut]) ** 2))
        assert entanglement_entropy(state, cut) == pytest.approx(
            binary_entropy(inside), abs=1e-8
        )


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------

def test_zero_hamiltonian_keeps_state():
    params = ModelParams(TreeGeometry(2), J=0.0, sigma=1.0, h=0.0)
    series = evolve_spin(
        build_spin_hamiltonian(params),
        SpinState.single_flip(4),
        np.linspace(0.0, 3.0, 4),
        keep_states=True,
    )
    for state in series.states:
        assert np.max(np.abs(state - series.states[0])) < 1e-12


def test_two_spin_rabi_oscillation():
    params = params_for(2, h=7.0)
    times = np.linspace(0.0, 6.0, 41)
    series = evolve_spin(build_spin_hamiltonian(params), SpinState.single_flip(2), times)
    for i, t in enumerate(times):
        n1, n2 = two_spin_defect_occupations(t, 1.0)
        assert series.n[i, 0] == pytest.approx(n1, abs=1e-9)
        assert series.n[i, 1] == pytest.approx(n2, abs=1e-9)


def test_krylov_matches_dense_expm():
    params = params_for(8, h=12.0)
    ham = build_spin_hamiltonian(params)
    times = np.array([0.0, 2.5, 5.0])
    series = evolve_spin(ham, SpinState.single_flip(8), times, keep_states=True)
    psi0 = SpinState.single_flip(8).amplitudes
    dense = ham.matrix.toarray()
    for i, t in enumerate(times):
        expected = dense_expm_evolve(dense, psi0, t)
        assert np.max(np.abs(series.states[i] - expected)) < 1e-8


def test_conservation_laws_and_norm():
    params = params_for(8, h=40.0)
    times = np.linspace(0.0, 50.0, 101)
    series = evolve_spin(
        build_spin_hamiltonian(params), SpinState.single_flip(8), times,
        keep_states=True,
    )
    assert np.max(np.abs(series.norms - 1.0)) < 1e-8 * 50.0
    energy_scale = max(abs(series.energies[0]), 1.0)
    assert np.max(np.abs(series.energies - series.energies[0])) < 1e-8 * energy_scale
    parities = [spin_parity_expectation(state) for state in series.states]
    assert np.max(np.abs(np.array(parities) - parities[0])) < 1e-10


def test_quasi_conservation_improves_with_field():
    times = np.linspace(0.0, 10.0, 51)
    deviations = {}
    for h in (2.0, 40.0):
        params = params_for(8, h=h)
        series = evolve_spin(
            build_spin_hamiltonian(params), SpinState.single_flip(8), times
        )
        deviations[h] = quasi_conservation_report(series)
        assert np.allclose(total_excitations(series), series.n.sum(axis=1))
    assert deviations[40.0] < 0.01
    assert deviations[2.0] >= 10.0 * deviations[40.0]


def test_single_particle_deviation_shrinks_with_field():
    times = np.linspace(0.0, 10.0, 41)
    worst = []
    for h in (5.0, 10.0, 20.0, 40.0):
        params = params_for(8, h=h)
        series = evolve_spin(
            build_spin_hamiltonian(params), SpinState.single_flip(8), times
        )
        dev = max(
            float(np.max(np.abs(series.n[i] - single_particle_occupations(t, params))))
            for i, t in enumerate(times)
        )
        worst.append(dev)
    assert all(worst[i] > worst[i + 1] for i in range(len(worst) - 1))
    # the h = 40J dressing floor: secular (J^2/4h) dephasing, not integrator error
    assert worst[-1] < 0.03


def test_shell_average_return_probability():
    params = params_for(8, h=40.0)
    times = np.linspace(0.0, 200.0, 801)
    series = evolve_spin(
        build_spin_hamiltonian(params), SpinState.single_flip(8), times
    )
    mean_p0 = np.trapezoid(series.shell_p[:, 0], times) / times[-1]
    assert abs(mean_p0 - 1.0 / 3.0) < 0.1 / 3.0


def test_entropy_column_during_evolution():
    params = params_for(4, h=30.0)
    times = np.linspace(0.0, 2.0, 5)
    series = evolve_spin(
        build_spin_hamiltonian(params), SpinState.single_flip(4), times,
        compute_entropy=True, keep_states=True,
    )
    assert series.entropy.shape == (5, 3)
    assert np.allclose(series.entropy[0], 0.0, atol=1e-10)
    for i in range(len(times)):
        for cut in (1, 2, 3):
            direct = entanglement_entropy(SpinState(series.states[i]), cut)
            assert series.entropy[i, cut - 1] == pytest.approx(direct, abs=1e-12)


def test_evolve_input_validation():
    params = params_for(4, h=1.0)
    ham = build_spin_hamiltonian(params)
    good = SpinState.single_flip(4)
    with pytest.raises(InputError):
        evolve_spin(ham, good, np.array([1.0, 0.5]))
    with pytest.raises(InputError):
        evolve_spin(ham, good, np.array([-1.0, 2.0]))
    with pytest.raises(InputError):
        evolve_spin(ham, SpinState(np.full(16, 0.5 + 0j)), np.array([0.0, 1.0]))
    with pytest.raises(InputError):
        evolve_spin(ham, SpinState.single_flip(2), np.array([0.0, 1.0]))
    with pytest.raises(InputError):
        SpinState.single_flip(4, site=5)
    with pytest.raises(InputError):
        SpinState(np.zeros(3, dtype=complex))
