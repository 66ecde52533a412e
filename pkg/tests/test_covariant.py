import math

import numpy as np
import pytest

from timinginfo.covariant import (
    MAX_EXTENSION_DIM,
    CovarianceViolation,
    ShiftKraus,
    build_extension,
    check_covariance,
    covariant_average_gap,
    energy_transfer_error,
    equatorial_orbit_states,
    gap_set,
    ilc_bound,
    info_loss_capacity_bound,
    phase_covariant_clone,
    private_info,
    random_covariant_channel,
    shift_decompose,
)
from timinginfo.energydist import energy_distribution
from timinginfo.infomeasures import LN2, DiscreteDistribution, holevo_information, orbit_ensemble, timing_information
from timinginfo.qcore import (
    DensityMatrix,
    HamiltonianSpec,
    KrausChannel,
    StateEnsemble,
    amplitude_damping,
    apply_channel,
    evolve,
    full_dephasing,
    identity_channel,
    random_density,
    random_pure,
    unitary_channel,
)

HADAMARD = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
CHANNELS = {
    "ad0.1": amplitude_damping(0.1),
    "ad0.5": amplitude_damping(0.5),
    "ad0.9": amplitude_damping(0.9),
    "dephasing": full_dephasing(2),
}


def channel_distance(g1: KrausChannel, g2: KrausChannel, d: int) -> float:
    worst = 0.0
    for a in range(d):
        for b in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[a, b] = 1
            worst = max(worst, float(np.max(np.abs(apply_channel(g1, e).matrix - apply_channel(g2, e).matrix))))
    return worst


def test_check_covariance_examples(qubit_h):
    assert check_covariance(amplitude_damping(0.3), qubit_h)[0]
    assert check_covariance(full_dephasing(2), qubit_h)[0]
    ok, dev = check_covariance(unitary_channel(HADAMARD), qubit_h)
    assert not ok and dev > 0.1


def test_hadamard_fails_at_quarter_period(plus, qubit_h):
    g = unitary_channel(HADAMARD)
    rho = np.diag([1.0, 0.0]) + 0j
    rho[0, 1] = rho[1, 0] = 0.3
    t = math.pi / 2
    lhs = apply_channel(g, evolve(rho, qubit_h, t)).matrix
    rhs = evolve(apply_channel(g, rho), qubit_h, t).matrix
    assert np.max(np.abs(lhs - rhs)) > 0.1


def test_gap_set():
    assert gap_set(HamiltonianSpec.diagonal([0, 1, 3])).tolist() == [-3, -2, -1, 0, 1, 2, 3]


def test_shift_decompose_amplitude_damping(qubit_h):
    g = amplitude_damping(0.3)
    sk = shift_decompose(g, qubit_h)
    assert sorted(sk.shifts) == [-1.0, 0.0]
    for a, b in zip(sk.kraus, g.kraus):
        assert np.allclose(a, b)
    assert channel_distance(sk.channel, g, 2) < 1e-9


def test_shift_decompose_diagonal(qubit_h):
    assert set(shift_decompose(full_dephasing(2), qubit_h).shifts) == {0.0}


def test_shift_decompose_rejects_non_covariant(qubit_h):
    with pytest.raises(CovarianceViolation):
        shift_decompose(unitary_channel(HADAMARD), qubit_h)


def test_shift_kraus_validates_shifts(qubit_h):
    with pytest.raises(CovarianceViolation):
        ShiftKraus(amplitude_damping(0.3), (0.0, 1.0), qubit_h)


def test_random_covariant_round_trip():
    h = HamiltonianSpec.diagonal([0, 1, 3])
    for seed in range(5):
        sk = random_covariant_channel(h, seed)
        assert check_covariance(sk.channel, h)[0]
        again = shift_decompose(sk.channel, h)
        assert channel_distance(again.channel, sk.channel, 3) < 1e-9


@pytest.mark.parametrize("name", sorted(CHANNELS))
def test_extension_invariants(name, qubit_h, rng):
    g = CHANNELS[name]
    ext = build_extension(shift_decompose(g, qubit_h), window=1)
    assert max(ext.reconstruction_error(g, random_density(2, rng)) for _ in range(100)) < 1e-9
    assert ext.commutator_norm() < 1e-9
    assert ext.isometry_error() < 1e-9
    assert ext.unitarity_error() < 1e-9
    assert ext.initial_energy_residual() == 0.0
    assert max(energy_transfer_error(ext, random_density(2, rng)) for _ in range(20)) < 1e-9


def test_block_completion_conserves_energy_globally(qubit_h):
    ext = build_extension(shift_decompose(amplitude_damping(0.5), qubit_h))
    assert ext.commutator_norm(reachable_only=False) < 1e-9


def test_amplitude_damping_extension_size(qubit_h):
    ext = build_extension(shift_decompose(amplitude_damping(0.5), qubit_h), window=1)
    assert ext.dim * ext.env_dim == 18


def test_unitary_covariant_channel_extension(qubit_h, rng):
    phase = np.diag([1.0, np.exp(0.7j)])
    g = unitary_channel(phase)
    ext = build_extension(shift_decompose(g, qubit_h))
    rho = random_density(2, rng)
    system, env = ext.reduced_outputs(rho)
    assert np.allclose(system, phase @ rho.matrix @ phase.conj().T, atol=1e-12)
    # The single Kraus operator moves the environment one lattice step, at zero energy cost.
    assert np.trace(env @ env).real == pytest.approx(1.0)
    assert np.real(np.trace(env @ ext.env_h.matrix)) == pytest.approx(0.0, abs=1e-12)


def test_dephasing_environment_is_time_independent(qubit_h):
    ext = build_extension(shift_decompose(full_dephasing(2), qubit_h))
    base = ext.reduced_outputs(np.full((2, 2), 0.5))[1]
    for x, y in equatorial_orbit_states(16):
        psi = np.array([1.0, x + 1j * y]) / math.sqrt(2)
        env = ext.reduced_outputs(np.outer(psi, psi.conj()))[1]
        assert np.allclose(env, base, atol=1e-12)


def test_extension_on_degenerate_spectrum(rng):
    h = HamiltonianSpec.diagonal([0, 1, 1])
    sk = random_covariant_channel(h, 4)
    ext = build_extension(sk)
    assert ext.commutator_norm() < 1e-9 and ext.unitarity_error() < 1e-9
    assert max(ext.reconstruction_error(sk.channel, random_density(3, rng)) for _ in range(20)) < 1e-9


def test_build_extension_errors(qubit_h):
    sk = shift_decompose(amplitude_damping(0.3), qubit_h)
    with pytest.raises(ValueError):
        build_extension(sk, window=0)
    with pytest.raises(ValueError):
        build_extension(sk, window=1, depth=2)
    big = random_covariant_channel(HamiltonianSpec.diagonal([0, 1, 2, 3]), 0, per_shift=2)
    with pytest.raises(ValueError, match=str(MAX_EXTENSION_DIM)):
        build_extension(big)


def test_extension_json(qubit_h):
    data = build_extension(shift_decompose(amplitude_damping(0.5), qubit_h)).to_json()
    assert data["env_dim"] == 9 and data["system_dim"] == 2
    assert data["env_levels"][data["env_initial_index"]] == 0.0


def test_private_info_examples(qubit_h):
    basis = StateEnsemble.uniform([DensityMatrix(np.diag([1.0, 0.0])), DensityMatrix(np.diag([0.0, 1.0]))])
    r = private_info(shift_decompose(identity_channel(2), qubit_h), basis)
    assert r.info_b.bits == pytest.approx(1.0, abs=1e-6)
    assert r.info_e == pytest.approx(0.0, abs=1e-9)
    assert r.c1.bits == pytest.approx(1.0, abs=1e-6)
    orbit = orbit_ensemble(np.full((2, 2), 0.5), qubit_h, 64)
    r = private_info(shift_decompose(full_dephasing(2), qubit_h), orbit)
    assert (r.info_b, r.info_e, r.c1) == pytest.approx((0, 0, 0), abs=1e-6)


def test_private_info_amplitude_damping_pinned(qubit_h):
    orbit = orbit_ensemble(np.full((2, 2), 0.5), qubit_h, 64)
    r = private_info(shift_decompose(amplitude_damping(0.5), qubit_h), orbit)
    # At gamma = 1/2 system and environment receive equally damped copies.
    assert r.info_b == pytest.approx(r.info_e, abs=1e-9)
    assert r.c1 == pytest.approx(0.0, abs=1e-9)
    assert r.c1 == pytest.approx(r.info_b - r.info_e, abs=1e-12)


def test_info_loss_capacity_examples(qubit_h):
    assert info_loss_capacity_bound(0.1, 0.5, 0.5) == pytest.approx(0.2)
    assert info_loss_capacity_bound(0.1, 0.5, 0.3) <= 0
    plus = np.full((2, 2), 0.5)
    loss = timing_information(plus, qubit_h) - timing_information(apply_channel(full_dephasing(2), plus), qubit_h)
    assert loss == pytest.approx(LN2)
    assert info_loss_capacity_bound(LN2 / 2, LN2, LN2 - loss) <= 0


def test_ilc_examples():
    u = DiscreteDistribution([0, 1], [0.5, 0.5])
    # Variance 1/4 and fourth moment 1/2: (1/4)^4 / (64 * 8.5 * 0.5).
    assert ilc_bound(u, u, 0.0) == pytest.approx(1 / 69632, rel=1e-12)
    point = DiscreteDistribution.point_mass(2.0)
    assert ilc_bound(point, point, 0.4) == pytest.approx(-0.2)


def test_ilc_amplitude_damping_pipeline(qubit_h, rng):
    states = [np.full((2, 2), 0.5)] + [random_pure(2, rng).density().matrix for _ in range(30)]
    for gamma in (0.1, 0.3, 0.5, 0.7):
        g = amplitude_damping(gamma)
        sk = shift_decompose(g, qubit_h)
        for rho in states:
            out = apply_channel(g, rho).matrix
            c1 = private_info(sk, orbit_ensemble(rho, qubit_h, 64)).c1
            loss = timing_information(rho, qubit_h) - timing_information(out, qubit_h)
            bound = ilc_bound(energy_distribution(rho, qubit_h), energy_distribution(out, qubit_h), max(c1, 0.0))
            assert bound <= loss + 1e-9


def test_phase_covariant_clone_examples():
    w = np.linalg.eigvalsh(phase_covariant_clone((1.0, 0.0)).matrix)
    assert w.tolist() == pytest.approx([0.14645, 0.85355], abs=1e-5)
    assert np.allclose(phase_covariant_clone((0.0, 0.0)).matrix, np.eye(2) / 2)
    clones = StateEnsemble.uniform([phase_covariant_clone(p) for p in equatorial_orbit_states(64)])
    assert holevo_information(clones).bits == pytest.approx(0.399, abs=1e-3)
    with pytest.raises(ValueError):
        phase_covariant_clone((1.0, 0.5))


def test_covariant_channels_commute_with_time_average(rng):
    h = HamiltonianSpec.diagonal([0, 1, 2])
    for seed in range(5):
        g = random_covariant_channel(h, seed).channel
        assert covariant_average_gap(g, random_density(3, rng), h) < 1e-6
