import math

import numpy as np
import pytest

from timinginfo.covariant import CovarianceViolation
from timinginfo.infomeasures import LN2
from timinginfo.qcore import (
    HamiltonianSpec,
    amplitude_damping,
    apply_channel,
    dephase,
    full_dephasing,
    identity_channel,
    random_density,
    random_pure,
    thermal_amplitude_damping,
    unitary_channel,
)
from timinginfo.thermo import (
    THERMO_CSV_FIELDS,
    PassivityViolation,
    ThermoParams,
    classical_free_energy_bound,
    decompose_free_energy,
    end_to_end_bound,
    free_energy,
    free_energy_loss_bound,
    gibbs_ground_population,
    gibbs_state,
    mean_energy,
    passive_covariant_suite,
    passivity_check,
    run_thermo_suite,
)

KT1 = ThermoParams(1.0)
SWAP = np.array([[0, 1], [1, 0]])


def test_params_validation():
    with pytest.raises(ValueError):
        ThermoParams(0.0)
    with pytest.raises(ValueError):
        ThermoParams(-1.0)


def test_free_energy_examples(plus, qubit_h):
    assert free_energy(plus, qubit_h, KT1) == pytest.approx(0.5)
    assert free_energy(np.eye(2) / 2, qubit_h, KT1) == pytest.approx(0.5 - LN2)
    assert free_energy(np.eye(2) / 2, qubit_h, KT1) == pytest.approx(-0.1931, abs=1e-4)


def test_gibbs_state_minimizes_free_energy(rng):
    h = HamiltonianSpec.diagonal([0, 1, 3])
    for kt in (0.3, 1.0, 4.0):
        p = ThermoParams(kt)
        f_min = free_energy(gibbs_state(h, p), h, p)
        assert f_min == pytest.approx(-kt * math.log(sum(math.exp(-e / kt) for e in (0, 1, 3))))
        for _ in range(1000 // 3):
            assert free_energy(random_density(3, rng), h, p) >= f_min - 1e-12


def test_decomposition_examples(plus, qubit_h):
    r = decompose_free_energy(plus, qubit_h, KT1)
    assert r.f == pytest.approx(0.5)
    assert r.kt_times_info == pytest.approx(LN2)
    assert r.f_bar == pytest.approx(0.5 - LN2)
    stationary = decompose_free_energy(np.diag([0.3, 0.7]), qubit_h, KT1)
    assert stationary.kt_times_info == pytest.approx(0.0, abs=1e-12)
    assert stationary.f == pytest.approx(stationary.f_bar)


def test_decomposition_identity_random(rng):
    for _ in range(1000):
        d = int(rng.integers(2, 5))
        h = HamiltonianSpec.diagonal(rng.integers(0, 4, size=d))
        p = ThermoParams(float(rng.choice([0.1, 1.0, 10.0])))
        rho = random_density(d, rng) if rng.random() < 0.5 else random_pure(d, rng).density()
        assert abs(mean_energy(rho, h) - mean_energy(dephase(rho, h), h)) <= 1e-10
        assert abs(decompose_free_energy(rho, h, p).identity_residual) <= 1e-9


def test_passivity_examples(qubit_h):
    assert passivity_check(identity_channel(2), qubit_h, KT1)[0]
    assert passivity_check(full_dephasing(2), qubit_h, KT1)[0]
    assert not passivity_check(unitary_channel(SWAP), qubit_h, KT1)[0]
    ground = np.diag([1.0, 0.0])
    assert free_energy(apply_channel(unitary_channel(SWAP), ground), qubit_h, KT1) > free_energy(ground, qubit_h, KT1)


def test_plain_amplitude_damping_is_not_passive(qubit_h):
    # It drives every state to the ground state, which has more free energy than the Gibbs state.
    assert not passivity_check(amplitude_damping(0.3), qubit_h, KT1)[0]


def test_thermal_amplitude_damping_is_passive(qubit_h):
    for kt in (0.2, 1.0, 5.0):
        p = ThermoParams(kt)
        g = thermal_amplitude_damping(0.3, gibbs_ground_population(1.0, p))
        assert passivity_check(g, qubit_h, p)[0]


def test_free_energy_loss_examples(plus, qubit_h):
    lhs, rhs = free_energy_loss_bound(plus, identity_channel(2), qubit_h, KT1)
    assert lhs == pytest.approx(0.0, abs=1e-12) and rhs == pytest.approx(0.0, abs=1e-12)
    lhs, rhs = free_energy_loss_bound(plus, full_dephasing(2), qubit_h, KT1)
    assert lhs == pytest.approx(LN2) and rhs == pytest.approx(LN2)


def test_free_energy_loss_rejects_bad_channels(plus, qubit_h):
    with pytest.raises(CovarianceViolation):
        free_energy_loss_bound(plus, unitary_channel(np.array([[1, 1], [1, -1]]) / math.sqrt(2)), qubit_h, KT1)
    with pytest.raises(PassivityViolation):
        free_energy_loss_bound(plus, amplitude_damping(0.3), qubit_h, KT1)


def test_free_energy_loss_on_equatorial_states(qubit_h, rng):
    p = KT1
    g = passive_covariant_suite(qubit_h, p)["amplitude_damping"]
    for phase in rng.uniform(0, 2 * math.pi, size=100):
        psi = np.array([1.0, np.exp(1j * phase)]) / math.sqrt(2)
        lhs, rhs = free_energy_loss_bound(np.outer(psi, psi.conj()), g, qubit_h, p, verify=False)
        assert lhs >= rhs - 1e-9


def test_classical_free_energy_bound_examples():
    r = classical_free_energy_bound(0.2, 0.0, KT1)
    assert r.capacity_bound == pytest.approx(0.4)
    assert classical_free_energy_bound(0.2, 0.2 * 3.0, ThermoParams(3.0)).capacity_bound == pytest.approx(0.0, abs=1e-15)
    r = classical_free_energy_bound(0.2, 0.0, ThermoParams(2.0))
    assert r.min_free_energy_loss == pytest.approx(0.4)
    assert r.printed_corollary == pytest.approx(0.2)


def test_classical_bound_vacuous_for_dephasing(plus, qubit_h):
    f_loss, _ = free_energy_loss_bound(plus, full_dephasing(2), qubit_h, KT1)
    # The trivial split caps the minimal broadcasting loss at half the timing information.
    assert classical_free_energy_bound(LN2 / 2, f_loss, KT1).capacity_bound <= 0


def test_end_to_end_examples(plus, qubit_h):
    lhs, rhs = end_to_end_bound(np.diag([1.0, 0.0]), identity_channel(2), qubit_h, KT1, cp=0.3)
    assert rhs == pytest.approx(-0.15) and lhs >= rhs
    lhs, rhs = end_to_end_bound(plus, full_dephasing(2), qubit_h, KT1, cp=0.0)
    assert lhs == pytest.approx(LN2)
    assert rhs == pytest.approx(1 / 69632, rel=1e-9)
    lhs, rhs = end_to_end_bound(plus, identity_channel(2), qubit_h, KT1, cp=10.0)
    assert rhs < 0 <= lhs + 1e-12
    with pytest.raises(ValueError):
        end_to_end_bound(np.eye(2) / 2, identity_channel(2), qubit_h, KT1, cp=0.0)


def test_thermo_suite():
    rows = run_thermo_suite(100, seed=3)
    assert {r["channel"] for r in rows} == {"identity", "dephasing", "amplitude_damping"}
    assert len(rows) == 300
    assert all(set(r) == set(THERMO_CSV_FIELDS) for r in rows)
    assert sum(r["violation"] for r in rows) == 0
    assert max(abs(r["identity_residual"]) for r in rows) <= 1e-9
    assert rows == run_thermo_suite(100, seed=3)
