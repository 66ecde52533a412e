import logging
import math

import numpy as np
import pytest

from timinginfo.broadcastopt import (
    BroadcastMap,
    broadcast_objective,
    conjecture_probe,
    copy_map,
    ensemble_commutes,
    measure_prepare_baseline,
    optimize_broadcast,
    shrink_cloner_map,
    symmetric_cloner_map,
    trivial_split_map,
)
from timinginfo.covariant import PAULI_X
from timinginfo.infomeasures import LN2, binary_entropy, orbit_ensemble
from timinginfo.qcore import DensityMatrix, StateEnsemble, haar_isometry

SIGMA_X_POVM = [(np.eye(2) + PAULI_X) / 2, (np.eye(2) - PAULI_X) / 2]


@pytest.fixture
def orbit(plus, qubit_h):
    return orbit_ensemble(plus, qubit_h, 64)


@pytest.fixture
def basis_ensemble():
    return StateEnsemble.uniform([DensityMatrix(np.diag([1.0, 0.0])), DensityMatrix(np.diag([0.0, 1.0]))])


def test_broadcast_map_validation():
    with pytest.raises(ValueError):
        BroadcastMap(np.ones((4, 2)), (2, 2, 2, 1))
    with pytest.raises(ValueError):
        BroadcastMap(np.eye(4)[:, :2], (2, 2, 2, 2))


def test_isometric_embedding_into_a(orbit):
    r = broadcast_objective(trivial_split_map(2, 1, 1), orbit)
    assert r.info_a == pytest.approx(r.info_orig, abs=1e-12)
    assert r.info_b == pytest.approx(0.0, abs=1e-12)
    assert r.avg == pytest.approx(r.info_orig / 2, abs=1e-12)
    assert r.achieved_delta == pytest.approx(r.info_orig - r.avg, abs=1e-15)


def test_shrink_cloner_matches_clone_marginals(orbit):
    r = broadcast_objective(shrink_cloner_map(), orbit)
    assert r.info_a.bits == pytest.approx(0.399, abs=1e-3)
    assert r.info_a == pytest.approx(r.info_b, abs=1e-12)
    expected = LN2 - binary_entropy(0.5 + 1 / (2 * math.sqrt(2)))
    assert r.avg == pytest.approx(expected, abs=1e-3 * LN2)


def test_ancilla_free_cloner(orbit):
    r = broadcast_objective(symmetric_cloner_map(), orbit)
    # Copies have Bloch vector (cos t / sqrt 2, sin t / sqrt 2, 1/2): length sqrt(3)/2.
    expected = binary_entropy(0.75) - binary_entropy(0.5 + math.sqrt(3) / 4)
    assert r.avg == pytest.approx(expected, abs=1e-9)
    assert r.avg.bits == pytest.approx(0.457, abs=1e-3)


def test_single_state_ensemble_gives_zero(plus):
    e = StateEnsemble.uniform([plus])
    for m in (symmetric_cloner_map(), shrink_cloner_map(), trivial_split_map(2)):
        r = broadcast_objective(m, e)
        assert (r.info_orig, r.info_a, r.info_b) == pytest.approx((0, 0, 0), abs=1e-12)
    assert optimize_broadcast(e, (2, 2, 1), restarts=1, max_iter=20).avg == pytest.approx(0.0, abs=1e-12)


def test_objective_dimension_mismatch(orbit):
    with pytest.raises(ValueError):
        broadcast_objective(BroadcastMap(np.eye(9)[:, :3], (3, 3, 3, 1)), orbit)


def test_data_processing_on_random_maps(orbit):
    for seed in range(20):
        r = broadcast_objective(BroadcastMap(haar_isometry(8, 2, seed), (2, 2, 2, 2)), orbit)
        assert r.info_a <= r.info_orig + 1e-6 and r.info_b <= r.info_orig + 1e-6


def test_copy_map_on_commuting_ensemble(basis_ensemble):
    r = broadcast_objective(copy_map(2), basis_ensemble)
    assert r.achieved_delta == pytest.approx(0.0, abs=1e-12)


def test_measure_prepare_examples(orbit, basis_ensemble):
    full = measure_prepare_baseline(basis_ensemble, [np.diag([1, 0]), np.diag([0, 1])])
    assert full.bits == pytest.approx(1.0)
    sx = measure_prepare_baseline(orbit, SIGMA_X_POVM)
    # 64-sample value; the continuous orbit gives 1/ln 2 - 1 bit.
    assert sx.bits == pytest.approx(0.44270827458378, abs=1e-10)
    assert sx.bits == pytest.approx(1 / LN2 - 1, abs=1e-4)
    assert measure_prepare_baseline(orbit, [np.eye(2) / 2, np.eye(2) / 2]) == pytest.approx(0.0, abs=1e-12)


def test_measure_prepare_matches_quadrature(plus, qubit_h):
    # P(+|t) = (1 + cos t)/2; label-outcome mutual information by direct summation.
    t = 2 * math.pi * np.arange(64) / 64
    p_plus = (1 + np.cos(t)) / 2
    cond = np.stack([p_plus, 1 - p_plus], axis=1)
    mi = np.log(2) - np.mean([-sum(c * math.log(c) for c in row if c > 0) for row in cond])
    assert measure_prepare_baseline(orbit_ensemble(plus, qubit_h, 64), SIGMA_X_POVM) == pytest.approx(mi, abs=1e-12)


def test_measure_prepare_rejects_invalid_povm(orbit):
    with pytest.raises(ValueError):
        measure_prepare_baseline(orbit, [np.eye(2)] * 2)
    with pytest.raises(ValueError):
        measure_prepare_baseline(orbit, [np.diag([1.5, 0.5]), np.diag([-0.5, 0.5])])
    with pytest.raises(ValueError):
        measure_prepare_baseline(orbit, [np.eye(3)])


def test_optimizer_rejects_small_output(orbit):
    with pytest.raises(ValueError):
        optimize_broadcast(orbit, (1, 1, 1))


def test_optimizer_is_deterministic(orbit):
    a = optimize_broadcast(orbit, (2, 2, 1), restarts=2, seed=4, max_iter=30)
    b = optimize_broadcast(orbit, (2, 2, 1), restarts=2, seed=4, max_iter=30)
    assert np.array_equal(a.map.isometry, b.map.isometry)
    assert a.trace == b.trace
    assert a.trace["seeds"] != optimize_broadcast(orbit, (2, 2, 1), restarts=2, seed=5, max_iter=1).trace["seeds"]


def test_optimizer_worker_independent(orbit):
    a = optimize_broadcast(orbit, (2, 2, 1), restarts=2, seed=1, max_iter=15)
    b = optimize_broadcast(orbit, (2, 2, 1), restarts=2, seed=1, max_iter=15, workers=2)
    assert np.array_equal(a.map.isometry, b.map.isometry)


def test_optimizer_with_environment_beats_feasible_points(orbit):
    r = optimize_broadcast(orbit, (2, 2, 2), restarts=3, seed=0)
    assert r.avg >= broadcast_objective(symmetric_cloner_map(), orbit).avg - 1e-4
    assert r.avg <= r.info_orig + 1e-6


def test_conjecture_probe(orbit, basis_ensemble, caplog):
    close = broadcast_objective(trivial_split_map(2, 1, 1), orbit)
    with caplog.at_level(logging.INFO, logger="timinginfo.broadcastopt"):
        assert not conjecture_probe(close, orbit)
    assert "best average" in caplog.text
    copied = broadcast_objective(copy_map(2), basis_ensemble)
    assert not conjecture_probe(copied, basis_ensemble)  # commuting: lossless copying is expected
    assert ensemble_commutes(basis_ensemble) and not ensemble_commutes(orbit)
    fake = broadcast_objective(trivial_split_map(2, 1, 1), orbit)
    fake.avg = fake.info_orig
    with caplog.at_level(logging.WARNING, logger="timinginfo.broadcastopt"):
        assert conjecture_probe(fake, orbit)
    assert "ANOMALY" in caplog.text


def test_result_json(orbit):
    data = optimize_broadcast(orbit, (2, 2, 1), restarts=2, seed=0, max_iter=5).to_json()
    assert data["dims"] == {"d": 2, "d_a": 2, "d_b": 2, "d_e": 1}
    assert len(data["optimizer"]["seeds"]) == 2
    assert len(data["isometry"]["re"]) == 4
