"""Free energy of clock signals and the free-energy cost of losing timing information."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariant import CovarianceViolation, check_covariance, ilc_bound
from .energydist import energy_distribution
from .infomeasures import InfoValue, timing_information, von_neumann_entropy
from .qcore import (
    DensityMatrix,
    DimensionError,
    HamiltonianSpec,
    KrausChannel,
    PureState,
    apply_channel,
    dephase,
    derive_seed,
    full_dephasing,
    identity_channel,
    random_density,
    random_pure,
    thermal_amplitude_damping,
)


class PassivityViolation(ValueError):
    """The channel raises the free energy of some input."""


@dataclass(frozen=True)
class ThermoParams:
    kT: float = 1.0

    def __post_init__(self):
        if not self.kT > 0:
            raise ValueError("kT must be positive")


@dataclass(frozen=True)
class FreeEnergyReport:
    f: float
    f_bar: float
    kt_times_info: float

    @property
    def identity_residual(self) -> float:
        return self.f - self.kt_times_info - self.f_bar


def _m(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def mean_energy(rho, h: HamiltonianSpec) -> float:
    m = _m(rho)
    if m.shape[0] != h.dim:
        raise DimensionError(f"state dim {m.shape[0]} != Hamiltonian dim {h.dim}")
    return float(np.real(np.trace(m @ h.matrix)))


def free_energy(rho, h: HamiltonianSpec, p: ThermoParams) -> float:
    """tr(rho H) - kT S(rho), entropy in nats."""
    return mean_energy(rho, h) - p.kT * float(von_neumann_entropy(_m(rho)))


def gibbs_state(h: HamiltonianSpec, p: ThermoParams) -> DensityMatrix:
    weights = np.exp(-(h.eigenvalues - h.eigenvalues.min()) / p.kT)
    m = sum(w * r for w, r in zip(weights, h.projections))
    return DensityMatrix(m / np.trace(m).real)


def decompose_free_energy(rho, h: HamiltonianSpec, p: ThermoParams) -> FreeEnergyReport:
    """F(rho) split into kT times the timing information plus F of the dephased state."""
    m = _m(rho)
    return FreeEnergyReport(
        f=free_energy(m, h, p),
        f_bar=free_energy(dephase(m, h), h, p),
        kt_times_info=p.kT * float(timing_information(m, h)),
    )


def passivity_check(g: KrausChannel, h: HamiltonianSpec, p: ThermoParams, samples: int = 200, seed: int = 0) -> tuple[bool, float]:
    """Empirical passivity: F(G(rho)) <= F(rho) on random states, eigenstates and the Gibbs state.

    Returns (passed, worst margin) where the margin is F(rho) - F(G(rho)).
    """
    if g.dim_in != g.dim_out or g.dim_in != h.dim:
        raise DimensionError("channel must be square and match the Hamiltonian")
    rng = np.random.default_rng(seed)
    probes = [gibbs_state(h, p).matrix]
    for r in h.projections:
        w, v = np.linalg.eigh(r)
        probes.extend(np.outer(v[:, i], v[:, i].conj()) for i in np.flatnonzero(w > 0.5))
    probes.extend(random_density(h.dim, rng).matrix for _ in range(samples))
    # Pure random states reach the boundary where passivity is tightest.
    probes.extend(random_pure(h.dim, rng).density().matrix for _ in range(samples))
    worst = min(free_energy(m, h, p) - free_energy(apply_channel(g, m), h, p) for m in probes)
    return worst >= -1e-9, float(worst)


def _require_covariant_passive(g: KrausChannel, h: HamiltonianSpec, p: ThermoParams) -> None:
    ok, dev = check_covariance(g, h)
    if not ok:
        raise CovarianceViolation(f"channel is not covariant (deviation {dev:.2e})")
    ok, margin = passivity_check(g, h, p)
    if not ok:
        raise PassivityViolation(f"channel raises free energy by {-margin:.3g}")


def free_energy_loss_bound(rho, g: KrausChannel, h: HamiltonianSpec, p: ThermoParams, verify: bool = True) -> tuple[float, float]:
    """(F(rho) - F(G(rho)), kT (I(rho) - I(G(rho)))); for covariant passive G the first dominates."""
    if verify:
        _require_covariant_passive(g, h, p)
    m = _m(rho)
    out = apply_channel(g, m).matrix
    lhs = free_energy(m, h, p) - free_energy(out, h, p)
    rhs = p.kT * (float(timing_information(m, h)) - float(timing_information(out, h)))
    return lhs, rhs


@dataclass(frozen=True)
class ClassicalFreeEnergyBound:
    capacity_bound: InfoValue
    min_free_energy_loss: float
    printed_corollary: float


def classical_free_energy_bound(delta_min_estimate: float, f_loss: float, p: ThermoParams) -> ClassicalFreeEnergyBound:
    """Private-capacity lower bound 2 (Delta_min - f_loss / kT), in nats.

    ``min_free_energy_loss`` is kT * Delta_min, the free-energy loss forced on a
    zero-capacity channel by the same inequality. ``printed_corollary`` is the
    alternative reading 2 Delta_min / kT, kept for comparison only.
    """
    return ClassicalFreeEnergyBound(
        capacity_bound=InfoValue(2.0 * (delta_min_estimate - f_loss / p.kT)),
        min_free_energy_loss=p.kT * delta_min_estimate,
        printed_corollary=2.0 * delta_min_estimate / p.kT,
    )


def end_to_end_bound(rho, g: KrausChannel, h: HamiltonianSpec, p: ThermoParams, cp: float, verify: bool = True) -> tuple[float, float]:
    """(free-energy loss, kT * ilc_bound) for a pure input state."""
    m = rho.density().matrix if isinstance(rho, PureState) else _m(rho)
    if np.real(np.trace(m @ m)) < 1 - 1e-9:
        raise ValueError("input state must be pure")
    if verify:
        _require_covariant_passive(g, h, p)
    out = apply_channel(g, m).matrix
    lhs = free_energy(m, h, p) - free_energy(out, h, p)
    rhs = p.kT * float(ilc_bound(energy_distribution(m, h), energy_distribution(out, h), cp))
    return lhs, rhs


def gibbs_ground_population(gap: float, p: ThermoParams) -> float:
    """Ground-state weight of a two-level Gibbs state with the given energy gap."""
    return 1.0 / (1.0 + math.exp(-gap / p.kT))


THERMO_CSV_FIELDS = (
    "index", "seed", "channel", "kT", "f_in", "f_out", "kt_info_in", "kt_info_out",
    "free_energy_loss", "kt_info_loss", "margin", "identity_residual", "violation",
)


def passive_covariant_suite(h: HamiltonianSpec, p: ThermoParams, gamma: float = 0.3) -> dict[str, KrausChannel]:
    """Identity, full dephasing and Gibbs-preserving amplitude damping on a qubit."""
    suite = {"identity": identity_channel(h.dim), "dephasing": full_dephasing(h.dim)}
    if h.dim == 2:
        gap = float(h.eigenvalues[-1] - h.eigenvalues[0])
        suite["amplitude_damping"] = thermal_amplitude_damping(gamma, gibbs_ground_population(gap, p))
    return suite


def run_thermo_suite(inputs: int, seed: int, kT: float = 1.0, h: HamiltonianSpec | None = None) -> list[dict]:
    """Free-energy loss versus kT times timing-information loss on random inputs.

    Half the inputs are pure, half mixed; equatorial states are always included.
    """
    h = HamiltonianSpec.diagonal([0.0, 1.0]) if h is None else h
    p = ThermoParams(kT)
    rows = []
    for name, g in passive_covariant_suite(h, p).items():
        _require_covariant_passive(g, h, p)
        for i in range(inputs):
            s = derive_seed(seed, i)
            rng = np.random.default_rng(s)
            if h.dim == 2 and i % 4 == 0:
                phase = rng.uniform(0, 2 * math.pi)
                rho = PureState(np.array([1.0, np.exp(1j * phase)]) / math.sqrt(2)).density().matrix
            elif i % 2:
                rho = random_pure(h.dim, rng).density().matrix
            else:
                rho = random_density(h.dim, rng).matrix
            out = apply_channel(g, rho).matrix
            f_in, f_out = free_energy(rho, h, p), free_energy(out, h, p)
            ki_in = p.kT * float(timing_information(rho, h))
            ki_out = p.kT * float(timing_information(out, h))
            margin = (f_in - f_out) - (ki_in - ki_out)
            rows.append({
                "index": i,
                "seed": s,
                "channel": name,
                "kT": p.kT,
                "f_in": f_in,
                "f_out": f_out,
                "kt_info_in": ki_in,
                "kt_info_out": ki_out,
                "free_energy_loss": f_in - f_out,
                "kt_info_loss": ki_in - ki_out,
                "margin": margin,
                "identity_residual": decompose_free_energy(rho, h, p).identity_residual,
                "violation": int(margin < -1e-9),
            })
    return rows
