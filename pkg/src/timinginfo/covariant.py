"""Time-covariant channels and their energy-conserving unitary extensions.

A covariant channel admits Kraus operators that each shift energy by a fixed
amount sigma_j, i.e. [H, A_j] = sigma_j A_j. The extension couples every Kraus
operator to its own integer-lattice environment factor whose shift compensates
that energy change, so U commutes with H (x) 1 + 1 (x) H_E and the environment
starts in the zero-energy state |0, ..., 0>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energydist import energy_distribution
from .infomeasures import DiscreteDistribution, InfoValue, align, holevo_from_stack
from .io import matrix_to_json
from .qcore import (
    DensityMatrix,
    DimensionError,
    HamiltonianSpec,
    KrausChannel,
    PureState,
    StateEnsemble,
    apply_channel,
    completeness_error,
    dephase,
    evolve,
    tensor,
)

COVARIANCE_TOL = 1e-8
COMPLETENESS_TOL = 1e-9
MAX_EXTENSION_DIM = 4096


class CovarianceViolation(ValueError):
    """The channel does not commute with the Hamiltonian dynamics."""


@dataclass(frozen=True, eq=False)
class ShiftKraus:
    channel: KrausChannel
    shifts: tuple
    h: HamiltonianSpec

    def __post_init__(self):
        if len(self.shifts) != len(self.channel.kraus):
            raise ValueError("need one shift per Kraus operator")
        hm = self.h.matrix
        for a, s in zip(self.channel.kraus, self.shifts):
            if np.max(np.abs(hm @ a - a @ hm - s * a)) > 1e-9:
                raise CovarianceViolation(f"Kraus operator does not shift energy by {s}")

    @property
    def kraus(self):
        return self.channel.kraus


def gap_set(h: HamiltonianSpec) -> np.ndarray:
    """All differences x - y of eigenvalues, merged within 1e-9."""
    gaps = np.sort(np.subtract.outer(h.eigenvalues, h.eigenvalues).ravel())
    keep = np.ones(len(gaps), dtype=bool)
    keep[1:] = np.diff(gaps) >= 1e-9
    return gaps[keep]


def _sector_split(op: np.ndarray, h: HamiltonianSpec) -> dict:
    """Components sum_{x - y = sigma} R_x op R_y keyed by sigma."""
    parts: dict[float, np.ndarray] = {}
    for x, r in zip(h.eigenvalues, h.projections):
        for y, q in zip(h.eigenvalues, h.projections):
            piece = r @ op @ q
            sigma = float(x - y)
            key = next((k for k in parts if abs(k - sigma) < 1e-9), sigma)
            parts[key] = parts.get(key, 0) + piece
    return parts


def check_covariance(g: KrausChannel, h: HamiltonianSpec, samples: int = 16) -> tuple[bool, float]:
    """Check G(alpha_t(rho)) = alpha_t(G(rho)) and the exact sector test.

    The time test runs on all matrix units at ``samples`` equally spaced times
    over [0, 2*pi). The sector test checks that G maps each energy-gap sector
    R_x M R_y into the sector with the same gap x - y.
    """
    if g.dim_in != g.dim_out or g.dim_in != h.dim:
        raise DimensionError("channel must be square and match the Hamiltonian")
    d = h.dim
    worst = 0.0
    units = []
    for a in range(d):
        for b in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[a, b] = 1.0
            units.append(e)
    for k in range(samples):
        t = 2.0 * math.pi * k / samples
        u = h.propagator(t)
        for e in units:
            lhs = apply_channel(g, u @ e @ u.conj().T).matrix
            out = apply_channel(g, e).matrix
            worst = max(worst, float(np.max(np.abs(lhs - u @ out @ u.conj().T))))
    for e in units:
        for gap_in, block in _sector_split(e, h).items():
            if not np.any(block):
                continue
            image = apply_channel(g, block).matrix
            for gap_out, piece in _sector_split(image, h).items():
                if abs(gap_out - gap_in) > 1e-9:
                    worst = max(worst, float(np.max(np.abs(piece))))
    return worst < COVARIANCE_TOL, worst


def _channel_distance(g1: KrausChannel, g2: KrausChannel) -> float:
    """Largest entry difference of the two channels on all matrix units."""
    d = g1.dim_in
    worst = 0.0
    for a in range(d):
        for b in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[a, b] = 1.0
            worst = max(worst, float(np.max(np.abs(apply_channel(g1, e).matrix - apply_channel(g2, e).matrix))))
    return worst


def shift_decompose(g: KrausChannel, h: HamiltonianSpec) -> ShiftKraus:
    """Split every Kraus operator into pure energy-shift components."""
    ops, shifts = [], []
    for a in g.kraus:
        for sigma, piece in sorted(_sector_split(a, h).items()):
            if np.linalg.norm(piece) >= 1e-10:
                ops.append(piece)
                shifts.append(sigma)
    err = completeness_error(ops)
    if err > COMPLETENESS_TOL:
        raise CovarianceViolation(f"shift components are not complete (error {err:.2e}); channel is not covariant")
    decomposed = KrausChannel(tuple(ops), check=False)
    # The split pieces of any channel are complete; they reproduce the channel only if it is covariant.
    dev = _channel_distance(g, decomposed)
    if dev > COVARIANCE_TOL:
        raise CovarianceViolation(f"shift components change the channel by {dev:.2e}; channel is not covariant")
    return ShiftKraus(decomposed, tuple(shifts), h)


def random_covariant_channel(h: HamiltonianSpec, seed=None, per_shift: int = 1) -> ShiftKraus:
    """Random channel assembled from shift-structured Kraus operators."""
    rng = np.random.default_rng(seed)
    d = h.dim
    ops, shifts = [], []
    for sigma in gap_set(h):
        for _ in range(per_shift):
            raw = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            parts = _sector_split(raw, h)
            piece = next(v for key, v in parts.items() if abs(key - sigma) < 1e-9)
            if np.linalg.norm(piece) > 1e-10:
                ops.append(piece)
                shifts.append(float(sigma))
    total = sum(a.conj().T @ a for a in ops)
    w, v = np.linalg.eigh(total)
    inv_sqrt = v @ np.diag(w ** -0.5) @ v.conj().T
    ops = [a @ inv_sqrt for a in ops]
    return ShiftKraus(KrausChannel(tuple(ops)), tuple(shifts), h)


# ---------------------------------------------------------------------------
# Energy-conserving unitary extension
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UnitaryExtension:
    system_h: HamiltonianSpec
    env_h: HamiltonianSpec
    unitary: np.ndarray
    env_initial: PureState
    window: int
    shifts: tuple
    isometry: np.ndarray
    input_basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.system_h.dim

    @property
    def env_dim(self) -> int:
        return self.env_h.dim

    @property
    def total_h(self) -> HamiltonianSpec:
        return tensor(self.system_h, self.env_h)

    def joint_output(self, rho) -> np.ndarray:
        """U (rho (x) |phi><phi|) U^dagger as a raw matrix."""
        m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
        return self.isometry @ m @ self.isometry.conj().T

    def reduced_outputs(self, rho) -> tuple[np.ndarray, np.ndarray]:
        """(system, environment) marginals of the joint output."""
        t = self.joint_output(rho).reshape(self.dim, self.env_dim, self.dim, self.env_dim)
        return np.einsum("ijkj->ik", t), np.einsum("ijil->jl", t)

    def isometry_error(self) -> float:
        w = self.isometry
        return float(np.max(np.abs(w.conj().T @ w - np.eye(w.shape[1]))))

    def unitarity_error(self) -> float:
        u = self.unitary
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))

    def commutator_norm(self, reachable_only: bool = True) -> float:
        """Spectral norm of [U, H_T], restricted to the input subspace by default."""
        ht = self.total_h.matrix
        comm = self.unitary @ ht - ht @ self.unitary
        if reachable_only:
            comm = comm @ self.input_basis
        return float(np.linalg.norm(comm, 2))

    def initial_energy_residual(self) -> float:
        """|| H_E |phi> ||; zero when phi is a zero-energy eigenstate."""
        return float(np.linalg.norm(self.env_h.matrix @ self.env_initial.amplitudes))

    def reconstruction_error(self, channel: KrausChannel, rho) -> float:
        system, _ = self.reduced_outputs(rho)
        return float(np.max(np.abs(system - apply_channel(channel, rho).matrix)))

    def to_json(self) -> dict:
        return {
            "window": self.window,
            "shifts": list(self.shifts),
            "system_dim": self.dim,
            "env_dim": self.env_dim,
            "env_spectrum": self.env_h.eigenvalues.tolist(),
            "env_levels": [float(v) for v in np.real(np.diag(self.env_h.matrix))],
            "env_initial_index": int(np.argmax(np.abs(self.env_initial.amplitudes))),
            "unitary": matrix_to_json(self.unitary),
            "reachable_basis": matrix_to_json(self.input_basis),
            "reachable_image": matrix_to_json(self.isometry),
        }


def _lattice_shift(window: int) -> np.ndarray:
    """Truncated left shift |n> -> |n-1> on levels -window..window (lowest level annihilated)."""
    n = 2 * window + 1
    s = np.zeros((n, n), dtype=complex)
    for col in range(1, n):
        s[col - 1, col] = 1.0
    return s


def _orthonormal_complement(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the range of the projector ``p``."""
    w, v = np.linalg.eigh((p + p.conj().T) / 2)
    return v[:, w > 0.5]


def build_extension(sk: ShiftKraus, window: int = 1, depth: int = 1) -> UnitaryExtension:
    """U = sum_j A_j (x) S_j on system (x) lattice^k, truncated to |z_j| <= window.

    The truncated operator is an isometry on system (x) |0...0>; it is completed
    to a unitary inside each eigenspace of the total Hamiltonian, so the
    completion conserves energy as well.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    if window < depth:
        raise ValueError(f"window {window} too small for {depth} composed applications")
    d = sk.h.dim
    k = len(sk.kraus)
    levels = 2 * window + 1
    env_dim = levels ** k
    total_dim = d * env_dim
    if total_dim > MAX_EXTENSION_DIM:
        raise ValueError(f"extension dimension {total_dim} exceeds {MAX_EXTENSION_DIM}")

    z = np.arange(-window, window + 1, dtype=float)
    env_levels = np.zeros(env_dim)
    for j, sigma in enumerate(sk.shifts):
        factor = [np.ones(levels)] * k
        factor = factor[:j] + [z] + factor[j + 1:]
        term = factor[0]
        for f in factor[1:]:
            term = np.kron(term, f)
        env_levels += sigma * term
    env_h = HamiltonianSpec.diagonal(env_levels)

    shift = _lattice_shift(window)
    u_trunc = np.zeros((total_dim, total_dim), dtype=complex)
    for j, a in enumerate(sk.kraus):
        s_j = np.eye(1)
        for i in range(k):
            s_j = np.kron(s_j, shift if i == j else np.eye(levels))
        u_trunc += np.kron(a, s_j)

    origin = np.zeros(env_dim, dtype=complex)
    origin[np.ravel_multi_index([window] * k, [levels] * k)] = 1.0
    phi = PureState(origin)
    inputs = np.kron(np.eye(d), origin[:, None])
    isometry = u_trunc @ inputs

    total_h = tensor(sk.h, env_h)
    unitary = isometry @ inputs.conj().T
    in_proj = inputs @ inputs.conj().T
    out_proj = isometry @ isometry.conj().T
    for block in total_h.projections:
        dom = _orthonormal_complement(block - block @ in_proj @ block)
        img = _orthonormal_complement(block - block @ out_proj @ block)
        if dom.shape[1] != img.shape[1]:
            raise CovarianceViolation("energy eigenspace dimensions do not match; extension is not energy conserving")
        unitary = unitary + img @ dom.conj().T

    return UnitaryExtension(
        system_h=sk.h,
        env_h=env_h,
        unitary=unitary,
        env_initial=phi,
        window=window,
        shifts=tuple(sk.shifts),
        isometry=isometry,
        input_basis=inputs,
    )


def energy_transfer_error(ext: UnitaryExtension, rho) -> float:
    """Max difference between total-energy distribution after U and system energy distribution before."""
    before = energy_distribution(rho, ext.system_h)
    after = energy_distribution(ext.joint_output(rho), ext.total_h)
    _, p, q = align(before, after)
    return float(np.max(np.abs(p - q)))


# ---------------------------------------------------------------------------
# Private information and capacity bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrivateInfoReport:
    info_b: InfoValue
    info_e: InfoValue
    c1: InfoValue


def private_info(sk: ShiftKraus, e: StateEnsemble, window: int = 1) -> PrivateInfoReport:
    """I(X:B) - I(X:E) for a fixed input ensemble; a lower bound on the single-copy private capacity."""
    if e.dim != sk.h.dim:
        raise DimensionError("ensemble dimension does not match the channel")
    ext = build_extension(sk, window)
    outs = [ext.reduced_outputs(s.matrix) for s in e.states]
    info_b = holevo_from_stack(e.weights, np.stack([o[0] for o in outs]))
    info_e = holevo_from_stack(e.weights, np.stack([o[1] for o in outs]))
    return PrivateInfoReport(InfoValue(info_b), InfoValue(info_e), InfoValue(info_b - info_e))


def info_loss_capacity_bound(delta_min_estimate: float, info_in: float, info_out: float) -> InfoValue:
    """2 (Delta_min - (I_in - I_out)); non-positive values are vacuous."""
    return InfoValue(2.0 * (delta_min_estimate - (info_in - info_out)))


def ilc_bound(in_dist: DiscreteDistribution, out_dist: DiscreteDistribution, cp: float) -> InfoValue:
    """Lower bound on the timing-information loss of a covariant channel, in nats.

    V_in^4 / (64 (9 <E_out^4> + 8 <E_in^4>) <E_in^4>) - cp / 2.
    """
    var_in = in_dist.variance()
    e4_in = in_dist.raw_moment(4)
    e4_out = out_dist.raw_moment(4)
    if var_in <= 0.0 or e4_in <= 0.0:
        return InfoValue(-cp / 2)
    return InfoValue(var_in ** 4 / (64.0 * (9.0 * e4_out + 8.0 * e4_in) * e4_in) - cp / 2)


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def bloch_state(x: float, y: float, z: float = 0.0) -> DensityMatrix:
    if x * x + y * y + z * z > 1.0 + 1e-12:
        raise ValueError("Bloch vector longer than 1")
    return DensityMatrix((np.eye(2) + x * PAULI_X + y * PAULI_Y + z * PAULI_Z) / 2)


def phase_covariant_clone(bloch_xy: tuple[float, float]) -> DensityMatrix:
    """Copy state of the symmetric phase-covariant cloner: equatorial Bloch vector shrunk by 1/sqrt(2)."""
    x, y = bloch_xy
    if x * x + y * y > 1.0 + 1e-12:
        raise ValueError("Bloch vector longer than 1")
    shrink = 1.0 / math.sqrt(2.0)
    return bloch_state(shrink * x, shrink * y)


def equatorial_orbit_states(samples: int) -> list[tuple[float, float]]:
    return [(math.cos(2 * math.pi * k / samples), math.sin(2 * math.pi * k / samples)) for k in range(samples)]


def covariant_average_gap(g: KrausChannel, rho, h: HamiltonianSpec, samples: int = 64) -> float:
    """max |G(dephased rho) - orbit average of G(alpha_t rho)|."""
    avg = sum(apply_channel(g, evolve(rho, h, 2 * math.pi * k / samples)).matrix for k in range(samples)) / samples
    return float(np.max(np.abs(apply_channel(g, dephase(rho, h)).matrix - avg)))
