"""Finite-dimensional quantum states, Hamiltonians, dynamics and channels.

Hamiltonians are stored spectrally (distinct eigenvalues plus orthogonal
projections), so evolution and dephasing never re-diagonalize. Energies are
dimensionless with hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ATOL = 1e-10
EIGEN_MERGE_TOL = 1e-9


class DimensionError(ValueError):
    """Operands have incompatible dimensions."""


def _as_square(matrix, name: str = "matrix") -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix."""

    matrix: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = _as_square(self.matrix, "density matrix")
        object.__setattr__(self, "matrix", m)
        if self.check:
            if np.max(np.abs(m - m.conj().T)) > ATOL:
                raise ValueError("density matrix is not Hermitian")
            if abs(np.trace(m) - 1.0) > ATOL:
                raise ValueError(f"density matrix trace is {np.trace(m).real:.3g}, not 1")
            if np.linalg.eigvalsh(m)[0] < -ATOL:
                raise ValueError("density matrix has a negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return self.purity() > 1.0 - tol

    @classmethod
    def from_pure(cls, psi: "PureState | np.ndarray") -> "DensityMatrix":
        v = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).ravel()
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("pure state amplitudes must have unit norm")
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self)

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return cls(v)


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """Spectral data of a Hamiltonian: distinct eigenvalues and their projections."""

    eigenvalues: np.ndarray
    projections: tuple
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float).ravel()
        projs = tuple(_as_square(p, "projection") for p in self.projections)
        if len(vals) != len(projs) or not projs:
            raise ValueError("need one projection per eigenvalue")
        dim = projs[0].shape[0]
        if any(p.shape[0] != dim for p in projs):
            raise DimensionError("projections differ in dimension")
        order = np.argsort(vals)
        vals = vals[order]
        projs = tuple(projs[i] for i in order)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "projections", projs)
        if self.check:
            if np.any(np.diff(vals) < EIGEN_MERGE_TOL):
                raise ValueError("eigenvalues must be pairwise distinct")
            total = np.zeros((dim, dim), dtype=complex)
            for i, p in enumerate(projs):
                if np.max(np.abs(p - p.conj().T)) > ATOL or np.max(np.abs(p @ p - p)) > ATOL:
                    raise ValueError("projection is not an orthogonal projector")
                for q in projs[i + 1:]:
                    if np.max(np.abs(p @ q)) > ATOL:
                        raise ValueError("projections are not mutually orthogonal")
                total += p
            if np.max(np.abs(total - np.eye(dim))) > ATOL:
                raise ValueError("projections do not sum to the identity")

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return sum(x * p for x, p in zip(self.eigenvalues, self.projections))

    @property
    def ranks(self) -> list[int]:
        return [int(round(np.trace(p).real)) for p in self.projections]

    @property
    def is_integer(self) -> bool:
        """True when every eigenvalue is an integer, so the dynamics has period 2*pi."""
        return bool(np.all(np.abs(self.eigenvalues - np.round(self.eigenvalues)) < EIGEN_MERGE_TOL))

    def propagator(self, t: float) -> np.ndarray:
        return sum(np.exp(-1j * x * t) * p for x, p in zip(self.eigenvalues, self.projections))

    @classmethod
    def diagonal(cls, energies: Sequence[float]) -> "HamiltonianSpec":
        energies = np.asarray(energies, dtype=float)
        return cls.from_matrix(np.diag(energies))

    @classmethod
    def from_matrix(cls, h) -> "HamiltonianSpec":
        h = _as_square(h, "Hamiltonian")
        if np.max(np.abs(h - h.conj().T)) > ATOL:
            raise ValueError("Hamiltonian is not Hermitian")
        w, v = np.linalg.eigh(h)
        return cls._grouped(w, [np.outer(v[:, i], v[:, i].conj()) for i in range(len(w))])

    @classmethod
    def _grouped(cls, values, rank_one) -> "HamiltonianSpec":
        order = np.argsort(values)
        eigs, projs = [], []
        for i in order:
            if eigs and abs(values[i] - eigs[-1]) < EIGEN_MERGE_TOL:
                projs[-1] = projs[-1] + rank_one[i]
            else:
                eigs.append(float(values[i]))
                projs.append(rank_one[i])
        return cls(np.array(eigs), tuple(projs))


@dataclass(frozen=True, eq=False)
class StateEnsemble:
    states: tuple
    weights: np.ndarray

    def __post_init__(self):
        states = tuple(s if isinstance(s, DensityMatrix) else DensityMatrix(s) for s in self.states)
        w = np.asarray(self.weights, dtype=float).ravel()
        if len(states) != len(w) or not states:
            raise ValueError("ensemble needs one weight per state")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("ensemble weights must be non-negative and sum to 1")
        if len({s.dim for s in states}) != 1:
            raise DimensionError("ensemble states differ in dimension")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self) -> int:
        return len(self.states)

    def stacked(self) -> np.ndarray:
        return np.stack([s.matrix for s in self.states])

    def average(self) -> np.ndarray:
        return np.einsum("k,kij->ij", self.weights, self.stacked())

    @classmethod
    def uniform(cls, states) -> "StateEnsemble":
        states = tuple(states)
        return cls(states, np.full(len(states), 1.0 / len(states)))


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus: tuple
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        ops = tuple(np.asarray(a, dtype=complex) for a in self.kraus)
        if not ops or any(a.ndim != 2 for a in ops):
            raise ValueError("need at least one 2D Kraus operator")
        if len({a.shape for a in ops}) != 1:
            raise DimensionError("Kraus operators differ in shape")
        object.__setattr__(self, "kraus", ops)
        if self.check:
            err = completeness_error(ops)
            if err > ATOL:
                raise ValueError(f"Kraus operators are not trace preserving (error {err:.2e})")

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def __call__(self, rho):
        return apply_channel(self, rho)


def completeness_error(kraus) -> float:
    d = kraus[0].shape[1]
    total = sum(a.conj().T @ a for a in kraus)
    return float(np.max(np.abs(total - np.eye(d))))


def _matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def evolve(rho, h: HamiltonianSpec, t: float) -> DensityMatrix:
    m = _matrix(rho)
    if m.shape[0] != h.dim:
        raise DimensionError(f"state dim {m.shape[0]} != Hamiltonian dim {h.dim}")
    u = h.propagator(t)
    return DensityMatrix(u @ m @ u.conj().T, check=False)


def dephase(rho, h: HamiltonianSpec) -> DensityMatrix:
    """Time average of the orbit: sum over energy projections R rho R."""
    m = _matrix(rho)
    if m.shape[0] != h.dim:
        raise DimensionError(f"state dim {m.shape[0]} != Hamiltonian dim {h.dim}")
    return DensityMatrix(sum(p @ m @ p for p in h.projections), check=False)


def tensor(a, b):
    """Kronecker product of states, Kronecker sum of Hamiltonians."""
    if isinstance(a, HamiltonianSpec) and isinstance(b, HamiltonianSpec):
        values, blocks = [], []
        for x, r in zip(a.eigenvalues, a.projections):
            for y, q in zip(b.eigenvalues, b.projections):
                values.append(x + y)
                blocks.append(np.kron(r, q))
        return HamiltonianSpec._grouped(np.array(values), blocks)
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix), check=False)
    raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")


def partial_trace(rho, dims: tuple[int, int], keep: str = "A") -> DensityMatrix:
    m = _matrix(rho)
    da, db = dims
    if da * db != m.shape[0]:
        raise DimensionError(f"dims {dims} do not factor dimension {m.shape[0]}")
    t = m.reshape(da, db, da, db)
    if keep == "A":
        out = np.einsum("ijkj->ik", t)
    elif keep == "B":
        out = np.einsum("ijil->jl", t)
    else:
        raise ValueError("keep must be 'A' or 'B'")
    return DensityMatrix(out, check=False)


def apply_channel(g: KrausChannel, rho) -> DensityMatrix:
    m = _matrix(rho)
    if m.shape[0] != g.dim_in:
        raise DimensionError(f"state dim {m.shape[0]} != channel input dim {g.dim_in}")
    return DensityMatrix(sum(a @ m @ a.conj().T for a in g.kraus), check=False)


# ---------------------------------------------------------------------------
# Standard channels
# ---------------------------------------------------------------------------

def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=complex),))


def unitary_channel(u) -> KrausChannel:
    return KrausChannel((np.asarray(u, dtype=complex),))


def full_dephasing(dim: int) -> KrausChannel:
    ops = []
    for i in range(dim):
        a = np.zeros((dim, dim), dtype=complex)
        a[i, i] = 1.0
        ops.append(a)
    return KrausChannel(tuple(ops))


def amplitude_damping(gamma: float) -> KrausChannel:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    a0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    a1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return KrausChannel((a0, a1))


def thermal_amplitude_damping(gamma: float, ground_population: float) -> KrausChannel:
    """Generalized amplitude damping whose fixed point is diag(p, 1 - p)."""
    p = ground_population
    if not 0.0 <= p <= 1.0:
        raise ValueError("ground population must lie in [0, 1]")
    down = amplitude_damping(gamma).kraus
    up = (
        np.array([[np.sqrt(1.0 - gamma), 0.0], [0.0, 1.0]], dtype=complex),
        np.array([[0.0, 0.0], [np.sqrt(gamma), 0.0]], dtype=complex),
    )
    ops = [np.sqrt(p) * a for a in down] + [np.sqrt(1.0 - p) * a for a in up]
    return KrausChannel(tuple(a for a in ops if np.linalg.norm(a) > 0))


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed for instance ``index`` of a run seeded with ``master_seed``."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, np.uint64)[0])


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def haar_isometry(rows: int, cols: int, seed=None) -> np.ndarray:
    """Haar-random isometry (rows >= cols) via QR with phase correction."""
    rng = _rng(seed)
    q, r = np.linalg.qr(_ginibre(rng, rows, cols))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_pure(dim: int, seed=None) -> PureState:
    if dim < 2:
        raise ValueError("dim must be at least 2")
    v = _ginibre(_rng(seed), dim, 1).ravel()
    return PureState(v / np.linalg.norm(v))


def random_density(dim: int, seed=None) -> DensityMatrix:
    if dim < 2:
        raise ValueError("dim must be at least 2")
    g = _ginibre(_rng(seed), dim, dim)
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return DensityMatrix(m / np.trace(m).real)


def random_channel(dim: int, seed=None, env_dim: int | None = None) -> KrausChannel:
    """Channel from a Haar-random isometry into system (x) environment, environment traced."""
    if dim < 2:
        raise ValueError("dim must be at least 2")
    env_dim = dim if env_dim is None else env_dim
    v = haar_isometry(dim * env_dim, dim, seed).reshape(dim, env_dim, dim)
    return KrausChannel(tuple(v[:, e, :] for e in range(env_dim)))


def random_unitary(dim: int, seed=None) -> np.ndarray:
    return haar_isometry(dim, dim, seed)
