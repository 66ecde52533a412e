"""Entropies, relative entropy, Holevo and timing information.

Everything is computed in nats. ``InfoValue`` is a float carrying nats with a
``bits`` view for reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    DensityMatrix,
    DimensionError,
    HamiltonianSpec,
    StateEnsemble,
    dephase,
    evolve,
)

LN2 = math.log(2.0)
SUPPORT_MERGE_TOL = 1e-9
DEFAULT_ORBIT_SAMPLES = 64


class InfoValue(float):
    """An information quantity in nats (may be +inf for relative entropy)."""

    @property
    def nats(self) -> float:
        return float(self)

    @property
    def bits(self) -> float:
        return float(self) / LN2

    def in_units(self, unit: str) -> float:
        if unit == "nats":
            return self.nats
        if unit == "bits":
            return self.bits
        raise ValueError(f"unknown unit {unit!r}")

    @classmethod
    def from_bits(cls, bits: float) -> "InfoValue":
        return cls(bits * LN2)

    def __repr__(self) -> str:
        return f"InfoValue({float(self):.12g} nats)"


def _xlogx_sum(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def entropy_of_spectrum(eigs: np.ndarray) -> float:
    # PSD drift: tiny negative eigenvalues count as zero
    eigs = np.where(eigs < 0, 0.0, eigs)
    return _xlogx_sum(eigs)


def von_neumann_entropy(rho) -> InfoValue:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return InfoValue(entropy_of_spectrum(np.linalg.eigvalsh(m)))


def batched_entropies(mats: np.ndarray) -> np.ndarray:
    """Von Neumann entropies of a stack of Hermitian matrices, shape (n, d, d)."""
    eigs = np.clip(np.linalg.eigvalsh(mats), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(eigs > 0, -eigs * np.log(np.where(eigs > 0, eigs, 1.0)), 0.0)
    return terms.sum(axis=-1)


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability mass function on a strictly increasing real support."""

    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.support, dtype=float).ravel()
        p = np.asarray(self.probs, dtype=float).ravel()
        if s.shape != p.shape or s.size == 0:
            raise ValueError("support and probs must be non-empty and equal length")
        if np.any(np.diff(s) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(p < -1e-15) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities must be non-negative and sum to 1 (sum={p.sum()!r})")
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))

    @classmethod
    def from_pairs(cls, values, probs, tol: float = SUPPORT_MERGE_TOL) -> "DiscreteDistribution":
        """Build from unsorted values, merging any within ``tol`` of each other."""
        values = np.asarray(values, dtype=float).ravel()
        probs = np.asarray(probs, dtype=float).ravel()
        order = np.argsort(values, kind="stable")
        values, probs = values[order], probs[order]
        starts = _group_starts(values, tol)
        return cls(values[starts], np.add.reduceat(probs, starts))

    @classmethod
    def point_mass(cls, value: float) -> "DiscreteDistribution":
        return cls([value], [1.0])

    @classmethod
    def uniform(cls, values) -> "DiscreteDistribution":
        values = np.sort(np.asarray(values, dtype=float))
        return cls(values, np.full(len(values), 1.0 / len(values)))

    def mean(self) -> float:
        return float(self.support @ self.probs)

    def variance(self) -> float:
        return float(((self.support - self.mean()) ** 2) @ self.probs)

    def raw_moment(self, k: int) -> float:
        return float((self.support ** k) @ self.probs)

    def to_json(self) -> dict:
        return {"support": self.support.tolist(), "probs": self.probs.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "DiscreteDistribution":
        return cls(data["support"], data["probs"])


def shannon(dist) -> InfoValue:
    """Shannon entropy of a distribution, a joint table, or a raw probability array."""
    p = dist.probs if hasattr(dist, "probs") else np.asarray(dist, dtype=float)
    return InfoValue(_xlogx_sum(np.ravel(p)))


def conditional_entropy(joint, given: str = "Y") -> InfoValue:
    """S(X|Y) (``given="Y"``) or S(Y|X) (``given="X"``) of a joint table P[x, y]."""
    p = joint.probs if hasattr(joint, "probs") else np.asarray(joint, dtype=float)
    marginal = p.sum(axis=0) if given == "Y" else p.sum(axis=1)
    return InfoValue(_xlogx_sum(p.ravel()) - _xlogx_sum(marginal))


def mutual_information(joint) -> InfoValue:
    p = joint.probs if hasattr(joint, "probs") else np.asarray(joint, dtype=float)
    return InfoValue(_xlogx_sum(p.sum(axis=1)) + _xlogx_sum(p.sum(axis=0)) - _xlogx_sum(p.ravel()))


def _group_starts(sorted_values: np.ndarray, tol: float) -> np.ndarray:
    new_group = np.ones(len(sorted_values), dtype=bool)
    new_group[1:] = np.diff(sorted_values) >= tol
    return np.flatnonzero(new_group)


def align(p: DiscreteDistribution, q: DiscreteDistribution, tol: float = SUPPORT_MERGE_TOL):
    """Put two distributions on the union of their supports (points within ``tol`` merged)."""
    values = np.concatenate([p.support, q.support])
    order = np.argsort(values, kind="stable")
    starts = _group_starts(values[order], tol)
    n = len(p.support)
    pp = np.add.reduceat(np.concatenate([p.probs, np.zeros(len(q.support))])[order], starts)
    qq = np.add.reduceat(np.concatenate([np.zeros(n), q.probs])[order], starts)
    return values[order][starts], pp, qq


def relative_entropy(p: DiscreteDistribution, q: DiscreteDistribution) -> InfoValue:
    """Kullback-Leibler divergence K(p||q) in nats; +inf if p is not dominated by q."""
    _, pp, qq = align(p, q)
    mask = pp > 0
    if np.any(qq[mask] <= 0):
        return InfoValue(math.inf)
    return InfoValue(float(np.sum(pp[mask] * np.log(pp[mask] / qq[mask]))))


def l1_distance(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    _, pp, qq = align(p, q)
    return float(np.abs(pp - qq).sum())


def holevo_information(e: StateEnsemble) -> InfoValue:
    mats = e.stacked()
    avg = np.einsum("k,kij->ij", e.weights, mats)
    value = von_neumann_entropy(avg) - float(e.weights @ batched_entropies(mats))
    return InfoValue(value)


def holevo_from_stack(weights: np.ndarray, mats: np.ndarray) -> float:
    """Holevo information of a raw stack of density matrices (no validation)."""
    avg = np.einsum("k,kij->ij", weights, mats)
    return entropy_of_spectrum(np.linalg.eigvalsh(avg)) - float(weights @ batched_entropies(mats))


def timing_information(rho, h: HamiltonianSpec) -> InfoValue:
    """S(dephased rho) - S(rho)."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if m.shape[0] != h.dim:
        raise DimensionError(f"state dim {m.shape[0]} != Hamiltonian dim {h.dim}")
    return InfoValue(von_neumann_entropy(dephase(m, h)) - von_neumann_entropy(m))


def orbit_ensemble(rho, h: HamiltonianSpec, samples: int = DEFAULT_ORBIT_SAMPLES) -> StateEnsemble:
    """Uniform ensemble of ``samples`` equally spaced points on the time orbit of rho.

    Only integer spectra are accepted; their period is 2*pi.
    """
    if samples < 2:
        raise ValueError("need at least 2 orbit samples")
    if not h.is_integer:
        raise ValueError("orbit period is only certified for integer spectra")
    tau = 2.0 * math.pi
    states = tuple(evolve(rho, h, k * tau / samples) for k in range(samples))
    return StateEnsemble.uniform(states)


def binary_entropy(p: float) -> float:
    return _xlogx_sum(np.array([p, 1.0 - p]))
