"""Classical energy statistics of bipartite states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .infomeasures import SUPPORT_MERGE_TOL, DiscreteDistribution, mutual_information
from .qcore import DensityMatrix, DimensionError, HamiltonianSpec


@dataclass(frozen=True, eq=False)
class JointEnergyDistribution:
    """Table P[i, j] = P(X = x_support[i], Y = y_support[j])."""

    x_support: np.ndarray
    y_support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.x_support, dtype=float).ravel()
        ys = np.asarray(self.y_support, dtype=float).ravel()
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (len(xs), len(ys)):
            raise ValueError(f"table shape {p.shape} does not match supports ({len(xs)}, {len(ys)})")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ValueError("supports must be strictly increasing")
        if np.any(p < -1e-15) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("table must be non-negative and sum to 1")
        object.__setattr__(self, "x_support", xs)
        object.__setattr__(self, "y_support", ys)
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))

    def marginal_x(self) -> DiscreteDistribution:
        return DiscreteDistribution(self.x_support, self.probs.sum(axis=1))

    def marginal_y(self) -> DiscreteDistribution:
        return DiscreteDistribution(self.y_support, self.probs.sum(axis=0))

    def swapped(self) -> "JointEnergyDistribution":
        return JointEnergyDistribution(self.y_support, self.x_support, self.probs.T)

    @classmethod
    def product(cls, px: DiscreteDistribution, py: DiscreteDistribution) -> "JointEnergyDistribution":
        return cls(px.support, py.support, np.outer(px.probs, py.probs))


def joint_energy(rho, ha: HamiltonianSpec, hb: HamiltonianSpec) -> JointEnergyDistribution:
    """P(x, y) = tr(rho (R_x (x) Q_y)) for simultaneous local energy measurements."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape[0] != ha.dim * hb.dim:
        raise DimensionError(f"state dim {m.shape[0]} != {ha.dim} * {hb.dim}")
    table = np.empty((len(ha.eigenvalues), len(hb.eigenvalues)))
    for i, r in enumerate(ha.projections):
        for j, q in enumerate(hb.projections):
            table[i, j] = np.real(np.trace(m @ np.kron(r, q)))
    table = np.clip(table, 0.0, None)
    return JointEnergyDistribution(ha.eigenvalues, hb.eigenvalues, table / table.sum())


def energy_distribution(rho, h: HamiltonianSpec) -> DiscreteDistribution:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape[0] != h.dim:
        raise DimensionError(f"state dim {m.shape[0]} != Hamiltonian dim {h.dim}")
    probs = np.clip([np.real(np.trace(m @ p)) for p in h.projections], 0.0, None)
    return DiscreteDistribution(h.eigenvalues, probs / probs.sum())


def sum_distribution(j: JointEnergyDistribution) -> DiscreteDistribution:
    sums = np.add.outer(j.x_support, j.y_support)
    return DiscreteDistribution.from_pairs(sums.ravel(), j.probs.ravel())


def convolve(p: DiscreteDistribution, q: DiscreteDistribution) -> DiscreteDistribution:
    sums = np.add.outer(p.support, q.support)
    return DiscreteDistribution.from_pairs(sums.ravel(), np.outer(p.probs, q.probs).ravel(), SUPPORT_MERGE_TOL)


def negate(p: DiscreteDistribution) -> DiscreteDistribution:
    return DiscreteDistribution(-p.support[::-1], p.probs[::-1])


def mixture(p: DiscreteDistribution, q: DiscreteDistribution, weight: float = 0.5) -> DiscreteDistribution:
    values = np.concatenate([p.support, q.support])
    probs = np.concatenate([weight * p.probs, (1.0 - weight) * q.probs])
    return DiscreteDistribution.from_pairs(values, probs)


def with_sum(j: JointEnergyDistribution, which: str = "X") -> JointEnergyDistribution:
    """Joint table of (X, X+Y) (``which="X"``) or (Y, X+Y) (``which="Y"``)."""
    total = sum_distribution(j)
    first = j.x_support if which == "X" else j.y_support
    table = np.zeros((len(first), len(total.support)))
    for a, x in enumerate(j.x_support):
        for b, y in enumerate(j.y_support):
            c = int(np.argmin(np.abs(total.support - (x + y))))
            table[a if which == "X" else b, c] += j.probs[a, b]
    return JointEnergyDistribution(first, total.support, table)


def mutual_info_with_sum(j: JointEnergyDistribution) -> tuple[float, float]:
    """(I(X:X+Y), I(Y:X+Y)) in nats."""
    return float(mutual_information(with_sum(j, "X"))), float(mutual_information(with_sum(j, "Y")))


@dataclass(frozen=True)
class Moments:
    mean_x: float
    mean_y: float
    mean_sum: float
    var_x: float
    var_y: float
    var_sum: float
    cov_x_sum: float
    cov_y_sum: float
    fourth_x: float
    fourth_y: float
    fourth_sum: float

    @property
    def covariance_identity_residual(self) -> float:
        """C(X, X+Y) + C(Y, X+Y) - V(X+Y); zero for every joint law."""
        return self.cov_x_sum + self.cov_y_sum - self.var_sum


def moments(j: JointEnergyDistribution) -> Moments:
    """Means, variances, covariances with the sum, and raw (about zero) fourth moments."""
    p = j.probs
    x = j.x_support[:, None]
    y = j.y_support[None, :]
    z = x + y

    def expect(f):
        return float(np.sum(p * np.broadcast_to(f, p.shape)))

    ex, ey, ez = expect(x), expect(y), expect(z)
    return Moments(
        mean_x=ex,
        mean_y=ey,
        mean_sum=ez,
        var_x=expect((x - ex) ** 2),
        var_y=expect((y - ey) ** 2),
        var_sum=expect((z - ez) ** 2),
        cov_x_sum=expect((x - ex) * (z - ez)),
        cov_y_sum=expect((y - ey) * (z - ez)),
        fourth_x=expect(x ** 4),
        fourth_y=expect(y ** 4),
        fourth_sum=expect(z ** 4),
    )


def symmetrize(j: JointEnergyDistribution) -> JointEnergyDistribution:
    """(P(x, y) + P(y, x)) / 2 on the padded common support."""
    support = np.concatenate([j.x_support, j.y_support])
    support = np.sort(support)
    keep = np.ones(len(support), dtype=bool)
    keep[1:] = np.diff(support) >= SUPPORT_MERGE_TOL
    support = support[keep]
    ix = [int(np.argmin(np.abs(support - x))) for x in j.x_support]
    iy = [int(np.argmin(np.abs(support - y))) for y in j.y_support]
    padded = np.zeros((len(support), len(support)))
    padded[np.ix_(ix, iy)] = j.probs
    return JointEnergyDistribution(support, support, (padded + padded.T) / 2)


def random_joint_table(rng: np.random.Generator, max_levels: int = 4, max_energy: int = 3) -> JointEnergyDistribution:
    """Random joint law on random integer supports, for property checks."""
    nx, ny = rng.integers(1, max_levels + 1, size=2)
    xs = np.sort(rng.choice(max_energy + 1, size=nx, replace=False)).astype(float)
    ys = np.sort(rng.choice(max_energy + 1, size=ny, replace=False)).astype(float)
    table = rng.exponential(size=(nx, ny)) * (rng.random((nx, ny)) < 0.8)
    if table.sum() == 0:
        table[0, 0] = 1.0
    return JointEnergyDistribution(xs, ys, table / table.sum())
