"""Information-deficit bounds for bipartite states and a Monte-Carlo harness.

The deficit of a bipartite state is I - (I_A + I_B) / 2, where I is the timing
information of the joint state under H_A (x) 1 + 1 (x) H_B and I_A, I_B are the
timing informations of the reduced states. For pure states every bound below
lower-bounds it.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .energydist import (
    JointEnergyDistribution,
    convolve,
    joint_energy,
    mixture,
    moments,
    mutual_info_with_sum,
    negate,
    sum_distribution,
    symmetrize,
)
from .infomeasures import (
    LN2,
    DiscreteDistribution,
    InfoValue,
    conditional_entropy,
    relative_entropy,
    shannon,
    timing_information,
    von_neumann_entropy,
)
from .qcore import (
    DensityMatrix,
    DimensionError,
    HamiltonianSpec,
    derive_seed,
    haar_isometry,
    partial_trace,
    random_density,
    random_pure,
    tensor,
)

SLACK = 1e-9

# Bounds asserted against the deficit. The unfactored sum of the two
# convolution divergences is reported alongside but never asserted.
ASSERTED_BOUNDS = ("mutual_info", "kl_half", "kl_symmetrized", "fourth_moment")


@dataclass
class DeficitReport:
    joint_info: InfoValue
    info_a: InfoValue
    info_b: InfoValue
    deficit: InfoValue
    bounds: dict = field(default_factory=dict)
    reported: dict = field(default_factory=dict)

    def violations(self, slack: float = SLACK) -> list[str]:
        return [name for name, value in self.bounds.items() if value > self.deficit + slack]


def _check_bipartite(rho, ha: HamiltonianSpec, hb: HamiltonianSpec) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape[0] != ha.dim * hb.dim:
        raise DimensionError(f"state dim {m.shape[0]} != {ha.dim} * {hb.dim}")
    return m


def deficit(rho, ha: HamiltonianSpec, hb: HamiltonianSpec) -> DeficitReport:
    m = _check_bipartite(rho, ha, hb)
    dims = (ha.dim, hb.dim)
    joint = timing_information(m, tensor(ha, hb))
    info_a = timing_information(partial_trace(m, dims, "A"), ha)
    info_b = timing_information(partial_trace(m, dims, "B"), hb)
    if DensityMatrix(m, check=False).is_pure(1e-10):
        classical = shannon(sum_distribution(joint_energy(m, ha, hb)))
        if abs(classical - joint) > 1e-9:
            raise RuntimeError(f"joint timing info {joint} disagrees with S(X+Y) = {classical}")
    return DeficitReport(joint, info_a, info_b, InfoValue(joint - (info_a + info_b) / 2))


def post_measurement_entropy_bound(sigma, projections) -> tuple[InfoValue, InfoValue]:
    """(S(sum_j R_j sigma R_j), S(sigma) + S(p)) with p_j = tr(R_j sigma)."""
    m = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma, dtype=complex)
    projections = [np.asarray(r, dtype=complex) for r in projections]
    if np.max(np.abs(sum(projections) - np.eye(m.shape[0]))) > 1e-10:
        raise ValueError("projection family is not complete")
    probs = np.clip([np.real(np.trace(r @ m)) for r in projections], 0.0, None)
    lhs = von_neumann_entropy(sum(r @ m @ r for r in projections))
    rhs = InfoValue(von_neumann_entropy(m) + shannon(probs))
    return lhs, rhs


def conditional_entropy_bound(rho, ha: HamiltonianSpec, hb: HamiltonianSpec):
    """(I_A, S(X|Y), I_B, S(Y|X)); expected I_A <= S(X|Y) and I_B <= S(Y|X)."""
    m = _check_bipartite(rho, ha, hb)
    dims = (ha.dim, hb.dim)
    j = joint_energy(m, ha, hb)
    info_a = timing_information(partial_trace(m, dims, "A"), ha)
    info_b = timing_information(partial_trace(m, dims, "B"), hb)
    return info_a, conditional_entropy(j, given="Y"), info_b, conditional_entropy(j, given="X")


def mutual_info_deficit_bound(j: JointEnergyDistribution) -> InfoValue:
    """(I(X:X+Y) + I(Y:X+Y)) / 2 in nats."""
    ixz, iyz = mutual_info_with_sum(j)
    return InfoValue((ixz + iyz) / 2)


@dataclass(frozen=True)
class ConvolutionKL:
    kl_x: InfoValue
    kl_y: InfoValue
    kl_symmetrized: InfoValue


def convolution_kl_bound(j: JointEnergyDistribution) -> ConvolutionKL:
    """Divergences of each marginal from the reflected-other-marginal convolved with the sum.

    kl_y = K(P_Y || P_{-X} * P_{X+Y}) <= I(X:X+Y), kl_x = K(P_X || P_{-Y} * P_{X+Y}) <= I(Y:X+Y),
    and the mixed version is bounded by the sum of both mutual informations.
    """
    px, py, pz = j.marginal_x(), j.marginal_y(), sum_distribution(j)
    kl_y = relative_entropy(py, convolve(negate(px), pz))
    kl_x = relative_entropy(px, convolve(negate(py), pz))
    kl_sym = relative_entropy(mixture(px, py), convolve(mixture(negate(px), negate(py)), pz))
    return ConvolutionKL(kl_x, kl_y, kl_sym)


def fourth_moment_bound(j: JointEnergyDistribution) -> InfoValue:
    """V(X+Y)^4 / (64 (<X^4> + <Y^4>) <(X+Y)^4>), raw fourth moments, nats."""
    mo = moments(j)
    if mo.var_sum <= 0.0:
        return InfoValue(0.0)
    denom = 64.0 * (mo.fourth_x + mo.fourth_y) * mo.fourth_sum
    if denom <= 0.0:
        return InfoValue(0.0)
    return InfoValue(mo.var_sum ** 4 / denom)


def symmetrization_gap(j: JointEnergyDistribution) -> float:
    """I_P(X:Z) + I_P(Y:Z) - the same for the symmetrized law; never negative."""
    return sum(mutual_info_with_sum(j)) - sum(mutual_info_with_sum(symmetrize(j)))


def analyze_pure(rho, ha: HamiltonianSpec, hb: HamiltonianSpec) -> DeficitReport:
    """Deficit of a pure bipartite state together with every lower bound on it."""
    report = deficit(rho, ha, hb)
    j = joint_energy(rho, ha, hb)
    kl = convolution_kl_bound(j)
    report.bounds["mutual_info"] = mutual_info_deficit_bound(j)
    report.bounds["kl_half"] = InfoValue((kl.kl_x + kl.kl_y) / 2)
    report.bounds["kl_symmetrized"] = kl.kl_symmetrized
    report.bounds["fourth_moment"] = fourth_moment_bound(j)
    report.reported["kl_unfactored"] = InfoValue(kl.kl_x + kl.kl_y)
    return report


# ---------------------------------------------------------------------------
# Entropy power inequality on discretized densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EPIReport:
    lhs: float
    rhs: float
    half_bit_gap: float
    entropy_x: float
    entropy_y: float
    entropy_sum: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs


def _grid_step(p: DiscreteDistribution) -> float:
    if len(p.support) < 2:
        raise ValueError("need at least two grid points")
    steps = np.diff(p.support)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
        raise ValueError("grid is not uniform")
    return float(steps[0])


def differential_entropy(p: DiscreteDistribution, step: float | None = None) -> float:
    """Discrete entropy plus ln(grid step), the surrogate for a continuous density."""
    step = _grid_step(p) if step is None else step
    return float(shannon(p)) + math.log(step)


def epi_check(p: DiscreteDistribution, q: DiscreteDistribution) -> EPIReport:
    step = _grid_step(p)
    if abs(_grid_step(q) - step) > 1e-9 * max(1.0, step):
        raise ValueError("grids have different steps")
    sx = differential_entropy(p, step)
    sy = differential_entropy(q, step)
    sz = differential_entropy(convolve(p, q), step)
    return EPIReport(
        lhs=math.exp(2 * sz),
        rhs=math.exp(2 * sx) + math.exp(2 * sy),
        half_bit_gap=sz - (sx + sy) / 2 - LN2 / 2,
        entropy_x=sx,
        entropy_y=sy,
        entropy_sum=sz,
    )


def discretized_gaussian(sigma_steps: float, half_width: float = 8.0) -> DiscreteDistribution:
    """Gaussian of standard deviation ``sigma_steps`` on the unit-step grid covering +-half_width*sigma."""
    n = int(math.ceil(half_width * sigma_steps))
    grid = np.arange(-n, n + 1, dtype=float)
    w = np.exp(-grid ** 2 / (2 * sigma_steps ** 2))
    return DiscreteDistribution(grid, w / w.sum())


# ---------------------------------------------------------------------------
# Monte-Carlo harness
# ---------------------------------------------------------------------------

CSV_FIELDS = (
    "index", "seed", "dim_a", "dim_b", "spectrum_a", "spectrum_b",
    "joint_info", "info_a", "info_b", "deficit",
    "mutual_info", "kl_half", "kl_symmetrized", "fourth_moment", "kl_unfactored",
    "kl_x", "kl_y", "i_x_sum", "i_y_sum", "s_x_given_y", "s_y_given_x",
    "postmeas_lhs", "postmeas_rhs", "margin", "violations",
)


def random_projection_family(dim: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random orthonormal basis split into a random number of groups."""
    basis = haar_isometry(dim, dim, rng)
    labels = rng.integers(0, dim, size=dim)
    projs = []
    for label in np.unique(labels):
        cols = basis[:, labels == label]
        projs.append(cols @ cols.conj().T)
    return projs


def run_instance(master_seed: int, index: int, dims=(2, 3, 4), max_energy: int = 3) -> dict:
    seed = derive_seed(master_seed, index)
    rng = np.random.default_rng(seed)
    da, db = (int(d) for d in rng.choice(dims, size=2))
    spec_a = rng.integers(0, max_energy + 1, size=da)
    spec_b = rng.integers(0, max_energy + 1, size=db)
    ha, hb = HamiltonianSpec.diagonal(spec_a), HamiltonianSpec.diagonal(spec_b)
    rho = random_pure(da * db, rng).density()

    report = analyze_pure(rho, ha, hb)
    j = joint_energy(rho, ha, hb)
    kl = convolution_kl_bound(j)
    ixz, iyz = mutual_info_with_sum(j)
    ia, sxy, ib, syx = conditional_entropy_bound(rho, ha, hb)
    sigma = random_density(da, rng)
    pm_lhs, pm_rhs = post_measurement_entropy_bound(sigma, random_projection_family(da, rng))

    failed = report.violations(SLACK)
    if pm_lhs > pm_rhs + SLACK:
        failed.append("post_measurement")
    if ia > sxy + SLACK or ib > syx + SLACK:
        failed.append("conditional_entropy")
    # Infinite divergences make the corresponding check vacuous.
    if math.isfinite(kl.kl_y) and ixz < kl.kl_y - SLACK:
        failed.append("kl_y_vs_mi")
    if math.isfinite(kl.kl_x) and iyz < kl.kl_x - SLACK:
        failed.append("kl_x_vs_mi")
    if math.isfinite(kl.kl_symmetrized) and ixz + iyz < kl.kl_symmetrized - SLACK:
        failed.append("kl_sym_vs_mi")
    if report.bounds["fourth_moment"] > report.bounds["mutual_info"] + SLACK:
        failed.append("chain_fourth_moment")
    if report.bounds["kl_half"] > report.bounds["mutual_info"] + SLACK:
        failed.append("chain_kl_half")

    finite = [v for v in report.bounds.values() if math.isfinite(v)]
    return {
        "index": index,
        "seed": seed,
        "dim_a": da,
        "dim_b": db,
        "spectrum_a": " ".join(str(int(v)) for v in spec_a),
        "spectrum_b": " ".join(str(int(v)) for v in spec_b),
        "joint_info": float(report.joint_info),
        "info_a": float(report.info_a),
        "info_b": float(report.info_b),
        "deficit": float(report.deficit),
        **{name: float(report.bounds[name]) for name in ASSERTED_BOUNDS},
        "kl_unfactored": float(report.reported["kl_unfactored"]),
        "kl_x": float(kl.kl_x),
        "kl_y": float(kl.kl_y),
        "i_x_sum": ixz,
        "i_y_sum": iyz,
        "s_x_given_y": float(sxy),
        "s_y_given_x": float(syx),
        "postmeas_lhs": float(pm_lhs),
        "postmeas_rhs": float(pm_rhs),
        "margin": float(report.deficit) - max(finite),
        "violations": ";".join(failed),
    }


def _run_chunk(args) -> list[dict]:
    master_seed, indices = args
    return [run_instance(master_seed, i) for i in indices]


def run_bound_suite(instances: int, seed: int, workers: int = 1) -> list[dict]:
    """Evaluate every bound on ``instances`` random pure bipartite states.

    Each instance owns a seed derived from (seed, index), so the rows do not
    depend on ``workers``.
    """
    if workers <= 1:
        return [run_instance(seed, i) for i in range(instances)]
    chunks = [(seed, list(range(i, instances, workers))) for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        rows = [row for chunk in pool.map(_run_chunk, chunks) for row in chunk]
    return sorted(rows, key=lambda r: r["index"])


def write_csv(rows: list[dict], path, fields=CSV_FIELDS) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
