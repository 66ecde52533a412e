"""Numerical search for broadcasting maps that keep Holevo information in both copies.

A broadcasting map is represented by an isometry V from C^d into
C^{d_A} (x) C^{d_B} (x) C^{d_E}; the E factor is discarded. The search does
local ascent of (I_A + I_B) / 2 over isometries of the form
W expm(A)[:, :d], with A anti-Hermitian and W re-centred after every accepted
step, from Haar-random starting points.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .infomeasures import LN2, InfoValue, holevo_from_stack, mutual_information
from .io import matrix_to_json
from .qcore import StateEnsemble, derive_seed, haar_isometry

log = logging.getLogger(__name__)

MAX_ITERATIONS = 2000
STALL_WINDOW = 50
STALL_GAIN = 1e-7
FD_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class BroadcastMap:
    isometry: np.ndarray
    dims: tuple  # (d, d_A, d_B, d_E)

    def __post_init__(self):
        v = np.asarray(self.isometry, dtype=complex)
        d, da, db, de = self.dims
        if v.shape != (da * db * de, d):
            raise ValueError(f"isometry shape {v.shape} does not match dims {self.dims}")
        if np.max(np.abs(v.conj().T @ v - np.eye(d))) > 1e-9:
            raise ValueError("broadcast map is not an isometry")
        object.__setattr__(self, "isometry", v)
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))


@dataclass
class BroadcastResult:
    info_orig: InfoValue
    info_a: InfoValue
    info_b: InfoValue
    avg: InfoValue
    achieved_delta: InfoValue
    map: BroadcastMap
    trace: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d, da, db, de = self.map.dims
        return {
            "dims": {"d": d, "d_a": da, "d_b": db, "d_e": de},
            "info_bits": {
                "original": self.info_orig.bits,
                "a": self.info_a.bits,
                "b": self.info_b.bits,
                "average": self.avg.bits,
                "achieved_delta": self.achieved_delta.bits,
            },
            "optimizer": self.trace,
            "isometry": matrix_to_json(self.map.isometry),
        }


def _reduced_pair(v: np.ndarray, mats: np.ndarray, dims) -> tuple[np.ndarray, np.ndarray]:
    d, da, db, de = dims
    out = np.einsum("ij,njk,lk->nil", v, mats, v.conj(), optimize=True)
    t = out.reshape(-1, da, db, de, da, db, de)
    return np.einsum("nabcxbc->nax", t), np.einsum("nabcaxc->nbx", t)


def _infos(v: np.ndarray, weights: np.ndarray, mats: np.ndarray, dims) -> tuple[float, float]:
    rho_a, rho_b = _reduced_pair(v, mats, dims)
    return holevo_from_stack(weights, rho_a), holevo_from_stack(weights, rho_b)


def broadcast_objective(m: BroadcastMap, e: StateEnsemble) -> BroadcastResult:
    if e.dim != m.dims[0]:
        raise ValueError(f"ensemble dimension {e.dim} does not match map input {m.dims[0]}")
    mats = e.stacked()
    orig = holevo_from_stack(e.weights, mats)
    ia, ib = _infos(m.isometry, e.weights, mats, m.dims)
    return BroadcastResult(
        info_orig=InfoValue(orig),
        info_a=InfoValue(ia),
        info_b=InfoValue(ib),
        avg=InfoValue((ia + ib) / 2),
        achieved_delta=InfoValue(orig - (ia + ib) / 2),
        map=m,
    )


# ---------------------------------------------------------------------------
# Known feasible points
# ---------------------------------------------------------------------------

def trivial_split_map(d: int, d_b: int = 2, d_e: int = 1) -> BroadcastMap:
    """A receives the input untouched, B a fixed state."""
    v = np.zeros((d * d_b * d_e, d), dtype=complex)
    for i in range(d):
        v[i * d_b * d_e, i] = 1.0
    return BroadcastMap(v, (d, d, d_b, d_e))


def copy_map(d: int) -> BroadcastMap:
    """|i> -> |i>|i>: copies the computational basis."""
    v = np.zeros((d * d, d), dtype=complex)
    for i in range(d):
        v[i * d + i, i] = 1.0
    return BroadcastMap(v, (d, d, d, 1))


def symmetric_cloner_map() -> BroadcastMap:
    """|0> -> |00>, |1> -> (|01> + |10>)/sqrt(2), no ancilla."""
    v = np.zeros((4, 2), dtype=complex)
    v[0, 0] = 1.0
    v[1, 1] = v[2, 1] = 1.0 / math.sqrt(2)
    return BroadcastMap(v, (2, 2, 2, 1))


def shrink_cloner_map() -> BroadcastMap:
    """Equal mixture, flagged in E, of the cloner above and its bit-flipped twin.

    Both copies then carry the input's equatorial Bloch vector shrunk by 1/sqrt(2)
    with no z component.
    """
    v = np.zeros((2, 2, 2, 2), dtype=complex)  # (A, B, E, input)
    s = 1.0 / math.sqrt(2)
    v[0, 0, 0, 0] = s
    v[0, 1, 0, 1] = v[1, 0, 0, 1] = s * s
    v[1, 1, 1, 1] = s
    v[0, 1, 1, 0] = v[1, 0, 1, 0] = s * s
    return BroadcastMap(v.reshape(8, 2), (2, 2, 2, 2))


def measure_prepare_baseline(e: StateEnsemble, povm) -> InfoValue:
    """Mutual information between ensemble label and measurement outcome.

    Sending orthogonal records of the outcome to both receivers gives each this
    much Holevo information.
    """
    povm = [np.asarray(m, dtype=complex) for m in povm]
    d = e.dim
    for m in povm:
        if m.shape != (d, d):
            raise ValueError("POVM element has the wrong dimension")
        if np.max(np.abs(m - m.conj().T)) > 1e-10 or np.linalg.eigvalsh(m)[0] < -1e-10:
            raise ValueError("POVM element is not positive semidefinite")
    if np.max(np.abs(sum(povm) - np.eye(d))) > 1e-10:
        raise ValueError("POVM elements do not sum to the identity")
    mats = e.stacked()
    cond = np.real(np.einsum("mij,nji->nm", np.stack(povm), mats))
    joint = np.clip(e.weights[:, None] * cond, 0.0, None)
    return mutual_information(joint / joint.sum())


# ---------------------------------------------------------------------------
# Optimizer
# ---------------------------------------------------------------------------

def _generator_basis(n: int, d: int) -> list[np.ndarray]:
    """Anti-Hermitian directions that move the first d columns at first order."""
    basis = []
    for i in range(n):
        for j in range(i, n):
            if i >= d and j >= d:
                continue
            if i == j:
                g = np.zeros((n, n), dtype=complex)
                g[i, i] = 1j
                basis.append(g)
            else:
                g = np.zeros((n, n), dtype=complex)
                g[i, j], g[j, i] = 1.0, -1.0
                basis.append(g)
                g = np.zeros((n, n), dtype=complex)
                g[i, j] = g[j, i] = 1j
                basis.append(g)
    return basis


def _ascend(weights, mats, dims, seed: int, max_iter: int = MAX_ITERATIONS) -> dict:
    d, da, db, de = dims
    n = da * db * de
    frame = haar_isometry(n, n, seed)
    gens = _generator_basis(n, d)

    def value(u):
        ia, ib = _infos(u[:, :d], weights, mats, dims)
        return (ia + ib) / 2

    current = value(frame)
    history = [current]
    step = 0.1
    it = 0
    for it in range(1, max_iter + 1):
        grad = np.empty(len(gens))
        for k, g in enumerate(gens):
            plus = value(frame @ expm(FD_STEP * g))
            minus = value(frame @ expm(-FD_STEP * g))
            grad[k] = (plus - minus) / (2 * FD_STEP)
        norm = np.linalg.norm(grad)
        if norm < 1e-12:
            break
        direction = sum(c * g for c, g in zip(grad / norm, gens))
        while step > 1e-10:
            trial_frame = frame @ expm(step * direction)
            trial = value(trial_frame)
            if trial > current:
                frame, current = trial_frame, trial
                step *= 1.5
                break
            step *= 0.5
        else:
            history.append(current)
            break
        history.append(current)
        if len(history) > STALL_WINDOW and current - history[-1 - STALL_WINDOW] < STALL_GAIN:
            break
    # Re-orthonormalize against drift from repeated products.
    q, r = np.linalg.qr(frame[:, :d])
    v = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return {"seed": seed, "value": value(v), "iterations": it, "isometry": v}


def _ascend_job(args):
    return _ascend(*args)


def optimize_broadcast(
    e: StateEnsemble,
    dims: tuple[int, int, int] | None = None,
    restarts: int = 20,
    seed: int = 0,
    workers: int = 1,
    max_iter: int = MAX_ITERATIONS,
) -> BroadcastResult:
    """Best of ``restarts`` local ascents; dims = (d_A, d_B, d_E), default (d, d, d).

    Every restart owns a seed derived from ``seed``, so the result is independent
    of ``workers``. The value is achievable, hence an upper bound on the minimal
    broadcasting loss; no global optimality is claimed.
    """
    d = e.dim
    da, db, de = (d, d, d) if dims is None else dims
    if da * db * de < d:
        raise ValueError(f"output dimension {da * db * de} is smaller than input dimension {d}")
    full = (d, da, db, de)
    mats = e.stacked()
    jobs = [(e.weights, mats, full, derive_seed(seed, r), max_iter) for r in range(restarts)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_ascend_job, jobs))
    else:
        runs = [_ascend(*job) for job in jobs]
    best = max(runs, key=lambda r: r["value"])
    result = broadcast_objective(BroadcastMap(best["isometry"], full), e)
    result.trace = {
        "restarts": restarts,
        "master_seed": seed,
        "seeds": [r["seed"] for r in runs],
        "iterations": [r["iterations"] for r in runs],
        "best_avg_bits": [r["value"] / LN2 for r in runs],
        "best_restart": runs.index(best),
    }
    return result


def ensemble_commutes(e: StateEnsemble, tol: float = 1e-9) -> bool:
    mats = e.stacked()
    return all(np.max(np.abs(a @ b - b @ a)) <= tol for i, a in enumerate(mats) for b in mats[i + 1:])


def conjecture_probe(result: BroadcastResult, e: StateEnsemble, margin_bits: float = 0.01) -> bool:
    """Log the achieved average; return True (and warn) if a non-commuting ensemble comes within ``margin_bits`` of its original information."""
    gap = result.info_orig.bits - result.avg.bits
    log.info("best average %.6f bit of original %.6f bit (gap %.6f bit)", result.avg.bits, result.info_orig.bits, gap)
    if gap < margin_bits and not ensemble_commutes(e):
        log.warning(
            "ANOMALY: broadcast average %.6f bit is within %.3g bit of the original %.6f bit on a non-commuting ensemble",
            result.avg.bits, margin_bits, result.info_orig.bits,
        )
        return True
    return False
