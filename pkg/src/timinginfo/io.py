"""JSON exchange formats for matrices, states, Hamiltonians and channels.

Matrix:       {"dim": n, "re": [[...]], "im": [[...]]}   ("dim" optional for non-square)
Hamiltonian:  {"eigenvalues": [...], "projections": [matrix, ...]}
Channel:      {"dim_in": n, "dim_out": m, "kraus": [matrix, ...]}
Distribution: {"support": [...], "probs": [...]}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .qcore import DensityMatrix, HamiltonianSpec, KrausChannel


class InputError(ValueError):
    """A file is missing, unreadable, or does not follow its format."""


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    out = {"re": m.real.tolist(), "im": m.imag.tolist()}
    if m.shape[0] == m.shape[1]:
        out = {"dim": m.shape[0], **out}
    return out


def matrix_from_json(data) -> np.ndarray:
    try:
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix: {exc}") from exc
    if re.ndim != 2 or re.shape != im.shape:
        raise InputError("matrix 're' and 'im' must be equal-shape 2D arrays")
    if "dim" in data and re.shape != (data["dim"], data["dim"]):
        raise InputError(f"matrix shape {re.shape} does not match dim {data['dim']}")
    return re + 1j * im


def hamiltonian_to_json(h: HamiltonianSpec) -> dict:
    return {
        "eigenvalues": h.eigenvalues.tolist(),
        "projections": [matrix_to_json(p) for p in h.projections],
    }


def hamiltonian_from_json(data) -> HamiltonianSpec:
    try:
        return HamiltonianSpec(data["eigenvalues"], tuple(matrix_from_json(p) for p in data["projections"]))
    except KeyError as exc:
        raise InputError(f"Hamiltonian missing field {exc}") from exc
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(f"invalid Hamiltonian: {exc}") from exc


def state_from_json(data) -> DensityMatrix:
    try:
        return DensityMatrix(matrix_from_json(data))
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(f"invalid density matrix: {exc}") from exc


def channel_to_json(g: KrausChannel) -> dict:
    return {"dim_in": g.dim_in, "dim_out": g.dim_out, "kraus": [matrix_to_json(a) for a in g.kraus]}


def channel_from_json(data) -> KrausChannel:
    try:
        ops = tuple(matrix_from_json(a) for a in data["kraus"])
        g = KrausChannel(ops)
    except KeyError as exc:
        raise InputError(f"channel missing field {exc}") from exc
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(f"invalid channel: {exc}") from exc
    if (g.dim_in, g.dim_out) != (data.get("dim_in", g.dim_in), data.get("dim_out", g.dim_out)):
        raise InputError("channel dims do not match its Kraus operators")
    return g


def load_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def dump_json(data, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
