"""Grid files.

Binary layout: the 8-byte magic ``OSGGRID1``, a little-endian uint32 giving
the header length, the UTF-8 JSON header (sorted keys), then n_p * n_phi
little-endian float64 values with p as the outer index. The axes live in the
header as JSON numbers, which round-trip floats exactly.

CSV files carry one row per grid point with columns p, phi, W.
"""
from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from .errors import GridIOError
from .kernel import MomentumGrid

MAGIC = b"OSGGRID1"
FORMAT_VERSION = 1
TOOL_VERSION = "0.1.0"


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    return obj


def grid_header(grid: MomentumGrid) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "tool_version": TOOL_VERSION,
        "shape": list(grid.values.shape),
        "p": grid.p.tolist(),
        "phi": grid.phi.tolist(),
        "meta": _jsonable(grid.meta),
    }


def write_binary(grid: MomentumGrid, path) -> Path:
    path = Path(path)
    header = json.dumps(grid_header(grid), sort_keys=True, separators=(",", ":")).encode()
    payload = np.ascontiguousarray(grid.values, dtype="<f8").tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise GridIOError(f"cannot write {path}: {exc}") from exc
    return path


def read_binary(path) -> MomentumGrid:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise GridIOError(f"cannot read {path}: {exc}") from exc
    if blob[:8] != MAGIC:
        raise GridIOError(f"{path}: not a grid file")
    (size,) = struct.unpack("<I", blob[8:12])
    try:
        header = json.loads(blob[12:12 + size].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise GridIOError(f"{path}: corrupt header") from exc
    n_p, n_phi = header["shape"]
    payload = blob[12 + size:]
    if len(payload) != 8 * n_p * n_phi:
        raise GridIOError(f"{path}: payload holds {len(payload)} bytes, "
                          f"expected {8 * n_p * n_phi}")
    values = np.frombuffer(payload, dtype="<f8").reshape(n_p, n_phi).astype(float)
    return MomentumGrid(np.array(header["p"]), np.array(header["phi"]), values,
                        header.get("meta", {}))


def payload_bytes(path) -> bytes:
    """The float64 payload of a binary grid file (header excluded)."""
    blob = Path(path).read_bytes()
    (size,) = struct.unpack("<I", blob[8:12])
    return blob[12 + size:]


def write_csv(grid: MomentumGrid, path) -> Path:
    path = Path(path)
    pp, ff = np.meshgrid(grid.p, grid.phi, indexing="ij")
    table = np.column_stack([pp.ravel(), ff.ravel(), grid.values.ravel()])
    try:
        np.savetxt(path, table, fmt="%.17g", delimiter=",", header="p,phi,W", comments="")
    except OSError as exc:
        raise GridIOError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path) -> MomentumGrid:
    path = Path(path)
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise GridIOError(f"cannot read {path}: {exc}") from exc
    p = np.unique(table[:, 0])
    phi = np.unique(table[:, 1])
    if p.size * phi.size != table.shape[0]:
        raise GridIOError(f"{path}: rows do not form a full grid")
    return MomentumGrid(p, phi, table[:, 2].reshape(p.size, phi.size), {})
