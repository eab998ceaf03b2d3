"""Bit-exact binary field snapshots with a JSON sidecar.

Layout (little-endian): b"LNLS", u32 version = 1, u8 ndim, per axis
(u32 N, f64 L), f64 t, f64 lambda, f64 epsilon, then the values as
(f64 re, f64 im) pairs in row-major order.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .grid import Grid

MAGIC = b"LNLS"
VERSION = 1


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_snapshot(field, path, config: dict | None = None) -> Path:
    g = field.grid
    head = [MAGIC, struct.pack("<IB", VERSION, g.ndim)]
    head += [struct.pack("<Id", n, L) for n, L in zip(g.N, g.L)]
    head.append(struct.pack("<ddd", field.t, field.lam, field.epsilon))
    body = np.ascontiguousarray(field.values, dtype="<c16").tobytes()
    path = Path(path)
    try:
        path.write_bytes(b"".join(head) + body)
        side = {"grid": g.to_json(), "t": field.t, "lambda": field.lam, "epsilon": field.epsilon,
                "frame": "physical" if not field.is_rescaled else "rescaled"}
        if config is not None:
            side["config"] = config
        sidecar_path(path).write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write snapshot {path}: {exc}") from exc
    return path


def read_snapshot(path) -> dict:
    """Returns {"grid", "values", "t", "lambda", "epsilon"}."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise InvalidArgument(f"{path}: not an LNLS snapshot")
    off = 4
    version, ndim = struct.unpack_from("<IB", data, off)
    off += 5
    if version != VERSION:
        raise InvalidArgument(f"{path}: unsupported snapshot version {version}")
    N, L = [], []
    for _ in range(ndim):
        n, length = struct.unpack_from("<Id", data, off)
        off += 12
        N.append(n)
        L.append(length)
    t, lam, eps = struct.unpack_from("<ddd", data, off)
    off += 24
    grid = Grid(tuple(N), tuple(L))
    count = int(np.prod(grid.shape))
    if len(data) - off != 16 * count:
        raise InvalidArgument(f"{path}: truncated or oversized payload")
    values = np.frombuffer(data, dtype="<c16", count=count, offset=off).reshape(grid.shape)
    return {"grid": grid, "values": values.astype(complex), "t": t, "lambda": lam, "epsilon": eps}
