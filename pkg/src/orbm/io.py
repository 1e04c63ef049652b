"""Serialization: JSON documents for analytic objects, a columnar binary
layout and CSV for paths, JSON for statistical reports.

Binary path layout (little-endian):
    header:  dt f64, n u64, seed u64
    columns: positions as n (re, im) f64 pairs, then local time as n f64
    trailer: jump table: count u64, then per record
             (index u64, from_angle f64, to_angle f64, arc_sign f64)
Transferred paths prepend a map-id field:  dt f64, n u64, seed u64, map_id u64.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .disk import DiskPath, JumpRecord
from .errors import InvalidInput

_HEADER = struct.Struct("<dQQ")
_JUMP = struct.Struct("<Qddd")


def write_path_bin(path: DiskPath, fp) -> None:
    close = False
    if isinstance(fp, (str, Path)):
        fp = open(fp, "wb")
        close = True
    try:
        n = len(path.positions)
        fp.write(_HEADER.pack(path.dt, n, path.seed & 0xFFFFFFFFFFFFFFFF))
        cols = np.empty(2 * n)
        cols[0::2] = path.positions.real
        cols[1::2] = path.positions.imag
        fp.write(cols.astype("<f8").tobytes())
        fp.write(path.local_time.astype("<f8").tobytes())
        fp.write(struct.pack("<Q", len(path.jumps)))
        for j in path.jumps:
            fp.write(_JUMP.pack(j.index, j.from_angle, j.to_angle, float(j.arc_sign)))
    finally:
        if close:
            fp.close()


def read_path_bin(fp) -> DiskPath:
    close = False
    if isinstance(fp, (str, Path)):
        fp = open(fp, "rb")
        close = True
    try:
        dt, n, seed = _HEADER.unpack(fp.read(_HEADER.size))
        cols = np.frombuffer(fp.read(16 * n), dtype="<f8")
        positions = cols[0::2] + 1j * cols[1::2]
        local = np.frombuffer(fp.read(8 * n), dtype="<f8").copy()
        (n_jumps,) = struct.unpack("<Q", fp.read(8))
        jumps = []
        for _ in range(n_jumps):
            idx, fa, ta, sgn = _JUMP.unpack(fp.read(_JUMP.size))
            jumps.append(JumpRecord(idx, fa, ta, int(sgn)))
        return DiskPath(dt, positions.copy(), local, jumps=jumps, seed=seed)
    finally:
        if close:
            fp.close()


def write_path_csv(path: DiskPath, fp) -> None:
    close = False
    if isinstance(fp, (str, Path)):
        fp = open(fp, "w")
        close = True
    try:
        fp.write("t,re,im,local_time\n")
        for t, z, ell in zip(path.times, path.positions, path.local_time):
            fp.write(f"{t!r},{z.real!r},{z.imag!r},{ell!r}\n")
    finally:
        if close:
            fp.close()


def read_path_csv(fp, seed: int = 0) -> DiskPath:
    data = np.genfromtxt(fp, delimiter=",", skip_header=1)
    if data.ndim != 2 or data.shape[1] != 4:
        raise InvalidInput("expected 4 columns t,re,im,local_time")
    dt = float(data[1, 0] - data[0, 0]) if len(data) > 1 else 1.0
    return DiskPath(dt, data[:, 1] + 1j * data[:, 2], data[:, 3].copy(), seed=seed)


def histogram_report(hist, l1_error: float | None, seed: int,
                     ks: float | None = None, p_value: float | None = None) -> dict:
    return {
        "grid": {"nr": hist.nr, "nt": hist.nt},
        "counts": hist.weights.tolist(),
        "l1_error": l1_error,
        "ks": ks,
        "p_value": p_value,
        "seed": seed,
    }


def dump_json(obj, fp) -> None:
    if isinstance(fp, (str, Path)):
        with open(fp, "w") as f:
            json.dump(obj, f, indent=1, sort_keys=True)
    else:
        json.dump(obj, fp, indent=1, sort_keys=True)


def load_json(fp):
    if isinstance(fp, (str, Path)):
        with open(fp) as f:
            return json.load(f)
    return json.load(fp)
