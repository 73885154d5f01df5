"""Serialization of grid snapshots and discrete measures.

Two interchange formats, both round-tripping bit-exactly:

* CSV with one row per non-exterior node -- multi-index, coordinates, value --
  and the domain description embedded as a JSON comment header.  Floats are
  written with repr, which is the shortest exact representation.
* A compact binary container: a 16-byte magic header, a little-endian u32
  format version, a u64 header length, a JSON header describing the domain
  and the stored arrays, then the raw C-order float64/int8 payloads.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import StructuralError
from .fieldgrid import GridDomain, GridFunction, _build

__all__ = ["MAGIC", "save_grid_csv", "load_grid_csv", "save_container", "load_container"]

MAGIC = b"HESSOKIT-GRID\0\0".ljust(16, b"\0")
VERSION = 1


def _domain_from_meta(meta: dict) -> GridDomain:
    params = dict(meta["params"])
    for key in ("center", "radii", "lo", "hi"):
        if key in params:
            params[key] = tuple(params[key])
    dom = _build(meta["kind"], int(meta["n"]), params, int(meta["shape"][0]))
    if list(dom.shape) != list(meta["shape"]):
        raise StructuralError("reconstructed domain shape mismatch")
    return dom


def save_grid_csv(fn: GridFunction, path: str | Path) -> None:
    dom = fn.domain
    path = Path(path)
    sel = np.argwhere(dom.not_exterior)
    coords = dom.real_coords()
    with path.open("w") as f:
        f.write("# hessokit-grid-csv v1\n")
        f.write("# domain " + json.dumps(dom.meta(), sort_keys=True) + "\n")
        idx_cols = ",".join(f"i{a}" for a in range(2 * dom.n))
        coord_cols = ",".join(f"c{a}" for a in range(2 * dom.n))
        f.write(f"{idx_cols},{coord_cols},value\n")
        for node in sel:
            t = tuple(node)
            row = [str(int(v)) for v in node]
            row += [repr(float(c)) for c in coords[t]]
            row.append(repr(float(fn.values[t])))
            f.write(",".join(row) + "\n")


def load_grid_csv(path: str | Path) -> GridFunction:
    path = Path(path)
    meta = None
    rows: list[tuple[tuple[int, ...], float]] = []
    with path.open() as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# domain "):
                    meta = json.loads(line[len("# domain ") :])
                continue
            if line.startswith("i0,"):
                continue
            parts = line.split(",")
            if meta is None:
                raise StructuralError("missing domain header in grid CSV")
            k = 2 * int(meta["n"])
            idx = tuple(int(p) for p in parts[:k])
            rows.append((idx, float(parts[-1])))
    if meta is None:
        raise StructuralError("missing domain header in grid CSV")
    dom = _domain_from_meta(meta)
    values = np.zeros(dom.shape)
    for idx, val in rows:
        values[idx] = val
    return GridFunction(dom, values)


def save_container(path: str | Path, domain: GridDomain, arrays: dict[str, np.ndarray]) -> None:
    path = Path(path)
    header = {
        "domain": domain.meta(),
        "arrays": [],
    }
    payload = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        if arr.dtype not in (np.float64, np.int8, np.int64, np.complex128):
            arr = arr.astype(np.float64)
        header["arrays"].append(
            {"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape)}
        )
        payload.append(arr.tobytes())
    head = json.dumps(header, sort_keys=True).encode()
    with path.open("wb") as f:
        f.write(MAGIC)
        f.write(np.uint32(VERSION).tobytes())
        f.write(np.uint64(len(head)).tobytes())
        f.write(head)
        for blob in payload:
            f.write(blob)


def load_container(path: str | Path) -> tuple[GridDomain, dict[str, np.ndarray]]:
    path = Path(path)
    with path.open("rb") as f:
        magic = f.read(16)
        if magic != MAGIC:
            raise StructuralError("bad magic header in binary container")
        version = int(np.frombuffer(f.read(4), dtype=np.uint32)[0])
        if version != VERSION:
            raise StructuralError(f"unsupported container version {version}")
        head_len = int(np.frombuffer(f.read(8), dtype=np.uint64)[0])
        header = json.loads(f.read(head_len).decode())
        arrays = {}
        for spec in header["arrays"]:
            dtype = np.dtype(spec["dtype"])
            count = int(np.prod(spec["shape"])) if spec["shape"] else 1
            raw = f.read(dtype.itemsize * count)
            arrays[spec["name"]] = np.frombuffer(raw, dtype=dtype).reshape(spec["shape"]).copy()
    dom = _domain_from_meta(header["domain"])
    return dom, arrays
