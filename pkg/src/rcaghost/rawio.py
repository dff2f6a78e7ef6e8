"""Raw binary artifact files with JSON metadata sidecars.

Every artifact is a raw little-endian array (float32 ``.f32`` or
interleaved complex64 ``.c64``) in C order, next to a ``.json`` sidecar
holding dtype, dims, grid/time metadata, the resolved pipeline config and
content hashes.  Sidecars are written with sorted keys and no timestamps
or absolute paths, so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .beamform import ComplexVolume, FrameSet, VolumeGrid
from .forward import ChannelData
from .geometry import ALL_PATHS
from .metrics import Profile

SCHEMA_VERSION = 1
_DTYPES = {"<f4": np.dtype("<f4"), "<c8": np.dtype("<c8")}


class MissingArtifactError(FileNotFoundError):
    """An upstream pipeline artifact is required but absent."""


def require(path: Path) -> Path:
    if not Path(path).exists():
        raise MissingArtifactError(
            f"required artifact {path} is missing; run the upstream stage first"
        )
    return Path(path)


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_json(path: Path) -> dict:
    return json.loads(require(path).read_text())


def _write_raw(path: Path, arr: np.ndarray, dtype: str) -> str:
    data = np.ascontiguousarray(arr.astype(_DTYPES[dtype], copy=False))
    Path(path).write_bytes(data.tobytes())
    return sha256_file(path)


def _read_raw(path: Path, dtype: str, shape) -> np.ndarray:
    raw = np.frombuffer(require(path).read_bytes(), dtype=_DTYPES[dtype])
    expected = int(np.prod(shape))
    if raw.size != expected:
        raise ValueError(f"{path} holds {raw.size} values, expected {expected}")
    return raw.reshape(tuple(shape)).copy()


def _check_hash(path: Path, sidecar: dict) -> None:
    recorded = sidecar.get("content_hash")
    if recorded and sha256_file(path) != recorded:
        raise ValueError(f"{path} does not match the hash recorded in its sidecar")


def _grid_payload(grid: VolumeGrid) -> dict:
    return {
        "start": list(grid.start),
        "step": list(grid.step),
        "shape": list(grid.shape),
    }


def _grid_from(payload: dict) -> VolumeGrid:
    return VolumeGrid(
        start=tuple(payload["start"]),
        step=tuple(payload["step"]),
        shape=tuple(payload["shape"]),
    )


def _base_payload(kind: str, config: dict | None, inputs: dict | None) -> dict:
    payload = {"schema_version": SCHEMA_VERSION, "kind": kind}
    if config is not None:
        payload["config"] = config
    if inputs:
        payload["inputs"] = inputs
    return payload


def save_channel_data(
    out_dir: Path,
    channels: ChannelData,
    config: dict | None = None,
    inputs: dict | None = None,
    stem: str = "channels",
) -> dict[str, Path]:
    """Write traces as <stem>.f32 (or .c64 when baseband) plus <stem>.json."""
    out_dir = Path(out_dir)
    dtype = "<c8" if channels.is_baseband else "<f4"
    raw = out_dir / f"{stem}{'.c64' if dtype == '<c8' else '.f32'}"
    digest = _write_raw(raw, channels.samples, dtype)
    payload = _base_payload("channel_data", config, inputs)
    payload.update(
        {
            "file": raw.name,
            "dtype": dtype,
            "shape": list(channels.samples.shape),
            "fs": channels.fs,
            "t0": channels.t0,
            "swapped": channels.swapped,
            "carrier_f0": channels.carrier_f0,
            "content_hash": digest,
        }
    )
    sidecar = out_dir / f"{stem}.json"
    _write_json(sidecar, payload)
    return {"raw": raw, "sidecar": sidecar}


def load_channel_data(out_dir: Path, stem: str = "channels") -> ChannelData:
    meta = _read_json(Path(out_dir) / f"{stem}.json")
    raw = Path(out_dir) / meta["file"]
    _check_hash(require(raw), meta)
    samples = _read_raw(raw, meta["dtype"], meta["shape"])
    return ChannelData(
        samples=samples,
        fs=meta["fs"],
        t0=meta["t0"],
        swapped=meta["swapped"],
        carrier_f0=meta["carrier_f0"],
    )


def _frame_name(path: tuple[int, int]) -> str:
    return f"frames_n{path[0]}i{path[1]}.c64"


def save_frame_set(
    out_dir: Path,
    frames: FrameSet,
    config: dict | None = None,
    inputs: dict | None = None,
) -> dict[str, Path]:
    """Write the nine frames as frames_n{n}i{i}.c64 plus one frames.json."""
    out_dir = Path(out_dir)
    entries = []
    paths: dict[str, Path] = {}
    for p in ALL_PATHS:
        vol = frames.frames[p]
        raw = out_dir / _frame_name(p)
        digest = _write_raw(raw, vol.data, "<c8")
        entries.append({"path": list(p), "file": raw.name, "content_hash": digest})
        paths[f"frame_{p[0]}{p[1]}"] = raw
    payload = _base_payload("frame_set", config, inputs)
    payload.update(
        {
            "dtype": "<c8",
            "grid": _grid_payload(frames.grid),
            "f0": frames.main.f0,
            "frames": entries,
        }
    )
    sidecar = out_dir / "frames.json"
    _write_json(sidecar, payload)
    paths["sidecar"] = sidecar
    return paths


def load_frame_set(out_dir: Path) -> FrameSet:
    out_dir = Path(out_dir)
    meta = _read_json(out_dir / "frames.json")
    grid = _grid_from(meta["grid"])
    frames = {}
    for entry in meta["frames"]:
        p = tuple(entry["path"])
        raw = require(out_dir / entry["file"])
        _check_hash(raw, entry)
        data = _read_raw(raw, meta["dtype"], grid.shape)
        frames[p] = ComplexVolume(data=data, grid=grid, path=p, f0=meta["f0"])
    return FrameSet(frames=frames)


def save_volume(
    out_dir: Path,
    stem: str,
    vol: ComplexVolume,
    config: dict | None = None,
    inputs: dict | None = None,
) -> dict[str, Path]:
    out_dir = Path(out_dir)
    raw = out_dir / f"{stem}.c64"
    digest = _write_raw(raw, vol.data, "<c8")
    payload = _base_payload("complex_volume", config, inputs)
    payload.update(
        {
            "file": raw.name,
            "dtype": "<c8",
            "grid": _grid_payload(vol.grid),
            "path": list(vol.path),
            "f0": vol.f0,
            "content_hash": digest,
        }
    )
    sidecar = out_dir / f"{stem}.json"
    _write_json(sidecar, payload)
    return {"raw": raw, "sidecar": sidecar}


def load_volume(out_dir: Path, stem: str) -> ComplexVolume:
    out_dir = Path(out_dir)
    meta = _read_json(out_dir / f"{stem}.json")
    raw = require(out_dir / meta["file"])
    _check_hash(raw, meta)
    grid = _grid_from(meta["grid"])
    data = _read_raw(raw, meta["dtype"], grid.shape)
    return ComplexVolume(data=data, grid=grid, path=tuple(meta["path"]), f0=meta["f0"])


def save_weight_map(
    out_dir: Path,
    weights: np.ndarray,
    grid: VolumeGrid,
    config: dict | None = None,
    inputs: dict | None = None,
    stem: str = "weightmap",
) -> dict[str, Path]:
    out_dir = Path(out_dir)
    raw = out_dir / f"{stem}.f32"
    digest = _write_raw(raw, np.asarray(weights), "<f4")
    payload = _base_payload("weight_map", config, inputs)
    payload.update(
        {
            "file": raw.name,
            "dtype": "<f4",
            "grid": _grid_payload(grid),
            "content_hash": digest,
        }
    )
    sidecar = out_dir / f"{stem}.json"
    _write_json(sidecar, payload)
    return {"raw": raw, "sidecar": sidecar}


def load_weight_map(out_dir: Path, stem: str = "weightmap") -> tuple[np.ndarray, VolumeGrid]:
    out_dir = Path(out_dir)
    meta = _read_json(out_dir / f"{stem}.json")
    raw = require(out_dir / meta["file"])
    _check_hash(raw, meta)
    grid = _grid_from(meta["grid"])
    return _read_raw(raw, meta["dtype"], grid.shape), grid


def save_profile_csv(path: Path, profile: Profile) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["position_m", "value_db"])
        for pos, val in zip(profile.positions, profile.values):
            writer.writerow([repr(float(pos)), repr(float(val))])


def load_profile_csv(path: Path) -> Profile:
    with open(require(path), newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != ["position_m", "value_db"]:
        raise ValueError(f"{path} is not a profile CSV")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return Profile(positions=data[:, 0], values=data[:, 1])


def save_metrics_report(out_dir: Path, report: dict) -> Path:
    path = Path(out_dir) / "metrics.json"
    _write_json(path, report)
    return path


def load_metrics_report(out_dir: Path) -> dict:
    return _read_json(Path(out_dir) / "metrics.json")
