"""Point-spread-function and contrast metrics on beamformed volumes.

Covers the usual evaluation chain: envelope detection with log
compression, maximum-intensity projections onto a single axis, lobe width
at a dB level, ghost-suppression level between a before/after pair of
profiles, and contrast-to-noise ratio between two regions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beamform import ComplexVolume, VolumeGrid

_AXES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}


@dataclass(frozen=True, eq=False)
class DbVolume:
    """Log-compressed envelope, normalized so the peak sits at 0 dB."""

    values: np.ndarray = field(repr=False)
    grid: VolumeGrid
    floor_db: float = -100.0

    def __post_init__(self):
        if tuple(self.values.shape) != self.grid.shape:
            raise ValueError("values shape does not match grid shape")


@dataclass(frozen=True, eq=False)
class Profile:
    """dB values along one axis; positions strictly increasing [m]."""

    positions: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        val = np.asarray(self.values, dtype=float)
        if pos.shape != val.shape or pos.ndim != 1 or pos.size < 1:
            raise ValueError("positions and values must be matching 1-D arrays")
        if pos.size > 1 and not np.all(np.diff(pos) > 0):
            raise ValueError("positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "values", val)


def envelope_db(v: ComplexVolume, floor_db: float = -100.0) -> DbVolume:
    """Normalized log-compressed envelope: 20 log10(|v| / max |v|), floored.

    Raises on an all-zero volume (no reference peak).
    """
    mag = np.abs(v.data.astype(np.complex128))
    peak = mag.max()
    if peak == 0.0:
        raise ValueError("cannot log-compress an all-zero volume")
    with np.errstate(divide="ignore"):
        vals = 20.0 * np.log10(mag / peak)
    return DbVolume(values=np.maximum(vals, floor_db), grid=v.grid, floor_db=floor_db)


def project_max(v: DbVolume, onto, mode: str = "max") -> Profile:
    """Profile along one axis: max over the other two axes per position.

    ``mode='slice'`` instead takes the line through the global peak.
    """
    if onto not in _AXES:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {onto!r}")
    axis = _AXES[onto]
    others = tuple(a for a in range(3) if a != axis)
    if mode == "max":
        vals = v.values.max(axis=others)
    elif mode == "slice":
        peak = np.unravel_index(np.argmax(v.values), v.values.shape)
        index = [slice(None)] * 3
        for a in others:
            index[a] = peak[a]
        vals = v.values[tuple(index)]
    else:
        raise ValueError(f"mode must be 'max' or 'slice', got {mode!r}")
    return Profile(positions=v.grid.axis_positions(axis), values=vals)


def width_at_level(p: Profile, level_db: float) -> float:
    """Width [m] of the lobe around the global peak at ``level_db``.

    Measures between the outermost crossings of the level: the last
    position below the level on each side of all above-level samples,
    linearly interpolated.  Raises when the profile never falls below the
    level on either side (lobe wider than the profile support).
    """
    vals = p.values
    pos = p.positions
    above = np.flatnonzero(vals >= level_db)
    if above.size == 0:
        raise ValueError(f"profile never reaches {level_db} dB")
    lo, hi = above[0], above[-1]
    if lo == 0 or hi == vals.size - 1:
        raise ValueError(
            f"profile does not fall below {level_db} dB on both sides; "
            "lobe wider than the profile support"
        )

    def cross(i_below: int, i_above: int) -> float:
        t = (level_db - vals[i_below]) / (vals[i_above] - vals[i_below])
        return pos[i_below] + t * (pos[i_above] - pos[i_below])

    return cross(hi + 1, hi) - cross(lo - 1, lo)


def ghost_suppression_db(
    before: Profile, after: Profile, peak_pos: float, exclusion_radius: float
) -> float:
    """Drop [dB] of the strongest off-lobe sample between two profiles.

    Finds the strongest ``before`` sample outside ``exclusion_radius`` of
    ``peak_pos`` and returns its level minus the ``after`` level at that
    same position (positive values mean suppression).
    """
    if before.positions.shape != after.positions.shape or not np.allclose(
        before.positions, after.positions
    ):
        raise ValueError("profiles must share their positions")
    outside = np.abs(before.positions - peak_pos) > exclusion_radius
    if not outside.any():
        raise ValueError("exclusion radius covers the whole profile")
    idx = np.flatnonzero(outside)[np.argmax(before.values[outside])]
    return float(before.values[idx] - after.values[idx])


def off_lobe_peaks(p: Profile, peak_pos: float, exclusion_radius: float) -> np.ndarray:
    """Local maxima of a profile outside the main lobe, as (position, value) rows."""
    vals = p.values
    inner = np.arange(1, vals.size - 1)
    is_peak = (vals[inner] >= vals[inner - 1]) & (vals[inner] >= vals[inner + 1])
    idx = inner[is_peak]
    idx = idx[np.abs(p.positions[idx] - peak_pos) > exclusion_radius]
    return np.column_stack([p.positions[idx], vals[idx]])


def _linear_envelope(v) -> np.ndarray:
    if isinstance(v, DbVolume):
        return 10.0 ** (v.values / 20.0)
    if isinstance(v, ComplexVolume):
        return np.abs(v.data.astype(np.complex128))
    arr = np.asarray(v)
    if np.iscomplexobj(arr):
        return np.abs(arr)
    return arr.astype(float)


def cnr(v, inside_region: np.ndarray, outside_region: np.ndarray) -> float:
    """Contrast-to-noise ratio |mu_out - mu_in| / sqrt((var_out + var_in) / 2).

    Computed on linear envelope values; ``v`` may be a DbVolume, a complex
    volume or a plain envelope array.  Regions are boolean masks over the
    volume; they must be non-empty and disjoint.
    """
    env = _linear_envelope(v)
    inside = np.asarray(inside_region, dtype=bool)
    outside = np.asarray(outside_region, dtype=bool)
    if inside.shape != env.shape or outside.shape != env.shape:
        raise ValueError("region masks must match the volume shape")
    if not inside.any() or not outside.any():
        raise ValueError("regions must be non-empty")
    if np.any(inside & outside):
        raise ValueError("regions must be disjoint")
    vi = env[inside]
    vo = env[outside]
    var_i = vi.var()
    var_o = vo.var()
    if var_i + var_o == 0.0:
        raise ValueError("zero variance in both regions")
    return float(abs(vo.mean() - vi.mean()) / np.sqrt((var_o + var_i) / 2.0))


def cylinder_mask(grid: VolumeGrid, center, axis: str, radius: float) -> np.ndarray:
    """Boolean mask of voxels inside an infinite cylinder around ``axis``."""
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be 'x', 'y' or 'z', got {axis!r}")
    center = np.asarray(center, dtype=float)
    ax = "xyz".index(axis)
    others = [a for a in range(3) if a != ax]
    coords = np.meshgrid(grid.xs, grid.ys, grid.zs, indexing="ij")
    r2 = sum((coords[a] - center[a]) ** 2 for a in others)
    return r2 <= radius * radius
