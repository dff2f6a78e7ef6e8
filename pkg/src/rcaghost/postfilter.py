"""Ghost suppression by local correlation between main and ghost frames.

All nine frames of a ``FrameSet`` focus the echoes of their own sub-path
at the true scatterer position, so around real image content every ghost
frame locally agrees with the main frame and the normalized complex
correlation is close to 1.  Around a ghost artifact (or plain clutter) the
frames disagree and the correlation drops.  Using the combined correlation
magnitude as a voxel-wise weight therefore keeps the image and attenuates
the artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamform import ComplexVolume, FrameSet

COMBINE_MODES = ("min", "product", "mean")
WEIGHT_KINDS = ("magnitude", "positive-real")


@dataclass(frozen=True)
class CorrelationKernel:
    """Half-widths of the sliding correlation window, in voxels per axis.

    A half-width of k spans 2 k + 1 voxels; windows are clipped at the
    volume border.
    """

    kx: int = 1
    ky: int = 1
    kz: int = 4

    def __post_init__(self):
        if min(self.kx, self.ky, self.kz) < 0:
            raise ValueError("kernel half-widths must be non-negative")

    @property
    def window_shape(self) -> tuple[int, int, int]:
        return (2 * self.kx + 1, 2 * self.ky + 1, 2 * self.kz + 1)


def complex_correlation(x, y) -> complex:
    """Normalized complex correlation sum(x conj(y)) / (|x| |y|).

    Returns 0 when either input has zero norm.  The magnitude is bounded
    by 1 and invariant to per-input complex scaling; a global phase
    difference between the inputs shows up in the phase only.
    """
    x = np.asarray(x).ravel()
    y = np.asarray(y).ravel()
    if x.shape != y.shape:
        raise ValueError(f"inputs must have matching sizes, got {x.shape} and {y.shape}")
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        return 0j
    return complex(np.sum(x * np.conj(y)) / (nx * ny))


def _box_sum(vol: np.ndarray, kernel: CorrelationKernel) -> np.ndarray:
    """Sum over the clipped sliding window centred at each voxel."""
    out = vol
    for axis, k in enumerate((kernel.kx, kernel.ky, kernel.kz)):
        if k == 0:
            continue
        pad = [(0, 0)] * 3
        pad[axis] = (k, k)
        padded = np.pad(out, pad)  # zero padding == clipping the window
        win = np.lib.stride_tricks.sliding_window_view(padded, 2 * k + 1, axis=axis)
        out = win.sum(axis=-1)
    return out


def local_correlation_map(
    main: ComplexVolume, ghost: ComplexVolume, kernel: CorrelationKernel
) -> np.ndarray:
    """Sliding-window normalized complex correlation of two frames.

    Every voxel gets the normalized correlation of the two volumes over
    the window centred there (clipped at the borders); voxels where either
    window has zero norm get 0.  Returns a complex128 array on the shared
    grid.
    """
    if main.grid != ghost.grid:
        raise ValueError("frames must share one grid")
    x = main.data.astype(np.complex128)
    y = ghost.data.astype(np.complex128)
    num = _box_sum(x * np.conj(y), kernel)
    ex = _box_sum((x * np.conj(x)).real, kernel)
    ey = _box_sum((y * np.conj(y)).real, kernel)
    den = np.sqrt(ex) * np.sqrt(ey)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


def combine_weights(maps, mode: str = "min", kind: str = "magnitude") -> np.ndarray:
    """Merge per-ghost correlation maps into one voxel-wise weight map.

    Each map contributes its correlation magnitude per voxel (or
    max(0, Re corr) with ``kind='positive-real'``); high values mean the
    ghost frame locally agrees with the main frame and the voxel should
    be kept.  ``mode`` picks the merge: 'min' is the most suppressive,
    'product' compounds the eight factors, 'mean' is the mildest.  The
    result is clamped to [0, 1].
    """
    if mode not in COMBINE_MODES:
        raise ValueError(f"mode must be one of {COMBINE_MODES}, got {mode!r}")
    if kind not in WEIGHT_KINDS:
        raise ValueError(f"kind must be one of {WEIGHT_KINDS}, got {kind!r}")
    arrays = [np.asarray(m) for m in maps]
    if not arrays:
        raise ValueError("need at least one correlation map")
    if kind == "magnitude":
        rs = np.stack([np.abs(a) for a in arrays])
    else:
        rs = np.stack([np.maximum(np.asarray(a).real, 0.0) for a in arrays])
    if mode == "min":
        w = rs.min(axis=0)
    elif mode == "product":
        w = rs.prod(axis=0)
    else:
        w = rs.mean(axis=0)
    return np.clip(w, 0.0, 1.0)


def apply_weight(main: ComplexVolume, weights: np.ndarray) -> ComplexVolume:
    """Multiply the complex main frame voxel-wise by a real weight map."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != main.data.shape:
        raise ValueError(f"weight shape {w.shape} does not match volume {main.data.shape}")
    if w.min() < 0.0 or w.max() > 1.0:
        raise ValueError("weights must lie in [0, 1]")
    data = (main.data * w).astype(np.complex64)
    return ComplexVolume(data=data, grid=main.grid, path=main.path, f0=main.f0)


def weight_map(
    frames: FrameSet,
    kernel: CorrelationKernel | None = None,
    mode: str = "min",
    kind: str = "magnitude",
) -> np.ndarray:
    """Suppression weight map for a nine-frame set (one map per ghost frame)."""
    kernel = kernel or CorrelationKernel()
    maps = [local_correlation_map(frames.main, g, kernel) for g in frames.ghosts()]
    return combine_weights(maps, mode=mode, kind=kind)


def suppress_ghosts(
    frames: FrameSet,
    kernel: CorrelationKernel | None = None,
    mode: str = "min",
    kind: str = "magnitude",
) -> tuple[ComplexVolume, np.ndarray]:
    """Weight-map the main frame; returns (filtered volume, weight map)."""
    w = weight_map(frames, kernel=kernel, mode=mode, kind=kind)
    return apply_weight(frames.main, w), w
