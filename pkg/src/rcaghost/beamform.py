"""Baseband conversion and nine-path synthetic-aperture beamforming.

The delay-and-sum beamformer can focus along any of the nine
transmit/receive sub-path combinations.  Focusing the main (1, 1) path
images the scatterers; focusing the same data along a ghost path (any
combination involving an element end) coherently images that ghost's
artifact instead, which is what the correlation postfilter feeds on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .forward import ChannelData
from .geometry import ALL_PATHS, MAIN_PATH, Medium, RcaArray


@dataclass(frozen=True)
class VolumeGrid:
    """Regular voxel grid; axis order is (x, y, z), C-contiguous storage."""

    start: tuple[float, float, float]
    step: tuple[float, float, float]
    shape: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "step", tuple(float(v) for v in self.step))
        object.__setattr__(self, "shape", tuple(int(v) for v in self.shape))
        if len(self.start) != 3 or len(self.step) != 3 or len(self.shape) != 3:
            raise ValueError("start, step and shape must each have three entries")
        if any(s <= 0 for s in self.step):
            raise ValueError(f"grid steps must be positive, got {self.step}")
        if any(n < 1 for n in self.shape):
            raise ValueError(f"grid shape must be at least 1 per axis, got {self.shape}")

    def axis_positions(self, axis: int) -> np.ndarray:
        """Voxel centre coordinates along one axis (0 = x, 1 = y, 2 = z) [m]."""
        return self.start[axis] + np.arange(self.shape[axis]) * self.step[axis]

    @property
    def xs(self) -> np.ndarray:
        return self.axis_positions(0)

    @property
    def ys(self) -> np.ndarray:
        return self.axis_positions(1)

    @property
    def zs(self) -> np.ndarray:
        return self.axis_positions(2)

    @property
    def n_voxels(self) -> int:
        return self.shape[0] * self.shape[1] * self.shape[2]

    def voxel_center(self, index) -> np.ndarray:
        """Centre coordinates [m] of the voxel at integer ``index`` (3,)."""
        idx = np.asarray(index, dtype=int)
        return np.asarray(self.start) + idx * np.asarray(self.step)

    def nearest_index(self, point) -> tuple[int, int, int]:
        """Integer index of the voxel whose centre is closest to ``point``."""
        p = np.asarray(point, dtype=float)
        idx = np.rint((p - np.asarray(self.start)) / np.asarray(self.step)).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.shape) - 1)
        return tuple(int(i) for i in idx)


@dataclass(frozen=True, eq=False)
class ComplexVolume:
    """Beamformed complex64 volume on a ``VolumeGrid``.

    ``path`` records the (n, i) sub-path pair the volume was focused
    along; ``f0`` the carrier of the baseband data it was formed from.
    """

    data: np.ndarray = field(repr=False)
    grid: VolumeGrid
    path: tuple[int, int]
    f0: float

    def __post_init__(self):
        if tuple(self.data.shape) != self.grid.shape:
            raise ValueError(
                f"data shape {self.data.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.iscomplexobj(self.data):
            raise ValueError("volume data must be complex")
        object.__setattr__(self, "path", tuple(int(v) for v in self.path))


@dataclass(frozen=True, eq=False)
class FrameSet:
    """The main frame plus the eight ghost frames, keyed by (n, i)."""

    frames: dict[tuple[int, int], ComplexVolume]

    def __post_init__(self):
        keys = set(self.frames)
        if keys != set(ALL_PATHS):
            raise ValueError(f"need all nine sub-path frames, got {sorted(keys)}")
        grids = {f.grid for f in self.frames.values()}
        if len(grids) != 1:
            raise ValueError("all frames must share one grid")

    @property
    def main(self) -> ComplexVolume:
        return self.frames[MAIN_PATH]

    @property
    def grid(self) -> VolumeGrid:
        return self.main.grid

    def ghosts(self) -> list[ComplexVolume]:
        """Ghost frames in fixed (n, i) order."""
        return [self.frames[p] for p in ALL_PATHS if p != MAIN_PATH]


def to_baseband(channels: ChannelData, f0: float) -> ChannelData:
    """Demodulate RF traces to complex baseband.

    Multiplies each trace by exp(-j 2 pi f0 t) using absolute acquisition
    time t (so ``t0`` matters), then removes the 2 f0 image with a
    zero-phase moving average of length round(fs / f0) applied forward and
    backward; the composition is a centred triangular smoothing kernel,
    evaluated with zero padding.  Output samples are complex64.
    """
    if channels.is_baseband:
        raise ValueError("channel data is already baseband")
    if not channels.fs > 2 * f0:
        raise ValueError(f"sampling rate {channels.fs} must exceed twice the carrier {f0}")
    n_box = int(round(channels.fs / f0))
    box = np.ones(n_box) / n_box
    tri = np.convolve(box, box)  # zero-phase pair of moving averages
    mixed = channels.samples.astype(np.float64) * np.exp(
        -2j * np.pi * f0 * channels.times
    )
    n_tx, n_rx, n_t = mixed.shape
    flat = mixed.reshape(-1, n_t)
    out = np.empty_like(flat)
    for ch in range(flat.shape[0]):
        out[ch] = np.convolve(flat[ch], tri, mode="same")
    return ChannelData(
        samples=out.reshape(n_tx, n_rx, n_t).astype(np.complex64),
        fs=channels.fs,
        t0=channels.t0,
        swapped=channels.swapped,
        carrier_f0=f0,
    )


def hann_rx_apodization(n_rx: int) -> np.ndarray:
    """Hann window over the receive aperture, nonzero at the edge elements."""
    r = np.arange(n_rx)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * (r + 1) / (n_rx + 1)))


def _resolve_apodization(rx_apodization, n_rx: int) -> np.ndarray:
    if isinstance(rx_apodization, str):
        if rx_apodization == "hann":
            return hann_rx_apodization(n_rx)
        if rx_apodization == "uniform":
            return np.ones(n_rx)
        raise ValueError(f"unknown apodization {rx_apodization!r}")
    w = np.asarray(rx_apodization, dtype=float)
    if w.shape != (n_rx,):
        raise ValueError(f"apodization must have shape ({n_rx},), got {w.shape}")
    return w


def das_beamform(
    channels: ChannelData,
    array: RcaArray,
    grid: VolumeGrid,
    path: tuple[int, int],
    medium: Medium,
    rx_apodization="hann",
    lag: float = 0.0,
) -> ComplexVolume:
    """Delay-and-sum one sub-path pair onto a voxel grid.

    For every voxel the trace of each transmit/receive pair is sampled
    (linear interpolation, zero outside the recording) at the sub-path
    time of flight plus ``lag`` seconds, phase-compensated by
    exp(+j 2 pi f0 tof) and accumulated with receive apodization.  Pass
    the pulse's envelope-centre delay as ``lag`` when the traces embed
    pulses that start (rather than peak) at the time of flight.

    The sum runs transmit-major then receive, each voxel written once,
    so the result is independent of the worker count.
    """
    if not channels.is_baseband:
        raise ValueError("delay-and-sum expects baseband (complex) channel data")
    path = (int(path[0]), int(path[1]))
    if path not in ALL_PATHS:
        raise ValueError(f"path must be one of {ALL_PATHS}, got {path}")
    if grid.zs[0] <= 0:
        raise ValueError("voxel grid must lie strictly in front of the aperture (z > 0)")
    n_tx, n_rx, _ = channels.samples.shape
    tx_off, tx_hl, rx_off, rx_hl = array.tx_rx_arrays(channels.swapped)
    if (len(tx_off), len(rx_off)) != (n_tx, n_rx):
        raise ValueError(
            f"channel data with {n_tx} x {n_rx} channels does not match the "
            f"{len(tx_off)} x {len(rx_off)} aperture"
        )
    rx_w = _resolve_apodization(rx_apodization, n_rx)
    out = np.empty(grid.shape, dtype=np.complex128)
    _kernels.das_volume(
        np.ascontiguousarray(channels.samples, dtype=np.complex64),
        float(channels.t0),
        float(channels.fs),
        float(channels.carrier_f0),
        float(medium.c),
        np.ascontiguousarray(tx_off),
        float(tx_hl),
        np.ascontiguousarray(rx_off),
        float(rx_hl),
        bool(channels.swapped),
        path[0],
        path[1],
        np.ascontiguousarray(rx_w),
        float(lag * channels.fs),
        grid.xs,
        grid.ys,
        grid.zs,
        out,
    )
    return ComplexVolume(
        data=out.astype(np.complex64), grid=grid, path=path, f0=float(channels.carrier_f0)
    )


def beamform_frames(
    channels: ChannelData,
    array: RcaArray,
    grid: VolumeGrid,
    medium: Medium,
    rx_apodization="hann",
    lag: float = 0.0,
) -> FrameSet:
    """Beamform the main frame and the eight ghost frames from one acquisition."""
    frames = {
        path: das_beamform(channels, array, grid, path, medium, rx_apodization, lag)
        for path in ALL_PATHS
    }
    return FrameSet(frames=frames)
