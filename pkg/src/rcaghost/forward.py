"""Parametric echo simulator for row-column apertures.

Each transmit/receive channel is synthesized as a spike train: every
scatterer contributes nine arrivals, one per transmit/receive sub-path
combination (nearest point or either element end on each leg).  A spike of
amplitude a_n * a_i / (d_tx * d_rx) is placed at the round-trip time of
flight with two-tap linear interpolation onto the sample grid, and the
train is convolved with the excitation pulse.  This reproduces the
geometry of edge-wave ghost echoes without running a full wave simulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .geometry import Medium, RcaArray


@dataclass(frozen=True, eq=False)
class Pulse:
    """Sampled excitation pulse (Hann-windowed tone burst)."""

    f0: float       # centre frequency [Hz]
    cycles: float   # burst length [carrier periods]
    fs: float       # sampling rate [Hz]
    samples: np.ndarray = field(repr=False)  # (n,) float64

    @property
    def duration(self) -> float:
        """Pulse length [s]."""
        return len(self.samples) / self.fs

    @property
    def center_delay(self) -> float:
        """Delay from pulse start to the envelope peak [s]."""
        return (len(self.samples) - 1) / (2.0 * self.fs)


def make_pulse(f0: float, cycles: float, fs: float) -> Pulse:
    """Hann-windowed sine burst of ``cycles`` carrier periods.

    samples[k] = hann(k / (L - 1)) * sin(2 pi f0 k / fs) with
    L = round(cycles * fs / f0) and hann(u) = 0.5 (1 - cos(2 pi u)).
    Requires fs > 2 f0 and cycles >= 1.
    """
    if not fs > 2 * f0:
        raise ValueError(f"sampling rate {fs} must exceed twice the centre frequency {f0}")
    if f0 <= 0:
        raise ValueError(f"centre frequency must be positive, got {f0}")
    if cycles < 1:
        raise ValueError(f"cycles must be at least 1, got {cycles}")
    n = int(round(cycles * fs / f0))
    k = np.arange(n)
    window = 0.5 * (1.0 - np.cos(2.0 * np.pi * k / (n - 1)))
    samples = window * np.sin(2.0 * np.pi * f0 * k / fs)
    return Pulse(f0=f0, cycles=cycles, fs=fs, samples=samples)


@dataclass(frozen=True)
class EdgeModel:
    """Relative strengths of the three arrivals from one long element.

    ``main_amp`` scales the nearest-point arrival, ``edge_amp`` the two
    end arrivals (it may be negative: edge waves flip polarity).  With
    ``spreading`` enabled each round trip is additionally weighted by
    1 / (d_tx * d_rx).
    """

    main_amp: float = 1.0
    edge_amp: float = -0.5
    spreading: bool = True

    def __post_init__(self):
        if not np.isfinite(self.main_amp) or not np.isfinite(self.edge_amp):
            raise ValueError("edge model amplitudes must be finite")


@dataclass(frozen=True, eq=False)
class Phantom:
    """Collection of point scatterers.

    ``positions`` has shape (n, 3) [m] with all z > 0 (in front of the
    aperture); ``amplitudes`` has shape (n,).
    """

    positions: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)
    kind: str = "custom"

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        amp = np.asarray(self.amplitudes, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValueError(f"positions must have shape (n, 3) with n >= 1, got {pos.shape}")
        if amp.shape != (pos.shape[0],):
            raise ValueError("amplitudes must have one entry per scatterer")
        if not np.all(np.isfinite(pos)) or not np.all(np.isfinite(amp)):
            raise ValueError("phantom positions and amplitudes must be finite")
        if not np.all(pos[:, 2] > 0):
            raise ValueError("all scatterers must lie at z > 0")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def single_point(cls, position, amplitude: float = 1.0) -> "Phantom":
        return cls(
            positions=np.asarray(position, dtype=float).reshape(1, 3),
            amplitudes=np.array([amplitude], dtype=float),
            kind="single-point",
        )

    @property
    def n_scatterers(self) -> int:
        return self.positions.shape[0]


def make_cyst_phantom(
    center,
    radius: float,
    axis: str,
    box_min,
    box_max,
    density: float,
    seed: int,
) -> Phantom:
    """Speckle phantom with an anechoic cylindrical void.

    Scatterer count is Poisson(density * box volume); positions are drawn
    uniformly over the box and any scatterer inside the infinite cylinder
    (radius ``radius`` around the line through ``center`` along ``axis``)
    is discarded.  Amplitudes are standard normal.  Fully reproducible for
    a fixed ``seed``.
    """
    if axis not in ("x", "y", "z"):
        raise ValueError(f"cylinder axis must be 'x', 'y' or 'z', got {axis!r}")
    if radius <= 0 or density <= 0:
        raise ValueError("radius and density must be positive")
    center = np.asarray(center, dtype=float)
    lo = np.asarray(box_min, dtype=float)
    hi = np.asarray(box_max, dtype=float)
    if not np.all(hi > lo):
        raise ValueError("box_max must exceed box_min on every axis")
    volume = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    count = int(rng.poisson(density * volume))
    pos = rng.uniform(lo, hi, size=(count, 3))
    amp = rng.standard_normal(count)
    ax = "xyz".index(axis)
    other = [a for a in range(3) if a != ax]
    r2 = (pos[:, other[0]] - center[other[0]]) ** 2 + (pos[:, other[1]] - center[other[1]]) ** 2
    keep = r2 >= radius * radius
    return Phantom(positions=pos[keep], amplitudes=amp[keep], kind="anechoic-cyst")


@dataclass(frozen=True, eq=False)
class ChannelData:
    """Per-channel traces for every transmit/receive pair.

    ``samples`` has shape (n_tx, n_rx, n_t); float32 for raw RF traces,
    complex64 after baseband conversion (``carrier_f0`` records the
    removed carrier, None while still RF).  ``t0`` is the acquisition
    time of sample 0 [s]; rows transmit unless ``swapped``.
    """

    samples: np.ndarray = field(repr=False)
    fs: float
    t0: float
    swapped: bool = False
    carrier_f0: float | None = None

    def __post_init__(self):
        if self.samples.ndim != 3:
            raise ValueError(f"samples must have shape (n_tx, n_rx, n_t), got {self.samples.shape}")
        if self.fs <= 0:
            raise ValueError(f"sampling rate must be positive, got {self.fs}")

    @property
    def is_baseband(self) -> bool:
        return np.iscomplexobj(self.samples)

    @property
    def times(self) -> np.ndarray:
        """Absolute acquisition time of each sample [s]."""
        return self.t0 + np.arange(self.samples.shape[2]) / self.fs


def simulate_channel_data(
    array: RcaArray,
    phantom: Phantom,
    pulse: Pulse,
    edge: EdgeModel,
    medium: Medium,
    swap_tx_rx: bool = False,
    memory_cap_bytes: int = 2**30,
) -> ChannelData:
    """Simulate one full synthetic-aperture acquisition.

    Every transmit element is fired once; all receive elements record.
    The trace window is sized to cover all nine arrivals of every
    scatterer plus the pulse length, with ``t0`` aligned to the sample
    grid.  Raises ValueError when the required buffer would exceed
    ``memory_cap_bytes``.
    """
    tx_off, tx_hl, rx_off, rx_hl = array.tx_rx_arrays(swap_tx_rx)
    pos = phantom.positions
    if swap_tx_rx:
        tx_e, tx_q = pos[:, 1], pos[:, 0]
        rx_e, rx_q = pos[:, 0], pos[:, 1]
    else:
        tx_e, tx_q = pos[:, 0], pos[:, 1]
        rx_e, rx_q = pos[:, 1], pos[:, 0]
    z = pos[:, 2]

    def leg_distances(e, q, offsets, hl):
        # (n_scat, n_elem) distances for each of the three sub-paths
        dq = q[:, None] - offsets[None, :]
        ce = np.clip(e, -hl, hl)
        d1 = np.sqrt((e - ce)[:, None] ** 2 + dq**2 + (z**2)[:, None])
        d2 = np.sqrt((e + hl)[:, None] ** 2 + dq**2 + (z**2)[:, None])
        d3 = np.sqrt((e - hl)[:, None] ** 2 + dq**2 + (z**2)[:, None])
        return np.stack([d1, d2, d3])

    d_tx = leg_distances(tx_e, tx_q, tx_off, tx_hl)
    d_rx = leg_distances(rx_e, rx_q, rx_off, rx_hl)
    tof_min = (d_tx.min() + d_rx.min()) / medium.c
    tof_max = (d_tx.max(axis=(0, 2)) + d_rx.max(axis=(0, 2))).max() / medium.c

    n_pulse = len(pulse.samples)
    t0 = (np.floor(tof_min * pulse.fs) - 2) / pulse.fs
    n_t = int(np.ceil((tof_max - t0) * pulse.fs)) + n_pulse + 3
    n_tx, n_rx = len(tx_off), len(rx_off)
    nbytes = n_tx * n_rx * n_t * 4
    if nbytes > memory_cap_bytes:
        raise ValueError(
            f"channel buffer of {n_tx} x {n_rx} x {n_t} samples needs {nbytes} bytes, "
            f"exceeding the memory cap of {memory_cap_bytes}"
        )

    out = np.zeros((n_tx, n_rx, n_t), dtype=np.float32)
    _kernels.simulate_channels(
        np.ascontiguousarray(pos),
        np.ascontiguousarray(phantom.amplitudes),
        np.ascontiguousarray(tx_off),
        float(tx_hl),
        np.ascontiguousarray(rx_off),
        float(rx_hl),
        bool(swap_tx_rx),
        float(edge.main_amp),
        float(edge.edge_amp),
        bool(edge.spreading),
        float(medium.c),
        float(t0),
        float(pulse.fs),
        np.ascontiguousarray(pulse.samples),
        out,
    )
    return ChannelData(samples=out, fs=pulse.fs, t0=float(t0), swapped=swap_tx_rx)
