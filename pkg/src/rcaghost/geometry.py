"""Array and scene geometry for row-column-addressed (RCA) apertures.

An RCA aperture is two orthogonal stacks of long thin elements: rows extend
along x and are stacked along y, columns extend along y and are stacked
along x.  Rows transmit and columns receive unless the caller swaps them.

Because the elements are long compared to the wavelength, a point scatterer
returns three distinct arrivals per element: one from the point of the
element nearest the scatterer and one from each element end (the edge
waves).  ``tof`` evaluates the round-trip travel time for any of the nine
transmit/receive sub-path combinations; sub-path pair ``(1, 1)`` is the
main (nearest-point/nearest-point) path, the remaining eight involve at
least one element end and give rise to ghost echoes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# (transmit sub-path n, receive sub-path i).  Sub-path 1 is the nearest
# point on the element, 2 the negative end, 3 the positive end.
ALL_PATHS: tuple[tuple[int, int], ...] = tuple(
    (n, i) for n in (1, 2, 3) for i in (1, 2, 3)
)
MAIN_PATH: tuple[int, int] = (1, 1)
GHOST_PATHS: tuple[tuple[int, int], ...] = tuple(
    p for p in ALL_PATHS if p != MAIN_PATH
)


@dataclass(frozen=True)
class Medium:
    """Homogeneous propagation medium.

    Parameters
    ----------
    c : float
        Speed of sound [m/s].  Must be positive.
    """

    c: float

    def __post_init__(self):
        if not (np.isfinite(self.c) and self.c > 0):
            raise ValueError(f"speed of sound must be positive and finite, got {self.c}")


@dataclass(frozen=True)
class LineElement:
    """Thin line element lying in the plane z = ``plane_z``.

    ``orientation`` is the axis the element extends along: an ``'x'``
    element (a row) spans ``[-half_length, +half_length]`` in x at
    y = ``lateral_offset``; a ``'y'`` element (a column) spans the same
    range in y at x = ``lateral_offset``.
    """

    orientation: str
    lateral_offset: float
    half_length: float
    plane_z: float = 0.0

    def __post_init__(self):
        if self.orientation not in ("x", "y"):
            raise ValueError(f"orientation must be 'x' or 'y', got {self.orientation!r}")
        if not (np.isfinite(self.half_length) and self.half_length > 0):
            raise ValueError(f"half_length must be positive, got {self.half_length}")
        if not np.isfinite(self.lateral_offset) or not np.isfinite(self.plane_z):
            raise ValueError("element coordinates must be finite")

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Negative-end and positive-end coordinates, each shape (3,)."""
        return (
            self._point_at(-self.half_length),
            self._point_at(+self.half_length),
        )

    def _point_at(self, along: float) -> np.ndarray:
        if self.orientation == "x":
            return np.array([along, self.lateral_offset, self.plane_z])
        return np.array([self.lateral_offset, along, self.plane_z])


def path_point(element: LineElement, p, k: int) -> np.ndarray:
    """Point on ``element`` that emits/receives sub-path ``k`` for field point ``p``.

    k = 1 is the orthogonal projection of ``p`` onto the element's axis,
    clamped to the element extent; k = 2 and k = 3 are the negative and
    positive ends.  Returns a (3,) float array.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise ValueError(f"field point must have shape (3,), got {p.shape}")
    if k == 1:
        axis = 0 if element.orientation == "x" else 1
        along = float(np.clip(p[axis], -element.half_length, element.half_length))
        return element._point_at(along)
    if k == 2:
        return element._point_at(-element.half_length)
    if k == 3:
        return element._point_at(+element.half_length)
    raise ValueError(f"sub-path index must be 1, 2 or 3, got {k}")


def tof(p, tx: LineElement, rx: LineElement, path: tuple[int, int], medium: Medium) -> float:
    """Round-trip time of flight [s] for one transmit/receive sub-path pair.

    The travel time is (|p - s_n| + |r_i - p|) / c where s_n is the emitting
    point on the transmit element for sub-path n and r_i the receiving point
    on the receive element for sub-path i.
    """
    n, i = path
    p = np.asarray(p, dtype=float)
    s = path_point(tx, p, n)
    r = path_point(rx, p, i)
    d = float(np.linalg.norm(p - s)) + float(np.linalg.norm(r - p))
    return d / medium.c


@dataclass(frozen=True)
class RcaArray:
    """Row-column aperture centred on the origin of the z = 0 plane.

    Rows extend along x and are stacked along y with ``pitch_y``; columns
    extend along y and are stacked along x with ``pitch_x``.  Each stack is
    exactly long enough to cover the other one, so an element's half-length
    is (crossing count * crossing pitch) / 2.
    """

    n_rows: int
    n_cols: int
    pitch_x: float
    pitch_y: float

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("element counts must be at least 1")
        if self.pitch_x <= 0 or self.pitch_y <= 0:
            raise ValueError("pitches must be positive")

    @property
    def row_offsets(self) -> np.ndarray:
        """y position of each row, centred on 0 [m]."""
        return (np.arange(self.n_rows) - (self.n_rows - 1) / 2) * self.pitch_y

    @property
    def col_offsets(self) -> np.ndarray:
        """x position of each column, centred on 0 [m]."""
        return (np.arange(self.n_cols) - (self.n_cols - 1) / 2) * self.pitch_x

    @property
    def row_half_length(self) -> float:
        return self.n_cols * self.pitch_x / 2

    @property
    def col_half_length(self) -> float:
        return self.n_rows * self.pitch_y / 2

    @property
    def rows(self) -> tuple[LineElement, ...]:
        return tuple(
            LineElement("x", float(y), self.row_half_length) for y in self.row_offsets
        )

    @property
    def cols(self) -> tuple[LineElement, ...]:
        return tuple(
            LineElement("y", float(x), self.col_half_length) for x in self.col_offsets
        )

    def tx_rx_elements(
        self, swap_tx_rx: bool = False
    ) -> tuple[tuple[LineElement, ...], tuple[LineElement, ...]]:
        """Transmit and receive element tuples; rows transmit unless swapped."""
        if swap_tx_rx:
            return self.cols, self.rows
        return self.rows, self.cols

    def tx_rx_arrays(
        self, swap_tx_rx: bool = False
    ) -> tuple[np.ndarray, float, np.ndarray, float]:
        """(tx_offsets, tx_half_length, rx_offsets, rx_half_length) for kernels.

        Transmit offsets are positions on the axis perpendicular to the
        transmit elements (y for rows), receive offsets likewise (x for
        columns); swap flips the roles.
        """
        if swap_tx_rx:
            return (
                self.col_offsets,
                self.col_half_length,
                self.row_offsets,
                self.row_half_length,
            )
        return (
            self.row_offsets,
            self.row_half_length,
            self.col_offsets,
            self.col_half_length,
        )
