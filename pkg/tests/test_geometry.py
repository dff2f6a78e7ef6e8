"""Element geometry and time-of-flight paths."""

import numpy as np
import pytest

from rcaghost.geometry import (
    ALL_PATHS,
    GHOST_PATHS,
    MAIN_PATH,
    LineElement,
    Medium,
    RcaArray,
    path_point,
    tof,
)

MM = 1e-3


def _dense_min_distance(element, p, n=100_000):
    """Brute-force shortest distance from p to the element's segment."""
    t = np.linspace(-element.half_length, element.half_length, n)
    if element.orientation == "x":
        dx = t - p[0]
        dy = element.lateral_offset - p[1]
    else:
        dx = element.lateral_offset - p[0]
        dy = t - p[1]
    dz = element.plane_z - p[2]
    return float(np.sqrt(dx * dx + dy * dy + dz * dz).min())


class TestPathPoint:
    def setup_method(self):
        self.row = LineElement("x", 0.0, 9.472 * MM)

    def test_on_axis_projection(self):
        p = np.array([0.0, 0.0, 30 * MM])
        np.testing.assert_allclose(path_point(self.row, p, 1), [0.0, 0.0, 0.0])

    def test_negative_end(self):
        p = np.array([0.0, 0.0, 30 * MM])
        np.testing.assert_allclose(
            path_point(self.row, p, 2), [-9.472 * MM, 0.0, 0.0]
        )

    def test_positive_end(self):
        p = np.array([0.0, 0.0, 30 * MM])
        np.testing.assert_allclose(
            path_point(self.row, p, 3), [9.472 * MM, 0.0, 0.0]
        )

    def test_projection_clamps_beyond_end(self):
        p = np.array([20 * MM, 0.0, 30 * MM])
        np.testing.assert_allclose(
            path_point(self.row, p, 1), [9.472 * MM, 0.0, 0.0]
        )

    def test_projection_interior(self):
        p = np.array([3 * MM, 5 * MM, 10 * MM])
        np.testing.assert_allclose(path_point(self.row, p, 1), [3 * MM, 0.0, 0.0])

    def test_column_orientation(self):
        col = LineElement("y", 2 * MM, 4 * MM)
        p = np.array([0.0, -7 * MM, 10 * MM])
        # projection clamps to the -y end; offset lives on the x axis
        np.testing.assert_allclose(path_point(col, p, 1), [2 * MM, -4 * MM, 0.0])
        np.testing.assert_allclose(path_point(col, p, 3), [2 * MM, 4 * MM, 0.0])

    def test_projection_matches_dense_search(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            el = LineElement(
                rng.choice(["x", "y"]),
                float(rng.uniform(-3, 3)) * MM,
                float(rng.uniform(1, 10)) * MM,
            )
            p = rng.uniform([-15e-3, -15e-3, 1e-3], [15e-3, 15e-3, 40e-3])
            want = _dense_min_distance(el, p)
            got = float(np.linalg.norm(path_point(el, p, 1) - p))
            assert got <= want + 1e-12
            assert abs(got - want) < 1e-9

    def test_invalid_k_raises(self):
        p = np.array([0.0, 0.0, 30 * MM])
        with pytest.raises(ValueError):
            path_point(self.row, p, 4)

    def test_bad_point_shape_raises(self):
        with pytest.raises(ValueError):
            path_point(self.row, np.zeros(2), 1)


class TestTof:
    """On-axis scene with 9.472 mm half-length elements."""

    def setup_method(self):
        self.tx = LineElement("x", 0.0, 9.472 * MM)
        self.rx = LineElement("y", 0.0, 9.472 * MM)
        self.p = np.array([0.0, 0.0, 30 * MM])
        self.medium = Medium(c=1480.0)

    def test_direct_path(self):
        t = tof(self.p, self.tx, self.rx, (1, 1), self.medium)
        assert t == pytest.approx(40.5405e-6, abs=1e-9)

    def test_transmit_edge_path(self):
        t = tof(self.p, self.tx, self.rx, (2, 1), self.medium)
        assert t == pytest.approx(41.5270e-6, abs=1e-9)

    def test_double_edge_path(self):
        t = tof(self.p, self.tx, self.rx, (2, 3), self.medium)
        assert t == pytest.approx(42.5134e-6, abs=1e-9)

    def test_direct_path_is_shortest(self):
        direct = tof(self.p, self.tx, self.rx, MAIN_PATH, self.medium)
        for path in GHOST_PATHS:
            assert tof(self.p, self.tx, self.rx, path, self.medium) >= direct

    def test_reciprocity(self):
        # swapping transmit/receive roles swaps the sub-path indices
        p = np.array([2 * MM, -5 * MM, 20 * MM])
        for n, k in ALL_PATHS:
            a = tof(p, self.tx, self.rx, (n, k), self.medium)
            b = tof(p, self.rx, self.tx, (k, n), self.medium)
            assert a == pytest.approx(b, abs=1e-15)

    def test_mirror_symmetry(self):
        # the scene maps onto itself under (x,y) -> (y,x)
        p = np.array([2 * MM, -5 * MM, 20 * MM])
        mirrored = np.array([-5 * MM, 2 * MM, 20 * MM])
        for n, k in ALL_PATHS:
            a = tof(p, self.tx, self.rx, (n, k), self.medium)
            b = tof(mirrored, self.rx, self.tx, (n, k), self.medium)
            assert a == pytest.approx(b, abs=1e-15)

    def test_scales_inversely_with_sound_speed(self):
        t1 = tof(self.p, self.tx, self.rx, (3, 2), Medium(c=1480.0))
        t2 = tof(self.p, self.tx, self.rx, (3, 2), Medium(c=2960.0))
        assert t1 == pytest.approx(2.0 * t2, rel=1e-12)


class TestPathTables:
    def test_nine_paths(self):
        assert len(ALL_PATHS) == 9
        assert MAIN_PATH == (1, 1)
        assert len(GHOST_PATHS) == 8
        assert MAIN_PATH not in GHOST_PATHS
        assert set(ALL_PATHS) == {(n, k) for n in (1, 2, 3) for k in (1, 2, 3)}


class TestRcaArray:
    def test_desk_scale_layout(self):
        arr = RcaArray(n_rows=32, n_cols=32, pitch_x=148e-6, pitch_y=148e-6)
        assert arr.row_half_length == pytest.approx(2.368 * MM)
        assert arr.col_half_length == pytest.approx(2.368 * MM)
        # rows are stacked along y, columns along x, both centred on origin
        assert len(arr.row_offsets) == 32
        np.testing.assert_allclose(np.mean(arr.row_offsets), 0.0, atol=1e-12)
        np.testing.assert_allclose(np.diff(arr.row_offsets), 148e-6)
        np.testing.assert_allclose(np.diff(arr.col_offsets), 148e-6)

    def test_elements(self):
        arr = RcaArray(n_rows=4, n_cols=6, pitch_x=100e-6, pitch_y=200e-6)
        rows = arr.rows
        cols = arr.cols
        assert len(rows) == 4 and len(cols) == 6
        assert all(el.orientation == "x" for el in rows)
        assert all(el.orientation == "y" for el in cols)
        assert rows[0].half_length == pytest.approx(6 * 100e-6 / 2)
        assert cols[0].half_length == pytest.approx(4 * 200e-6 / 2)

    def test_invalid_counts_raise(self):
        with pytest.raises(ValueError):
            RcaArray(n_rows=0, n_cols=4, pitch_x=1e-4, pitch_y=1e-4)
        with pytest.raises(ValueError):
            RcaArray(n_rows=4, n_cols=4, pitch_x=-1e-4, pitch_y=1e-4)


class TestMedium:
    def test_rejects_nonpositive_speed(self):
        with pytest.raises(ValueError):
            Medium(c=0.0)
