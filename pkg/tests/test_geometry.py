"""Tests for geometry primitives: windows, patterns, seeds, lattice sums."""

import itertools

import numpy as np
import pytest

from hyperlat.errors import ConfigError
from hyperlat.geometry import (BoxWindow, Lattice, PointPattern, SeedSpec, crop,
                               dual_lattice, integer_norm_table,
                               lattice_points_in_ball)


# --------------------------------------------------------------------------
# SeedSpec
# --------------------------------------------------------------------------


def test_seedspec_deterministic():
    a = SeedSpec(12345, 7).generator().random(16)
    b = SeedSpec(12345, 7).generator().random(16)
    assert np.array_equal(a, b)


def test_seedspec_streams_differ():
    a = SeedSpec(12345, 0).generator().random(16)
    b = SeedSpec(12345, 1).generator().random(16)
    assert not np.array_equal(a, b)


def test_seedspec_stream_factory():
    spec = SeedSpec(99, 3)
    assert spec.stream(11) == SeedSpec(99, 11)


def test_seedspec_validation():
    with pytest.raises(ConfigError):
        SeedSpec(-1)
    with pytest.raises(ConfigError):
        SeedSpec(2**64)


# --------------------------------------------------------------------------
# BoxWindow / PointPattern
# --------------------------------------------------------------------------


def test_window_volume_and_contains():
    w = BoxWindow([-1.0, 0.0], [1.0, 3.0])
    assert w.volume() == pytest.approx(6.0)
    inside = w.contains(np.array([[0.0, 1.0], [1.0, 3.0], [1.1, 1.0]]))
    assert inside.tolist() == [True, True, False]  # boundary is inside


def test_window_cube_and_roundtrip():
    w = BoxWindow.cube(5.0, 3)
    assert np.allclose(w.lo, -2.5) and np.allclose(w.hi, 2.5)
    again = BoxWindow.from_dict(w.as_dict())
    assert np.array_equal(again.lo, w.lo) and np.array_equal(again.hi, w.hi)


def test_window_rejects_inverted_bounds():
    with pytest.raises(ConfigError):
        BoxWindow([0.0, 0.0], [1.0, -1.0])


def test_pattern_rejects_outside_points():
    w = BoxWindow.cube(2.0, 2)
    with pytest.raises(ConfigError):
        PointPattern(np.array([[3.0, 0.0]]), w)


def test_pattern_intensity():
    w = BoxWindow.cube(2.0, 2)
    p = PointPattern(np.zeros((8, 2)), w)
    assert p.intensity() == pytest.approx(2.0)


def test_crop():
    w = BoxWindow.cube(4.0, 2)
    pts = np.array([[0.0, 0.0], [1.9, 1.9], [0.5, -0.5]])
    p = PointPattern(pts, w)
    inner = crop(p, BoxWindow.cube(2.0, 2))
    assert inner.n == 2
    with pytest.raises(ConfigError):
        crop(p, BoxWindow.cube(10.0, 2))  # target must sit inside source


# --------------------------------------------------------------------------
# integer_norm_table vs brute force
# --------------------------------------------------------------------------


def _brute_counts(dim, max_nsq):
    """Count integer vectors per squared norm by direct enumeration."""
    m = int(np.ceil(np.sqrt(max_nsq)))
    counts = {}
    for v in itertools.product(range(-m, m + 1), repeat=dim):
        n = sum(c * c for c in v)
        if n <= max_nsq:
            counts[n] = counts.get(n, 0) + 1
    return counts


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_integer_norm_table_matches_enumeration(dim):
    max_nsq = 64
    nsq, counts = integer_norm_table(dim, max_nsq)
    brute = _brute_counts(dim, max_nsq)
    table = dict(zip(nsq.tolist(), counts.tolist()))
    assert table == brute


def test_norm_table_d3_first_shells():
    # 6 nearest neighbors, 12 next, 8 diagonal: cubic lattice shell sizes
    nsq, counts = integer_norm_table(3, 3)
    table = dict(zip(nsq.tolist(), counts.tolist()))
    assert table[0] == 1 and table[1] == 6 and table[2] == 12 and table[3] == 8


# --------------------------------------------------------------------------
# general lattices
# --------------------------------------------------------------------------


def test_integer_lattice_covolume():
    lat = Lattice.integer(3)
    assert lat.covolume() == pytest.approx(1.0)


def test_dual_lattice_pairing():
    rng = np.random.default_rng(5)
    basis = np.eye(3) + 0.2 * rng.standard_normal((3, 3))
    lat = Lattice(basis)
    dual = dual_lattice(lat)
    # defining property: <b_i, b*_j> = delta_ij
    gram = lat.basis @ dual.basis.T
    assert np.allclose(gram, np.eye(3), atol=1e-12)


def test_lattice_points_in_ball_brute_force():
    rng = np.random.default_rng(11)
    basis = np.eye(2) + 0.3 * rng.standard_normal((2, 2))
    lat = Lattice(basis)
    center = np.array([0.3, -0.2])
    radius = 3.1

    got = lattice_points_in_ball(lat, center, radius)
    got_set = {tuple(np.round(p, 9)) for p in got}

    brute = set()
    for i in range(-20, 21):
        for j in range(-20, 21):
            p = i * basis[:, 0] + j * basis[:, 1]  # columns generate
            if np.linalg.norm(p - center) <= radius:
                brute.add(tuple(np.round(p, 9)))
    assert got_set == brute


def test_lattice_points_enumeration_cap():
    lat = Lattice.integer(3)
    with pytest.raises(ConfigError):
        lattice_points_in_ball(lat, np.zeros(3), 1e4)
