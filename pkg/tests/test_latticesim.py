"""Tests for perturbed-lattice and null-model simulation."""

import numpy as np
import pytest

from hyperlat.errors import ConfigError
from hyperlat.gaussfield import CovarianceModel
from hyperlat.geometry import BoxWindow, SeedSpec
from hyperlat.latticesim import (PerturbedLatticeSpec, PoissonModel,
                                 recommended_buffer, simulate, simulate_batch,
                                 simulate_binomial, simulate_poisson)


def _spec(kind="iid", sigma=0.25, side=8.0, dim=3, **kw):
    if kind == "powexp":
        model = CovarianceModel("powexp", dim, sigma=sigma, range_=kw.get("range_", 2.5),
                                gamma=kw.get("gamma", 2.0))
    elif kind == "iid":
        model = CovarianceModel("iid", dim, sigma=sigma)
    else:
        model = CovarianceModel("stationarized", dim)
    return PerturbedLatticeSpec(model, BoxWindow.cube(side, dim))


def test_simulate_deterministic():
    spec = _spec()
    a = simulate(spec, SeedSpec(42))
    b = simulate(spec, SeedSpec(42))
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, simulate(spec, SeedSpec(43)).points)


def test_points_inside_window():
    p = simulate(_spec(sigma=0.4), SeedSpec(3))
    assert np.all(p.window.contains(p.points))


def test_stationarized_is_shifted_lattice():
    p = simulate(_spec(kind="stationarized", side=6.0), SeedSpec(9))
    # every point must sit on Z^3 + U for one common fractional shift U
    frac = np.mod(p.points, 1.0)
    assert np.allclose(frac, frac[0], atol=1e-9)
    assert p.n == pytest.approx(6.0**3, rel=0.05)  # one point per unit cell


def test_intensity_near_one():
    p = simulate(_spec(side=12.0), SeedSpec(17))
    # unit-rate lattice: count concentrates hard around |W| (hyperuniform)
    assert p.intensity() == pytest.approx(1.0, abs=0.02)


def test_batch_streams_are_regenerable():
    spec = _spec(side=5.0)
    batch = simulate_batch(spec, 4, SeedSpec(100, 2))
    again = simulate(spec, SeedSpec(100, 5))  # stream 2 + offset 3
    assert np.array_equal(batch[3].points, again.points)


def test_batch_replicates_differ():
    batch = simulate_batch(_spec(side=5.0), 3, SeedSpec(1))
    assert not np.array_equal(batch[0].points, batch[1].points)
    assert not np.array_equal(batch[1].points, batch[2].points)


def test_recommended_buffer_grows_with_sigma():
    small = recommended_buffer(CovarianceModel("iid", 3, sigma=0.1))
    big = recommended_buffer(CovarianceModel("iid", 3, sigma=2.0))
    assert small >= 1 and big > small


def test_buffer_covers_displacements():
    # truncating the site slab must not lose mass: compare a generous
    # buffer against the default on the same stream; interior counts agree
    # in distribution, so check the default keeps intensity at 1
    p = simulate(_spec(sigma=1.0, side=10.0), SeedSpec(8))
    assert p.intensity() == pytest.approx(1.0, abs=0.06)


def test_meta_records_provenance():
    p = simulate(_spec(kind="powexp", sigma=0.3), SeedSpec(5))
    assert p.meta["model"]["kind"] == "powexp"
    assert p.meta["seed"] == {"master_seed": 5, "stream_id": 0}
    assert p.meta["field_method"] in ("fft", "cholesky", "direct")


def test_poisson_and_binomial_nulls():
    w = BoxWindow.cube(10.0, 2)
    pois = simulate_poisson(w, 1.0, SeedSpec(4))
    assert abs(pois.n - 100.0) < 4 * 10.0  # Poisson(100), 4 sigma
    binom = simulate_binomial(w, 57, SeedSpec(4))
    assert binom.n == 57
    assert np.all(w.contains(binom.points))


def test_poisson_model_type():
    m = PoissonModel(3, 1.0)
    assert m.to_dict() == {"kind": "poisson", "dim": 3, "intensity": 1.0}
    with pytest.raises(ConfigError):
        PoissonModel(3, 0.0)


def test_lattice_spec_rejects_poisson_model():
    # the lattice pipeline has no displacement field to draw for it
    with pytest.raises(ConfigError, match="simulate_poisson"):
        PerturbedLatticeSpec(PoissonModel(3, 1.0), BoxWindow.cube(5.0, 3))


def test_batch_size_validation():
    with pytest.raises(ConfigError):
        simulate_batch(_spec(side=4.0), 0, SeedSpec(1))
