"""Lattices, box windows, point patterns, and seeded random streams.

Conventions used throughout the package:

* a lattice is ``{B z : z integer vector}`` for a nonsingular basis ``B``
  (columns are the generating vectors);
* box windows are closed: points exactly on the boundary belong to the
  window;
* randomness is always routed through :class:`SeedSpec`, a pure function
  from ``(master_seed, stream_id)`` to a generator, so any run can be
  replayed bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .errors import ConfigError

_U64_MAX = 2**64 - 1

# Hard cap on candidate sites scanned by lattice_points_in_ball.
ENUMERATION_CAP = 10**8


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic seed: a master seed plus a stream index.

    Distinct ``stream_id`` values give statistically independent streams
    (numpy ``SeedSequence`` spawn keys), so replicate k of a batch can be
    regenerated without drawing replicates 0..k-1.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not (0 <= int(v) <= _U64_MAX):
                raise ConfigError(f"{name} must be an integer in [0, 2^64): got {v!r}")

    def generator(self) -> np.random.Generator:
        """Fresh generator for this (master_seed, stream_id) pair."""
        seq = np.random.SeedSequence(entropy=int(self.master_seed),
                                     spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(seq))

    def stream(self, stream_id: int) -> "SeedSpec":
        """Same master seed, different stream."""
        return SeedSpec(self.master_seed, stream_id)


@dataclass
class Lattice:
    """Point lattice given by a nonsingular basis matrix (columns generate).

    Simulation only ever uses the integer lattice Z^d, but the type carries
    a general basis so dual-lattice identities can be expressed and tested.
    """

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ConfigError(f"lattice basis must be square, got shape {b.shape}")
        if abs(np.linalg.det(b)) < 1e-12:
            raise ConfigError("lattice basis is singular")
        self.basis = b

    @classmethod
    def integer(cls, dim: int) -> "Lattice":
        if dim < 1:
            raise ConfigError(f"dimension must be >= 1, got {dim}")
        return cls(np.eye(int(dim)))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def is_integer(self) -> bool:
        return bool(np.allclose(self.basis, np.eye(self.dim), atol=1e-12))

    def covolume(self) -> float:
        """Volume of the fundamental cell, |det B|."""
        return float(abs(np.linalg.det(self.basis)))


def dual_lattice(lattice: Lattice) -> Lattice:
    """Dual (reciprocal) lattice with basis ``(B^T)^{-1}``.

    With this convention the dual of the dual is the original lattice and
    Z^d is self-dual.
    """
    return Lattice(np.linalg.inv(lattice.basis.T))


@dataclass
class BoxWindow:
    """Axis-aligned closed box ``[min_1, max_1] x ... x [min_d, max_d]``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ConfigError("window bounds must be 1-d arrays of equal length")
        if not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
            raise ConfigError("window bounds must be finite")
        if np.any(hi <= lo):
            raise ConfigError("window must have positive extent in every coordinate")
        self.lo, self.hi = lo, hi

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def sides(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def volume(self) -> float:
        return float(np.prod(self.sides))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the closed box."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def contains_box(self, other: "BoxWindow") -> bool:
        return bool(np.all(other.lo >= self.lo) and np.all(other.hi <= self.hi))

    def as_dict(self) -> dict:
        return {"min": [float(v) for v in self.lo], "max": [float(v) for v in self.hi]}

    @classmethod
    def from_dict(cls, d: dict) -> "BoxWindow":
        try:
            return cls(np.asarray(d["min"], dtype=float), np.asarray(d["max"], dtype=float))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"window dict needs 'min' and 'max' lists: {exc}") from exc

    @classmethod
    def cube(cls, side: float, dim: int, center=None) -> "BoxWindow":
        """Centered cube of the given side length."""
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        h = 0.5 * float(side)
        return cls(c - h, c + h)


@dataclass
class PointPattern:
    """Finite point set observed in a box window."""

    points: np.ndarray
    window: BoxWindow
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, self.window.dim)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[1] != self.window.dim:
            raise ConfigError(
                f"points shape {pts.shape} incompatible with window dim {self.window.dim}")
        if pts.size and not np.all(np.isfinite(pts)):
            raise ConfigError("points contain non-finite coordinates")
        if pts.size and not np.all(self.window.contains(pts)):
            raise ConfigError("points fall outside the declared window")
        self.points = pts

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.window.dim

    def intensity(self) -> float:
        return self.n / self.window.volume()


def crop(pattern: PointPattern, target: BoxWindow) -> PointPattern:
    """Restrict a pattern to a sub-window (closed-box membership).

    The target must be contained in the pattern's window.
    """
    if target.dim != pattern.dim:
        raise ConfigError("target window dimension mismatch")
    if not pattern.window.contains_box(target):
        raise ConfigError("target window is not contained in the source window")
    keep = target.contains(pattern.points) if pattern.n else np.zeros(0, dtype=bool)
    return PointPattern(pattern.points[keep], target, dict(pattern.meta))


_NORM_TABLE_CACHE: dict = {}


def integer_norm_table(dim: int, max_norm_sq: int):
    """Squared norms and their multiplicities on Z^dim.

    Returns ``(nsq, counts)`` where ``counts[j]`` is the number of integer
    vectors with ``|z|^2 == nsq[j]``, for all squared norms up to
    ``max_norm_sq`` that occur. The origin (nsq = 0) is included.

    Built by convolving the one-axis square counts, so the cost is
    near-linear in ``max_norm_sq``; results are cached.
    """
    if dim < 1 or dim > 3:
        raise ConfigError(f"norm table supports dim 1..3, got {dim}")
    max_norm_sq = int(max_norm_sq)
    if max_norm_sq < 0:
        raise ConfigError("max_norm_sq must be nonnegative")
    key = (dim, max_norm_sq)
    hit = _NORM_TABLE_CACHE.get(key)
    if hit is not None:
        return hit

    kmax = int(math.isqrt(max_norm_sq))
    axis = np.zeros(max_norm_sq + 1, dtype=np.float64)
    ks = np.arange(0, kmax + 1, dtype=np.int64)
    np.add.at(axis, ks * ks, np.where(ks == 0, 1.0, 2.0))
    table = axis
    for _ in range(dim - 1):
        table = fftconvolve(table, axis)[: max_norm_sq + 1]
    counts = np.rint(table).astype(np.int64)
    nsq = np.nonzero(counts)[0].astype(np.int64)
    result = (nsq, counts[nsq])
    _NORM_TABLE_CACHE[key] = result
    return result


def lattice_points_in_ball(lattice: Lattice, center, radius: float) -> np.ndarray:
    """All lattice points within (closed) Euclidean distance ``radius`` of ``center``.

    Parameters
    ----------
    lattice : Lattice
    center : array_like, shape (d,)
    radius : float

    Returns
    -------
    ndarray, shape (m, d)
        The lattice points (not their integer coordinates), in scan order.

    Notes
    -----
    Enumerates an integer bounding box in coefficient space and filters
    exactly. The scan is capped at ``ENUMERATION_CAP`` candidate sites; a
    request beyond that raises rather than thrashing memory.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    d = lattice.dim
    if center.shape != (d,):
        raise ConfigError(f"center must have shape ({d},)")
    radius = float(radius)
    if radius < 0:
        raise ConfigError("radius must be nonnegative")

    binv = np.linalg.inv(lattice.basis)
    z0 = binv @ center
    # per-axis reach of the ball in coefficient space
    reach = radius * np.linalg.norm(binv, axis=1)
    lo = np.ceil(z0 - reach - 1e-9).astype(np.int64)
    hi = np.floor(z0 + reach + 1e-9).astype(np.int64)
    counts = np.maximum(hi - lo + 1, 0)
    total = int(np.prod(counts, dtype=np.float64))
    if np.prod(counts.astype(np.float64)) > ENUMERATION_CAP:
        raise ConfigError(
            f"enumeration too large: {np.prod(counts.astype(np.float64)):.3g} candidate "
            f"sites exceeds cap {ENUMERATION_CAP}")
    if total == 0:
        return np.zeros((0, d))

    if d == 1:
        z = np.arange(lo[0], hi[0] + 1, dtype=np.int64).reshape(-1, 1)
        pts = z.astype(float) * lattice.basis[0, 0]
        keep = np.abs(pts[:, 0] - center[0]) <= radius + 1e-12
        return pts[keep]

    # slab over the first axis keeps memory bounded for large radii
    tail_axes = [np.arange(lo[k], hi[k] + 1, dtype=np.int64) for k in range(1, d)]
    tail = np.stack([g.ravel() for g in np.meshgrid(*tail_axes, indexing="ij")], axis=1)
    out = []
    r2 = radius * radius * (1 + 1e-12) + 1e-12
    for z1 in range(lo[0], hi[0] + 1):
        coeffs = np.empty((tail.shape[0], d), dtype=float)
        coeffs[:, 0] = z1
        coeffs[:, 1:] = tail
        pts = coeffs @ lattice.basis.T
        diff = pts - center
        keep = np.einsum("ij,ij->i", diff, diff) <= r2
        if np.any(keep):
            out.append(pts[keep])
    if not out:
        return np.zeros((0, d))
    return np.concatenate(out, axis=0)
