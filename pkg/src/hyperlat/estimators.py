"""Empirical summary statistics for point patterns in box windows.

Edge-correction conventions vary across the literature, so they are
fixed here once:

* pair statistics (K, pcf) use the translation correction
  ``lambda(W cap W_h) = prod_k (L_k - |h_k|)`` and the intensity-square
  estimate ``rho2_hat = n (n - 1) / |W|^2``;
* the nearest-neighbor CDF uses the border method: the ECDF of distances
  ``d_i`` restricted to points whose boundary distance ``b_i >= d_i``
  (uncensored observations), which is monotone and lands in [0, 1];
* scattering intensity is evaluated on the window's allowed modes
  ``k = 2 pi z / L`` (componentwise), excluding the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError
from .geometry import BoxWindow, PointPattern
from .ktheory import SummaryCurve
from .special import unit_ball_volume

__all__ = [
    "ScatteringSpectrum",
    "ExponentFit",
    "rescale_to_unit_intensity",
    "k_empirical",
    "pcf_empirical",
    "g_nearest_neighbor",
    "number_variance",
    "scattering_intensity",
    "pool_spectra",
    "exponent_fit",
    "fry_slab",
    "nn_angle_histogram",
]


def rescale_to_unit_intensity(pattern: PointPattern) -> PointPattern:
    """Isotropically rescale about the window center to intensity 1.

    The result is recentered at the origin. The scale factor
    ``intensity^(1/d)`` is recorded in the pattern metadata.
    """
    if pattern.n < 1:
        raise ConfigError("cannot rescale an empty pattern")
    s = pattern.intensity() ** (1.0 / pattern.dim)
    center = pattern.window.center
    pts = (pattern.points - center) * s
    half = 0.5 * pattern.window.sides * s
    window = BoxWindow(-half, half)
    meta = dict(pattern.meta)
    meta["rescale_factor"] = float(s)
    meta["original_window"] = pattern.window.as_dict()
    return PointPattern(pts, window, meta)


def _check_r_grid(window: BoxWindow, r_grid, positive=False) -> np.ndarray:
    r = np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ConfigError("r grid must be a nonempty 1-d array")
    if np.any(~np.isfinite(r)) or np.any(np.diff(r) <= 0):
        raise ConfigError("r grid must be finite and strictly increasing")
    if np.any(r < 0) or (positive and r[0] <= 0):
        raise ConfigError("r grid must be positive" if positive else "r grid must be nonnegative")
    if r[-1] >= 0.5 * float(window.sides.min()):
        raise ConfigError("r too large for window")
    return r


def _translation_pairs(pattern: PointPattern, r_max: float):
    """Unordered pairs within r_max: distances and translation weights."""
    tree = cKDTree(pattern.points)
    pairs = tree.query_pairs(r_max, output_type="ndarray")
    if pairs.size == 0:
        return np.zeros(0), np.zeros(0)
    h = np.abs(pattern.points[pairs[:, 0]] - pattern.points[pairs[:, 1]])
    dists = np.sqrt(np.einsum("ij,ij->i", h, h))
    overlap = np.prod(pattern.window.sides - h, axis=1)
    return dists, 1.0 / overlap


def k_empirical(pattern: PointPattern, r_grid) -> SummaryCurve:
    """Translation-corrected Ripley K estimate on a grid.

    ``K_hat(r) = (1/rho2_hat) * sum_{x != y, |x-y| <= r} 1 / lambda(W cap
    W_{x-y})`` over ordered pairs. Requires ``max(r) < min side / 2``.
    """
    r = _check_r_grid(pattern.window, r_grid)
    if pattern.n < 2:
        raise ConfigError("need at least two points")
    dists, weights = _translation_pairs(pattern, float(r[-1]))
    rho2 = pattern.n * (pattern.n - 1) / pattern.window.volume() ** 2
    order = np.argsort(dists)
    cum = np.concatenate([[0.0], np.cumsum(weights[order])])
    idx = np.searchsorted(dists[order], r, side="right")
    values = 2.0 * cum[idx] / rho2  # ordered pairs = 2 x unordered
    return SummaryCurve(r, values, "K", {"n": pattern.n, "correction": "translation"})


def pcf_empirical(pattern: PointPattern, r_grid, bandwidth: float | None = None) -> SummaryCurve:
    """Pair correlation via Epanechnikov kernel and translation correction.

    Default bandwidth ``0.15 * intensity^(-1/d)``. Values within one
    bandwidth of r = 0 are boundary-biased; the grid must be positive.
    """
    r = _check_r_grid(pattern.window, r_grid, positive=True)
    if pattern.n < 2:
        raise ConfigError("need at least two points")
    d = pattern.dim
    if bandwidth is None:
        bandwidth = 0.15 * pattern.intensity() ** (-1.0 / d)
    if not (bandwidth > 0):
        raise ConfigError("bandwidth must be positive")
    dists, weights = _translation_pairs(pattern, float(r[-1]) + bandwidth)
    rho2 = pattern.n * (pattern.n - 1) / pattern.window.volume() ** 2
    omega = pattern.dim * unit_ball_volume(d)
    values = np.empty_like(r)
    for j, rj in enumerate(r):
        u = (rj - dists) / bandwidth
        inside = np.abs(u) < 1.0
        kern = 0.75 * (1.0 - u[inside] ** 2) / bandwidth
        values[j] = 2.0 * np.sum(kern * weights[inside]) / (rho2 * omega * rj ** (d - 1))
    return SummaryCurve(r, values, "pcf",
                        {"n": pattern.n, "bandwidth": float(bandwidth),
                         "correction": "translation"})


def g_nearest_neighbor(pattern: PointPattern, r_grid) -> SummaryCurve:
    """Border-corrected nearest-neighbor distance CDF.

    ECDF of the nearest-neighbor distances of points that are farther from
    the boundary than from their neighbor (uncensored observations).
    """
    r = _check_r_grid(pattern.window, r_grid)
    if pattern.n < 2:
        raise ConfigError("need at least two points")
    tree = cKDTree(pattern.points)
    nn_dist = tree.query(pattern.points, k=2)[0][:, 1]
    border = np.minimum((pattern.points - pattern.window.lo).min(axis=1),
                        (pattern.window.hi - pattern.points).min(axis=1))
    eligible = nn_dist <= border
    if not np.any(eligible):
        raise ConfigError("no uncensored nearest-neighbor distances; window too small")
    sample = np.sort(nn_dist[eligible])
    values = np.searchsorted(sample, r, side="right") / sample.size
    return SummaryCurve(r, values, "G", {"n": pattern.n, "n_uncensored": int(sample.size),
                                         "correction": "border"})


def _box_grid_counts(pattern: PointPattern, box_side: float, gap: float, n_boxes: int):
    window = pattern.window
    d = window.dim
    pitch = box_side + gap
    per_axis_fit = np.floor((window.sides + gap) / pitch).astype(int)
    target = int(round(n_boxes ** (1.0 / d)))
    per_axis = np.minimum(per_axis_fit, max(target, 1))
    total = int(np.prod(per_axis))
    if total < min(8, n_boxes):
        raise ConfigError(
            f"window fits only {total} disjoint boxes of side {box_side} with gap {gap}")
    extent = per_axis * box_side + (per_axis - 1) * gap
    offset = window.lo + 0.5 * (window.sides - extent)

    rel = pattern.points - offset
    cell = np.floor(rel / pitch).astype(int)
    frac = rel - cell * pitch
    in_box = np.all((cell >= 0) & (cell < per_axis) & (frac <= box_side), axis=1)
    flat = np.zeros(total, dtype=np.int64)
    if np.any(in_box):
        lin = np.ravel_multi_index(tuple(cell[in_box].T), tuple(per_axis))
        np.add.at(flat, lin, 1)
    return flat


def number_variance(patterns, radii=None, box_side: float = 2.7, gap: float = 1.5,
                    n_boxes: int = 64) -> SummaryCurve:
    """Count-variance estimate, normalized by the counting-region volume.

    Two designs:

    * a single pattern: counts in a centered grid of disjoint boxes
      (defaults: 64 boxes of side 2.7 separated by 1.5); returns a
      one-point curve at r = box_side with the counts in the metadata;
    * a list of >= 30 replicate patterns plus ``radii``: across-replicate
      variance of the count in a centered ball at each radius.

    For a unit-rate Poisson process both normalizations estimate 1.
    """
    if isinstance(patterns, PointPattern):
        counts = _box_grid_counts(patterns, float(box_side), float(gap), int(n_boxes))
        var = float(np.var(counts, ddof=1))
        value = var / float(box_side) ** patterns.dim
        return SummaryCurve(np.array([float(box_side)]), np.array([value]), "numvar",
                            {"design": "boxes", "box_side": float(box_side),
                             "gap": float(gap), "n_boxes": int(counts.size),
                             "counts": counts.tolist(),
                             "count_mean": float(counts.mean()), "count_var": var})

    batch = list(patterns)
    if len(batch) < 30:
        raise ConfigError(f"batch design needs >= 30 replicates, got {len(batch)}")
    if radii is None:
        raise ConfigError("batch design needs explicit radii")
    r = np.asarray(radii, dtype=float)
    if r.ndim != 1 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ConfigError("radii must be positive and strictly increasing")
    window = batch[0].window
    for p in batch:
        if not np.allclose(p.window.lo, window.lo) or not np.allclose(p.window.hi, window.hi):
            raise ConfigError("all replicates must share one window")
    if r[-1] > 0.5 * float(window.sides.min()):
        raise ConfigError("largest radius does not fit inside the window")
    center = window.center
    d = window.dim
    kd = unit_ball_volume(d)
    counts = np.empty((len(batch), r.size))
    for i, p in enumerate(batch):
        dist = np.linalg.norm(p.points - center, axis=1) if p.n else np.zeros(0)
        dist = np.sort(dist)
        counts[i] = np.searchsorted(dist, r, side="right")
    values = counts.var(axis=0, ddof=1) / (kd * r**d)
    return SummaryCurve(r, values, "numvar",
                        {"design": "batch", "n_replicates": len(batch)})


@dataclass
class ScatteringSpectrum:
    """Scattering intensity on the window's allowed modes."""

    k: np.ndarray
    k_norm: np.ndarray
    values: np.ndarray
    n_points: int
    n_patterns: int = 1
    window_sides: np.ndarray | None = None

    def __post_init__(self):
        self.k = np.atleast_2d(np.asarray(self.k, dtype=float))
        self.k_norm = np.asarray(self.k_norm, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not (self.k.shape[0] == self.k_norm.size == self.values.size):
            raise ConfigError("inconsistent spectrum arrays")


def scattering_intensity(pattern: PointPattern, k_max: float = 7.0) -> ScatteringSpectrum:
    """``S_hat(k) = |sum_j exp(-i k . x_j)|^2 / n`` on allowed modes.

    Modes are ``k = 2 pi z / L`` componentwise for integer vectors z with
    ``0 < |k| <= k_max``; a rectangular window gives a rectangular mode
    grid. Expected value 1 for a binomial pattern on every allowed mode.
    """
    if pattern.n < 1:
        raise ConfigError("need at least one point")
    if not (k_max > 0):
        raise ConfigError("k_max must be positive")
    sides = pattern.window.sides
    d = pattern.dim
    dk = 2.0 * math.pi / sides
    zmax = np.floor(k_max / dk).astype(int)
    if np.any(zmax < 1):
        raise ConfigError("k_max below the smallest allowed mode 2 pi / L")
    axes = [np.arange(-m, m + 1) for m in zmax]
    phases = [np.exp(-1j * np.outer(ax * dk[a], pattern.points[:, a]))
              for a, ax in enumerate(axes)]

    if d == 1:
        amp = phases[0].sum(axis=1)
        kvecs = (axes[0] * dk[0])[:, None]
    elif d == 2:
        amp = phases[0] @ phases[1].T
        kx, ky = np.meshgrid(axes[0] * dk[0], axes[1] * dk[1], indexing="ij")
        kvecs = np.stack([kx.ravel(), ky.ravel()], axis=1)
        amp = amp.ravel()
    elif d == 3:
        nx = axes[0].size
        rows = []
        for a in range(nx):
            w = phases[1] * phases[0][a][None, :]
            rows.append(w @ phases[2].T)
        amp = np.stack(rows, axis=0).ravel()
        kx, ky, kz = np.meshgrid(axes[0] * dk[0], axes[1] * dk[1], axes[2] * dk[2],
                                 indexing="ij")
        kvecs = np.stack([kx.ravel(), ky.ravel(), kz.ravel()], axis=1)
    else:
        raise ConfigError("scattering intensity supports dim 1..3")

    k_norm = np.linalg.norm(kvecs, axis=1)
    keep = (k_norm > 1e-12) & (k_norm <= k_max + 1e-12)
    values = (amp.real**2 + amp.imag**2)[keep] / pattern.n
    return ScatteringSpectrum(kvecs[keep], k_norm[keep], values, pattern.n,
                              n_patterns=1, window_sides=sides.copy())


def pool_spectra(spectra) -> ScatteringSpectrum:
    """Average spectra of replicate patterns over a shared mode grid."""
    spectra = list(spectra)
    if not spectra:
        raise ConfigError("nothing to pool")
    ref = spectra[0]
    total = np.zeros_like(ref.values)
    n_pat = 0
    n_pts = 0
    for s in spectra:
        if s.k.shape != ref.k.shape or not np.allclose(s.k, ref.k):
            raise ConfigError("spectra live on different mode grids")
        total += s.values * s.n_patterns
        n_pat += s.n_patterns
        n_pts += s.n_points
    return ScatteringSpectrum(ref.k.copy(), ref.k_norm.copy(), total / n_pat,
                              n_pts, n_patterns=n_pat, window_sides=ref.window_sides)


@dataclass
class ExponentFit:
    """Log-log least squares fit ``S(k) ~ C k^alpha`` near the origin."""

    alpha: float
    intercept: float
    stderr: float
    k_max: float
    bin_k: np.ndarray = field(repr=False, default=None)
    bin_s: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "intercept": self.intercept,
                "stderr": self.stderr, "k_max": self.k_max,
                "n_bins": int(self.bin_k.size)}


def exponent_fit(spectrum: ScatteringSpectrum, k_max: float = 1.5,
                 n_bins: int = 12) -> ExponentFit:
    """Small-|k| scaling exponent from a radially binned spectrum.

    Averages the spectrum in ``n_bins`` equal-width bins over
    ``(0, k_max]``, drops empty bins, and fits a line to log(S) against
    log(k). At least eight nonempty bins are required; a pooled
    multi-pattern spectrum gives much steadier bin means than a single
    realization.
    """
    if not (k_max > 0):
        raise ConfigError("k_max must be positive")
    mask = (spectrum.k_norm > 0) & (spectrum.k_norm <= k_max)
    if not np.any(mask):
        raise ConfigError("no modes below k_max")
    kn = spectrum.k_norm[mask]
    sv = spectrum.values[mask]
    edges = np.linspace(0.0, k_max, int(n_bins) + 1)
    idx = np.clip(np.digitize(kn, edges) - 1, 0, int(n_bins) - 1)
    bin_k, bin_s = [], []
    for b in range(int(n_bins)):
        sel = idx == b
        if np.any(sel):
            bin_k.append(kn[sel].mean())
            bin_s.append(sv[sel].mean())
    bin_k = np.asarray(bin_k)
    bin_s = np.asarray(bin_s)
    usable = bin_s > 0
    if usable.sum() < 8:
        raise ConfigError(f"exponent fit needs >= 8 spectral bins, got {int(usable.sum())}")
    lx = np.log(bin_k[usable])
    ly = np.log(bin_s[usable])
    sxx = np.sum((lx - lx.mean()) ** 2)
    slope = float(np.sum((lx - lx.mean()) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    dof = max(lx.size - 2, 1)
    stderr = float(math.sqrt(np.sum(resid**2) / dof / sxx))
    return ExponentFit(slope, intercept, stderr, float(k_max), bin_k[usable], bin_s[usable])


def fry_slab(pattern: PointPattern, axis_pair=(0, 1), slab_halfwidth: float = 0.5,
             max_norm: float | None = None) -> np.ndarray:
    """Fry plot material: projected pair displacement vectors.

    Keeps displacements whose out-of-plane coordinates are all within
    ``slab_halfwidth`` and returns their projections onto the axis pair
    (both orientations, so the cloud is symmetric). ``max_norm`` bounds
    the in-plane displacement length; None keeps everything.
    """
    a, b = axis_pair
    d = pattern.dim
    if d < 2 or not (0 <= a < d) or not (0 <= b < d) or a == b:
        raise ConfigError(f"invalid axis pair {axis_pair} for dim {d}")
    if pattern.n < 2:
        return np.zeros((0, 2))
    others = [c for c in range(d) if c not in (a, b)]

    if max_norm is not None:
        reach = math.hypot(max_norm, slab_halfwidth * math.sqrt(max(len(others), 1)))
        tree = cKDTree(pattern.points)
        pairs = tree.query_pairs(reach, output_type="ndarray")
        if pairs.size == 0:
            return np.zeros((0, 2))
        diffs = pattern.points[pairs[:, 1]] - pattern.points[pairs[:, 0]]
        diffs = np.concatenate([diffs, -diffs], axis=0)
    else:
        chunks = []
        pts = pattern.points
        for i in range(pattern.n):
            dd = np.delete(pts, i, axis=0) - pts[i]
            chunks.append(dd)
        diffs = np.concatenate(chunks, axis=0)

    keep = np.ones(diffs.shape[0], dtype=bool)
    for c in others:
        keep &= np.abs(diffs[:, c]) <= slab_halfwidth
    proj = diffs[keep][:, [a, b]]
    if max_norm is not None:
        keep2 = np.einsum("ij,ij->i", proj, proj) <= max_norm * max_norm
        proj = proj[keep2]
    return proj


def nn_angle_histogram(pattern: PointPattern, axis_pair=(0, 1), n_bins: int = 36):
    """Histogram of nearest-neighbor direction angles in a projection.

    Points are projected onto the axis pair, the nearest neighbor is found
    in the projection, and the angle of the connecting vector (in
    ``[0, 2 pi)``) is binned. Returns ``(bin_edges, counts)``.
    """
    a, b = axis_pair
    d = pattern.dim
    if d < 2 or not (0 <= a < d) or not (0 <= b < d) or a == b:
        raise ConfigError(f"invalid axis pair {axis_pair} for dim {d}")
    if n_bins < 2:
        raise ConfigError("need at least two bins")
    if pattern.n < 2:
        raise ConfigError("need at least two points")
    proj = pattern.points[:, [a, b]]
    tree = cKDTree(proj)
    dist, idx = tree.query(proj, k=2)
    vec = proj[idx[:, 1]] - proj
    angles = np.mod(np.arctan2(vec[:, 1], vec[:, 0]), 2.0 * math.pi)
    edges = np.linspace(0.0, 2.0 * math.pi, int(n_bins) + 1)
    counts, _ = np.histogram(angles, bins=edges)
    return edges, counts
