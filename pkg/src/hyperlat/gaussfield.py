"""Stationary Gaussian displacement fields on integer lattice blocks.

A displacement field assigns each lattice site an R^d vector whose d
coordinates are independent copies of one scalar stationary Gaussian field
with per-coordinate covariance ``c``. Three model kinds:

* ``stationarized``: no displacement at all (c = 0);
* ``iid``: white noise, ``c(h) = sigma^2 1{h = 0}``;
* ``powexp``: powered exponential, ``c(h) = sigma^2 exp(-|h|^gamma / range)``
  for ``h != 0`` and ``c(0) = sigma^2``, with ``gamma in [0, 2]``.

The full-vector covariance between site displacements is ``dim * c(|i - j|)``.

Sampling uses circulant embedding on a padded torus (exact when the
embedding is nonnegative definite) with a dense Cholesky fallback for
small blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError
from .geometry import SeedSpec, integer_norm_table

__all__ = [
    "CovarianceModel",
    "FieldBlock",
    "coord_covariance",
    "covariance",
    "simulate_block",
    "check_embedding",
    "covariance_summability",
]

_KINDS = ("stationarized", "iid", "powexp")

# relative tolerance on negative embedding eigenvalues before escalation
_EIG_TOL = 1e-10
# dense fallback refuses blocks larger than this many sites
_CHOLESKY_CAP = 4096


@dataclass(frozen=True)
class CovarianceModel:
    """Displacement model: kind, marginal sigma, and powexp shape parameters.

    ``range_`` and ``gamma`` are only meaningful for kind ``powexp``; the
    JSON wire format calls the former ``range``.
    """

    kind: str
    dim: int
    sigma: float = 0.0
    range_: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown covariance kind {self.kind!r}, expected one of {_KINDS}")
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ConfigError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        if not (isinstance(self.sigma, (int, float, np.floating)) and math.isfinite(self.sigma)
                and self.sigma >= 0):
            raise ConfigError(f"sigma must be a nonnegative finite float, got {self.sigma!r}")
        object.__setattr__(self, "sigma", float(self.sigma))
        if self.kind == "stationarized":
            if self.sigma != 0.0:
                raise ConfigError("stationarized model has no displacement; sigma must be 0")
            object.__setattr__(self, "range_", None)
            object.__setattr__(self, "gamma", None)
        elif self.kind == "iid":
            if self.range_ is not None or self.gamma is not None:
                raise ConfigError("iid model takes no range/gamma")
        else:
            if self.range_ is None or not (self.range_ > 0 and math.isfinite(self.range_)):
                raise ConfigError(f"powexp needs range > 0, got {self.range_!r}")
            if self.gamma is None or not (0.0 <= self.gamma <= 2.0):
                raise ConfigError(f"powexp needs gamma in [0, 2], got {self.gamma!r}")
            object.__setattr__(self, "range_", float(self.range_))
            object.__setattr__(self, "gamma", float(self.gamma))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "dim": self.dim, "sigma": self.sigma}
        if self.kind == "powexp":
            d["range"] = self.range_
            d["gamma"] = self.gamma
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CovarianceModel":
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError("covariance model dict needs a 'kind' key")
        known = {"kind", "dim", "sigma", "range", "gamma"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown covariance model keys: {sorted(extra)}")
        return cls(kind=d["kind"], dim=d.get("dim", 3), sigma=d.get("sigma", 0.0),
                   range_=d.get("range"), gamma=d.get("gamma"))


def coord_covariance(model: CovarianceModel, h_norm) -> np.ndarray | float:
    """Per-coordinate scalar covariance ``c(|h|)`` at separation norm(s)."""
    h = np.asarray(h_norm, dtype=float)
    if np.any(h < 0):
        raise ConfigError("separation norm must be nonnegative")
    s2 = model.sigma**2
    if model.kind == "stationarized":
        out = np.zeros(h.shape)
    elif model.kind == "iid":
        out = np.where(h == 0, s2, 0.0)
    else:
        out = np.empty(h.shape)
        zero = h == 0
        out[zero] = s2  # variance, regardless of gamma (0^0 corner)
        nz = ~zero
        out[nz] = s2 * np.exp(-(h[nz] ** model.gamma) / model.range_)
    return out if np.ndim(h_norm) else float(out)


def covariance(model: CovarianceModel, lag) -> float:
    """Full-vector covariance ``cov(p_i, p_j) = dim * c(|i - j|)``.

    ``lag`` may be the integer lag vector or its norm.
    """
    lag_arr = np.asarray(lag, dtype=float)
    norm = float(np.linalg.norm(lag_arr)) if lag_arr.ndim else abs(float(lag_arr))
    return model.dim * float(coord_covariance(model, norm))


@dataclass
class FieldBlock:
    """Displacement field on an integer block ``origin + [0, shape)``.

    ``values`` has shape ``(*shape, dim)``.
    """

    origin: np.ndarray
    values: np.ndarray
    model: CovarianceModel
    method: str

    @property
    def shape(self) -> tuple:
        return self.values.shape[:-1]


def _default_padding(model: CovarianceModel, shape) -> int:
    base = max(shape)
    if model.kind == "powexp":
        base = max(base, int(math.ceil(8.0 * model.range_)))
    return base


def _torus_covariance(model: CovarianceModel, torus_shape) -> np.ndarray:
    dists = []
    for m in torus_shape:
        a = np.arange(m, dtype=float)
        dists.append(np.minimum(a, m - a) ** 2)
    sq = dists[0]
    for arr in dists[1:]:
        sq = sq[..., None] + arr
    return np.asarray(coord_covariance(model, np.sqrt(sq)))


def _embedding_eigs(model: CovarianceModel, torus_shape) -> np.ndarray:
    cov = _torus_covariance(model, torus_shape)
    lam = np.fft.fftn(cov).real
    return lam


def check_embedding(model: CovarianceModel, shape, padding: int | None = None) -> dict:
    """Report whether a block of the given shape embeds on an FFT torus.

    Returns a dict with the torus shape, extreme eigenvalues of the
    circulant embedding, and the sampling method that would be chosen.
    """
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    if len(shape) != model.dim or any(s < 1 for s in shape):
        raise ConfigError(f"shape {shape} incompatible with model dim {model.dim}")
    if model.kind in ("stationarized", "iid"):
        return {"kind": model.kind, "torus_shape": list(shape), "padding": 0,
                "min_eigenvalue": model.sigma**2, "max_eigenvalue": model.sigma**2,
                "method": "direct", "embeddable": True}
    pad = _default_padding(model, shape) if padding is None else int(padding)
    torus = tuple(s + pad for s in shape)
    lam = _embedding_eigs(model, torus)
    lam_min, lam_max = float(lam.min()), float(lam.max())
    ok = lam_min >= -_EIG_TOL * lam_max
    n_sites = int(np.prod(shape))
    method = "fft" if ok else ("cholesky" if n_sites <= _CHOLESKY_CAP else "none")
    return {"kind": model.kind, "torus_shape": list(torus), "padding": pad,
            "min_eigenvalue": lam_min, "max_eigenvalue": lam_max,
            "method": method, "embeddable": ok}


def _sample_fft(model, shape, lam, torus_shape, rng) -> np.ndarray:
    m_tot = float(np.prod(torus_shape))
    lam_pos = np.clip(lam, 0.0, None)
    scale = np.sqrt(lam_pos * m_tot)
    comps = []
    for _ in range((model.dim + 1) // 2):
        noise = rng.standard_normal(torus_shape) + 1j * rng.standard_normal(torus_shape)
        spec = np.fft.ifftn(noise * scale)
        comps.append(spec.real)
        comps.append(spec.imag)
    block = np.stack(comps[: model.dim], axis=-1)
    sl = tuple(slice(0, s) for s in shape)
    return block[sl]


def _sample_cholesky(model, shape, rng) -> np.ndarray:
    n_sites = int(np.prod(shape))
    if n_sites > _CHOLESKY_CAP:
        raise NumericalError("covariance not embeddable at this size")
    grids = np.meshgrid(*[np.arange(s, dtype=float) for s in shape], indexing="ij")
    sites = np.stack([g.ravel() for g in grids], axis=1)
    diff = sites[:, None, :] - sites[None, :, :]
    norms = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    cov = np.asarray(coord_covariance(model, norms))
    s2 = model.sigma**2
    chol = None
    for jit in (0.0, 1e-14, 1e-12, 1e-10):
        try:
            chol = np.linalg.cholesky(cov + jit * s2 * np.eye(n_sites))
            break
        except np.linalg.LinAlgError:
            continue
    if chol is None:
        raise NumericalError("covariance not embeddable at this size")
    draws = chol @ rng.standard_normal((n_sites, model.dim))
    return draws.reshape(*shape, model.dim)


def _simulate_block_rng(model: CovarianceModel, shape, rng) -> tuple[np.ndarray, str]:
    """Field values for a block, drawing from an existing generator."""
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    if len(shape) != model.dim or any(s < 1 for s in shape):
        raise ConfigError(f"shape {shape} incompatible with model dim {model.dim}")
    if model.kind == "stationarized":
        return np.zeros(shape + (model.dim,)), "zero"
    if model.kind == "iid":
        return rng.normal(0.0, model.sigma, size=shape + (model.dim,)), "direct"

    pad = _default_padding(model, shape)
    for _ in range(3):
        torus = tuple(s + pad for s in shape)
        lam = _embedding_eigs(model, torus)
        if lam.min() >= -_EIG_TOL * lam.max():
            return _sample_fft(model, shape, lam, torus, rng), "fft"
        pad *= 2
    if int(np.prod(shape)) <= _CHOLESKY_CAP:
        return _sample_cholesky(model, shape, rng), "cholesky"
    raise NumericalError("covariance not embeddable at this size")


def simulate_block(model: CovarianceModel, origin, shape, seed: SeedSpec) -> FieldBlock:
    """Draw one displacement field block.

    Parameters
    ----------
    model : CovarianceModel
    origin : array_like of ints
        Lattice coordinates of the block corner. The field is stationary,
        so the origin only labels the sites; it does not enter the draw.
    shape : tuple of ints
    seed : SeedSpec

    Returns
    -------
    FieldBlock
        ``values[idx, :]`` is the displacement of site ``origin + idx``.
    """
    origin = np.atleast_1d(np.asarray(origin, dtype=np.int64))
    if origin.size != model.dim:
        raise ConfigError(f"origin must have {model.dim} coordinates")
    values, method = _simulate_block_rng(model, shape, seed.generator())
    return FieldBlock(origin=origin, values=values, model=model, method=method)


def covariance_summability(model: CovarianceModel, max_radius: int = 64) -> dict:
    """Partial sums of |cov| over expanding lattice balls.

    Diagnostic for the hyperuniformity condition: reports
    ``S(R) = sum_{|i| <= R} |cov(p_i, p_0)|`` on a geometric ladder of
    radii and whether the sums have numerically converged.
    """
    if max_radius < 4:
        raise ConfigError("max_radius must be at least 4")
    nsq, counts = integer_norm_table(model.dim, max_radius * max_radius)
    norms = np.sqrt(nsq.astype(float))
    vals = model.dim * np.abs(np.asarray(coord_covariance(model, norms)))
    radii = [r for r in (4, 8, 16, 32, 64, 128) if r <= max_radius]
    partial = []
    for r in radii:
        mask = norms <= r
        partial.append(float(np.sum(counts[mask] * vals[mask])))
    converged = len(partial) >= 2 and abs(partial[-1] - partial[-2]) <= 1e-9 * max(
        abs(partial[-1]), 1e-30)
    return {"radii": radii, "partial_sums": partial, "converged": bool(converged)}
