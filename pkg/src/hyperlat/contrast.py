"""Minimum-contrast fitting of perturbation models to an empirical K.

The objective integrates a transformed discrepancy between the exact
model K-function and the data's estimate,

    D(theta) = integral_{r1}^{r2} w(r) |K_theta(r)^p - K_hat(r)^p|^2 dr,

with p = 1/4 by default. The unweighted first stage uses w = 1; the
second stage reweights by w = 1 / sqrt(lvar(r)) where lvar is the
pointwise sample variance of the centered L-function across replicates
simulated at the first-stage estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ConfigError, HyperlatError, NumericalError
from .gaussfield import CovarianceModel
from .geometry import BoxWindow, SeedSpec
from .ktheory import SummaryCurve, k_theoretical
from .special import unit_ball_volume

__all__ = ["ContrastSpec", "FitResult", "contrast", "fit_min_contrast",
           "empirical_l_variance", "fit_two_stage"]

_VARIANCE_FLOOR = 1e-12

# fitting box per parameter; optimizer output is clipped into it
DEFAULT_BOUNDS = {
    "sigma": (1e-3, 1.0),
    "range": (0.1, 10.0),
    "gamma": (0.05, 2.0),
}

_PARAM_NAMES = {"iid": ("sigma",), "powexp": ("sigma", "range", "gamma")}


@dataclass(frozen=True)
class ContrastSpec:
    """Integration window and transform for the contrast objective."""

    r1: float = 0.0
    r2: float = 3.0
    transform_power: float = 0.25
    weight: SummaryCurve | None = None
    grid_step: float = 0.02

    def __post_init__(self):
        if not (0.0 <= self.r1 < self.r2):
            raise ConfigError(f"need 0 <= r1 < r2, got r1={self.r1}, r2={self.r2}")
        if not (self.grid_step > 0):
            raise ConfigError("grid_step must be positive")
        if not (self.transform_power > 0):
            raise ConfigError("transform_power must be positive")
        if self.weight is not None and np.any(self.weight.values < 0):
            raise ConfigError("weight curve must be nonnegative")

    def grid(self) -> np.ndarray:
        n = max(int(math.ceil((self.r2 - self.r1) / self.grid_step)), 1)
        return np.linspace(self.r1, self.r2, n + 1)


@dataclass
class FitResult:
    """Outcome of a minimum-contrast fit."""

    model_kind: str
    params: dict
    contrast_value: float
    n_evals: int
    converged: bool
    trace: list = field(repr=False, default_factory=list)
    stage1: "FitResult | None" = field(repr=False, default=None)

    def model(self, dim: int) -> CovarianceModel:
        return _model_from_params(self.model_kind, dim, self.params)

    def to_dict(self) -> dict:
        out = {"model_kind": self.model_kind,
               "params": {k: float(v) for k, v in self.params.items()},
               "contrast_value": self.contrast_value,
               "n_evals": self.n_evals,
               "converged": self.converged,
               "trace_length": len(self.trace)}
        if self.stage1 is not None:
            out["stage1"] = self.stage1.to_dict()
        return out


def _model_from_params(kind: str, dim: int, params: dict) -> CovarianceModel:
    if kind == "iid":
        return CovarianceModel("iid", dim, sigma=params["sigma"])
    if kind == "powexp":
        return CovarianceModel("powexp", dim, sigma=params["sigma"],
                               range_=params["range"], gamma=params["gamma"])
    raise ConfigError(f"cannot fit model kind {kind!r}; no free parameters")


def contrast(model: CovarianceModel, k_hat: SummaryCurve, spec: ContrastSpec) -> float:
    """Evaluate the contrast objective D(theta) for one model."""
    if k_hat.kind != "K":
        raise ConfigError(f"expected a K curve, got kind {k_hat.kind!r}")
    if spec.r2 > float(k_hat.r[-1]) + 1e-12:
        raise ConfigError(
            f"contrast interval reaches r={spec.r2} but the empirical K "
            f"stops at r={float(k_hat.r[-1])}")
    if spec.r1 < float(k_hat.r[0]) - 1e-12:
        raise ConfigError(
            f"contrast interval starts at r={spec.r1} but the empirical K "
            f"starts at r={float(k_hat.r[0])}")
    grid = spec.grid()
    k_model = k_theoretical(model, grid, q=15).values
    k_data = k_hat.interp(grid)
    p = spec.transform_power
    diff = np.power(k_model, p) - np.power(k_data, p)
    integrand = diff * diff
    if spec.weight is not None:
        lvar = np.maximum(spec.weight.interp(grid), _VARIANCE_FLOOR)
        integrand = integrand / np.sqrt(lvar)
    return float(np.trapezoid(integrand, grid))


def _clip_params(kind: str, theta, bounds) -> dict:
    names = _PARAM_NAMES[kind]
    out = {}
    for name, value in zip(names, theta):
        lo, hi = bounds[name]
        out[name] = float(min(max(value, lo), hi))
    return out


def _to_internal(params: dict) -> np.ndarray:
    z = [math.log(params["sigma"])]
    if "range" in params:
        z.append(math.log(params["range"]))
        g = min(max(params["gamma"], 1e-6), 2.0 - 1e-6)
        z.append(math.log(g / (2.0 - g)))
    return np.asarray(z)


def _from_internal(kind: str, z, bounds) -> dict:
    theta = [math.exp(z[0])]
    if kind == "powexp":
        theta.append(math.exp(z[1]))
        theta.append(2.0 / (1.0 + math.exp(-z[2])))
    return _clip_params(kind, theta, bounds)


def fit_min_contrast(k_hat: SummaryCurve, model_kind: str, spec: ContrastSpec,
                     dim: int = 3, init: dict | None = None,
                     bounds: dict | None = None, restarts: int = 3,
                     maxfev: int = 500) -> FitResult:
    """Minimize the contrast objective over the model parameters.

    Nelder-Mead in log/logit-transformed coordinates, restarted from
    ``restarts`` jittered initial points (fixed internal jitter stream, so
    the fit is deterministic). Parameters are clipped into ``bounds``
    before every objective evaluation, which is also what confines the
    search. The trace records every evaluation across all restarts.
    """
    if model_kind not in _PARAM_NAMES:
        raise ConfigError(f"cannot fit model kind {model_kind!r}; no free parameters")
    names = _PARAM_NAMES[model_kind]
    eff_bounds = dict(DEFAULT_BOUNDS)
    if bounds:
        eff_bounds.update(bounds)
    start = {"sigma": 0.2, "range": 1.0, "gamma": 1.0}
    if init:
        start.update(init)
    start = _clip_params(model_kind, [start[n] for n in names], eff_bounds)

    trace: list = []

    def objective(z):
        params = _from_internal(model_kind, z, eff_bounds)
        model = _model_from_params(model_kind, dim, params)
        try:
            value = contrast(model, k_hat, spec)
        except NumericalError:
            value = 1e300
        trace.append((tuple(params[n] for n in names), value))
        return value

    rng = np.random.default_rng(2718281828)
    z0 = _to_internal(start)
    best = None
    converged = False
    for attempt in range(max(int(restarts), 1)):
        z_init = z0 if attempt == 0 else z0 + rng.normal(0.0, 0.25, size=z0.size)
        res = optimize.minimize(objective, z_init, method="Nelder-Mead",
                                options={"xatol": 1e-4, "fatol": 1e-10,
                                         "maxfev": int(maxfev)})
        if best is None or res.fun < best.fun:
            best = res
            converged = bool(res.success)
    params = _from_internal(model_kind, best.x, eff_bounds)
    model = _model_from_params(model_kind, dim, params)
    value = contrast(model, k_hat, spec)
    return FitResult(model_kind, params, value, len(trace), converged, trace)


def empirical_l_variance(patterns, r_grid) -> SummaryCurve:
    """Pointwise sample variance of the centered L-function over replicates.

    Input patterns should be replicates of one model; at least two are
    required (twenty or more give a usable weight curve). The result is a
    curve of kind "lvar" suitable for ``ContrastSpec.weight``.
    """
    from .estimators import k_empirical

    batch = list(patterns)
    if len(batch) < 2:
        raise ConfigError("need at least two replicates for a variance curve")
    r = np.asarray(r_grid, dtype=float)
    d = batch[0].dim
    kd = unit_ball_volume(d)
    centered = np.empty((len(batch), r.size))
    for i, p in enumerate(batch):
        k_hat = k_empirical(p, r)
        centered[i] = np.power(k_hat.values / kd, 1.0 / d) - r
    values = np.maximum(centered.var(axis=0, ddof=1), 0.0)
    return SummaryCurve(r, values, "lvar", {"n_replicates": len(batch)})


def _stage(tag: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except HyperlatError as exc:
        raise type(exc)(f"{tag}: {exc}") from exc


def fit_two_stage(k_hat: SummaryCurve, model_kind: str, stage1: ContrastSpec,
                  stage2_window=(0.2, 2.0), n_sims: int = 100,
                  window: BoxWindow | None = None, seed=0, dim: int = 3,
                  init: dict | None = None, bounds: dict | None = None,
                  restarts: int = 3) -> FitResult:
    """Two-stage contrast fit with a variance-based second-stage weight.

    Stage 1 minimizes the unweighted contrast. The fitted model is then
    simulated ``n_sims`` times in ``window`` (required) to estimate the
    pointwise variance of the centered L-function, whose inverse square
    root reweights a second fit over ``stage2_window``, initialized at the
    stage-1 estimate. The returned result carries the stage-1 result in
    its ``stage1`` field.
    """
    from .latticesim import PerturbedLatticeSpec, simulate_batch

    if window is None:
        raise ConfigError("two-stage fit needs the observation window for stage-2 simulations")
    if n_sims < 2:
        raise ConfigError("n_sims must be at least 2")
    r1, r2 = float(stage2_window[0]), float(stage2_window[1])

    first = _stage("stage 1", fit_min_contrast, k_hat, model_kind, stage1,
                   dim=dim, init=init, bounds=bounds, restarts=restarts)

    spec2_grid = ContrastSpec(r1, r2, stage1.transform_power, None, stage1.grid_step)
    sim_spec = PerturbedLatticeSpec(first.model(dim), window)
    seed_spec = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    replicates = _stage("stage 2", simulate_batch, sim_spec, int(n_sims), seed_spec)
    weight = _stage("stage 2", empirical_l_variance, replicates, spec2_grid.grid())

    spec2 = ContrastSpec(r1, r2, stage1.transform_power, weight, stage1.grid_step)
    second = _stage("stage 2", fit_min_contrast, k_hat, model_kind, spec2,
                    dim=dim, init=first.params, bounds=bounds, restarts=restarts)
    second.stage1 = first
    return second
