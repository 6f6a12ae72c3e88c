"""Command-line front end.

Subcommands: simulate, ktheory, summarize, diagnose, fit, envelope.
Options come from command-line flags layered over an optional JSON config
(``--config``); flags win. Every run writes ``run_manifest.json`` to the
output directory, echoing the fully resolved config (including the seed,
generated if absent), library versions, wall time, and the list of
outputs. Rerunning with ``--config run_manifest.json`` replays the run:
CSV/JSON outputs are byte-identical (figures and the manifest itself,
which records wall time, are exempt).

Exit codes: 0 success, 2 malformed CSV, 3 invalid config, 4 numerical
failure, 1 anything else. Errors are reported as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .contrast import ContrastSpec, fit_min_contrast, fit_two_stage
from .envelope import count_histogram, global_envelope_test
from .errors import ConfigError, CsvFormatError, HyperlatError, NumericalError
from .estimators import (exponent_fit, fry_slab, g_nearest_neighbor, k_empirical,
                         nn_angle_histogram, pcf_empirical, rescale_to_unit_intensity,
                         scattering_intensity)
from .gaussfield import CovarianceModel
from .geometry import BoxWindow, PointPattern, SeedSpec
from .io import (read_points_csv, write_curve_csv, write_envelope_csv,
                 write_histogram_csv, write_json, write_points_csv,
                 write_spectrum_csv)
from .ktheory import SummaryCurve, k_theoretical, l_centered_from_k
from .latticesim import PerturbedLatticeSpec, PoissonModel, simulate
from .special import unit_ball_volume

__all__ = ["main", "run_config"]

_COMMANDS = ("simulate", "ktheory", "summarize", "diagnose", "fit", "envelope")

_DEFAULTS: dict = {
    "simulate": {"model": "iid", "sigma": 0.25, "range": None, "gamma": None,
                 "dim": 3, "window": 10.0, "window_min": None, "window_max": None,
                 "buffer": None},
    "ktheory": {"model": "iid", "sigma": 0.25, "range": None, "gamma": None,
                "dim": 3, "r_max": 3.0, "r_step": 0.02, "q": None},
    "summarize": {"data": None, "dim": None, "window_min": None, "window_max": None,
                  "r_max": 3.0, "r_step": 0.02, "k_max": 7.0, "bandwidth": None,
                  "exponent_k_max": 1.5, "rescale": False},
    "diagnose": {"data": None, "dim": None, "window_min": None, "window_max": None,
                 "box_side": 2.7, "gap": 1.5, "n_boxes": 64, "k_max": 7.0,
                 "exponent_k_max": 1.5, "slab_halfwidth": 0.5, "fry_max_norm": 4.0,
                 "angle_bins": 36, "rescale": True,
                 "model": None, "sigma": None, "range": None, "gamma": None},
    "fit": {"data": None, "dim": None, "window_min": None, "window_max": None,
            "model_kind": "iid", "r1": 0.0, "r2": 3.0, "grid_step": 0.02,
            "transform_power": 0.25, "two_stage": False, "stage2_r1": 0.2,
            "stage2_r2": 2.0, "n_sims": 100, "restarts": 3, "maxfev": 500,
            "rescale": True, "init_sigma": None, "init_range": None,
            "init_gamma": None},
    "envelope": {"data": None, "dim": None, "window_min": None, "window_max": None,
                 "null": None, "model": None, "sigma": None, "range": None,
                 "gamma": None, "intensity": 1.0, "n_sims": 999, "measure": "erl",
                 "level": 0.05, "r1": 0.2, "r2": 2.0, "r_step": 0.05,
                 "rescale": True},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse problems are config problems
        raise ConfigError(message)


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"expected comma-separated floats, got {text!r}") from None


def _build_parser() -> _Parser:
    parser = _Parser(prog="hyperlat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config or a previous run_manifest.json")
        p.add_argument("--seed", type=int, help="master seed (u64)")
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--dim", type=int, choices=(1, 2, 3))
        return p

    p = add("simulate", "sample a perturbed lattice and write the points")
    p.add_argument("--model", choices=("stationarized", "iid", "powexp"))
    p.add_argument("--sigma", type=float)
    p.add_argument("--range", type=float, dest="range")
    p.add_argument("--gamma", type=float)
    p.add_argument("--window", type=float, help="cube side, centered at the origin")
    p.add_argument("--window-min", type=_float_list)
    p.add_argument("--window-max", type=_float_list)
    p.add_argument("--buffer", type=int)

    p = add("ktheory", "exact model K-function on a grid")
    p.add_argument("--model", choices=("stationarized", "iid", "powexp"))
    p.add_argument("--sigma", type=float)
    p.add_argument("--range", type=float, dest="range")
    p.add_argument("--gamma", type=float)
    p.add_argument("--r-max", type=float)
    p.add_argument("--r-step", type=float)
    p.add_argument("--q", type=int, help="shell half-width override")

    p = add("summarize", "empirical summaries of a point CSV")
    p.add_argument("--data", help="input point CSV")
    p.add_argument("--window-min", type=_float_list)
    p.add_argument("--window-max", type=_float_list)
    p.add_argument("--r-max", type=float)
    p.add_argument("--r-step", type=float)
    p.add_argument("--k-max", type=float)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--exponent-k-max", type=float)
    p.add_argument("--rescale", action="store_const", const=True)

    p = add("diagnose", "hyperuniformity diagnostics of a point CSV")
    p.add_argument("--data", help="input point CSV")
    p.add_argument("--window-min", type=_float_list)
    p.add_argument("--window-max", type=_float_list)
    p.add_argument("--box-side", type=float)
    p.add_argument("--gap", type=float)
    p.add_argument("--n-boxes", type=int)
    p.add_argument("--k-max", type=float)
    p.add_argument("--exponent-k-max", type=float)
    p.add_argument("--slab-halfwidth", type=float)
    p.add_argument("--fry-max-norm", type=float)
    p.add_argument("--angle-bins", type=int)
    p.add_argument("--no-rescale", dest="rescale", action="store_const", const=False)
    p.add_argument("--model", choices=("stationarized", "iid", "powexp"),
                   help="optional model for a covariance-decay report")
    p.add_argument("--sigma", type=float)
    p.add_argument("--range", type=float, dest="range")
    p.add_argument("--gamma", type=float)

    p = add("fit", "minimum-contrast fit to a point CSV")
    p.add_argument("--data", help="input point CSV")
    p.add_argument("--window-min", type=_float_list)
    p.add_argument("--window-max", type=_float_list)
    p.add_argument("--model-kind", choices=("iid", "powexp"))
    p.add_argument("--r1", type=float)
    p.add_argument("--r2", type=float)
    p.add_argument("--grid-step", type=float)
    p.add_argument("--transform-power", type=float)
    p.add_argument("--two-stage", action="store_const", const=True)
    p.add_argument("--stage2-r1", type=float)
    p.add_argument("--stage2-r2", type=float)
    p.add_argument("--n-sims", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--maxfev", type=int)
    p.add_argument("--no-rescale", dest="rescale", action="store_const", const=False)
    p.add_argument("--init-sigma", type=float)
    p.add_argument("--init-range", type=float)
    p.add_argument("--init-gamma", type=float)

    p = add("envelope", "global envelope test of a point CSV against a null")
    p.add_argument("--data", help="input point CSV")
    p.add_argument("--window-min", type=_float_list)
    p.add_argument("--window-max", type=_float_list)
    p.add_argument("--null", choices=("poisson",),
                   help="test against a Poisson null instead of a lattice model")
    p.add_argument("--model", choices=("stationarized", "iid", "powexp"))
    p.add_argument("--sigma", type=float)
    p.add_argument("--range", type=float, dest="range")
    p.add_argument("--gamma", type=float)
    p.add_argument("--intensity", type=float)
    p.add_argument("--n-sims", type=int)
    p.add_argument("--measure", choices=("erl", "area"))
    p.add_argument("--level", type=float)
    p.add_argument("--r1", type=float)
    p.add_argument("--r2", type=float)
    p.add_argument("--r-step", type=float)
    p.add_argument("--no-rescale", dest="rescale", action="store_const", const=False)

    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if "config" in raw and isinstance(raw["config"], dict):
        raw = raw["config"]  # a previous run's manifest; replay its config
    return raw


def _effective_config(command: str, file_cfg: dict, cli_cfg: dict) -> dict:
    cfg = dict(_DEFAULTS[command])
    cfg["seed"] = None
    cfg["out"] = "."
    known = set(cfg)
    file_command = file_cfg.get("command")
    if file_command is not None and file_command != command:
        raise ConfigError(
            f"config is for command {file_command!r}, invoked as {command!r}")
    for key, value in file_cfg.items():
        if key == "command":
            continue
        if key not in known:
            raise ConfigError(f"unknown config key {key!r} for command {command!r}")
        cfg[key] = value
    for key, value in cli_cfg.items():
        if value is not None:
            cfg[key] = value
    cfg["command"] = command
    return cfg


def _resolve_window(cfg, need_dim=None) -> BoxWindow | None:
    wmin, wmax = cfg.get("window_min"), cfg.get("window_max")
    if (wmin is None) != (wmax is None):
        raise ConfigError("window_min and window_max must be given together")
    if wmin is not None:
        window = BoxWindow(np.asarray(wmin, float), np.asarray(wmax, float))
        if need_dim is not None and window.dim != need_dim:
            raise ConfigError(f"window has dim {window.dim}, expected {need_dim}")
        return window
    side = cfg.get("window")
    if side is not None:
        if need_dim is None:
            raise ConfigError("cube window needs an explicit dim")
        return BoxWindow.cube(float(side), need_dim)
    return None


def _resolve_model(cfg, dim: int, kind_key: str = "model") -> CovarianceModel:
    kind = cfg.get(kind_key)
    if kind is None:
        raise ConfigError("a model kind is required")
    sigma = cfg.get("sigma")
    if kind == "stationarized":
        return CovarianceModel("stationarized", dim)
    if sigma is None:
        raise ConfigError(f"model {kind!r} needs sigma")
    if kind == "iid":
        return CovarianceModel("iid", dim, sigma=float(sigma))
    if kind == "powexp":
        if cfg.get("range") is None or cfg.get("gamma") is None:
            raise ConfigError("powexp needs sigma, range, and gamma")
        return CovarianceModel("powexp", dim, sigma=float(sigma),
                               range_=float(cfg["range"]), gamma=float(cfg["gamma"]))
    raise ConfigError(f"unknown model kind {kind!r}")


def _seed_spec(cfg, required: bool) -> SeedSpec | None:
    seed = cfg.get("seed")
    if seed is None:
        if not required:
            return None
        seed = int(np.random.SeedSequence().entropy % (2**63))
        cfg["seed"] = seed
    return SeedSpec(int(seed))


def _load_pattern(cfg) -> PointPattern:
    if not cfg.get("data"):
        raise ConfigError(f"command {cfg['command']!r} needs --data <points.csv>")
    window = _resolve_window(cfg)
    pattern = read_points_csv(cfg["data"], dim=cfg.get("dim"), window=window)
    if cfg.get("rescale"):
        pattern = rescale_to_unit_intensity(pattern)
    return pattern


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    if not (step > 0 and hi > lo):
        raise ConfigError("grid needs hi > lo and a positive step")
    n = max(int(round((hi - lo) / step)), 1)
    return np.linspace(lo, hi, n + 1)


# ---------------------------------------------------------------- commands

def _cmd_simulate(cfg, out):
    dim = cfg.get("dim") or 3
    model = _resolve_model(cfg, dim)
    window = _resolve_window(cfg, need_dim=dim)
    if window is None:
        raise ConfigError("simulate needs --window or window_min/window_max")
    seed = _seed_spec(cfg, required=True)
    spec = PerturbedLatticeSpec(model, window, buffer=cfg.get("buffer"))
    pattern = simulate(spec, seed)

    from .plotting import plot_pattern

    write_points_csv(str(out / "points.csv"), pattern)
    plot_pattern(pattern, str(out / "pattern.png"))
    outputs = ["points.csv", "points.window.json", "pattern.png"]
    results = {"n_points": pattern.n, "field_method": pattern.meta["field_method"],
               "intensity": pattern.intensity()}
    return results, outputs


def _cmd_ktheory(cfg, out):
    dim = cfg.get("dim") or 3
    model = _resolve_model(cfg, dim)
    grid = _grid(0.0, float(cfg["r_max"]), float(cfg["r_step"]))
    curve = k_theoretical(model, grid, q=cfg.get("q"))
    centered = l_centered_from_k(curve, dim)
    poisson = SummaryCurve(grid, unit_ball_volume(dim) * grid**dim, "K",
                           {"reference": "poisson"})

    from .plotting import plot_curve

    write_curve_csv(str(out / "k_theory.csv"), curve)
    write_curve_csv(str(out / "l_centered.csv"), centered)
    plot_curve(curve, str(out / "k_theory.png"), reference=poisson,
               reference_label="Poisson", title="model K")
    outputs = ["k_theory.csv", "l_centered.csv", "k_theory.png"]
    return {"model": model.to_dict(), "q": curve.meta.get("q")}, outputs


def _cmd_summarize(cfg, out):
    pattern = _load_pattern(cfg)
    d = pattern.dim
    r_step = float(cfg["r_step"])
    grid = _grid(0.0, float(cfg["r_max"]), r_step)
    pos_grid = grid[grid > 0]

    k_hat = k_empirical(pattern, grid)
    centered = l_centered_from_k(k_hat, d)
    pcf = pcf_empirical(pattern, pos_grid, bandwidth=cfg.get("bandwidth"))
    g_hat = g_nearest_neighbor(pattern, pos_grid)
    spectrum = scattering_intensity(pattern, k_max=float(cfg["k_max"]))

    write_curve_csv(str(out / "k_empirical.csv"), k_hat)
    write_curve_csv(str(out / "l_centered.csv"), centered)
    write_curve_csv(str(out / "pcf.csv"), pcf)
    write_curve_csv(str(out / "g_function.csv"), g_hat)
    write_spectrum_csv(str(out / "spectrum.csv"), spectrum)
    outputs = ["k_empirical.csv", "l_centered.csv", "pcf.csv", "g_function.csv",
               "spectrum.csv"]

    results = {"n_points": pattern.n, "intensity": pattern.intensity(),
               "window": pattern.window.as_dict()}
    fit = None
    try:
        fit = exponent_fit(spectrum, k_max=float(cfg["exponent_k_max"]))
        write_json(str(out / "exponent.json"), fit.to_dict())
        outputs.append("exponent.json")
        results["exponent"] = fit.to_dict()
    except ConfigError as exc:
        results["exponent_skipped"] = str(exc)

    from .plotting import plot_curve, plot_spectrum

    poisson = SummaryCurve(grid, unit_ball_volume(d) * grid**d, "K",
                           {"reference": "poisson"})
    plot_curve(k_hat, str(out / "k_empirical.png"), reference=poisson,
               reference_label="Poisson", title="empirical K")
    plot_curve(pcf, str(out / "pcf.png"), title="pair correlation")
    plot_spectrum(spectrum, str(out / "spectrum.png"), fit=fit)
    outputs += ["k_empirical.png", "pcf.png", "spectrum.png"]
    return results, outputs


def _cmd_diagnose(cfg, out):
    raw = read_points_csv(cfg["data"], dim=cfg.get("dim"),
                          window=_resolve_window(cfg)) if cfg.get("data") else None
    if raw is None:
        raise ConfigError("diagnose needs --data <points.csv>")
    pattern = rescale_to_unit_intensity(raw) if cfg.get("rescale") else raw

    hist = count_histogram(pattern, box_side=float(cfg["box_side"]),
                           gap=float(cfg["gap"]), n_boxes=int(cfg["n_boxes"]))
    edges, angle_counts = nn_angle_histogram(pattern, n_bins=int(cfg["angle_bins"])) \
        if pattern.dim >= 2 else (None, None)
    spectrum = scattering_intensity(pattern, k_max=float(cfg["k_max"]))

    results = {
        "n_points": pattern.n,
        "original_window": raw.window.as_dict(),
        "original_intensity": raw.intensity(),
        "window": pattern.window.as_dict(),
        "intensity": pattern.intensity(),
        "rescaled": bool(cfg.get("rescale")),
        "count_boxes": hist.to_dict(),
    }

    write_histogram_csv(str(out / "count_histogram.csv"), hist)
    write_spectrum_csv(str(out / "spectrum.csv"), spectrum)
    outputs = ["count_histogram.csv", "spectrum.csv"]

    fit = None
    try:
        fit = exponent_fit(spectrum, k_max=float(cfg["exponent_k_max"]))
        results["exponent"] = fit.to_dict()
    except ConfigError as exc:
        results["exponent_skipped"] = str(exc)

    from .plotting import (plot_angle_histogram, plot_count_histogram, plot_fry,
                           plot_pattern, plot_spectrum)

    plot_pattern(pattern, str(out / "pattern.png"))
    plot_count_histogram(hist, str(out / "counts.png"))
    plot_spectrum(spectrum, str(out / "spectrum.png"), fit=fit)
    outputs += ["pattern.png", "counts.png", "spectrum.png"]

    if pattern.dim >= 2:
        lines = ["bin_lo,bin_hi,count"]
        for lo, hi, c in zip(edges[:-1], edges[1:], angle_counts):
            lines.append(f"{lo!r},{hi!r},{int(c)}")
        (out / "nn_angles.csv").write_text("\n".join(lines) + "\n")
        mean = angle_counts.mean()
        chi2 = float(np.sum((angle_counts - mean) ** 2 / mean)) if mean > 0 else 0.0
        results["nn_angle_chi2"] = {"statistic": chi2, "dof": int(angle_counts.size - 1)}
        plot_angle_histogram(edges, angle_counts, str(out / "angles.png"))

        max_norm = cfg.get("fry_max_norm")
        diffs = fry_slab(pattern, slab_halfwidth=float(cfg["slab_halfwidth"]),
                         max_norm=max_norm)
        lines = ["dx,dy"]
        for row in diffs:
            lines.append(f"{row[0]!r},{row[1]!r}")
        (out / "fry.csv").write_text("\n".join(lines) + "\n")
        results["fry_pairs"] = int(diffs.shape[0])
        plot_fry(diffs, str(out / "fry.png"), max_norm=max_norm)
        outputs += ["nn_angles.csv", "angles.png", "fry.csv", "fry.png"]

    if cfg.get("model"):
        from .ktheory import hyperuniformity_condition_report

        model = _resolve_model(cfg, pattern.dim)
        results["covariance_decay"] = hyperuniformity_condition_report(model)

    write_json(str(out / "diagnose.json"), results)
    outputs.append("diagnose.json")
    return results, outputs


def _cmd_fit(cfg, out):
    pattern = _load_pattern(cfg)
    d = pattern.dim
    kind = cfg["model_kind"]
    step = float(cfg["grid_step"])
    r2 = float(cfg["r2"])
    spec = ContrastSpec(float(cfg["r1"]), r2, float(cfg["transform_power"]),
                        None, step)
    grid = _grid(0.0, max(r2, float(cfg["stage2_r2"])), step)
    k_hat = k_empirical(pattern, grid)

    init = {}
    for name in ("sigma", "range", "gamma"):
        if cfg.get(f"init_{name}") is not None:
            init[name] = float(cfg[f"init_{name}"])

    if cfg.get("two_stage"):
        seed = _seed_spec(cfg, required=True)
        result = fit_two_stage(k_hat, kind, spec,
                               stage2_window=(float(cfg["stage2_r1"]),
                                              float(cfg["stage2_r2"])),
                               n_sims=int(cfg["n_sims"]), window=pattern.window,
                               seed=seed, dim=d, init=init or None,
                               restarts=int(cfg["restarts"]))
    else:
        result = fit_min_contrast(k_hat, kind, spec, dim=d, init=init or None,
                                  restarts=int(cfg["restarts"]),
                                  maxfev=int(cfg["maxfev"]))

    fitted = k_theoretical(result.model(d), grid, q=15)
    write_json(str(out / "fit.json"), result.to_dict())
    write_curve_csv(str(out / "empirical_k.csv"), k_hat)
    write_curve_csv(str(out / "fitted_k.csv"), fitted)
    outputs = ["fit.json", "empirical_k.csv", "fitted_k.csv"]

    from .plotting import plot_curve

    plot_curve(k_hat, str(out / "fit.png"), reference=fitted,
               reference_label="fitted model", title=f"{kind} fit")
    outputs.append("fit.png")
    return result.to_dict(), outputs


def _cmd_envelope(cfg, out):
    pattern = _load_pattern(cfg)
    d = pattern.dim
    if cfg.get("model"):
        model = _resolve_model(cfg, d)
    elif cfg.get("null") == "poisson":
        model = PoissonModel(d, float(cfg["intensity"]))
    else:
        raise ConfigError("envelope needs a null: --model <kind> ... or --null poisson")
    seed = _seed_spec(cfg, required=True)
    grid = _grid(float(cfg["r1"]), float(cfg["r2"]), float(cfg["r_step"]))
    result = global_envelope_test(pattern, model, grid, n_sims=int(cfg["n_sims"]),
                                  seed=seed, measure=cfg["measure"],
                                  level=float(cfg["level"]))

    write_json(str(out / "envelope.json"), result.to_dict())
    write_envelope_csv(str(out / "envelope.csv"), result)
    outputs = ["envelope.json", "envelope.csv"]

    from .plotting import plot_envelope

    plot_envelope(result, str(out / "envelope.png"))
    outputs.append("envelope.png")
    return result.to_dict(), outputs


_RUNNERS = {"simulate": _cmd_simulate, "ktheory": _cmd_ktheory,
            "summarize": _cmd_summarize, "diagnose": _cmd_diagnose,
            "fit": _cmd_fit, "envelope": _cmd_envelope}


def run_config(cfg: dict) -> dict:
    """Execute a fully resolved config; returns the manifest dict."""
    from pathlib import Path

    command = cfg.get("command")
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    out = Path(cfg.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    results, outputs = _RUNNERS[command](cfg, out)

    manifest = {
        "command": command,
        "config": {k: v for k, v in cfg.items() if k != "out"} | {"out": str(out)},
        "seed": cfg.get("seed"),
        "versions": _versions(),
        "wall_time_s": round(time.time() - started, 3),
        "outputs": sorted(outputs),
        "results": _jsonable(results),
    }
    write_json(str(out / "run_manifest.json"), manifest)
    return manifest


def _versions() -> dict:
    import matplotlib
    import scipy

    return {"hyperlat": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__, "matplotlib": matplotlib.__version__,
            "python": ".".join(map(str, sys.version_info[:3]))}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        cli_cfg = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
        file_cfg = _load_config(ns.config) if ns.config else {}
        cfg = _effective_config(ns.command, file_cfg, cli_cfg)
        manifest = run_config(cfg)
    except CsvFormatError as exc:
        return _fail(exc, 2)
    except ConfigError as exc:
        return _fail(exc, 3)
    except NumericalError as exc:
        return _fail(exc, 4)
    except HyperlatError as exc:
        return _fail(exc, 1)
    print(json.dumps({"command": manifest["command"], "out": manifest["config"]["out"],
                      "outputs": manifest["outputs"]}, sort_keys=True))
    return 0


def _fail(exc: Exception, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
