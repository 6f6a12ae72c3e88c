"""Figure rendering for CLI reports.

Every function writes a PNG next to the delimited output and returns the
path. Rendering uses the Agg backend so runs work headless; figures are
for human inspection and are not part of the reproducibility contract
(PNG bytes vary across matplotlib builds).
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_curve", "plot_pattern", "plot_fry", "plot_angle_histogram",
           "plot_count_histogram", "plot_spectrum", "plot_envelope"]

_DPI = 130


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def plot_curve(curve, path: str, reference=None, reference_label: str = "reference",
               title: str | None = None) -> str:
    """Line plot of a summary curve, with an optional reference overlay."""
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.plot(curve.r, curve.values, lw=1.6, color="#1f4e8c", label=curve.kind)
    if reference is not None:
        ax.plot(reference.r, reference.values, lw=1.2, ls="--", color="#b3422e",
                label=reference_label)
        ax.legend(frameon=False)
    ax.set_xlabel("r")
    ax.set_ylabel(curve.kind)
    ax.set_title(title or curve.kind)
    return _save(fig, path)


def plot_pattern(pattern, path: str, axis_pair=(0, 1)) -> str:
    """Scatter of the pattern projected on an axis pair (or the line)."""
    a = axis_pair[0]
    fig, ax = plt.subplots(figsize=(4.8, 4.8))
    if pattern.dim == 1:
        ax.scatter(pattern.points[:, 0], np.zeros(pattern.n), s=4, color="#1f4e8c")
        ax.set_ylim(-1, 1)
        ax.set_xlabel("x")
    else:
        b = axis_pair[1]
        ax.scatter(pattern.points[:, a], pattern.points[:, b], s=3,
                   color="#1f4e8c", alpha=0.7, linewidths=0)
        ax.set_xlabel(f"axis {a}")
        ax.set_ylabel(f"axis {b}")
        ax.set_aspect("equal")
    ax.set_title(f"{pattern.n} points")
    return _save(fig, path)


def plot_fry(displacements: np.ndarray, path: str, max_norm: float | None = None) -> str:
    """Scatter of projected pair displacements about the origin."""
    fig, ax = plt.subplots(figsize=(4.8, 4.8))
    if displacements.size:
        ax.scatter(displacements[:, 0], displacements[:, 1], s=1.5,
                   color="#333333", alpha=0.35, linewidths=0)
    if max_norm is not None:
        ax.set_xlim(-max_norm, max_norm)
        ax.set_ylim(-max_norm, max_norm)
    ax.set_aspect("equal")
    ax.axhline(0.0, color="#bbbbbb", lw=0.6)
    ax.axvline(0.0, color="#bbbbbb", lw=0.6)
    ax.set_title("pair displacements")
    return _save(fig, path)


def plot_angle_histogram(edges: np.ndarray, counts: np.ndarray, path: str) -> str:
    """Polar histogram of nearest-neighbor directions."""
    fig = plt.figure(figsize=(4.8, 4.8))
    ax = fig.add_subplot(projection="polar")
    widths = np.diff(edges)
    ax.bar(edges[:-1], counts, width=widths, align="edge",
           color="#1f4e8c", alpha=0.8, edgecolor="white", linewidth=0.4)
    mean = counts.mean() if counts.size else 0.0
    ax.plot(np.linspace(0, 2 * math.pi, 200), np.full(200, mean),
            color="#b3422e", lw=1.0, ls="--")
    ax.set_title("nearest-neighbor directions")
    return _save(fig, path)


def plot_count_histogram(hist, path: str) -> str:
    """Box-count bars with the matched-mean Poisson reference."""
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    centers = 0.5 * (hist.bin_lo + hist.bin_hi)
    ax.bar(centers, hist.counts, width=0.9, color="#1f4e8c", alpha=0.8,
           label="observed")
    ax.plot(centers, hist.poisson_expected, color="#b3422e", lw=1.4,
            marker="o", ms=3, label="Poisson, same mean")
    ax.set_xlabel("points per box")
    ax.set_ylabel("boxes")
    ax.legend(frameon=False)
    ax.set_title(f"mean {hist.mean:.2f}, variance {hist.variance:.2f}")
    return _save(fig, path)


def plot_spectrum(spectrum, path: str, fit=None) -> str:
    """Log-log scatter of the scattering intensity with binned means."""
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    pos = spectrum.values > 0
    ax.scatter(spectrum.k_norm[pos], spectrum.values[pos], s=2,
               color="#8ea8c8", alpha=0.3, linewidths=0, label="modes")
    if fit is not None:
        ax.plot(fit.bin_k, fit.bin_s, color="#1f4e8c", marker="o", ms=4,
                lw=1.2, label="bin means")
        kk = np.linspace(fit.bin_k[0], fit.bin_k[-1], 50)
        ax.plot(kk, np.exp(fit.intercept) * kk**fit.alpha, color="#b3422e",
                lw=1.4, ls="--", label=f"slope {fit.alpha:.2f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("|k|")
    ax.set_ylabel("S(k)")
    ax.axhline(1.0, color="#bbbbbb", lw=0.8)
    ax.legend(frameon=False, loc="lower right")
    ax.set_title("scattering intensity")
    return _save(fig, path)


def plot_envelope(result, path: str) -> str:
    """Centered-L data curve inside the global envelope band."""
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.fill_between(result.r, result.lower, result.upper, color="#c9d7e8",
                    label=f"{100 * (1 - result.level):.0f}% global envelope")
    ax.plot(result.r, result.data_curve, color="#b3422e", lw=1.6, label="data")
    ax.axhline(0.0, color="#888888", lw=0.8, ls=":")
    ax.set_xlabel("r")
    ax.set_ylabel("L(r) - r")
    ax.legend(frameon=False)
    ax.set_title(f"p in [{result.p_lower:.3f}, {result.p_upper:.3f}] ({result.measure})")
    return _save(fig, path)
