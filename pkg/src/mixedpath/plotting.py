"""Figures written to files next to the CSV/JSON artifacts (Agg backend only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.2,
}

# keeps PNG bytes independent of the matplotlib build
_METADATA = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, metadata=_METADATA)
    plt.close(fig)
    return path


def plot_path_fan(pathset, path) -> Path:
    """Every enumerated position path as a polyline in the (t, q) plane."""
    spec = pathset.spec
    t = spec.dt * np.arange(spec.num_steps + 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for row in pathset.sites:
            ax.plot(t, row * spec.dq, color="0.3", alpha=max(0.05, 1.0 / np.sqrt(len(pathset))), marker="o", ms=2)
        ax.set_xlabel("t")
        ax.set_ylabel("q")
        ax.set_title(f"{len(pathset)} paths, {pathset.direction.value}")
        fig.tight_layout()
        return _save(fig, path)


def plot_phasors(amps, path) -> Path:
    """Amplitudes as arrows in the complex plane plus their sum."""
    phis = np.asarray(amps.phis)
    total = phis.sum()
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 4.0))
        for z in phis:
            ax.annotate("", xy=(z.real, z.imag), xytext=(0, 0), arrowprops={"arrowstyle": "->", "color": "0.5", "lw": 0.8})
        ax.annotate("", xy=(total.real, total.imag), xytext=(0, 0), arrowprops={"arrowstyle": "->", "color": "C3", "lw": 1.5})
        r = max(np.abs(phis).max(), abs(total)) * 1.1
        ax.set_xlim(-r, r)
        ax.set_ylim(-r, r)
        ax.set_aspect("equal")
        ax.axhline(0, color="0.8", lw=0.5)
        ax.axvline(0, color="0.8", lw=0.5)
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.set_title(f"{len(phis)} amplitudes, sum in red")
        fig.tight_layout()
        return _save(fig, path)


def plot_kernel_comparison(x, curves: dict, path) -> Path:
    """Modulus and phase of several kernel rows ``K(x_a; x)`` against ``x``."""
    with plt.rc_context(STYLE):
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(5.0, 5.0))
        for i, (label, values) in enumerate(curves.items()):
            values = np.asarray(values, dtype=complex)
            style = {"color": f"C{i}", "ls": ["-", "--", ":"][i % 3], "label": label}
            top.plot(x, np.abs(values), **style)
            bottom.plot(x, np.angle(values), **style)
        top.set_ylabel("|K|")
        bottom.set_ylabel("arg K")
        bottom.set_xlabel("x")
        top.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)
