"""SVG rendering of plot-data dictionaries.

Every figure is drawn from a JSON-serialisable dict (written next to the
SVG), so numbers can be tested without parsing images.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "transmon-stability"
matplotlib.rcParams["svg.fonttype"] = "none"


def _trace_panels(data, fig):
    panels = data["panels"]
    axes = fig.subplots(len(panels), 1, sharex=True, squeeze=False)[:, 0]
    for ax, p in zip(axes, panels):
        t = np.asarray(p["t_hours"])
        ax.plot(t, p["values"], ".", ms=2, color="tab:blue")
        if p.get("mean") is not None:
            ax.axhline(p["mean"], color="k", lw=0.8)
        if p.get("threshold") is not None:
            ax.axhline(p["threshold"], color="gray", ls=":", lw=1)
        for a, b in p.get("intervals_hours", []):
            ax.axvspan(a, b, color="tab:red", alpha=0.2, lw=0)
        ax.set_ylabel(p.get("label", ""))
    axes[-1].set_xlabel("time (h)")


def _scaling(data, fig):
    ax = fig.subplots()
    T = np.asarray(data["mean_t1"])
    s = np.asarray(data["std_t1"])
    err = data.get("std_t1_err")
    ax.errorbar(T, s, yerr=err, fmt="o", ms=4, capsize=2)
    grid = np.geomspace(T.min() * 0.8, T.max() * 1.25, 100)
    ax.plot(grid, data["a"] * grid ** 1.5, "k-", lw=1,
            label=f"a = {data['a']:.4g} {data.get('a_unit', '')}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(f"<T1> ({data.get('time_unit', 's')})")
    ax.set_ylabel(f"sigma_T1 ({data.get('time_unit', 's')})")
    ax.legend()


def _curve(data, fig):
    ax = fig.subplots()
    ax.plot(data["x"], data["y"], "o", ms=3)
    ax.plot(data["x_model"], data["y_model"], "-", lw=1)
    ax.set_xlabel(data.get("xlabel", ""))
    ax.set_ylabel(data.get("ylabel", "P1"))


def _iq(data, fig):
    ax = fig.subplots()
    for k, colour in ((0, "tab:blue"), (1, "tab:red")):
        pts = np.asarray(data["points"][str(k)])
        if pts.size:
            ax.plot(pts[:, 0], pts[:, 1], ".", ms=1, color=colour, alpha=0.4)
    gx, gy = np.asarray(data["grid_i"]), np.asarray(data["grid_q"])
    llr = np.asarray(data["llr"])
    ax.contour(gx, gy, llr, levels=[0.0], colors="k", linewidths=1)
    ax.set_xlabel("I")
    ax.set_ylabel("Q")
    ax.set_aspect("equal", adjustable="datalim")


def _series(data, fig):
    panels = data["panels"]
    axes = fig.subplots(len(panels), 1, sharex=True, squeeze=False)[:, 0]
    for ax, p in zip(axes, panels):
        for name, ys in p["series"].items():
            ax.plot(data["x"][name], ys, "o-", ms=3, label=name)
        ax.set_ylabel(p.get("label", ""))
        ax.legend(fontsize="small")
    axes[-1].set_xlabel(data.get("xlabel", ""))


_RENDERERS = {
    "trace_panels": _trace_panels,
    "scaling": _scaling,
    "curve": _curve,
    "iq": _iq,
    "series": _series,
}


def render(data: dict, path) -> Path:
    """Draw ``data`` (its ``kind`` picks the layout) into an SVG at ``path``."""
    path = Path(path)
    fig = plt.figure(figsize=(6.4, 4.8))
    try:
        _RENDERERS[data["kind"]](data, fig)
        if data.get("title"):
            fig.suptitle(data["title"])
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    finally:
        plt.close(fig)
    return path
