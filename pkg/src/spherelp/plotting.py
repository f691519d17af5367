"""Figure rendering for the LP-bound sweep.

The sweep report is a CSV of (dimension, log10 bound, log10 record density);
this module renders the companion figure -- the certified upper-bound curve
against the best-known packing densities on a log scale -- next to the
delimited output.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_sweep_figure"]


def render_sweep_figure(rows, out_path):
    """Render the sweep curve to `out_path` (PNG or any savefig format).

    `rows` is an iterable of dicts with keys ``dimension``, ``log_bound``
    and ``log_record`` (base-10 logs of the density values); returns the
    path written.
    """
    rows = sorted(rows, key=lambda r: r["dimension"])
    dims = [r["dimension"] for r in rows]
    bounds = [r["log_bound"] for r in rows]
    records = [r["log_record"] for r in rows]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(dims, bounds, "o-", color="tab:blue", markersize=4,
            label="linear programming bound")
    ax.plot(dims, records, "s--", color="tab:orange", markersize=4,
            label="best known packing")
    for n in (8, 24):
        if n in dims:
            ax.axvline(n, color="0.85", zorder=0)
    ax.set_xlabel("dimension")
    ax.set_ylabel(r"$\log_{10}$ density")
    ax.set_title("Sphere packing density: certified bound vs records")
    ax.legend(frameon=False)
    ax.grid(True, alpha=0.25)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
