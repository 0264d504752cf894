"""Figures for sweep results: empirical rates solid, closed forms dashed."""

from __future__ import annotations

import math
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

COLORS = {"mrc": "#2980b9", "smmse": "#27ae60", "mmmse": "#c0392b"}
LABELS = {"mrc": "MRC", "smmse": "S-MMSE", "mmmse": "M-MMSE"}
AXIS_LABELS = {"n": "Number of antennas N", "sigma": r"$\sigma_c$ [dB]"}


def preformat_plots():
    plt.rc("xtick", labelsize=11)
    plt.rc("ytick", labelsize=11)
    plt.rcParams.update({"font.size": 12, "axes.grid": True, "grid.alpha": 0.3})


def _cell_average(records, key):
    """Average of ``key`` over users for each (detector, axis); nan entries skipped."""
    acc = defaultdict(list)
    for rec in records:
        v = rec[key]
        if not math.isnan(v):
            acc[rec["detector"], rec["axis"]].append(v)
    return {k: sum(v) / len(v) for k, v in acc.items()}


def plot_rates(records, path, axis: str = "n", unit: str = "nats", title: str | None = None):
    """
    Average per-user uplink rate against the sweep axis.

    ``records`` are dicts as returned by :func:`ricianmimo.sweep.read_csv`
    (or rows converted with ``dataclasses.asdict``).
    """
    preformat_plots()
    emp = _cell_average(records, "rate_mean")
    asy = _cell_average(records, "rate_asymptotic")
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for det in ("mrc", "smmse", "mmmse"):
        for data, style, suffix in ((emp, "-o", ""), (asy, "--", " (asymptotic)")):
            pts = sorted((x, y) for (d, x), y in data.items() if d == det)
            if pts:
                xs, ys = zip(*pts)
                ax.plot(xs, ys, style, color=COLORS[det], label=LABELS[det] + suffix, ms=4)
    ax.set_xlabel(AXIS_LABELS.get(axis, axis))
    ax.set_ylabel(f"UL rate per user [{unit}/s/Hz]")
    if axis == "n":
        ax.set_xscale("log", base=2)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=9)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
