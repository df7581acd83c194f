"""Matplotlib renderings written next to the delimited report artifacts.

Figures are diagnostic companions to the CSV/JSON outputs; PNG metadata is
scrubbed so repeated runs produce identical bytes.
"""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = {"dpi": 130, "metadata": {"Software": None}}


def _save(fig, out_dir: str, name: str) -> str:
    path = os.path.join(out_dir, name)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return name


def count_growth(estimate, out_dir: str, name: str = "counts.png") -> str:
    """log separated count vs orbit length, one line per eps, fits overlaid."""
    table = estimate.table
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ns = np.array(table.n_values, dtype=float)
    for j, eps in enumerate(table.eps_values):
        logs = np.log(table.counts[:, j].astype(float))
        ax.plot(ns, logs, "o-", ms=4, label=f"eps = {eps:g}")
    for s in estimate.slopes:
        lo, hi = s["window"]
        xs = np.array([lo, hi], dtype=float)
        j = list(table.eps_values).index(s["eps"])
        i0 = list(table.n_values).index(lo)
        y0 = np.log(float(table.counts[i0, j]))
        ax.plot(xs, y0 + s["slope"] * (xs - lo), "k--", lw=1)
    ax.axhline(np.log(0.9 * table.samples), color="gray", lw=0.8, ls=":",
               label="saturation (0.9 samples)")
    ax.set_xlabel("orbit length n")
    ax.set_ylabel("log separated count")
    ax.set_title(f"{table.map_name}: growth rate {estimate.value:.4f}")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, name)


def sweep_entropy(rows, summary: dict, out_dir: str, name: str = "sweep.png") -> str:
    """Coded entropy and coded-orbit exponents along the leg-count sweep."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ns = [r.n_legs for r in rows]
    ax.semilogx(ns, [r.coded_entropy for r in rows], "o-", base=2,
                label="coded entropy log(N)/t")
    ax.semilogx(ns, [r.min_chi_coded for r in rows], "s-", base=2,
                label="min coded-orbit exponent")
    thr = rows[0].entropy_threshold
    ax.axhline(thr, color="r", ls="--", lw=1, label="target log(lam) - 1/n")
    ax.axhline(rows[0].chi_saddle, color="k", ls=":", lw=1, label="saddle exponent")
    ax.set_xlabel("leg count N")
    ax.set_ylabel("per-step rate")
    pred = summary.get("predicted_entropy_n")
    ax.set_title(f"snake sweep (threshold crossing predicted at N ~ {pred:.2e})"
                 if pred else "snake sweep")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, name)


def phase_portrait(orbit_points: np.ndarray, out_dir: str,
                   name: str = "portrait.png", title: str = "") -> str:
    """Scatter of orbit points (theta, z)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    pts = orbit_points.reshape(-1, 2)
    ax.plot(pts[:, 0], pts[:, 1], ".", ms=0.7, alpha=0.6)
    ax.set_xlabel("theta")
    ax.set_ylabel("z")
    if title:
        ax.set_title(title)
    return _save(fig, out_dir, name)


def bound_margins(entries, out_dir: str, name: str = "bounds.png") -> str:
    """Entropy estimate vs periodic-exponent bound per map."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    labels = [e["map"] for e in entries]
    x = np.arange(len(entries))
    h = [e["h"] for e in entries]
    b = [e["bound"] if e["bound"] is not None else 0.0 for e in entries]
    ax.bar(x - 0.18, h, width=0.36, label="entropy estimate")
    ax.bar(x + 0.18, b, width=0.36, label="max sum of positive exponents")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=20, fontsize=8)
    ax.set_ylabel("nats per step")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, name)
