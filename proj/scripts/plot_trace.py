#!/usr/bin/env python3
"""Render the CSV/JSON outputs of the vshp CLI with matplotlib.

Documentation artifact: the toolkit itself emits data files only.

Usage:
  plot_trace.py trace <out_dir> [--save fig.png]     plots trace.csv (+ events.json markers)
  plot_trace.py sweep <out_dir> [--save fig.png]     plots sweep.csv eigenvalue loci
  plot_trace.py efficiency <out_dir> [--save fig.png] plots the efficiency tables
"""
import argparse
import json
import os
import sys

import matplotlib.pyplot as plt


def read_csv(path):
    cols, rows = None, []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = line.split(",")
            if cols is None:
                cols = cells
                continue
            parsed = []
            for c in cells:
                try:
                    parsed.append(float(c))
                except ValueError:
                    parsed.append(c)
            rows.append(parsed)
    return cols, rows


def col(cols, rows, name):
    i = cols.index(name)
    return [r[i] for r in rows]


def plot_trace(out_dir, save):
    cols, rows = read_csv(os.path.join(out_dir, "trace.csv"))
    t = col(cols, rows, "t")
    fig, axes = plt.subplots(4, 1, sharex=True, figsize=(9, 9))
    panels = [("omega", "speed"), ("P_m", "mechanical power"),
              ("g", "guide vane opening"), ("h", "turbine head")]
    for ax, (name, label) in zip(axes, panels):
        if name in cols:
            ax.plot(t, col(cols, rows, name), lw=1.0)
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    events_path = os.path.join(out_dir, "events.json")
    if os.path.exists(events_path):
        with open(events_path) as f:
            for e in json.load(f).get("events", []):
                for ax in axes:
                    ax.axvline(e["t"], color="k", ls=":", alpha=0.5)
    axes[-1].set_xlabel("t [s]")
    fig.tight_layout()
    fig.savefig(save) if save else plt.show()


def plot_sweep(out_dir, save):
    cols, rows = read_csv(os.path.join(out_dir, "sweep.csv"))
    re = col(cols, rows, "re")
    im = col(cols, rows, "im")
    p = col(cols, rows, "P_star")
    fig, ax = plt.subplots(figsize=(7, 6))
    sc = ax.scatter(re, im, c=p, cmap="viridis", s=18)
    fig.colorbar(sc, ax=ax, label="P*")
    ax.axvline(0, color="k", lw=0.5)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(save) if save else plt.show()


def plot_efficiency(out_dir, save):
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    cols, rows = read_csv(os.path.join(out_dir, "efficiency_vs_omega.csv"))
    w = col(cols, rows, "omega")
    for name in cols[1:]:
        axes[0].plot(w, col(cols, rows, name), label=name)
    axes[0].set_xlabel("omega [pu]")
    axes[0].set_ylabel("hydraulic efficiency")
    axes[0].legend()
    axes[0].grid(alpha=0.3)

    cols, rows = read_csv(os.path.join(out_dir, "efficiency_vs_power.csv"))
    for model in ("euler", "ieee", "hygov"):
        pm, eta = "P_m_" + model, "eta_" + model
        if pm in cols and eta in cols:
            axes[1].plot(col(cols, rows, pm), col(cols, rows, eta), label=model)
    axes[1].set_xlabel("P_m [pu]")
    axes[1].set_ylabel("hydraulic efficiency")
    axes[1].legend()
    axes[1].grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(save) if save else plt.show()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("kind", choices=["trace", "sweep", "efficiency"])
    ap.add_argument("out_dir")
    ap.add_argument("--save", default=None)
    args = ap.parse_args()
    {"trace": plot_trace, "sweep": plot_sweep, "efficiency": plot_efficiency}[args.kind](
        args.out_dir, args.save)


if __name__ == "__main__":
    sys.exit(main())
