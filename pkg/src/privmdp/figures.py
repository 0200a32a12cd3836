"""Figure rendering for sweep results: value bands and cost of privacy vs k.

The CSV is the contract; these plots are derived artifacts written next to it.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

_VALUE_SERIES = (
    ("v_opt", "optimistic bound", "tab:green"),
    ("v_private", "private value", "tab:blue"),
    ("v_nonprivate", "non-private value", "tab:orange"),
    ("v_pess", "pessimistic bound", "tab:red"),
)


def _aggregate(rows: list[dict]) -> dict[float, dict[str, np.ndarray]]:
    by_k: dict[float, dict[str, list[float]]] = {}
    for row in rows:
        k = float(row["k"])
        bucket = by_k.setdefault(k, {})
        for col in ("v_private", "v_nonprivate", "v_pess", "v_opt", "cop_bound"):
            bucket.setdefault(col, []).append(float(row[col]))
    return {
        k: {col: np.asarray(vals) for col, vals in bucket.items()}
        for k, bucket in sorted(by_k.items())
    }


def render_sweep_figures(rows: list[dict], out_base) -> list[Path]:
    """Render the two summary figures for a sweep.

    `rows` are column-keyed dicts (one per CSV row); `out_base` is the CSV
    path whose stem names the PNGs. Returns the written paths.
    """
    base = Path(out_base)
    agg = _aggregate(rows)
    ks = np.asarray(list(agg))
    written = []

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for col, label, color in _VALUE_SERIES:
        means = np.array([agg[k][col].mean() for k in ks])
        stds = np.array([agg[k][col].std(ddof=1) if agg[k][col].size > 1 else 0.0 for k in ks])
        ax.errorbar(ks, means, yerr=stds, label=label, color=color, marker="o",
                    capsize=3, markersize=3.5, linewidth=1.2)
    ax.set_xscale("log")
    ax.set_xlabel("privacy parameter k")
    ax.set_ylabel("value at initial state")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    values_path = base.with_name(base.stem + "_values.png")
    fig.savefig(values_path, dpi=150)
    plt.close(fig)
    written.append(values_path)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    means = np.array([agg[k]["cop_bound"].mean() for k in ks])
    stds = np.array([agg[k]["cop_bound"].std(ddof=1) if agg[k]["cop_bound"].size > 1 else 0.0
                     for k in ks])
    ax.errorbar(ks, means, yerr=stds, color="tab:purple", marker="o", capsize=3,
                markersize=3.5, linewidth=1.2)
    ax.set_xscale("log")
    ax.set_xlabel("privacy parameter k")
    ax.set_ylabel("cost of privacy bound")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    cop_path = base.with_name(base.stem + "_cop.png")
    fig.savefig(cop_path, dpi=150)
    plt.close(fig)
    written.append(cop_path)
    return written


def read_csv_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def render_from_csv(csv_path, out_dir=None) -> list[Path]:
    rows = read_csv_rows(csv_path)
    if not rows:
        raise ValueError(f"{csv_path} has no data rows")
    base = Path(csv_path)
    if out_dir is not None:
        base = Path(out_dir) / base.name
        base.parent.mkdir(parents=True, exist_ok=True)
    return render_sweep_figures(rows, base)
