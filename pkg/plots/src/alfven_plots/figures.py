"""The standard diagnostic figures, as pure functions of run artifacts."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class MissingColumns(ValueError):
    pass


@dataclass
class PlotSpec:
    """What to plot for one run directory."""

    run_dir: Path
    out_dir: Path
    figures: list[str] = field(
        default_factory=lambda: ["norms", "decay", "conserved", "scaling"]
    )
    fmt: str = "png"
    force: bool = False

    def __post_init__(self):
        if self.fmt not in ("png", "svg"):
            raise ValueError(f"format must be png or svg, got {self.fmt!r}")


def load_manifest(run_dir: Path) -> dict:
    with open(Path(run_dir) / "manifest.json") as fh:
        return json.load(fh)


def load_norms(run_dir: Path):
    path = Path(run_dir) / "norms.csv"
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in line] for line in reader if line]
    data = {c: np.array([r[i] for r in rows]) for i, c in enumerate(header)}
    return header, data


def _require(data: dict, columns: list[str]):
    missing = [c for c in columns if c not in data]
    if missing:
        raise MissingColumns(f"norms.csv lacks columns: {', '.join(missing)}")


def _empty_axes_figure(path: Path, title: str):
    warnings.warn(f"no rows in norms.csv; writing empty axes to {path.name}")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.set_title(title + " (no samples)")
    ax.set_xlabel("t")
    fig.savefig(path)
    plt.close(fig)


def _weight_params(manifest: dict):
    w = manifest.get("config", {}).get("weights", {})
    delta = float(w.get("delta", 0.1))
    a = float(w.get("a", 0.0))
    return a, 1.0 + delta


def plot_norms(spec: PlotSpec, manifest: dict) -> list[Path]:
    """Energy and flux time series with the measured bound line."""
    header, data = load_norms(spec.run_dir)
    _require(data, ["t", "E_plus", "E_minus", "F_plus", "F_minus"])
    out = spec.out_dir / f"norms.{spec.fmt}"
    if data["t"].size == 0:
        _empty_axes_figure(out, "weighted energy and flux norms")
        return [out]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    t = data["t"]
    for col, style in (
        ("E_plus", "-"), ("E_minus", "--"), ("F_plus", "-."), ("F_minus", ":"),
    ):
        ax.plot(t, data[col], style, label=col)
    order_cols = [c for c in header if c.startswith("E") and "_" in c and c[1].isdigit()]
    combined = sum(data[c] for c in ["E_plus", "E_minus", "F_plus", "F_minus"] + order_cols)
    ax.plot(t, combined, lw=2.0, color="k", alpha=0.5, label="combined")
    c_meas = manifest.get("constants", {}).get("C_meas")
    if c_meas is not None:
        bound = 4.0 * combined[0]
        ax.axhline(bound, color="r", lw=1.0, ls="--",
                   label=f"4 x initial (C_meas={c_meas:.3g})")
    ax.set_xlabel("t")
    ax.set_ylabel("weighted norms")
    ax.legend(fontsize=8)
    ax.set_title("weighted energy and flux norms")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return [out]


def plot_decay(spec: PlotSpec, manifest: dict) -> list[Path]:
    """Separation and pressure ratios against the weight decay reference."""
    header, data = load_norms(spec.run_dir)
    _require(data, ["t", "sep_ratio", "p1_ratio", "p2_ratio"])
    out = spec.out_dir / f"decay.{spec.fmt}"
    if data["t"].size == 0:
        _empty_axes_figure(out, "decay ratios")
        return [out]
    a, omega = _weight_params(manifest)
    t = data["t"]
    weight = (1.0 + np.abs(t + a)) ** omega
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for col in ("sep_ratio", "p1_ratio", "p2_ratio"):
        axes[0].plot(t, data[col], label=col)
    axes[0].set_title("weighted ratios (bounded)")
    axes[0].set_xlabel("t")
    axes[0].legend(fontsize=8)
    for col in ("sep_ratio", "p1_ratio", "p2_ratio"):
        raw = data[col] / weight
        axes[1].plot(t, raw, label=f"{col} / weight")
    scale = np.max(data["sep_ratio"] / weight) if np.any(data["sep_ratio"]) else 1.0
    axes[1].plot(t, scale * weight[0] / weight, "k--", lw=1.0,
                 label="(1+|t+a|)^-omega reference")
    axes[1].set_yscale("log")
    axes[1].set_title("raw products vs reference decay")
    axes[1].set_xlabel("t")
    axes[1].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return [out]


def plot_conserved(spec: PlotSpec, manifest: dict) -> list[Path]:
    header, data = load_norms(spec.run_dir)
    _require(data, ["t", "energy", "cross_helicity"])
    out = spec.out_dir / f"conserved.{spec.fmt}"
    if data["t"].size == 0:
        _empty_axes_figure(out, "conserved quantities")
        return [out]
    t = data["t"]
    fig, ax = plt.subplots(figsize=(7, 4))
    e0 = data["energy"][0]
    scale = abs(e0) if e0 else 1.0
    ax.plot(t, (data["energy"] - e0) / scale, label="energy drift")
    x0 = data["cross_helicity"][0]
    ax.plot(t, (data["cross_helicity"] - x0) / scale, label="cross helicity drift")
    ax.set_xlabel("t")
    ax.set_ylabel("relative drift")
    ax.set_title("conserved quantities")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return [out]


def plot_scaling(spec: PlotSpec, manifest: dict) -> list[Path]:
    """Log-log scaling fits from the manifest's sweep constants, if any."""
    constants = manifest.get("constants", {})
    series = []
    if "sweep" in constants:
        rows = [r for r in constants["sweep"] if r.get("dE_plus", 0) > 0]
        if len(rows) >= 2:
            xs = [r["am"] for r in rows]
            ys = [r["dE_plus"] for r in rows]
            series.append(("dE_plus vs minus amplitude", xs, ys))
    if "transfer_ratios" in constants:
        pairs = sorted(
            ((float(k), v) for k, v in constants["transfer_ratios"].items()),
        )
        if len(pairs) >= 2:
            series.append(
                ("recovered/far-slice norm ratio vs lambda",
                 [p[0] for p in pairs], [p[1] for p in pairs])
            )
    if not series:
        return []
    out = spec.out_dir / f"scaling.{spec.fmt}"
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for label, xs, ys in series:
        xs, ys = np.asarray(xs, float), np.asarray(ys, float)
        ax.loglog(xs, ys, "o-", label=label)
        if np.all(ys > 0) and len(xs) >= 2:
            slope = np.polyfit(np.log(xs), np.log(ys), 1)[0]
            ax.loglog(
                xs, ys[0] * (xs / xs[0]) ** slope, "k--", lw=0.8,
                label=f"fit slope {slope:.2f}",
            )
    ax.set_xlabel("sweep parameter")
    ax.legend(fontsize=8)
    ax.set_title("scaling-exponent fits")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return [out]


FIGURES = {
    "norms": plot_norms,
    "decay": plot_decay,
    "conserved": plot_conserved,
    "scaling": plot_scaling,
}


def render_run(spec: PlotSpec) -> list[Path]:
    """All requested figures for one run directory.

    Refuses a run whose manifest records failed assertions unless the
    spec says force.
    """
    manifest = load_manifest(spec.run_dir)
    if not manifest.get("passed", False) and not spec.force:
        raise RuntimeError(
            f"{spec.run_dir}: manifest reports failed assertions; "
            "pass --force to plot anyway"
        )
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in spec.figures:
        written += FIGURES[name](spec, manifest)
    return written
