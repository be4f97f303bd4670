"""Figure builders over the documented dampedflow CSV schemas.

Each builder takes a FigureSpec, validates the input schema (errors name
the offending column), and writes a deterministic SVG/PNG: the SVG hash
salt is pinned and no timestamp metadata is embedded, so identical
inputs reproduce identical bytes.  Builders return a dict of the
quantities they computed (e.g. the fitted decay slope) so callers and
tests can check them without parsing the figure.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "plotkit"

KINDS = ("phase", "decay", "blowup-ratio", "residual-convergence")


class SchemaError(ValueError):
    pass


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    out: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        for p in self.inputs:
            if not Path(p).exists():
                raise FileNotFoundError(p)


def read_csv(path, required):
    """Documented-CSV reader: comment block, header row, string cells.

    Raises SchemaError naming the first missing column.
    """
    lines = [ln for ln in Path(path).read_text().splitlines()
             if ln and not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: no header row")
    header = lines[0].split(",")
    for col in required:
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r}")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


def column(header, rows, name, astype=float):
    i = header.index(name)
    return np.array([astype(r[i]) for r in rows])


def _finish(fig, out):
    out = Path(out)
    kwargs = {"metadata": {"Date": None}} if out.suffix == ".svg" else {}
    fig.savefig(out, **kwargs)
    plt.close(fig)
    return str(out)


def _empty_figure(out, note):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.annotate(f"no data: {note}", (0.5, 0.5), xycoords="axes fraction",
                ha="center", color="tab:red")
    return _finish(fig, out)


CASE_COLORS = {"CASE1": "#2a9d3f", "CASE2": "#7fc97f",
               "CASE3": "#e4572e", "CASE4": "#a01a1a"}


def plot_phase(spec):
    """Case-colored (lam, mu) grid with outcome markers from a sweep CSV."""
    header, rows = read_csv(spec.inputs[0],
                            ["lambda", "mu", "eps", "case", "outcome", "t_blowup"])
    if not rows:
        return {"out": _empty_figure(spec.out, "empty sweep"), "cells": 0}
    lams = sorted({r[header.index("lambda")] for r in rows}, key=float)
    mus = sorted({r[header.index("mu")] for r in rows}, key=float)
    fig, ax = plt.subplots(figsize=(7, 4.8))
    for r in rows:
        lam_s, mu_s = r[header.index("lambda")], r[header.index("mu")]
        case = r[header.index("case")]
        outcome = r[header.index("outcome")]
        x, y = lams.index(lam_s), mus.index(mu_s)
        ax.add_patch(plt.Rectangle((x - 0.5, y - 0.5), 1, 1,
                                   color=CASE_COLORS.get(case, "#888888")))
        marker = "x" if outcome.startswith("blowup") else "o"
        ax.plot([x], [y], marker, color="black", ms=6)
    ax.set_xticks(range(len(lams)), lams)
    ax.set_yticks(range(len(mus)), mus)
    ax.set_xlim(-0.5, len(lams) - 0.5)
    ax.set_ylim(-0.5, len(mus) - 0.5)
    ax.set_xlabel("decay power lambda")
    ax.set_ylabel("strength mu")
    ax.set_title("phase diagram: cell = case, x = blowup, o = global")
    return {"out": _finish(fig, spec.out), "cells": len(rows)}


def fit_decay_slope(t, w, xi, t_min):
    """Least-squares slope of log w against log Xi for t >= t_min."""
    sel = (t >= t_min) & (w > 0)
    if sel.sum() < 2:
        return math.nan
    A = np.vstack([np.log(xi[sel]), np.ones(sel.sum())]).T
    slope, _ = np.linalg.lstsq(A, np.log(w[sel]), rcond=None)[0]
    return float(slope)


def plot_decay(spec):
    """Vorticity decay against the guaranteed Xi^(-1/3) reference."""
    header, rows = read_csv(spec.inputs[0], ["t", "w_norm", "xi"])
    if not rows:
        return {"out": _empty_figure(spec.out, "empty series"), "slope": math.nan}
    t = column(header, rows, "t")
    w = column(header, rows, "w_norm")
    xi = column(header, rows, "xi")
    t_min = float(spec.options.get("fit_from", 5.0))
    slope = fit_decay_slope(t, w, xi, t_min)
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ax.semilogy(t, w, label=f"||w(t)||  (fitted slope {slope:.8f})")
    anchor = np.searchsorted(t, t_min)
    anchor = min(anchor, len(t) - 1)
    ref = w[anchor] * (xi / xi[anchor]) ** (-1.0 / 3.0)
    ax.semilogy(t, ref, "--", label="Xi^(-1/3) reference")
    ax.set_xlabel("t")
    ax.set_ylabel("vorticity norm")
    ax.legend()
    ax.set_title("vorticity decay vs guaranteed rate")
    return {"out": _finish(fig, spec.out), "slope": slope}


def plot_blowup_ratio(spec):
    """F(t), F''(t) and the lifespan-forcing ratios from diagnostics CSV."""
    header, rows = read_csv(spec.inputs[0], ["t", "F", "F_second"])
    if not rows:
        return {"out": _empty_figure(spec.out, "empty diagnostics"),
                "n_points": 0}
    t = column(header, rows, "t")
    F = column(header, rows, "F")
    F2 = column(header, rows, "F_second")
    eps = float(spec.options.get("eps", 1.0))
    M = float(spec.options.get("M", 1.0))
    r1 = F2 * (t + M) / eps
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = F2 * (t + M) ** 3 * np.log(t / M + 1.0) / np.where(F > 0, F, np.nan) ** 2
    fig, axes = plt.subplots(1, 2, figsize=(10.5, 4))
    axes[0].plot(t, F, label="F")
    axes[0].plot(t, F2, label="F''")
    axes[0].set_xlabel("t")
    axes[0].legend()
    axes[1].semilogy(t, r1, label="F'' (t+M)/eps")
    axes[1].semilogy(t, r2, label="F'' (t+M)^3 log(t/M+1)/F^2")
    axes[1].set_xlabel("t")
    axes[1].legend()
    fig.tight_layout()
    return {"out": _finish(fig, spec.out), "n_points": len(t),
            "inf_ratio1": float(np.nanmin(r1)) if len(t) else math.nan}


def plot_residual_convergence(spec):
    """Richardson ratios of the kernel-identity residuals per check point."""
    header, rows = read_csv(spec.inputs[0],
                            ["check", "mu", "lambda", "v1", "v2", "ratio"])
    rows = [r for r in rows if r[header.index("check")] == "adjoint-richardson"]
    if not rows:
        return {"out": _empty_figure(spec.out, "no richardson rows"),
                "n_points": 0}
    ratio = column(header, rows, "ratio")
    lam = column(header, rows, "lambda")
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    for l in sorted(set(lam)):
        sel = lam == l
        ax.plot(np.arange(len(ratio))[sel], ratio[sel], "o",
                label=f"lambda = {l:g}")
    ax.axhline(4.0, color="k", ls="--", label="second order (ratio 4)")
    ax.set_ylim(3.0, 5.0)
    ax.set_xlabel("check point")
    ax.set_ylabel("residual(h) / residual(h/2)")
    ax.legend()
    return {"out": _finish(fig, spec.out), "n_points": len(ratio),
            "mean_ratio": float(ratio.mean())}


BUILDERS = {
    "phase": plot_phase,
    "decay": plot_decay,
    "blowup-ratio": plot_blowup_ratio,
    "residual-convergence": plot_residual_convergence,
}


def plot(spec):
    """Dispatch a FigureSpec to its builder; returns the builder's report."""
    return BUILDERS[spec.kind](spec)
