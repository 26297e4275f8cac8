"""Render simulation CSVs into the standard figure types.

Consumes the Monte Carlo harness CSV schema (family, decoder, ..., p,
trials, fail_z, fail_x, fail_any, ci_low, ci_high, ...) and small
density-scaling tables (q, p_c[, ci]).  Rendering is read-only and
deterministic: identical input produces identical image bytes
(timestamp metadata is disabled).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

HARNESS_COLUMNS = (
    "family", "decoder", "boundary", "L", "ell", "q_surf", "q_shor", "w",
    "eta", "rounds", "p", "trials", "fail_z", "fail_x", "fail_any",
    "ci_low", "ci_high", "master_seed",
)

KINDS = ("crossing", "density-scaling", "rate-comparison")


class RenderError(Exception):
    pass


@dataclass
class PlotSpec:
    """What to draw and where to put it."""

    kind: str
    out: str
    measure: str = "any"  # which failure column: any | z | x
    logy: bool = False
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RenderError(f"unknown plot kind {self.kind!r}")
        if self.measure not in ("any", "z", "x"):
            raise RenderError(f"unknown measure {self.measure!r}")


def load_csv(path: str, required: tuple[str, ...]) -> dict[str, list[str]]:
    """Read a CSV into columns, insisting on the required header names."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise RenderError(f"{path}: empty CSV")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise RenderError(f"{path}: missing columns {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise RenderError(f"{path}: no data rows")
    return {c: [r[c] for r in rows] for c in reader.fieldnames}


def fit_through_origin(
    x: np.ndarray, y: np.ndarray, weights: np.ndarray, degree: int
) -> np.ndarray:
    """Weighted least squares for y = sum_k c_k x^k, k = 1..degree."""
    design = np.stack([x ** k for k in range(1, degree + 1)], axis=1)
    sw = np.sqrt(weights)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
    return coef


def _rate_columns(cols: dict[str, list[str]], measure: str):
    trials = np.array([float(v) for v in cols["trials"]])
    fail = np.array([float(v) for v in cols[f"fail_{measure}"]])
    rate = fail / trials
    lo = np.array([float(v) for v in cols["ci_low"]])
    hi = np.array([float(v) for v in cols["ci_high"]])
    return rate, lo, hi


def _weighted_line(p, rate, sigma):
    w = 1.0 / np.maximum(sigma, 1e-9) ** 2
    sw = w.sum()
    mx = (w * p).sum() / sw
    my = (w * rate).sum() / sw
    var = (w * (p - mx) ** 2).sum()
    if var == 0:
        return 0.0, my
    a = (w * (p - mx) * (rate - my)).sum() / var
    return a, my - a * mx


def _save(fig, spec: PlotSpec) -> None:
    if spec.title:
        fig.suptitle(spec.title)
    if spec.out.endswith(".svg"):
        metadata = {"Date": None}
    else:
        metadata = {"Software": "compassplots"}
    fig.savefig(spec.out, metadata=metadata)
    plt.close(fig)


def _by_size(cols, measure):
    sizes = sorted({int(v) for v in cols["L"]})
    L_col = np.array([int(v) for v in cols["L"]])
    p_col = np.array([float(v) for v in cols["p"]])
    rate, lo, hi = _rate_columns(cols, measure)
    out = {}
    for L in sizes:
        idx = np.nonzero(L_col == L)[0]
        order = idx[np.argsort(p_col[idx])]
        out[L] = (p_col[order], rate[order], lo[order], hi[order])
    return out


def render_crossing(csv_path: str, spec: PlotSpec) -> float | None:
    """p_fail vs p per lattice size with CI bands and a crossing marker.

    Returns the crossing estimate (None when the fitted curves of the
    two largest sizes do not intersect inside the scanned range).
    """
    cols = load_csv(csv_path, ("L", "p", "trials", "ci_low", "ci_high",
                               f"fail_{spec.measure}"))
    curves = _by_size(cols, spec.measure)
    if len(curves) < 2:
        raise RenderError("need >=2 sizes for a crossing plot")

    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    for L, (p, rate, lo, hi) in curves.items():
        ax.plot(p, rate, marker="o", ms=3.5, lw=1.0, label=f"L = {L}")
        ax.fill_between(p, lo, hi, alpha=0.25, lw=0)

    big = sorted(curves)[-2:]
    (p1, r1, lo1, hi1), (p2, r2, lo2, hi2) = curves[big[0]], curves[big[1]]
    a1, b1 = _weighted_line(p1, r1, (hi1 - lo1) / 2)
    a2, b2 = _weighted_line(p2, r2, (hi2 - lo2) / 2)
    crossing = None
    if a1 != a2:
        ps = (b1 - b2) / (a2 - a1)
        pmin = min(p1.min(), p2.min())
        pmax = max(p1.max(), p2.max())
        if pmin <= ps <= pmax:
            crossing = float(ps)
            ax.axvline(ps, color="k", ls="--", lw=1.0)
            ax.annotate(f"p* = {ps:.4f}", (ps, ax.get_ylim()[1]),
                        ha="left", va="top", fontsize=8,
                        xytext=(3, -3), textcoords="offset points")
    ax.set_xlabel("physical error rate p")
    ax.set_ylabel("logical failure rate")
    if spec.logy:
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, spec)
    return crossing


def render_density_scaling(csv_path: str, spec: PlotSpec) -> dict:
    """Scatter of p_c vs coloring density q with through-origin fits.

    Overlays the linear (c1 q) and quadratic (c1 q + c2 q^2) least
    squares fits, inverse-variance weighted when a ci column is
    present.  Returns the fit coefficients and residuals.
    """
    cols = load_csv(csv_path, ("q", "p_c"))
    q = np.array([float(v) for v in cols["q"]])
    pc = np.array([float(v) for v in cols["p_c"]])
    if len(q) < 3:
        raise RenderError("need >=3 points to fit density scaling")
    if "ci" in cols:
        ci = np.maximum(np.array([float(v) for v in cols["ci"]]), 1e-9)
        weights = 1.0 / ci ** 2
    else:
        ci = None
        weights = np.ones_like(q)

    lin = fit_through_origin(q, pc, weights, 1)
    quad = fit_through_origin(q, pc, weights, 2)
    grid = np.linspace(0.0, q.max(), 200)

    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    if ci is not None:
        ax.errorbar(q, pc, yerr=ci, fmt="o", ms=4, lw=1, capsize=2)
    else:
        ax.plot(q, pc, "o", ms=4)
    ax.plot(grid, lin[0] * grid, "-", lw=1,
            label=f"linear: {lin[0]:.4f} q")
    ax.plot(grid, quad[0] * grid + quad[1] * grid ** 2, "--", lw=1,
            label=f"quadratic: {quad[0]:.4f} q + {quad[1]:.4f} q²")
    ax.set_xlabel("density q")
    ax.set_ylabel("critical point p_c")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, spec)

    res_lin = float((weights * (pc - lin[0] * q) ** 2).sum())
    res_quad = float(
        (weights * (pc - quad[0] * q - quad[1] * q ** 2) ** 2).sum()
    )
    return {
        "linear": lin.tolist(),
        "quadratic": quad.tolist(),
        "residual_linear": res_lin,
        "residual_quadratic": res_quad,
    }


def render_rate_comparison(csv_path: str, spec: PlotSpec) -> None:
    """Failure rate vs p, one curve per (family, decoder) pair."""
    cols = load_csv(csv_path, ("family", "decoder", "p", "trials",
                               "ci_low", "ci_high", f"fail_{spec.measure}"))
    rate, lo, hi = _rate_columns(cols, spec.measure)
    p = np.array([float(v) for v in cols["p"]])
    labels = [f"{f}/{d}" for f, d in zip(cols["family"], cols["decoder"])]

    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    for label in sorted(set(labels)):
        idx = np.array([i for i, lb in enumerate(labels) if lb == label])
        order = idx[np.argsort(p[idx])]
        ax.plot(p[order], rate[order], marker="o", ms=3.5, lw=1.0,
                label=label)
        ax.fill_between(p[order], lo[order], hi[order], alpha=0.25, lw=0)
    ax.set_xlabel("physical error rate p")
    ax.set_ylabel("logical failure rate")
    if spec.logy:
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, spec)
