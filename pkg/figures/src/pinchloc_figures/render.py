"""Render experiment tables into figures.

Consumes only the documented experiment interface: a CSV whose header names
its columns with units, plus a JSON sidecar naming the figure kind and the
schema version. Analytic quantities are drawn as lines and Monte Carlo
quantities as markers; axes are labelled from the column names.

Rendering is a pure function of (CSV bytes, sidecar, style): with a fixed
toolchain the emitted PNG is byte-identical across re-renders.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["FigureSpec", "ColumnMismatchError", "SUPPORTED_SCHEMAS", "render"]

SUPPORTED_SCHEMAS = (1,)

# Required columns per figure kind; mirrors the emitting side's documented
# schema (deliberately duplicated: this package reads only the interface).
REQUIRED_COLUMNS: dict[str, list[str]] = {
    "localizability": ["tau_db", "K", "analytic_prob", "mc_prob", "mc_halfwidth"],
    "mse_vs_k": ["K", "mse_m2", "crlb_m2"],
    "crlb_vs_sinr": ["sinr_db", "crlb_exact_m2", "crlb_approx_m2", "crlb_ula_m2"],
    "crlb_cdf": ["s_m2", "analytic_cdf", "empirical_cdf"],
}

AXIS_LABELS = {
    "tau_db": "SINR threshold (dB)",
    "K": "waveguides used, K",
    "sinr_db": "expected SINR (dB)",
    "s_m2": "bound on squared position error (m$^2$)",
}

_SERIES_COLORS = ("#0072b2", "#d55e00", "#009e73", "#cc79a7", "#56b4e9")

DEFAULT_STYLE = {
    "analytic": {"linestyle": "-", "linewidth": 1.6},
    "mc": {"marker": "o", "markersize": 4.5, "linestyle": "none"},
    "dpi": 150,
}


class ColumnMismatchError(ValueError):
    """CSV columns do not match the figure's documented schema."""

    def __init__(self, figure: str, missing: list[str], unexpected: list[str]):
        self.missing = missing
        self.unexpected = unexpected
        super().__init__(
            f"column mismatch for figure {figure!r}: "
            f"missing {missing or 'none'}, unexpected {unexpected or 'none'}"
        )


@dataclass(frozen=True)
class FigureSpec:
    """One rendering job: data table, its sidecar, style overrides, output."""

    input_csv: str | Path
    sidecar: str | Path
    output: str | Path
    style: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for attr in ("input_csv", "sidecar"):
            if not Path(getattr(self, attr)).exists():
                raise FileNotFoundError(f"{attr} not found: {getattr(self, attr)}")


def _load_sidecar(path: Path) -> dict:
    with open(path) as fh:
        meta = json.load(fh)
    version = meta.get("schema_version")
    if version not in SUPPORTED_SCHEMAS:
        raise ValueError(
            f"unsupported sidecar schema_version {version!r} "
            f"(supported: {SUPPORTED_SCHEMAS})"
        )
    figure = meta.get("figure")
    if figure not in REQUIRED_COLUMNS:
        raise ValueError(f"unknown figure kind {figure!r} in sidecar")
    return meta


def _load_table(path: Path, figure: str) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty: no header row") from None
        rows = [row for row in reader if row]
    required = REQUIRED_COLUMNS[figure]
    missing = [c for c in required if c not in header]
    unexpected = [c for c in header if c not in required]
    if missing or unexpected:
        raise ColumnMismatchError(figure, missing, unexpected)
    if not rows:
        raise ValueError(f"{path} holds no data rows; refusing to render")
    data = np.array(rows, dtype=float)
    return {name: data[:, header.index(name)] for name in required}


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the written image path."""
    meta = _load_sidecar(Path(spec.sidecar))
    figure = meta["figure"]
    table = _load_table(Path(spec.input_csv), figure)
    style = {**DEFAULT_STYLE, **spec.style}

    fig, ax = plt.subplots(figsize=(5.2, 3.6), constrained_layout=True)
    plotter = {
        "localizability": _plot_localizability,
        "mse_vs_k": _plot_mse_vs_k,
        "crlb_vs_sinr": _plot_crlb_vs_sinr,
        "crlb_cdf": _plot_crlb_cdf,
    }[figure]
    plotter(ax, table, style)
    ax.grid(True, alpha=0.3)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=style["dpi"], metadata={"Software": "pinchloc-figures"})
    plt.close(fig)
    return out


def _plot_localizability(ax, t, style):
    ks = np.unique(t["K"]).astype(int)
    for color, k in zip(_SERIES_COLORS, ks):
        sel = t["K"] == k
        ax.plot(t["tau_db"][sel], t["analytic_prob"][sel], color=color,
                label=f"closed form, K={k}", **style["analytic"])
        ax.errorbar(t["tau_db"][sel], t["mc_prob"][sel],
                    yerr=t["mc_halfwidth"][sel], color=color,
                    label=f"simulation, K={k}", **style["mc"])
    ax.set_xlabel(AXIS_LABELS["tau_db"])
    ax.set_ylabel("detection probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=7)


def _plot_mse_vs_k(ax, t, style):
    ax.plot(t["K"], t["crlb_m2"], color=_SERIES_COLORS[0], label="mean CRLB",
            **style["analytic"])
    ax.plot(t["K"], t["mse_m2"], color=_SERIES_COLORS[1], label="MLE MSE",
            **style["mc"])
    ax.set_xlabel(AXIS_LABELS["K"])
    ax.set_ylabel("squared position error (m$^2$)")
    ax.set_yscale("log")
    ax.legend(fontsize=8)


def _plot_crlb_vs_sinr(ax, t, style):
    series = [("crlb_exact_m2", "exact bound"),
              ("crlb_approx_m2", "single-distance approximation"),
              ("crlb_ula_m2", "fixed linear array")]
    for color, (col, label) in zip(_SERIES_COLORS, series):
        ax.plot(t["sinr_db"], t[col], color=color, label=label,
                **style["analytic"])
    ax.set_xlabel(AXIS_LABELS["sinr_db"])
    ax.set_ylabel("position bound (m$^2$)")
    ax.set_yscale("log")
    ax.legend(fontsize=8)


def _plot_crlb_cdf(ax, t, style):
    ax.plot(t["s_m2"], t["analytic_cdf"], color=_SERIES_COLORS[0],
            label="closed form", **style["analytic"])
    ax.plot(t["s_m2"], t["empirical_cdf"], color=_SERIES_COLORS[1],
            label="simulation", **style["mc"])
    ax.set_xlabel(AXIS_LABELS["s_m2"])
    ax.set_ylabel("cumulative probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
