"""Standalone SVG charts with their source CSV embedded as an XML comment.

matplotlib (Agg backend) is imported lazily so the library itself carries no
display dependency; install the ``charts`` extra to enable these helpers.
"""

from __future__ import annotations

import math

from .errors import ParameterError
from .lab import CollisionEstimate, ConvergencePoint, collision_csv, convergence_csv


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - environment dependent
        raise ParameterError(
            "chart emission needs matplotlib; install the 'charts' extra"
        ) from exc
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    return plt


def _embed_data(path, csv_text: str) -> None:
    with open(path, "r", encoding="utf-8") as fh:
        svg = fh.read()
    safe = csv_text.replace("--", "- -")
    marker = "</svg>"
    svg = svg.replace(marker, f"<!-- embedded-data\n{safe}-->\n{marker}", 1)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)


def collision_chart(path, curves: list[tuple[str, list[CollisionEstimate]]],
                    title: str = "collision probability") -> None:
    """Plot p-hat vs R (with Wilson bands) for one or more labelled curves."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, ests in curves:
        rs = [e.R for e in ests]
        ax.plot(rs, [e.p_hat for e in ests], marker="o", markersize=3, label=label)
        ax.fill_between(rs, [e.ci_low for e in ests], [e.ci_high for e in ests],
                        alpha=0.2)
    ax.set_xlabel("distance R")
    ax.set_ylabel("collision probability")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    blob = "".join(f"# {label}\n{collision_csv(ests)}" for label, ests in curves)
    _embed_data(path, blob)


def convergence_chart(path, points: list[ConvergencePoint],
                      ref_constants: tuple[float, ...] = (),
                      title: str = "convergence of ln(1/p)") -> None:
    """Plot the residual ln(1/p-hat) - leading term vs d, with C/ln(d) guides."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ds = [p.d for p in points]
    ax.plot(ds, [p.residual for p in points], marker="o", label="residual")
    for c in ref_constants:
        ax.plot(ds, [c / math.log(d) for d in ds], linestyle="--",
                label=f"{c:g}/ln(d)")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("dimension d")
    ax.set_ylabel("ln(1/p) - leading term")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    _embed_data(path, convergence_csv(points))
