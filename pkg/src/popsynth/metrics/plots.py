"""Static comparison plots (SVG) with their point data (CSV)."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..errors import OutputError, ValidationError  # noqa: E402
from .compare import DEFAULT_BINS, source_columns, synthetic_columns  # noqa: E402

PLOT_NAMES = (
    "age_histogram",
    "age_height_scatter",
    "age_weight_scatter",
    "geo_households",
    "geo_schools",
    "geo_workplaces",
)

plt.rcParams["svg.hashsalt"] = "popsynth"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _panels(source):
    n = 2 if source is not None else 1
    fig, axes = plt.subplots(1, n, figsize=(5 * n, 4), sharey=True, squeeze=False)
    return fig, list(axes[0])


def _draw_boundary(ax, boundary):
    if boundary is None:
        return
    for ring in boundary.rings():
        lat = [p[0] for p in ring] + [ring[0][0]]
        lon = [p[1] for p in ring] + [ring[0][1]]
        ax.plot(lon, lat, color="black", linewidth=0.8)


def emit_plots(source, synthetic, out_dir, boundary=None):
    """Write the six comparison figures and their CSV data into ``out_dir``.

    ``source`` may be None, in which case the histogram and scatter figures
    show the synthetic population alone.  Returns the written paths.
    """
    persons = synthetic.persons
    if not persons:
        raise ValidationError("synthetic population is empty")
    if source is not None and not source.households:
        raise ValidationError("source sample is empty")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc.strerror}") from exc

    syn = synthetic_columns(persons)
    groups = [("synthetic", syn)]
    if source is not None:
        groups.insert(0, ("source", source_columns(source)))
    written = []
    try:
        # age histograms, source left
        edges = DEFAULT_BINS["age"]
        fig, axes = _panels(source)
        rows = []
        for ax, (label, cols) in zip(axes, groups):
            counts, _ = np.histogram(np.clip(cols["age"], edges[0], edges[-1]), bins=edges)
            ax.bar(edges[:-1], counts, width=np.diff(edges), align="edge", edgecolor="white")
            ax.set_title(f"{label} (n={len(cols['age'])})")
            ax.set_xlabel("age")
            rows += [(label, edges[i], edges[i + 1], int(c)) for i, c in enumerate(counts)]
        axes[0].set_ylabel("persons")
        written += _finish(fig, out, "age_histogram", ("population", "bin_lo", "bin_hi", "count"), rows)

        for col in ("height", "weight"):
            fig, axes = _panels(source)
            rows = []
            for ax, (label, cols) in zip(axes, groups):
                ax.scatter(cols["age"], cols[col], s=3, alpha=0.5)
                ax.set_title(label)
                ax.set_xlabel("age")
                rows += [(label, a, v) for a, v in zip(cols["age"].tolist(), cols[col].tolist())]
            axes[0].set_ylabel(col)
            written += _finish(fig, out, f"age_{col}_scatter", ("population", "age", col), rows)

        homes = {}
        for hh in synthetic.households:
            if not (math.isnan(hh.home_lat) or math.isnan(hh.home_lon)):
                homes[hh.hhid] = (hh.home_lat, hh.home_lon)
        schools, works = {}, {}
        for p in persons:
            if p.school_id:
                schools[p.school_id] = (p.school_lat, p.school_lon)
            if p.workplace_id:
                works[p.workplace_id] = (p.w_lat, p.w_lon)
        for name, pts in (("geo_households", homes), ("geo_schools", schools), ("geo_workplaces", works)):
            fig, ax = plt.subplots(figsize=(5, 5))
            _draw_boundary(ax, boundary)
            ids = sorted(pts)
            ax.scatter([pts[i][1] for i in ids], [pts[i][0] for i in ids], s=3)
            ax.set_title(f"{name[4:]} (n={len(ids)})")
            ax.set_xlabel("longitude")
            ax.set_ylabel("latitude")
            ax.set_aspect("equal", adjustable="datalim")
            written += _finish(fig, out, name, ("id", "lat", "lon"),
                               [(i, pts[i][0], pts[i][1]) for i in ids])
    except OSError as exc:
        raise OutputError(f"cannot write plots to {out}: {exc}") from exc
    return written


def _finish(fig, out, name, header, rows):
    svg, data = out / f"{name}.svg", out / f"{name}.csv"
    _save(fig, svg)
    _write_csv(data, header, rows)
    return [svg, data]
