"""Render gqrc CSV datasets into the standard figure panels.

Each renderer is stateless: it reads the rows, draws one panel, and
writes a PNG or SVG.  Output is deterministic for fixed inputs (fixed
canvas size, seeded SVG hash salt, no timestamps).
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schemas import FIGURE_SCHEMAS, SchemaError

_NUMERIC = {
    "n_modes": int, "delay": int, "degree": int, "realizations": int,
    "reflectivity": float, "capacity_mean": float, "capacity_stderr": float,
    "capacity_sum": float, "total_ipc": float, "normalized_ipc": float,
    "snr_db_mean": float, "snr_db_stderr": float, "fitted_slope_db": float,
    "fitted_height_db": float,
}

DEGREE_COLORS = ["#4878cf", "#ee854a", "#6acc64", "#d65f5f", "#956cb4"]


def load_rows(fig_id: str, csv_paths) -> list[dict]:
    """Rows of one or more CSV files after schema validation."""
    if fig_id not in FIGURE_SCHEMAS:
        raise SchemaError(f"unknown figure id {fig_id!r}")
    expected = FIGURE_SCHEMAS[fig_id]
    rows: list[dict] = []
    for path in csv_paths:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            missing = [col for col in expected if col not in header]
            if missing:
                raise SchemaError(
                    f"{path}: missing column(s) {', '.join(missing)} "
                    f"required by {fig_id}"
                )
            for raw in reader:
                row = {}
                for key in expected:
                    value = raw[key]
                    if key == "m_pulses":
                        row[key] = int(value) if value else None
                    else:
                        row[key] = _NUMERIC.get(key, str)(value)
                rows.append(row)
    if not rows:
        raise SchemaError(f"no data rows found for {fig_id}")
    return rows


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=150)
    return fig, ax


def _group_label(row) -> str:
    m_part = "ideal" if row["m_pulses"] is None else f"M={row['m_pulses']:g}"
    return f"N={row['n_modes']}, R={row['reflectivity']:g}, {m_part}"


def render_capacity_by_delay(rows, out_path):
    """Linear capacity vs delay, one line per (N, R, M) combination."""
    fig, ax = _new_axes()
    groups: dict[str, list[dict]] = {}
    for row in rows:
        groups.setdefault(_group_label(row), []).append(row)
    for label, grp in groups.items():
        grp = sorted(grp, key=lambda r: r["delay"])
        delay = [r["delay"] for r in grp]
        mean = [r["capacity_mean"] for r in grp]
        err = [r["capacity_stderr"] for r in grp]
        ax.errorbar(delay, mean, yerr=err, marker="o", markersize=3,
                    linewidth=1.2, capsize=2, label=label)
    ax.set_xlabel("delay $d$")
    ax.set_ylabel("linear capacity")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_ipc_bars(rows, out_path):
    """Stacked degree contributions vs N plus the normalized IPC line.

    The first scenario (sorted) provides the stacked bars and the
    normalized-IPC curve on the right axis; totals of any further
    scenarios are overlaid as star markers.
    """
    fig, ax = _new_axes()
    scenarios = sorted({r["scenario"] for r in rows})
    main, extras = scenarios[0], scenarios[1:]
    main_rows = [r for r in rows if r["scenario"] == main]
    n_values = sorted({r["n_modes"] for r in main_rows})
    degrees = sorted({r["degree"] for r in main_rows})
    bottom = np.zeros(len(n_values))
    for i, degree in enumerate(degrees):
        heights = []
        for n in n_values:
            match = [r for r in main_rows
                     if r["n_modes"] == n and r["degree"] == degree]
            heights.append(match[0]["capacity_sum"] if match else 0.0)
        ax.bar(range(len(n_values)), heights, bottom=bottom, width=0.6,
               color=DEGREE_COLORS[i % len(DEGREE_COLORS)],
               label=f"degree {degree}")
        bottom += np.array(heights)
    for scenario in extras:
        totals = []
        for n in n_values:
            match = [r for r in rows
                     if r["scenario"] == scenario and r["n_modes"] == n]
            totals.append(match[0]["total_ipc"] if match else np.nan)
        ax.plot(range(len(n_values)), totals, "k*", markersize=11,
                label=f"total ({scenario})")
    ax.set_xticks(range(len(n_values)))
    ax.set_xticklabels([str(n) for n in n_values])
    ax.set_xlabel("number of modes $N$")
    ax.set_ylabel(f"total capacity ({main})")
    ax2 = ax.twinx()
    normalized = []
    for n in n_values:
        match = [r for r in main_rows if r["n_modes"] == n]
        normalized.append(match[0]["normalized_ipc"])
    ax2.plot(range(len(n_values)), normalized, "b--o", markersize=4, linewidth=1.2)
    ax2.set_ylabel("normalized IPC", color="b")
    ax2.set_ylim(0, 1.1)
    ax.legend(fontsize=8, loc="upper left")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_scenario_curves(rows, out_path):
    """Normalized IPC vs N, one line per resource-scaling scenario."""
    fig, ax = _new_axes()
    for scenario in sorted({r["scenario"] for r in rows}):
        grp = {}
        for r in rows:
            if r["scenario"] == scenario:
                grp[r["n_modes"]] = r["normalized_ipc"]
        n_values = sorted(grp)
        ax.plot(n_values, [grp[n] for n in n_values], marker="o",
                linewidth=1.4, label=scenario)
    ax.set_xlabel("number of modes $N$")
    ax.set_ylabel("normalized IPC")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_snr_by_delay(rows, out_path):
    """SNR in dB vs delay with the fitted decay lines and the 0 dB floor."""
    fig, ax = _new_axes()
    groups: dict[str, list[dict]] = {}
    for row in rows:
        groups.setdefault(_group_label(row), []).append(row)
    for label, grp in groups.items():
        grp = sorted(grp, key=lambda r: r["delay"])
        delay = np.array([r["delay"] for r in grp], dtype=float)
        mean = [r["snr_db_mean"] for r in grp]
        err = [r["snr_db_stderr"] for r in grp]
        line = ax.errorbar(delay, mean, yerr=err, marker="o", markersize=3.5,
                           linewidth=1.2, capsize=2, label=label)
        slope = grp[0]["fitted_slope_db"]
        height = grp[0]["fitted_height_db"]
        ax.plot(delay, height + slope * (delay - 1.0), "--", linewidth=0.9,
                color=line.lines[0].get_color(), alpha=0.7)
    ax.axhline(0.0, color="k", linewidth=0.8)
    ax.set_xlabel("delay $d$")
    ax.set_ylabel("SNR (dB)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_height_vs_modes(rows, out_path):
    """Fitted delay-1 SNR height vs N, one line per reflectivity."""
    fig, ax = _new_axes()
    reflectivities = sorted({r["reflectivity"] for r in rows})
    for reflectivity in reflectivities:
        heights = {}
        for r in rows:
            if r["reflectivity"] == reflectivity and r["delay"] == min(
                row["delay"] for row in rows
            ):
                heights[r["n_modes"]] = r["fitted_height_db"]
        n_values = sorted(heights)
        ax.plot(n_values, [heights[n] for n in n_values], marker="s",
                linewidth=1.4, label=f"R={reflectivity:g}")
    ax.set_xlabel("number of modes $N$")
    ax.set_ylabel("SNR of first delayed term (dB)")
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


RENDERERS = {
    "fig2a": render_capacity_by_delay,
    "fig3a": render_capacity_by_delay,
    "fig2b": render_ipc_bars,
    "ipc": render_ipc_bars,
    "fig4a": render_ipc_bars,
    "fig4b": render_scenario_curves,
    "fig3b": render_snr_by_delay,
    "fig3c": render_snr_by_delay,
    "snr": render_snr_by_delay,
    "fig5": render_height_vs_modes,
}


def render(fig_id: str, csv_paths, out_path: str | Path) -> Path:
    """Validate the CSVs and draw the requested figure."""
    rows = load_rows(fig_id, csv_paths)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    plt.rcParams["svg.hashsalt"] = fig_id
    RENDERERS[fig_id](rows, out_path)
    return out_path
