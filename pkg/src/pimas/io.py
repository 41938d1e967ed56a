"""Trajectory CSV output, run summaries, and static SVG plots.

CSV columns are ``t``, then per-agent position, control and expected-target
columns, then (optionally) the assignment marginals.  For 1-d problems the
columns are ``x_1 .. x_n``, ``u_1 ..``, ``mubar_1 ..`` and ``p_<agent>_<target>``;
higher-dimensional problems append a coordinate suffix (``x_2_1`` is agent 2,
coordinate 1).  Agents and targets are numbered from 1 in all headers.
Floats are rendered with shortest round-trip precision, so a written file
re-reads bit-identically.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .controller import Trajectory
from .model import Scenario

ASSIGN_RADIUS = 0.15

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#aec7e8", "#ff9896",
)


def _fmt(v: float) -> str:
    return repr(float(v))


def _agent_columns(prefix: str, n: int, k: int) -> list[str]:
    if k == 1:
        return [f"{prefix}_{a + 1}" for a in range(n)]
    return [f"{prefix}_{a + 1}_{d + 1}" for a in range(n) for d in range(k)]


def trajectory_header(n: int, k: int, m: int, record_marginals: bool) -> list[str]:
    cols = ["t"]
    cols += _agent_columns("x", n, k)
    cols += _agent_columns("u", n, k)
    cols += _agent_columns("mubar", n, k)
    if record_marginals:
        cols += [f"p_{a + 1}_{s + 1}" for a in range(n) for s in range(m)]
    return cols


def trajectory_to_csv(traj: Trajectory, path: str | Path, record_marginals: bool = True) -> None:
    n, k, m = traj.n, traj.k, traj.m
    lines = [",".join(trajectory_header(n, k, m, record_marginals))]
    for j in range(traj.num_records):
        row = [_fmt(traj.times[j])]
        row += [_fmt(v) for v in traj.states[j].ravel()]
        row += [_fmt(v) for v in traj.controls[j].ravel()]
        row += [_fmt(v) for v in traj.expected_targets[j].ravel()]
        if record_marginals:
            row += [_fmt(v) for v in traj.marginals[j].ravel()]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def trajectory_from_csv(path: str | Path) -> dict[str, np.ndarray | None]:
    """Re-read a trajectory CSV into arrays keyed like Trajectory fields."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    x_cols = [c for c in header if c.startswith("x_")]
    p_cols = [c for c in header if c.startswith("p_")]
    parts = x_cols[0].split("_")
    k = 1 if len(parts) == 2 else max(int(c.split("_")[2]) for c in x_cols)
    n = len(x_cols) // k
    rows = data.shape[0]
    out: dict[str, np.ndarray | None] = {"times": data[:, 0]}
    at = 1
    for name in ("states", "controls", "expected_targets"):
        out[name] = data[:, at : at + n * k].reshape(rows, n, k)
        at += n * k
    if p_cols:
        m = len(p_cols) // n
        out["marginals"] = data[:, at : at + n * m].reshape(rows, n, m)
    else:
        out["marginals"] = None
    return out


def assign_to_targets(final_positions: np.ndarray, targets: np.ndarray,
                      radius: float = ASSIGN_RADIUS) -> np.ndarray:
    """Nearest-target label (1-based) per agent, 0 when outside ``radius``."""
    d = np.sqrt(np.sum((final_positions[:, None, :] - targets[None, :, :]) ** 2, axis=2))
    nearest = np.argmin(d, axis=1)
    labels = nearest + 1
    labels[d[np.arange(len(labels)), nearest] > radius] = 0
    return labels


def summarize_run(traj: Trajectory, scenario: Scenario, radius: float = ASSIGN_RADIUS) -> dict:
    """Per-run summary: end positions, assignment outcome, edge statistics.

    Relation edges are classified by the end assignment of their endpoints:
    ``within`` when both agents reached the same target, ``between`` when
    both reached different targets; edges touching an unassigned agent are
    left out of both counts.
    """
    end = traj.states[-1]
    labels = assign_to_targets(end, scenario.targets.mu, radius)
    counts = np.bincount(labels[labels > 0] - 1, minlength=scenario.m)
    row = {
        "seed": traj.seed,
        "assignment": labels,
        "counts": counts,
        "all_assigned": bool(np.all(labels > 0)),
        "end_positions": end,
    }
    if scenario.relations is not None:
        within_pos = within_neg = between_pos = between_neg = 0
        for a, b, c in scenario.relations.edges:
            la, lb = labels[a], labels[b]
            if la == 0 or lb == 0:
                continue
            if la == lb:
                within_pos, within_neg = within_pos + (c > 0), within_neg + (c < 0)
            else:
                between_pos, between_neg = between_pos + (c > 0), between_neg + (c < 0)
        row["edge_stats"] = {
            "within_pos": int(within_pos), "within_neg": int(within_neg),
            "between_pos": int(between_pos), "between_neg": int(between_neg),
        }
    return row


def summary_header(n: int, k: int, m: int, has_relations: bool) -> list[str]:
    cols = ["seed"]
    cols += [f"s_{a + 1}" for a in range(n)]
    cols += [f"count_{s + 1}" for s in range(m)]
    cols.append("all_assigned")
    cols += _agent_columns("x_end", n, k)
    if has_relations:
        cols += ["within_pos", "within_neg", "between_pos", "between_neg"]
    return cols


def write_summary_csv(rows: list[dict], path: str | Path, scenario: Scenario) -> None:
    has_relations = scenario.relations is not None
    lines = [",".join(summary_header(scenario.n, scenario.k, scenario.m, has_relations))]
    for row in sorted(rows, key=lambda r: r["seed"]):
        cells = [str(row["seed"])]
        cells += [str(int(s)) for s in row["assignment"]]
        cells += [str(int(c)) for c in row["counts"]]
        cells.append("1" if row["all_assigned"] else "0")
        cells += [_fmt(v) for v in row["end_positions"].ravel()]
        if has_relations:
            es = row["edge_stats"]
            cells += [str(es["within_pos"]), str(es["within_neg"]),
                      str(es["between_pos"]), str(es["between_neg"])]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def _panel(svg: list[str], x0: float, series: np.ndarray, times: np.ndarray,
           y_lo: float, y_hi: float, targets: np.ndarray, title: str,
           width: float, height: float) -> None:
    t_lo, t_hi = float(times[0]), float(times[-1])
    t_span = max(t_hi - t_lo, 1e-12)
    y_span = max(y_hi - y_lo, 1e-12)

    def px(t):
        return x0 + (t - t_lo) / t_span * width

    def py(y):
        return 20.0 + (y_hi - y) / y_span * height

    svg.append(
        f'<rect x="{x0:.1f}" y="20" width="{width:.1f}" height="{height:.1f}" '
        f'fill="white" stroke="black" stroke-width="1"/>'
    )
    svg.append(
        f'<text x="{x0 + width / 2:.1f}" y="14" text-anchor="middle" '
        f'font-size="13" font-family="sans-serif">{title}</text>'
    )
    for mu in targets:
        y = py(float(mu))
        svg.append(
            f'<line x1="{x0:.1f}" y1="{y:.2f}" x2="{x0 + width:.1f}" y2="{y:.2f}" '
            f'stroke="#cccccc" stroke-width="0.8" stroke-dasharray="4 3"/>'
        )
        svg.append(
            f'<text x="{x0 - 4:.1f}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-size="10" font-family="sans-serif">{float(mu):g}</text>'
        )
    for frac in (0.0, 0.5, 1.0):
        t = t_lo + frac * t_span
        svg.append(
            f'<text x="{px(t):.1f}" y="{20 + height + 14:.1f}" text-anchor="middle" '
            f'font-size="10" font-family="sans-serif">t={t:g}</text>'
        )
    for a in range(series.shape[1]):
        color = _PALETTE[a % len(_PALETTE)]
        pts = " ".join(f"{px(t):.2f},{py(v):.2f}" for t, v in zip(times, series[:, a]))
        svg.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>'
        )


def trajectory_svg(traj: Trajectory, scenario: Scenario) -> str:
    """Two-panel plot: agent positions over time, expected targets over time.

    Plots the first coordinate when k > 1.
    """
    panel_w, panel_h, gap, margin = 380.0, 300.0, 60.0, 40.0
    xs = traj.states[:, :, 0]
    mb = traj.expected_targets[:, :, 0]
    targets = scenario.targets.mu[:, 0]
    lo = min(float(xs.min()), float(mb.min()), float(targets.min()))
    hi = max(float(xs.max()), float(mb.max()), float(targets.max()))
    pad = 0.08 * max(hi - lo, 1e-9)
    lo, hi = lo - pad, hi + pad
    total_w = 2 * panel_w + gap + 2 * margin
    total_h = panel_h + 60.0
    svg = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w:.0f}" '
        f'height="{total_h:.0f}" viewBox="0 0 {total_w:.0f} {total_h:.0f}">'
    ]
    _panel(svg, margin, xs, traj.times, lo, hi, targets,
           "(a) agent positions x(t)", panel_w, panel_h)
    _panel(svg, margin + panel_w + gap, mb, traj.times, lo, hi, targets,
           "(b) expected targets (t)", panel_w, panel_h)
    svg.append("</svg>")
    return "\n".join(svg) + "\n"


def write_trajectory_svg(traj: Trajectory, scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(trajectory_svg(traj, scenario))
