"""Report writers: delimited CSV output (17 significant digits, stable
ordering), matplotlib figures rendered next to each CSV, and standalone
gnuplot-compatible plot scripts."""

from __future__ import annotations

import csv
import json
import os
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .counterexample import GrowthFit, SideEvaluation
from .estimates import EstimateSample
from .evolution import ConservedDiagnostics
from .norms import NormReport

FMT = "%.17g"


def fnum(x: float) -> str:
    return FMT % float(x)


def canonical_config(config: dict) -> str:
    """Sorted-key JSON form of a config, used for provenance stamping."""
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def _open_with_stamp(path, stamp: Optional[str]):
    fh = open(path, "w", newline="")
    if stamp:
        fh.write(f"# config: {stamp}\n")
    return fh


def write_diagnostics_csv(
    path, rows: Sequence[ConservedDiagnostics], stamp: Optional[str] = None
) -> None:
    with _open_with_stamp(path, stamp) as fh:
        w = csv.writer(fh)
        w.writerow(["t", "l2", "hamiltonian", "energy_norm"])
        for r in rows:
            w.writerow([fnum(r.t), fnum(r.l2), fnum(r.hamiltonian), fnum(r.energy_norm)])


def write_norm_report_csv(
    path, reports: Sequence[NormReport], stamp: Optional[str] = None
) -> None:
    with _open_with_stamp(path, stamp) as fh:
        w = csv.writer(fh)
        w.writerow(["space", "param_s", "param_r", "param_b", "axis", "shell", "contribution", "total"])
        for rep in reports:
            s = rep.params.get("s", "")
            r_ = rep.params.get("r", "")
            b = rep.params.get("b", "")
            for axis, shell, contrib in rep.shells:
                w.writerow(
                    [rep.space_id, s, r_, b, axis, shell, fnum(contrib), fnum(rep.total)]
                )


def write_estimates_csv(
    path,
    samples: Sequence[EstimateSample],
    summaries: Optional[Dict[str, Dict[str, float]]] = None,
    stamp: Optional[str] = None,
) -> None:
    """Rows `estimate_id,seed,lhs,rhs,ratio` plus one summary row per
    estimate carrying max/median ratio."""
    with _open_with_stamp(path, stamp) as fh:
        w = csv.writer(fh)
        w.writerow(["estimate_id", "seed", "lhs", "rhs", "ratio"])
        for s in samples:
            w.writerow([s.estimate_id, s.seed, fnum(s.lhs), fnum(s.rhs), fnum(s.ratio)])
        if summaries:
            for est_id in sorted(summaries):
                s = summaries[est_id]
                w.writerow(
                    [f"{est_id}:summary", "max/median", fnum(s["max_ratio"]),
                     fnum(s["median_ratio"]), ""]
                )


def write_sweep_csv(path, evals: Sequence[SideEvaluation], stamp: Optional[str] = None) -> None:
    with _open_with_stamp(path, stamp) as fh:
        w = csv.writer(fh)
        w.writerow(["N", "eps", "lhs", "x_u", "x_v", "y_u", "y_v", "ratio_indicator"])
        for e in evals:
            w.writerow(
                [fnum(e.N), fnum(e.eps), fnum(e.lhs), fnum(e.x_u), fnum(e.x_v),
                 fnum(e.y_u), fnum(e.y_v), fnum(e.ratio_indicator)]
            )


def write_fit_csv(path, fits: Sequence[GrowthFit], stamp: Optional[str] = None) -> None:
    with _open_with_stamp(path, stamp) as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "slope", "intercept", "residual"])
        for f in fits:
            w.writerow([fnum(f.eps), fnum(f.slope), fnum(f.intercept), fnum(f.residual)])


# ---------------------------------------------------------------------------
# figures


def render_diagnostics_figure(csv_path, png_path) -> None:
    t, l2, ham, en = _read_columns(csv_path, 4)
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    axes[0].plot(t, l2)
    axes[0].set_ylabel("L2 norm")
    axes[1].plot(t, ham)
    axes[1].set_ylabel("Hamiltonian")
    axes[2].plot(t, en)
    axes[2].set_ylabel("energy norm")
    axes[2].set_xlabel("t")
    fig.suptitle("conserved quantities")
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)


def render_estimates_figure(csv_path, png_path) -> None:
    rows = _read_rows(csv_path)
    by_id: Dict[str, List[tuple]] = {}
    for r in rows:
        if r[0].endswith(":summary"):
            continue
        by_id.setdefault(r[0], []).append((int(r[1]), float(r[4])))
    n = max(len(by_id), 1)
    fig, ax = plt.subplots(figsize=(8, 5))
    for i, (est_id, pts) in enumerate(sorted(by_id.items())):
        seeds = [p[0] for p in pts]
        ratios = [p[1] for p in pts]
        ax.scatter(seeds, ratios, s=12, label=est_id)
    ax.set_xlabel("seed")
    ax.set_ylabel("lhs/rhs ratio")
    ax.set_yscale("log")
    if by_id:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)


def render_sweep_figure(sweep_csv, fit_csv, png_path) -> None:
    rows = _read_rows(sweep_csv)
    fits = {float(r[0]): (float(r[1]), float(r[2])) for r in _read_rows(fit_csv)}
    fig, ax = plt.subplots(figsize=(7, 5))
    by_eps: Dict[float, List[tuple]] = {}
    for r in rows:
        by_eps.setdefault(float(r[1]), []).append((float(r[0]), float(r[7])))
    for eps, pts in sorted(by_eps.items()):
        N = np.array([p[0] for p in pts])
        ratio = np.array([p[1] for p in pts])
        (line,) = ax.loglog(N, ratio, "o", label=f"eps={eps:g}")
        if eps in fits:
            sl, ic = fits[eps]
            ax.loglog(N, np.exp(ic) * N**sl, "--", color=line.get_color(),
                      label=f"fit slope {sl:.3f}")
    ax.set_xlabel("N")
    ax.set_ylabel("ratio indicator")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)


def render_norms_figure(csv_path, png_path) -> None:
    rows = _read_rows(csv_path)
    fig, ax = plt.subplots(figsize=(8, 5))
    labels = [f"{r[0]}:{r[4]}:{r[5]}" for r in rows]
    vals = [float(r[6]) for r in rows]
    ax.bar(range(len(vals)), vals)
    ax.set_xticks(range(len(vals)))
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_ylabel("shell contribution")
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)


def _read_rows(csv_path) -> List[List[str]]:
    with open(csv_path) as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    return rows[1:]  # drop header


def _read_columns(csv_path, ncols: int):
    rows = _read_rows(csv_path)
    cols = [[] for _ in range(ncols)]
    for r in rows:
        for i in range(ncols):
            cols[i].append(float(r[i]))
    return [np.asarray(c) for c in cols]


# ---------------------------------------------------------------------------
# gnuplot script emission


def emit_plot_script(csv_path, out_path=None) -> str:
    """Write a standalone gnuplot script for a report CSV, dispatching on
    the header schema.  An empty report produces a no-op script."""
    csv_path = os.fspath(csv_path)
    out_path = out_path or csv_path.rsplit(".", 1)[0] + ".gp"
    with open(csv_path) as fh:
        header = ""
        for line in fh:
            if not line.startswith("#"):
                header = line.strip()
                break
        has_data = any(not l.startswith("#") and l.strip() for l in fh)
    base = os.path.basename(csv_path)
    lines = [
        "# gnuplot script generated by kpflow",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        f"set title '{base}'",
    ]
    if not has_data:
        lines.append("# empty report: nothing to plot")
        lines.append("exit")
    elif header.startswith("t,l2,"):
        lines += [
            "set xlabel 't'",
            "set logscale y",
            f"plot '{base}' skip 1 using 1:2 with lines title 'L2', \\",
            f"     '{base}' skip 1 using 1:(abs($3)) with lines title '|H|', \\",
            f"     '{base}' skip 1 using 1:4 with lines title 'energy'",
        ]
    elif header.startswith("estimate_id,seed,"):
        lines += [
            "set xlabel 'seed'",
            "set ylabel 'ratio'",
            "set logscale y",
            f"plot '{base}' skip 1 using 2:5 with points title 'lhs/rhs'",
        ]
    elif header.startswith("N,eps,"):
        lines += [
            "set logscale xy",
            "set xlabel 'N'",
            "set ylabel 'ratio indicator'",
            f"plot '{base}' skip 1 using 1:8 with points title 'indicator'",
        ]
    elif header.startswith("eps,slope,"):
        lines += [
            "set xlabel 'eps'",
            "set ylabel 'slope'",
            f"plot '{base}' skip 1 using 1:2 with linespoints title 'fitted slope'",
        ]
    elif header.startswith("space,"):
        lines += [
            "set style data histogram",
            "set ylabel 'shell contribution'",
            f"plot '{base}' skip 1 using 7 title 'contribution'",
        ]
    else:
        raise ValueError(f"unknown report schema: {header!r}")
    with open(out_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return out_path
