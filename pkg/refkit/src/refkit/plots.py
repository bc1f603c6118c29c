"""Figure generation from the main CLI's CSV artifacts. Plotting only;
no numerics beyond reading columns.

Recognized artifacts (searched recursively in the results directory):
  met_scan.csv            -> success probability vs duration
  switching.csv           -> switching function and pulse overlay per qubit
  populations.csv         -> basis-state populations vs time
  dyson_channels.csv      -> per-channel transition probabilities vs time
  population_comparison.csv -> raw/normalized target population, two runs
  *.pulse                 -> piecewise-constant pulse shape
"""
import argparse
import sys
import warnings
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class MissingColumn(RuntimeError):
    pass


def _read_csv(path):
    with open(path) as f:
        header = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    return header, data


def _col(header, data, name, path):
    if name not in header:
        raise MissingColumn(f"{path}: column {name!r} not found (have {header})")
    return data[:, header.index(name)]


def plot_met_scan(path, out):
    header, data = _read_csv(path)
    x = _col(header, data, "duration_ns", path)
    y = _col(header, data, "success_probability", path)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(x, y, "o-")
    ax.set_xlabel("pulse duration (ns)")
    ax.set_ylabel("success probability")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def plot_switching(path, out):
    header, data = _read_csv(path)
    t = _col(header, data, "time_ns", path)
    qubits = sorted({h.split("_q")[-1] for h in header if h.startswith("phi_q")})
    if not qubits:
        raise MissingColumn(f"{path}: no phi_q* columns (have {header})")
    fig, axes = plt.subplots(len(qubits), 1, figsize=(6, 2.6 * len(qubits)),
                             sharex=True, squeeze=False)
    for ax, q in zip(axes[:, 0], qubits):
        omega = _col(header, data, f"omega_ghz_q{q}", path)
        phi = _col(header, data, f"phi_q{q}", path)
        ax.step(t, 1e3 * omega, where="post", color="tab:green",
                label=f"drive q{q} (MHz)")
        ax2 = ax.twinx()
        scale = np.max(np.abs(phi)) or 1.0
        ax2.plot(t, phi / scale, "--", color="tab:orange",
                 label="switching fn (scaled)")
        ax2.axhline(0.0, color="k", lw=0.5)
        ax.set_ylabel(f"q{q} amp (MHz)")
        ax2.set_ylabel("switching (arb)")
    axes[-1, 0].set_xlabel("time (ns)")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def plot_populations(path, out):
    header, data = _read_csv(path)
    t = _col(header, data, "time_ns", path)
    fig, ax = plt.subplots(figsize=(6, 3.4))
    for name in header[1:]:
        y = _col(header, data, name, path)
        label = name[1:]
        style = "--" if any(ch not in "01" for ch in label) else "-"
        ax.plot(t, y, style, label=f"|{label}>")
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("population")
    ax.legend(ncols=3, fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def plot_dyson_channels(path, out):
    header, data = _read_csv(path)
    t = _col(header, data, "time_ns", path)
    fig, ax = plt.subplots(figsize=(6, 3.4))
    for name in header[1:]:
        y = _col(header, data, name, path)
        if name == "p_total":
            ax.plot(t, y, ":", color="goldenrod", lw=2, label="all channels")
        elif name == "p_first_order":
            continue
        else:
            ax.plot(t, y, label=name.replace("p_via_", "via |") + ">")
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("transition probability")
    ax.legend(ncols=2, fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def plot_population_comparison(path, out):
    header, data = _read_csv(path)
    fig, ax = plt.subplots(figsize=(6, 3.4))
    for prefix, style in (("a", "-"), ("b", "--")):
        t = _col(header, data, f"time_{prefix}_ns", path)
        for name in header:
            if name.endswith("_raw") and f"_{prefix}_" in name:
                ax.plot(t, data[:, header.index(name)], style, alpha=0.6,
                        label=name)
            if name.endswith("_normalized") and f"_{prefix}_" in name:
                ax.plot(t, data[:, header.index(name)], style, lw=2, label=name)
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("population")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def plot_pulse(path, out):
    header = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line.startswith("#"):
            if "=" in line:
                key, _, value = line[1:].partition("=")
                header[key.strip()] = value.strip()
            continue
        if line:
            rows.append([float(v) for v in line.split()])
    data = np.asarray(sorted(rows))
    t = data[:, 1]
    duration = float(header.get("duration_ns", t[-1] if len(t) else 0.0))
    fig, ax = plt.subplots(figsize=(6, 3))
    for q in range(data.shape[1] - 2):
        amp = 1e3 * data[:, 2 + q]
        ax.step(np.append(t, duration), np.append(amp, amp[-1]), where="post",
                label=f"qubit {q}")
    ax.axhline(0, color="k", lw=0.5)
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("amplitude (MHz)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


HANDLERS = {
    "met_scan.csv": plot_met_scan,
    "switching.csv": plot_switching,
    "populations.csv": plot_populations,
    "dyson_channels.csv": plot_dyson_channels,
    "population_comparison.csv": plot_population_comparison,
}


def plot_suite(results_dir, out_dir=None):
    """Render every recognized artifact below results_dir; returns the
    list of images written. Empty input is a warning, not an error."""
    results_dir = Path(results_dir)
    out_dir = Path(out_dir) if out_dir else results_dir / "figures"
    written = []
    found = []
    for name, handler in HANDLERS.items():
        found += [(p, handler) for p in sorted(results_dir.rglob(name))]
    found += [(p, plot_pulse) for p in sorted(results_dir.rglob("*.pulse"))]
    if not found:
        warnings.warn(f"no recognized artifacts under {results_dir}; nothing to plot")
        return written
    out_dir.mkdir(parents=True, exist_ok=True)
    for path, handler in found:
        rel = path.relative_to(results_dir)
        stem = "_".join(rel.with_suffix("").parts)
        target = out_dir / f"{stem}.png"
        handler(path, target)
        written.append(target)
    return written


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="refkit-plots",
        description="render figures from result CSVs")
    parser.add_argument("results_dir")
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)
    try:
        written = plot_suite(args.results_dir, args.out)
    except MissingColumn as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for w in written:
        print(w)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
