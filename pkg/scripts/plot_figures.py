"""Render the datasets written by reproduce_figures.sh as PNGs.

Needs matplotlib (``pip install -e .[plot]``). Usage::

    python scripts/plot_figures.py out/
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from starkhcp.io import read_csv
from starkhcp.cli import read_carpet


def stark_map(src: Path, dst: Path):
    t = read_csv(src)
    F, E, P = t.column("field_vcm"), t.column("energy_cm1"), t.column("probability")
    fig, ax = plt.subplots(figsize=(5, 6))
    ax.scatter(F, E, s=0.3, c="0.75", lw=0)
    hot = P > 1e-3
    ax.scatter(F[hot], E[hot], s=4 * P[hot] / P.max() + 0.2, c=P[hot], cmap="magma_r", lw=0)
    ax.set(xlabel="F (V/cm)", ylabel="E (cm$^{-1}$)", ylim=(E[hot].min() - 30, E[hot].max() + 30))
    fig.savefig(dst, dpi=150, bbox_inches="tight")
    plt.close(fig)


def lcomp(src: Path, dst: Path):
    t = read_csv(src)
    time = t.column("time_ps")
    fig, ax = plt.subplots(figsize=(6, 3))
    for name in t.columns[1:5]:
        ax.plot(time, t.column(name), lw=0.8, label=name)
    ax.set(xlabel="t (ps)", ylabel="population")
    ax.legend(frameon=False, fontsize=8)
    fig.savefig(dst, dpi=150, bbox_inches="tight")
    plt.close(fig)


def carpet(src: Path, dst: Path):
    c, _ = read_carpet(src)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.pcolormesh(c.field_bins, c.delays, c.signal / c.signal.max(), shading="nearest", cmap="viridis")
    ax.set(xlabel="$F_i$ (V/cm)", ylabel="HCP delay (ps)")
    fig.savefig(dst, dpi=150, bbox_inches="tight")
    plt.close(fig)


def lineout_and_spectrum(line: Path, peaks: Path, dst: Path):
    t, p = read_csv(line), read_csv(peaks)
    fig, (a, b) = plt.subplots(2, 1, figsize=(6, 5))
    a.plot(t.column("delay_ps"), t.column("signal"), lw=0.7)
    a.set(xlabel="HCP delay (ps)", ylabel="signal")
    b.stem(p.column("frequency_cm1"), p.column("amplitude"), basefmt=" ")
    b.set(xlabel="frequency (cm$^{-1}$)", ylabel="amplitude", xlim=(0, 35))
    fig.tight_layout()
    fig.savefig(dst, dpi=150)
    plt.close(fig)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", type=Path)
    d = ap.parse_args().outdir
    stark_map(d / "fig1_starkmap.csv", d / "fig1.png")
    lcomp(d / "fig2a_lcomp.csv", d / "fig2a.png")
    for name in ("fig2c", "fig3a", "fig3b"):
        carpet(d / f"{name}_carpet.csv", d / f"{name}.png")
    lineout_and_spectrum(d / "fig2e_lineout.csv", d / "fig2f_peaks.csv", d / "fig2ef.png")
    print("wrote", ", ".join(sorted(p.name for p in d.glob("*.png"))))


if __name__ == "__main__":
    main()
