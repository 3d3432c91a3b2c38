#!/usr/bin/env python3
"""Plot a distill run CSV: distilled/reduced purities and the field/dipole.

Usage: plot.py RUN.csv [OUT.png]
"""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else path.rsplit(".", 1)[0] + ".png"
    data = np.genfromtxt(path, delimiter=",", names=True)
    t = data["t_fs"]

    fig, axes = plt.subplots(3, 1, figsize=(7, 9), sharex=True)

    ax = axes[0]
    ax.plot(t, data["dP1_energy"], label=r"$\tilde P_1$ energy", color="tab:blue")
    ax.plot(t, data["dP2_energy"], label=r"$\tilde P_2$ energy", color="tab:red")
    ax.plot(t, data["dP1_bound_tight_energy"], ":", color="tab:blue", alpha=0.6,
            label=r"$\tilde P_1$ bound")
    ax.plot(t, data["dP2_bound_tight_energy"], ":", color="tab:red", alpha=0.6,
            label=r"$\tilde P_2$ bound")
    ax.set_ylabel("distilled purity (energy)")
    ax.legend(loc="upper right", fontsize=8)

    ax = axes[1]
    ax.plot(t, data["dP1_site"], label=r"$\tilde P_1$ site", color="tab:blue")
    ax.plot(t, data["dP2_site"], label=r"$\tilde P_2$ site", color="tab:red")
    ax.plot(t, data["P1"], label=r"$P_1$", color="tab:brown", alpha=0.7)
    ax.plot(t, data["P2"], label=r"$P_2$", color="tab:green", alpha=0.7)
    ax.set_ylabel("site basis / reduced")
    ax.legend(loc="upper right", fontsize=8)

    ax = axes[2]
    ax.plot(t, data["dipole_eA"], color="tab:red", label="dipole (e A)")
    ax.plot(t, data["field_VperA"], color="k", alpha=0.7, label="field (V/A)")
    ax.set_ylabel("drive / response")
    ax.set_xlabel("t (fs)")
    ax.legend(loc="upper right", fontsize=8)

    fig.tight_layout()
    fig.savefig(out, dpi=160)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
