"""Figures rendered next to the CSV outputs by ``gaspolar report``."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import empirical_cdf  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (4.2, 3.0),
    "savefig.dpi": 150,
}


def _floor_zero(values, floor):
    # zero BLER cannot sit on a log axis
    return np.where(np.asarray(values) > 0, values, floor)


def _mask_zero(values):
    return np.where(np.asarray(values) > 0, values, np.nan)


def plot_bler(rows: list[dict], path: str | Path) -> Path:
    snr = np.array([float(r["snr_db"]) for r in rows])
    ml = np.array([float(r["bler_ml"]) for r in rows])
    gas = np.array([float(r["bler_gas"]) for r in rows])
    lo = np.array([float(r["ci_low"]) for r in rows])
    hi = np.array([float(r["ci_high"]) for r in rows])
    trials = max(int(r["trials"]) for r in rows)
    floor = 0.5 / trials
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.fill_between(snr, _floor_zero(lo, floor), _floor_zero(hi, floor), color="0.85",
                        label="ML 95% CI")
        ax.semilogy(snr, _mask_zero(ml), "k-o", ms=4, label="classical ML")
        ax.semilogy(snr, _mask_zero(gas), "r--x", ms=5, label="GAS")
        ax.set_xlabel("SNR [dB]")
        ax.set_ylabel("BLER")
        ax.grid(True, which="both", ls=":", lw=0.5)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_cdf(rows: list[dict], path: str | Path) -> Path:
    total = len(rows)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for col, label, style in (("qd_at_opt", "quantum domain (QD)", "r-"),
                                  ("cd_at_opt", "classical domain (CD)", "b--")):
            vals = [float(r[col]) for r in rows if r[col] != ""]
            xs, ys = empirical_cdf(vals, total)
            ax.step(np.concatenate([[0], xs]), np.concatenate([[0], ys]), style, where="post",
                    label=label)
        ax.set_xscale("symlog", linthresh=1)
        ax.set_xlabel("iterations to reach the ML solution")
        ax.set_ylabel("CDF")
        ax.set_ylim(0, 1.02)
        ax.grid(True, ls=":", lw=0.5)
        ax.legend(loc="upper left")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)
