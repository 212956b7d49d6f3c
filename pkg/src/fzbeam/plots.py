"""Figure rendering for the report outputs; PNGs land next to each CSV."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

STYLE = {
    "narrowband": dict(color="tab:gray", ls="--"),
    "vsa": dict(color="tab:orange", ls="-."),
    "fz-spm": dict(color="tab:blue", ls="-"),
    "fz-gsa": dict(color="tab:red", ls="-"),
    "fz-gsa-exact": dict(color="tab:purple", ls=":"),
    "upper-bound": dict(color="black", ls=":"),
    "optimal": dict(color="black", ls=":"),
}

SWEEP_LABELS = {
    "tx_power": "transmit power (dBm)",
    "D": "RIS side length (m)",
    "B": "bandwidth (Hz)",
    "route_length": "total route length (m)",
    "N_BS": "BS antenna count",
}


def _style(method: str) -> dict:
    return STYLE.get(method, dict(ls="-"))


def spectrum_figure(f_hz: np.ndarray, gains: dict[str, np.ndarray], path) -> None:
    """Gain magnitude (dB) against frequency, one curve per method."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for method, mag in gains.items():
        db = 20.0 * np.log10(np.maximum(np.asarray(mag), 1e-300))
        ax.plot(np.asarray(f_hz) / 1e9, db, label=method, **_style(method))
    ax.set_xlabel("frequency (GHz)")
    ax.set_ylabel("|g| (dB)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def rate_sweep_figure(cells, sweep: str, path) -> None:
    """Mean achievable rate per method across the swept values."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    methods = sorted({c.method for c in cells})
    for method in methods:
        pts = sorted((c.sweep_value, c.mean_rate_bps, c.stderr_bps)
                     for c in cells if c.method == method)
        xs = [p[0] for p in pts]
        ys = [p[1] / 1e9 for p in pts]
        err = [p[2] / 1e9 for p in pts]
        ax.errorbar(xs, ys, yerr=err, label=method, capsize=2, **_style(method))
    ax.set_xlabel(SWEEP_LABELS.get(sweep, sweep))
    ax.set_ylabel("mean rate (Gb/s)")
    if sweep in ("B",):
        ax.set_xscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def gamma_histogram(gammas, path) -> None:
    """Distribution of the measured bandwidth constant over placements."""
    vals = np.asarray([g for g in gammas if np.isfinite(g)])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(vals, bins=40, color="tab:blue", alpha=0.8, density=True)
    if vals.size:
        ax.axvline(float(np.median(vals)), color="tab:red", ls="--",
                   label=f"median = {np.median(vals):.3f}")
        ax.legend(fontsize=9)
    ax.set_xlabel("gamma")
    ax.set_ylabel("density")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def profile_figure(profile, path) -> None:
    """Reflective intensity against delay; handy when debugging geometries."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(profile.t * 1e9, profile.v_t, color="tab:blue")
    ax.set_xlabel("delay (ns)")
    ax.set_ylabel("intensity")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
