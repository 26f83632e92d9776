"""Figure rendering for the report paths (Agg backend, files only)."""

from __future__ import annotations

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def save_decay_figure(report, path):
    """Log-log norm series with the fitted and predicted slope lines."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    t = np.asarray(report.times)
    n = np.asarray(report.norms)
    ax.loglog(t, n, "o", ms=4, color="tab:blue", label="grid norm")
    t0 = np.sqrt(t[0] * t[-1])
    n0 = np.interp(t0, t, n)
    span = np.array([t[0], t[-1]])
    ax.loglog(span, n0 * (span / t0) ** (-report.fitted_exponent),
              "-", color="tab:blue", lw=1,
              label=f"fit: t^-{report.fitted_exponent:.3f}")
    if not isinstance(report.predicted_exponent, str):
        ax.loglog(span, n0 * (span / t0) ** (-report.predicted_exponent),
                  "--", color="tab:red", lw=1,
                  label=f"predicted: t^-{report.predicted_exponent:.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.set_title(report.spec.label())
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_exponential_figure(times, norms, gamma, path, title="high band"):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.semilogy(times, norms, "o", ms=4, label="grid norm")
    c = norms[0] * np.exp(gamma * times[0])
    ax.semilogy(times, c * np.exp(-gamma * np.asarray(times)), "-", lw=1,
                label=f"fit: e^-{gamma:.3f} t")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_roots_figure(rows, path):
    """Two panels: root trajectory and the distance to its approximation."""
    A = np.array([r["A"] for r in rows])
    re = np.array([r["re_lambda_plus"] for r in rows])
    im = np.array([r["im_lambda_plus"] for r in rows])
    gap = np.array([r["gap_to_zeta"] for r in rows])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.4, 3.4))
    ax1.plot(re, im, ".-", ms=3, lw=0.8)
    ax1.set_xlabel("Re lambda+")
    ax1.set_ylabel("Im lambda+")
    ax1.set_title("slow-mode trajectory")
    ax2.loglog(A, gap, ".-", ms=3, lw=0.8)
    ax2.set_xlabel("A")
    ax2.set_ylabel("|lambda+ - zeta+|")
    ax2.set_title("approximation gap")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_contours_figure(paths_json, path, extent=4.0):
    """Sketch of the serialized integration paths in the spectral plane."""
    fig, ax = plt.subplots(figsize=(5.4, 5.0))
    cmap = plt.get_cmap("tab10")
    for i, pj in enumerate(paths_json):
        color = cmap(i % 10)
        for seg in pj["segments"]:
            if seg["type"] == "line":
                z0, z1 = complex(*seg["start"]), complex(*seg["end"])
                ax.plot([z0.real, z1.real], [z0.imag, z1.imag], color=color, lw=1.2)
            elif seg["type"] == "arc":
                s = np.linspace(seg["s_start"], seg["s_end"], 128)
                z = complex(*seg["center"]) + seg["radius"] * np.exp(1j * s)
                ax.plot(z.real, z.imag, color=color, lw=1.2)
            else:
                smax = seg.get("s_max") or extent
                s = np.linspace(0, smax, 32)
                z = complex(*seg["start"]) + s * np.exp(1j * seg["angle"])
                ax.plot(z.real, z.imag, color=color, lw=1.2, ls=":")
        ax.plot([], [], color=color, label=pj.get("name", f"path {i}"))
    ax.axhline(0, color="k", lw=0.4)
    ax.axvline(0, color="k", lw=0.4)
    ax.set_xlim(-extent, extent)
    ax.set_ylim(-extent, extent)
    ax.set_aspect("equal")
    ax.legend(fontsize=7, loc="upper right")
    ax.set_title("integration paths")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_field_figure(field_x, field_vals, path, title="height", xlabel="x"):
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    ax.plot(field_x, field_vals, lw=1.0)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("value")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
