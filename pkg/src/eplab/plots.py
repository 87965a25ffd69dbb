"""Figure rendering for run reports.

Figures are written next to the delimited output; the data files remain the
primary interface and every figure is reproducible from them.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["decay_figure", "tau_scaling_figure", "spectrum_figure"]


def decay_figure(record, mu_oracle: float | None, path: Path) -> None:
    """Semilog norm history with the fitted and predicted slopes."""
    t = record.series("t")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, label in (
        ("norm_m_sigma", "m"),
        ("norm_u_sigma", "u"),
        ("norm_e_sigma", "e"),
        ("state_norm", "(m,u,e)"),
        ("Q", "Q"),
    ):
        y = record.series(name)
        if np.any(y > 0.0):
            ax.semilogy(t, y, label=label, lw=1.2)
    fit = record.fits.get("state_norm")
    if fit is not None and fit.mu > 0.0:
        y0 = record.series("state_norm")
        ref = np.interp(fit.window[0], t, y0)
        tt = np.linspace(fit.window[0], fit.window[1], 50)
        ax.semilogy(tt, ref * np.exp(-fit.mu * (tt - fit.window[0])), "k--", lw=1.0,
                    label=f"fit: exp(-{fit.mu:.3g} t)")
    if mu_oracle is not None and len(t) > 1:
        y0 = record.series("state_norm")
        if np.any(y0 > 0.0):
            ax.semilogy(t, y0[0] * np.exp(-mu_oracle * t), ":", color="gray", lw=1.0,
                        label=f"predicted: exp(-{mu_oracle:.3g} t)")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def tau_scaling_figure(rows, path: Path) -> None:
    """Log-log decay rate against relaxation time with slope guides."""
    taus = np.array([r["tau"] for r in rows if r["mu_oracle"]])
    mu_or = np.array([r["mu_oracle"] for r in rows if r["mu_oracle"]])
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    order = np.argsort(taus)
    ax.loglog(taus[order], mu_or[order], "o-", label="predicted", lw=1.2)
    fitted = [(r["tau"], r["mu_fit"]) for r in rows if r["mu_fit"]]
    if fitted:
        ft, fm = zip(*fitted)
        ax.loglog(ft, fm, "s", label="fitted", ms=5)
    if taus.size:
        tref = np.array([taus.min(), taus.max()])
        ax.loglog(tref, mu_or[order][0] * tref / taus[order][0], "--", color="gray",
                  lw=0.8, label="slope +1 / -1")
        ax.loglog(tref, mu_or[order][-1] * taus[order][-1] / tref, "--", color="gray", lw=0.8)
    ax.set_xlabel("relaxation time tau")
    ax.set_ylabel("decay rate mu")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def spectrum_figure(rows, path: Path) -> None:
    """Real parts of the per-mode eigenvalues against wavenumber."""
    kappa = np.array([r["kappa"] for r in rows])
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    ax.plot(kappa, [r["re_lambda_plus"] for r in rows], "o-", label="Re lambda+", lw=1.2)
    ax.plot(kappa, [r["re_lambda_minus"] for r in rows], "s-", label="Re lambda-", lw=1.2)
    ax.plot(kappa, [r["re_lambda_plus_uncoupled"] for r in rows], "^--",
            label="Re lambda+ (no Poisson term)", lw=1.0)
    if rows:
        ax.axhline(rows[0]["solenoidal_rate"], color="gray", ls=":", lw=1.0,
                   label="solenoidal -1/tau")
    ax.set_xlabel("kappa")
    ax.set_ylabel("Re lambda")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
