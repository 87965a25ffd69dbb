"""Exact per-mode analysis of the linearized dynamics around equilibrium.

Linearizing the symmetrized system about (m, u, e) = (0, 0, 0) and Fourier
transforming, each wavevector k decouples.  The velocity splits into a
longitudinal part (along k) and a solenoidal part (perpendicular to k).

Solenoidal part: u_t = -u / tau, so it relaxes at the exact rate 1/tau.

Longitudinal part: with kappa = |k|, amplitudes (M, U, E) obey

    M' = -i psibar kappa U,
    U' = -i psibar kappa M - U / tau + E,
    E' = -nbar U,

and on the constraint manifold ``i kappa E = c M`` (the linearized Poisson
constraint div e = h'(0) m = c m; note c psibar = nbar exactly) this closes
into a damped oscillator

    M'' + M' / tau + (psibar^2 kappa^2 + psibar c) M = 0,

whose eigenvalues are the roots of

    lambda^2 + lambda / tau + (psibar^2 kappa^2 + psibar c) = 0.

Both roots have negative real part for every kappa >= 0 because the Poisson
coupling contributes the constant spring term ``psibar c > 0``; dropping that
coupling (``poisson_coupling=False``) exposes a neutral lambda = 0 branch at
kappa = 0.  A full derivation lives in ``docs/linear-modes.md``.

Everything here is plain complex arithmetic, independent of the spectral
machinery, and serves as ground truth for fitted decay rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Params

__all__ = [
    "ModeSpectrum",
    "longitudinal_eigenvalues",
    "solenoidal_rate",
    "predicted_decay_rate",
    "tau_scaling_curve",
    "spectrum_table",
    "lattice_kappas",
]


@dataclass(frozen=True)
class ModeSpectrum:
    """Eigenvalue data for one wavenumber magnitude."""

    kappa: float
    lambda_plus: complex
    lambda_minus: complex
    solenoidal: float


def longitudinal_eigenvalues(
    kappa: float, params: Params, poisson_coupling: bool = True
) -> tuple[complex, complex]:
    """Roots of lambda^2 + lambda/tau + (psibar^2 kappa^2 + psibar c).

    Returned ordered by real part (slow root first).  With
    ``poisson_coupling=False`` the constant spring term is dropped, the
    comparison mode that shows the electric field is what damps kappa -> 0.
    """
    if kappa < 0.0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    omega2 = params.psi_bar ** 2 * kappa ** 2
    if poisson_coupling:
        omega2 += params.psi_bar * params.c
    half_damp = 0.5 / params.tau
    disc = complex(half_damp ** 2 - omega2)
    root = np.sqrt(disc)
    lam_plus = -half_damp + root
    lam_minus = -half_damp - root
    if lam_plus.real < lam_minus.real:
        lam_plus, lam_minus = lam_minus, lam_plus
    return complex(lam_plus), complex(lam_minus)


def solenoidal_rate(params: Params) -> float:
    """Decay eigenvalue of the transverse velocity: -1/tau."""
    return -1.0 / params.tau


def predicted_decay_rate(
    kappas, params: Params, solenoidal: bool = False
) -> float:
    """Slowest linear decay rate over the excited components (positive).

    ``mu = min over excited kappa of -Re lambda``, including the solenoidal
    rate 1/tau when transverse content is excited.
    """
    kappas = list(np.atleast_1d(np.asarray(kappas, dtype=float)))
    if not kappas and not solenoidal:
        raise ValueError("predicted_decay_rate needs a nonempty excited set")
    rates = []
    for kappa in kappas:
        lam_plus, _ = longitudinal_eigenvalues(kappa, params)
        rates.append(-lam_plus.real)
    if solenoidal:
        rates.append(1.0 / params.tau)
    return float(min(rates))


def tau_scaling_curve(taus, kappa_min: float, params: Params) -> list[tuple[float, float]]:
    """Slowest longitudinal rate at fixed kappa_min for each relaxation time.

    The curve has log-log slope +1 as tau -> 0 (rate ~ omega0^2 tau) and -1
    as tau -> infinity (rate = 1/(2 tau)).
    """
    out = []
    for tau in np.atleast_1d(np.asarray(taus, dtype=float)):
        if tau <= 0.0:
            raise ValueError(f"tau values must be positive, got {tau}")
        p = Params(params.A, params.gamma, tau, params.n_bar, params.dim)
        out.append((float(tau), predicted_decay_rate([kappa_min], p)))
    return out


def spectrum_table(kappas, params: Params) -> list[dict]:
    """Rows (kappa, lambda+-, solenoidal rate, uncoupled Re lambda+) for reporting."""
    rows = []
    for kappa in np.atleast_1d(np.asarray(kappas, dtype=float)):
        lam_plus, lam_minus = longitudinal_eigenvalues(kappa, params)
        lam_plus_nc, _ = longitudinal_eigenvalues(kappa, params, poisson_coupling=False)
        rows.append(
            {
                "kappa": float(kappa),
                "re_lambda_plus": lam_plus.real,
                "im_lambda_plus": lam_plus.imag,
                "re_lambda_minus": lam_minus.real,
                "im_lambda_minus": lam_minus.imag,
                "solenoidal_rate": solenoidal_rate(params),
                "re_lambda_plus_uncoupled": lam_plus_nc.real,
            }
        )
    return rows


def lattice_kappas(grid, limit: float | None = None) -> np.ndarray:
    """Sorted distinct wavenumber magnitudes of the masked lattice (kappa > 0)."""
    mags = np.unique(np.round(grid.kmag[grid.dealias_mask], 12))
    mags = mags[mags > 0.0]
    if limit is not None:
        mags = mags[mags <= limit]
    return mags
