"""Shared construction helpers for the test suite."""

import numpy as np

from eplab.spectral import Grid, ScalarField, VectorField, dealias, random_band_field


def cos_mode(grid: Grid, kvec, amplitude: float = 1.0, phase: float = 0.0) -> ScalarField:
    """amplitude * cos(k.x + phase) for an integer wavevector."""
    scale = 2.0 * np.pi / grid.length
    k = scale * np.asarray(kvec, dtype=float)
    arg = np.tensordot(k, grid.coords(), axes=1) + phase
    return ScalarField(grid, amplitude * np.cos(arg))


def masked_random(grid: Grid, rng, band=(1.0, 10.0), rms: float = 1.0) -> ScalarField:
    return dealias(random_band_field(grid, rng, band=band, rms=rms))


def random_vector(grid: Grid, rng, band=(1.0, 10.0), rms: float = 1.0) -> VectorField:
    comps = [masked_random(grid, rng, band, rms).values for _ in range(grid.dim)]
    return VectorField(grid, np.stack(comps))


def rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    denom = np.linalg.norm(b.ravel())
    return float(np.linalg.norm((a - b).ravel()) / (denom if denom > 0 else 1.0))
