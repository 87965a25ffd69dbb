"""Norm time series, the block energy functional, and decay-rate fitting.

The recorded quantities mirror the exponential-stability estimates: Besov
norms of the state at the critical index sigma = 1 + N/2, norms of the exact
tendencies one index lower, the weighted block energy

    Q = sum_{q >= -1} 2^{q(sigma-1)} { 2^{2q} (||D_q m||^2 + ||D_q u||^2
        + ||D_q e||^2 / nbar) + ||D_q m_t||^2 + ||D_q u_t||^2
        + ||D_q e_t||^2 / nbar }^{1/2},

the vorticity norm at index sigma - 1, the Poisson-constraint residual, and
the transform-domain margin.  Q is equivalent to the sum of the state and
tendency norms; the equivalence constants are measured, not assumed.

Rate fitting is a plain least-squares slope of -log y against t.  The
default window drops the first 20% of a run: decay estimates control
C exp(-mu t), not monotonicity from t = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dyadic import DyadicCutoffs
from .errors import NonPositiveSeriesError, TooFewSamplesError
from .model import (
    Params,
    SymmetricState,
    Tendencies,
    constraint_residual,
    domain_margin,
)
from .spectral import VectorField, curl

__all__ = [
    "RunRecord",
    "FitResult",
    "RecordBuilder",
    "q_functional",
    "decay_fit",
    "vorticity_norm",
    "SERIES_COLUMNS",
]

#: column order of the persisted series file (schema-stable)
SERIES_COLUMNS = (
    "t",
    "norm_m_sigma",
    "norm_u_sigma",
    "norm_e_sigma",
    "norm_mt",
    "norm_ut",
    "norm_et",
    "Q",
    "vorticity_norm",
    "constraint_residual",
    "min_domain_margin",
)


@dataclass(frozen=True)
class FitResult:
    """Fitted exponential rate with its window and log-space RMS residual."""

    mu: float
    residual: float
    window: tuple[float, float]
    n_samples: int


@dataclass
class RunRecord:
    """Sampled diagnostics of one trajectory.

    ``columns`` holds the persisted series; ``state_norm`` / ``tendency_norm``
    are the stacked-bundle norms (all fields in one block L2) kept in memory
    for rate fits against the per-mode predictions.  Fitted rates are added
    by the runner and carry their windows.
    """

    times: list[float] = field(default_factory=list)
    columns: dict[str, list[float]] = field(
        default_factory=lambda: {name: [] for name in SERIES_COLUMNS if name != "t"}
    )
    state_norm: list[float] = field(default_factory=list)
    tendency_norm: list[float] = field(default_factory=list)
    fits: dict[str, FitResult] = field(default_factory=dict)

    def series(self, name: str) -> np.ndarray:
        if name == "t":
            return np.asarray(self.times)
        if name == "state_norm":
            return np.asarray(self.state_norm)
        if name == "tendency_norm":
            return np.asarray(self.tendency_norm)
        return np.asarray(self.columns[name])

    def validate(self) -> None:
        t = np.asarray(self.times)
        if t.size > 1 and not np.all(np.diff(t) > 0.0):
            raise ValueError("sample times must be strictly increasing")
        for name, vals in self.columns.items():
            if name != "min_domain_margin" and np.any(np.asarray(vals) < 0.0):
                raise ValueError(f"series {name} contains negative values")


def _weighted_block_norm(cutoffs: DyadicCutoffs, norms: np.ndarray, s: float) -> float:
    return float(np.sum(2.0 ** (cutoffs.qs * s) * norms))


def _stacked_block_norms(cutoffs: DyadicCutoffs, fields, weights=None) -> np.ndarray:
    """Blockwise sqrt(sum_i w_i ||D_q f_i||^2) over a bundle of fields."""
    total = None
    for i, f in enumerate(fields):
        w = 1.0 if weights is None else weights[i]
        n = cutoffs.block_l2_norms(f) ** 2 * w
        total = n if total is None else total + n
    return np.sqrt(total)


def q_functional(
    cutoffs: DyadicCutoffs, state: SymmetricState, tendencies: Tendencies, params: Params
) -> float:
    """Weighted block energy of the state and its exact tendencies (see module docs)."""
    sigma = params.sigma
    w = 1.0 / params.n_bar
    state_sq = _stacked_block_norms(cutoffs, (state.m, state.u, state.e), (1.0, 1.0, w)) ** 2
    tend_sq = _stacked_block_norms(
        cutoffs, (tendencies.m_t, tendencies.u_t, tendencies.e_t), (1.0, 1.0, w)
    ) ** 2
    qs = cutoffs.qs
    per_block = np.sqrt(2.0 ** (2.0 * qs) * state_sq + tend_sq)
    return float(np.sum(2.0 ** (qs * (sigma - 1.0)) * per_block))


def vorticity_norm(cutoffs: DyadicCutoffs, u: VectorField, params: Params) -> float:
    """Norm of curl u at index sigma - 1; zero for gradient fields."""
    omega = curl(u)
    norms = cutoffs.block_l2_norms(omega)
    return _weighted_block_norm(cutoffs, norms, params.sigma - 1.0)


def decay_fit(
    times, values, window: tuple[float, float] | None = None, min_samples: int = 8
) -> FitResult:
    """Least-squares exponential rate: slope of -log y against t.

    ``window`` restricts the fit to t in [window[0], window[1]]; by default
    the first 20% of the span is dropped as transient.  All values inside the
    window must be positive and at least ``min_samples`` samples must remain.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if window is None:
        t0 = t[0] + 0.2 * (t[-1] - t[0])
        window = (float(t0), float(t[-1]))
    sel = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
    t_w, y_w = t[sel], y[sel]
    if t_w.size < min_samples:
        raise TooFewSamplesError(
            f"{t_w.size} samples in window {window}, need >= {min_samples}"
        )
    if np.any(y_w <= 0.0):
        raise NonPositiveSeriesError("series contains values <= 0 inside the fit window")
    log_y = np.log(y_w)
    slope, intercept = np.polyfit(t_w, log_y, 1)
    resid = np.sqrt(np.mean((log_y - (slope * t_w + intercept)) ** 2))
    return FitResult(mu=float(-slope), residual=float(resid),
                     window=(float(window[0]), float(window[1])), n_samples=int(t_w.size))


class RecordBuilder:
    """Observer that appends one diagnostics row per sample."""

    def __init__(self, cutoffs: DyadicCutoffs, params: Params):
        self.cutoffs = cutoffs
        self.params = params
        self.record = RunRecord()

    def __call__(self, t: float, state: SymmetricState, tend: Tendencies) -> None:
        cut, p = self.cutoffs, self.params
        sigma = p.sigma
        row = self.record

        row.times.append(float(t))
        cols = row.columns
        cols["norm_m_sigma"].append(_weighted_block_norm(cut, cut.block_l2_norms(state.m), sigma))
        cols["norm_u_sigma"].append(_weighted_block_norm(cut, cut.block_l2_norms(state.u), sigma))
        cols["norm_e_sigma"].append(_weighted_block_norm(cut, cut.block_l2_norms(state.e), sigma))
        cols["norm_mt"].append(_weighted_block_norm(cut, cut.block_l2_norms(tend.m_t), sigma - 1.0))
        cols["norm_ut"].append(_weighted_block_norm(cut, cut.block_l2_norms(tend.u_t), sigma - 1.0))
        cols["norm_et"].append(_weighted_block_norm(cut, cut.block_l2_norms(tend.e_t), sigma - 1.0))
        cols["Q"].append(q_functional(cut, state, tend, p))
        cols["vorticity_norm"].append(vorticity_norm(cut, state.u, p))
        cols["constraint_residual"].append(constraint_residual(state, p))
        cols["min_domain_margin"].append(domain_margin(state.m, p))

        stacked = _stacked_block_norms(cut, (state.m, state.u, state.e))
        row.state_norm.append(_weighted_block_norm(cut, stacked, sigma))
        stacked_t = _stacked_block_norms(cut, (tend.m_t, tend.u_t, tend.e_t))
        row.tendency_norm.append(_weighted_block_norm(cut, stacked_t, sigma - 1.0))
