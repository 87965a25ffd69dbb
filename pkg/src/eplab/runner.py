"""Run orchestration: build, integrate, fit, persist.

Outputs of a single run, under the configured directory:

    series.tsv      tab-separated diagnostics, one header row, 17 significant
                    digits, UTF-8, LF line endings (columns pinned in
                    diagnostics.SERIES_COLUMNS)
    manifest.json   given + derived parameters, grid, scheme, fitted rates
                    with windows and residuals, per-mode predictions, config
                    text + sha256, wall-clock time
    decay.png       norm time series with the fitted slope (unless disabled)

A tau sweep writes one run directory per tau plus ``sweep.tsv``,
``sweep_summary.json`` and ``sweep.png`` at the top level.  Sweep runs are
independent and execute in a thread pool; series files are deterministic for
a fixed configuration.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig, emit_config
from .diagnostics import SERIES_COLUMNS, FitResult, RecordBuilder, RunRecord, decay_fit
from .dyadic import build_cutoffs
from .errors import NonPositiveSeriesError, TooFewSamplesError
from .linear import predicted_decay_rate, solenoidal_rate, spectrum_table
from .model import InitSpec, Params, compatible_init
from .spectral import Grid
from .timestep import StepControl, cfl_time_step, evolve

__all__ = ["RunResult", "build_problem", "run_single", "run_sweep", "write_series"]

FIT_SERIES = ("state_norm", "tendency_norm", "norm_m_sigma", "norm_u_sigma",
              "norm_e_sigma", "Q", "vorticity_norm")


class RunResult:
    """In-memory outcome of one run."""

    def __init__(self, config: RunConfig, record: RunRecord, out_dir: Path | None,
                 manifest: dict):
        self.config = config
        self.record = record
        self.out_dir = out_dir
        self.manifest = manifest

    @property
    def fitted_mu(self) -> float | None:
        fit = self.record.fits.get("state_norm")
        return None if fit is None else fit.mu

    @property
    def oracle_mu(self) -> float | None:
        return self.manifest["predictions"]["mu"]


def build_problem(config: RunConfig):
    """Grid, params, cutoffs, initial state, and step control for a config."""
    grid = Grid(config.dim, config.points, config.length)
    params = Params(
        A=config.pressure_const,
        gamma=config.gamma,
        tau=config.relaxation_time,
        n_bar=config.background_density,
        dim=config.dim,
    )
    cutoffs = build_cutoffs(grid)
    state = compatible_init(config.init, params, grid)

    if config.dt is not None:
        dt = config.dt
    else:
        max_u = float(np.sqrt(np.sum(state.u.values ** 2, axis=0)).max())
        bound = cfl_time_step(params, grid, max_u, config.cfl)
        interval = config.sample_interval or config.t_end or bound
        dt = interval / math.ceil(interval / bound) if interval > 0 else bound
    control = StepControl(
        dt=dt,
        t_end=config.t_end,
        sample_interval=config.sample_interval,
        cfl=config.cfl,
        scheme=config.scheme,
        e_mode=config.e_mode,
        linearized=config.linearized,
    )
    return grid, params, cutoffs, state, control


def excited_mode_set(init: InitSpec, grid: Grid):
    """(longitudinal kappa values, solenoidal content flag) for the oracle."""
    kappas: list[float] = []
    solenoidal = False
    scale = 2.0 * np.pi / grid.length
    for mode in init.modes:
        mag = scale * float(np.linalg.norm(mode.k))
        if mode.target == "u-solenoidal":
            solenoidal = True
        else:
            kappas.append(mag)
    if init.random is not None:
        from .linear import lattice_kappas

        band = init.random.band
        mags = lattice_kappas(grid, limit=band[1])
        kappas.extend(float(k) for k in mags if k >= band[0])
        solenoidal = solenoidal or init.random.solenoidal
    return sorted(set(kappas)), solenoidal


def _fit_all(record: RunRecord) -> None:
    t = record.series("t")
    for name in FIT_SERIES:
        y = record.series(name)
        if y.size == 0:
            continue
        if float(np.max(y)) == 0.0:
            # an exactly-zero series (equilibrium run) decays at rate 0
            record.fits[name] = FitResult(0.0, 0.0, (float(t[0]), float(t[-1])), int(t.size))
            continue
        try:
            record.fits[name] = decay_fit(t, y)
        except (NonPositiveSeriesError, TooFewSamplesError):
            continue


def write_series(record: RunRecord, path: Path) -> None:
    """Persist the pinned columns as TSV with 17 significant digits."""
    rows = [record.series(name) for name in SERIES_COLUMNS]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(SERIES_COLUMNS) + "\n")
        for i in range(len(record.times)):
            fh.write("\t".join(f"{col[i]:.17g}" for col in rows) + "\n")


def run_single(config: RunConfig, out_dir: Path | None = None, plots: bool = True) -> RunResult:
    """Execute one configured run and persist its artifacts."""
    t_start = time.perf_counter()
    grid, params, cutoffs, state, control = build_problem(config)

    builder = RecordBuilder(cutoffs, params)
    evolve(state, params, control, observers=(builder,))
    record = builder.record
    record.validate()
    _fit_all(record)

    kappas, solenoidal = excited_mode_set(config.init, grid)
    if kappas or solenoidal:
        mu_oracle = predicted_decay_rate(kappas, params, solenoidal=solenoidal)
    else:
        mu_oracle = None

    config_text = emit_config(config)
    manifest = {
        "config_text": config_text,
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "params": {
            "A": params.A,
            "gamma": params.gamma,
            "tau": params.tau,
            "n_bar": params.n_bar,
            "psi_bar": params.psi_bar,
            "c": params.c,
            "sigma": params.sigma,
        },
        "grid": {
            "dim": grid.dim,
            "points": grid.points,
            "length": grid.length,
            "dealias_limit": grid.dealias_limit,
            "q_max": cutoffs.q_max,
        },
        "scheme": control.scheme,
        "e_mode": control.e_mode,
        "linearized": control.linearized,
        "dt": control.dt,
        "t_end": control.t_end,
        "fitted_rates": {
            name: {
                "mu": fit.mu,
                "window": list(fit.window),
                "residual": fit.residual,
                "n_samples": fit.n_samples,
            }
            for name, fit in record.fits.items()
        },
        "predictions": {
            "mu": mu_oracle,
            "kappas": kappas,
            "solenoidal": solenoidal,
            "solenoidal_rate": solenoidal_rate(params),
            "modes": spectrum_table(kappas, params) if kappas else [],
        },
    }

    out_path = None
    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        write_series(record, out_path / "series.tsv")
        if plots:
            from .plots import decay_figure

            manifest["figures"] = [str(out_path / "decay.png")]
            decay_figure(record, mu_oracle, out_path / "decay.png")
        manifest["wall_clock_seconds"] = time.perf_counter() - t_start
        with open(out_path / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    else:
        manifest["wall_clock_seconds"] = time.perf_counter() - t_start

    return RunResult(config, record, out_path, manifest)


def _loglog_slope(taus, mus) -> float | None:
    taus, mus = np.asarray(taus), np.asarray(mus)
    if taus.size < 2 or np.any(mus <= 0.0):
        return None
    return float(np.polyfit(np.log(taus), np.log(mus), 1)[0])


def run_sweep(
    config: RunConfig,
    taus,
    out_dir: Path | None = None,
    threads: int = 1,
    plots: bool = True,
) -> list[dict]:
    """One run per tau; aggregates (tau, mu_fit, mu_oracle) and slope report.

    Failures of individual runs are flagged in the table and the sweep
    continues.
    """
    taus = [float(t) for t in taus]
    out_path = Path(out_dir) if out_dir is not None else None

    def one(tau: float) -> dict:
        sub_cfg = replace(config, relaxation_time=tau)
        sub_dir = out_path / f"tau_{tau:g}" if out_path is not None else None
        try:
            result = run_single(sub_cfg, out_dir=sub_dir, plots=plots)
            return {
                "tau": tau,
                "mu_fit": result.fitted_mu,
                "mu_oracle": result.oracle_mu,
                "error": "",
            }
        except Exception as err:  # sweep continues; row carries the failure
            return {"tau": tau, "mu_fit": None, "mu_oracle": None, "error": str(err)}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, taus))
    else:
        rows = [one(tau) for tau in taus]

    ok = [r for r in rows if not r["error"] and r["mu_oracle"]]
    small = [(r["tau"], r["mu_oracle"]) for r in ok if r["tau"] <= 1.0]
    large = [(r["tau"], r["mu_oracle"]) for r in ok if r["tau"] > 1.0]
    summary = {
        "rows": rows,
        "slope_small_tau": _loglog_slope(*zip(*small)) if len(small) >= 2 else None,
        "slope_large_tau": _loglog_slope(*zip(*large)) if len(large) >= 2 else None,
    }

    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
        with open(out_path / "sweep.tsv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("tau\tmu_fit\tmu_oracle\terror\n")
            for r in rows:
                mu_fit = "" if r["mu_fit"] is None else f"{r['mu_fit']:.17g}"
                mu_or = "" if r["mu_oracle"] is None else f"{r['mu_oracle']:.17g}"
                fh.write(f"{r['tau']:.17g}\t{mu_fit}\t{mu_or}\t{r['error']}\n")
        with open(out_path / "sweep_summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
        if plots:
            from .plots import tau_scaling_figure

            tau_scaling_figure(rows, out_path / "sweep.png")
    return rows
