"""Command-line interface.

Subcommands:
    run        one configured simulation -> series.tsv, manifest.json, decay.png
    sweep-tau  one run per relaxation time -> sweep.tsv, sweep_summary.json, sweep.png
    lp-check   dyadic-analysis property suite on random fields -> lp_check.json
    oracle     per-mode eigenvalue table -> oracle.tsv, spectrum.png

Exit codes: 0 success, 2 configuration error, 3 runtime violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import config_from_file, with_overrides
from .errors import CflViolationError, ConfigError, DomainViolationError, EplabError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, type=Path, help="configuration file")
    parser.add_argument("--out", type=Path, default=None, help="override output directory")
    parser.add_argument("--threads", type=int, default=1, help="parallel workers (sweeps)")
    parser.add_argument("--seed", type=int, default=None, help="override the random-init seed")
    parser.add_argument("--no-plots", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eplab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep-tau", help="run once per relaxation time")
    _add_common(p_sweep)
    p_sweep.add_argument("--taus", required=True,
                         help="comma-separated relaxation times, e.g. 0.1,0.5,2")

    p_lp = sub.add_parser("lp-check", help="run the dyadic-analysis property suite")
    _add_common(p_lp)
    p_lp.add_argument("--fields", type=int, default=50, help="number of random fields")

    p_or = sub.add_parser("oracle", help="emit the per-mode eigenvalue table")
    _add_common(p_or)
    p_or.add_argument("--kappas", default=None,
                      help="comma-separated wavenumbers (default: lattice magnitudes)")
    p_or.add_argument("--kappa-max", type=float, default=8.0,
                      help="cap for lattice-derived wavenumbers")
    return parser


def _load(args) -> tuple:
    cfg = config_from_file(args.config)
    cfg = with_overrides(cfg, out_dir=args.out, seed=args.seed)
    return cfg


def _cmd_run(args) -> int:
    from .runner import run_single

    cfg = _load(args)
    result = run_single(cfg, out_dir=Path(cfg.out_dir), plots=not args.no_plots)
    fit = result.fitted_mu
    oracle = result.oracle_mu
    print(f"run complete: {len(result.record.times)} samples -> {result.out_dir}")
    print(f"fitted mu = {fit if fit is not None else 'n/a'}   "
          f"predicted mu = {oracle if oracle is not None else 'n/a'}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .runner import run_sweep

    cfg = _load(args)
    try:
        taus = [float(x) for x in args.taus.split(",") if x.strip()]
    except ValueError as err:
        raise ConfigError("--taus", str(err)) from None
    if not taus:
        raise ConfigError("--taus", "empty list")
    rows = run_sweep(cfg, taus, out_dir=Path(cfg.out_dir), threads=args.threads,
                     plots=not args.no_plots)
    print("tau\tmu_fit\tmu_oracle\terror")
    failures = 0
    for r in rows:
        failures += bool(r["error"])
        print(f"{r['tau']:g}\t{r['mu_fit']}\t{r['mu_oracle']}\t{r['error']}")
    if failures:
        print(f"{failures} run(s) failed; see table", file=sys.stderr)
    return EXIT_OK


def _cmd_lp_check(args) -> int:
    from .dyadic import lp_property_report
    from .spectral import Grid

    cfg = _load(args)
    grid = Grid(cfg.dim, cfg.points, cfg.length)
    seed = args.seed if args.seed is not None else 0
    report = lp_property_report(grid, n_fields=args.fields, seed=seed)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "lp_check.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    for check in report["checks"]:
        status = "PASS" if check["pass"] else "FAIL"
        print(f"{status}  {check['name']}: max residual {check['max_residual']:.3e} "
              f"(tolerance {check['tolerance']:.0e})")
    print(("all checks passed" if report["all_pass"] else "CHECK FAILURES (see report)")
          + f" -> {out_dir / 'lp_check.json'}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    from .linear import lattice_kappas, spectrum_table
    from .model import Params
    from .spectral import Grid

    cfg = _load(args)
    params = Params(A=cfg.pressure_const, gamma=cfg.gamma, tau=cfg.relaxation_time,
                    n_bar=cfg.background_density, dim=cfg.dim)
    if args.kappas is not None:
        try:
            kappas = [float(x) for x in args.kappas.split(",") if x.strip()]
        except ValueError as err:
            raise ConfigError("--kappas", str(err)) from None
    else:
        grid = Grid(cfg.dim, cfg.points, cfg.length)
        kappas = [0.0] + list(lattice_kappas(grid, limit=args.kappa_max))
    rows = spectrum_table(kappas, params)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cols = ("kappa", "re_lambda_plus", "im_lambda_plus", "re_lambda_minus",
            "im_lambda_minus", "solenoidal_rate", "re_lambda_plus_uncoupled")
    with open(out_dir / "oracle.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(cols) + "\n")
        for r in rows:
            fh.write("\t".join(f"{r[c]:.17g}" for c in cols) + "\n")
    print("\t".join(cols))
    for r in rows:
        print("\t".join(f"{r[c]:.6g}" for c in cols))
    if not args.no_plots:
        from .plots import spectrum_figure

        spectrum_figure(rows, out_dir / "spectrum.png")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep-tau": _cmd_sweep,
        "lp-check": _cmd_lp_check,
        "oracle": _cmd_oracle,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainViolationError, CflViolationError) as err:
        print(f"runtime violation: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except EplabError as err:
        print(f"runtime violation: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
