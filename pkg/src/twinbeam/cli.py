"""Command-line front end.

Subcommands: ``simulate``, ``analyze``, ``sweep``, ``conditional``, ``fit``.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace

from . import io
from .analysis import conditional_distribution, difference_histogram, noise_reduction, tail_window
from .collection import sweep_pump
from .config import ExperimentConfig, load_config, to_dict
from .errors import DataError, ParameterError, TwinBeamError
from .oracle import fit_mode_number, thinning_floor
from .series import ShotSeries
from .simulation import run_sweep, simulate

log = logging.getLogger("twinbeam")

REPORT_KEYS = (
    "K",
    "corrected",
    "means",
    "snl",
    "sigma2_d",
    "sigma2_d_dark",
    "R_linear",
    "R_dB",
    "R_stderr",
    "fano_s",
    "fano_i",
    "gamma",
    "eta",
    "classification",
)


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    return cfg.override(
        count=getattr(args, "count", None),
        seed=getattr(args, "seed", None),
        dark_count=getattr(args, "dark_count", None),
        workers=getattr(args, "workers", None),
        j_max=getattr(args, "j_max", None),
    )


def _load_series(shots: str, dark: str | None, with_cov: bool) -> ShotSeries:
    series = io.read_shots(shots)
    if dark is None:
        return series
    dark_series = io.read_shots(dark)
    if len(dark_series) != len(series):
        log.warning("shot file has K=%d but dark file has K=%d; dark used for moments only", len(series), len(dark_series))
    return series.with_dark(dark_series, with_cov)


def _eta(cfg: ExperimentConfig, override: float | None) -> float:
    if override is not None:
        return override
    return 0.5 * (cfg.arms[0].eta + cfg.arms[1].eta)


def _emit(obj: dict, out: str | None):
    if out:
        io.write_json(out, obj)
    else:
        sys.stdout.write(io.dumps(obj))


def _conditional_block(series: ShotSeries, cfg: ExperimentConfig, eta: float, corrected: bool, hist_out: str | None):
    opts = cfg.analysis
    window = opts.window
    if window is None and opts.success is None:
        return None
    if window is None:
        window = tail_window(series, opts.success, opts.window_width, opts.window_side)
    res = conditional_distribution(series, window, corrected, opts.bin_width, eta)
    if hist_out:
        h = res.histogram
        io.write_table(hist_out, ("m_i", "count", "probability"), zip(h.centers.astype(float), h.counts, h.probabilities))
    return res.to_dict()


def cmd_simulate(args) -> int:
    cfg = _config(args)
    if cfg.run.seed is None:
        raise ParameterError("--seed is required for simulate")
    run = simulate(
        cfg.source,
        cfg.arms,
        cfg.run.count,
        cfg.run.seed,
        cfg.collection,
        cfg.run.dark_count,
        cfg.analysis.dark_covariance,
        cfg.run.workers,
    )
    io.write_shots(args.out, run.series)
    if run.dark is not None and args.dark_out:
        io.write_shots(args.dark_out, run.dark)
    if args.config_out:
        io.write_json(args.config_out, to_dict(cfg))
    print(
        f"wrote {len(run.series)} shots to {args.out}: "
        f"<m_s> = {run.series.m_s.mean():.2f}, <m_i> = {run.series.m_i.mean():.2f}"
    )
    return 0


def cmd_analyze(args) -> int:
    cfg = _config(args)
    series = _load_series(args.shots, args.dark, cfg.analysis.dark_covariance)
    corrected = cfg.analysis.corrected and series.dark is not None
    eta = _eta(cfg, args.eta)
    rep = noise_reduction(series, corrected, eta, cfg.analysis.j_max)
    out = {k: getattr(rep, k) for k in REPORT_KEYS}
    out["means"] = list(rep.means)
    out["gamma"] = list(rep.gamma)
    out["snl_dB"] = 0.0
    out["floor_R"] = thinning_floor(eta)
    out["conditional"] = _conditional_block(series, cfg, eta, corrected, args.conditional_csv)
    if args.gamma_csv:
        io.write_table(args.gamma_csv, ("j", "gamma"), enumerate(rep.gamma))
    if args.difference_csv:
        h = difference_histogram(series, cfg.analysis.bin_width)
        io.write_table(args.difference_csv, ("d", "count", "probability"), zip(h.centers.astype(float), h.counts, h.probabilities))
    _emit(out, args.out)
    if not rep.R_linear > 0:
        log.error("R = %.6g is not positive; dB value undefined", rep.R_linear)
        return 4
    return 0


def cmd_conditional(args) -> int:
    cfg = _config(args)
    if args.window is not None or args.success is not None:
        cfg = ExperimentConfig(
            cfg.source,
            cfg.arms,
            cfg.collection,
            cfg.run,
            replace(
                cfg.analysis,
                window=tuple(args.window) if args.window is not None else None,
                success=args.success,
                window_width=args.width if args.width is not None else cfg.analysis.window_width,
                window_side=args.side or cfg.analysis.window_side,
            ),
            cfg.sweep,
        )
    series = _load_series(args.shots, args.dark, cfg.analysis.dark_covariance)
    corrected = cfg.analysis.corrected and series.dark is not None
    block = _conditional_block(series, cfg, _eta(cfg, args.eta), corrected, args.histogram_csv)
    if block is None:
        raise ParameterError("give --window LO HI or --success P")
    _emit(block, args.out)
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    if cfg.run.seed is None:
        raise ParameterError("--seed is required for sweep")
    points = sweep_pump(cfg.sweep.intensities, cfg.sweep.mapping, cfg.source)
    rows = run_sweep(points, cfg.arms, cfg.run.count, cfg.run.seed, cfg.run.dark_count, cfg.run.workers)
    eta = _eta(cfg, None)
    header = list(rows[0]) + ["snl_dB", "floor_dB"]
    floor_db = io.fmt(10 * math.log10(thinning_floor(eta))) if eta < 1 else "-inf"
    table = [[*row.values(), 0.0, floor_db] for row in rows]
    io.write_table(args.out, header, table)
    for row in rows:
        print(f"I = {row['pump_intensity']:.4g}  rho = {row['rho']:.4g}  R = {row['R_dB']:+.3f} dB (exact {row['R_exact_dB']:+.3f} dB)")
    return 0


def cmd_fit(args) -> int:
    cfg = _config(args)
    series = _load_series(args.shots, args.dark, cfg.analysis.dark_covariance)
    eta = _eta(cfg, args.eta)
    rep = noise_reduction(series, series.dark is not None, eta)
    gamma0 = rep.gamma[0]
    mean = list(rep.means) if args.per_arm else 0.5 * (rep.means[0] + rep.means[1])
    mu = fit_mode_number(gamma0, mean, eta)
    _emit({"gamma0": gamma0, "means": list(rep.means), "eta": eta, "mu": mu, "mu_rounded": max(1, round(mu))}, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twinbeam", description="Twin-beam photon-number correlation toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, run=True):
        sp.add_argument("--config", help="JSON config (default: $TWINBEAM_CONFIG or the built-in preset)")
        if run:
            sp.add_argument("--seed", type=int)
            sp.add_argument("--count", type=int)
            sp.add_argument("--dark-count", type=int)
            sp.add_argument("--workers", type=int)

    def data(sp):
        sp.add_argument("shots")
        sp.add_argument("--dark", help="dark-run shot file used for noise corrections")
        sp.add_argument("--eta", type=float, help="detection efficiency (default: from config)")
        sp.add_argument("--out", help="write JSON here instead of stdout")

    sp = sub.add_parser("simulate", help="generate shot and dark files")
    common(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--dark-out")
    sp.add_argument("--config-out", help="write the effective config as JSON")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("analyze", help="noise reduction, correlations and Fano factors")
    common(sp, run=False)
    data(sp)
    sp.add_argument("--j-max", type=int)
    sp.add_argument("--gamma-csv")
    sp.add_argument("--difference-csv")
    sp.add_argument("--conditional-csv")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("conditional", help="idler distribution conditioned on a signal window")
    common(sp, run=False)
    data(sp)
    sp.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--success", type=float, help="target success probability for an automatic tail window")
    sp.add_argument("--width", type=float)
    sp.add_argument("--side", choices=("upper", "lower"))
    sp.add_argument("--histogram-csv")
    sp.set_defaults(func=cmd_conditional)

    sp = sub.add_parser("sweep", help="noise reduction versus pump intensity")
    common(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("fit", help="fit the mode number to measured data")
    common(sp, run=False)
    data(sp)
    sp.add_argument("--per-arm", action="store_true", help="treat unequal arm means as idler/signal background")
    sp.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except TwinBeamError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("%s", exc)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
