"""``lrchain`` command line.

Exit status: 0 success, 2 invalid configuration, 3 numerical failure,
4 I/O failure.  Errors are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import sys
import time
from pathlib import Path
from typing import Any

import numpy as np

from lrchain import __version__
from lrchain._backend import BACKEND
from lrchain import analysis
from lrchain.disorder import ConfigurationError, DisorderModel, configuration_rng, ensemble_average, tb_ensemble_average
from lrchain.io import (
    FLOAT_FORMAT,
    Manifest,
    RunConfig,
    load_config,
    parse_float_list,
    parse_time_grid,
    read_fields,
    write_fields,
    write_json,
)
from lrchain.opw import ChainSpec, build_walk_matrix, correlation_field, parse_sites, pauli_string_labels
from lrchain.oracle import MAX_QUBITS, ExactOracle
from lrchain.tight_binding import TbChainSpec, tb_fields

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
ORACLE_TOL = 1e-8


class NumericalFailure(ArithmeticError):
    pass


def _log(cfg: RunConfig, msg: str) -> None:
    if cfg.progress:
        print(f"[lrchain] {msg}", file=sys.stderr, flush=True)


def _out_path(cfg: RunConfig, suffix: str) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    default = cfg.analysis if cfg.experiment == "analyze" and cfg.analysis else cfg.experiment
    prefix = cfg.prefix or default.replace("-", "_")
    return out / f"{prefix}{suffix}"


def _require(value, name: str):
    if value is None:
        raise ValueError(f"missing required parameter: {name}")
    return value


def _tfim_spec(cfg: RunConfig) -> ChainSpec:
    n = int(_require(cfg.n_qubits, "n_qubits (--qubits)"))
    if cfg.couplings is not None:
        return ChainSpec(n, cfg.couplings, baseline=cfg.coupling)
    if cfg.width:
        center = _require(cfg.center if cfg.center is not None else cfg.coupling, "center")
        from lrchain.disorder import sample_configuration

        model = DisorderModel(center, cfg.width, 1, cfg.seed)
        return ChainSpec(n, sample_configuration(model, 0, n - 1), baseline=center)
    coupling = _require(cfg.coupling if cfg.coupling is not None else cfg.center, "coupling (--coupling)")
    return ChainSpec.homogeneous(n, coupling)


def _tb_spec(cfg: RunConfig) -> TbChainSpec:
    n = int(_require(cfg.n_sites, "n_sites (--n-sites)"))
    if cfg.width:
        from lrchain.disorder import sample_configuration

        center = cfg.center if cfg.center is not None else 1.0
        model = DisorderModel(center, cfg.width, 1, cfg.seed)
        return TbChainSpec(n, sample_configuration(model, 0, n - 1))
    return TbChainSpec.uniform(n, cfg.hopping if cfg.hopping is not None else 1.0)


def run_tfim(cfg: RunConfig) -> tuple[list[Path], dict]:
    spec = _tfim_spec(cfg)
    times = cfg.time_array()
    sites = parse_sites(cfg.sites, spec.n_qubits)
    _log(cfg, f"tfim: {spec.n_qubits} qubits, {times.size} times")
    cf = correlation_field(build_walk_matrix(spec), times, sites)
    return [write_fields(_out_path(cfg, ".csv"), cf)], {"chain": spec.to_dict()}


def run_tb(cfg: RunConfig) -> tuple[list[Path], dict]:
    spec = _tb_spec(cfg)
    times = cfg.time_array()
    sites = parse_sites(cfg.sites, spec.n_sites)
    _log(cfg, f"tb: {spec.n_sites} sites, {times.size} times")
    prob, right = tb_fields(spec, times, sites)
    return [write_fields(_out_path(cfg, ".csv"), prob, right)], {"chain": spec.to_dict()}


def run_ensemble(cfg: RunConfig) -> tuple[list[Path], dict]:
    times = cfg.time_array()
    configs = int(_require(cfg.configs, "configs (--configs)"))
    width = float(_require(cfg.width, "width (--width)"))
    if cfg.model == "tfim":
        n = int(_require(cfg.n_qubits, "n_qubits (--qubits)"))
        center = float(_require(cfg.center, "center (--center)"))
        model = DisorderModel(center, width, configs, cfg.seed)
        _log(cfg, f"ensemble: tfim {n} qubits, {configs} configurations, {times.size} times")
        cf = ensemble_average(
            model, n, times, parse_sites(cfg.sites, n), threads=cfg.threads, progress=cfg.progress
        )
        path = write_fields(_out_path(cfg, ".csv"), cf)
    else:
        n = int(_require(cfg.n_sites, "n_sites (--n-sites)"))
        center = float(cfg.center if cfg.center is not None else 1.0)
        model = DisorderModel(center, width, configs, cfg.seed)
        _log(cfg, f"ensemble: tb {n} sites, {configs} configurations, {times.size} times")
        prob, right = tb_ensemble_average(
            model, n, times, parse_sites(cfg.sites, n), threads=cfg.threads, progress=cfg.progress
        )
        path = write_fields(_out_path(cfg, ".csv"), prob, right)
    return [path], {"disorder": model.to_dict(), "ensemble_size": configs}


def _load_field(cfg: RunConfig, quantity: str | None):
    fields_ = read_fields(_require(cfg.input, "input (--input)"))
    if quantity is None:
        return next(iter(fields_.values()))
    if quantity not in fields_:
        raise ValueError(f"column {quantity!r} not in {cfg.input}; have {sorted(fields_)}")
    return fields_[quantity]


def run_analyze(cfg: RunConfig, quantity: str | None = None) -> tuple[list[Path], dict]:
    kind = _require(cfg.analysis, "analysis kind")
    cf = _load_field(cfg, quantity)
    outputs: list[Path] = []
    if kind == "lightcone":
        levels = cfg.levels or list(analysis.DEFAULT_LEVELS)
        cone = analysis.extract_lightcone(cf, levels)
        path = _out_path(cfg, ".csv")
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["level", "t_over_tau", "site_position"])
            for i, c in enumerate(cone.levels):
                for j, t in enumerate(cone.times):
                    x = cone.crossings[i, j]
                    writer.writerow([FLOAT_FORMAT % c, FLOAT_FORMAT % t, "" if np.isnan(x) else FLOAT_FORMAT % x])
        outputs.append(path)
        report: dict[str, Any] = {"levels": cone.levels}
        if cfg.window is not None:
            level = cfg.fit_level if cfg.fit_level is not None else 0.5
            fit = analysis.fit_front_velocity(cone, level, tuple(cfg.window))
            report["velocity_fit"] = {"level": level, "velocity": fit.velocity, "intercept": fit.intercept,
                                      "n_points": fit.n_points, "window": cfg.window}
    elif kind == "stationarity":
        a = cf.at_time(_require(cfg.time_a, "time_a (--time-a)"))
        b = cf.at_time(_require(cfg.time_b, "time_b (--time-b)"))
        rep = analysis.stationarity_check(a, b, cfg.tol, min_site=cfg.min_site)
        report = rep.__dict__.copy()
    elif kind == "kthresh":
        prof = cf.at_time(_require(cfg.time, "time (--time)"))
        loc = analysis.localization_length(prof, cfg.threshold)
        report = {"k_thresh": loc.k_thresh, "saturated": loc.saturated, "threshold": loc.threshold, "time": cfg.time}
    else:
        prof = cf.at_time(_require(cfg.time, "time (--time)"))
        fit = analysis.hss_fit(prof)
        report = {"K": fit.K, "alpha": fit.alpha, "unbounded": fit.unbounded,
                  "retained_sites": int(fit.retained.sum()), "time": cfg.time}
    report["analysis"] = kind
    outputs.append(write_json(_out_path(cfg, "_report.json"), report))
    print(json.dumps(_plain(report)))
    return outputs, {"report": report}


def _plain(obj):
    from lrchain.io import _jsonable

    return _jsonable(obj)


def run_oracle_check(cfg: RunConfig) -> tuple[list[Path], dict]:
    rows = []
    worst = 0.0
    fixed_n = cfg.n_qubits
    if fixed_n is not None and not 1 <= fixed_n <= MAX_QUBITS:
        raise ValueError(f"oracle-check needs 1 <= qubits <= {MAX_QUBITS}")
    for trial in range(int(cfg.trials)):
        rng = configuration_rng(cfg.seed, trial)
        n = int(fixed_n) if fixed_n is not None else int(rng.integers(2, 11))
        couplings = rng.uniform(0.0, cfg.max_coupling, n - 1)
        t = float(rng.uniform(0.0, cfg.max_time))
        spec = ChainSpec(n, couplings)
        opw = correlation_field(build_walk_matrix(spec), [t]).values[:, 0]
        exact = ExactOracle(spec).correlations(t)
        dev = float(np.max(np.abs(opw - exact)))
        worst = max(worst, dev)
        rows.append((trial, n, t, dev))
        _log(cfg, f"oracle trial {trial}: N_q={n} t={t:.4f} max|dC|={dev:.3e}")
    path = _out_path(cfg, ".csv")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "n_qubits", "t_over_tau", "max_deviation"])
        for trial, n, t, dev in rows:
            writer.writerow([trial, n, FLOAT_FORMAT % t, FLOAT_FORMAT % dev])
    report = {"trials": len(rows), "max_deviation": worst, "tol": ORACLE_TOL, "passed": worst <= ORACLE_TOL}
    print(json.dumps(report))
    if worst > ORACLE_TOL:
        raise NumericalFailure(f"oracle deviation {worst:.3e} exceeds {ORACLE_TOL:g}")
    return [path], {"report": report}


def run_labels(cfg: RunConfig) -> tuple[list[Path], dict]:
    n = int(_require(cfg.n_qubits, "n_qubits (--qubits)"))
    labels = pauli_string_labels(n)
    path = _out_path(cfg, ".csv")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "pauli_string"])
        for i, label in enumerate(labels, 1):
            writer.writerow([i, label])
    print("\n".join(labels))
    return [path], {}


RUNNERS = {
    "tfim": run_tfim,
    "tb": run_tb,
    "ensemble": run_ensemble,
    "analyze": run_analyze,
    "oracle-check": run_oracle_check,
    "labels": run_labels,
}


def run(cfg: RunConfig, quantity: str | None = None) -> list[Path]:
    """Execute one configured experiment and write its manifest."""
    started = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    if cfg.experiment == "analyze":
        outputs, extra = run_analyze(cfg, quantity)
    else:
        outputs, extra = RUNNERS[cfg.experiment](cfg)
    manifest = Manifest(
        config=cfg.to_dict(),
        outputs=[str(p) for p in outputs],
        wall_clock_s=time.perf_counter() - t0,
        started_utc=started,
        version=__version__,
        backend=BACKEND,
        extra=extra,
    )
    mpath = write_json(_out_path(cfg, "_manifest.json"), manifest.to_dict())
    return [*outputs, mpath]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config or manifest; flags override it")
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--prefix", help="output file prefix")
    p.add_argument("--times", help="comma-separated times in units of tau")
    p.add_argument("--tgrid", help="inclusive grid start:stop:count in units of tau")
    p.add_argument("--sites", help="site selection, e.g. 1..600 or 1,5,9")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker threads (default LRCHAIN_THREADS or 1)")
    p.add_argument("--quiet", action="store_true", help="no progress on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrchain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lrchain {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tfim", help="single-configuration C_k(t)")
    _add_common(p)
    p.add_argument("--qubits", dest="n_qubits", type=int)
    p.add_argument("--coupling", type=float, help="uniform J'")
    p.add_argument("--couplings", help="explicit comma-separated J'_k")
    p.add_argument("--center", type=float)
    p.add_argument("--width", type=float, help="draw one disordered configuration")

    p = sub.add_parser("tb", aliases=["tb-evolve"], help="tight-binding P and P_R")
    _add_common(p)
    p.add_argument("--n-sites", dest="n_sites", type=int)
    p.add_argument("--hopping", type=float)
    p.add_argument("--center", type=float)
    p.add_argument("--width", type=float, help="relative hopping disorder for one configuration")

    p = sub.add_parser("ensemble", help="configuration-averaged C_bar or P_bar/P_R_bar")
    _add_common(p)
    p.add_argument("--model", choices=("tfim", "tb"))
    p.add_argument("--qubits", dest="n_qubits", type=int)
    p.add_argument("--n-sites", dest="n_sites", type=int)
    p.add_argument("--center", type=float)
    p.add_argument("--width", type=float)
    p.add_argument("--configs", type=int)

    p = sub.add_parser("analyze", help="post-process a field CSV")
    p.add_argument("analysis", choices=("lightcone", "stationarity", "kthresh", "hss"))
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--quantity", help="value column to analyse (default: first)")
    p.add_argument("--levels")
    p.add_argument("--window", help="fit window start,stop")
    p.add_argument("--fit-level", dest="fit_level", type=float)
    p.add_argument("--time", type=float)
    p.add_argument("--time-a", dest="time_a", type=float)
    p.add_argument("--time-b", dest="time_b", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--min-site", dest="min_site", type=int)
    p.add_argument("--threshold", type=float)

    p = sub.add_parser("oracle-check", help="randomized OPW vs exact comparison")
    _add_common(p)
    p.add_argument("--qubits", dest="n_qubits", type=int, help="fixed size (default random 2..10)")
    p.add_argument("--trials", type=int)
    p.add_argument("--max-time", dest="max_time", type=float)
    p.add_argument("--max-coupling", dest="max_coupling", type=float)

    p = sub.add_parser("labels", help="operator-walk Pauli strings")
    _add_common(p)
    p.add_argument("--qubits", dest="n_qubits", type=int)

    p = sub.add_parser("run", help="run a JSON config or manifest")
    _add_common(p)
    return parser


_SKIP = {"command", "config", "quiet", "tgrid", "quantity"}
_ALIASES = {"tb-evolve": "tb"}
_LISTS = {"couplings", "levels", "window", "times"}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict[str, Any] = load_config(args.config) if args.config else {}
    for key, value in vars(args).items():
        if key in _SKIP or value is None:
            continue
        data[key] = parse_float_list(value) if key in _LISTS else value
    if args.tgrid is not None:
        data.pop("times", None)
        data["time_grid"] = parse_time_grid(args.tgrid)
    elif getattr(args, "times", None) is not None:
        data.pop("time_grid", None)
    if args.quiet:
        data["progress"] = False
    if args.command != "run":
        data["experiment"] = _ALIASES.get(args.command, args.command)
    elif "experiment" not in data:
        raise ValueError("run needs --config with an 'experiment' entry")
    return RunConfig.from_dict(data)


def _fail(category: str, code: int, exc: BaseException) -> int:
    print(json.dumps({"error": category, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ValueError, KeyError, TypeError) as exc:
        return _fail("config", EXIT_CONFIG, exc)
    except OSError as exc:
        return _fail("io", EXIT_IO, exc)
    try:
        run(cfg, getattr(args, "quantity", None))
    except (ConfigurationError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail("numerical", EXIT_NUMERIC, exc)
    except OSError as exc:
        return _fail("io", EXIT_IO, exc)
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        return _fail("config", EXIT_CONFIG, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
