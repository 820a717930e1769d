"""Command-line front end: simulate, measure, sweep, verify.

Units: gamma0 = 1 defines the rate unit, so `--width-ratio` is the
spectral width over gamma0 and times are in 1/gamma0. Configuration comes
from an INI-style file (sections [model], [solver], [measure], [run]) with
flags taking precedence. Exit codes: 0 success, 1 configuration error,
2 numerical failure, 3 verification failure. NM_LOG sets log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import constants
from .amplitude import Method, SolverConfig, compute_trajectory, default_horizon
from .dynamics import (
    StatePair,
    excited_state,
    ground_state,
    pair_distance_trajectory,
)
from .errors import NumericalFailureError, PhysicalityError, UnsupportedModelError
from .measure import (
    blp_from_trajectory,
    lower_bound_two,
    nonmarkovianity_single,
    verify_theorem,
)
from .reservoir import Lorentzian, OhmicFamily, classify_regime, kappa, load_tabulated

log = logging.getLogger("nonmarkov")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFICATION = 3


class ConfigError(Exception):
    pass


_SCHEMA = {
    "model": {"type", "gamma0", "width_ratio", "detuning", "coupling", "exponent",
              "cutoff", "qubit_frequency", "table"},
    "solver": {"method", "dt", "t_max", "tolerance"},
    "measure": {"min_tolerance"},
    "run": {"seed", "samples", "jobs"},
}


@dataclass
class RunConfig:
    """Flattened, validated configuration for one CLI invocation."""

    model_type: str = "lorentzian"
    gamma0: float = 1.0
    width_ratio: float = 0.1
    detuning: float = 0.0
    coupling: float | None = None
    exponent: float | None = None
    cutoff: float | None = None
    qubit_frequency: float | None = None
    table: str | None = None
    method: str = "auto"
    dt: float = 1e-3
    t_max: float | None = None
    tolerance: float = constants.QUADRATURE_REL_TOL
    min_tolerance: float = constants.MIN_VALUE_TOL
    seed: int = 42
    samples: int = 10000
    jobs: int = 1

    def build_model(self):
        if self.model_type == "lorentzian":
            return Lorentzian(
                gamma0=self.gamma0,
                width=self.width_ratio * self.gamma0,
                detuning=self.detuning,
            )
        if self.model_type == "ohmic":
            missing = [k for k in ("coupling", "exponent", "cutoff", "qubit_frequency")
                       if getattr(self, k) is None]
            if missing:
                raise ConfigError(f"ohmic model needs keys: {', '.join(missing)}")
            return OhmicFamily(
                coupling=self.coupling,
                exponent=self.exponent,
                cutoff=self.cutoff,
                qubit_frequency=self.qubit_frequency,
            )
        if self.model_type == "tabulated":
            if self.table is None or self.qubit_frequency is None:
                raise ConfigError("tabulated model needs 'table' and 'qubit_frequency'")
            return load_tabulated(self.table, self.qubit_frequency)
        raise ConfigError(f"unknown model type {self.model_type!r}")

    def build_solver(self, model) -> SolverConfig:
        if self.method == "auto":
            resonant = isinstance(model, Lorentzian) and model.detuning == 0.0
            method = Method.CLOSED_FORM if resonant else Method.VOLTERRA
        elif self.method in ("closed_form", "volterra"):
            method = Method(self.method)
        else:
            raise ConfigError(f"unknown solver method {self.method!r}")
        t_max = self.t_max
        if t_max is None:
            if isinstance(model, Lorentzian):
                t_max = default_horizon(model.gamma0, model.width)
            else:
                raise ConfigError("t_max has no automatic rule for this model; pass --t-max")
        return SolverConfig(dt=self.dt, t_max=t_max, method=method, tolerance=self.tolerance)

    def effective(self) -> dict:
        out = {
            "model": {"type": self.model_type, "gamma0": self.gamma0},
            "solver": {"method": self.method, "dt": self.dt, "t_max": self.t_max,
                       "tolerance": self.tolerance},
            "measure": {"min_tolerance": self.min_tolerance},
            "run": {"seed": self.seed, "samples": self.samples, "jobs": self.jobs},
        }
        if self.model_type == "lorentzian":
            out["model"]["width_ratio"] = self.width_ratio
            out["model"]["detuning"] = self.detuning
        elif self.model_type == "ohmic":
            out["model"].update(coupling=self.coupling, exponent=self.exponent,
                                cutoff=self.cutoff, qubit_frequency=self.qubit_frequency)
        else:
            out["model"].update(table=self.table, qubit_frequency=self.qubit_frequency)
        return out


_FLOAT_KEYS = {"gamma0", "width_ratio", "detuning", "coupling", "exponent", "cutoff",
               "qubit_frequency", "dt", "t_max", "tolerance", "min_tolerance"}
_INT_KEYS = {"seed", "samples", "jobs"}
_STR_KEYS = {"type": "model_type", "method": "method", "table": "table"}


def load_config_file(path: str) -> dict:
    """Parse the INI file into {attribute: value}, rejecting unknown keys."""
    import configparser

    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    values: dict = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            if key in _STR_KEYS:
                values[_STR_KEYS[key]] = raw.strip()
            elif key in _INT_KEYS:
                values[key] = int(raw)
            else:
                values[key] = float(raw)
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    overrides = {
        "width_ratio": getattr(args, "width_ratio", None),
        "dt": getattr(args, "dt", None),
        "t_max": getattr(args, "t_max", None),
        "seed": getattr(args, "seed", None),
        "samples": getattr(args, "samples", None),
        "jobs": getattr(args, "jobs", None),
        "min_tolerance": getattr(args, "min_tolerance", None),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.dt <= 0:
        raise ConfigError(f"dt must be positive, got {cfg.dt}")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be at least 1")
    return cfg


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write(path, text: str) -> None:
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def cmd_simulate(cfg: RunConfig, out) -> int:
    model = cfg.build_model()
    solver = cfg.build_solver(model)
    traj = compute_trajectory(model, solver)
    t = traj.times()
    b = traj.values
    x = np.abs(b)
    x2 = x * x
    d_two = x * np.sqrt(2.0 - 2.0 * x2 + x2 * x2)
    lines = ["t,re_b,im_b,abs_b,pop_e,d_opt,d_eg,d_two,conc_psi,conc_phi"]
    for i in range(b.size):
        row = (t[i], b[i].real, b[i].imag, x[i], x2[i], x[i], x2[i], d_two[i],
               x2[i], x2[i] * x2[i])
        lines.append(",".join(_fmt(v) for v in row))
    _write(out, "\n".join(lines) + "\n")
    return EXIT_OK


def _measure_bundle(cfg: RunConfig) -> dict:
    model = cfg.build_model()
    solver = cfg.build_solver(model)
    traj = compute_trajectory(model, solver)
    n_single = nonmarkovianity_single(traj, min_tolerance=cfg.min_tolerance)
    eg_pair = StatePair(first=excited_state(), second=ground_state())
    n_eg = blp_from_trajectory(pair_distance_trajectory(traj, eg_pair))
    n_two = lower_bound_two(traj, min_tolerance=cfg.min_tolerance)
    bundle = {
        "config": cfg.effective(),
        "regime": None,
        "kappa": None,
        "n_single": n_single.to_dict(),
        "n_eg": n_eg.to_dict(),
        "n_two_lower": n_two.to_dict(),
    }
    if isinstance(model, Lorentzian):
        bundle["regime"] = classify_regime(model).value
        bundle["kappa"] = kappa(model)
    return bundle


def cmd_measure(cfg: RunConfig, out) -> int:
    bundle = _measure_bundle(cfg)
    _write(out, json.dumps(bundle, indent=2) + "\n")
    return EXIT_OK


def _sweep_point(payload: tuple) -> tuple:
    """One sweep row; module-level so process pools can pickle it."""
    (gamma0, ratio, dt, t_max, tolerance, min_tolerance) = payload
    cfg = RunConfig(
        model_type="lorentzian", gamma0=gamma0, width_ratio=ratio, dt=dt,
        t_max=t_max, tolerance=tolerance, min_tolerance=min_tolerance,
    )
    bundle = _measure_bundle(cfg)
    return (
        ratio,
        bundle["kappa"],
        bundle["regime"],
        bundle["n_single"]["total"],
        bundle["n_eg"]["total"],
        bundle["n_two_lower"]["total"],
    )


def cmd_sweep(cfg: RunConfig, args, out) -> int:
    if args.steps < 2:
        raise ConfigError("sweep needs at least 2 steps")
    if not (0 < args.width_from and 0 < args.width_to):
        raise ConfigError("width ratios must be positive")
    ratios = np.linspace(args.width_from, args.width_to, args.steps)
    payloads = [
        (cfg.gamma0, float(r), cfg.dt, cfg.t_max, cfg.tolerance, cfg.min_tolerance)
        for r in ratios
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]
    lines = ["width_ratio,kappa,regime,n_single,n_eg,n_two_lower"]
    for ratio, kap, regime, n_s, n_eg, n_two in rows:
        lines.append(
            f"{_fmt(ratio)},{_fmt(kap)},{regime},{_fmt(n_s)},{_fmt(n_eg)},{_fmt(n_two)}"
        )
    _write(out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args, out) -> int:
    model = cfg.build_model()
    solver = cfg.build_solver(model)
    traj = compute_trajectory(model, solver)
    report = verify_theorem(
        traj, samples=cfg.samples, seed=cfg.seed, bound_scale=args.fault_scale
    )
    payload = {"config": cfg.effective(), "verification": report.to_dict()}
    _write(out, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK if report.ok else EXIT_VERIFICATION


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; config errors are 1
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nonmarkov", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI config file")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--width-ratio", type=float, dest="width_ratio",
                       help="spectral width over gamma0")
        p.add_argument("--dt", type=float, help="time step (1/gamma0 units)")
        p.add_argument("--t-max", type=float, dest="t_max", help="horizon")
        p.add_argument("--min-tolerance", type=float, dest="min_tolerance",
                       help="zero-qualification tolerance for distance minima")
        p.add_argument("--jobs", type=int, help="parallel workers (sweep)")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="output format where both make sense")

    p_sim = sub.add_parser("simulate", help="trajectory CSV: b(t) and derived signals")
    common(p_sim)

    p_meas = sub.add_parser("measure", help="non-Markovianity report bundle (JSON)")
    common(p_meas)

    p_sweep = sub.add_parser("sweep", help="measures across a range of width ratios")
    common(p_sweep)
    p_sweep.add_argument("--width-from", type=float, required=True, dest="width_from")
    p_sweep.add_argument("--width-to", type=float, required=True, dest="width_to")
    p_sweep.add_argument("--steps", type=int, required=True)

    p_ver = sub.add_parser("verify", help="random-pair check of the optimal-pair bound")
    common(p_ver)
    p_ver.add_argument("--samples", type=int, help="number of random pairs")
    p_ver.add_argument("--seed", type=int, help="RNG seed")
    p_ver.add_argument("--fault-scale", type=float, default=1.0, dest="fault_scale",
                       help=argparse.SUPPRESS)  # negative-control hook for tests
    return parser


def main(argv=None) -> int:
    level = os.environ.get("NM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = make_parser()
    args = parser.parse_args(argv)
    native_format = {"simulate": "csv", "measure": "json", "sweep": "csv", "verify": "json"}
    try:
        if args.format and args.format != native_format[args.command]:
            raise ConfigError(
                f"{args.command} emits {native_format[args.command]}, not {args.format}"
            )
        cfg = build_config(args)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out)
        if args.command == "measure":
            return cmd_measure(cfg, args.out)
        if args.command == "sweep":
            return cmd_sweep(cfg, args, args.out)
        return cmd_verify(cfg, args, args.out)
    except (ConfigError, PhysicalityError, UnsupportedModelError) as exc:
        log.error("%s", exc)
        print(f"nonmarkov: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailureError as exc:
        log.error("%s", exc)
        print(f"nonmarkov: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
