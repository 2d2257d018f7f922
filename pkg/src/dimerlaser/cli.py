"""Command-line entry point: parse config, dispatch drivers, write artifacts.

Every run reads one flat key=value parameter file (physics constants plus
run controls), applies repeatable --set overrides, and writes into the
output directory: a manifest.json (seed, parameter digest, artifact list),
a resolved_params.txt echo that reproduces the run when fed back through
--params, and the driver-specific CSV/JSON tables.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, experiments, model, sde
from .model import ParameterError, PumpSchedule, transparency_pump

EXPERIMENTS = ("bifurcation", "stationary", "ramp", "beta-sweep", "trajectory")

#: pump points of the reference noiseless scan
DEFAULT_BIFURCATION_PUMPS = "6.008,6.010,6.012,6.016,6.020,6.024,6.028,6.032,6.036"

#: system sizes beta^-1 = 5.9, 59, ..., 5.9e4
DEFAULT_BETA_LIST = "0.169492,0.0169492,0.00169492,0.000169492,0.0000169492"

LANES_ENV = "DIMERLASER_LANES"

# key -> (type, default); None means "derived at dispatch time"
RUN_KEYS = {
    "schema_version": (int, 1),
    "P_over_P0": (float, 6.02),
    "dt": (float, None),
    "record_stride": (int, 1),
    "n_traj": (int, None),
    "n_steps": (int, 1000),
    "seed": (int, 1),
    "lanes": (int, None),
    "pump_min": (float, None),
    "pump_max": (float, None),
    "pump_step": (float, None),
    "pump_list": (str, None),
    "beta_list": (str, None),
    "t_transient": (float, None),
    "t_window": (float, None),
    "ramp_start": (float, 5.95),
    "ramp_end": (float, 6.35),
    "ramp_duration": (float, 6.0),
    "bin_width": (float, 0.05),
    "detector_bandwidth": (float, 0.6),
}

ALL_KEYS = tuple(model.PARAM_KEYS) + tuple(RUN_KEYS)


@dataclass
class RunConfig:
    """Fully resolved run description."""

    experiment: str
    params: PhysicalParams
    out_dir: Path
    values: dict = field(default_factory=dict)

    def get(self, key, fallback=None):
        v = self.values.get(key)
        return fallback if v is None else v

    @property
    def seed(self) -> int:
        return int(self.values["seed"])

    @property
    def lanes(self) -> int:
        return int(self.values["lanes"])


def _coerce(key: str, text: str):
    caster, _ = RUN_KEYS.get(key, (float, None))
    try:
        if caster is int:
            return int(text)
        if caster is float:
            return float(text)
        return text
    except ValueError:
        raise ParameterError(f"key {key!r}: cannot parse {text!r} as {caster.__name__}") from None


def _parse_float_list(text: str, key: str):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ParameterError(f"key {key!r}: expected comma-separated floats, got {text!r}") from None
    if not values:
        raise ParameterError(f"key {key!r} is empty")
    return np.asarray(values)


def parse_config(args: argparse.Namespace) -> RunConfig:
    """Resolve defaults <- parameter file <- --set overrides <- flags."""
    raw: dict[str, str] = {}
    if args.params:
        path = Path(args.params)
        if not path.exists():
            raise ParameterError(f"parameter file not found: {path}")
        raw.update(model.parse_flat_file(path.read_text(), source=str(path)))
    for item in args.set or []:
        if "=" not in item:
            raise ParameterError(f"--set expects key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        raw[key] = value

    for key in raw:
        if key not in ALL_KEYS:
            raise ParameterError(f"unknown key {key!r}{model.suggest_key(key, ALL_KEYS)}")
    if int(raw.get("schema_version", "1")) != 1:
        raise ParameterError(f"unsupported schema_version {raw['schema_version']!r}")

    # physics starts from the reference set; any subset may be overridden
    phys_values = {}
    for key in model.PARAM_KEYS:
        if key in raw:
            try:
                phys_values[key] = float(raw[key])
            except ValueError:
                raise ParameterError(f"key {key!r}: cannot parse {raw[key]!r} as float") from None
    from dataclasses import replace as _replace

    params = _replace(model.reference_params(), **phys_values) if phys_values \
        else model.reference_params()

    values = {key: default for key, (_, default) in RUN_KEYS.items()}
    for key, text in raw.items():
        if key in RUN_KEYS:
            values[key] = _coerce(key, text)
    if args.seed is not None:
        values["seed"] = int(args.seed)
    if args.lanes is not None:
        values["lanes"] = int(args.lanes)
    if values["lanes"] is None:
        values["lanes"] = int(os.environ.get(LANES_ENV, "2"))

    return RunConfig(
        experiment=args.experiment,
        params=params,
        out_dir=Path(args.out),
        values=values,
    )


def _pump_grid(cfg: RunConfig, default_list: str):
    if cfg.values.get("pump_list"):
        return _parse_float_list(cfg.values["pump_list"], "pump_list")
    lo, hi, step = cfg.values.get("pump_min"), cfg.values.get("pump_max"), cfg.values.get("pump_step")
    if lo is not None and hi is not None and step is not None:
        if step <= 0 or hi <= lo:
            raise ParameterError("pump grid needs pump_min < pump_max and pump_step > 0")
        return np.arange(lo, hi + 0.5 * step, step)
    return _parse_float_list(default_list, "pump_list")


def _echo_text(cfg: RunConfig) -> str:
    lines = [model.dump_params(cfg.params).rstrip()]
    for key in RUN_KEYS:
        value = cfg.values.get(key)
        if value is None:
            continue
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _write_manifest(cfg: RunConfig, artifacts, extra=None):
    manifest = {
        "version": __version__,
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "lanes": cfg.lanes,
        "params_hash": model.params_hash(cfg.params),
        "params": {k: getattr(cfg.params, k) for k in model.PARAM_KEYS},
        "artifacts": sorted(artifacts),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if extra:
        manifest.update(extra)
    with open(cfg.out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------


def _run_trajectory(cfg: RunConfig):
    p = cfg.params
    integ = sde.IntegratorConfig(dt=cfg.get("dt", 2e-4), seed=cfg.seed,
                                 record_stride=int(cfg.values["record_stride"]))
    pump = cfg.values["P_over_P0"] * transparency_pump(p)
    n_steps = int(cfg.values["n_steps"])
    duration = n_steps * integ.dt
    from .ensemble import initial_condition

    state = initial_condition("paper-phase-aligned", p, pump, integ_cfg=integ)
    rec = sde.integrate(state, PumpSchedule.constant(pump, duration), p, integ,
                        rng=sde.trajectory_stream(cfg.seed, 0))
    out = cfg.out_dir / "trajectory.csv"
    rec.to_csv(out, params_digest=model.params_hash(p), seed=cfg.seed)
    return [out.name], {"n_steps": n_steps, "rows": int(rec.t.size)}


def _run_bifurcation(cfg: RunConfig):
    pumps = _pump_grid(cfg, DEFAULT_BIFURCATION_PUMPS)
    integ = sde.IntegratorConfig(dt=cfg.get("dt", experiments.BIFURCATION_DT), noiseless=True)
    sweep = experiments.bifurcation_scan(
        pumps, cfg.params, integ_cfg=integ,
        t_transient=cfg.get("t_transient", 300.0),
        t_window=cfg.get("t_window", 30.0),
    )
    sweep.to_csv(cfg.out_dir / "bifurcation.csv")
    sweep.to_json(cfg.out_dir / "bifurcation.json")
    return ["bifurcation.csv", "bifurcation.json"], {"figure": "1b"}


def _run_stationary(cfg: RunConfig):
    pumps = _pump_grid(cfg, "5.99,6.000,6.008,6.014,6.020,6.026,6.032,6.038,6.046,6.056,6.068")
    betas = (_parse_float_list(cfg.values["beta_list"], "beta_list")
             if cfg.values.get("beta_list") else [cfg.params.beta])
    integ = sde.IntegratorConfig(dt=cfg.get("dt", experiments.SCAN_DT))
    sweeps = experiments.stationary_scan(
        pumps, betas, int(cfg.get("n_traj", 100)), cfg.params, integ_cfg=integ,
        t_transient=cfg.get("t_transient", 10.0), t_window=cfg.get("t_window", 25.0),
        master_seed=cfg.seed, lanes=cfg.lanes,
    )
    artifacts = []
    for sweep in sweeps:
        tag = f"beta_{sweep.meta['beta']:.6g}".replace(".", "p").replace("-", "m")
        name = f"stationary_{tag}.csv"
        sweep.to_csv(cfg.out_dir / name)
        artifacts.append(name)
    return artifacts, {"figure": "1e-1f", "betas": [float(b) for b in betas]}


def _run_ramp(cfg: RunConfig):
    p = cfg.params
    P0 = transparency_pump(p)
    ramp = PumpSchedule.ramp(cfg.values["ramp_start"] * P0, cfg.values["ramp_end"] * P0,
                             cfg.values["ramp_duration"])
    integ = sde.IntegratorConfig(dt=cfg.get("dt", experiments.SCAN_DT))
    result = experiments.ramp_experiment(
        ramp, int(cfg.get("n_traj", 10_000)), p,
        detector_bandwidth=cfg.values["detector_bandwidth"],
        bin_width=cfg.values["bin_width"], integ_cfg=integ,
        master_seed=cfg.seed, lanes=cfg.lanes, keep_samples=False,
    )
    result.to_csv(cfg.out_dir / "ramp.csv")
    result.to_json(cfg.out_dir / "ramp.json")
    return ["ramp.csv", "ramp.json"], {"figure": "2"}


def _run_beta_sweep(cfg: RunConfig):
    pumps = _pump_grid(cfg, "6.000,6.008,6.014,6.020,6.026,6.032,6.038,6.046")
    betas = (_parse_float_list(cfg.values["beta_list"], "beta_list")
             if cfg.values.get("beta_list") else _parse_float_list(DEFAULT_BETA_LIST, "beta_list"))
    integ = sde.IntegratorConfig(dt=cfg.get("dt", experiments.SCAN_DT))
    sweep = experiments.beta_sweep(
        betas, pumps, int(cfg.get("n_traj", 48)), cfg.params, integ_cfg=integ,
        master_seed=cfg.seed, lanes=cfg.lanes,
        t_transient=cfg.get("t_transient", 10.0), t_window=cfg.get("t_window", 25.0),
    )
    sweep.to_csv(cfg.out_dir / "beta_sweep.csv")
    sweep.to_json(cfg.out_dir / "beta_sweep.json")
    return ["beta_sweep.csv", "beta_sweep.json"], {"figure": "4"}


_DRIVERS = {
    "trajectory": _run_trajectory,
    "bifurcation": _run_bifurcation,
    "stationary": _run_stationary,
    "ramp": _run_ramp,
    "beta-sweep": _run_beta_sweep,
}


def run(cfg: RunConfig) -> int:
    """Execute the configured driver and write its artifacts."""
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    echo = cfg.out_dir / "resolved_params.txt"
    echo.write_text(_echo_text(cfg))
    try:
        artifacts, extra = _DRIVERS[cfg.experiment](cfg)
    except Exception as exc:  # structured failure report
        report = {"experiment": cfg.experiment, "error": type(exc).__name__, "message": str(exc)}
        with open(cfg.out_dir / "error.json", "w") as fh:
            json.dump(report, fh, indent=2)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_manifest(cfg, list(artifacts) + [echo.name], extra)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimerlaser",
        description="Coupled-nanolaser Langevin simulations and statistics",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} driver")
        sp.add_argument("--params", help="flat key=value parameter file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
        sp.add_argument("--seed", type=int, help="master seed (overrides config)")
        sp.add_argument("--out", default="runs/latest", help="output directory")
        sp.add_argument("--lanes", type=int, help="worker lanes (overrides config)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
