"""Trajectory ensembles: initial-condition policies, parallel runs, reductions.

A run integrates n_traj independent trajectories from a shared initial
state, each with its own counter-based noise stream keyed by
(master seed, trajectory index).  Trajectories are grouped into fixed-size
blocks whose layout depends only on n_traj and block_size, never on the
lane count; per-tick reductions accumulate block results in block order,
so any number of worker lanes reproduces the single-lane output bit for
bit.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import sde
from .model import (
    CavityState,
    ParameterError,
    PhysicalParams,
    PumpSchedule,
    mode_intensities,
    symmetric_fixed_point,
)
from .stats import MomentAccumulator

INIT_POLICIES = ("paper-phase-aligned", "fixed-state", "relaxed-steady-state")
REDUCTIONS = ("moments-only", "full-samples")

#: default observables retained in full-samples mode
SAMPLE_CHANNELS = ("I_B", "I_A", "I_tot", "x")

#: relaxation used to land on the noiseless operating state, in ns; near the
#: switching window the orbit convergence rates are tiny, so this is long
RELAX_DURATION = 300.0

#: imbalance angle of the relaxation seed (photon max in cavity 1)
RELAX_SEED_THETA = math.pi / 8


class EnsembleIntegrationError(RuntimeError):
    """One or more trajectories diverged; carries their indices."""

    def __init__(self, failures):
        self.failures = tuple(failures)
        super().__init__(f"integration failed for trajectories {self.failures}")


@dataclass(frozen=True)
class EnsembleConfig:
    """Ensemble size, seeding, initial-condition policy and reduction mode."""

    n_traj: int = 100
    master_seed: int = 0
    init_policy: str = "paper-phase-aligned"
    init_state: CavityState | None = None
    reduction: str = "moments-only"
    lanes: int = 1
    block_size: int = 256

    def __post_init__(self):
        if self.n_traj < 1:
            raise ParameterError("n_traj must be >= 1")
        if self.init_policy not in INIT_POLICIES:
            raise ParameterError(f"init_policy must be one of {INIT_POLICIES}")
        if self.reduction not in REDUCTIONS:
            raise ParameterError(f"reduction must be one of {REDUCTIONS}")
        if self.lanes < 1 or self.block_size < 1:
            raise ParameterError("lanes and block_size must be >= 1")


@dataclass
class EnsembleResult:
    """Time-gridded reductions (and optionally retained samples) of a run."""

    t: np.ndarray
    n_traj: int
    sums: dict
    sumsq: dict
    cross: dict
    samples: dict | None
    clamp_total: int
    master_seed: int

    def mean(self, name: str) -> np.ndarray:
        return self.sums[name] / self.n_traj

    def var(self, name: str) -> np.ndarray:
        m = self.mean(name)
        return self.sumsq[name] / self.n_traj - m * m

    def window_accumulator(self, t_min: float = 0.0, t_max: float = math.inf) -> MomentAccumulator:
        """Pool the per-tick modal sums over a time window into one accumulator."""
        keep = (self.t >= t_min) & (self.t <= t_max)
        if not keep.any():
            raise ParameterError("empty reduction window")
        acc = MomentAccumulator()
        acc.count = int(keep.sum()) * self.n_traj
        for name in MomentAccumulator._FIRST:
            acc.s[name] = float(self.sums[name][keep].sum())
            acc.s[name + "2"] = float(self.sumsq[name][keep].sum())
        acc.s["IB_IA"] = float(self.cross["IB_IA"][keep].sum())
        acc.s["Itot_x"] = float(self.cross["Itot_x"][keep].sum())
        return acc

    def window_samples(self, name: str, t_min: float = 0.0, t_max: float = math.inf) -> np.ndarray:
        """Retained per-trajectory samples of one channel inside a window."""
        if self.samples is None or name not in self.samples:
            raise ParameterError(f"channel {name!r} was not retained")
        keep = (self.t >= t_min) & (self.t <= t_max)
        return self.samples[name][:, keep]

    def export_csv(self, path):
        """Per-time means and variances of the reduced observables."""
        names = list(self.sums)
        with open(path, "w") as fh:
            fh.write("t," + ",".join(f"mean_{n},var_{n}" for n in names) + "\n")
            means = {n: self.mean(n) for n in names}
            varis = {n: self.var(n) for n in names}
            for k in range(self.t.size):
                cells = [repr(float(self.t[k]))]
                for n in names:
                    cells.append(repr(float(means[n][k])))
                    cells.append(repr(float(varis[n][k])))
                fh.write(",".join(cells) + "\n")

    def export_json(self, path, config_echo: dict):
        payload = {
            "n_traj": self.n_traj,
            "master_seed": self.master_seed,
            "clamp_total": self.clamp_total,
            "t_start": float(self.t[0]),
            "t_end": float(self.t[-1]),
            "config": config_echo,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------


def _relax_to_operating_state(p: PhysicalParams, P: float, integ_cfg: sde.IntegratorConfig,
                              duration: float = RELAX_DURATION):
    """Noiseless relaxation from a cavity-1-heavy seed at pump P."""
    I_fp, n_fp = symmetric_fixed_point(P, p)
    if I_fp <= 0.0:
        # below threshold: the zero-field carrier balance is the fixed point
        return np.array([0j]), np.array([0j]), np.array([P / p.gamma_tot]), np.array([P / p.gamma_tot])
    ratio = math.tan(RELAX_SEED_THETA / 2.0) ** 2
    I1 = I_fp / (1.0 + ratio)
    I2 = I_fp * ratio / (1.0 + ratio)
    cfg = replace(integ_cfg, noiseless=True, record_stride=1)
    out = sde.propagate(
        np.array([math.sqrt(I1) + 0j]), np.array([math.sqrt(I2) + 0j]),
        np.array([n_fp]), np.array([n_fp]),
        0.0, P, p, cfg, [], sde.n_steps_for(duration, cfg),
    )
    return out.final


def initial_condition(policy: str, p: PhysicalParams, P: float,
                      rng: np.random.Generator | None = None,
                      state: CavityState | None = None,
                      integ_cfg: sde.IntegratorConfig | None = None) -> CavityState:
    """Shared starting state for an ensemble at pump P.

    "paper-phase-aligned" relaxes the noiseless system at pump P and
    rebuilds the landed orbit at its cavity-1 intensity maximum: both
    fields real, so the relative phase is exactly 0 (or pi when the
    antibonding mode dominates) and theta <= pi/2.  "relaxed-steady-state"
    returns the relaxation endpoint unchanged.  "fixed-state" returns the
    supplied state.  All policies are deterministic; rng is accepted for
    signature uniformity and left untouched.
    """
    if policy not in INIT_POLICIES:
        raise ParameterError(f"unknown init policy {policy!r}")
    if policy == "fixed-state":
        if state is None:
            raise ParameterError("fixed-state policy requires a state")
        return state
    cfg = integ_cfg or sde.IntegratorConfig()
    a1, a2, n1, n2 = _relax_to_operating_state(p, P, cfg)
    if policy == "relaxed-steady-state":
        return CavityState(a1=complex(a1[0]), a2=complex(a2[0]),
                           n1=float(n1[0]), n2=float(n2[0]), t=0.0)
    I_B, I_A = mode_intensities(complex(a1[0]), complex(a2[0]))
    n_mean = 0.5 * (float(n1[0]) + float(n2[0]))
    # field pair with the same modal intensities, phased for max I1:
    # a1 = (sqrt(I_B) + sqrt(I_A))/sqrt(2), a2 = (sqrt(I_B) - sqrt(I_A))/sqrt(2)
    rb = math.sqrt(max(I_B, 0.0))
    ra = math.sqrt(max(I_A, 0.0))
    return CavityState(
        a1=complex((rb + ra) / math.sqrt(2.0)),
        a2=complex((rb - ra) / math.sqrt(2.0)),
        n1=n_mean, n2=n_mean, t=0.0,
    )


# ---------------------------------------------------------------------------
# ensemble execution
# ---------------------------------------------------------------------------


def _block_ranges(n_traj: int, block_size: int):
    return [(lo, min(lo + block_size, n_traj)) for lo in range(0, n_traj, block_size)]


def _run_block(lo, hi, state, schedule, p, integ_cfg, master_seed, channels, reduce):
    m = hi - lo
    streams = [] if integ_cfg.noiseless else [sde.trajectory_stream(master_seed, i)
                                              for i in range(lo, hi)]
    pump = schedule.P_start if schedule.kind == "constant" else schedule.pump_at
    n_steps = sde.n_steps_for(schedule.duration, integ_cfg)
    return sde.propagate(
        np.full(m, state.a1, dtype=np.complex128),
        np.full(m, state.a2, dtype=np.complex128),
        np.full(m, state.n1), np.full(m, state.n2),
        state.t, pump, p, integ_cfg, streams, n_steps,
        channels=channels, reduce=reduce,
    )


def run_ensemble(cfg: EnsembleConfig, schedule: PumpSchedule, p: PhysicalParams,
                 integ_cfg: sde.IntegratorConfig | None = None) -> EnsembleResult:
    """Integrate the ensemble and reduce it on the recording grid.

    The result is deterministic for a given master seed: trajectory i
    always consumes stream (master_seed, i), block layout is fixed by
    block_size, and block contributions merge in index order whatever the
    lane count.
    """
    integ_cfg = integ_cfg or sde.IntegratorConfig()
    state = initial_condition(cfg.init_policy, p, schedule.P_start,
                              state=cfg.init_state, integ_cfg=integ_cfg)
    retain = SAMPLE_CHANNELS if cfg.reduction == "full-samples" else ()
    ranges = _block_ranges(cfg.n_traj, cfg.block_size)

    def job(block):
        lo, hi = block
        try:
            return _run_block(lo, hi, state, schedule, p, integ_cfg,
                              cfg.master_seed, retain, True)
        except sde.IntegrationError as exc:
            return exc

    if cfg.lanes > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=cfg.lanes) as pool:
            outputs = list(pool.map(job, ranges))
    else:
        outputs = [job(block) for block in ranges]

    failures = []
    for out, (lo, _) in zip(outputs, ranges):
        if isinstance(out, sde.IntegrationError):
            failures.extend(lo + i for i in out.lanes)
    if failures:
        raise EnsembleIntegrationError(sorted(failures))

    first = outputs[0]
    sums = {name: first.sums[name].copy() for name in first.sums}
    sumsq = {name: first.sumsq[name].copy() for name in first.sumsq}
    cross = {name: first.cross[name].copy() for name in first.cross}
    clamp_total = int(first.clamp_counts.sum())
    for out in outputs[1:]:
        for name in sums:
            sums[name] += out.sums[name]
            sumsq[name] += out.sumsq[name]
        for name in cross:
            cross[name] += out.cross[name]
        clamp_total += int(out.clamp_counts.sum())

    samples = None
    if retain:
        samples = {name: np.concatenate([out.channels[name] for out in outputs], axis=0)
                   for name in retain}

    return EnsembleResult(
        t=first.t,
        n_traj=cfg.n_traj,
        sums=sums,
        sumsq=sumsq,
        cross=cross,
        samples=samples,
        clamp_total=clamp_total,
        master_seed=cfg.master_seed,
    )


# ---------------------------------------------------------------------------
# ensemble-average envelope decay
# ---------------------------------------------------------------------------


class EnvelopeFitError(RuntimeError):
    """Envelope demodulation produced no usable exponential fit."""


def envelope_decay(times, mean_trace, K: float, min_periods: int = 20) -> float:
    """Decay rate (GHz) of the beat envelope of an ensemble-averaged intensity.

    Demodulates the trace at the beat frequency K/pi (angular 2K), smooths
    over whole beat periods, and fits an exponential to the envelope.
    Returns 0.0 when the envelope change is below the fit's own noise
    floor.  Raises EnvelopeFitError when the envelope is too ragged for a
    meaningful fit.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(mean_trace, dtype=float)
    if t.size != v.size or t.size < 16:
        raise ValueError("times and trace must match and hold several periods")
    dt = t[1] - t[0]
    period = math.pi / K
    n_periods = (t[-1] - t[0]) / period
    if n_periods < min_periods:
        raise ValueError(f"trace spans {n_periods:.1f} beat periods; need >= {min_periods}")
    steps_per_period = period / dt
    if steps_per_period < 4.0:
        raise ValueError("trace too coarsely sampled for demodulation")

    z = v * np.exp(-2j * K * t)
    win = max(4, int(round(4 * steps_per_period)))
    kernel = np.ones(win) / win
    env = 2.0 * np.abs(np.convolve(z, kernel, mode="valid"))
    env_t = t[win - 1:]

    floor = max(env.max() * 0.15, 1e-300)
    usable = env > floor
    if usable.sum() < 8:
        raise EnvelopeFitError("envelope above the fit floor is too short")
    # fit only the leading usable stretch so a noise plateau cannot bias it
    stop = int(np.argmin(usable)) if not usable.all() else env.size
    stop = max(stop, 8)
    tt = env_t[:stop]
    yy = np.log(env[:stop])
    slope, intercept = np.polyfit(tt, yy, 1)
    resid = yy - (slope * tt + intercept)
    sigma = float(resid.std())
    if sigma > 0.5:
        raise EnvelopeFitError(f"envelope fit residual {sigma:.2f} too large")
    total_drop = yy[0] - yy[-1]
    if abs(total_drop) < 2.0 * sigma:
        return 0.0
    return float(max(-slope, 0.0))
