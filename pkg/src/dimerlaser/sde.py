"""Stochastic integration of the coupled-cavity Langevin equations.

Noise model: complex white noise on each cavity field with
<F_a(t) F_a*(t')> = R_sp delta(t - t'), R_sp = beta F_P B n^2 / V_a, and no
noise on the carriers.  Per step the Ito increment is
dW = sqrt(R_sp dt / 2) (xi_re + i xi_im) with independent standard normals,
so <|dW|^2> = R_sp dt and <dW^2> = 0.

Integration scheme
------------------
The fields rotate at up to |K| + alpha*kappa (thousands of rad/ns for a
strongly coupled pair), so a plain explicit Euler update of the field pair
is unconditionally unstable at any step size that resolves the dynamics:
|1 + i*omega*dt| > 1 acts as spurious gain of order omega^2 dt / 2 per unit
time, which overwhelms kappa.  All "exp" schemes therefore advance the
fields with the exact matrix exponential of the 2x2 linear block (loss,
coupling, gain) and add the Ito noise increment afterwards; the carriers
advance deterministically with the field intensities trapezoided over the
step.

The default "exp-heun-maruyama" scheme re-evaluates the gain at a
predicted end-of-step carrier value and propagates with the averaged gain
(one predictor/corrector pass).  The time-centring matters: the
bonding/antibonding switching point is set by a parametric carrier-gain
ripple at the beat frequency 2K, and any scheme that samples the gain
one-sidedly lags that ripple by ~K*dt radians, which displaces the
bifurcation window by many times its own width at practical step sizes.
"exp-euler-maruyama" (start-of-step gain) and plain "euler-maruyama" are
kept for step-size and stability demonstrations.  All variants carry
weak-order-1 Euler-Maruyama noise.

Randomness: each trajectory owns a counter-based Philox stream keyed by
(master seed, trajectory index), so serial, chunked and parallel runs
consume identical per-trajectory noise sequences.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .model import (
    CavityState,
    ParameterError,
    PhysicalParams,
    PumpSchedule,
    spontaneous_rate,
)

SCHEMES = ("exp-heun-maruyama", "exp-euler-maruyama", "euler-maruyama")

#: steps per pre-drawn noise chunk; value sequence is chunking-invariant
NOISE_CHUNK = 256

#: default stability guard: dt * kappa must not exceed this
DT_KAPPA_GUARD = 0.1


class IntegrationError(RuntimeError):
    """Non-finite state encountered; carries the failure time and lane indices."""

    def __init__(self, message: str, t_fail: float, lanes=()):
        super().__init__(message)
        self.t_fail = t_fail
        self.lanes = tuple(lanes)


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, scheme, seed and recording cadence for one integration."""

    dt: float = 2e-4
    scheme: str = "exp-heun-maruyama"
    seed: int = 0
    record_stride: int = 1
    noiseless: bool = False
    allow_large_dt: bool = False

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ParameterError(f"dt must be > 0, got {self.dt}")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.record_stride < 1:
            raise ParameterError("record_stride must be >= 1")

    def check_stability(self, p: PhysicalParams):
        if not self.allow_large_dt and self.dt * p.kappa > DT_KAPPA_GUARD:
            raise ParameterError(
                f"dt*kappa = {self.dt * p.kappa:.3g} exceeds the stability guard "
                f"{DT_KAPPA_GUARD}; shrink dt or set allow_large_dt=True"
            )


@dataclass
class TrajectoryRecord:
    """Uniformly sampled trajectory: fields, carriers and diagnostics."""

    t: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    clamp_count: int
    dt: float
    record_stride: int

    def __post_init__(self):
        spacing = np.diff(self.t)
        if spacing.size and not np.all(spacing > 0.0):
            raise ParameterError("time grid must be strictly increasing")

    @property
    def I1(self) -> np.ndarray:
        return self.a1.real**2 + self.a1.imag**2

    @property
    def I2(self) -> np.ndarray:
        return self.a2.real**2 + self.a2.imag**2

    def mode_intensities(self) -> tuple[np.ndarray, np.ndarray]:
        from .model import mode_intensities

        return mode_intensities(self.a1, self.a2)

    def imbalance(self) -> np.ndarray:
        I_B, I_A = self.mode_intensities()
        return (I_B - I_A) / (I_B + I_A)

    def final_state(self) -> CavityState:
        return CavityState(
            a1=complex(self.a1[-1]),
            a2=complex(self.a2[-1]),
            n1=float(self.n1[-1]),
            n2=float(self.n2[-1]),
            t=float(self.t[-1]),
        )

    def to_csv(self, path, params_digest: str = "", seed: int | None = None):
        """Dump t, Re/Im of both fields and the carriers as CSV.

        Header comments carry the parameter digest and seed so a dump is
        traceable to the run that produced it.
        """
        with open(path, "w") as fh:
            if params_digest:
                fh.write(f"# params_hash={params_digest}\n")
            if seed is not None:
                fh.write(f"# seed={seed}\n")
            fh.write("t,re_a1,im_a1,re_a2,im_a2,n1,n2\n")
            for k in range(self.t.size):
                row = (self.t[k], self.a1[k].real, self.a1[k].imag,
                       self.a2[k].real, self.a2[k].imag, self.n1[k], self.n2[k])
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def trajectory_stream(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based random stream for one trajectory of one run."""
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def noise_increment(s: CavityState, dt: float, p: PhysicalParams, rng: np.random.Generator):
    """One Ito field-noise increment pair (dW1, dW2) for the state ``s``.

    Draw order is (re1, im1, re2, im2), matching the vectorised propagator.
    """
    xi = rng.standard_normal(4)
    amp1 = math.sqrt(spontaneous_rate(s.n1, p) * dt / 2.0)
    amp2 = math.sqrt(spontaneous_rate(s.n2, p) * dt / 2.0)
    return amp1 * (xi[0] + 1j * xi[1]), amp2 * (xi[2] + 1j * xi[3])


# ---------------------------------------------------------------------------
# vectorised propagation over a block of trajectories
# ---------------------------------------------------------------------------

#: observables that can be recorded or reduced per tick
CHANNELS = ("a1", "a2", "n1", "n2", "I1", "I2", "I_B", "I_A", "I_tot", "x", "A")

#: channels reduced (sum and sum of squares across the block) when reduce=True
REDUCE_CHANNELS = ("I1", "I2", "I_B", "I_A", "I_tot", "x", "A")


@dataclass
class PropagationResult:
    """Output of one vectorised block propagation."""

    t: np.ndarray                      # (n_rec,)
    channels: dict                     # name -> (m, n_rec) arrays
    sums: dict                         # name -> (n_rec,) sum over block
    sumsq: dict                        # name -> (n_rec,) sum of squares
    cross: dict                        # "IB_IA", "Itot_x" -> (n_rec,)
    clamp_counts: np.ndarray           # (m,)
    final: tuple                       # (a1, a2, n1, n2) arrays at the end


def _channel_values(name, a1, a2, n1, n2, scratch):
    if name == "a1":
        return a1
    if name == "a2":
        return a2
    if name == "n1":
        return n1
    if name == "n2":
        return n2
    return scratch[name]


def _modal_scratch(a1, a2):
    """Per-tick derived observables for a block of field pairs.

    Uses the same modal-transform arithmetic as model.mode_intensities so
    recorded channels match values recomputed from dumped trajectories bit
    for bit.
    """
    from .model import mode_intensities

    I1 = a1.real**2 + a1.imag**2
    I2 = a2.real**2 + a2.imag**2
    I_B, I_A = mode_intensities(a1, a2)
    I_tot = I_B + I_A
    with np.errstate(invalid="ignore", divide="ignore"):
        x = np.where(I_tot > 0.0, (I_B - I_A) / np.where(I_tot > 0.0, I_tot, 1.0), 0.0)
    A = np.sqrt(np.clip(1.0 - x * x, 0.0, 1.0))
    return {"I1": I1, "I2": I2, "I_B": I_B, "I_A": I_A, "I_tot": I_tot, "x": x, "A": A}


# ---------------------------------------------------------------------------
# compiled stepping kernels (one per scheme, shared closed-form exponential)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True, inline="always")
def _exp_entries(G1, G2, kappa, alpha, d, dsq, dt):
    """Entries of exp(M dt) for the frozen linear block [[c1, d], [d, c2]]."""
    c1 = complex(0.5 * G1 - kappa, 0.5 * alpha * G1)
    c2 = complex(0.5 * G2 - kappa, 0.5 * alpha * G2)
    cbar = 0.5 * (c1 + c2)
    delta = 0.5 * (c1 - c2)
    mu = cmath.sqrt(delta * delta + dsq)
    ep = cmath.exp((cbar + mu) * dt)
    em = cmath.exp((cbar - mu) * dt)
    half_sum = 0.5 * (ep + em)
    if abs(mu) * dt < 1e-10:
        sinhc = cmath.exp(cbar * dt) * dt
    else:
        sinhc = 0.5 * (ep - em) / mu
    return half_sum + delta * sinhc, d * sinhc, half_sum - delta * sinhc


@njit(cache=True, nogil=True)
def _advance_heun(a1, a2, n1, n2, I1, I2, pump_t, pump_lane, noise, use_noise,
                  dt, kappa, alpha, g_coef, gamma_tot, n0, rsp_coef, d, clamp):
    dsq = d * d
    for k in range(pump_t.shape[0]):
        for i in range(a1.shape[0]):
            P = pump_t[k] + pump_lane[i]
            G1 = g_coef * (n1[i] - n0)
            G2 = g_coef * (n2[i] - n0)
            A11, A12, A22 = _exp_entries(G1, G2, kappa, alpha, d, dsq, dt)
            b1 = A11 * a1[i] + A12 * a2[i]
            b2 = A12 * a1[i] + A22 * a2[i]
            J1 = b1.real * b1.real + b1.imag * b1.imag
            J2 = b2.real * b2.real + b2.imag * b2.imag
            n1_pred = n1[i] + dt * (P - gamma_tot * n1[i] - G1 * 0.5 * (I1[i] + J1))
            n2_pred = n2[i] + dt * (P - gamma_tot * n2[i] - G2 * 0.5 * (I2[i] + J2))
            H1 = g_coef * (n1_pred - n0)
            H2 = g_coef * (n2_pred - n0)
            A11, A12, A22 = _exp_entries(0.5 * (G1 + H1), 0.5 * (G2 + H2),
                                         kappa, alpha, d, dsq, dt)
            c1 = A11 * a1[i] + A12 * a2[i]
            c2 = A12 * a1[i] + A22 * a2[i]
            K1 = c1.real * c1.real + c1.imag * c1.imag
            K2 = c2.real * c2.real + c2.imag * c2.imag
            n1_new = n1[i] + dt * (P - gamma_tot * 0.5 * (n1[i] + n1_pred)
                                   - 0.5 * (G1 * I1[i] + H1 * K1))
            n2_new = n2[i] + dt * (P - gamma_tot * 0.5 * (n2[i] + n2_pred)
                                   - 0.5 * (G2 * I2[i] + H2 * K2))
            if use_noise:
                amp1 = math.sqrt(rsp_coef * n1[i] * n1[i] * dt * 0.5)
                amp2 = math.sqrt(rsp_coef * n2[i] * n2[i] * dt * 0.5)
                c1 = c1 + amp1 * complex(noise[i, k, 0], noise[i, k, 1])
                c2 = c2 + amp2 * complex(noise[i, k, 2], noise[i, k, 3])
                K1 = c1.real * c1.real + c1.imag * c1.imag
                K2 = c2.real * c2.real + c2.imag * c2.imag
            if n1_new < 0.0:
                n1_new = 0.0
                clamp[i] += 1
            if n2_new < 0.0:
                n2_new = 0.0
                clamp[i] += 1
            a1[i] = c1
            a2[i] = c2
            n1[i] = n1_new
            n2[i] = n2_new
            I1[i] = K1
            I2[i] = K2


@njit(cache=True, nogil=True)
def _advance_exp_euler(a1, a2, n1, n2, I1, I2, pump_t, pump_lane, noise, use_noise,
                       dt, kappa, alpha, g_coef, gamma_tot, n0, rsp_coef, d, clamp):
    dsq = d * d
    for k in range(pump_t.shape[0]):
        for i in range(a1.shape[0]):
            P = pump_t[k] + pump_lane[i]
            G1 = g_coef * (n1[i] - n0)
            G2 = g_coef * (n2[i] - n0)
            A11, A12, A22 = _exp_entries(G1, G2, kappa, alpha, d, dsq, dt)
            c1 = A11 * a1[i] + A12 * a2[i]
            c2 = A12 * a1[i] + A22 * a2[i]
            K1 = c1.real * c1.real + c1.imag * c1.imag
            K2 = c2.real * c2.real + c2.imag * c2.imag
            # trapezoid the fast-beating intensity in the carrier drive
            n1_new = n1[i] + dt * (P - gamma_tot * n1[i] - G1 * 0.5 * (I1[i] + K1))
            n2_new = n2[i] + dt * (P - gamma_tot * n2[i] - G2 * 0.5 * (I2[i] + K2))
            if use_noise:
                amp1 = math.sqrt(rsp_coef * n1[i] * n1[i] * dt * 0.5)
                amp2 = math.sqrt(rsp_coef * n2[i] * n2[i] * dt * 0.5)
                c1 = c1 + amp1 * complex(noise[i, k, 0], noise[i, k, 1])
                c2 = c2 + amp2 * complex(noise[i, k, 2], noise[i, k, 3])
                K1 = c1.real * c1.real + c1.imag * c1.imag
                K2 = c2.real * c2.real + c2.imag * c2.imag
            if n1_new < 0.0:
                n1_new = 0.0
                clamp[i] += 1
            if n2_new < 0.0:
                n2_new = 0.0
                clamp[i] += 1
            a1[i] = c1
            a2[i] = c2
            n1[i] = n1_new
            n2[i] = n2_new
            I1[i] = K1
            I2[i] = K2


@njit(cache=True, nogil=True)
def _advance_euler(a1, a2, n1, n2, I1, I2, pump_t, pump_lane, noise, use_noise,
                   dt, kappa, alpha, g_coef, gamma_tot, n0, rsp_coef, d, clamp):
    for k in range(pump_t.shape[0]):
        for i in range(a1.shape[0]):
            P = pump_t[k] + pump_lane[i]
            G1 = g_coef * (n1[i] - n0)
            G2 = g_coef * (n2[i] - n0)
            c1 = a1[i] + dt * ((complex(0.5 * G1 - kappa, 0.5 * alpha * G1)) * a1[i] + d * a2[i])
            c2 = a2[i] + dt * ((complex(0.5 * G2 - kappa, 0.5 * alpha * G2)) * a2[i] + d * a1[i])
            n1_new = n1[i] + dt * (P - gamma_tot * n1[i] - G1 * I1[i])
            n2_new = n2[i] + dt * (P - gamma_tot * n2[i] - G2 * I2[i])
            if use_noise:
                amp1 = math.sqrt(rsp_coef * n1[i] * n1[i] * dt * 0.5)
                amp2 = math.sqrt(rsp_coef * n2[i] * n2[i] * dt * 0.5)
                c1 = c1 + amp1 * complex(noise[i, k, 0], noise[i, k, 1])
                c2 = c2 + amp2 * complex(noise[i, k, 2], noise[i, k, 3])
            if n1_new < 0.0:
                n1_new = 0.0
                clamp[i] += 1
            if n2_new < 0.0:
                n2_new = 0.0
                clamp[i] += 1
            a1[i] = c1
            a2[i] = c2
            n1[i] = n1_new
            n2[i] = n2_new
            I1[i] = c1.real * c1.real + c1.imag * c1.imag
            I2[i] = c2.real * c2.real + c2.imag * c2.imag


_KERNELS = {
    "exp-heun-maruyama": _advance_heun,
    "exp-euler-maruyama": _advance_exp_euler,
    "euler-maruyama": _advance_euler,
}


def propagate(
    a1,
    a2,
    n1,
    n2,
    t0: float,
    pump,
    p: PhysicalParams,
    cfg: IntegratorConfig,
    streams,
    n_steps: int,
    channels=(),
    reduce: bool = False,
) -> PropagationResult:
    """Advance a block of trajectories ``n_steps`` steps, recording every stride.

    ``pump`` is a scalar, an (m,) array of per-lane constants, or a callable
    t -> pump.  ``streams`` is one Generator per trajectory (ignored when
    cfg.noiseless).  Recording happens before stepping at tick indices
    0, stride, 2*stride, ...; n_steps must be a multiple of the stride so
    the final state is on the grid.
    """
    cfg.check_stability(p)
    stride = cfg.record_stride
    if n_steps < 1 or n_steps % stride:
        raise ParameterError(f"n_steps={n_steps} must be a positive multiple of record_stride={stride}")
    for name in channels:
        if name not in CHANNELS:
            raise ParameterError(f"unknown channel {name!r}")

    a1 = np.array(a1, dtype=np.complex128, copy=True)
    a2 = np.array(a2, dtype=np.complex128, copy=True)
    n1 = np.array(n1, dtype=np.float64, copy=True)
    n2 = np.array(n2, dtype=np.float64, copy=True)
    m = a1.shape[0]

    dt = cfg.dt
    kernel = _KERNELS[cfg.scheme]
    rsp_coef = 0.0 if cfg.noiseless else p.spontaneous_coefficient
    noisy = rsp_coef > 0.0
    if noisy and len(streams) != m:
        raise ParameterError(f"need one random stream per trajectory ({m}), got {len(streams)}")

    # split the pump into a per-step time part and a per-lane constant part
    if callable(pump):
        mid_times = t0 + (np.arange(n_steps) + 0.5) * dt
        pump_t = np.asarray(pump(mid_times), dtype=np.float64)
        pump_lane = np.zeros(m)
    else:
        pump_arr = np.asarray(pump, dtype=np.float64)
        if pump_arr.ndim == 0:
            pump_t = np.full(n_steps, float(pump_arr))
            pump_lane = np.zeros(m)
        else:
            if pump_arr.shape != (m,):
                raise ParameterError(f"per-lane pump must have shape ({m},)")
            pump_t = np.zeros(n_steps)
            pump_lane = pump_arr.copy()
    if np.any(pump_t + pump_lane.min() < 0.0):
        raise ParameterError("pump must be >= 0 over the whole run")

    n_rec = n_steps // stride + 1
    t_rec = t0 + dt * stride * np.arange(n_rec)
    rec = {name: np.empty((m, n_rec), dtype=np.complex128 if name in ("a1", "a2") else np.float64)
           for name in channels}
    sums = {name: np.zeros(n_rec) for name in (REDUCE_CHANNELS if reduce else ())}
    sumsq = {name: np.zeros(n_rec) for name in (REDUCE_CHANNELS if reduce else ())}
    cross = {name: np.zeros(n_rec) for name in (("IB_IA", "Itot_x") if reduce else ())}
    clamp_counts = np.zeros(m, dtype=np.int64)

    need_scratch = reduce or any(name not in ("a1", "a2", "n1", "n2") for name in channels)

    def record(tick):
        scratch = _modal_scratch(a1, a2) if need_scratch else None
        for name in channels:
            rec[name][:, tick] = _channel_values(name, a1, a2, n1, n2, scratch)
        if reduce:
            for name in REDUCE_CHANNELS:
                vals = scratch[name]
                sums[name][tick] = vals.sum()
                sumsq[name][tick] = (vals * vals).sum()
            cross["IB_IA"][tick] = (scratch["I_B"] * scratch["I_A"]).sum()
            cross["Itot_x"][tick] = (scratch["I_tot"] * scratch["x"]).sum()

    def check_finite(t_now):
        ok = np.isfinite(a1) & np.isfinite(a2) & np.isfinite(n1) & np.isfinite(n2)
        if not ok.all():
            raise IntegrationError(f"non-finite state at t={t_now:.6g} ns", t_now,
                                   np.nonzero(~ok)[0])

    record(0)
    I1_cur = a1.real**2 + a1.imag**2
    I2_cur = a2.real**2 + a2.imag**2
    dummy_noise = np.zeros((1, 1, 4))
    noise_buf = None
    chunk_start = 0
    step_idx = 0
    kernel_args = (dt, p.kappa, p.alpha, p.gamma_par * p.beta, p.gamma_tot,
                   p.n0, rsp_coef, p.gamma_c + 1j * p.K, clamp_counts)

    while step_idx < n_steps:
        if noisy:
            if noise_buf is None or step_idx - chunk_start >= noise_buf.shape[1]:
                span_chunk = min(NOISE_CHUNK, n_steps - step_idx)
                noise_buf = np.empty((m, span_chunk, 4))
                for i, stream in enumerate(streams):
                    noise_buf[i] = stream.standard_normal((span_chunk, 4))
                chunk_start = step_idx
                check_finite(t0 + step_idx * dt)
            next_chunk = chunk_start + noise_buf.shape[1]
        else:
            next_chunk = n_steps
        next_tick = (step_idx // stride + 1) * stride
        span = min(next_tick, next_chunk, n_steps) - step_idx
        if noisy:
            off = step_idx - chunk_start
            xi = noise_buf[:, off:off + span, :]
        else:
            xi = dummy_noise
        kernel(a1, a2, n1, n2, I1_cur, I2_cur,
               pump_t[step_idx:step_idx + span], pump_lane, xi, noisy, *kernel_args)
        step_idx += span
        if step_idx % stride == 0:
            record(step_idx // stride)

    check_finite(t0 + n_steps * dt)

    return PropagationResult(
        t=t_rec,
        channels=rec,
        sums=sums,
        sumsq=sumsq,
        cross=cross,
        clamp_counts=clamp_counts,
        final=(a1, a2, n1, n2),
    )


# ---------------------------------------------------------------------------
# single-trajectory interface
# ---------------------------------------------------------------------------


def step(s: CavityState, P: float, p: PhysicalParams, cfg: IntegratorConfig,
         rng: np.random.Generator) -> CavityState:
    """Advance one state by one step (same arithmetic as the block propagator)."""
    one = replace(cfg, record_stride=1)
    streams = [] if cfg.noiseless else [rng]
    out = propagate(
        np.array([s.a1]), np.array([s.a2]), np.array([s.n1]), np.array([s.n2]),
        s.t, float(P), p, one, streams, 1, channels=("a1", "a2", "n1", "n2"),
    )
    a1f, a2f, n1f, n2f = out.final
    return CavityState(a1=complex(a1f[0]), a2=complex(a2f[0]),
                       n1=float(n1f[0]), n2=float(n2f[0]), t=s.t + cfg.dt)


def n_steps_for(duration: float, cfg: IntegratorConfig) -> int:
    """Step count for a duration, rounded to a multiple of the record stride."""
    raw = max(1, round(duration / cfg.dt))
    stride = cfg.record_stride
    return max(stride, round(raw / stride) * stride)


def integrate(
    initial: CavityState,
    schedule: PumpSchedule,
    p: PhysicalParams,
    cfg: IntegratorConfig,
    rng: np.random.Generator | None = None,
) -> TrajectoryRecord:
    """Integrate one trajectory over the schedule's duration.

    Deterministic given (cfg.seed, cfg, p, schedule); when ``rng`` is omitted
    it is derived from cfg.seed as trajectory index 0.  The effective
    duration is rounded to a whole number of recorded intervals.
    """
    if schedule.duration < cfg.dt:
        raise ParameterError("schedule duration must be at least one step")
    if rng is None:
        rng = trajectory_stream(cfg.seed, 0)
    n_steps = n_steps_for(schedule.duration, cfg)
    pump = schedule.P_start if schedule.kind == "constant" else schedule.pump_at
    out = propagate(
        np.array([initial.a1]), np.array([initial.a2]),
        np.array([initial.n1]), np.array([initial.n2]),
        initial.t, pump, p, cfg, [rng], n_steps,
        channels=("a1", "a2", "n1", "n2"),
    )
    return TrajectoryRecord(
        t=out.t,
        a1=out.channels["a1"][0],
        a2=out.channels["a2"][0],
        n1=out.channels["n1"][0],
        n2=out.channels["n2"][0],
        clamp_count=int(out.clamp_counts[0]),
        dt=cfg.dt,
        record_stride=cfg.record_stride,
    )
