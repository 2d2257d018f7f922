"""Physical model of two evanescently coupled semiconductor nanolasers.

Two cavity fields a1, a2 (normalised so |a|^2 is the intracavity photon
number) and two carrier numbers n1, n2 obey

    da/dt = ((1 + i*alpha)/2 * G - kappa) a + (gamma_c + i*K) a_other + noise
    dn/dt = P - gamma_tot * n - G |a|^2

with gain G = gamma_par * beta * (n - n0).  The linear eigenmodes of the
coupled pair are the bonding mode a_B = (a1 + a2)/sqrt(2) and the
antibonding mode a_A = (a1 - a2)/sqrt(2); their population imbalance
x = (I_B - I_A)/(I_B + I_A) is the x-coordinate of the Bloch sphere and
A = sqrt(1 - x^2) is the amplitude of the mode-beating limit cycle.

Unit conventions: time in ns, every rate in GHz (1/ns), photon and carrier
variables dimensionless counts.  B_rec is in cm^3/s and V_a in cm^3; the
spontaneous emission rate is converted to GHz internally.
"""

from __future__ import annotations

import difflib
import hashlib
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

SQRT2 = math.sqrt(2.0)

#: tolerance below which |x| slightly above 1 is clamped rather than rejected
X_CLAMP_TOL = 1e-12

#: conversion from 1/s to GHz for the spontaneous rate B_rec/V_a term
_PER_SECOND_TO_GHZ = 1e-9


class ParameterError(ValueError):
    """Out-of-range physical parameter or malformed parameter file."""


class DegenerateStateError(ValueError):
    """Modal quantity undefined for the supplied state (zero total intensity)."""


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhysicalParams:
    """Rate-equation constants for the coupled cavity pair.

    Attributes
    ----------
    kappa : cavity field loss rate (GHz)
    alpha : Henry linewidth enhancement factor
    K : coupling frequency splitting (GHz); the bonding/antibonding
        splitting is 2K and the intensity beat period is pi/K
    gamma_c : coupling loss splitting (GHz)
    gamma_par : two-level radiative recombination rate (GHz)
    gamma_tot : total carrier recombination rate (GHz)
    beta : spontaneous emission factor, 0 < beta <= 1
    n0 : carrier number at transparency
    F_P : Purcell factor
    B_rec : bimolecular recombination rate (cm^3/s)
    V_a : active medium volume (cm^3)
    """

    kappa: float
    alpha: float
    K: float
    gamma_c: float
    gamma_par: float
    gamma_tot: float
    beta: float
    n0: float
    F_P: float
    B_rec: float
    V_a: float

    def __post_init__(self):
        for name in ("kappa", "K", "gamma_c", "gamma_par", "gamma_tot",
                     "n0", "F_P", "B_rec", "V_a"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ParameterError(f"{name} must be finite and > 0, got {value!r}")
        if not math.isfinite(self.alpha):
            raise ParameterError(f"alpha must be finite, got {self.alpha!r}")
        if not 0.0 < self.beta <= 1.0:
            raise ParameterError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not math.isfinite(self.I_sat) or self.I_sat <= 0.0:
            raise ParameterError("saturation photon number is not finite and positive")

    @property
    def I_sat(self) -> float:
        """Saturation photon number gamma_tot / (gamma_par * beta)."""
        return self.gamma_tot / (self.gamma_par * self.beta)

    @property
    def spontaneous_coefficient(self) -> float:
        """Prefactor of the spontaneous rate: R_sp = coeff * n^2, in GHz."""
        return self.beta * self.F_P * self.B_rec / self.V_a * _PER_SECOND_TO_GHZ


@dataclass(frozen=True)
class CavityState:
    """Instantaneous state: two complex fields, two carrier numbers, time (ns)."""

    a1: complex
    a2: complex
    n1: float
    n2: float
    t: float = 0.0

    def __post_init__(self):
        if self.n1 < 0.0 or self.n2 < 0.0:
            raise ParameterError(f"carrier numbers must be >= 0, got {self.n1}, {self.n2}")

    @property
    def I1(self) -> float:
        return abs(self.a1) ** 2

    @property
    def I2(self) -> float:
        return abs(self.a2) ** 2

    def swapped(self) -> "CavityState":
        """State with cavities 1 and 2 exchanged."""
        return CavityState(a1=self.a2, a2=self.a1, n1=self.n2, n2=self.n1, t=self.t)


@dataclass(frozen=True)
class ModalFrame:
    """Bonding/antibonding decomposition of a field pair.

    x is the mode population imbalance; theta and phi are the Bloch-sphere
    angles built from the cavity intensities and the cavity relative phase.
    """

    I_B: float
    I_A: float
    I_tot: float
    x: float
    theta: float
    phi: float


@dataclass(frozen=True)
class PumpSchedule:
    """Pump rate versus time: constant or a linear ramp over `duration` ns."""

    kind: str
    P_start: float
    P_end: float
    duration: float

    KINDS = ("constant", "linear-ramp")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParameterError(f"unknown schedule kind {self.kind!r}")
        if self.P_start < 0.0 or self.P_end < 0.0:
            raise ParameterError("pump rates must be >= 0")
        if self.duration <= 0.0:
            raise ParameterError("duration must be > 0")
        if self.kind == "constant" and self.P_start != self.P_end:
            raise ParameterError("constant schedule requires P_start == P_end")

    @classmethod
    def constant(cls, pump: float, duration: float) -> "PumpSchedule":
        return cls("constant", pump, pump, duration)

    @classmethod
    def ramp(cls, P_start: float, P_end: float, duration: float) -> "PumpSchedule":
        return cls("linear-ramp", P_start, P_end, duration)

    def pump_at(self, t):
        """Pump rate at time t (scalar or array); clamps beyond the ramp end."""
        if self.kind == "constant":
            return self.P_start if np.isscalar(t) else np.full_like(np.asarray(t, float), self.P_start)
        frac = np.clip(np.asarray(t, float) / self.duration, 0.0, 1.0)
        out = self.P_start + (self.P_end - self.P_start) * frac
        return float(out) if np.isscalar(t) else out


class StateDerivative(NamedTuple):
    da1: complex
    da2: complex
    dn1: float
    dn2: float


# ---------------------------------------------------------------------------
# closed-form operations
# ---------------------------------------------------------------------------


def gain(n, p: PhysicalParams):
    """Material gain gamma_par * beta * (n - n0); negative below transparency."""
    return p.gamma_par * p.beta * (n - p.n0)


def spontaneous_rate(n, p: PhysicalParams):
    """Spontaneous emission rate into the mode, beta*F_P*B_rec*n^2/V_a, in GHz."""
    return p.spontaneous_coefficient * n * n


def transparency_pump(p: PhysicalParams) -> float:
    """Pump P0 = gamma_tot * n0 sustaining transparency at zero field.

    All pump inputs elsewhere are expressed as the ratio P/P0.
    """
    return p.gamma_tot * p.n0


def drift(s: CavityState, P: float, p: PhysicalParams) -> StateDerivative:
    """Deterministic part of the equations of motion at state ``s`` and pump ``P``."""
    G1 = gain(s.n1, p)
    G2 = gain(s.n2, p)
    coupling = p.gamma_c + 1j * p.K
    da1 = (0.5 * (1.0 + 1j * p.alpha) * G1 - p.kappa) * s.a1 + coupling * s.a2
    da2 = (0.5 * (1.0 + 1j * p.alpha) * G2 - p.kappa) * s.a2 + coupling * s.a1
    I1 = abs(s.a1) ** 2
    I2 = abs(s.a2) ** 2
    dn1 = P - p.gamma_tot * s.n1 - G1 * I1
    dn2 = P - p.gamma_tot * s.n2 - G2 * I2
    return StateDerivative(da1, da2, dn1, dn2)


def to_modal(a1, a2):
    """Unitary map to bonding/antibonding amplitudes (a1+a2, a1-a2)/sqrt(2)."""
    return (a1 + a2) / SQRT2, (a1 - a2) / SQRT2


def mode_intensities(a1, a2):
    """Bonding and antibonding intensities of a field pair (arrays ok)."""
    a_b, a_a = to_modal(a1, a2)
    return _abs2(a_b), _abs2(a_a)


def imbalance(I_B, I_A):
    """Mode population imbalance x = (I_B - I_A)/(I_B + I_A)."""
    tot = I_B + I_A
    if np.isscalar(tot):
        if tot <= 0.0:
            raise DegenerateStateError("total modal intensity is zero; x undefined")
        return (I_B - I_A) / tot
    tot = np.asarray(tot)
    if np.any(tot <= 0.0):
        raise DegenerateStateError("total modal intensity is zero; x undefined")
    return (I_B - I_A) / tot


def order_parameter(x):
    """Limit-cycle amplitude A = sqrt(1 - x^2) for |x| <= 1 (tiny overshoot clamped)."""
    ax = np.abs(x)
    if np.max(ax) > 1.0 + X_CLAMP_TOL:
        raise ValueError(f"imbalance out of range: max |x| = {np.max(ax)!r}")
    x2 = np.minimum(np.asarray(x, float) ** 2, 1.0)
    out = np.sqrt(1.0 - x2)
    return float(out) if np.isscalar(x) else out


def wrap_phase(phi):
    """Wrap an angle (scalar or array) to (-pi, pi]."""
    out = np.mod(np.asarray(phi, float) + np.pi, 2.0 * np.pi) - np.pi
    # np.mod maps the upper boundary to -pi; fold it back to +pi
    out = np.where(out == -np.pi, np.pi, out)
    return float(out) if np.isscalar(phi) else out


def modal_frame(s: CavityState) -> ModalFrame:
    """Full modal decomposition of a state; requires nonzero total intensity."""
    I_B, I_A = mode_intensities(s.a1, s.a2)
    I_tot = I_B + I_A
    if I_tot <= 0.0:
        raise DegenerateStateError("total intensity is zero; modal frame undefined")
    x = (I_B - I_A) / I_tot
    I1 = abs(s.a1) ** 2
    I2 = abs(s.a2) ** 2
    # theta = 2 atan(sqrt(I2/I1)); atan2 handles the poles (theta=0 when I2=0,
    # theta=pi when I1=0)
    theta = 2.0 * math.atan2(math.sqrt(I2), math.sqrt(I1))
    if I1 > 0.0 and I2 > 0.0:
        phi = wrap_phase(np.angle(s.a1) - np.angle(s.a2))
    else:
        phi = 0.0
    return ModalFrame(I_B=I_B, I_A=I_A, I_tot=I_tot, x=x, theta=theta, phi=float(phi))


def _abs2(z):
    z = np.asarray(z) if not np.isscalar(z) else z
    if np.isscalar(z):
        return abs(z) ** 2
    return z.real * z.real + z.imag * z.imag


# ---------------------------------------------------------------------------
# reference parameter sets
# ---------------------------------------------------------------------------

# anchor pair for the strongly coupled photonic-crystal dimer: beta = 0.017
# with V_a = 0.016e-12 cm^3 and transparency density 1e18 cm^-3
_BETA_ANCHOR = 0.017
_VA_ANCHOR = 0.016e-12
_N0_ANCHOR = 1.6e4


def reference_params(beta: float = _BETA_ANCHOR) -> PhysicalParams:
    """Strongly coupled dimer parameter set (K = 12 kappa, gamma_c = 0.05 kappa).

    The active volume and transparency carrier number co-scale as 1/beta so
    the transparency density stays at 1e18 cm^-3; photon numbers then scale
    as 1/beta, which makes beta^{-1} the system-size parameter.
    """
    kappa = 140.84
    scale = _BETA_ANCHOR / beta
    return PhysicalParams(
        kappa=kappa,
        alpha=7.0,
        K=12.0 * kappa,
        gamma_c=0.05 * kappa,
        gamma_par=2.2,
        gamma_tot=5.0,
        beta=beta,
        n0=_N0_ANCHOR * scale,
        F_P=1.03,
        B_rec=3.0e-10,
        V_a=_VA_ANCHOR * scale,
    )


def scale_to_beta(p: PhysicalParams, beta: float) -> PhysicalParams:
    """Rescale a parameter set to a different beta, keeping the carrier density.

    V_a and n0 are multiplied by p.beta/beta; every other constant is kept.
    """
    scale = p.beta / beta
    return replace(p, beta=beta, n0=p.n0 * scale, V_a=p.V_a * scale)


def symmetric_fixed_point(P: float, p: PhysicalParams) -> tuple[float, float]:
    """Noiseless bonding-mode operating point at pump P.

    Returns (I_B, n): the gain clamps at 2(kappa - gamma_c), so
    n = n0 + 2(kappa - gamma_c)/(gamma_par beta) and the total bonding
    intensity follows from the carrier balance.  Below threshold returns
    (0, P/gamma_tot).
    """
    n_clamp = p.n0 + 2.0 * (p.kappa - p.gamma_c) / (p.gamma_par * p.beta)
    if P <= p.gamma_tot * n_clamp:
        return 0.0, P / p.gamma_tot
    I_B = (P - p.gamma_tot * n_clamp) / (p.kappa - p.gamma_c)
    return I_B, n_clamp


# ---------------------------------------------------------------------------
# parameter files: flat key = value text
# ---------------------------------------------------------------------------

PARAM_KEYS = tuple(f.name for f in fields(PhysicalParams))
PUMP_KEY = "P_over_P0"


def parse_flat_file(text: str, source: str = "<string>") -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment; raises with line numbers."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ParameterError(f"{source}:{lineno}: empty key or value in {raw!r}")
        if key in out:
            raise ParameterError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def suggest_key(bad: str, valid) -> str:
    """Error suffix naming the closest valid key, if any."""
    close = difflib.get_close_matches(bad, list(valid), n=1)
    return f"; did you mean {close[0]!r}?" if close else ""


def params_from_mapping(raw: dict[str, str], source: str = "<mapping>") -> tuple[PhysicalParams, dict[str, float]]:
    """Build PhysicalParams from parsed keys; returns (params, extras).

    Extras currently holds only P_over_P0.  Unknown keys are rejected with a
    nearest-key suggestion.
    """
    allowed = set(PARAM_KEYS) | {PUMP_KEY}
    values: dict[str, float] = {}
    for key, text in raw.items():
        if key not in allowed:
            raise ParameterError(f"{source}: unknown key {key!r}{suggest_key(key, allowed)}")
        try:
            values[key] = float(text)
        except ValueError as exc:
            raise ParameterError(f"{source}: key {key!r}: {exc}") from None
    missing = [k for k in PARAM_KEYS if k not in values]
    if missing:
        raise ParameterError(f"{source}: missing keys: {', '.join(missing)}")
    extras = {PUMP_KEY: values.pop(PUMP_KEY)} if PUMP_KEY in values else {}
    return PhysicalParams(**values), extras


def load_params(path) -> tuple[PhysicalParams, dict[str, float]]:
    """Load a flat key=value parameter file.  See `params_from_mapping`."""
    path = Path(path)
    raw = parse_flat_file(path.read_text(), source=str(path))
    raw.pop("schema_version", None)
    return params_from_mapping(raw, source=str(path))


def dump_params(p: PhysicalParams, extras: dict[str, float] | None = None) -> str:
    """Serialise a parameter set to the flat key=value format."""
    lines = ["# coupled nanolaser parameters: rates in GHz, B_rec cm^3/s, V_a cm^3"]
    for name in PARAM_KEYS:
        lines.append(f"{name} = {getattr(p, name)!r}")
    for key, value in (extras or {}).items():
        lines.append(f"{key} = {value!r}")
    return "\n".join(lines) + "\n"


def params_hash(p: PhysicalParams) -> str:
    """Short stable digest of a parameter set, used in output manifests."""
    payload = ",".join(f"{name}={getattr(p, name)!r}" for name in PARAM_KEYS)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
