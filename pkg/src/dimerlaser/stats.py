"""Statistical estimators for mode-intensity time series and ensembles.

Covers the zero-delay second-order correlations g2_ij(0), the moments of
the mode population imbalance x and of the limit-cycle amplitude
A = sqrt(1 - x^2), the truncated-exponential equilibrium distribution of x,
joint (x, I_tot) histograms, the autocovariance width used to quantify
critical slowing down, and a first-order low-pass filter emulating
finite-bandwidth detectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.signal import lfilter

__all__ = [
    "CorrelationSet",
    "DegenerateStatisticsError",
    "EquilibriumFit",
    "JointHistogram",
    "MomentAccumulator",
    "amplitude_from_cross",
    "autocorr_width",
    "autocovariance",
    "cross_from_imbalance",
    "fit_equilibrium",
    "g2_zero",
    "joint_histogram",
    "ks_uniform",
    "lowpass",
]


class DegenerateStatisticsError(ValueError):
    """Estimator undefined for the supplied samples (e.g. zero mean intensity)."""


# ---------------------------------------------------------------------------
# streaming moments
# ---------------------------------------------------------------------------


@dataclass
class MomentAccumulator:
    """Mergeable running sums for (I_B, I_A, I_tot, x, A) statistics.

    Holds first and second moments of each channel plus the cross moments
    <I_B I_A> and <I_tot x>.  ``shape`` selects scalar accumulation (pooled
    samples) or per-bin accumulation over a leading sample axis; merging two
    accumulators adds their sums, so partial fills from different lanes
    combine associatively.
    """

    shape: tuple = ()
    count: int = 0
    s: dict = field(default_factory=dict)

    _FIRST = ("I_B", "I_A", "I_tot", "x", "A")

    def __post_init__(self):
        if not self.s:
            for name in self._FIRST:
                self.s[name] = np.zeros(self.shape)
                self.s[name + "2"] = np.zeros(self.shape)
            self.s["IB_IA"] = np.zeros(self.shape)
            self.s["Itot_x"] = np.zeros(self.shape)

    def add(self, I_B, I_A):
        """Accumulate samples; leading axis (if any beyond `shape`) is batched.

        x and A are derived from the intensities so the five channels stay
        consistent; empty-intensity samples contribute x = 0.
        """
        I_B = np.asarray(I_B, dtype=float)
        I_A = np.asarray(I_A, dtype=float)
        if I_B.shape != I_A.shape:
            raise ValueError("I_B and I_A must have matching shapes")
        if I_B.shape == self.shape:
            I_B = I_B[np.newaxis, ...]
            I_A = I_A[np.newaxis, ...]
        elif I_B.shape[1:] != self.shape:
            raise ValueError(f"samples of shape {I_B.shape} do not match bins {self.shape}")
        I_tot = I_B + I_A
        with np.errstate(invalid="ignore", divide="ignore"):
            x = np.where(I_tot > 0.0, (I_B - I_A) / np.where(I_tot > 0.0, I_tot, 1.0), 0.0)
        A = np.sqrt(np.clip(1.0 - x * x, 0.0, 1.0))
        vals = {"I_B": I_B, "I_A": I_A, "I_tot": I_tot, "x": x, "A": A}
        for name in self._FIRST:
            self.s[name] = self.s[name] + vals[name].sum(axis=0)
            self.s[name + "2"] = self.s[name + "2"] + (vals[name] ** 2).sum(axis=0)
        self.s["IB_IA"] = self.s["IB_IA"] + (I_B * I_A).sum(axis=0)
        self.s["Itot_x"] = self.s["Itot_x"] + (I_tot * x).sum(axis=0)
        self.count += I_B.shape[0]
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.shape != self.shape:
            raise ValueError("cannot merge accumulators with different bin shapes")
        out = MomentAccumulator(shape=self.shape)
        out.count = self.count + other.count
        for key in self.s:
            out.s[key] = self.s[key] + other.s[key]
        return out

    def mean(self, name):
        if self.count == 0:
            raise DegenerateStatisticsError("empty accumulator")
        return self.s[name] / self.count

    def var(self, name):
        m = self.mean(name)
        return self.s[name + "2"] / self.count - m * m

    def correlation_set(self) -> "CorrelationSet":
        """Zero-delay correlations and order-parameter moments from the sums."""
        if self.count < 2:
            raise DegenerateStatisticsError("need at least 2 samples")
        n = self.count
        mb, ma = self.s["I_B"] / n, self.s["I_A"] / n
        mt = self.s["I_tot"] / n
        if np.any(mb <= 0.0) or np.any(ma <= 0.0) or np.any(mt <= 0.0):
            raise DegenerateStatisticsError("a mean intensity is zero")
        mx = self.s["x"] / n
        mA = self.s["A"] / n
        return CorrelationSet(
            g2_BB=float(self.s["I_B2"] / n / (mb * mb)),
            g2_AA=float(self.s["I_A2"] / n / (ma * ma)),
            g2_BA=float(self.s["IB_IA"] / n / (mb * ma)),
            g2_II=float(self.s["I_tot2"] / n / (mt * mt)),
            mean_x=float(mx),
            var_x=float(self.s["x2"] / n - mx * mx),
            mean_A=float(mA),
            var_A=float(self.s["A2"] / n - mA * mA),
        ) if self.shape == () else CorrelationSet(
            g2_BB=self.s["I_B2"] / n / (mb * mb),
            g2_AA=self.s["I_A2"] / n / (ma * ma),
            g2_BA=self.s["IB_IA"] / n / (mb * ma),
            g2_II=self.s["I_tot2"] / n / (mt * mt),
            mean_x=mx,
            var_x=self.s["x2"] / n - mx * mx,
            mean_A=mA,
            var_A=self.s["A2"] / n - mA * mA,
        )


@dataclass(frozen=True)
class CorrelationSet:
    """Zero-delay second-order correlations plus x and A moments."""

    g2_BB: float
    g2_AA: float
    g2_BA: float
    g2_II: float
    mean_x: float
    var_x: float
    mean_A: float
    var_A: float

    CSV_FIELDS = ("g2_BB", "g2_AA", "g2_BA", "g2_II", "mean_x", "var_x", "mean_A", "var_A")


# ---------------------------------------------------------------------------
# correlation estimators
# ---------------------------------------------------------------------------


def g2_zero(samples_i, samples_j) -> float:
    """Normalised zero-delay correlation <I_i I_j> / (<I_i><I_j>).

    Symmetric in its arguments; requires at least two samples and strictly
    positive mean intensities.
    """
    si = np.asarray(samples_i, dtype=float).ravel()
    sj = np.asarray(samples_j, dtype=float).ravel()
    if si.size != sj.size:
        raise ValueError("sample series must have equal length")
    if si.size < 2:
        raise DegenerateStatisticsError("need at least 2 samples")
    mi, mj = si.mean(), sj.mean()
    if mi <= 0.0 or mj <= 0.0:
        raise DegenerateStatisticsError("mean intensity is zero")
    return float((si * sj).mean() / (mi * mj))


def cross_from_imbalance(g2_II: float, mean_x: float, mean_x2: float,
                         degenerate_tol: float = 1e-9) -> float:
    """Cross-correlation predicted from total-intensity and imbalance moments.

    Assumes the total intensity is uncorrelated with x, giving
    g2_BA = g2_II (1 - <x^2>) / (1 - <x>^2).  Near single-mode operation
    (<x>^2 -> 1) the prediction degenerates and NaN is returned as a flag.
    """
    if abs(mean_x) >= 1.0:
        raise ValueError(f"|mean_x| must be < 1, got {mean_x}")
    if mean_x2 > 1.0 + 1e-12 or mean_x * mean_x > mean_x2 + 1e-12:
        raise ValueError("inconsistent imbalance moments")
    denom = 1.0 - mean_x * mean_x
    if denom < degenerate_tol:
        return math.nan
    return g2_II * (1.0 - mean_x2) / denom


def amplitude_from_cross(g2_BA: float) -> float:
    """Mean limit-cycle amplitude estimate sqrt(g2_BA).

    Valid close to the switching point and neglects amplitude fluctuations;
    exports that use it label the column as an approximation.
    """
    if g2_BA < 0.0:
        raise ValueError("g2_BA must be >= 0")
    return math.sqrt(g2_BA)


# ---------------------------------------------------------------------------
# equilibrium distribution of x
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquilibriumFit:
    """Truncated-exponential fit rho(x) = N exp(-Lambda x) on [-1, 1]."""

    lam: float
    normalization: float
    ks_stat: float
    n_samples: int


def _lambda_normalization(lam: float) -> float:
    if abs(lam) < 1e-6:
        return 0.5 / (1.0 + lam * lam / 6.0)
    # lam / (2 sinh lam) is even in lam; this form cannot overflow
    a = abs(lam)
    return a * math.exp(-a) / (1.0 - math.exp(-2.0 * a))


def _mean_x_of_lambda(lam: float) -> float:
    """Mean of the truncated exponential: 1/Lambda - coth(Lambda)."""
    if abs(lam) < 1e-6:
        return -lam / 3.0 + lam**3 / 45.0
    if abs(lam) > 20.0:
        coth = math.copysign(1.0 + 2.0 * math.exp(-2.0 * abs(lam)), lam)
    else:
        coth = math.cosh(lam) / math.sinh(lam)
    return 1.0 / lam - coth


def _exponential_cdf(x, lam):
    """CDF of N exp(-lam x) on [-1, 1], overflow-safe for large |lam|."""
    x = np.asarray(x, dtype=float)
    if abs(lam) < 1e-9:
        return (x + 1.0) / 2.0
    if lam > 0:
        return (1.0 - np.exp(-lam * (x + 1.0))) / (1.0 - math.exp(-2.0 * lam))
    return (np.exp(-lam * (x - 1.0)) - math.exp(2.0 * lam)) / (1.0 - math.exp(2.0 * lam))


def _ks_statistic(sorted_x, cdf) -> float:
    n = sorted_x.size
    f = cdf(sorted_x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_uniform(samples) -> float:
    """Kolmogorov-Smirnov distance of samples in [-1, 1] to the flat density."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    return _ks_statistic(x, lambda v: _exponential_cdf(v, 0.0))


def ks_critical(n: int, alpha: float = 0.01) -> float:
    """Asymptotic KS rejection threshold at level alpha."""
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c / math.sqrt(n)


def fit_equilibrium(samples) -> EquilibriumFit:
    """Maximum-likelihood Lambda for rho = N exp(-Lambda x) on [-1, 1].

    The likelihood equation reduces to coth(Lambda) - 1/Lambda = -<x>,
    solved by bracketing.  Reports the KS distance of the samples to the
    fitted law as goodness of fit.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size < 100:
        raise ValueError(f"need at least 100 samples, got {x.size}")
    if x[0] < -1.0 or x[-1] > 1.0:
        raise ValueError("samples must lie in [-1, 1]")
    target = float(x.mean())
    if abs(target) < 1e-12:
        lam = 0.0
    elif abs(target) >= 1.0 - 1e-9:
        raise DegenerateStatisticsError("samples concentrated at an endpoint; Lambda diverges")
    else:
        # mean(Lambda) is monotone decreasing; bracket by doubling
        hi = 1.0
        sign = -1.0 if target > 0.0 else 1.0
        while sign * _mean_x_of_lambda(sign * hi) > -abs(target):
            hi *= 2.0
            if hi > 1e8:
                raise DegenerateStatisticsError("Lambda bracket overflow")
        lam = brentq(lambda L: _mean_x_of_lambda(L) - target, min(0.0, sign * hi), max(0.0, sign * hi),
                     xtol=1e-12, rtol=1e-12)
    ks = _ks_statistic(x, lambda v: _exponential_cdf(v, lam))
    return EquilibriumFit(lam=float(lam), normalization=_lambda_normalization(lam),
                          ks_stat=ks, n_samples=int(x.size))


def sample_equilibrium(lam: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from the truncated exponential (testing oracle)."""
    u = rng.uniform(0.0, 1.0, size)
    if abs(lam) < 1e-9:
        return 2.0 * u - 1.0
    return -np.log(math.exp(lam) - 2.0 * u * math.sinh(lam)) / lam


# ---------------------------------------------------------------------------
# histograms
# ---------------------------------------------------------------------------


@dataclass
class JointHistogram:
    """2D histogram of (x, I_tot) samples."""

    x_edges: np.ndarray
    i_edges: np.ndarray
    counts: np.ndarray
    total: int

    def x_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def i_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("# x_edges," + ",".join(repr(v) for v in self.x_edges) + "\n")
            fh.write("# i_edges," + ",".join(repr(v) for v in self.i_edges) + "\n")
            fh.write("# rows: x bins, columns: I_tot bins\n")
            for row in self.counts:
                fh.write(",".join(str(int(v)) for v in row) + "\n")


def default_edges(x_bins: int = 64, i_bins: int = 48, i_max: float = 1.0):
    """Default binning: uniform x over [-1, 1], I_tot over [0, i_max]."""
    return np.linspace(-1.0, 1.0, x_bins + 1), np.linspace(0.0, i_max, i_bins + 1)


def joint_histogram(x_samples, i_samples, x_edges, i_edges) -> JointHistogram:
    """Joint counts of imbalance and total intensity on the given edges."""
    x = np.asarray(x_samples, dtype=float).ravel()
    I = np.asarray(i_samples, dtype=float).ravel()
    if x.size != I.size:
        raise ValueError("sample vectors must have equal length")
    x_edges = np.asarray(x_edges, dtype=float)
    i_edges = np.asarray(i_edges, dtype=float)
    for name, edges in (("x_edges", x_edges), ("i_edges", i_edges)):
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0.0):
            raise ValueError(f"{name} must be strictly increasing with >= 2 entries")
    counts, _, _ = np.histogram2d(x, I, bins=(x_edges, i_edges))
    return JointHistogram(x_edges=x_edges, i_edges=i_edges,
                          counts=counts.astype(np.int64), total=int(x.size))


# ---------------------------------------------------------------------------
# time-domain estimators
# ---------------------------------------------------------------------------


def autocovariance(trace, max_lag: int) -> np.ndarray:
    """Biased autocovariance of one trace up to max_lag, via FFT."""
    v = np.asarray(trace, dtype=float).ravel()
    v = v - v.mean()
    n = v.size
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(v, nfft)
    acov = np.fft.irfft(spec * np.conj(spec), nfft)[: max_lag + 1]
    return acov / n


def autocorr_width(trace, dt: float, traces_extra=()) -> float:
    """Full width at half maximum of the normalised autocovariance, in ns.

    Extra traces, if given, contribute to an averaged autocovariance
    (ensemble of stationary segments).  Raises when the trace is too short
    for the correlation to fall below one half.
    """
    v = np.asarray(trace, dtype=float)
    all_traces = [v] + [np.asarray(w, dtype=float) for w in traces_extra]
    max_lag = min(t.size for t in all_traces) // 2
    if max_lag < 2:
        raise ValueError("trace too short for an autocorrelation width")
    acov = np.zeros(max_lag + 1)
    for w in all_traces:
        acov += autocovariance(w, max_lag)
    if acov[0] <= 0.0:
        raise DegenerateStatisticsError("trace has zero variance")
    c = acov / acov[0]
    below = np.nonzero(c < 0.5)[0]
    if below.size == 0:
        raise ValueError("autocorrelation never falls below 1/2; trace too short")
    k = int(below[0])
    # linear interpolation of the half crossing between lags k-1 and k
    c_hi, c_lo = c[k - 1], c[k]
    frac = (c_hi - 0.5) / (c_hi - c_lo) if c_hi != c_lo else 0.5
    half_lag = (k - 1 + frac) * dt
    return 2.0 * half_lag


def lowpass(trace, dt: float, bandwidth: float):
    """First-order low-pass filter with its -3 dB point at `bandwidth` (GHz).

    One-pole IIR initialised at the first sample; unity DC gain preserves
    the mean of stationary traces.  Filters along the last axis.
    """
    if bandwidth <= 0.0:
        raise ValueError("bandwidth must be > 0")
    v = np.asarray(trace, dtype=float)
    a = 1.0 - math.exp(-2.0 * math.pi * bandwidth * dt)
    x0 = v[..., :1]
    zi = (1.0 - a) * x0
    out, _ = lfilter([a], [1.0, -(1.0 - a)], v, axis=-1, zi=zi)
    return out
