"""Minute-bar ingestion, return statistics, and synthetic series.

Ingests `timestamp,close[,session]` CSV, computes log-return samples at a
horizon, drift/volatility scaling, density histograms, lag autocorrelations
and horizon kurtosis, and generates seeded synthetic series for testing the
pipeline end to end. All estimators are pure functions over immutable series.

Session handling: returns are paired intraday-only by default (pairs spanning
a session boundary are dropped) because session-spanning returns mix
closed-market information into short lags; "contiguous" pairing is available
for sensitivity checks.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np
from scipy.signal import lfilter

from .errors import DataError, DegenerateDataError, InsufficientDataError
from .model import NonMarkovParams

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "AcfEstimate",
    "ScalingResult",
    "HistogramResult",
    "KurtosisResult",
    "load_prices",
    "log_returns",
    "drift_vol_scaling",
    "return_histogram",
    "empirical_acf",
    "empirical_kurtosis",
    "synth_gbm",
    "synth_colored",
]

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
# Synthetic series start on an arbitrary fixed Monday morning.
SYNTH_START_MINUTE = int((datetime(2000, 1, 3, 9, 30, tzinfo=timezone.utc) - _EPOCH).total_seconds() // 60)

PAIRING_POLICIES = ("intraday-only", "contiguous")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PriceSeries:
    """Validated minute-bar price series.

    times        : minutes since epoch, strictly increasing int64
    close        : positive prices
    sessions     : [first, last] minute windows, one per trading session
    session_idx  : session index per row
    base_minutes : bar resolution (gcd of within-session spacings)
    """

    times: np.ndarray
    close: np.ndarray
    sessions: tuple[tuple[int, int], ...]
    session_idx: np.ndarray
    base_minutes: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", _frozen(np.asarray(self.times, dtype=np.int64)))
        object.__setattr__(self, "close", _frozen(np.asarray(self.close, dtype=float)))
        object.__setattr__(self, "session_idx", _frozen(np.asarray(self.session_idx, dtype=np.int64)))
        if len(self.times) == 0:
            raise DataError("empty price series")
        if np.any(self.close <= 0):
            raise DataError("prices must be positive")
        if np.any(np.diff(self.times) <= 0):
            raise DataError("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def log_price(self) -> np.ndarray:
        return np.log(self.close)


@dataclass(frozen=True)
class ReturnSeries:
    """Log-return samples at a fixed horizon.

    values are tau-normalized returns [ln S(t+tau) - ln S(t)] / tau; times are
    the anchor minute of each sample. When drift_removed is set the sample
    mean has been subtracted.
    """

    tau_minutes: int
    values: np.ndarray
    drift_removed: bool
    times: np.ndarray
    session_idx: np.ndarray
    base_minutes: int
    policy: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=float)))
        object.__setattr__(self, "times", _frozen(np.asarray(self.times, dtype=np.int64)))
        object.__setattr__(self, "session_idx", _frozen(np.asarray(self.session_idx, dtype=np.int64)))
        if self.policy not in PAIRING_POLICIES:
            raise ValueError(f"unknown pairing policy {self.policy!r}")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class AcfEstimate:
    """Lag autocorrelation estimates of a return series.

    values carry the dimensional convention (mean product of returns, units
    [ln S]^2 min^-2); use :meth:`normalized` for the unitless variant. Only
    lags with at least one admissible pair are reported; empty lags are listed
    in omitted_lags.
    """

    lags: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    stderr: np.ndarray
    base_minutes: int
    tau_minutes: int
    normalized: bool = False
    omitted_lags: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "lags", _frozen(np.asarray(self.lags, dtype=np.int64)))
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=float)))
        object.__setattr__(self, "counts", _frozen(np.asarray(self.counts, dtype=np.int64)))
        object.__setattr__(self, "stderr", _frozen(np.asarray(self.stderr, dtype=float)))
        if np.any(self.counts <= 0):
            raise ValueError("reported lags must have positive pair counts")

    def normalized_copy(self) -> "AcfEstimate":
        """Unitless variant scaled by the lag-0 value (for cross-period shape
        comparison)."""
        r0 = self.values[0] if self.lags[0] == 0 else None
        if r0 is None or r0 <= 0:
            raise DegenerateDataError("cannot normalize: lag-0 value missing or nonpositive")
        return AcfEstimate(
            lags=self.lags,
            values=self.values / r0,
            counts=self.counts,
            stderr=self.stderr / r0,
            base_minutes=self.base_minutes,
            tau_minutes=self.tau_minutes,
            normalized=True,
            omitted_lags=self.omitted_lags,
        )


def _parse_minute(text: str, line_no: int) -> int:
    try:
        stamp = datetime.fromisoformat(text.strip())
    except ValueError as exc:
        raise DataError(f"line {line_no}: cannot parse timestamp {text!r}") from exc
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    seconds = (stamp - _EPOCH).total_seconds()
    minutes = seconds / 60.0
    if minutes != int(minutes):
        raise DataError(f"line {line_no}: timestamp {text!r} is not at minute resolution")
    return int(minutes)


def load_prices(source: str | Path | TextIO, base_minutes: int | None = None) -> PriceSeries:
    """Read and validate a `timestamp,close[,session]` CSV.

    Timestamps must be ISO-8601 at minute resolution, strictly increasing;
    prices must be positive. Malformed rows are hard errors naming the line.
    Rows sharing a session label form one session; without the column the
    whole series is one session.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return load_prices(handle, base_minutes=base_minutes)

    # leading '#' lines are tool header comments (version, input digest)
    numbered = [
        (line_no, line)
        for line_no, line in enumerate(iter(source.readline, ""), start=1)
        if not line.lstrip().startswith("#")
    ]
    if not numbered:
        raise DataError("empty file")
    header_no, header_line = numbered[0]
    header = [h.strip().lower() for h in next(csv.reader([header_line]))]
    valid_header = header in (["timestamp", "close"], ["timestamp", "close", "session"])
    if not valid_header:
        raise DataError(
            f"line {header_no}: expected header 'timestamp,close[,session]', got {','.join(header)!r}"
        )
    has_session = len(header) == 3
    n_cols = len(header)

    times: list[int] = []
    closes: list[float] = []
    labels: list[str] = []
    for line_no, raw in numbered[1:]:
        row = next(csv.reader([raw])) if raw.strip() else []
        if not row or all(not cell.strip() for cell in row):
            raise DataError(f"line {line_no}: blank row")
        if len(row) != n_cols:
            raise DataError(f"line {line_no}: expected {n_cols} fields, got {len(row)}")
        minute = _parse_minute(row[0], line_no)
        try:
            price = float(row[1])
        except ValueError as exc:
            raise DataError(f"line {line_no}: cannot parse price {row[1]!r}") from exc
        if not math.isfinite(price) or price <= 0:
            raise DataError(f"line {line_no}: non-positive price {row[1]!r}")
        if times:
            if minute == times[-1]:
                raise DataError(f"line {line_no}: duplicate timestamp {row[0]!r}")
            if minute < times[-1]:
                raise DataError(f"line {line_no}: timestamps out of order at {row[0]!r}")
        times.append(minute)
        closes.append(price)
        labels.append(row[2].strip() if has_session and len(row) > 2 else "")

    if not times:
        raise DataError("empty file: no data rows")

    session_idx = np.zeros(len(times), dtype=np.int64)
    current = 0
    for i in range(1, len(times)):
        if labels[i] != labels[i - 1]:
            current += 1
        session_idx[i] = current
    t_arr = np.asarray(times, dtype=np.int64)
    sessions = tuple(
        (int(t_arr[session_idx == s].min()), int(t_arr[session_idx == s].max()))
        for s in range(current + 1)
    )

    if base_minutes is None:
        gcd = 0
        for s in range(current + 1):
            diffs = np.diff(t_arr[session_idx == s])
            for d in diffs:
                gcd = math.gcd(gcd, int(d))
        base_minutes = gcd if gcd > 0 else 1

    return PriceSeries(
        times=t_arr,
        close=np.asarray(closes),
        sessions=sessions,
        session_idx=session_idx,
        base_minutes=int(base_minutes),
    )


def _pair_indices(series: PriceSeries, tau: int, policy: str) -> tuple[np.ndarray, np.ndarray]:
    """Indices (anchor, partner) of samples tau minutes apart under a policy."""
    t = series.times
    target = t + tau
    pos = np.searchsorted(t, target)
    ok = pos < len(t)
    anchors = np.nonzero(ok)[0]
    pos = pos[ok]
    hit = t[pos] == target[anchors]
    anchors = anchors[hit]
    partners = pos[hit]
    if policy == "intraday-only":
        same = series.session_idx[anchors] == series.session_idx[partners]
        anchors, partners = anchors[same], partners[same]
    return anchors, partners


def log_returns(
    series: PriceSeries,
    tau_minutes: int,
    policy: str = "intraday-only",
    remove_drift: bool = True,
) -> ReturnSeries:
    """Tau-normalized log returns [ln S(t+tau) - ln S(t)] / tau, one sample
    per admissible bar pair. Drift removal subtracts the sample mean."""
    if policy not in PAIRING_POLICIES:
        raise ValueError(f"unknown pairing policy {policy!r}")
    if tau_minutes <= 0 or tau_minutes % series.base_minutes != 0:
        raise ValueError(
            f"tau must be a positive multiple of the base resolution ({series.base_minutes} min)"
        )
    anchors, partners = _pair_indices(series, tau_minutes, policy)
    if len(anchors) == 0:
        if policy == "intraday-only":
            raise DataError(
                f"no admissible pairs at tau = {tau_minutes} min: horizon exceeds every session"
            )
        raise DataError(f"no admissible pairs at tau = {tau_minutes} min")
    lp = series.log_price()
    values = (lp[partners] - lp[anchors]) / float(tau_minutes)
    if remove_drift:
        values = values - values.mean()
    return ReturnSeries(
        tau_minutes=int(tau_minutes),
        values=values,
        drift_removed=remove_drift,
        times=series.times[anchors],
        session_idx=series.session_idx[anchors],
        base_minutes=series.base_minutes,
        policy=policy,
    )


@dataclass(frozen=True)
class ScalingResult:
    """Per-horizon drift and volatility of un-normalized increments, with the
    power-law fit of sigma(tau) and the linear fit of the drift estimate.

    mean_increment is the raw sample mean of ln S(t+tau) - ln S(t); mu is the
    drift-rate estimate mean + sigma^2/2, which grows linearly in tau with
    slope equal to the price drift rate.
    """

    taus: np.ndarray
    mean_increment: np.ndarray
    sigma: np.ndarray
    mu: np.ndarray
    counts: np.ndarray
    sigma_exponent: float
    sigma_prefactor: float
    sigma_exponent_stderr: float
    mu_slope: float
    mu_intercept: float
    mu_slope_stderr: float

    def __post_init__(self) -> None:
        for name in ("taus", "mean_increment", "sigma", "mu", "counts"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name))))


def _ols_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope/intercept and the slope standard error."""
    n = len(x)
    a = np.vstack([x, np.ones(n)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    if n > 2:
        s2 = float(resid @ resid) / (n - 2)
        sxx = float(np.sum((x - x.mean()) ** 2))
        stderr = math.sqrt(s2 / sxx) if sxx > 0 else float("inf")
    else:
        stderr = float("nan")
    return float(coef[0]), float(coef[1]), stderr


def drift_vol_scaling(
    series: PriceSeries, taus: Sequence[int], policy: str = "intraday-only"
) -> ScalingResult:
    """Mean and standard deviation of un-normalized increments per horizon,
    plus the sigma power-law exponent (log-log least squares) and the drift
    slope (linear least squares). Requires at least 3 horizons."""
    taus = [int(t) for t in taus]
    if len(taus) < 3:
        raise InsufficientDataError("drift/vol scaling needs at least 3 horizons")
    means, sigmas, counts = [], [], []
    for tau in taus:
        anchors, partners = _pair_indices(series, tau, policy)
        if len(anchors) < 2:
            raise InsufficientDataError(f"fewer than 2 increments at tau = {tau} min")
        lp = series.log_price()
        inc = lp[partners] - lp[anchors]
        means.append(float(inc.mean()))
        sigmas.append(float(inc.std(ddof=1)))
        counts.append(len(inc))
    taus_arr = np.asarray(taus, dtype=float)
    sigma_arr = np.asarray(sigmas)
    mean_arr = np.asarray(means)
    if np.any(sigma_arr <= 1e-12 * np.maximum(np.abs(mean_arr), 1e-300)):
        raise DegenerateDataError(
            "zero volatility at some horizon: power-law fit refused (deterministic price path?)"
        )
    sig_slope, sig_icept, sig_err = _ols_line(np.log(taus_arr), np.log(sigma_arr))
    mu_arr = mean_arr + sigma_arr**2 / 2.0
    mu_slope, mu_icept, mu_err = _ols_line(taus_arr, mu_arr)
    return ScalingResult(
        taus=np.asarray(taus, dtype=np.int64),
        mean_increment=mean_arr,
        sigma=sigma_arr,
        mu=mu_arr,
        counts=np.asarray(counts, dtype=np.int64),
        sigma_exponent=sig_slope,
        sigma_prefactor=math.exp(sig_icept),
        sigma_exponent_stderr=sig_err,
        mu_slope=mu_slope,
        mu_intercept=mu_icept,
        mu_slope_stderr=mu_err,
    )


@dataclass(frozen=True)
class HistogramResult:
    """Density-normalized return histogram with a moment-matched Gaussian
    reference at the bin centers."""

    edges: np.ndarray
    centers: np.ndarray
    density: np.ndarray
    counts: np.ndarray
    gaussian_ref: np.ndarray
    n_samples: int
    sample_mean: float
    sample_std: float

    def __post_init__(self) -> None:
        for name in ("edges", "centers", "density", "counts", "gaussian_ref"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name))))

    def bin_stderr(self) -> np.ndarray:
        """Poisson standard error of each bin in density units."""
        width = self.edges[1] - self.edges[0]
        return np.sqrt(np.maximum(self.counts, 1.0)) / (self.n_samples * width)

    def significant_tail_bins(self, n_se: float = 5.0, tail_stds: float = 3.0) -> np.ndarray:
        """Indices of tail bins (|center - mean| > tail_stds * std) whose density
        exceeds the Gaussian reference by more than n_se binomial standard
        errors. Empty for Gaussian data at these bounds."""
        tail = np.abs(self.centers - self.sample_mean) > tail_stds * self.sample_std
        excess = self.density - self.gaussian_ref
        ref_se = np.sqrt(np.maximum(self.gaussian_ref * self.n_samples * (self.edges[1] - self.edges[0]), 1.0)) / (
            self.n_samples * (self.edges[1] - self.edges[0])
        )
        bound = n_se * np.maximum(self.bin_stderr(), ref_se)
        return np.nonzero(tail & (excess > bound))[0]


def return_histogram(returns: ReturnSeries, bins: int | None = None) -> HistogramResult:
    """Density histogram of the return samples plus the Gaussian with the same
    mean and variance evaluated at bin centers.

    Binning defaults to Freedman-Diaconis width over a symmetric range of
    +-6 sample standard deviations about the mean. Requires >= 100 samples and
    nondegenerate variance.
    """
    x = returns.values
    n = len(x)
    if n < 100:
        raise InsufficientDataError(f"histogram needs at least 100 samples, got {n}")
    mean = float(x.mean())
    std = float(x.std(ddof=1))
    scale = max(abs(mean), float(np.max(np.abs(x))), 1e-300)
    if std <= 1e-12 * scale:
        raise DegenerateDataError("degenerate variance: all return samples identical")
    lo, hi = mean - 6.0 * std, mean + 6.0 * std
    if bins is None:
        q75, q25 = np.percentile(x, [75, 25])
        width = 2.0 * (q75 - q25) / n ** (1.0 / 3.0)
        if width <= 0:
            width = 3.5 * std / n ** (1.0 / 3.0)
        bins = int(np.clip(math.ceil((hi - lo) / width), 16, 1024))
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    widths = np.diff(edges)
    density = counts / (n * widths)
    centers = 0.5 * (edges[:-1] + edges[1:])
    ref = np.exp(-0.5 * ((centers - mean) / std) ** 2) / (std * math.sqrt(2.0 * math.pi))
    return HistogramResult(
        edges=edges,
        centers=centers,
        density=density,
        counts=counts,
        gaussian_ref=ref,
        n_samples=n,
        sample_mean=mean,
        sample_std=std,
    )


def empirical_acf(returns: ReturnSeries, max_lag: int) -> AcfEstimate:
    """Lag autocorrelation R(lag) = mean over admissible pairs of
    r(t) r(t+lag), on drift-removed returns, stepping at the base resolution.

    The session policy of the return series is inherited: under intraday-only
    pairing, products never span a session boundary. Lags without admissible
    pairs are omitted and listed in ``omitted_lags``.
    """
    t = returns.times
    span = int(t[-1] - t[0]) if len(t) else 0
    if max_lag >= span:
        raise ValueError(f"max_lag must be below the sample span ({span} min)")
    r = returns.values
    if not returns.drift_removed:
        r = r - r.mean()
    base = returns.base_minutes
    lags, values, counts, stderrs = [], [], [], []
    omitted: list[int] = []
    for lag in range(0, max_lag + 1, base):
        target = t + lag
        pos = np.searchsorted(t, target)
        ok = pos < len(t)
        anchors = np.nonzero(ok)[0]
        pos = pos[ok]
        hit = t[pos] == target[anchors]
        anchors = anchors[hit]
        partners = pos[hit]
        if returns.policy == "intraday-only":
            same = returns.session_idx[anchors] == returns.session_idx[partners]
            anchors, partners = anchors[same], partners[same]
        if len(anchors) == 0:
            omitted.append(lag)
            continue
        products = r[anchors] * r[partners]
        lags.append(lag)
        values.append(float(products.mean()))
        counts.append(len(products))
        if len(products) > 1:
            stderrs.append(float(products.std(ddof=1) / math.sqrt(len(products))))
        else:
            stderrs.append(float("nan"))
    return AcfEstimate(
        lags=np.asarray(lags, dtype=np.int64),
        values=np.asarray(values),
        counts=np.asarray(counts, dtype=np.int64),
        stderr=np.asarray(stderrs),
        base_minutes=base,
        tau_minutes=returns.tau_minutes,
        omitted_lags=tuple(omitted),
    )


@dataclass(frozen=True)
class KurtosisResult:
    """Excess kurtosis of drift-removed returns per horizon; horizons with too
    few samples are omitted and listed with their counts."""

    taus: np.ndarray
    kappa: np.ndarray
    counts: np.ndarray
    omitted: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        for name in ("taus", "kappa", "counts"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name))))


MIN_KURTOSIS_SAMPLES = 1000


def empirical_kurtosis(
    series: PriceSeries, taus: Sequence[int], policy: str = "intraday-only"
) -> KurtosisResult:
    """Excess kurtosis of drift-removed returns at each horizon. Horizons with
    fewer than 1000 samples are omitted with a diagnostic entry."""
    kept_taus, kappas, counts = [], [], []
    omitted: list[tuple[int, int]] = []
    for tau in taus:
        try:
            rs = log_returns(series, int(tau), policy=policy, remove_drift=True)
        except DataError:
            omitted.append((int(tau), 0))
            continue
        n = len(rs)
        if n < MIN_KURTOSIS_SAMPLES:
            omitted.append((int(tau), n))
            continue
        v = rs.values
        m2 = float(np.mean(v**2))
        m4 = float(np.mean(v**4))
        if m2 == 0:
            omitted.append((int(tau), n))
            continue
        kept_taus.append(int(tau))
        kappas.append(m4 / m2**2 - 3.0)
        counts.append(n)
    return KurtosisResult(
        taus=np.asarray(kept_taus, dtype=np.int64),
        kappa=np.asarray(kappas),
        counts=np.asarray(counts, dtype=np.int64),
        omitted=tuple(omitted),
    )


def synth_gbm(
    mu: float,
    sigma: float,
    n: int,
    dt_minutes: int = 1,
    seed: int = 0,
    s0: float = 100.0,
) -> PriceSeries:
    """Exact-discretization geometric Brownian motion minute bars.

    Log increments are N((mu - sigma^2/2) dt, sigma^2 dt) per bar; mu is the
    price drift rate per minute and sigma the volatility per sqrt-minute.
    Bit-reproducible under a fixed seed. Emitted as one trading session.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if dt_minutes <= 0:
        raise ValueError("dt_minutes must be positive")
    rng = np.random.default_rng(seed)
    dt = float(dt_minutes)
    increments = (mu - sigma**2 / 2.0) * dt + sigma * math.sqrt(dt) * rng.standard_normal(n - 1)
    log_price = math.log(s0) + np.concatenate([[0.0], np.cumsum(increments)])
    times = SYNTH_START_MINUTE + np.arange(n, dtype=np.int64) * dt_minutes
    return PriceSeries(
        times=times,
        close=np.exp(log_price),
        sessions=((int(times[0]), int(times[-1])),),
        session_idx=np.zeros(n, dtype=np.int64),
        base_minutes=int(dt_minutes),
    )


def synth_colored(
    nm: NonMarkovParams,
    n: int,
    dt_minutes: int = 1,
    base_noise: float = 1e-3,
    seed: int = 0,
) -> ReturnSeries:
    """Seeded return series whose population autocorrelation is
    base_noise^2 at lag 0 (white part) plus the damped oscillatory model ACF
    at every lag.

    Construction: white noise plus the centered square of a complex damped
    oscillator with amplitude decay eta/2 and frequency omega, so the squared
    envelope carries exactly the model ACF (the square of a Gaussian process
    with autocovariance C has autocovariance 2 C^2).
    """
    if nm.eta * dt_minutes > 0.5:
        raise ValueError(f"filter instability: eta*dt = {nm.eta * dt_minutes:.3g} > 0.5")
    n_min = 10.0 / (nm.eta * dt_minutes)
    if n < n_min:
        raise ValueError(f"n must cover ten decay times: need n >= {math.ceil(n_min)}")
    rng = np.random.default_rng(seed)
    dt = float(dt_minutes)

    white = base_noise * rng.standard_normal(n)

    if nm.xi > 0:
        # complex AR(1): chi_{k+1} = a chi_k + w_k with |a| = exp(-eta dt / 2),
        # stationary E|chi|^2 = sqrt(2) xi so that 2 C(tau)^2 matches the target.
        amp2 = math.sqrt(2.0) * nm.xi
        a = complex(math.cos(nm.omega * dt), math.sin(nm.omega * dt)) * math.exp(-nm.eta * dt / 2.0)
        noise_var = amp2 * (1.0 - abs(a) ** 2)
        w = math.sqrt(noise_var / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        chi0 = math.sqrt(amp2 / 2.0) * complex(rng.standard_normal(), rng.standard_normal())
        chi = np.empty(n, dtype=complex)
        chi[0] = chi0
        if n > 1:
            chi[1:] = lfilter([1.0], [1.0, -a], w[1:], zi=np.array([a * chi0]))[0]
        y = chi.real
        colored = y * y - amp2 / 2.0
    else:
        colored = np.zeros(n)

    values = white + colored
    times = SYNTH_START_MINUTE + np.arange(n, dtype=np.int64) * dt_minutes
    return ReturnSeries(
        tau_minutes=int(dt_minutes),
        values=values,
        drift_removed=False,
        times=times,
        session_idx=np.zeros(n, dtype=np.int64),
        base_minutes=int(dt_minutes),
        policy="contiguous",
    )
