"""Spectra of line-outs, peak labeling, revival times and envelope metrics.

Frequencies are reported in cm^-1.  A beat at f cycles/ps corresponds to
an energy splitting of 2 pi f (angular frequency) converted to cm^-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks, get_window

from .basis import QuantumDefectTable
from .errors import ConfigError
from .stark import StarkBasis
from .units import au_to_cm1, beat_ps_to_cm1, ps_to_au, vcm_to_au

MIN_SAMPLES = 64
WINDOWS = ("hann", "rect")


@dataclass(frozen=True, eq=False)
class SpectrumPeaks:
    """Peaks sorted by descending amplitude; amplitudes relative to the largest."""

    frequencies: np.ndarray
    amplitudes: np.ndarray
    labels: tuple | None = None
    nyquist: float = math.inf

    def __len__(self):
        return self.frequencies.size

    def strongest(self, k: int) -> np.ndarray:
        return self.frequencies[:k]

    def nearest(self, freq: float) -> int:
        if not len(self):
            raise ConfigError("empty peak list")
        return int(np.argmin(np.abs(self.frequencies - freq)))


def _uniform_step(times_ps) -> float:
    t = np.asarray(times_ps, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ConfigError("need at least two sample times")
    d = np.diff(t)
    if np.any(d <= 0) or np.ptp(d) > 1e-6 * abs(d.mean()):
        raise ConfigError("samples must be uniformly spaced in delay")
    return float(d.mean())


def _window(name: str, n: int) -> np.ndarray:
    if name not in WINDOWS:
        raise ConfigError(f"unknown window {name!r}; expected one of {WINDOWS}")
    return np.ones(n) if name == "rect" else get_window("hann", n, fftbins=False)


def spectrum(series, times_ps, window: str = "hann", pad: int = 1):
    """(frequencies in cm^-1, |DFT|) of the mean-subtracted, windowed series."""
    y = np.asarray(series, dtype=float)
    dt = _uniform_step(times_ps)
    if y.size != np.asarray(times_ps).size:
        raise ConfigError("series and time axis differ in length")
    if y.size < MIN_SAMPLES:
        raise ConfigError(f"need at least {MIN_SAMPLES} samples, got {y.size}")
    if pad < 1:
        raise ConfigError("pad factor must be >= 1")
    yw = (y - y.mean()) * _window(window, y.size)
    mag = np.abs(np.fft.rfft(yw, n=pad * y.size))
    freqs = beat_ps_to_cm1(np.fft.rfftfreq(pad * y.size, d=dt))
    return freqs, mag


def parseval_ratio(series, window: str = "hann") -> float:
    """Spectral energy over series energy for the windowed signal; 1 up to rounding."""
    y = np.asarray(series, dtype=float)
    yw = (y - y.mean()) * _window(window, y.size)
    full = np.fft.fft(yw)
    time_energy = float(np.sum(yw**2))
    if time_energy == 0:
        return 1.0
    return float(np.sum(np.abs(full) ** 2) / y.size) / time_energy


def _parabolic(mag, k):
    a, b, c = mag[k - 1], mag[k], mag[k + 1]
    den = a - 2 * b + c
    if den == 0:
        return 0.0, b
    p = 0.5 * (a - c) / den
    return p, b - 0.25 * (a - c) * p


def fourier_peaks(
    series,
    times_ps,
    window: str = "hann",
    n_peaks: int | None = None,
    threshold: float = 0.05,
    pad: int = 1,
) -> SpectrumPeaks:
    """Local maxima of the line-out spectrum above ``threshold`` x the largest."""
    freqs, mag = spectrum(series, times_ps, window, pad)
    nyq = float(freqs[-1])
    top = mag[1:].max() if mag.size > 1 else 0.0
    if top <= 1e-12 * max(np.abs(series).max(), 1e-300) * np.sqrt(mag.size):
        return SpectrumPeaks(np.zeros(0), np.zeros(0), nyquist=nyq)
    idx, _ = find_peaks(mag)
    idx = idx[(idx > 0) & (idx < mag.size - 1)]
    df = freqs[1] - freqs[0]
    f_out, a_out = [], []
    for k in idx:
        p, a = _parabolic(mag, k)
        f_out.append(freqs[k] + p * df)
        a_out.append(a)
    f_out, a_out = np.array(f_out), np.array(a_out)
    if a_out.size:
        a_out = a_out / a_out.max()
    keep = a_out >= threshold
    f_out, a_out = f_out[keep], a_out[keep]
    order = np.argsort(-a_out, kind="stable")
    if n_peaks is not None:
        order = order[:n_peaks]
    return SpectrumPeaks(f_out[order], a_out[order], nyquist=nyq)


def label_peaks(
    peaks: SpectrumPeaks,
    sb: StarkBasis,
    populations,
    defects: QuantumDefectTable,
    tolerance: float = 0.3,
    min_population: float = 1e-4,
) -> SpectrumPeaks:
    """Attach a manifold pair (n, n') to every peak.

    Candidates are pairs of populated Stark states whose splitting is within
    ``tolerance`` cm^-1 of the peak; the pair with the largest amplitude
    product |c_a||c_b| wins.  Peaks without a candidate get ``None``.
    """
    if tolerance <= 0:
        raise ConfigError("tolerance must be positive")
    if not len(peaks):
        return replace(peaks, labels=())
    pops = np.asarray(populations, dtype=float)
    sel = np.nonzero(pops >= min_population * pops.max())[0]
    e = au_to_cm1(sb.energies[sel])
    amp = np.sqrt(pops[sel])
    man = sb.manifold(defects)[sel]
    split = np.abs(e[:, None] - e[None, :])
    weight = amp[:, None] * amp[None, :]
    labels = []
    for f in peaks.frequencies:
        ok = np.abs(split - f) <= tolerance
        ok &= man[:, None] != man[None, :]
        if not ok.any():
            labels.append(None)
            continue
        i, j = np.unravel_index(np.argmax(np.where(ok, weight, -1.0)), ok.shape)
        labels.append(tuple(sorted((int(man[i]), int(man[j])))))
    return replace(peaks, labels=tuple(labels))


@dataclass(frozen=True)
class CharacteristicTimes:
    n: float
    F: float  # a.u.
    tau_kepler: float  # ps
    tau_stark: float
    tau_frac: float

    def rows(self):
        return [
            ("kepler", "2 pi n^3", self.tau_kepler),
            ("stark", "2 pi / (3 F n)", self.tau_stark),
            ("fractional", "2 pi n^4 / 3", self.tau_frac),
        ]


def characteristic_times(n: float, field_vcm: float = 0.0) -> CharacteristicTimes:
    if not n > 0:
        raise ConfigError("n must be positive")
    if field_vcm < 0:
        raise ConfigError("field must be non-negative")
    ps = ps_to_au(1.0)
    F = vcm_to_au(field_vcm)
    stark = math.inf if F == 0 else 2 * math.pi / (3 * F * n) / ps
    return CharacteristicTimes(
        float(n), F, 2 * math.pi * n**3 / ps, stark, 2 * math.pi * n**4 / 3 / ps
    )


def kepler_frequency_cm1(n: float) -> float:
    """1 / tau_Kepler in cm^-1; equals the n -> n + 1 level spacing to leading order."""
    return float(beat_ps_to_cm1(1.0 / characteristic_times(n).tau_kepler))


# --- envelope metrics --------------------------------------------------------


def beat_envelope(series, dt_ps: float, period_ps: float) -> np.ndarray:
    """Sliding RMS of the oscillating part of a line-out.

    The slow background (running mean over ``period_ps``) is removed and the
    squared remainder is averaged over the same window.
    """
    y = np.asarray(series, dtype=float)
    w = max(int(round(period_ps / dt_ps)), 1)
    osc = y - uniform_filter1d(y, w, axis=0, mode="nearest")
    return np.sqrt(uniform_filter1d(osc**2, w, axis=0, mode="nearest"))


def autocorrelation(series, dt_ps: float, max_lag_ps: float, min_lag_ps: float = 0.0):
    """Pearson correlation of the series with itself shifted by each lag.

    Returns ``(lags_ps, r)``.  Each lag uses only the overlapping samples, so
    lags close to the record length rest on few points.
    """
    y = np.asarray(series, dtype=float)
    k0 = max(int(math.ceil(min_lag_ps / dt_ps - 1e-9)), 1)
    k1 = min(int(math.floor(max_lag_ps / dt_ps + 1e-9)), y.shape[0] - 3)
    ks = np.arange(k0, k1 + 1)
    r = np.empty(ks.size)
    for i, k in enumerate(ks):
        a, b = y[:-k].ravel(), y[k:].ravel()
        sa, sb = a.std(), b.std()
        r[i] = 0.0 if sa == 0 or sb == 0 else float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))
    return ks * dt_ps, r


def _refine_peak(x, y, k) -> float:
    if 0 < k < y.size - 1:
        p, _ = _parabolic(y, k)
        return float(x[k] + p * (x[1] - x[0]))
    return float(x[k])


def recurrence_near(lags, r, expected_ps: float) -> float:
    """Lag of the autocorrelation maximum closest to ``expected_ps`` (refined)."""
    idx, _ = find_peaks(r)
    if idx.size == 0:
        return math.nan
    k = idx[np.argmin(np.abs(lags[idx] - expected_ps))]
    return _refine_peak(lags, r, k)


def strongest_recurrence(lags, r) -> float:
    """Lag of the highest local maximum of the autocorrelation (refined)."""
    idx, _ = find_peaks(r)
    if idx.size == 0:
        return math.nan
    return _refine_peak(lags, r, idx[np.argmax(r[idx])])


def minimum_in(times, env, t_lo: float, t_hi: float) -> float:
    """Time of the deepest local minimum of ``env`` inside [t_lo, t_hi], else nan."""
    t = np.asarray(times)
    idx, _ = find_peaks(-np.asarray(env))
    idx = idx[(t[idx] >= t_lo) & (t[idx] <= t_hi)]
    if idx.size == 0:
        return math.nan
    return float(t[idx[np.argmin(np.asarray(env)[idx])]])


def local_dominant_frequency(series, times_ps, center_ps: float, width_ps: float = 10.0, pad: int = 16) -> float:
    """Strongest spectral component (cm^-1) of a Hann-windowed segment.

    A 10 ps segment has a resolution of about 3 cm^-1; zero padding only
    interpolates the spectrum.
    """
    t = np.asarray(times_ps, dtype=float)
    y = np.asarray(series, dtype=float)
    sel = np.abs(t - center_ps) <= width_ps / 2
    if sel.sum() < 8:
        raise ConfigError("window holds too few samples")
    seg = y[sel] - y[sel].mean()
    seg = seg * get_window("hann", seg.size, fftbins=False)
    dt = _uniform_step(t)
    mag = np.abs(np.fft.rfft(seg, n=pad * seg.size))
    freqs = beat_ps_to_cm1(np.fft.rfftfreq(pad * seg.size, d=dt))
    k = int(np.argmax(mag[1:])) + 1
    return _refine_peak(freqs, mag, k)


def ridge_times(times, series, prominence: float = 0.1) -> np.ndarray:
    """Delays of local maxima whose prominence exceeds a fraction of the series range."""
    y = np.asarray(series, dtype=float)
    span = np.ptp(y)
    if span == 0:
        return np.zeros(0)
    idx, _ = find_peaks(y, prominence=prominence * span)
    return np.asarray(times)[idx]


def slow_pattern(signal, dt_ps: float, period_ps: float) -> np.ndarray:
    """Carpet rows averaged over ``period_ps`` with the time mean of each bin removed."""
    s = uniform_filter1d(np.asarray(signal, dtype=float), max(int(round(period_ps / dt_ps)), 1), axis=0, mode="nearest")
    return s - s.mean(axis=0)
