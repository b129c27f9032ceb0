"""Per-window feature primitives and the two fixed-width feature banks.

Bank A (width 43) = 14 per-axis slots x 3 axes + average resultant:
    mean, median, variance, std, IQR, acf lag-1, pacf lag-2,
    AR(2) coefficients (2), MA(1) coefficient, ARMA(1,1) coefficients (2),
    Haar approximation energy, Haar detail energy.

Bank B (width 70) = 23 per-axis slots x 3 axes + average resultant:
    mean, mean absolute deviation, std, average peak gap,
    10 binned-distribution fractions, min, max, range, RMS, mean energy,
    zero-crossing count about the mean, skewness (excess-free m3/m2^1.5),
    excess kurtosis, median.

Every slot has a 0 sentinel for degenerate inputs (constant signal, window
too short for a model fit), so extracted vectors are always finite.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import IllConditionedWarning, LengthMismatch, SignalTooShort
from .ingest import Activity
from .preprocess import Window

_EPS = 1e-12


def _demeaned(signal: np.ndarray) -> tuple[np.ndarray, float]:
    signal = np.asarray(signal, dtype=float)
    centered = signal - signal.mean()
    return centered, float(np.sum(centered * centered))


def _sample_acf(signal: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased sample ACF r(0..max_lag); constant input yields all zeros."""
    centered, denom = _demeaned(signal)
    if denom <= _EPS * max(1.0, float(np.sum(np.square(signal)))):
        return np.zeros(max_lag + 1)
    r = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        r[k] = float(np.dot(centered[: len(centered) - k], centered[k:])) / denom
    return r


def autocorrelation(signal: np.ndarray, lag: int) -> float:
    if lag < 0:
        raise ValueError("lag must be non-negative")
    signal = np.asarray(signal, dtype=float)
    if signal.size < lag + 2:
        raise SignalTooShort(f"need at least {lag + 2} samples for lag {lag}")
    r = _sample_acf(signal, lag)
    if not np.any(r):
        return 0.0
    return float(r[lag])


def _durbin_levinson(r: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Levinson recursion on ACF r(0..order); returns (phi, pacf per order)."""
    phi = np.zeros(order)
    pacf = np.zeros(order)
    prev = np.zeros(order)
    sigma2 = r[0]
    for k in range(1, order + 1):
        acc = r[k] - float(np.dot(prev[: k - 1], r[1:k][::-1]))
        kappa = acc / sigma2 if sigma2 > _EPS else 0.0
        pacf[k - 1] = kappa
        phi[: k - 1] = prev[: k - 1] - kappa * prev[: k - 1][::-1]
        phi[k - 1] = kappa
        sigma2 *= 1.0 - kappa * kappa
        prev[:k] = phi[:k]
    return phi, pacf


def partial_autocorrelation(signal: np.ndarray, lag: int) -> float:
    if lag < 1:
        raise ValueError("lag must be positive")
    signal = np.asarray(signal, dtype=float)
    if signal.size < lag + 2:
        raise SignalTooShort(f"need at least {lag + 2} samples for lag {lag}")
    r = _sample_acf(signal, lag)
    if not np.any(r):
        return 0.0
    _, pacf = _durbin_levinson(r, lag)
    return float(pacf[lag - 1])


def fit_ar(signal: np.ndarray, order: int) -> np.ndarray:
    """Yule-Walker AR coefficients via the Levinson recursion."""
    if order < 1:
        raise ValueError("order must be positive")
    signal = np.asarray(signal, dtype=float)
    if signal.size < 10 * order:
        raise SignalTooShort(f"need at least {10 * order} samples for AR({order})")
    r = _sample_acf(signal, order)
    if not np.any(r):
        return np.zeros(order)
    phi, _ = _durbin_levinson(r, order)
    return phi


def _autocovariances(signal: np.ndarray, max_lag: int) -> np.ndarray:
    centered, denom = _demeaned(signal)
    n = len(centered)
    g = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        g[k] = float(np.dot(centered[: n - k], centered[k:])) / n
    return g


def fit_ma(signal: np.ndarray, order: int) -> np.ndarray:
    """Innovations-algorithm MA coefficient estimates."""
    if order < 1:
        raise ValueError("order must be positive")
    signal = np.asarray(signal, dtype=float)
    n = signal.size
    if n < 10 * order:
        raise SignalTooShort(f"need at least {10 * order} samples for MA({order})")
    m = min(n - 1, max(20, 2 * order))
    gamma = _autocovariances(signal, m)
    if gamma[0] <= _EPS * max(1.0, float(np.mean(np.square(signal)))):
        return np.zeros(order)
    theta = np.zeros((m + 1, m + 1))
    v = np.zeros(m + 1)
    v[0] = gamma[0]
    for i in range(1, m + 1):
        for k in range(i):
            acc = gamma[i - k]
            for j in range(k):
                acc -= theta[k, k - j] * theta[i, i - j] * v[j]
            theta[i, i - k] = acc / v[k] if v[k] > _EPS else 0.0
        v[i] = gamma[0] - float(np.dot(theta[i, 1 : i + 1][::-1] ** 2, v[:i]))
        if v[i] <= _EPS:
            v[i] = _EPS
    return theta[m, 1 : order + 1].copy()


def fit_arma(signal: np.ndarray, p: int, q: int) -> np.ndarray:
    """Hannan-Rissanen two-stage ARMA estimate: long-AR residuals, then OLS.

    Returns p AR coefficients followed by q MA coefficients. A rank-deficient
    second-stage regression emits IllConditionedWarning and returns zeros.
    """
    if p < 1 or q < 1:
        raise ValueError("p and q must be positive")
    signal = np.asarray(signal, dtype=float)
    n = signal.size
    if n < 10 * (p + q):
        raise SignalTooShort(f"need at least {10 * (p + q)} samples for ARMA({p},{q})")
    centered, denom = _demeaned(signal)
    if denom <= _EPS * max(1.0, float(np.sum(np.square(signal)))):
        return np.zeros(p + q)

    h = min(max(20, 2 * (p + q)), n // 4)
    phi_long, _ = _durbin_levinson(_sample_acf(signal, h), h)
    resid = centered[h:].copy()
    for j in range(1, h + 1):
        resid -= phi_long[j - 1] * centered[h - j : n - j]
    e = np.concatenate([np.zeros(h), resid])

    start = h + max(p, q)
    rows = n - start
    design = np.empty((rows, p + q))
    for j in range(1, p + 1):
        design[:, j - 1] = centered[start - j : n - j]
    for j in range(1, q + 1):
        design[:, p + j - 1] = e[start - j : n - j]
    target = centered[start:]
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < p + q:
        warnings.warn("ARMA design matrix is rank deficient", IllConditionedWarning)
        return np.zeros(p + q)
    return coef


def haar_dwt_energies(signal: np.ndarray) -> tuple[float, float]:
    """One-level orthonormal Haar band energies (mean squared coefficient)."""
    signal = np.asarray(signal, dtype=float)
    if signal.size < 2:
        raise SignalTooShort("need at least 2 samples for the Haar transform")
    n = signal.size - (signal.size % 2)
    a = signal[:n:2]
    b = signal[1:n:2]
    approx = (a + b) / np.sqrt(2.0)
    detail = (a - b) / np.sqrt(2.0)
    return float(np.mean(approx**2)), float(np.mean(detail**2))


def binned_distribution(signal: np.ndarray, n_bins: int = 10) -> np.ndarray:
    """Fraction of samples per equal-width bin spanning [min, max]."""
    if n_bins < 1:
        raise ValueError("n_bins must be positive")
    signal = np.asarray(signal, dtype=float)
    if signal.size == 0:
        raise ValueError("signal must be non-empty")
    lo, hi = float(signal.min()), float(signal.max())
    out = np.zeros(n_bins)
    if hi <= lo:
        out[0] = 1.0
        return out
    idx = np.floor((signal - lo) / (hi - lo) * n_bins).astype(int)
    idx = np.clip(idx, 0, n_bins - 1)  # max value lands in the last bin
    counts = np.bincount(idx, minlength=n_bins)
    return counts / signal.size


def peak_interval_stats(signal: np.ndarray) -> float:
    """Mean gap in samples between consecutive strict local maxima; <2 peaks -> 0."""
    signal = np.asarray(signal, dtype=float)
    if signal.size < 3:
        raise SignalTooShort("need at least 3 samples to find peaks")
    mid = signal[1:-1]
    peaks = np.flatnonzero((mid > signal[:-2]) & (mid > signal[2:])) + 1
    if peaks.size < 2:
        return 0.0
    return float(np.mean(np.diff(peaks)))


def average_resultant(sx: np.ndarray, sy: np.ndarray, sz: np.ndarray) -> float:
    sx, sy, sz = (np.asarray(a, dtype=float) for a in (sx, sy, sz))
    if not (sx.size == sy.size == sz.size):
        raise LengthMismatch("axis signals must have equal lengths")
    if sx.size == 0:
        raise LengthMismatch("axis signals must be non-empty")
    return float(np.mean(np.sqrt(sx**2 + sy**2 + sz**2)))


class Bank(Enum):
    A43 = "a"
    B70 = "b"


BANK_WIDTH = {Bank.A43: 43, Bank.B70: 70}

_AXES = ("x", "y", "z")

_BANK_A_AXIS_SLOTS = [
    "mean", "median", "variance", "std", "iqr",
    "acf_lag1", "pacf_lag2",
    "ar2_c1", "ar2_c2", "ma1_c1", "arma11_ar", "arma11_ma",
    "haar_approx_energy", "haar_detail_energy",
]
_BANK_B_AXIS_SLOTS = (
    ["mean", "mean_abs_dev", "std", "avg_peak_gap"]
    + [f"bin{i}" for i in range(10)]
    + ["min", "max", "range", "rms", "energy",
       "zero_crossings", "skewness", "kurtosis", "median"]
)

BANK_A_LAYOUT: tuple[tuple[str, str], ...] = tuple(
    (name, axis) for axis in _AXES for name in _BANK_A_AXIS_SLOTS
) + (("avg_resultant", "xyz"),)
BANK_B_LAYOUT: tuple[tuple[str, str], ...] = tuple(
    (name, axis) for axis in _AXES for name in _BANK_B_AXIS_SLOTS
) + (("avg_resultant", "xyz"),)

assert len(BANK_A_LAYOUT) == 43
assert len(BANK_B_LAYOUT) == 70


@dataclass(frozen=True)
class FeatureVector:
    bank: Bank
    values: np.ndarray
    activity: Activity
    subject_id: str

    def __post_init__(self):
        if len(self.values) != BANK_WIDTH[self.bank]:
            raise ValueError(
                f"bank {self.bank.name} expects width {BANK_WIDTH[self.bank]}, "
                f"got {len(self.values)}"
            )


def _zero_on_short(fn, *args, width=1):
    try:
        out = fn(*args)
    except SignalTooShort:
        return np.zeros(width) if width > 1 else 0.0
    return out


def _axis_features_a(sig: np.ndarray) -> list[float]:
    q75, q25 = np.percentile(sig, [75, 25])
    feats = [
        float(np.mean(sig)),
        float(np.median(sig)),
        float(np.var(sig)),
        float(np.std(sig)),
        float(q75 - q25),
        _zero_on_short(autocorrelation, sig, 1),
        _zero_on_short(partial_autocorrelation, sig, 2),
    ]
    ar = _zero_on_short(fit_ar, sig, 2, width=2)
    ma = _zero_on_short(fit_ma, sig, 1, width=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        arma = _zero_on_short(fit_arma, sig, 1, 1, width=2)
    approx_e, detail_e = haar_dwt_energies(sig)
    feats.extend([float(ar[0]), float(ar[1])])
    feats.append(float(np.atleast_1d(ma)[0]))
    feats.extend([float(arma[0]), float(arma[1])])
    feats.extend([approx_e, detail_e])
    return feats


def extract_bank_a(w: Window) -> FeatureVector:
    vals: list[float] = []
    for sig in (w.x, w.y, w.z):
        vals.extend(_axis_features_a(sig))
    vals.append(average_resultant(w.x, w.y, w.z))
    return FeatureVector(Bank.A43, np.array(vals), w.activity, w.subject_id)


def _axis_features_b(sig: np.ndarray) -> list[float]:
    mean = float(np.mean(sig))
    centered = sig - mean
    m2 = float(np.mean(centered**2))
    feats = [
        mean,
        float(np.mean(np.abs(centered))),
        float(np.sqrt(m2)),
        _zero_on_short(peak_interval_stats, sig),
    ]
    feats.extend(binned_distribution(sig, 10).tolist())
    lo, hi = float(sig.min()), float(sig.max())
    signs = np.sign(centered)
    nz = signs != 0
    crossings = int(np.sum(np.diff(signs[nz]) != 0)) if np.any(nz) else 0
    if m2 > _EPS:
        skew = float(np.mean(centered**3) / m2**1.5)
        kurt = float(np.mean(centered**4) / m2**2 - 3.0)
    else:
        skew = kurt = 0.0
    feats.extend(
        [
            lo,
            hi,
            hi - lo,
            float(np.sqrt(np.mean(sig**2))),
            float(np.mean(sig**2)),
            float(crossings),
            skew,
            kurt,
            float(np.median(sig)),
        ]
    )
    return feats


def extract_bank_b(w: Window) -> FeatureVector:
    vals: list[float] = []
    for sig in (w.x, w.y, w.z):
        vals.extend(_axis_features_b(sig))
    vals.append(average_resultant(w.x, w.y, w.z))
    return FeatureVector(Bank.B70, np.array(vals), w.activity, w.subject_id)


def extract_bank(w: Window, bank: Bank) -> FeatureVector:
    return extract_bank_a(w) if bank is Bank.A43 else extract_bank_b(w)


def feature_matrix(
    vectors: list[FeatureVector],
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Stack FeatureVectors into (X, y class codes, subject ids)."""
    X = np.vstack([fv.values for fv in vectors])
    y = np.array([fv.activity.value for fv in vectors], dtype=int)
    subjects = [fv.subject_id for fv in vectors]
    return X, y, subjects
