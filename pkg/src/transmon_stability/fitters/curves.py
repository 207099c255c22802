"""Decay and Ramsey curve fits."""

from __future__ import annotations

import numpy as np
from scipy.signal import hilbert

from ..domain import DecayCurve, FitResult, RamseyCurve
from ..errors import DegenerateFitError, FitError
from . import models
from .lm import levenberg_marquardt


def _is_flat(y: np.ndarray) -> bool:
    return float(np.ptp(y)) <= 1e-12 * max(1.0, float(np.max(np.abs(y))))


def _stderr(res, scales) -> np.ndarray:
    cov = res.covariance()
    return np.sqrt(np.clip(np.diag(cov), 0.0, None)) * scales


def exponential_guess(tau: np.ndarray, y: np.ndarray) -> np.ndarray:
    """B from the tail mean, A = y(0) - B, T1 from a log-linear fit of y - B."""
    n_tail = max(2, tau.size // 8)
    B = float(np.mean(y[-n_tail:]))
    A = float(y[0] - B)
    sign = 1.0 if A >= 0 else -1.0
    z = sign * (y - B)
    keep = z > 0.05 * abs(A)
    T = None
    if np.count_nonzero(keep) >= 2:
        slope = np.polyfit(tau[keep], np.log(z[keep]), 1, w=np.sqrt(z[keep]))[0]
        if slope < 0:
            T = -1.0 / slope
    if T is None:
        T = float(tau[-1] - tau[0]) / 3.0
    return np.array([A, B, T])


def fit_exponential(curve: DecayCurve) -> FitResult:
    """Fit P1(tau) = A exp(-tau/T1) + B."""
    tau = np.asarray(curve.delays, float)
    y = np.asarray(curve.populations, float)
    if tau.size < 4:
        raise FitError("exponential fit needs at least 4 points")
    if _is_flat(y):
        raise DegenerateFitError("flat decay curve: amplitude indistinguishable from zero")

    tscale = float(tau[-1]) if tau[-1] > 0 else 1.0
    t = tau / tscale
    p0 = exponential_guess(t, y)
    res = levenberg_marquardt(
        lambda p: models.exponential(t, p) - y,
        lambda p: models.exponential_jac(t, p),
        p0,
        feasible=lambda p: p[2] > 0,
    )
    A, B, T = res.x
    scales = np.array([1.0, 1.0, tscale])
    err = _stderr(res, scales)
    if not abs(A) > err[0] and err[0] > 0:
        raise DegenerateFitError("decay amplitude indistinguishable from zero")
    flags = set()
    if T * tscale > 10 * tau[-1]:
        flags.add("t1_beyond_window")
    return FitResult(
        "exponential",
        dict(zip(models.EXPONENTIAL_PARAMS, (A, B, T * tscale))),
        dict(zip(models.EXPONENTIAL_PARAMS, err)),
        res.residual_norm,
        res.converged,
        flags,
        {"nit": res.nit, "message": res.message},
    )


def spectral_peaks(tau: np.ndarray, y: np.ndarray, pad: int = 16, n_peaks: int = 3):
    """Candidate frequencies from the zero-padded DFT of ``y - mean``."""
    dt = float(np.median(np.diff(tau)))
    z = y - np.mean(y)
    nfft = int(2 ** np.ceil(np.log2(tau.size * pad)))
    power = np.abs(np.fft.rfft(z, nfft))
    freqs = np.fft.rfftfreq(nfft, dt)
    # local maxima, parabolic refinement in bin index
    idx = np.flatnonzero((power[1:-1] >= power[:-2]) & (power[1:-1] >= power[2:])) + 1
    if power[0] >= power[1]:
        idx = np.concatenate([[0], idx])
    idx = idx[np.argsort(power[idx])[::-1]][:n_peaks]
    out = []
    for i in idx:
        if 0 < i < power.size - 1:
            a, b, c = power[i - 1], power[i], power[i + 1]
            den = a - 2 * b + c
            shift = 0.5 * (a - c) / den if den != 0 else 0.0
            out.append(float((i + shift) * (freqs[1] - freqs[0])))
        else:
            out.append(float(freqs[i]))
    return out


def envelope_time(tau: np.ndarray, y: np.ndarray) -> float:
    """Decay time from a log-linear fit of the analytic-signal magnitude."""
    env = np.abs(hilbert(y - np.mean(y)))
    n = tau.size
    sl = slice(n // 10, max(n // 10 + 3, (8 * n) // 10))
    e = env[sl]
    keep = e > 1e-12
    span = float(tau[-1] - tau[0])
    if np.count_nonzero(keep) >= 3:
        slope = np.polyfit(tau[sl][keep], np.log(e[keep]), 1, w=e[keep])[0]
        if slope < 0:
            return float(np.clip(-1.0 / slope, span / 20, 20 * span))
    return span / 2.0


def fold_frequency(f: float, fs: float) -> float:
    """Map ``f`` onto the baseband [0, fs/2]."""
    r = np.mod(abs(f), fs)
    return float(min(r, fs - r))


def alias_images(f_fold: float, fs: float, k_max: int = 8) -> np.ndarray:
    ks = np.arange(0, k_max + 1)
    return np.unique(np.abs(np.concatenate([ks * fs + f_fold, ks * fs - f_fold])))


def fit_damped_cosine(curve: RamseyCurve) -> FitResult:
    """Fit P1(tau) = A cos(2 pi f tau + phi0) exp(-tau/T2*) + B.

    The frequency is reported folded into [0, Nyquist]. Flags:
    ``aliased`` when an alias image lies closer to the set detuning than the
    folded value does; ``unresolvable`` when f < 1/t_max.
    """
    tau = np.asarray(curve.delays, float)
    y = np.asarray(curve.populations, float)
    if tau.size < 8:
        raise FitError("damped-cosine fit needs at least 8 points")
    if _is_flat(y):
        raise DegenerateFitError("flat Ramsey curve")
    fs = curve.sampling_rate
    nyq = 0.5 * fs

    tscale = float(tau[-1])
    t = tau / tscale
    B0 = float(np.mean(y))
    T0 = envelope_time(t, y)
    A0 = float(np.max(np.abs(hilbert(y - B0))[: max(2, tau.size // 10)]))

    def solve(p0):
        return levenberg_marquardt(
            lambda p: models.damped_cosine(t, p) - y,
            lambda p: models.damped_cosine_jac(t, p),
            p0,
            feasible=lambda p: p[4] > 0,
        )

    best = None
    for f_hz in spectral_peaks(tau, y):
        f0 = f_hz * tscale
        z = (y - B0) * np.exp(-1j * 2 * np.pi * f0 * t)
        phi_est = float(np.angle(np.sum(z * np.exp(-t / T0))))
        for phi0 in (phi_est, 0.0, np.pi):
            res = solve(np.array([A0, B0, phi0, f0, T0]))
            if best is None or res.cost < best.cost:
                best = res
    res = best
    A, B, phi, f, T = res.x
    if f < 0:
        f, phi = -f, -phi
    if A < 0:
        A, phi = -A, phi + np.pi
    f_hz = f / tscale
    flags = set()
    if f_hz > nyq * (1 + 1e-9):
        # Refit from the folded value; the sampled data cannot tell them apart.
        folded = fold_frequency(f_hz, fs) * tscale
        res2 = solve(np.array([A, B, -phi, folded, T]))
        if res2.cost <= res.cost * (1 + 1e-6):
            res = res2
            A, B, phi, f, T = res.x
            if f < 0:
                f, phi = -f, -phi
            if A < 0:
                A, phi = -A, phi + np.pi
            f_hz = f / tscale
        else:
            f_hz = fold_frequency(f_hz, fs)
            flags.add("folded_without_refit")
    phi = float(np.angle(np.exp(1j * phi)))

    images = alias_images(f_hz, fs)
    nearest = images[np.argmin(np.abs(images - curve.set_detuning))]
    if abs(nearest - f_hz) > 1e-9 * fs and abs(nearest - curve.set_detuning) < abs(f_hz - curve.set_detuning):
        flags.add("aliased")
    if f_hz < 1.0 / curve.t_max:
        flags.add("unresolvable")

    err = _stderr(res, np.array([1.0, 1.0, 1.0, 1.0 / tscale, tscale]))
    return FitResult(
        "damped_cosine",
        dict(zip(models.DAMPED_COSINE_PARAMS, (A, B, phi, f_hz, T * tscale))),
        dict(zip(models.DAMPED_COSINE_PARAMS, err)),
        res.residual_norm,
        res.converged,
        flags,
        {"nit": res.nit, "message": res.message, "nyquist_hz": nyq,
         "set_detuning_hz": curve.set_detuning, **curve.meta},
    )


def resolve_drive_calibration(f_drive_i: float, f_ramsey: float, detuning: float) -> float:
    """Calibrated drive frequency f_drive_i - (f_ramsey - detuning).

    Valid when the detuning exceeds the initial drive offset |f_drive_i - f_q|,
    so that f_ramsey = detuning + (f_drive_i - f_q) stays positive.
    """
    return f_drive_i - (f_ramsey - detuning)
