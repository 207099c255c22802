"""Single-cooldown time-series analytics.

Histogram summaries through the mirrored Rician, dropout intervals,
cross-parameter coincidence of dropouts, the sigma_T1 versus <T1> benchmark
fit and the Ramsey frequency-offset series.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .domain import FitResult, TimeTrace
from .errors import AdmissionError, InsufficientDataError, InvariantError
from .fitters.rician import RicianParams, fit_rician_mirrored, moments_with_errors

MIN_BENCHMARK_SAMPLES = 500
MIN_BENCHMARK_HOURS = 10.0
SCALING_EXPONENT = 1.5


# -- distributions ----------------------------------------------------------------

@dataclass(frozen=True)
class DistributionSummary:
    """Mirrored-Rician summary of a coherence-time sample.

    Iterating yields ``(params, mean, std, skewness)``.
    """

    params: RicianParams
    fit: FitResult
    mean: float
    std: float
    mean_err: float
    std_err: float
    skewness: float
    sample_mean: float
    sample_std: float

    def __iter__(self):
        return iter((self.params, self.mean, self.std, self.skewness))

    @property
    def moments(self) -> tuple[float, float]:
        return self.mean, self.std


def distribution_summary(samples, method: str = "mle", lower: float = 0.0) -> DistributionSummary:
    """Fit the mirrored Rician and integrate it for mean and standard deviation.

    ``samples`` may be an array or a :class:`TimeTrace`. The density is
    integrated over ``[lower, t_max]`` (coherence times are nonnegative).
    """
    values = samples.values if isinstance(samples, TimeTrace) else samples
    values = np.asarray(values, float)
    params, fit = fit_rician_mirrored(values, method=method)
    mean, std, mean_err, std_err = moments_with_errors(params, fit.meta["covariance"], lower)
    return DistributionSummary(
        params, fit, mean, std, mean_err, std_err,
        float(stats.skew(values)), float(np.mean(values)), float(np.std(values, ddof=1)),
    )


# -- dropouts -------------------------------------------------------------------------

@dataclass(frozen=True)
class DropoutReport:
    intervals: tuple
    threshold: float
    affected_fraction: float
    runs: tuple = ()  # (first, last) sample indices per interval

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        object.__setattr__(self, "runs", tuple((int(a), int(b)) for a, b in self.runs))
        for a, b in ivs:
            if b < a:
                raise InvariantError("dropout interval ends before it starts")
        for (_, b), (c, _) in zip(ivs, ivs[1:]):
            if not c > b:
                raise InvariantError("dropout intervals must be disjoint and ordered")
        if not 0.0 <= self.affected_fraction <= 1.0:
            raise InvariantError("affected_fraction must lie in [0, 1]")

    def __len__(self):
        return len(self.intervals)

    def to_dict(self) -> dict:
        return {
            "intervals": [list(iv) for iv in self.intervals],
            "threshold": self.threshold,
            "affected_fraction": self.affected_fraction,
        }


def _runs(mask: np.ndarray, max_gap: int):
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > max_gap + 1)
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    ends = np.concatenate([idx[breaks], [idx[-1]]])
    return list(zip(starts.tolist(), ends.tolist()))


def detect_dropouts(trace: TimeTrace, moments=None, k: float = 1.0,
                    max_gap: int = 1) -> DropoutReport:
    """Intervals where the trace falls strictly below ``mean - k*std``.

    ``moments`` is ``(mean, std)``; when omitted they come from
    :func:`distribution_summary` of the trace. Runs separated by at most
    ``max_gap`` samples above threshold are merged; the merged span, gap
    samples included, counts toward ``affected_fraction``.
    """
    if trace.parameter_kind not in ("T1", "T2*"):
        raise InvariantError(f"dropout detection needs a T1 or T2* trace, got {trace.parameter_kind}")
    if moments is None:
        moments = distribution_summary(trace).moments
    mean, std = (float(x) for x in moments)
    threshold = mean - k * std
    runs = _runs(trace.values < threshold, max_gap)
    t = trace.timestamps
    covered = sum(b - a + 1 for a, b in runs)
    return DropoutReport(
        intervals=[(t[a], t[b]) for a, b in runs],
        threshold=threshold,
        affected_fraction=covered / len(trace),
        runs=runs,
    )


def dropout_mask(trace: TimeTrace, report: DropoutReport) -> np.ndarray:
    """Boolean mask of samples of ``trace`` lying inside any reported interval."""
    t = trace.timestamps
    mask = np.zeros(t.size, bool)
    for a, b in report.intervals:
        mask |= (t >= a) & (t <= b)
    return mask


def _nearest_indices(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """For each time in ``dst`` the index of the nearest time in ``src``."""
    j = np.clip(np.searchsorted(src, dst), 1, max(src.size - 1, 1))
    if src.size == 1:
        return np.zeros(dst.size, int)
    left = src[j - 1]
    right = src[j]
    return np.where(np.abs(dst - left) <= np.abs(right - dst), j - 1, j)


@dataclass(frozen=True)
class CoincidenceReport:
    overlap: dict = field(default_factory=dict)  # (a, b) -> fraction of a's dropouts inside b's
    flagged: tuple = ()
    threshold: float = 0.5

    def to_dict(self) -> dict:
        return {
            "overlap": {f"{a}->{b}": v for (a, b), v in sorted(self.overlap.items())},
            "flagged": [f"{a}->{b}" for a, b in self.flagged],
            "threshold": self.threshold,
        }


def coincidence_report(traces: dict, reports: dict, threshold: float = 0.5) -> CoincidenceReport:
    """Directional dropout overlap for every ordered pair of parameters.

    ``overlap[(a, b)]`` is the fraction of ``a``'s dropout samples whose
    nearest-in-time sample of ``b`` is also inside a ``b`` dropout. Pairs
    where ``a`` has no dropouts are omitted. Pairs above ``threshold`` are
    flagged.
    """
    names = sorted(set(traces) & set(reports))
    masks = {n: dropout_mask(traces[n], reports[n]) for n in names}
    overlap = {}
    for a, b in itertools.permutations(names, 2):
        ma = masks[a]
        if not ma.any():
            continue
        idx = _nearest_indices(traces[b].timestamps, traces[a].timestamps)
        mb = masks[b][idx]
        overlap[(a, b)] = float(np.count_nonzero(ma & mb) / np.count_nonzero(ma))
    flagged = tuple(sorted(p for p, v in overlap.items() if v > threshold))
    return CoincidenceReport(overlap, flagged, threshold)


# -- benchmark -------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingPoint:
    """One qubit or dataset for the sigma_T1 versus <T1> benchmark (SI units).

    Construction fails with :class:`AdmissionError` unless the dataset has
    more than 500 samples over at least 10 hours, or ``override`` is set.
    """

    label: str
    mean_t1: float
    std_t1: float
    n_samples: int
    span_hours: float
    std_t1_err: float | None = None
    override: bool = False

    def __post_init__(self):
        if not (self.mean_t1 > 0 and self.std_t1 > 0):
            raise InvariantError(f"{self.label}: mean_t1 and std_t1 must be positive")
        if self.std_t1_err is not None and not self.std_t1_err >= 0:
            raise InvariantError(f"{self.label}: std_t1_err must be >= 0")
        if not self.override and not self.admissible:
            raise AdmissionError(
                f"{self.label}: benchmark needs more than {MIN_BENCHMARK_SAMPLES} samples over "
                f">= {MIN_BENCHMARK_HOURS:g} h (got {self.n_samples} over {self.span_hours:g} h)"
            )

    @property
    def admissible(self) -> bool:
        return self.n_samples > MIN_BENCHMARK_SAMPLES and self.span_hours >= MIN_BENCHMARK_HOURS

    @classmethod
    def from_outcome(cls, outcome, override: bool = False) -> "ScalingPoint":
        err = outcome.std_t1_err
        return cls(outcome.label, outcome.mean_t1, outcome.std_t1, outcome.n_samples,
                   outcome.span_hours, err if err is not None and math.isfinite(err) else None,
                   override)


@dataclass(frozen=True)
class ScalingFit:
    """Result of fitting sigma = a * <T1>**1.5.

    ``a`` is in s^-1/2; ``a_us`` converts to microsecond units. The free
    exponent and prefactor come from a log-log regression and are
    diagnostics only.
    """

    a: float
    stderr: float
    exponent: float
    exponent_stderr: float
    prefactor_free: float
    n_points: int
    weighting: str
    labels: tuple = ()

    @property
    def a_us(self) -> float:
        return self.a * 1e-3

    @property
    def stderr_us(self) -> float:
        return self.stderr * 1e-3

    def to_dict(self, units: str = "si") -> dict:
        lab = units == "lab"
        return {
            "a": self.a_us if lab else self.a,
            "a_stderr": self.stderr_us if lab else self.stderr,
            "a_unit": "us^-1/2" if lab else "s^-1/2",
            "exponent_free": self.exponent,
            "exponent_free_stderr": self.exponent_stderr,
            "n_points": self.n_points,
            "weighting": self.weighting,
            "labels": list(self.labels),
        }


def fit_scaling_law(points) -> ScalingFit:
    """Weighted least squares of sigma = a * T**1.5, plus a free log-log slope.

    When every point carries ``std_t1_err`` the fixed-exponent fit weights
    point ``i`` by ``1 / (r_i * a * T_i**1.5)**2`` with ``r_i`` the relative
    error of ``std_t1``; the unknown ``a`` cancels, leaving a weighted mean
    of ``sigma_i / T_i**1.5``. Otherwise all points get equal weight. The
    stderr is scaled by the residual variance.
    """
    points = sorted(points, key=lambda p: p.label)
    n = len(points)
    if n < 3:
        raise InsufficientDataError(f"scaling fit needs at least 3 admitted points, got {n}")
    T = np.array([p.mean_t1 for p in points])
    s = np.array([p.std_t1 for p in points])
    errs = [p.std_t1_err for p in points]
    x = T ** SCALING_EXPONENT
    if all(e is not None and e > 0 for e in errs):
        rel = np.array(errs) / s
        w = 1.0 / (rel * x) ** 2
        weighting = "relative"
    else:
        rel = None
        w = np.ones(n)
        weighting = "unweighted"
    sxx = float(np.sum(w * x * x))
    a = float(np.sum(w * x * s) / sxx)
    resid = s - a * x
    chi2 = float(np.sum(w * resid * resid))
    stderr = math.sqrt(chi2 / (n - 1) / sxx)

    lx, ly = np.log(T), np.log(s)
    lw = 1.0 / rel ** 2 if rel is not None else np.ones(n)
    X = np.column_stack([np.ones(n), lx])
    A = X.T @ (lw[:, None] * X)
    coef = np.linalg.solve(A, X.T @ (lw * ly))
    r = ly - X @ coef
    dof = n - 2
    s2 = float(np.sum(lw * r * r)) / dof if dof > 0 else math.nan
    cov = np.linalg.inv(A) * s2
    return ScalingFit(a, stderr, float(coef[1]), math.sqrt(max(cov[1, 1], 0.0)),
                      float(math.exp(coef[0])), n, weighting, tuple(p.label for p in points))


# -- Ramsey frequency drift --------------------------------------------------------------

@dataclass(frozen=True)
class DriftSeries:
    trace: TimeTrace | None
    dropped: int
    max_abs_offset: float

    def to_dict(self) -> dict:
        return {"dropped": self.dropped, "max_abs_offset_hz": self.max_abs_offset,
                "n": 0 if self.trace is None else len(self.trace)}


def frequency_drift_series(fits, detuning: float, timestamps=None) -> DriftSeries:
    """Series of ``|f_ramsey| - detuning`` from Ramsey fits.

    Fits that did not converge or carry the ``aliased`` flag are dropped and
    counted. ``timestamps`` defaults to the fit index.
    """
    fits = list(fits)
    if timestamps is None:
        timestamps = np.arange(len(fits), dtype=float)
    timestamps = np.asarray(timestamps, float)
    if timestamps.size != len(fits):
        raise InvariantError("timestamps and fits differ in length")
    keep_t, keep_v = [], []
    dropped = 0
    for t, fit in zip(timestamps, fits):
        if not fit.reliable or "aliased" in fit.flags:
            dropped += 1
            continue
        keep_t.append(t)
        keep_v.append(abs(fit.params["f_ramsey"]) - detuning)
    if not keep_v:
        return DriftSeries(None, dropped, math.nan)
    trace = TimeTrace(keep_t, keep_v, "f_ramsey_offset", "Hz")
    return DriftSeries(trace, dropped, float(np.max(np.abs(keep_v))))
