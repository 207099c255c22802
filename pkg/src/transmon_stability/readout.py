"""Single-shot readout analysis: QDA discrimination, fidelity and temperature."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import CONSTANTS
from .domain import IQShotSet
from .errors import ConfigError, InvariantError, RegularizationWarning

RIDGE_FACTOR = 1e-6


@dataclass(frozen=True, eq=False)
class DiscriminationModel:
    """Two-class Gaussian (QDA) model in the IQ plane.

    ``means`` has shape (2, 2) and ``covariances`` shape (2, 2, 2), indexed
    by class. Immutable after fitting.
    """

    means: np.ndarray
    covariances: np.ndarray
    priors: tuple = (0.5, 0.5)
    regularized: tuple = (False, False)

    def __post_init__(self):
        m = np.array(self.means, float).reshape(2, 2)
        c = np.array(self.covariances, float).reshape(2, 2, 2)
        for k in range(2):
            if not np.allclose(c[k], c[k].T, rtol=1e-12, atol=0):
                raise InvariantError(f"covariance of class {k} is not symmetric")
            if np.linalg.eigvalsh(c[k]).min() <= 0:
                raise InvariantError(f"covariance of class {k} is not positive definite")
        m.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "covariances", c)
        prec = np.linalg.inv(c)
        prec.flags.writeable = False
        object.__setattr__(self, "_precisions", prec)
        object.__setattr__(self, "_logdets", np.linalg.slogdet(c)[1])

    @property
    def quadratic_term(self) -> np.ndarray:
        """Matrix Q of the x^T Q x part of the log-likelihood ratio (class 1 vs 0)."""
        return 0.5 * (self._precisions[0] - self._precisions[1])

    def log_likelihood_ratio(self, points) -> np.ndarray:
        """log p(x | 1) + log pi_1 - log p(x | 0) - log pi_0."""
        x = np.atleast_2d(np.asarray(points, float))
        out = np.zeros(x.shape[0])
        for k, sign in ((1, 1.0), (0, -1.0)):
            d = x - self.means[k]
            maha = np.einsum("ni,ij,nj->n", d, self._precisions[k], d)
            out += sign * (-0.5 * maha - 0.5 * self._logdets[k] + math.log(self.priors[k]))
        return out

    def predict(self, points) -> np.ndarray:
        return (self.log_likelihood_ratio(points) > 0).astype(np.int64)

    @property
    def delta_m(self) -> float:
        return float(np.linalg.norm(self.means[1] - self.means[0]))


def _regularize(cov: np.ndarray, fallback_scale: float):
    scale = np.trace(cov) / 2.0
    if not scale > 0:
        scale = fallback_scale
    eps = RIDGE_FACTOR * scale
    if np.linalg.eigvalsh(cov).min() > eps:
        return cov, False
    return cov + eps * np.eye(2), True


def fit_discriminator(shots: IQShotSet) -> DiscriminationModel:
    """Per-class sample means and covariances, priors fixed at 1/2.

    A class covariance that is singular (smallest eigenvalue at or below
    ``1e-6 * trace / 2``) gets that ridge added, with a warning.
    """
    pts = shots.points
    means, covs, reg = [], [], []
    spread = float(np.trace(np.atleast_2d(np.cov(pts, rowvar=False)))) / 2.0
    fallback = spread if spread > 0 else 1.0
    for k in (0, 1):
        x = pts[shots.prepared_state == k]
        if x.shape[0] < 2:
            raise InvariantError(f"class {k} needs at least 2 shots, got {x.shape[0]}")
        cov = np.cov(x, rowvar=False)
        cov = 0.5 * (cov + cov.T)
        cov, flag = _regularize(cov, fallback)
        if flag:
            warnings.warn(f"class {k} covariance is singular; ridge regularization applied",
                          RegularizationWarning, stacklevel=2)
        means.append(x.mean(axis=0))
        covs.append(cov)
        reg.append(flag)
    return DiscriminationModel(np.array(means), np.array(covs), (0.5, 0.5), tuple(reg))


def effective_temperature(f_q: float, p10: float, p00: float) -> float:
    """Boltzmann temperature in kelvin, ``-h f_q / (k_B ln(p10 / p00))``.

    Returns 0.0 when ``p10 == 0`` and ``inf`` when ``p10 >= p00``; callers
    flag both cases.
    """
    if not f_q > 0:
        raise ConfigError("f_q must be positive")
    if not (0 <= p10 <= 1 and 0 < p00 <= 1):
        raise InvariantError("populations must lie in [0, 1] with p00 > 0")
    if p10 == 0:
        return 0.0
    if p10 >= p00:
        return math.inf
    return -CONSTANTS.h * f_q / (CONSTANTS.k_B * math.log(p10 / p00))


def readout_fidelity(confusion) -> float:
    """1 - (P(0|1) + P(1|0)) / 2 from a confusion matrix with rows P(.|prepared)."""
    c = np.asarray(confusion, float)
    return float(1.0 - 0.5 * (c[1, 0] + c[0, 1]))


@dataclass(frozen=True)
class ReadoutMetrics:
    """``confusion[j, i]`` is P(measured i | prepared j); rows sum to 1."""

    delta_m: float
    fidelity: float
    confusion: tuple
    t_eff: float
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        c = np.asarray(self.confusion, float)
        if c.shape != (2, 2) or not np.allclose(c.sum(axis=1), 1.0, atol=1e-12):
            raise InvariantError("confusion must be 2x2 with rows summing to 1")
        object.__setattr__(self, "confusion", tuple(tuple(float(v) for v in row) for row in c))
        object.__setattr__(self, "flags", frozenset(self.flags))

    @property
    def t_eff_mk(self) -> float:
        return self.t_eff * 1e3

    def to_dict(self) -> dict:
        return {
            "delta_m": self.delta_m,
            "fidelity": self.fidelity,
            "confusion": [list(r) for r in self.confusion],
            "t_eff_mk": self.t_eff_mk,
            "flags": sorted(self.flags),
        }


def compute_metrics(shots: IQShotSet, model: DiscriminationModel,
                    f_q: float | None = None) -> ReadoutMetrics:
    """Delta_m, fidelity, confusion matrix and effective temperature.

    ``f_q`` falls back to ``shots.f_q``.
    """
    f_q = shots.f_q if f_q is None else f_q
    if f_q is None:
        raise ConfigError("qubit frequency required for the effective temperature")
    pred = model.predict(shots.points)
    conf = np.zeros((2, 2))
    for j in (0, 1):
        sel = shots.prepared_state == j
        p1 = float(np.mean(pred[sel]))
        conf[j] = (1.0 - p1, p1)
    flags = set()
    t_eff = effective_temperature(f_q, conf[0, 1], conf[0, 0])
    if conf[0, 1] == 0:
        flags.add("t_eff_floor")
    elif math.isinf(t_eff):
        flags.add("population_inversion")
    if any(model.regularized):
        flags.add("regularized")
    return ReadoutMetrics(model.delta_m, readout_fidelity(conf), conf, t_eff, flags)


def analyze_shots(shots: IQShotSet, f_q: float | None = None):
    """Fit a fresh discriminator to ``shots`` and compute its metrics."""
    model = fit_discriminator(shots)
    return model, compute_metrics(shots, model, f_q)
