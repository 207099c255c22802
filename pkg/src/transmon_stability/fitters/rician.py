"""Mirrored Rician distribution with an offset.

A coherence time ``t`` is modelled as ``t = t_max - x`` with ``x`` Rician
distributed (parameters ``nu``, ``sigma``), so the density is
``f(t) = rice(t_max - t; nu, sigma)`` for ``t <= t_max`` and zero above.
The shape captures the long low tail that dropouts leave in T1 and T2*
histograms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special, stats

from ..domain import FitResult
from ..errors import FitError, FitQualityWarning, InvariantError
from .lm import levenberg_marquardt

PARAMS = ("nu", "sigma", "t_max")
MIN_SAMPLES = 100
RECOMMENDED_SAMPLES = 500
GOF_THRESHOLD = 0.05


@dataclass(frozen=True)
class RicianParams:
    nu: float
    sigma: float
    t_max: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvariantError("Rician sigma must be positive")
        if not (math.isfinite(self.nu) and math.isfinite(self.t_max)):
            raise InvariantError("Rician parameters must be finite")
        object.__setattr__(self, "nu", abs(float(self.nu)))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "t_max", float(self.t_max))

    def as_array(self) -> np.ndarray:
        return np.array([self.nu, self.sigma, self.t_max])


def _bessel_ratio(z):
    """I1(z)/I0(z), overflow-free through the exponentially scaled forms."""
    return special.i1e(z) / special.i0e(z)


def rice_logpdf(x, nu, sigma):
    """Log density of the standard Rician; ``-inf`` for x <= 0."""
    x = np.asarray(x, float)
    s2 = sigma * sigma
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.abs(x * nu) / s2
        out = (np.log(x) - np.log(s2) - (x - abs(nu)) ** 2 / (2 * s2)
               + np.log(special.i0e(z)))
    return np.where(x > 0, out, -np.inf)


def rice_pdf(x, nu, sigma):
    return np.exp(rice_logpdf(x, nu, sigma))


def mirrored_logpdf(t, nu, sigma, t_max):
    return rice_logpdf(t_max - np.asarray(t, float), nu, sigma)


def mirrored_pdf(t, nu, sigma, t_max):
    return np.exp(mirrored_logpdf(t, nu, sigma, t_max))


def mirrored_cdf(t, nu, sigma, t_max):
    x = (t_max - np.asarray(t, float)) / sigma
    return np.where(x > 0, stats.rice.sf(np.maximum(x, 0), abs(nu) / sigma), 1.0)


def _dlog_dparams(t, nu, sigma, t_max):
    """Gradient of the mirrored log density w.r.t. (nu, sigma, t_max), shape (n, 3)."""
    x = t_max - np.asarray(t, float)
    s2 = sigma * sigma
    z = x * nu / s2
    R = _bessel_ratio(z)
    d_nu = -nu / s2 + x * R / s2
    d_sigma = -2.0 / sigma + (x * x + nu * nu) / (s2 * sigma) - 2.0 * x * nu * R / (s2 * sigma)
    d_t = 1.0 / x - x / s2 + nu * R / s2
    return np.column_stack([d_nu, d_sigma, d_t])


def mirrored_pdf_jac(t, nu, sigma, t_max):
    """Jacobian of the mirrored density w.r.t. (nu, sigma, t_max); zero off support."""
    t = np.asarray(t, float)
    inside = t < t_max
    out = np.zeros((t.size, 3))
    if np.any(inside):
        f = mirrored_pdf(t[inside], nu, sigma, t_max)
        out[inside] = f[:, None] * _dlog_dparams(t[inside], nu, sigma, t_max)
    return out


def negative_log_likelihood(params, samples) -> float:
    nu, sigma, t_max = params
    lp = mirrored_logpdf(samples, nu, sigma, t_max)
    return float(-np.sum(lp))


def negative_log_likelihood_grad(params, samples) -> np.ndarray:
    nu, sigma, t_max = params
    return -np.sum(_dlog_dparams(samples, nu, sigma, t_max), axis=0)


def sample_mirrored_rician(params: RicianParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``t_max - |nu + sigma (Z1 + i Z2)|``."""
    z = rng.standard_normal((2, n))
    x = np.hypot(params.nu + params.sigma * z[0], params.sigma * z[1])
    return params.t_max - x


# -- moments by quadrature ------------------------------------------------------

def _x_window(nu, sigma, upper):
    lo = max(0.0, nu - 40.0 * sigma)
    hi = min(upper, nu + 40.0 * sigma) if math.isfinite(upper) else nu + 40.0 * sigma
    return lo, hi


def _quad(fun, lo, hi, peak):
    pts = [p for p in (peak,) if lo < p < hi]
    val, err = integrate.quad(fun, lo, hi, points=pts or None, epsabs=0.0,
                              epsrel=1e-12, limit=400)
    return val, err


def rician_moments(params: RicianParams, lower: float = 0.0) -> tuple[float, float]:
    """Mean and standard deviation of the mirrored density on [lower, t_max].

    The density is renormalised over that interval (coherence times are
    nonnegative); with ``lower = -inf`` the full support is used.
    """
    nu, sigma, t_max = params.nu, params.sigma, params.t_max
    upper_x = t_max - lower if math.isfinite(lower) else math.inf
    if upper_x <= 0:
        raise InvariantError("t_max must exceed the lower integration limit")
    lo, hi = _x_window(nu, sigma, upper_x)
    if hi <= lo:
        raise InvariantError("no probability mass on the integration interval")
    peak = math.sqrt(nu * nu + sigma * sigma) if nu > 0 else sigma

    def pdf(x):
        return float(rice_pdf(x, nu, sigma))

    mass, _ = _quad(pdf, lo, hi, peak)
    if not mass > 0:
        raise InvariantError("no probability mass on the integration interval")
    mean_x = _quad(lambda x: x * pdf(x), lo, hi, peak)[0] / mass
    var_x = _quad(lambda x: (x - mean_x) ** 2 * pdf(x), lo, hi, peak)[0] / mass
    return t_max - mean_x, math.sqrt(max(var_x, 0.0))


def density_mass(params: RicianParams, lower: float = -math.inf) -> float:
    """Integral of the mirrored density over [lower, t_max]."""
    upper_x = params.t_max - lower if math.isfinite(lower) else math.inf
    lo, hi = _x_window(params.nu, params.sigma, upper_x)
    peak = math.sqrt(params.nu ** 2 + params.sigma ** 2)
    return _quad(lambda x: float(rice_pdf(x, params.nu, params.sigma)), lo, hi, peak)[0]


# -- fitting ------------------------------------------------------------------------

def _laguerre_half(r):
    """L_{1/2}(-r^2/2), exponentially scaled Bessel form."""
    x = -0.5 * r * r
    a = 0.25 * r * r
    return (1.0 - x) * special.i0e(a) - x * special.i1e(a)


def moment_guess(samples, bin_width: float | None = None) -> np.ndarray:
    """Method-of-moments start: t_max one bin above the maximum."""
    samples = np.asarray(samples, float)
    if bin_width is None:
        edges = np.histogram_bin_edges(samples, "auto")
        bin_width = float(edges[1] - edges[0])
    t_max = float(samples.max() + bin_width)
    x = t_max - samples
    m1, m2 = float(np.mean(x)), float(np.mean(x * x))
    ratio_target = m1 * m1 / m2
    # For a Rician, mean^2 / E[x^2] runs from pi/4 (nu = 0) up to 1.
    def h(r):
        mean_unit = math.sqrt(math.pi / 2) * _laguerre_half(r)
        return mean_unit ** 2 / (r * r + 2.0) - ratio_target

    if ratio_target <= math.pi / 4:
        r = 0.0
    elif h(60.0) < 0:
        r = 60.0
    else:
        r = optimize.brentq(h, 0.0, 60.0)
    sigma = math.sqrt(m2 / (r * r + 2.0))
    return np.array([r * sigma, sigma, t_max])


def _numeric_hessian(grad, x, rel=1e-5):
    k = x.size
    H = np.empty((k, k))
    for i in range(k):
        h = rel * max(abs(x[i]), 1e-8)
        e = np.zeros(k)
        e[i] = h
        H[:, i] = (grad(x + e) - grad(x - e)) / (2 * h)
    return 0.5 * (H + H.T)


def ks_statistic(samples, params: RicianParams) -> float:
    s = np.sort(np.asarray(samples, float))
    n = s.size
    cdf = mirrored_cdf(s, params.nu, params.sigma, params.t_max)
    d_plus = np.max(np.arange(1, n + 1) / n - cdf)
    d_minus = np.max(cdf - np.arange(0, n) / n)
    return float(max(d_plus, d_minus))


def _fit_mle(samples, p0):
    scale = float(np.std(samples)) or 1.0
    ref = float(samples.max())
    u = (samples - ref) / scale

    def to_unit(p):
        return np.array([p[0] / scale, p[1] / scale, (p[2] - ref) / scale])

    def from_unit(q):
        return np.array([q[0] * scale, q[1] * scale, q[2] * scale + ref])

    def fun(q):
        val = negative_log_likelihood(q, u)
        return val if np.isfinite(val) else 1e300

    def jac(q):
        g = negative_log_likelihood_grad(q, u)
        return np.where(np.isfinite(g), g, 0.0)

    bounds = [(None, None), (1e-8, None), (1e-12, 50.0)]
    starts = [to_unit(p0)]
    alt = to_unit(p0)
    alt[2] = min(3 * alt[2] + 0.5, 40.0)
    starts.append(alt)
    best = None
    for q0 in starts:
        q0[2] = min(max(q0[2], 1e-6), 49.0)
        r = optimize.minimize(fun, q0, jac=jac, method="L-BFGS-B", bounds=bounds,
                              options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-10})
        if best is None or r.fun < best.fun:
            best = r
    q = best.x
    at_bound = q[2] >= 50.0 * (1 - 1e-9)
    H = _numeric_hessian(lambda z: negative_log_likelihood_grad(z, u), q)
    try:
        cov_u = np.linalg.inv(H)
        err = np.sqrt(np.clip(np.diag(cov_u), 0, None)) * scale
        cov = cov_u * scale * scale
    except np.linalg.LinAlgError:
        err = np.full(3, np.nan)
        cov = np.full((3, 3), np.nan)
    converged = bool(best.success) or best.message.startswith("CONVERGENCE")
    objective = float(best.fun) / samples.size
    return from_unit(q), err, cov, converged, at_bound, objective, int(best.nit)


def _fit_hist(samples, p0, bins):
    counts, edges = np.histogram(samples, bins=bins, density=True)
    centers = 0.5 * (edges[1:] + edges[:-1])
    smax = float(samples.max())
    scale = float(np.std(samples)) or 1.0
    ref = smax
    c = (centers - ref) / scale
    y = counts * scale

    def fun(q):
        return mirrored_pdf(c, *q) - y

    def jac(q):
        return mirrored_pdf_jac(c, *q)

    q0 = np.array([p0[0] / scale, p0[1] / scale, (p0[2] - ref) / scale])
    res = levenberg_marquardt(fun, jac, q0, feasible=lambda q: q[1] > 0 and q[2] > 0)
    cov_u = res.covariance()
    q = res.x
    err = np.sqrt(np.clip(np.diag(cov_u), 0, None)) * scale
    p = np.array([q[0] * scale, q[1] * scale, q[2] * scale + ref])
    return p, err, cov_u * scale * scale, res.converged, False, res.residual_norm, res.nit


def fit_rician_mirrored(samples, method: str = "mle", bins="auto",
                        gof_threshold: float = GOF_THRESHOLD):
    """Fit the mirrored Rician to coherence-time samples.

    ``method`` is ``"mle"`` (maximum likelihood, default) or ``"hist"``
    (least squares against a normalised histogram). Returns
    ``(RicianParams, FitResult)``. ``FitResult.meta["covariance"]`` holds the
    3x3 parameter covariance in (nu, sigma, t_max) order and
    ``meta["ks"]`` the Kolmogorov-Smirnov distance; a distance above
    ``gof_threshold`` sets the ``poor_fit`` flag and warns.
    """
    samples = np.asarray(samples, float)
    samples = samples[np.isfinite(samples)]
    if samples.size < MIN_SAMPLES:
        raise FitError(f"Rician fit needs at least {MIN_SAMPLES} samples, got {samples.size}")
    flags = set()
    if samples.size <= RECOMMENDED_SAMPLES:
        flags.add("few_samples")
        warnings.warn(
            f"only {samples.size} samples; benchmark datasets need more than {RECOMMENDED_SAMPLES}",
            FitQualityWarning, stacklevel=2,
        )
    if np.ptp(samples) <= 0:
        raise FitError("Rician fit needs samples with nonzero spread")
    p0 = moment_guess(samples)
    if method == "mle":
        p, err, cov, converged, at_bound, objective, nit = _fit_mle(samples, p0)
        objective_name = "mean_negative_log_likelihood"
    elif method == "hist":
        p, err, cov, converged, at_bound, objective, nit = _fit_hist(samples, p0, bins)
        objective_name = "histogram_residual_norm"
    else:
        raise ValueError(f"method must be 'mle' or 'hist', got {method!r}")
    if at_bound:
        flags.add("t_max_at_bound")
    if p[2] < samples.max():
        flags.add("mass_above_t_max")
        converged = False
    params = RicianParams(*p)
    ks = ks_statistic(samples, params)
    if ks > gof_threshold:
        flags.add("poor_fit")
        warnings.warn(f"mirrored Rician fits poorly (KS distance {ks:.3f})",
                      FitQualityWarning, stacklevel=2)
    fit = FitResult(
        "mirrored_rician",
        dict(zip(PARAMS, params.as_array())),
        dict(zip(PARAMS, err)),
        objective,
        converged,
        flags,
        {"method": method, "objective": objective_name, "ks": ks, "nit": nit,
         "covariance": np.asarray(cov).tolist(), "n": int(samples.size)},
    )
    return params, fit


def moments_with_errors(params: RicianParams, covariance, lower: float = 0.0):
    """Moments plus delta-method standard errors from the parameter covariance."""
    mean, std = rician_moments(params, lower)
    cov = np.asarray(covariance, float)
    if cov.shape != (3, 3) or not np.all(np.isfinite(cov)):
        return mean, std, math.nan, math.nan
    base = params.as_array()
    grads = np.zeros((2, 3))
    for i in range(3):
        h = 1e-5 * max(abs(base[i]), params.sigma)
        up, dn = base.copy(), base.copy()
        up[i] += h
        dn[i] -= h
        if i == 1:
            dn[i] = max(dn[i], 1e-3 * base[i])
        mu_up = rician_moments(RicianParams(*up), lower)
        mu_dn = rician_moments(RicianParams(*dn), lower)
        grads[:, i] = (np.array(mu_up) - np.array(mu_dn)) / (up[i] - dn[i])
    var = np.einsum("ij,jk,ik->i", grads, cov, grads)
    return mean, std, math.sqrt(max(var[0], 0.0)), math.sqrt(max(var[1], 0.0))
