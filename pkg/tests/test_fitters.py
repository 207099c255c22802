import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from oracles import (
    central_difference,
    mirrored_rician_mc,
    rayleigh_mirrored_moments,
    rejection_mirrored_rician,
)
from transmon_stability import expsim
from transmon_stability.domain import DecayCurve, RamseyCurve
from transmon_stability.errors import DegenerateFitError, FitError, FitQualityWarning
from transmon_stability.fitters import (
    RicianParams,
    alias_images,
    fit_damped_cosine,
    fit_exponential,
    fit_rician_mirrored,
    fold_frequency,
    levenberg_marquardt,
    mirrored_pdf,
    mirrored_pdf_jac,
    resolve_drive_calibration,
    rician_moments,
    sample_mirrored_rician,
)
from transmon_stability.fitters import models


# -- Levenberg-Marquardt ----------------------------------------------------------------

def test_lm_solves_linear_least_squares_exactly():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 3))
    y = rng.normal(size=30)
    res = levenberg_marquardt(lambda p: X @ p - y, lambda p: X, np.zeros(3))
    assert np.allclose(res.x, np.linalg.lstsq(X, y, rcond=None)[0], rtol=1e-8)
    assert res.converged


def test_lm_rosenbrock():
    fun = lambda p: np.array([10 * (p[1] - p[0] ** 2), 1 - p[0]])
    jac = lambda p: np.array([[-20 * p[0], 10.0], [-1.0, 0.0]])
    res = levenberg_marquardt(fun, jac, np.array([-1.2, 1.0]))
    assert np.allclose(res.x, [1, 1], atol=1e-8)


def test_lm_reports_nonconvergence():
    fun = lambda p: np.array([10 * (p[1] - p[0] ** 2), 1 - p[0]])
    jac = lambda p: np.array([[-20 * p[0], 10.0], [-1.0, 0.0]])
    res = levenberg_marquardt(fun, jac, np.array([-1.2, 1.0]), max_iter=2)
    assert not res.converged


# -- Jacobians ----------------------------------------------------------------------------

def _check_jac(model, jac, tau, p, floor):
    J = jac(tau, p)
    Jfd = central_difference(lambda q: model(tau, q), p, floor=floor)
    scale = np.max(np.abs(J), axis=0)
    assert np.all(np.abs(J - Jfd) <= 1e-6 * np.maximum(scale, 1e-300))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 2), st.floats(-0.5, 0.5), st.floats(1e-6, 1e-3))
def test_exponential_jacobian(A, B, T):
    tau = np.linspace(0, 5 * T, 25)
    _check_jac(models.exponential, models.exponential_jac, tau, np.array([A, B, T]), [1, 1, 0])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 1), st.floats(0, 1), st.floats(-3, 3), st.floats(1e3, 1e5), st.floats(1e-5, 1e-4))
def test_damped_cosine_jacobian(A, B, phi, f, T):
    tau = np.linspace(0, 250e-6, 41)
    _check_jac(models.damped_cosine, models.damped_cosine_jac, tau, np.array([A, B, phi, f, T]), [1, 1, 1, 0, 0])


# -- exponential ----------------------------------------------------------------------------

def test_exponential_noiseless_exact():
    c = expsim.simulate_decay_curve(50e-6, noise=expsim.NOISELESS)
    r = fit_exponential(c)
    assert r["T1"] == pytest.approx(50e-6, rel=1e-6)
    assert r["A"] == pytest.approx(1.0, rel=1e-6)
    assert abs(r["B"]) < 1e-6


def test_exponential_flat_is_degenerate():
    with pytest.raises(DegenerateFitError):
        fit_exponential(DecayCurve(np.linspace(0, 1e-4, 20), np.full(20, 0.3)))


def test_exponential_needs_four_points():
    with pytest.raises(FitError):
        fit_exponential(DecayCurve([0, 1e-6, 2e-6], [0.9, 0.5, 0.3]))


def test_residual_norm_self_consistent():
    c = expsim.simulate_decay_curve(30e-6, seed=4)
    r = fit_exponential(c)
    model = models.exponential(c.delays, [r["A"], r["B"], r["T1"]])
    assert r.residual_norm == pytest.approx(np.linalg.norm(model - c.populations), rel=1e-9)


def test_exponential_affine_invariance():
    tau = expsim.decay_grid(40e-6)
    y = np.exp(-tau / 40e-6)
    a = fit_exponential(DecayCurve(tau, 0.2 + 0.7 * y))
    b = fit_exponential(DecayCurve(tau, 0.9 - 0.5 * y))
    assert a["T1"] == pytest.approx(40e-6, rel=1e-8)
    assert b["T1"] == pytest.approx(40e-6, rel=1e-8)
    assert b["A"] == pytest.approx(-0.5, rel=1e-8)


def test_exponential_closed_loop_90_of_100():
    ok = 0
    for seed in range(100):
        r = fit_exponential(expsim.simulate_decay_curve(30e-6, seed=seed))
        ok += abs(r["T1"] / 30e-6 - 1) < 0.05
    assert ok >= 90


# -- damped cosine -------------------------------------------------------------------------

def _ramsey(f, t2, t_max=250e-6, nyq=80e3, det=10e3, phi=0.0, amp=0.5, base=0.5):
    tau = expsim.ramsey_grid(t_max, nyq)
    y = base + amp * np.cos(2 * np.pi * f * tau + phi) * np.exp(-tau / t2)
    return RamseyCurve(tau, y, det, t_max)


def test_damped_cosine_noiseless_exact():
    r = fit_damped_cosine(_ramsey(10e3, 51.26e-6))
    assert r["f_ramsey"] == pytest.approx(10e3, rel=1e-6)
    assert r["T2s"] == pytest.approx(51.26e-6, rel=1e-6)
    assert not r.flags


@pytest.mark.parametrize("phi", [-2.5, -1.0, 0.4, 2.0])
def test_damped_cosine_phase(phi):
    r = fit_damped_cosine(_ramsey(23e3, 40e-6, phi=phi))
    assert r["phi0"] == pytest.approx(phi, abs=1e-6)


def test_aliased_frequency_folded_and_flagged():
    r = fit_damped_cosine(_ramsey(90e3, 60e-6, det=90e3))
    assert r["f_ramsey"] == pytest.approx(70e3, rel=1e-6)
    assert "aliased" in r.flags
    assert r["f_ramsey"] <= r.meta["nyquist_hz"]


def test_fold_frequency_oracle():
    fs = 160e3
    for f in (10e3, 90e3, 170e3, 250e3):
        k = np.round(f / fs)
        assert fold_frequency(f, fs) == pytest.approx(abs(f - k * fs))
    assert np.any(np.isclose(alias_images(70e3, fs), 90e3))


def test_unresolvable_frequency_flagged():
    r = fit_damped_cosine(_ramsey(3e3, 1e-3, det=3e3))
    assert "unresolvable" in r.flags


def test_b4_offset_gives_sum_frequency():
    t_max, nyq, det, t2 = 100e-6, 200e3, 15e3, 15.96e-6
    c = expsim.simulate_ramsey_curve(3e3, 3 * t2, det, t_max, expsim.NOISELESS,
                                     grid=expsim.ramsey_grid(t_max, nyq))
    assert fit_damped_cosine(c)["f_ramsey"] == pytest.approx(18e3, rel=1e-6)


def test_damped_cosine_affine_invariance():
    a = fit_damped_cosine(_ramsey(12e3, 45e-6, amp=0.3, base=0.4))
    assert a["f_ramsey"] == pytest.approx(12e3, rel=1e-8)
    assert a["T2s"] == pytest.approx(45e-6, rel=1e-8)


def test_drive_calibration_examples():
    f_q = 4.3e9
    assert resolve_drive_calibration(f_q + 5e3, 15e3, 10e3) == pytest.approx(f_q, abs=1e-6)
    assert resolve_drive_calibration(f_q, 10e3, 10e3) == f_q
    assert resolve_drive_calibration(f_q - 4e3, 6e3, 10e3) == pytest.approx(f_q, abs=1e-6)


def test_ramsey_closed_loop_a2():
    fe, te = [], []
    for seed in range(40):
        c = expsim.simulate_ramsey_curve(0.0, 51.26e-6, 10e3, 250e-6, seed=seed,
                                         grid=expsim.ramsey_grid(250e-6, 80e3))
        r = fit_damped_cosine(c)
        fe.append(r["f_ramsey"] / 10e3 - 1)
        te.append(r["T2s"] / 51.26e-6 - 1)
    assert abs(np.median(fe)) < 0.02 and abs(np.median(te)) < 0.02


# -- mirrored Rician ----------------------------------------------------------------------

@pytest.mark.parametrize("params", [(0.0, 5.0, 80.0), (10.0, 5.0, 80.0), (40.0, 5.0, 80.0), (3.0, 0.7, 20.0)])
def test_mirrored_density_normalises(params):
    nu, s, T = params
    lo = T - (nu + 40 * s)
    mass = integrate.quad(lambda t: float(mirrored_pdf(t, nu, s, T)), max(lo, -np.inf), T,
                          points=[T - nu], limit=200, epsrel=1e-12)[0]
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_density_zero_above_support():
    assert mirrored_pdf(np.array([80.0, 81.0]), 10.0, 5.0, 80.0).tolist() == [0.0, 0.0]


def test_density_matches_scipy_rice():
    t = np.linspace(0, 79, 50)
    ref = stats.rice.pdf(80 - t, 10 / 5, scale=5)
    assert np.allclose(mirrored_pdf(t, 10.0, 5.0, 80.0), ref, rtol=1e-12)


def test_large_argument_has_no_overflow():
    v = mirrored_pdf(np.array([0.0]), 5000.0, 1.0, 5000.0)
    assert np.isfinite(v).all() and v[0] > 0


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 30.0), st.floats(0.5, 10.0), st.floats(-0.9, 0.9))
def test_pdf_jacobian(nu, sigma, z):
    T = 100.0
    x = nu + 2 * sigma * z + 2 * sigma  # keep inside the support
    t = np.array([T - max(x, 0.05 * sigma)])
    J = mirrored_pdf_jac(t, nu, sigma, T)[0]
    Jfd = central_difference(lambda p: mirrored_pdf(t, *p), np.array([nu, sigma, T]), floor=[sigma, 0, 0])[0]
    scale = np.max(np.abs(J))
    assert np.all(np.abs(J - Jfd) <= 1e-6 * scale)


def test_rayleigh_moments_analytic():
    for s, M in [(5.0, 80.0), (1.3, 40.0)]:
        mean, std = rician_moments(RicianParams(0.0, s, M))
        m_ref, s_ref = rayleigh_mirrored_moments(s, M)
        assert mean == pytest.approx(m_ref, rel=1e-10)
        assert std == pytest.approx(s_ref, rel=1e-8)


def test_moments_small_sigma_limit():
    mean, std = rician_moments(RicianParams(30.0, 1e-4, 100.0))
    assert mean == pytest.approx(70.0, rel=1e-6)
    assert std < 2e-4


def test_moments_renormalise_on_truncated_support():
    p = RicianParams(5.0, 10.0, 12.0)  # notable mass below t = 0
    mean, _ = rician_moments(p)
    full, _ = rician_moments(p, lower=-np.inf)
    assert mean > full


@pytest.mark.parametrize("params", [(10.0, 5.0, 80.0), (40.0, 5.0, 80.0)])
def test_moments_match_monte_carlo(params):
    nu, s, T = params
    x = mirrored_rician_mc(nu, s, T, 1_000_000, seed=1)
    mean, std = rician_moments(RicianParams(*params))
    assert mean == pytest.approx(x.mean(), rel=5e-3)
    assert std == pytest.approx(x.std(), rel=5e-3)


def test_sampler_matches_rejection_oracle():
    p = RicianParams(10.0, 5.0, 80.0)
    a = sample_mirrored_rician(p, 20000, np.random.default_rng(2))
    b = rejection_mirrored_rician(10.0, 5.0, 80.0, 20000, seed=3)
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_recovery_identifiable_regime():
    p = RicianParams(10.0, 5.0, 80.0)
    for seed in range(5):
        s = rejection_mirrored_rician(10.0, 5.0, 80.0, 5000, seed)
        fit, res = fit_rician_mirrored(s)
        assert np.all(np.abs(fit.as_array() / p.as_array() - 1) < 0.05)
        assert res.converged and "poor_fit" not in res.flags


def test_large_nu_recovers_identifiable_combinations():
    s = rejection_mirrored_rician(40.0, 5.0, 80.0, 5000, seed=0)
    fit, _ = fit_rician_mirrored(s)
    assert fit.sigma == pytest.approx(5.0, rel=0.05)
    mean, std = rician_moments(fit)
    assert mean == pytest.approx(s.mean(), rel=0.01)


def test_rayleigh_fit_nu_consistent_with_zero():
    s = rejection_mirrored_rician(0.0, 5.0, 80.0, 5000, seed=4)
    fit, res = fit_rician_mirrored(s)
    # the likelihood is even in nu, so only a small nu/sigma is identifiable here
    assert fit.nu / fit.sigma < 1.0
    mean, std = rician_moments(fit)
    m_ref, s_ref = rayleigh_mirrored_moments(5.0, 80.0)
    assert mean == pytest.approx(m_ref, rel=0.01)
    assert std == pytest.approx(s_ref, rel=0.03)


def test_hist_mode():
    s = rejection_mirrored_rician(10.0, 5.0, 80.0, 20000, seed=5)
    fit, res = fit_rician_mirrored(s, method="hist")
    assert res.meta["method"] == "hist"
    assert fit.sigma == pytest.approx(5.0, rel=0.1)


def test_bimodal_converges_but_fits_poorly():
    rng = np.random.default_rng(0)
    s = np.concatenate([rng.normal(20, 1, 2000), rng.normal(60, 1, 2000)])
    with pytest.warns(FitQualityWarning, match="poorly"):
        _, res = fit_rician_mirrored(s)
    assert res.converged and "poor_fit" in res.flags


def test_sample_floor():
    with pytest.raises(FitError, match="100"):
        fit_rician_mirrored(np.arange(50.0))
    with pytest.warns(FitQualityWarning, match="500"):
        fit_rician_mirrored(rejection_mirrored_rician(10.0, 5.0, 80.0, 300, seed=1))


def test_support_respected():
    s = rejection_mirrored_rician(10.0, 5.0, 80.0, 2000, seed=6)
    fit, _ = fit_rician_mirrored(s)
    assert fit.t_max >= s.max()
