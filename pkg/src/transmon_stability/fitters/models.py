"""Curve models with analytic Jacobians (columns follow the parameter order)."""

from __future__ import annotations

import numpy as np

EXPONENTIAL_PARAMS = ("A", "B", "T1")
DAMPED_COSINE_PARAMS = ("A", "B", "phi0", "f_ramsey", "T2s")

TWO_PI = 2.0 * np.pi


def exponential(tau, p):
    A, B, T = p
    return A * np.exp(-np.asarray(tau) / T) + B


def exponential_jac(tau, p):
    A, B, T = p
    tau = np.asarray(tau, float)
    e = np.exp(-tau / T)
    return np.column_stack([e, np.ones_like(tau), A * e * tau / (T * T)])


def damped_cosine(tau, p):
    A, B, phi, f, T = p
    tau = np.asarray(tau, float)
    return A * np.cos(TWO_PI * f * tau + phi) * np.exp(-tau / T) + B


def damped_cosine_jac(tau, p):
    A, B, phi, f, T = p
    tau = np.asarray(tau, float)
    arg = TWO_PI * f * tau + phi
    c, s, e = np.cos(arg), np.sin(arg), np.exp(-tau / T)
    return np.column_stack([
        c * e,
        np.ones_like(tau),
        -A * s * e,
        -A * s * e * TWO_PI * tau,
        A * c * e * tau / (T * T),
    ])
