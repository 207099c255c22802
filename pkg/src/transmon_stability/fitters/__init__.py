"""Curve and distribution fitting."""

from .curves import (
    alias_images,
    fit_damped_cosine,
    fit_exponential,
    fold_frequency,
    resolve_drive_calibration,
)
from .lm import LMResult, levenberg_marquardt
from .rician import (
    RicianParams,
    fit_rician_mirrored,
    mirrored_cdf,
    mirrored_pdf,
    mirrored_pdf_jac,
    moments_with_errors,
    rician_moments,
    sample_mirrored_rician,
)

__all__ = [
    "LMResult", "RicianParams", "alias_images", "fit_damped_cosine", "fit_exponential",
    "fit_rician_mirrored", "fold_frequency", "levenberg_marquardt", "mirrored_cdf",
    "mirrored_pdf", "mirrored_pdf_jac", "moments_with_errors", "resolve_drive_calibration",
    "rician_moments", "sample_mirrored_rician",
]
