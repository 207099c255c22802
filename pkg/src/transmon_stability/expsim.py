"""Synthetic raw-experiment data: decay curves, Ramsey fringes and IQ shots.

Populations carry binomial shot noise, so they always lie in [0, 1]. Each
generator is a pure function of its arguments and seed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .domain import DecayCurve, IQShotSet, QubitDesign, RamseyCurve
from .errors import ConfigError
from .tlssim import philox

CURVE_SHOTS = 2 ** 10
SINGLE_SHOT_SHOTS = 2 ** 12


@dataclass(frozen=True)
class ExperimentNoiseConfig:
    """Noise model of the synthetic experiments.

    ``shots_per_point=None`` switches shot noise off (ideal populations).
    ``shots_per_state`` is the number of single-shot repetitions per
    prepared state. ``mist_fraction`` of the prepared-|1> shots are
    scattered along an arc when ``mist_mode`` is on.
    """

    shots_per_point: int | None = CURVE_SHOTS
    shots_per_state: int = SINGLE_SHOT_SHOTS
    iq_blob_sigma: float = 1.0
    thermal_excitation_p: float = 0.0
    decay_during_readout_p: float = 0.0
    mist_mode: bool = False
    mist_spread_scale: float = 0.5
    mist_fraction: float = 0.1

    def __post_init__(self):
        for name in ("thermal_excitation_p", "decay_during_readout_p", "mist_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v!r}")
        if self.shots_per_point is not None and int(self.shots_per_point) < 1:
            raise ConfigError("shots_per_point must be >= 1")
        if int(self.shots_per_state) < 2:
            raise ConfigError("shots_per_state must be >= 2")
        if not self.iq_blob_sigma >= 0:
            raise ConfigError("iq_blob_sigma must be >= 0")
        if not self.mist_spread_scale >= 0:
            raise ConfigError("mist_spread_scale must be >= 0")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentNoiseConfig":
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown noise field(s): {', '.join(sorted(unknown))}")
        return cls(**obj)

    def to_dict(self) -> dict:
        return asdict(self)


NOISELESS = ExperimentNoiseConfig(shots_per_point=None)


def decay_grid(t1: float, n: int = 40, span: float = 5.0) -> np.ndarray:
    """Zero followed by ``n - 1`` log-spaced delays up to ``span * t1``."""
    if not t1 > 0:
        raise ConfigError("t1 must be positive")
    top = span * t1
    return np.concatenate([[0.0], np.geomspace(top * 1e-3, top, n - 1)])


def ramsey_grid(t_max: float, f_nyquist: float | None = None) -> np.ndarray:
    """Linear grid on [0, t_max] sampled at twice ``f_nyquist``.

    Without ``f_nyquist`` the grid has 41 points (Nyquist = 20 / t_max).
    """
    if not t_max > 0:
        raise ConfigError("t_max must be positive")
    n_int = 40 if f_nyquist is None else int(round(2.0 * f_nyquist * t_max))
    if n_int < 2:
        raise ConfigError("Nyquist frequency too low for the delay span")
    return np.linspace(0.0, t_max, n_int + 1)


def _sample_populations(p: np.ndarray, shots: int | None, rng) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    if shots is None:
        return p
    return rng.binomial(int(shots), p) / float(shots)


def simulate_decay_curve(t1: float, grid=None, noise: ExperimentNoiseConfig | None = None,
                         seed: int = 0, amplitude: float = 1.0, baseline: float = 0.0) -> DecayCurve:
    """Binomially sampled ``amplitude * exp(-tau/t1) + baseline``."""
    if not t1 > 0:
        raise ConfigError("t1 must be positive")
    noise = noise or ExperimentNoiseConfig()
    tau = decay_grid(t1) if grid is None else np.asarray(grid, float)
    ideal = amplitude * np.exp(-tau / t1) + baseline
    pop = _sample_populations(ideal, noise.shots_per_point, philox(seed, 10))
    shots = noise.shots_per_point or 1
    return DecayCurve(tau, pop, shots, meta={"t1_s": repr(float(t1)), "seed": seed})


def virtual_z_phase(tau, detuning: float):
    """Phase 2*pi*detuning*tau wrapped into [0, 2*pi)."""
    return 2.0 * np.pi * np.mod(detuning * np.asarray(tau, float), 1.0)


def simulate_ramsey_curve(f_q_offset: float, t2s: float, detuning: float, t_max: float,
                          noise: ExperimentNoiseConfig | None = None, seed: int = 0,
                          grid=None, phi0: float = 0.0, amplitude: float = 0.5,
                          baseline: float = 0.5) -> RamseyCurve:
    """Ramsey fringe with a virtual-Z phase on the second pulse.

    ``f_q_offset`` is the drive-minus-qubit frequency offset; the fringe
    oscillates at ``|f_q_offset + detuning|`` with envelope ``exp(-tau/t2s)``.
    """
    if not t2s > 0:
        raise ConfigError("t2s must be positive")
    noise = noise or ExperimentNoiseConfig()
    tau = ramsey_grid(t_max) if grid is None else np.asarray(grid, float)
    phase = 2.0 * np.pi * f_q_offset * tau + virtual_z_phase(tau, detuning) + phi0
    ideal = baseline + amplitude * np.cos(phase) * np.exp(-tau / t2s)
    pop = _sample_populations(ideal, noise.shots_per_point, philox(seed, 11))
    shots = noise.shots_per_point or 1
    return RamseyCurve(tau, pop, detuning, t_max, shots,
                       meta={"t2s_s": repr(float(t2s)), "f_q_offset_hz": repr(float(f_q_offset)),
                             "seed": seed})


def simulate_single_shot(design: QubitDesign | None = None, separation: float = 10.0,
                         noise: ExperimentNoiseConfig | None = None, seed: int = 0) -> IQShotSet:
    """Single-shot IQ clouds for prepared |0> and |1>.

    |0> sits at the origin and |1> at ``(separation, 0)``, each a round
    Gaussian of width ``iq_blob_sigma``. A ``thermal_excitation_p`` fraction
    of the |0> shots is drawn from the |1> blob; a ``decay_during_readout_p``
    fraction of the |1> shots lands uniformly along the segment back to
    |0>; in MIST mode a ``mist_fraction`` of the remaining |1> shots is
    spread along a circular arc around the origin with angular scale
    ``mist_spread_scale`` (radians).
    """
    if not separation >= 0:
        raise ConfigError("separation must be >= 0")
    noise = noise or ExperimentNoiseConfig()
    n = int(noise.shots_per_state)
    rng = philox(seed, 12)
    sigma = noise.iq_blob_sigma
    centre1 = np.array([separation, 0.0])
    # draw every stream at full length so changing one probability keeps the others fixed
    blob0 = rng.standard_normal((n, 2)) * sigma
    blob1 = rng.standard_normal((n, 2)) * sigma
    u_thermal = rng.random(n)
    u_decay = rng.random(n)
    u_mist = rng.random(n)
    frac = rng.random(n)
    angle = rng.standard_normal(n) * noise.mist_spread_scale

    pts0 = blob0.copy()
    hot = u_thermal < noise.thermal_excitation_p
    pts0[hot] += centre1

    pts1 = blob1 + centre1
    decayed = u_decay < noise.decay_during_readout_p
    pts1[decayed] = blob1[decayed] + np.outer(1.0 - frac[decayed], centre1)
    if noise.mist_mode:
        mist = (~decayed) & (u_mist < noise.mist_fraction)
        arc = np.column_stack([np.cos(angle[mist]), np.sin(angle[mist])]) * separation
        pts1[mist] = blob1[mist] + arc

    pts = np.vstack([pts0, pts1])
    state = np.concatenate([np.zeros(n, np.int64), np.ones(n, np.int64)])
    meta = {"seed": seed, "separation": repr(float(separation))}
    if design is not None:
        meta["qubit"] = design.label
    return IQShotSet(pts[:, 0], pts[:, 1], state,
                     f_q=None if design is None else design.f_q, meta=meta)


def binomial_halfwidth(p: float, n: int, z: float = 3.0) -> float:
    """``z``-sigma binomial half-width of an estimated proportion."""
    return z * math.sqrt(p * (1.0 - p) / n)
