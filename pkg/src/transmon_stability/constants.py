"""Physical constants (CODATA 2018 exact SI values) and device tables."""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType


@dataclass(frozen=True)
class PhysicalConstants:
    h: float = 6.62607015e-34  # J s
    k_B: float = 1.380649e-23  # J / K
    e: float = 1.602176634e-19  # C
    c0: float = 299792458.0  # m / s


CONSTANTS = PhysicalConstants()

BCS_GAP_RATIO = 1.764

# Device parameters of the eight measured qubits:
# (f_r [Hz], f_q [Hz], anharmonicity [Hz]).
DEVICE_TABLE = MappingProxyType({
    "A.1": (6.5829e9, 4.332736e9, 225.075e6),
    "A.2": (6.7383e9, 4.320850e9, 219.487e6),
    "A.3": (6.9860e9, 4.563595e9, 228.126e6),
    "A.4": (7.1407e9, 4.671054e9, 220.046e6),
    "B.1": (6.5849e9, 4.441636e9, 224.806e6),
    "B.2": (6.7367e9, 4.541780e9, 223.012e6),
    "B.3": (6.9749e9, 4.164750e9, 228.386e6),
    "B.4": (7.1428e9, 4.621970e9, 228.406e6),
})

# Ramsey sampling settings per qubit:
# (t_max [s], f_nyquist [Hz], detuning [Hz], mean T2* [s]).
RAMSEY_SETTINGS = MappingProxyType({
    "A.1": (120e-6, 166.7e3, 20e3, 28.56e-6),
    "A.2": (250e-6, 80e3, 10e3, 51.26e-6),
    "A.3": (200e-6, 100e3, 10e3, 38.88e-6),
    "A.4": (150e-6, 133.3e3, 10e3, 34.96e-6),
    "B.1": (150e-6, 133.3e3, 15e3, 39.38e-6),
    "B.2": (250e-6, 80e3, 10e3, 44.15e-6),
    "B.3": (250e-6, 80e3, 15e3, 44.03e-6),
    "B.4": (100e-6, 200e3, 15e3, 15.96e-6),
})

# Proportionality factor of sigma_T1 = a <T1>^(3/2), <T1> in microseconds.
BENCHMARK_A_US = 1.220e-2
BENCHMARK_A_US_STDERR = 0.052e-2


def bcs_gap(t_c: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Superconducting gap in joules from the critical temperature in kelvin."""
    if t_c <= 0:
        raise ValueError("critical temperature must be positive")
    return BCS_GAP_RATIO * constants.k_B * t_c
