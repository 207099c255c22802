"""Immutable record types shared across the package.

All quantities are stored in SI units (seconds, hertz, joules, kelvin).
Arrays held by the records are frozen (``writeable=False``) so records can
be handed to worker processes and shared freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .constants import CONSTANTS, DEVICE_TABLE, bcs_gap
from .errors import InvariantError

PARAMETER_KINDS = ("T1", "T2*", "f_ramsey_offset", "delta_m", "fidelity", "t_eff", "t_mxc")

DEFAULT_UNITS = MappingProxyType({
    "T1": "s",
    "T2*": "s",
    "f_ramsey_offset": "Hz",
    "delta_m": "arb",
    "fidelity": "1",
    "t_eff": "K",
    "t_mxc": "K",
})


def _frozen(values, name: str, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if arr.ndim != 1:
        raise InvariantError(f"{name}: expected a one-dimensional sequence")
    arr.flags.writeable = False
    return arr


def _freeze_meta(obj) -> None:
    object.__setattr__(obj, "meta", MappingProxyType({str(k): str(v) for k, v in obj.meta.items()}))


def _check_increasing(arr: np.ndarray, name: str) -> None:
    if arr.size > 1:
        bad = np.flatnonzero(np.diff(arr) <= 0)
        if bad.size:
            raise InvariantError(
                f"{name} must be strictly increasing (row {int(bad[0]) + 1})"
            )


def _check_unit_interval(arr: np.ndarray, name: str) -> None:
    bad = np.flatnonzero(~((arr >= 0.0) & (arr <= 1.0)))
    if bad.size:
        i = int(bad[0])
        raise InvariantError(f"{name} out of range [0, 1] at row {i}: {float(arr[i])!r}")


@dataclass(frozen=True)
class QubitDesign:
    chip_id: str
    qubit_id: str
    f_r: float
    f_q: float
    anharmonicity: float
    gap_delta: float

    def __post_init__(self):
        if not (self.f_r > self.f_q > 0):
            raise InvariantError("QubitDesign requires f_r > f_q > 0")
        if not self.anharmonicity > 0:
            raise InvariantError("QubitDesign requires anharmonicity > 0")
        if not self.gap_delta > 0:
            raise InvariantError("QubitDesign requires gap_delta > 0")

    @property
    def label(self) -> str:
        return f"{self.chip_id}.{self.qubit_id}"

    @property
    def e_c(self) -> float:
        """Charging energy in joules, taken as h times the anharmonicity."""
        return CONSTANTS.h * self.anharmonicity

    @classmethod
    def from_table(cls, label: str, t_c: float = 1.2) -> "QubitDesign":
        f_r, f_q, anharm = DEVICE_TABLE[label]
        chip, qubit = label.split(".")
        return cls(chip, qubit, f_r, f_q, anharm, bcs_gap(t_c))


@dataclass(frozen=True, eq=False)
class TimeTrace:
    timestamps: np.ndarray
    values: np.ndarray
    parameter_kind: str
    unit: str = ""
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        _freeze_meta(self)
        t = _frozen(self.timestamps, "timestamps")
        v = _frozen(self.values, "values")
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "values", v)
        if self.parameter_kind not in PARAMETER_KINDS:
            raise InvariantError(
                f"parameter_kind must be one of {PARAMETER_KINDS}, got {self.parameter_kind!r}"
            )
        if not self.unit:
            object.__setattr__(self, "unit", DEFAULT_UNITS[self.parameter_kind])
        if t.size < 1:
            raise InvariantError("TimeTrace needs at least one sample")
        if t.size != v.size:
            raise InvariantError("timestamps and values differ in length")
        _check_increasing(t, "timestamps")
        if not np.all(np.isfinite(v)):
            raise InvariantError("TimeTrace values must be finite")

    def __len__(self):
        return self.values.size

    @property
    def span(self) -> float:
        return float(self.timestamps[-1] - self.timestamps[0])


@dataclass(frozen=True, eq=False)
class DecayCurve:
    delays: np.ndarray
    populations: np.ndarray
    shots_per_point: int = 1024
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        _freeze_meta(self)
        d = _frozen(self.delays, "delays")
        p = _frozen(self.populations, "populations")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "populations", p)
        if d.size != p.size:
            raise InvariantError("delays and populations differ in length")
        if d.size and d[0] < 0:
            raise InvariantError("delays must be nonnegative")
        _check_increasing(d, "delays")
        _check_unit_interval(p, "p1")
        if self.shots_per_point < 1:
            raise InvariantError("shots_per_point must be >= 1")


@dataclass(frozen=True, eq=False)
class RamseyCurve:
    delays: np.ndarray
    populations: np.ndarray
    set_detuning: float
    t_max: float
    shots_per_point: int = 1024
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        _freeze_meta(self)
        d = _frozen(self.delays, "delays")
        p = _frozen(self.populations, "populations")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "populations", p)
        if d.size != p.size:
            raise InvariantError("delays and populations differ in length")
        _check_increasing(d, "delays")
        _check_unit_interval(p, "p1")
        if self.set_detuning < 0:
            raise InvariantError("set detuning must be >= 0")
        if d.size and (d[0] < 0 or d[-1] > self.t_max * (1 + 1e-12)):
            raise InvariantError("delays must lie within [0, t_max]")
        if self.shots_per_point < 1:
            raise InvariantError("shots_per_point must be >= 1")

    @property
    def sampling_rate(self) -> float:
        """Mean sampling rate of the delay grid in Hz."""
        return (self.delays.size - 1) / float(self.delays[-1] - self.delays[0])

    @property
    def nyquist(self) -> float:
        return 0.5 * self.sampling_rate


@dataclass(frozen=True, eq=False)
class IQShotSet:
    i: np.ndarray
    q: np.ndarray
    prepared_state: np.ndarray
    f_q: float | None = None
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        _freeze_meta(self)
        i = _frozen(self.i, "i")
        q = _frozen(self.q, "q")
        s = _frozen(self.prepared_state, "prepared_state", dtype=np.int64)
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "prepared_state", s)
        if not (i.size == q.size == s.size):
            raise InvariantError("i, q and prepared_state differ in length")
        if not (np.all(np.isfinite(i)) and np.all(np.isfinite(q))):
            raise InvariantError("IQ coordinates must be finite")
        bad = np.flatnonzero((s != 0) & (s != 1))
        if bad.size:
            raise InvariantError(f"prepared_state must be 0 or 1 (row {int(bad[0])})")
        if not (np.any(s == 0) and np.any(s == 1)):
            raise InvariantError("both prepared states must be present")

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.i, self.q])

    @property
    def n_per_state(self) -> tuple[int, int]:
        return int(np.sum(self.prepared_state == 0)), int(np.sum(self.prepared_state == 1))

    def __len__(self):
        return self.i.size


@dataclass(frozen=True)
class FitResult:
    """Outcome of a fit.

    ``converged=False`` marks the parameters as unreliable; consumers should
    check it (or ``reliable``) before using the values.
    """

    model: str
    params: Mapping[str, float]
    stderr: Mapping[str, float]
    residual_norm: float
    converged: bool
    flags: frozenset = frozenset()
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        object.__setattr__(self, "stderr", MappingProxyType(dict(self.stderr)))
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))
        flags = set(self.flags)
        if not self.converged:
            flags.add("unreliable")
        object.__setattr__(self, "flags", frozenset(flags))
        for name, err in self.stderr.items():
            if not (err >= 0 or math.isnan(err)):
                raise InvariantError(f"stderr for {name} must be >= 0")

    @property
    def reliable(self) -> bool:
        return self.converged and "unreliable" not in self.flags

    def __getitem__(self, name):
        return self.params[name]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "stderr": dict(self.stderr),
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "flags": sorted(self.flags),
        }


@dataclass(frozen=True)
class CooldownRecord:
    cooldown_index: int
    elapsed_days: float
    f_q: float | None
    f_r: float | None
    mean_t1: float | None = None

    def __post_init__(self):
        if self.elapsed_days < 0:
            raise InvariantError("elapsed_days must be >= 0")
        for name in ("f_q", "f_r", "mean_t1"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise InvariantError(f"{name} must be positive when present")

    @property
    def complete(self) -> bool:
        return self.f_q is not None and self.f_r is not None


def check_cooldown_order(records) -> None:
    """Raise unless ``elapsed_days`` is nondecreasing with the cooldown index."""
    ordered = sorted(records, key=lambda r: r.cooldown_index)
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.cooldown_index == prev.cooldown_index:
            raise InvariantError(f"duplicate cooldown index {cur.cooldown_index}")
        if cur.elapsed_days < prev.elapsed_days:
            raise InvariantError(
                f"elapsed_days decreases at cooldown index {cur.cooldown_index}"
            )


def pure_dephasing_time(t1: float, t2: float) -> float:
    """T_phi from 1/T2 = 1/(2 T1) + 1/T_phi; ``inf`` when T2 = 2 T1."""
    if t1 <= 0 or t2 <= 0:
        raise ValueError("T1 and T2 must be positive")
    rate = 1.0 / t2 - 0.5 / t1
    if rate < -1e-12 / t2:
        raise ValueError("T2 exceeds 2*T1")
    return math.inf if rate <= 0 else 1.0 / rate
