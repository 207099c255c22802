"""Cross-cooldown analysis: junction resistance, resonator pulling, reports.

Energies are in joules, frequencies in Hz, resistances in ohms and elapsed
time in days.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .constants import CONSTANTS, bcs_gap
from .errors import AgingError, InvariantError, ValidityWarning

H = CONSTANTS.h
E = CONSTANTS.e
TRANSMON_RATIO_MIN = 20.0


def ej_from_rn(r_n: float, delta: float) -> float:
    """Josephson energy h*Delta / (8 e^2 R_N)."""
    return H * delta / (8.0 * E * E * r_n)


def rn_from_ej(e_j: float, delta: float) -> float:
    return H * delta / (8.0 * E * E * e_j)


@dataclass(frozen=True)
class JunctionState:
    e_j: float
    e_c: float
    r_n: float
    delta: float

    def __post_init__(self):
        for name in ("e_j", "e_c", "r_n", "delta"):
            if not getattr(self, name) > 0:
                raise InvariantError(f"JunctionState.{name} must be positive")
        if not math.isclose(self.e_j, ej_from_rn(self.r_n, self.delta), rel_tol=1e-9):
            raise InvariantError("e_j and r_n disagree with E_J = h Delta / (8 e^2 R_N)")
        if self.e_j / self.e_c < TRANSMON_RATIO_MIN:
            warnings.warn(
                f"E_J/E_C = {self.e_j / self.e_c:.3g} below {TRANSMON_RATIO_MIN:g}; "
                "the transmon frequency formula loses accuracy",
                ValidityWarning, stacklevel=3,
            )

    @classmethod
    def from_resistance(cls, r_n: float, e_c: float, delta: float) -> "JunctionState":
        return cls(ej_from_rn(r_n, delta), e_c, r_n, delta)

    @classmethod
    def from_josephson(cls, e_j: float, e_c: float, delta: float) -> "JunctionState":
        return cls(e_j, e_c, rn_from_ej(e_j, delta), delta)


def fq_from_junction(state: JunctionState) -> float:
    """Transmon transition frequency (sqrt(8 E_J E_C) - E_C) / h."""
    return (math.sqrt(8.0 * state.e_j * state.e_c) - state.e_c) / H


def rn_from_fq(f_q: float, e_c: float, delta: float) -> float:
    """Normal-state resistance h Delta E_C / (e^2 (h f_q + E_C)^2)."""
    if not (f_q > 0 and e_c > 0 and delta > 0):
        raise InvariantError("f_q, e_c and delta must be positive")
    return H * delta * e_c / (E * E * (f_q * H + e_c) ** 2)


def resistance_change(f_q_ref: float, f_q: float, e_c: float) -> float:
    """Relative change R_N/R_N,ref - 1 implied by a move from ``f_q_ref`` to ``f_q``."""
    return ((f_q_ref * H + e_c) / (f_q * H + e_c)) ** 2 - 1.0


@dataclass(frozen=True)
class ResonatorModel:
    f_r_bare: float
    g: float = 0.0
    l_tot: float | None = None
    eps_eff: float | None = None

    def __post_init__(self):
        if not self.f_r_bare > 0:
            raise InvariantError("f_r_bare must be positive")
        if not self.g >= 0:
            raise InvariantError("g must be >= 0")
        if self.eps_eff is not None and not self.eps_eff >= 1:
            raise InvariantError("eps_eff must be >= 1")
        if self.l_tot is not None and not self.l_tot > 0:
            raise InvariantError("l_tot must be positive")

    @classmethod
    def from_geometry(cls, l_tot: float, eps_eff: float, g: float = 0.0) -> "ResonatorModel":
        return cls(bare_fr(l_tot, eps_eff), g, l_tot, eps_eff)


def bare_fr(l_tot: float, eps_eff: float) -> float:
    """Quarter-wave resonance c0 / (4 l_tot sqrt(eps_eff))."""
    if not (l_tot > 0 and eps_eff > 0):
        raise InvariantError("l_tot and eps_eff must be positive")
    return CONSTANTS.c0 / (4.0 * l_tot * math.sqrt(eps_eff))


def _pulled(f_r_bare: float, g: float, f_q: float) -> float:
    detuning = f_r_bare - f_q
    if detuning == 0:
        raise InvariantError("resonator and qubit are degenerate")
    if abs(detuning) < 10.0 * g:
        warnings.warn(
            f"|f_r,bare - f_q| = {abs(detuning):.4g} Hz is within 10 g; dispersive approximation questionable",
            ValidityWarning, stacklevel=3,
        )
    return f_r_bare + g * g / detuning


def dressed_fr(model: ResonatorModel, f_q: float) -> float:
    """Dispersively shifted resonator frequency f_r,bare + g^2 / (f_r,bare - f_q)."""
    return _pulled(model.f_r_bare, model.g, f_q)


def coupling_from_pair(f_r: float, f_q: float, f_r_bare: float) -> float:
    """Coupling g that makes the dispersive formula reproduce ``(f_r, f_q)``."""
    g2 = (f_r - f_r_bare) * (f_r_bare - f_q)
    if g2 < 0:
        raise AgingError(
            "measured f_r and f_q are inconsistent with the bare resonator frequency "
            "(pulling has the wrong sign)"
        )
    return math.sqrt(g2)


@dataclass(frozen=True)
class ShiftSplit:
    cooldown_index: int
    elapsed_days: float
    delta_fr: float
    pulling: float
    bare: float

    @property
    def pulling_share(self) -> float:
        return self.pulling / self.delta_fr if self.delta_fr != 0 else math.nan

    @property
    def bare_share(self) -> float:
        return self.bare / self.delta_fr if self.delta_fr != 0 else math.nan

    def to_dict(self) -> dict:
        return {
            "cooldown_index": self.cooldown_index,
            "elapsed_days": self.elapsed_days,
            "delta_fr_hz": self.delta_fr,
            "pulling_hz": self.pulling,
            "bare_hz": self.bare,
            "pulling_share": self.pulling_share,
            "bare_share": self.bare_share,
        }


@dataclass(frozen=True)
class ShiftDecomposition:
    reference_index: int
    g: float
    f_r_bare: float
    splits: tuple
    notes: tuple = ()
    method: str = "dispersive pulling at fixed bare frequency, g scaled as R_N^(-1/4)"

    def to_dict(self) -> dict:
        return {
            "reference_index": self.reference_index,
            "g_hz": self.g,
            "f_r_bare_hz": self.f_r_bare,
            "method": self.method,
            "splits": [s.to_dict() for s in self.splits],
            "notes": list(self.notes),
        }


def decompose_fr_shift(records, model: ResonatorModel, e_c: float,
                       delta: float | None = None, g: float | None = None) -> ShiftDecomposition:
    """Split each resonator shift into qubit pulling and a bare-frequency remainder.

    The earliest record carrying both frequencies is the reference. Unless
    ``g`` is given it is back-solved from that record and ``model.f_r_bare``.
    For each later record the resistance follows from its f_q, the coupling
    is scaled as ``(R_N,ref / R_N)**(1/4)``, and the pulled frequency at fixed
    bare frequency gives the pulling share. The rest of the observed shift is
    the bare share, so the two add up to the observed shift exactly.
    """
    records = sorted(records, key=lambda r: r.cooldown_index)
    if len(records) < 2:
        raise AgingError("decomposition needs at least two cooldown records")
    delta = bcs_gap(1.2) if delta is None else delta
    notes = []
    usable = []
    for r in records:
        if r.complete:
            usable.append(r)
        else:
            notes.append(f"cooldown {r.cooldown_index}: missing f_q or f_r, skipped")
    if len(usable) < 2:
        raise AgingError("fewer than two cooldown records with both f_q and f_r")
    ref = usable[0]
    bare = model.f_r_bare
    g0 = coupling_from_pair(ref.f_r, ref.f_q, bare) if g is None else float(g)
    rn0 = rn_from_fq(ref.f_q, e_c, delta)
    f_r_ref = _pulled(bare, g0, ref.f_q)
    splits = []
    for r in usable[1:]:
        g_k = g0 * (rn0 / rn_from_fq(r.f_q, e_c, delta)) ** 0.25
        pull = _pulled(bare, g_k, r.f_q) - f_r_ref
        obs = r.f_r - ref.f_r
        splits.append(ShiftSplit(r.cooldown_index, r.elapsed_days - ref.elapsed_days, obs, pull, obs - pull))
    return ShiftDecomposition(ref.cooldown_index, g0, bare, tuple(splits), tuple(notes))


@dataclass(frozen=True)
class AgingReport:
    baseline_index: int
    elapsed_days: tuple
    delta_fq: tuple
    delta_fr: tuple
    rn_relative: tuple
    mean_t1: tuple
    notes: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "baseline_index": self.baseline_index,
            "elapsed_days": list(self.elapsed_days),
            "delta_fq_hz": list(self.delta_fq),
            "delta_fr_hz": list(self.delta_fr),
            "rn_relative_change": list(self.rn_relative),
            "mean_t1_s": list(self.mean_t1),
            "notes": list(self.notes),
        }


def cooldown_report(records, e_c: float) -> AgingReport:
    """Changes of f_q, f_r and R_N relative to the earliest complete cooldown.

    Entries missing a quantity carry ``nan`` for it. Mean T1 is passed
    through as an observation series without any trend test.
    """
    records = sorted(records, key=lambda r: r.cooldown_index)
    if not records:
        raise AgingError("no cooldown records")
    notes = []
    base = next((r for r in records if r.complete), None)
    if base is None:
        raise AgingError("no cooldown record carries both f_q and f_r")
    if base is not records[0]:
        notes.append(
            f"baseline taken from cooldown {base.cooldown_index}; earlier records lack f_q or f_r"
        )
    days, dfq, dfr, drn, t1 = [], [], [], [], []
    for r in records:
        if r.cooldown_index < base.cooldown_index:
            continue
        days.append(r.elapsed_days - base.elapsed_days)
        dfq.append(r.f_q - base.f_q if r.f_q is not None else math.nan)
        dfr.append(r.f_r - base.f_r if r.f_r is not None else math.nan)
        drn.append(resistance_change(base.f_q, r.f_q, e_c) if r.f_q is not None else math.nan)
        t1.append(r.mean_t1 if r.mean_t1 is not None else math.nan)
    return AgingReport(base.cooldown_index, tuple(days), tuple(dfq), tuple(dfr),
                       tuple(drn), tuple(t1), tuple(notes))

