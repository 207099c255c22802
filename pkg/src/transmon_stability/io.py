"""File schemas: parsing with unit conversion, validation and canonical output.

CSV files start with optional ``# key=value`` metadata lines followed by a
mandatory header row. Dimensioned columns carry their unit as a suffix
(``tau_s``, ``tau_us``, ``f_q_ghz``); a dimensioned column without a suffix is
rejected. Everything is converted to SI on parse, and the canonical writer
emits SI with shortest round-trip float formatting, so
``serialize(parse(text)) == text`` for canonical files.
"""

from __future__ import annotations

import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .domain import (
    PARAMETER_KINDS,
    CooldownRecord,
    DecayCurve,
    IQShotSet,
    RamseyCurve,
    TimeTrace,
    check_cooldown_order,
)
from .errors import InvariantError, SchemaError

UNIT_SCALES = {
    "time": {"h": 3600.0, "s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9},
    "frequency": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9},
    "temperature": {"k": 1.0, "mk": 1e-3},
    "days": {"days": 1.0},
    "hours": {"hours": 1.0},
}

_TRACE_DIMENSIONS = {
    "T1": "time",
    "T2*": "time",
    "f_ramsey_offset": "frequency",
    "t_eff": "temperature",
    "t_mxc": "temperature",
    "delta_m": None,
    "fidelity": None,
}

_SI_SUFFIX = {"time": "s", "frequency": "hz", "temperature": "k"}
_SI_UNIT_LABEL = {"time": "s", "frequency": "Hz", "temperature": "K"}

# kind -> ordered columns as (quantity, dimension or None)
CSV_SCHEMAS = {
    "decay": [("tau", "time"), ("p1", None)],
    "ramsey": [("tau", "time"), ("p1", None)],
    "iq": [("i", None), ("q", None), ("prepared_state", None)],
    "trace": [("t", "time"), ("value", None)],
}

KINDS = ("decay", "ramsey", "iq", "trace", "cooldown", "points")


def split_unit(token: str, quantity: str, dimension: str | None, where: str) -> float:
    """Return the SI scale factor declared by ``token`` for ``quantity``."""
    token = token.strip()
    if dimension is None:
        if token != quantity:
            raise SchemaError(f"{where}: expected column {quantity!r}, got {token!r}")
        return 1.0
    if token == quantity:
        raise SchemaError(f"{where}: missing unit for {quantity!r}")
    prefix = quantity + "_"
    if not token.startswith(prefix):
        raise SchemaError(f"{where}: expected column {quantity!r}, got {token!r}")
    unit = token[len(prefix):].lower()
    scales = UNIT_SCALES[dimension]
    if unit not in scales:
        raise SchemaError(
            f"{where}: unknown {dimension} unit {unit!r} for {quantity!r} "
            f"(allowed: {', '.join(scales)})"
        )
    return scales[unit]


def keyed_value(obj: dict, quantity: str, dimension: str, where: str, required=True):
    """Find ``quantity_<unit>`` in a JSON object and return the SI value."""
    if quantity in obj:
        raise SchemaError(f"{where}: missing unit for {quantity!r}")
    hits = [k for k in obj if k.startswith(quantity + "_")]
    hits = [k for k in hits if k[len(quantity) + 1:].lower() in UNIT_SCALES[dimension]]
    if not hits:
        if required:
            raise SchemaError(f"{where}: missing field {quantity!r}")
        return None
    if len(hits) > 1:
        raise SchemaError(f"{where}: field {quantity!r} given twice ({', '.join(hits)})")
    key = hits[0]
    val = obj[key]
    if val is None:
        return None
    scale = split_unit(key, quantity, dimension, where)
    try:
        return float(val) * scale
    except (TypeError, ValueError):
        raise SchemaError(f"{where}: field {key!r} is not numeric") from None


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _read_csv_text(text: str, kind: str):
    lines = text.splitlines()
    meta: dict[str, str] = {}
    pos = 0
    while pos < len(lines) and lines[pos].startswith("#"):
        body = lines[pos][1:].strip()
        if "=" not in body:
            raise SchemaError(f"{kind}: malformed metadata line {pos + 1}: {lines[pos]!r}")
        key, val = body.split("=", 1)
        meta[key.strip()] = val.strip()
        pos += 1
    if pos >= len(lines):
        raise SchemaError(f"{kind}: header row missing")
    header = [h.strip() for h in lines[pos].split(",")]
    schema = CSV_SCHEMAS[kind]
    if len(header) != len(schema):
        raise SchemaError(
            f"{kind}: expected {len(schema)} columns "
            f"({', '.join(q for q, _ in schema)}), got {len(header)}"
        )
    scales = [split_unit(tok, q, dim, kind) for tok, (q, dim) in zip(header, schema)]
    rows = []
    for n, line in enumerate(lines[pos + 1:]):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(schema):
            raise SchemaError(f"{kind}: row {n} has {len(cells)} fields, expected {len(schema)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise SchemaError(f"{kind}: row {n} has a non-numeric field") from None
    data = np.array(rows, dtype=float).reshape(-1, len(schema))
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(data), axis=1))[0])
        raise InvariantError(f"{kind}: non-finite value in row {bad}")
    return meta, data * np.array(scales)


def _check_p1_rows(p1: np.ndarray, kind: str) -> None:
    bad = np.flatnonzero((p1 < 0) | (p1 > 1))
    if bad.size:
        i = int(bad[0])
        raise InvariantError(f"{kind}: p1 = {float(p1[i])!r} out of range [0, 1] in row {i}")


def _check_delays(tau: np.ndarray, kind: str) -> None:
    if tau.size and tau[0] < 0:
        raise InvariantError(f"{kind}: delays must be nonnegative (row 0)")
    bad = np.flatnonzero(np.diff(tau) <= 0)
    if bad.size:
        raise InvariantError(
            f"{kind}: delays must be strictly increasing (row {int(bad[0]) + 1})"
        )


def _pop_int(meta: dict, key: str, default: int | None, kind: str):
    if key not in meta:
        return default
    try:
        return int(meta.pop(key))
    except ValueError:
        raise SchemaError(f"{kind}: metadata {key!r} must be an integer") from None


def parse_decay(text: str) -> DecayCurve:
    meta, data = _read_csv_text(text, "decay")
    tau, p1 = data[:, 0], data[:, 1]
    _check_delays(tau, "decay")
    _check_p1_rows(p1, "decay")
    shots = _pop_int(meta, "shots_per_point", 1024, "decay")
    return DecayCurve(tau, p1, shots, meta=meta)


def parse_ramsey(text: str, sidecar: dict) -> RamseyCurve:
    meta, data = _read_csv_text(text, "ramsey")
    tau, p1 = data[:, 0], data[:, 1]
    _check_delays(tau, "ramsey")
    _check_p1_rows(p1, "ramsey")
    if not isinstance(sidecar, dict):
        raise SchemaError("ramsey sidecar: expected a JSON object")
    side = dict(sidecar)
    detuning = keyed_value(side, "detuning", "frequency", "ramsey sidecar")
    t_max = keyed_value(side, "t_max", "time", "ramsey sidecar")
    if "shots" not in side:
        raise SchemaError("ramsey sidecar: missing field 'shots'")
    shots = side["shots"]
    if not isinstance(shots, int) or isinstance(shots, bool):
        raise SchemaError("ramsey sidecar: field 'shots' must be an integer")
    if tau.size and tau[-1] > t_max * (1 + 1e-12):
        raise InvariantError("ramsey: delays exceed t_max")
    return RamseyCurve(tau, p1, detuning, t_max, shots, meta=meta)


def parse_iq(text: str) -> IQShotSet:
    meta, data = _read_csv_text(text, "iq")
    state = data[:, 2]
    bad = np.flatnonzero((state != 0) & (state != 1))
    if bad.size:
        raise InvariantError(f"iq: prepared_state must be 0 or 1 (row {int(bad[0])})")
    declared = _pop_int(meta, "n_per_state", None, "iq")
    f_q = None
    fq_keys = [k for k in meta if k.startswith("f_q_")]
    if fq_keys:
        key = fq_keys[0]
        f_q = float(meta.pop(key)) * split_unit(key, "f_q", "frequency", "iq metadata")
    shots = IQShotSet(data[:, 0], data[:, 1], state.astype(np.int64), f_q=f_q, meta=meta)
    if declared is not None and shots.n_per_state != (declared, declared):
        raise InvariantError(
            f"iq: declared n_per_state={declared} but found {shots.n_per_state}"
        )
    return shots


def parse_trace(text: str) -> TimeTrace:
    meta, data = _read_csv_text(text, "trace")
    kind = meta.pop("kind", None)
    if kind is None:
        raise SchemaError("trace: metadata 'kind' missing")
    if kind not in PARAMETER_KINDS:
        raise SchemaError(f"trace: kind must be one of {PARAMETER_KINDS}, got {kind!r}")
    if "unit" not in meta:
        raise SchemaError("trace: metadata 'unit' missing")
    unit = meta.pop("unit")
    dim = _TRACE_DIMENSIONS[kind]
    values = data[:, 1]
    if dim is None:
        si_unit = unit
    else:
        scales = UNIT_SCALES[dim]
        if unit.lower() not in scales:
            raise SchemaError(f"trace: unit {unit!r} not a {dim} unit for kind {kind}")
        values = values * scales[unit.lower()]
        si_unit = _SI_UNIT_LABEL[dim]
    return TimeTrace(data[:, 0], values, kind, si_unit, meta=meta)


def parse_cooldowns(obj) -> dict[str, list[CooldownRecord]]:
    """Cooldown JSON: an array of records, or an object mapping label -> array."""
    if isinstance(obj, list):
        groups = {"qubit": obj}
    elif isinstance(obj, dict):
        groups = obj
    else:
        raise SchemaError("cooldown: expected a JSON array or object")
    out = {}
    for label, rows in groups.items():
        if not isinstance(rows, list):
            raise SchemaError(f"cooldown[{label}]: expected an array")
        recs = []
        for n, row in enumerate(rows):
            where = f"cooldown[{label}][{n}]"
            if not isinstance(row, dict):
                raise SchemaError(f"{where}: expected an object")
            for key in ("index", "elapsed_days"):
                if key not in row:
                    raise SchemaError(f"{where}: missing field {key!r}")
            recs.append(CooldownRecord(
                cooldown_index=int(row["index"]),
                elapsed_days=float(row["elapsed_days"]),
                f_q=keyed_value(row, "f_q", "frequency", where, required=False),
                f_r=keyed_value(row, "f_r", "frequency", where, required=False),
                mean_t1=keyed_value(row, "mean_t1", "time", where, required=False),
            ))
        check_cooldown_order(recs)
        out[str(label)] = sorted(recs, key=lambda r: r.cooldown_index)
    return out


def parse_points(obj, override: bool = False):
    from .stability import ScalingPoint

    if not isinstance(obj, list):
        raise SchemaError("points: expected a JSON array")
    pts = []
    for n, row in enumerate(obj):
        where = f"points[{n}]"
        if not isinstance(row, dict):
            raise SchemaError(f"{where}: expected an object")
        for key in ("label", "n_samples", "span_hours"):
            if key not in row:
                raise SchemaError(f"{where}: missing field {key!r}")
        pts.append(ScalingPoint(
            label=str(row["label"]),
            mean_t1=keyed_value(row, "mean_t1", "time", where),
            std_t1=keyed_value(row, "std_t1", "time", where),
            n_samples=int(row["n_samples"]),
            span_hours=float(row["span_hours"]),
            std_t1_err=keyed_value(row, "std_t1_err", "time", where, required=False),
            override=override or bool(row.get("override", False)),
        ))
    return pts


def ramsey_sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def validate_dataset(path, kind: str, override: bool = False):
    """Parse ``path`` as ``kind`` and return the validated record.

    Raises :class:`SchemaError` on a schema mismatch (naming the field) and
    :class:`InvariantError` when a record invariant is violated.
    """
    if kind not in KINDS:
        raise SchemaError(f"unknown dataset kind {kind!r}; expected one of {KINDS}")
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    text = path.read_text()
    if kind == "decay":
        return parse_decay(text)
    if kind == "ramsey":
        side = ramsey_sidecar_path(path)
        if not side.is_file():
            raise SchemaError(f"ramsey: sidecar {side.name} missing")
        return parse_ramsey(text, _load_json(side))
    if kind == "iq":
        return parse_iq(text)
    if kind == "trace":
        return parse_trace(text)
    obj = _load_json(path)
    if kind == "cooldown":
        return parse_cooldowns(obj)
    return parse_points(obj, override=override)


def _load_json(path: Path):
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path.name}: invalid JSON ({exc.msg})") from None


# -- canonical writers --------------------------------------------------------

def _csv(meta: dict, header: list[str], columns: list[np.ndarray]) -> str:
    buf = _io.StringIO()
    for key, val in meta.items():
        buf.write(f"# {key}={val}\n")
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def serialize_decay(curve: DecayCurve) -> str:
    meta = {"shots_per_point": str(curve.shots_per_point), **curve.meta}
    return _csv(meta, ["tau_s", "p1"], [curve.delays, curve.populations])


def serialize_ramsey(curve: RamseyCurve) -> tuple[str, str]:
    text = _csv(dict(curve.meta), ["tau_s", "p1"], [curve.delays, curve.populations])
    side = {
        "detuning_hz": float(curve.set_detuning),
        "t_max_s": float(curve.t_max),
        "shots": int(curve.shots_per_point),
    }
    return text, dump_json(side)


def serialize_iq(shots: IQShotSet) -> str:
    meta = {}
    n0, n1 = shots.n_per_state
    if n0 == n1:
        meta["n_per_state"] = str(n0)
    if shots.f_q is not None:
        meta["f_q_hz"] = _fmt(shots.f_q)
    meta.update(shots.meta)
    return _csv(meta, ["i", "q", "prepared_state"], [shots.i, shots.q, shots.prepared_state])


def serialize_trace(trace: TimeTrace) -> str:
    meta = {"kind": trace.parameter_kind, "unit": trace.unit, **trace.meta}
    return _csv(meta, ["t_s", "value"], [trace.timestamps, trace.values])


def serialize_cooldowns(groups: dict[str, list[CooldownRecord]]) -> str:
    def row(r: CooldownRecord):
        return {
            "index": r.cooldown_index,
            "elapsed_days": r.elapsed_days,
            "f_q_hz": r.f_q,
            "f_r_hz": r.f_r,
            "mean_t1_s": r.mean_t1,
        }

    return dump_json({label: [row(r) for r in recs] for label, recs in groups.items()})


def serialize(record, kind: str):
    if kind == "decay":
        return serialize_decay(record)
    if kind == "ramsey":
        return serialize_ramsey(record)
    if kind == "iq":
        return serialize_iq(record)
    if kind == "trace":
        return serialize_trace(record)
    if kind == "cooldown":
        return serialize_cooldowns(record)
    raise SchemaError(f"no canonical writer for kind {kind!r}")


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _clean(obj):
    """Replace non-finite floats by None so output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    obj = json.loads(json.dumps(obj, default=_json_default))
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def write_record(record, kind: str, path) -> Path:
    """Write a record in its canonical form; ramsey also writes the sidecar."""
    out = serialize(record, kind)
    if kind == "ramsey":
        text, side = out
        write_text(ramsey_sidecar_path(path), side)
        return write_text(path, text)
    return write_text(path, out)
