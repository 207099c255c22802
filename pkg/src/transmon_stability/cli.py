"""Command-line entry point: ``transmon-stability simulate|analyze ...``.

Every run writes its data files, a ``manifest.json`` describing the run,
and for analyses a JSON report plus SVG plots drawn from plot-data JSON.
Data files are byte-identical when a run is repeated with the same inputs.

Exit codes: 0 success, 2 validation error, 3 fatal fit failure, 4 I/O error.
Errors are printed to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import aging, expsim, plotting, readout, stability, tlssim
from .constants import DEVICE_TABLE, RAMSEY_SETTINGS, CONSTANTS, bcs_gap
from .domain import QubitDesign
from .errors import (
    AdmissionError,
    ConfigError,
    FitError,
    InsufficientDataError,
    SchemaError,
    TransmonStabilityError,
)
from .fitters import fit_damped_cosine, fit_exponential, resolve_drive_calibration
from .fitters import models
from .io import (
    dump_json,
    keyed_value,
    parse_points,
    serialize,
    validate_dataset,
    write_text,
)
from .manifest import MANIFEST_NAME, RunManifest

EXIT_OK, EXIT_VALIDATION, EXIT_FIT, EXIT_IO = 0, 2, 3, 4

_LAB_SUFFIX = {"_s": ("_us", 1e6), "_hz": ("_ghz", 1e-9)}


def to_units(obj, units: str):
    """Rename ``*_s``/``*_hz`` report keys to microseconds/GHz for ``units='lab'``."""
    if units == "si":
        return obj
    if isinstance(obj, dict):
        out = {}
        for key, val in obj.items():
            for suffix, (new, scale) in _LAB_SUFFIX.items():
                if isinstance(key, str) and key.endswith(suffix):
                    out[key[: -len(suffix)] + new] = _scale(val, scale)
                    break
            else:
                out[key] = to_units(val, units)
        return out
    if isinstance(obj, list):
        return [to_units(v, units) for v in obj]
    return obj


def _scale(val, k):
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return val * k
    if isinstance(val, list):
        return [_scale(v, k) for v in val]
    if isinstance(val, dict):
        return {key: _scale(v, k) for key, v in val.items()}
    return val


class Run:
    """Output directory bookkeeping for one command."""

    def __init__(self, args, config: dict, seeds: dict):
        self.out = Path(args.out)
        self.units = args.units
        self.manifest = RunManifest(list(args.argv), config, seeds)

    def _write(self, name: str, text: str) -> Path:
        path = write_text(self.out / name, text)
        self.manifest.outputs.append(name)
        return path

    def data(self, name: str, record, kind: str) -> None:
        out = serialize(record, kind)
        if kind == "ramsey":
            text, side = out
            side_obj = json.loads(side)
            side_obj["manifest"] = MANIFEST_NAME
            self._write(Path(name).with_suffix(".json").name, dump_json(side_obj))
        else:
            text = out
        self._write(name, f"# manifest={MANIFEST_NAME}\n" + text)

    def report(self, name: str, obj: dict) -> None:
        obj = to_units(dict(obj), self.units)
        obj["manifest"] = MANIFEST_NAME
        obj["units"] = self.units
        self._write(name, dump_json(obj))

    def plot(self, stem: str, data: dict) -> None:
        data = dict(data, manifest=MANIFEST_NAME)
        self._write(stem + ".plot.json", dump_json(data))
        plotting.render(data, self.out / (stem + ".svg"))
        self.manifest.outputs.append(stem + ".svg")

    def finish(self) -> None:
        self.manifest.write(self.out)


# -- config helpers -------------------------------------------------------------------

def _load_config(path) -> dict:
    if path is None:
        return {}
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path.name}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path.name}: expected a JSON object")
    return obj


def _seed(args, config) -> int:
    if args.seed is not None:
        return int(args.seed)
    return int(config.get("seed", 0))


def _noise(config, where: str, **defaults) -> expsim.ExperimentNoiseConfig:
    obj = dict(defaults)
    obj.update(config.get("noise", {}))
    try:
        return expsim.ExperimentNoiseConfig.from_dict(obj)
    except TypeError as exc:
        raise ConfigError(f"{where}.noise: {exc}") from None


def _design(label) -> QubitDesign | None:
    if label is None:
        return None
    if label not in DEVICE_TABLE:
        raise ConfigError(f"qubit: unknown label {label!r}; known: {', '.join(DEVICE_TABLE)}")
    return QubitDesign.from_table(label)


# -- simulate -------------------------------------------------------------------------

def _sim_tls(args, config):
    seed = _seed(args, config)
    if "scaling" in config:
        return _sim_scaling(args, config, seed)
    ens_cfg = tlssim.EnsembleConfig.from_dict({**config.get("ensemble", {}), "seed": seed})
    duration = keyed_value(config, "duration", "time", "config", required=False) or 95 * 3600.0
    cadence = keyed_value(config, "cadence", "time", "config", required=False) or 100.0
    t_phi = keyed_value(config, "t_phi", "time", "config", required=False)
    resolved = {"ensemble": ens_cfg.to_dict(), "duration_s": duration, "cadence_s": cadence,
                "t_phi_s": t_phi}
    run = Run(args, resolved, {"seed": seed})
    ens = tlssim.sample_ensemble(ens_cfg, seed)
    trace = tlssim.simulate_t1_trace(ens, duration, cadence, seed)
    run.data("t1_trace.csv", trace, "trace")
    if t_phi is not None:
        run.data("t2star_trace.csv", tlssim.t2star_trace(trace, t_phi), "trace")
    run.report("ensemble.json", {
        "g_hz": ens.g.tolist(), "gamma_hz": ens.gamma.tolist(), "delta_hz": ens.delta.tolist(),
        "crossing_windows_s": [list(w) for w in tlssim.crossing_windows(ens)],
        "background_rate": ens.background_rate,
    })
    run.report("config.json", resolved)
    return run


def _sim_scaling(args, config, seed):
    sc = dict(config["scaling"])
    where = "config.scaling"
    n = sc.pop("n_qubits", 16)
    lo = keyed_value(sc, "t1_min", "time", where, required=False) or 10e-6
    hi = keyed_value(sc, "t1_max", "time", where, required=False) or 500e-6
    for key in [k for k in sc if k.startswith(("t1_min_", "t1_max_"))]:
        sc.pop(key)
    trace_cfg = tlssim.ScalingConfig.from_dict(sc.pop("trace", {}))
    if sc:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(sorted(sc))}")
    resolved = {"scaling": {"n_qubits": n, "t1_min_s": lo, "t1_max_s": hi,
                            "trace": {**trace_cfg.__dict__, "ensemble": trace_cfg.ensemble.to_dict()}}}
    run = Run(args, resolved, {"seed": seed})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        outcomes = tlssim.scaling_experiment(n, (lo, hi), trace_cfg, seed=seed, jobs=args.jobs)
    points = [{
        "label": o.label, "mean_t1_s": o.mean_t1, "std_t1_s": o.std_t1,
        "std_t1_err_s": o.std_t1_err, "n_samples": o.n_samples, "span_hours": o.span_hours,
    } for o in outcomes]
    run._write("points.json", dump_json(points))
    run.report("outcomes.json", {"qubits": [{
        "label": o.label, "n_tls": o.n_tls, "coupling_scale": o.coupling_scale,
        "skewness": o.skewness, "sample_mean_s": o.sample_mean, "sample_std_s": o.sample_std,
        "flags": sorted(o.flags)} for o in outcomes]})
    run.report("config.json", resolved)
    return run


def _sim_decay(args, config):
    seed = _seed(args, config)
    t1 = keyed_value(config, "t1", "time", "config", required=False) or 30e-6
    n = int(config.get("n_points", 40))
    amp = float(config.get("amplitude", 1.0))
    base = float(config.get("baseline", 0.0))
    noise = _noise(config, "config")
    resolved = {"t1_s": t1, "n_points": n, "amplitude": amp, "baseline": base,
                "noise": noise.to_dict()}
    run = Run(args, resolved, {"seed": seed})
    curve = expsim.simulate_decay_curve(t1, expsim.decay_grid(t1, n), noise, seed, amp, base)
    run.data("decay.csv", curve, "decay")
    run.report("config.json", resolved)
    return run


def _sim_ramsey(args, config):
    seed = _seed(args, config)
    label = config.get("qubit", "A.2")
    if label not in RAMSEY_SETTINGS:
        raise ConfigError(f"config.qubit: unknown label {label!r}")
    t_max0, nyq0, det0, t2_0 = RAMSEY_SETTINGS[label]

    def get(q, dim, default):
        v = keyed_value(config, q, dim, "config", required=False)
        return default if v is None else v

    t_max = get("t_max", "time", t_max0)
    nyq = get("f_nyquist", "frequency", nyq0)
    det = get("detuning", "frequency", det0)
    t2s = get("t2s", "time", t2_0)
    offset = get("f_q_offset", "frequency", 0.0)
    phi0 = float(config.get("phi0", 0.0))
    noise = _noise(config, "config")
    resolved = {"qubit": label, "t_max_s": t_max, "f_nyquist_hz": nyq, "detuning_hz": det,
                "t2s_s": t2s, "f_q_offset_hz": offset, "phi0": phi0, "noise": noise.to_dict()}
    run = Run(args, resolved, {"seed": seed})
    curve = expsim.simulate_ramsey_curve(offset, t2s, det, t_max, noise, seed,
                                         expsim.ramsey_grid(t_max, nyq), phi0)
    run.data("ramsey.csv", curve, "ramsey")
    run.report("config.json", resolved)
    return run


def _sim_singleshot(args, config):
    seed = _seed(args, config)
    design = _design(config.get("qubit", "A.1"))
    sep = float(config.get("separation", 10.0))
    noise = _noise(config, "config")
    resolved = {"qubit": design.label, "separation": sep, "noise": noise.to_dict()}
    run = Run(args, resolved, {"seed": seed})
    shots = expsim.simulate_single_shot(design, sep, noise, seed)
    run.data("shots.csv", shots, "iq")
    run.report("config.json", resolved)
    return run


# -- analyze --------------------------------------------------------------------------

def _need(args, name):
    val = getattr(args, name)
    if val is None:
        raise ConfigError(f"--{name.replace('_', '-')} is required for this command")
    return val


def _an_fit_decay(args, config):
    path = _need(args, "input")
    curve = validate_dataset(path, "decay")
    run = Run(args, {"input": str(path)}, {})
    run.manifest.add_input(path)
    fit = fit_exponential(curve)
    if not fit.converged and args.strict:
        raise FitError("exponential fit did not converge")
    run.report("fit_decay.json", {
        "model": "A*exp(-tau/T1)+B", "converged": fit.converged, "flags": sorted(fit.flags),
        "amplitude": fit["A"], "amplitude_stderr": fit.stderr["A"],
        "baseline": fit["B"], "baseline_stderr": fit.stderr["B"],
        "t1_s": fit["T1"], "t1_stderr_s": fit.stderr["T1"], "residual_norm": fit.residual_norm,
    })
    x = np.linspace(0, curve.delays[-1], 200)
    p = [fit["A"], fit["B"], fit["T1"]]
    run.plot("fit_decay", {"kind": "curve", "x": curve.delays.tolist(), "y": curve.populations.tolist(),
                           "x_model": x.tolist(), "y_model": models.exponential(x, p).tolist(),
                           "xlabel": "delay (s)"})
    return run


def _an_fit_ramsey(args, config):
    path = _need(args, "input")
    curve = validate_dataset(path, "ramsey")
    run = Run(args, {"input": str(path), "f_drive_hz": args.f_drive_hz}, {})
    run.manifest.add_input(path)
    run.manifest.add_input(Path(path).with_suffix(".json"))
    fit = fit_damped_cosine(curve)
    if not fit.converged and args.strict:
        raise FitError("damped-cosine fit did not converge")
    f = fit["f_ramsey"]
    rep = {
        "model": "A*cos(2*pi*f*tau+phi0)*exp(-tau/T2*)+B", "converged": fit.converged,
        "flags": sorted(fit.flags),
        "f_ramsey_hz": f, "f_ramsey_stderr_hz": fit.stderr["f_ramsey"],
        "t2s_s": fit["T2s"], "t2s_stderr_s": fit.stderr["T2s"],
        "phi0": fit["phi0"], "amplitude": fit["A"], "baseline": fit["B"],
        "set_detuning_hz": curve.set_detuning, "offset_hz": abs(f) - curve.set_detuning,
        "nyquist_hz": curve.nyquist, "residual_norm": fit.residual_norm,
    }
    if args.f_drive_hz is not None:
        rep["calibrated_drive_hz"] = resolve_drive_calibration(args.f_drive_hz, f, curve.set_detuning)
    run.report("fit_ramsey.json", rep)
    x = np.linspace(0, curve.t_max, 400)
    p = [fit["A"], fit["B"], fit["phi0"], f, fit["T2s"]]
    run.plot("fit_ramsey", {"kind": "curve", "x": curve.delays.tolist(), "y": curve.populations.tolist(),
                            "x_model": x.tolist(), "y_model": models.damped_cosine(x, p).tolist(),
                            "xlabel": "delay (s)"})
    return run


def _an_readout(args, config):
    path = _need(args, "input")
    shots = validate_dataset(path, "iq")
    run = Run(args, {"input": str(path), "f_q_hz": args.f_q_hz}, {})
    run.manifest.add_input(path)
    model, met = readout.analyze_shots(shots, args.f_q_hz)
    rep = met.to_dict()
    rep["means"] = model.means.tolist()
    rep["covariances"] = model.covariances.tolist()
    rep["training"] = "discriminator refit on this shot set"
    run.report("readout.json", rep)
    pts = shots.points
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    gi, gq = np.linspace(lo[0], hi[0], 60), np.linspace(lo[1], hi[1], 60)
    G = np.stack(np.meshgrid(gi, gq), -1).reshape(-1, 2)
    llr = model.log_likelihood_ratio(G).reshape(60, 60)
    sub = slice(None, None, max(1, len(shots) // 4000))
    run.plot("iq", {"kind": "iq",
                    "points": {str(k): pts[shots.prepared_state == k][sub].tolist() for k in (0, 1)},
                    "grid_i": gi.tolist(), "grid_q": gq.tolist(), "llr": llr.tolist()})
    return run


def _an_stability(args, config):
    folder = Path(_need(args, "traces"))
    if not folder.is_dir():
        raise FileNotFoundError(f"{folder}: not a directory")
    traces, skipped = {}, []
    for p in sorted(folder.glob("*.csv")):
        tr = validate_dataset(p, "trace")
        if tr.parameter_kind in ("T1", "T2*"):
            traces[p.stem] = tr
        else:
            skipped.append(p.name)
    if not traces:
        raise InsufficientDataError(f"no datasets admitted from {folder}")
    run = Run(args, {"traces": str(folder), "k": args.k, "coincidence_threshold": args.threshold}, {})
    run.manifest.add_input(folder)
    summaries, reports, out = {}, {}, {}
    panels = []
    for name, tr in traces.items():
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            s = stability.distribution_summary(tr)
        rep = stability.detect_dropouts(tr, s.moments, k=args.k)
        summaries[name], reports[name] = s, rep
        out[name] = {
            "kind": tr.parameter_kind, "n": len(tr), "span_hours": tr.span / 3600.0,
            "rician": {"nu_s": s.params.nu, "sigma_s": s.params.sigma, "t_max_s": s.params.t_max},
            "mean_s": s.mean, "std_s": s.std, "std_err_s": s.std_err, "skewness": s.skewness,
            "sample_mean_s": s.sample_mean, "sample_std_s": s.sample_std,
            "fit_flags": sorted(s.fit.flags), "ks": s.fit.meta["ks"],
            "warnings": sorted({str(w.message) for w in caught}),
            "dropouts": {"intervals_s": [list(iv) for iv in rep.intervals],
                         "threshold_s": rep.threshold, "affected_fraction": rep.affected_fraction},
        }
        t0 = tr.timestamps[0]
        panels.append({"label": f"{name} ({tr.parameter_kind}, s)",
                       "t_hours": ((tr.timestamps - t0) / 3600).tolist(), "values": tr.values.tolist(),
                       "mean": s.mean, "threshold": rep.threshold,
                       "intervals_hours": [[(a - t0) / 3600, (b - t0) / 3600] for a, b in rep.intervals]})
    coin = stability.coincidence_report(traces, reports, args.threshold)
    run.report("stability.json", {"traces": out, "coincidence": coin.to_dict(), "skipped": skipped})
    run.plot("traces", {"kind": "trace_panels", "panels": panels})
    return run


def _an_aging(args, config):
    path = _need(args, "cooldowns")
    groups = validate_dataset(path, "cooldown")
    delta = bcs_gap(args.t_c_k)
    f_bare = args.f_r_bare_hz
    if f_bare is None and args.l_tot_m is not None:
        f_bare = aging.bare_fr(args.l_tot_m, args.eps_eff)
    run = Run(args, {"cooldowns": str(path), "t_c_k": args.t_c_k, "f_r_bare_hz": f_bare,
                     "anharmonicity_hz": args.anharmonicity_hz}, {})
    run.manifest.add_input(path)
    out = {}
    series = {"x": {}, "panels": [{"label": "df_q (Hz)", "series": {}},
                                  {"label": "df_r (Hz)", "series": {}},
                                  {"label": "dR_N/R_N", "series": {}}]}
    for label, recs in groups.items():
        if label in DEVICE_TABLE:
            e_c = CONSTANTS.h * DEVICE_TABLE[label][2]
        elif args.anharmonicity_hz is not None:
            e_c = CONSTANTS.h * args.anharmonicity_hz
        else:
            raise ConfigError(f"{label}: unknown qubit; pass --anharmonicity-hz")
        rep = aging.cooldown_report(recs, e_c)
        entry = {
            "baseline_index": rep.baseline_index, "elapsed_days": list(rep.elapsed_days),
            "delta_fq_hz": list(rep.delta_fq), "delta_fr_hz": list(rep.delta_fr),
            "rn_relative_change": list(rep.rn_relative), "mean_t1_s": list(rep.mean_t1),
            "notes": list(rep.notes),
            "observation": "mean T1 per cooldown reported as is; no trend test",
        }
        base = next(r for r in recs if r.cooldown_index == rep.baseline_index)
        entry["r_n_baseline_ohm"] = aging.rn_from_fq(base.f_q, e_c, delta)
        if f_bare is not None and sum(r.complete for r in recs) >= 2:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                dec = aging.decompose_fr_shift(recs, aging.ResonatorModel(f_bare), e_c, delta)
            entry["decomposition"] = dec.to_dict()
        out[label] = entry
        series["x"][label] = list(rep.elapsed_days)
        for panel, key in zip(series["panels"], ("delta_fq", "delta_fr", "rn_relative")):
            panel["series"][label] = list(getattr(rep, key))
    run.report("aging.json", {"qubits": out})
    run.plot("aging", {"kind": "series", "xlabel": "elapsed (days)", **series})
    return run


def _an_benchmark(args, config):
    path = Path(_need(args, "points"))
    try:
        rows = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path.name}: invalid JSON ({exc.msg})") from None
    if not isinstance(rows, list):
        raise SchemaError("points: expected a JSON array")
    admitted, rejected = [], []
    for n, row in enumerate(rows):
        try:
            admitted.extend(parse_points([row], override=args.override_admission))
        except AdmissionError as exc:
            rejected.append({"row": n, "reason": str(exc)})
    if not admitted:
        raise InsufficientDataError("no datasets admitted")
    run = Run(args, {"points": str(path), "override_admission": args.override_admission}, {})
    run.manifest.add_input(path)
    fit = stability.fit_scaling_law(admitted)
    rep = fit.to_dict(args.units)
    rep["rejected"] = rejected
    rep["admission_override"] = bool(args.override_admission)
    run.report("benchmark.json", rep)
    k = 1e6 if args.units == "lab" else 1.0
    errs = [p.std_t1_err * k if p.std_t1_err is not None else 0.0 for p in admitted]
    run.plot("benchmark", {
        "kind": "scaling", "mean_t1": [p.mean_t1 * k for p in admitted],
        "std_t1": [p.std_t1 * k for p in admitted], "std_t1_err": errs,
        "a": rep["a"], "a_unit": rep["a_unit"], "time_unit": "us" if args.units == "lab" else "s",
    })
    return run


SIMULATE = {"tls": _sim_tls, "decay": _sim_decay, "ramsey": _sim_ramsey, "singleshot": _sim_singleshot}
ANALYZE = {"fit-decay": _an_fit_decay, "fit-ramsey": _an_fit_ramsey, "readout": _an_readout,
           "stability": _an_stability, "aging": _an_aging, "benchmark": _an_benchmark}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--override-admission", action="store_true",
                        help="admit benchmark points that fail the size and span rules")
    common.add_argument("--units", choices=("si", "lab"), default="si",
                        help="report units: si (s, Hz) or lab (us, GHz)")

    parser = argparse.ArgumentParser(prog="transmon-stability", description=__doc__.splitlines()[0])
    top = parser.add_subparsers(dest="group", required=True)
    sim = top.add_parser("simulate", help="generate synthetic data")
    sim_sub = sim.add_subparsers(dest="command", required=True)
    for name in SIMULATE:
        sim_sub.add_parser(name, parents=[common])
    ana = top.add_parser("analyze", help="analyze datasets")
    ana_sub = ana.add_subparsers(dest="command", required=True)
    for name in ANALYZE:
        p = ana_sub.add_parser(name, parents=[common])
        p.add_argument("--strict", action="store_true", help="treat non-convergence as fatal")
        if name in ("fit-decay", "fit-ramsey", "readout"):
            p.add_argument("--input")
        if name == "fit-ramsey":
            p.add_argument("--f-drive-hz", type=float)
        if name == "readout":
            p.add_argument("--f-q-hz", type=float)
        if name == "stability":
            p.add_argument("--traces")
            p.add_argument("--k", type=float, default=1.0, help="threshold in standard deviations")
            p.add_argument("--threshold", type=float, default=0.5, help="coincidence flag level")
        if name == "aging":
            p.add_argument("--cooldowns")
            p.add_argument("--t-c-k", type=float, default=1.2)
            p.add_argument("--f-r-bare-hz", type=float)
            p.add_argument("--l-tot-m", type=float)
            p.add_argument("--eps-eff", type=float, default=6.45)
            p.add_argument("--anharmonicity-hz", type=float)
        if name == "benchmark":
            p.add_argument("--points")
    return parser


def _error(exc: BaseException, code: int) -> int:
    module = getattr(exc, "module", "io" if code == EXIT_IO else "cli")
    payload = {"error": {"module": module, "type": type(exc).__name__,
                         "message": f"{module}: {exc}", "exit_code": code}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = ["transmon-stability", *argv]
    try:
        config = _load_config(args.config)
        table = SIMULATE if args.group == "simulate" else ANALYZE
        run = table[args.command](args, config)
        run.finish()
    except FitError as exc:
        return _error(exc, EXIT_FIT)
    except TransmonStabilityError as exc:
        return _error(exc, EXIT_VALIDATION)
    except OSError as exc:
        return _error(exc, EXIT_IO)
    print(str(Path(args.out) / MANIFEST_NAME))
    return EXIT_OK
