"""Configuration-driven scans that reproduce the figure-level datasets."""

import dataclasses
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import design
from .errors import BandGapWarning, CorruwaveError
from .modes import Device, WaveguideSpec, linear_coupling, mismatches, nonlinear_coupling, qpm_period
from .simulate import Drive, run_point

TASKS = ("characterize", "scan_poling", "scan_corrugation", "enhancement", "optimum_curve",
         "power_sweep", "improvement", "optimize")

RESULT_COLUMNS = ("lambda_sF", "lambda_pF", "lambda_sB", "lambda_pB", "lambda_sF_pF",
                  "N_sF", "N_pF", "N_sB", "N_pB", "Pout_sF", "Pout_pF", "Pout_sB", "Pout_pB",
                  "conservation", "commutator", "band_gap")

DEVICE_KEYS = ("thickness", "length", "width", "pump_wavelength", "corrugation_depth",
               "corrugation_period", "poling_period")
DRIVE_KEYS = tuple(f.name for f in dataclasses.fields(Drive))
SOLVER_KEYS = ("n", "tol", "max_iter")
OUTPUT_KEYS = ("path", "format")

# scan keys accepted by each task, with defaults
SCAN_DEFAULTS = {
    "characterize": {"t": [0.41e-6, 0.54e-6, 14], "t_l": 1e-7},
    "scan_poling": {"poling_period_r": [3.50e-3, 3.60e-3, 21]},
    "scan_corrugation": {"placement": "pump", "K_r": [1.0, 20.0, 20], "delta_r": [-40.0, -5.0, 36],
                         "delta_nl_r": -10.82},
    "enhancement": {"K_r": [0.0, 50.0, 51], "m": [1, 2, 3, 4, 5]},
    "optimum_curve": {"placement": "pump", "delta_nl_r": [-30.0, -5.0, 11], "m": 1, "sign": 1,
                      "refine": False, "max_evals": 200},
    "power_sweep": {"P_pF": [0.1, 2.0, 20], "delta_nl_r": -10.82, "m": 1, "sign": 1, "refine": False},
    "improvement": {"K_r": [5.0, 50.0, 10], "m": 1, "sign": 1, "refine": False},
    "optimize": {"placement": "pump", "t_l": None, "K_r": None, "delta_nl_r": -10.82, "m": 1,
                 "sign": 1, "delta_sign": None, "max_evals": 200},
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    task: str
    device: dict = field(default_factory=dict)
    drive: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc, task=None):
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(doc) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        doc = dict(doc)
        if task is not None:
            if doc.get("task", task) != task:
                raise ConfigError(f"task {task!r} conflicts with config task {doc['task']!r}")
            doc["task"] = task
        if doc.get("task") not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    def validate(self):
        for name, allowed in (("device", DEVICE_KEYS), ("drive", DRIVE_KEYS), ("solver", SOLVER_KEYS),
                              ("output", OUTPUT_KEYS), ("scan", tuple(SCAN_DEFAULTS[self.task]))):
            section = getattr(self, name)
            if not isinstance(section, dict):
                raise ConfigError(f"{name} must be an object")
            unknown = set(section) - set(allowed)
            if unknown:
                raise ConfigError(f"unknown {name} keys: {sorted(unknown)}")
        for k, v in self.drive.items():
            if k.startswith("P_") and (not isinstance(v, (int, float)) or v < 0):
                raise ConfigError(f"power {k} must be a non-negative number")
        for k, v in self.full_scan().items():
            if isinstance(v, list) and len(v) == 3 and k not in ("m",):
                if int(v[2]) != v[2] or v[2] < 1:
                    raise ConfigError(f"scan range {k} needs a positive point count")
            if isinstance(v, list) and len(v) == 0:
                raise ConfigError(f"scan range {k} is empty")
        if self.output.get("format", "csv") not in ("csv", "json"):
            raise ConfigError("output format must be csv or json")
        try:
            self.waveguide()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid device: {exc}") from exc

    def full_scan(self):
        return {**SCAN_DEFAULTS[self.task], **self.scan}

    def waveguide(self):
        return WaveguideSpec(**self.device)

    def drive_obj(self):
        return Drive(**self.drive)

    def solver_kw(self):
        return dict(self.solver)

    def to_dict(self):
        return dataclasses.asdict(self)


def grid(spec):
    """Scan axis from a [lo, hi, n] triple, a scalar, or an explicit list."""
    if isinstance(spec, list) and len(spec) == 3 and all(isinstance(v, (int, float)) for v in spec):
        return np.linspace(spec[0], spec[1], int(spec[2]))
    return np.atleast_1d(np.asarray(spec, dtype=float))


def _nan_row():
    return {k: math.nan for k in RESULT_COLUMNS}


def _solve(device, couplings, drive, solver, extra=None):
    """One point; solver failures are recorded in the status column."""
    row = dict(extra or {})
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BandGapWarning)
            res = run_point(device, couplings, drive=drive, **solver)
        row.update(res.row())
        row["status"] = "ok"
        return row, res
    except CorruwaveError as exc:
        row.update(_nan_row())
        row["status"] = type(exc).__name__
        return row, None


# per-task point lists: each point is a picklable tuple handled by _point

def _points(cfg):
    task, scan = cfg.task, cfg.full_scan()
    if task == "characterize":
        return [("characterize", t, scan["t_l"]) for t in grid(scan["t"])]
    if task == "scan_poling":
        return [("poling", r) for r in grid(scan["poling_period_r"])]
    if task == "scan_corrugation":
        return [("corrugation", scan["placement"], K, d, scan["delta_nl_r"])
                for K in grid(scan["K_r"]) for d in grid(scan["delta_r"])]
    if task == "enhancement":
        return [("enhancement", K, int(m)) for m in grid(scan["m"]) for K in grid(scan["K_r"])]
    if task == "optimum_curve":
        return [("optimum", scan["placement"], d, int(scan["m"]), int(scan["sign"]),
                 bool(scan["refine"]), int(scan["max_evals"])) for d in grid(scan["delta_nl_r"])]
    if task == "power_sweep":
        return [("power", P, kind, scan["delta_nl_r"], int(scan["m"]), int(scan["sign"]), bool(scan["refine"]))
                for P in grid(scan["P_pF"]) for kind in ("corrugated", "mismatched", "qpm")]
    if task == "improvement":
        return [("improvement", K, int(scan["m"]), int(scan["sign"]), bool(scan["refine"]))
                for K in grid(scan["K_r"])]
    return [("optimize",)]


def _point(args):
    cfg, point = args
    device = Device.from_spec(cfg.waveguide())
    L = device.length
    drive, solver = cfg.drive_obj(), cfg.solver_kw()
    kind = point[0]
    if kind == "characterize":
        _, t, t_l = point
        row = {"t": t, "t_l": t_l}
        try:
            dev = Device.from_spec(cfg.waveguide().__class__(**{**cfg.device, "thickness": t}))
            row["delta_nl0"] = mismatches(dev.mode_p, dev.mode_s)[2]
            row["K_nl0_abs"] = abs(nonlinear_coupling(dev.mode_p, dev.mode_s))
            row["K_p_abs"] = abs(linear_coupling(dev.mode_p, min(t_l, t)))
            row["K_s_abs"] = abs(linear_coupling(dev.mode_s, min(t_l, t)))
            row["status"] = "ok"
        except CorruwaveError as exc:
            row.update(delta_nl0=math.nan, K_nl0_abs=math.nan, K_p_abs=math.nan, K_s_abs=math.nan,
                       status=type(exc).__name__)
        return row
    if kind == "poling":
        _, r = point
        period = r * L
        dnl = mismatches(device.mode_p, device.mode_s, poling_period=period, q=-1)[2]
        cs = device.qpm_couplings(delta_nl=dnl)
        return _solve(device, cs, drive, solver, {"poling_period_r": r, "delta_nl_r": dnl * L})[0]
    if kind == "corrugation":
        _, placement, K, d, dnl = point
        p = design.DesignPoint(placement, 1, 1, K / L, d / L, dnl / L)
        return _solve(device, p.couplings(device.qpm_couplings()), drive, solver,
                      {"K_r": K, "delta_r": d, "delta_nl_r": dnl})[0]
    if kind == "enhancement":
        _, K, m = point
        return {"K_r": K, "m": m, "M": design.enhancement_factor(K / L, L, m), "status": "ok"}
    if kind == "optimum":
        _, placement, dnl, m, sign, refine, max_evals = point
        return _design_row(device, drive, solver, {"delta_nl_r": dnl}, placement=placement,
                           delta_nl=dnl / L, m=m, sign=sign, refine=refine, max_evals=max_evals)
    if kind == "power":
        _, P, which, dnl, m, sign, refine = point
        drive = dataclasses.replace(drive, P_pF=P)
        coords = {"P_pF": P, "configuration": which}
        if which == "qpm":
            return _solve(device, device.qpm_couplings(), drive, solver, coords)[0]
        if which == "mismatched":
            return _solve(device, device.qpm_couplings(delta_nl=dnl / L), drive, solver, coords)[0]
        return _design_row(device, drive, solver, coords, delta_nl=dnl / L, m=m, sign=sign, refine=refine)
    if kind == "improvement":
        _, K, m, sign, refine = point
        ref, _ = _solve(device, device.qpm_couplings(), drive, solver)
        row = _design_row(device, drive, solver, {"K_r": K}, K=K / L, m=m, sign=sign,
                          delta_sign=-1, refine=refine)
        row["lambda_sF_ref"] = ref["lambda_sF"]
        try:
            row["D_dB"] = design.improvement_db(row["lambda_sF"], ref["lambda_sF"])
        except (ValueError, TypeError):
            row["D_dB"] = math.nan
        return row
    scan = cfg.full_scan()
    kw = dict(placement=scan["placement"], m=int(scan["m"]), sign=int(scan["sign"]),
              max_evals=int(scan["max_evals"]), delta_sign=scan["delta_sign"])
    if scan["t_l"] is not None:
        kw["t_l"] = scan["t_l"]
    elif scan["K_r"] is not None:
        kw["K"] = scan["K_r"] / L
    else:
        kw["delta_nl"] = scan["delta_nl_r"] / L
    return _design_row(device, drive, solver, {}, refine=True, **kw)


def _design_row(device, drive, solver, coords, **kw):
    L = device.length
    row = dict(coords)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BandGapWarning)
            p = design.optimize_design(device, drive=drive, **kw, **solver)
    except CorruwaveError as exc:
        row.update(K_r=row.get("K_r", math.nan), delta_r=math.nan, delta_nl_r=row.get("delta_nl_r", math.nan),
                   corrugation_period=math.nan, poling_period=math.nan, M=math.nan, lambda_sF_analytic=math.nan)
        row.update(_nan_row())
        row["status"] = type(exc).__name__
        return row
    row.update(K_r=p.K * L, delta_r=p.delta * L, delta_nl_r=p.delta_nl * L,
               corrugation_period=p.corrugation_period,
               poling_period=math.nan if p.poling_period is None else p.poling_period,
               M=p.enhancement, lambda_sF_analytic=p.lambda_sF_analytic)
    if p.result is None:
        row.update(_nan_row())
        row["status"] = "NoConvergence"
    else:
        row.update(p.result.row())
        row["status"] = "ok"
    return row


def run_task(cfg, threads=1):
    """Evaluate every scan point; rows come back in grid order regardless of threads."""
    points = [(cfg, p) for p in _points(cfg)]
    if threads > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_point, points))
    else:
        rows = [_point(p) for p in points]
    return rows


def reference_poling_period(cfg):
    device = Device.from_spec(cfg.waveguide())
    return qpm_period(device.mode_p, device.mode_s)
