#!/usr/bin/python3

"""
Benchmark cases of the simply supported cross-ply plate: configuration,
single runs, sweeps, profile export and comparison with the reference
"""

import csv
import io
import itertools
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .collocation import PlateProblem, assemble, solve
from .exceptions import CaseException, ConfigException, LaminateCollocException
from .material import GRAPHITE_EPOXY, EngineeringConstants, Layup, homogenize
from .pagano import (
    AGREEMENT_TOLERANCE,
    BACKENDS,
    PROPAGATOR,
    ModalProblem,
    check_solution,
    compare_backends,
    reference_stress,
    solve_modal,
)
from .recovery import RECOVERED_LABELS, profile
from .util import VOIGT_LABELS, atomic_write_text, relative_max_error, round_sig

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# Voigt slots of s13, s23, s33
OUT_OF_PLANE = (4, 3, 2)

DEFAULT_STATIONS = tuple(
    (a, b) for a in (0.25, 0.5, 0.75) for b in (0.25, 0.5, 0.75)
)

RESULT_COLUMNS = (
    "label",
    "layers",
    "slenderness",
    "p",
    "q",
    "r",
    "spans",
    "thickness_spans",
    "dofs",
    "raw_s13",
    "raw_s23",
    "raw_s33",
    "rec_s13",
    "rec_s23",
    "rec_s33",
    "residual",
    "error",
)

PROFILE_COLUMNS = (
    ("x3",)
    + tuple("raw_" + c for c in VOIGT_LABELS)
    + tuple("rec_" + c for c in RECOVERED_LABELS)
    + tuple("ref_" + c for c in VOIGT_LABELS)
)

# percent errors (s13, s23, s33) at x1 = x2 = 0.25 L with 4 in-plane spans
# and one thickness span, keyed by (layers, degrees) then slenderness
GOLDEN_TABLES = {
    (11, (6, 6, 4)): {
        20: {"raw": (97.6, 56.7, 6.34), "recovered": (0.31, 2.94, 0.90)},
        30: {"raw": (98.7, 55.6, 6.36), "recovered": (0.16, 1.34, 0.47)},
        40: {"raw": (99.2, 55.3, 6.37), "recovered": (0.07, 0.78, 0.34)},
        50: {"raw": (99.4, 55.1, 6.38), "recovered": (0.03, 0.52, 0.29)},
    },
    (11, (6, 6, 6)): {
        20: {"raw": (96.6, 56.1, 6.31), "recovered": (1.97, 1.20, 0.05)},
        30: {"raw": (98.3, 55.4, 6.34), "recovered": (0.91, 0.57, 0.08)},
        40: {"raw": (98.9, 55.2, 6.36), "recovered": (0.50, 0.35, 0.12)},
        50: {"raw": (99.2, 55.1, 6.38), "recovered": (0.30, 0.25, 0.15)},
    },
    (3, (6, 6, 4)): {
        20: {"raw": (292.0, 57.2, 5.80), "recovered": (10.4, 3.16, 0.54)},
        30: {"raw": (311.0, 57.5, 5.77), "recovered": (5.05, 1.40, 0.28)},
        40: {"raw": (319.0, 57.6, 5.76), "recovered": (2.91, 0.81, 0.21)},
        50: {"raw": (323.0, 57.6, 5.76), "recovered": (1.87, 0.54, 0.20)},
    },
    (3, (6, 6, 6)): {
        20: {"raw": (291.0, 57.2, 5.79), "recovered": (11.9, 1.41, 0.33)},
        30: {"raw": (311.0, 57.5, 5.77), "recovered": (5.75, 0.63, 0.11)},
        40: {"raw": (319.0, 57.6, 5.76), "recovered": (3.32, 0.38, 0.02)},
        50: {"raw": (322.0, 57.6, 5.76), "recovered": (2.14, 0.26, 0.07)},
    },
    (33, (6, 6, 4)): {
        20: {"raw": (81.6, 69.7, 6.33), "recovered": (1.16, 2.21, 0.93)},
        30: {"raw": (81.5, 69.0, 6.34), "recovered": (0.53, 1.01, 0.48)},
        40: {"raw": (81.5, 68.7, 6.35), "recovered": (0.32, 0.59, 0.34)},
        50: {"raw": (81.6, 68.6, 6.35), "recovered": (0.23, 0.40, 0.30)},
    },
    (33, (6, 6, 6)): {
        20: {"raw": (80.7, 68.9, 6.33), "recovered": (0.54, 0.50, 0.07)},
        30: {"raw": (81.2, 68.7, 6.34), "recovered": (0.23, 0.25, 0.09)},
        40: {"raw": (81.3, 68.6, 6.34), "recovered": (0.11, 0.16, 0.12)},
        50: {"raw": (81.4, 68.5, 6.35), "recovered": (0.05, 0.13, 0.16)},
    },
}

# acceptance of a reproduced table entry, in percentage points
RECOVERED_ABS_TOLERANCE = 0.5
RAW_ABS_TOLERANCE = 10.0


@dataclass(frozen=True)
class CaseConfig:
    """
    One benchmark case

    Attributes:
        layers - number of cross-ply layers (odd)
        ply_thickness - thickness of every ply (mm)
        slenderness - S = L / t
        degrees - spline degrees (p, q, r)
        spans - in-plane knot spans per direction
        thickness_spans - knot spans through the thickness
        station - sampling station as fractions of L
        samples - number of x3 samples
        material - EngineeringConstants of the 0 degree ply
        sigma0 - load amplitude (MPa)
        backend - reference backend, "propagator" or "spline"
    """

    layers: int = 11
    ply_thickness: float = 1.0
    slenderness: float = 20.0
    degrees: tuple = (6, 6, 4)
    spans: int = 4
    thickness_spans: int = 1
    station: tuple = (0.25, 0.25)
    samples: int = 201
    material: EngineeringConstants = GRAPHITE_EPOXY
    sigma0: float = 1.0
    backend: str = PROPAGATOR

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        object.__setattr__(self, "station", tuple(float(s) for s in self.station))

    @property
    def label(self):
        return "N{}_S{:g}_p{}_k{}_t{}_x{:g}_y{:g}_n{}".format(
            self.layers,
            self.slenderness,
            "".join(str(d) for d in self.degrees),
            self.spans,
            self.thickness_spans,
            self.station[0],
            self.station[1],
            self.samples,
        )

    @property
    def thickness(self):
        return self.layers * self.ply_thickness

    @property
    def edge_length(self):
        return self.slenderness * self.thickness

    def validate(self):
        """
        ConfigException on the first invalid field
        """
        checks = (
            (self.layers >= 1 and self.layers % 2 == 1, "layers must be odd"),
            (self.ply_thickness > 0, "ply_thickness must be positive"),
            (self.slenderness > 0, "slenderness must be positive"),
            (len(self.degrees) == 3, "degrees must be three integers"),
            (
                len(self.degrees) == 3
                and min(self.degrees[:2]) >= 3
                and self.degrees[2] >= 2,
                "degrees must be >= 3 in-plane and >= 2 through the thickness",
            ),
            (self.spans >= 1, "spans must be positive"),
            (self.thickness_spans >= 1, "thickness_spans must be positive"),
            (
                len(self.station) == 2 and all(0 <= s <= 1 for s in self.station),
                "station must be two fractions of L within [0, 1]",
            ),
            (self.samples >= 2, "samples must be at least 2"),
            (self.sigma0 > 0, "sigma0 must be positive"),
            (self.backend in BACKENDS, "backend must be one of {}".format(BACKENDS)),
        )
        for ok, msg in checks:
            if not ok:
                raise ConfigException("{}: {}".format(self.label, msg))
        return self

    def to_dict(self):
        out = asdict(self)
        out["degrees"] = list(self.degrees)
        out["station"] = list(self.station)
        return out

    @classmethod
    def from_dict(cls, data):
        """
        Build a config from plain data, unknown keys are rejected
        """
        if not isinstance(data, dict):
            raise ConfigException("case configuration must be an object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigException("unknown configuration keys {}".format(unknown))
        data = dict(data)
        if "material" in data and isinstance(data["material"], dict):
            try:
                data["material"] = EngineeringConstants(**data["material"])
            except (TypeError, AssertionError) as e:
                raise ConfigException("invalid material: {}".format(e))
        try:
            return cls(**data).validate()
        except (TypeError, ValueError) as e:
            raise ConfigException("invalid case configuration: {}".format(e))


@dataclass
class ResultRecord:
    """
    Errors and statistics of one case, errors in percent

    Attributes:
        raw - e(s13), e(s23), e(s33) of the collocation stresses
        recovered - same for the recovered stresses
        timings - seconds spent per stage
        error - failure message when the case did not complete
    """

    config: CaseConfig
    raw: tuple = None
    recovered: tuple = None
    dofs: int = 0
    residual: float = float("nan")
    timings: dict = field(default_factory=dict)
    error: str = None

    @property
    def ok(self):
        return self.error is None

    def row(self):
        cfg = self.config
        raw = self.raw or (None,) * 3
        rec = self.recovered or (None,) * 3
        return (
            (cfg.label, cfg.layers, cfg.slenderness)
            + cfg.degrees
            + (cfg.spans, cfg.thickness_spans, self.dofs)
            + tuple(raw)
            + tuple(rec)
            + (self.residual, self.error or "")
        )

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "label": self.config.label,
            "raw": None if self.raw is None else list(self.raw),
            "recovered": None if self.recovered is None else list(self.recovered),
            "dofs": self.dofs,
            "residual": self.residual,
            "timings": dict(self.timings),
            "error": self.error,
        }


def percent_error(reference, approx):
    """
    max|reference - approx| / max|reference| in percent, 3 significant figures
    """
    return round_sig(100.0 * relative_max_error(reference, approx), 3)


@dataclass
class CaseSolution:
    """
    Everything a solved case keeps for post-processing
    """

    config: CaseConfig
    layup: Layup
    problem: PlateProblem
    field: object
    reference: object
    timings: dict


def solve_case(cfg, executor=None):
    """
    Homogenize, assemble and solve a case, and solve its reference

    Arguments:
        cfg - validated CaseConfig
        executor - optional thread pool for the assembly
    """
    timings = {}
    start = time.perf_counter()
    layup = Layup.cross_ply(cfg.layers, cfg.ply_thickness, cfg.material)
    Cbar = homogenize(layup)
    problem = PlateProblem.benchmark(
        Cbar,
        layup.total_thickness,
        cfg.slenderness,
        cfg.degrees,
        cfg.spans,
        cfg.thickness_spans,
        cfg.sigma0,
        layers=layup.layer_stiffness(),
    )
    system = assemble(problem, executor=executor)
    timings["assembly"] = time.perf_counter() - start

    start = time.perf_counter()
    displacement = solve(system)
    timings["solve"] = time.perf_counter() - start

    start = time.perf_counter()
    modal = ModalProblem.from_layup(layup, cfg.slenderness, cfg.sigma0)
    reference = solve_modal(modal, cfg.backend)
    timings["oracle"] = time.perf_counter() - start
    logger.debug(
        "%s: %d dofs, residual %.3e", cfg.label, problem.dofs, displacement.residual
    )
    return CaseSolution(cfg, layup, problem, displacement, reference, timings)


def station_profile(solution, station):
    """
    StressProfile with the reference attached at a station given in fractions of L
    """
    L = solution.problem.edge_length
    x1, x2 = station[0] * L, station[1] * L
    prof = profile(solution.field, solution.problem, x1, x2, solution.config.samples)
    prof.reference = reference_stress(solution.reference, x1, x2, prof.x3)
    return prof


def profile_errors(prof):
    """
    (raw, recovered) percent errors of s13, s23, s33
    """
    ref = prof.reference
    raw = tuple(percent_error(ref[:, k], prof.raw[:, k]) for k in OUT_OF_PLANE)
    rec = tuple(
        percent_error(ref[:, k], prof.recovered[:, i])
        for i, k in enumerate(OUT_OF_PLANE)
    )
    return raw, rec


def run_case(cfg, executor=None):
    """
    Run one case and compare with the reference at the sampling station

    Raises:
        CaseException - any package error, labelled with the case
    """
    cfg.validate()
    try:
        solution = solve_case(cfg, executor)
        start = time.perf_counter()
        prof = station_profile(solution, cfg.station)
        raw, rec = profile_errors(prof)
        solution.timings["recovery"] = time.perf_counter() - start
    except LaminateCollocException as e:
        raise CaseException(cfg.label, e)
    logger.info("%s: raw %s, recovered %s", cfg.label, raw, rec)
    return ResultRecord(
        cfg,
        raw,
        rec,
        solution.problem.dofs,
        solution.field.residual,
        solution.timings,
    )


def _run_recorded(cfg):
    try:
        return run_case(cfg)
    except CaseException as e:
        return ResultRecord(cfg, error=e.message)


def run_sweep(configs, workers=1):
    """
    Run every case, failures are recorded and the sweep continues

    Records come back in the order of `configs`.

    Arguments:
        configs - non-empty sequence of CaseConfig
        workers - number of worker processes (1 runs in-process)
    """
    configs = list(configs)
    if not configs:
        raise ConfigException("sweep needs at least one case")
    for cfg in configs:
        cfg.validate()
    if workers <= 1:
        records = [_run_recorded(cfg) for cfg in configs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            records = list(executor.map(_run_recorded, configs))
    for rec in records:
        if not rec.ok:
            logger.warning("case failed: %s", rec.error)
    return records


def sweep_configs(base, layers=None, slenderness=None, degrees=None, spans=None):
    """
    Cartesian product of the given values over a base config

    Nesting order is layers, slenderness, degrees, spans.
    """
    grid = itertools.product(
        layers or [base.layers],
        slenderness or [base.slenderness],
        degrees or [base.degrees],
        spans or [base.spans],
    )
    return [
        replace(base, layers=n, slenderness=s, degrees=tuple(d), spans=k).validate()
        for n, s, d, k in grid
    ]


def golden_configs(base=None):
    """
    Every case of the shipped tables, in table order
    """
    base = base or CaseConfig()
    out = []
    for (layers, degrees), rows in GOLDEN_TABLES.items():
        for S in rows:
            out.append(
                replace(
                    base,
                    layers=layers,
                    degrees=degrees,
                    slenderness=float(S),
                    spans=4,
                    thickness_spans=1,
                    station=(0.25, 0.25),
                ).validate()
            )
    return out


def golden_entry(cfg):
    return GOLDEN_TABLES.get((cfg.layers, cfg.degrees), {}).get(int(cfg.slenderness))


def _within(value, expected, absolute, relative=None):
    if abs(value - expected) <= absolute:
        return True
    return relative is not None and expected / relative <= value <= expected * relative


def compare_golden(record):
    """
    List of mismatch messages of a record against the shipped tables
    """
    entry = golden_entry(record.config)
    if entry is None:
        return ["{}: no table entry".format(record.config.label)]
    if not record.ok:
        return [record.error]
    problems = []
    for name, got, want in zip(RECOVERED_LABELS, record.recovered, entry["recovered"]):
        if not _within(got, want, RECOVERED_ABS_TOLERANCE, 2.0):
            problems.append(
                "{}: recovered e({}) {} vs {}".format(record.config.label, name, got, want)
            )
    for name, got, want in zip(RECOVERED_LABELS, record.raw, entry["raw"]):
        if not _within(got, want, RAW_ABS_TOLERANCE):
            problems.append(
                "{}: raw e({}) {} vs {}".format(record.config.label, name, got, want)
            )
    return problems


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def verify(golden=False, layers=(3, 11, 33), slenderness=20.0, workers=1):
    """
    Reference self-checks, optionally followed by the table reproduction

    Returns:
        list of Check
    """
    checks = []
    for n in layers:
        modal = ModalProblem.from_layup(Layup.cross_ply(n), slenderness)
        name = "reference N={} S={:g}".format(n, slenderness)
        try:
            for backend in BACKENDS:
                check_solution(solve_modal(modal, backend))
            gap = compare_backends(modal)
        except LaminateCollocException as e:
            checks.append(Check(name, False, e.message))
            continue
        checks.append(
            Check(
                name,
                gap < AGREEMENT_TOLERANCE,
                "backend discrepancy {:.3e}".format(gap),
            )
        )

    if golden:
        for record in run_sweep(golden_configs(), workers):
            problems = compare_golden(record)
            checks.append(
                Check(
                    "table " + record.config.label,
                    not problems,
                    "; ".join(problems) or "recovered {}".format(record.recovered),
                )
            )
    for c in checks:
        logger.info("%s %s: %s", "ok  " if c.passed else "FAIL", c.name, c.detail)
    return checks


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_results_csv(records, path):
    atomic_write_text(path, _csv_text(RESULT_COLUMNS, (r.row() for r in records)))


def write_results_json(records, path):
    payload = {
        "schema_version": SCHEMA_VERSION,
        "columns": list(RESULT_COLUMNS),
        "results": [r.to_dict() for r in records],
    }
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def profile_rows(prof):
    """
    Normalized profile table, one row per x3 sample in PROFILE_COLUMNS order
    """
    ref = prof.normalized_reference()
    if ref is None:
        ref = np.full_like(prof.raw, np.nan)
    table = np.column_stack(
        [prof.x3, prof.normalized_raw(), prof.normalized_recovered(), ref]
    )
    return [[float(v) for v in row] for row in table]


def emit_profiles(cfg, out_dir, stations=DEFAULT_STATIONS, executor=None):
    """
    Solve a case once and write one profile CSV per station

    Arguments:
        cfg - CaseConfig
        out_dir - output directory (created when missing)
        stations - in-plane stations as fractions of L

    Returns:
        list of written paths
    """
    cfg.validate()
    os.makedirs(out_dir, exist_ok=True)
    try:
        solution = solve_case(cfg, executor)
        paths = []
        for station in stations:
            prof = station_profile(solution, station)
            at = replace(cfg, station=station)
            path = os.path.join(out_dir, "profile_{}.csv".format(at.label))
            atomic_write_text(path, _csv_text(PROFILE_COLUMNS, profile_rows(prof)))
            logger.info("wrote %s", path)
            paths.append(path)
    except LaminateCollocException as e:
        raise CaseException(cfg.label, e)
    return paths


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigException("cannot read {}: {}".format(path, e))
    if not isinstance(data, dict):
        raise ConfigException("{}: top level must be an object".format(path))
    version = data.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigException(
            "{}: schema_version must be {}, got {}".format(path, SCHEMA_VERSION, version)
        )
    return data


def load_case(path):
    """
    CaseConfig from a JSON file with "schema_version": 1
    """
    return CaseConfig.from_dict(_read_json(path))


def load_sweep(path):
    """
    Case list from a sweep JSON file

    Keys: "base" (case object), and lists "layers", "slenderness",
    "degrees", "spans".
    """
    data = _read_json(path)
    base = CaseConfig.from_dict(data.pop("base", {}))
    axes = {k: data.pop(k, None) for k in ("layers", "slenderness", "degrees", "spans")}
    if data:
        raise ConfigException("unknown sweep keys {}".format(sorted(data)))
    for k, v in axes.items():
        if v is not None and (not isinstance(v, list) or not v):
            raise ConfigException("sweep key {} must be a non-empty list".format(k))
    try:
        return sweep_configs(base, **axes)
    except (TypeError, ValueError) as e:
        raise ConfigException("invalid sweep: {}".format(e))
