"""
Experiment configuration, time series and parameter sweeps of the Rényi
discord of the dimer pair, CSV output and freezing-plateau detection.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import csv
import io
import json
import os

import numpy as np

from .discord import OptimizerSettings, renyi_discord
from .dynamics import BathParams, DimerParams, evolve_series
from .entropy import NumericalFailure, check_order
from .states import StateConstraintError, XStateParams, sci_state, x_state

SWEEP_AXES = ("q", "T", "alpha")
TIMESERIES_COLUMNS = ("t", "D_alpha", "theta_opt", "phi_opt", "converged")
SWEEP_COLUMNS = ("sweep_value", "t", "D_alpha")


def _order(value):
    # 1 selects the von Neumann limit, otherwise the discord domain applies
    value = float(value)
    return 1.0 if value == 1.0 else check_order(value, discord=True)


class ConfigError(ValueError):
    """The experiment configuration is malformed or physically invalid."""


class StageError(RuntimeError):
    """A numerical stage failed at a given time point."""

    def __init__(self, t, stage, cause):
        super().__init__(f"t = {t!r}, stage '{stage}': {cause}")
        self.t = t
        self.stage = stage
        self.cause = cause

    def __reduce__(self):
        return type(self), (self.t, self.stage, self.cause)


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_points: int

    def times(self):
        return np.linspace(self.t_start, self.t_end, self.n_points)


@dataclass(frozen=True)
class Sweep:
    axis: str
    values: tuple


@dataclass(frozen=True)
class PlateauSettings:
    abs_tol: float = 1e-3
    min_points: int = 10


@dataclass(frozen=True)
class ExperimentConfig:
    dimer: DimerParams
    bath: BathParams
    initial_state: dict
    renyi_alpha: float
    time_grid: TimeGrid
    sweep: Sweep = None
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    plateau: PlateauSettings = field(default_factory=PlateauSettings)

    def initial_rho(self):
        return build_initial_state(self.initial_state)


@dataclass(frozen=True)
class PlateauReport:
    intervals: list
    series_max: float


def _complex(value, name):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"{name}: complex values are written as [re, im]")
        return complex(float(value[0]), float(value[1]))
    return complex(float(value))


def build_initial_state(spec):
    """Density matrix for an ``initial_state`` config entry."""
    kind = spec.get("kind")
    try:
        if kind == "x_state":
            p = XStateParams(
                a=float(spec["a"]),
                b=float(spec["b"]),
                c=float(spec["c"]),
                d=float(spec["d"]),
                delta=_complex(spec.get("delta", 0.0), "delta"),
                beta_off=_complex(spec.get("beta_off", 0.0), "beta_off"),
            )
            return x_state(p)
        if kind == "sci_state":
            return sci_state(float(spec["C33"]), float(spec["C01"]), float(spec["C11"]))
    except KeyError as exc:
        raise ConfigError(f"initial_state ({kind}) is missing {exc}") from exc
    except StateConstraintError as exc:
        raise ConfigError(f"initial_state: {exc}") from exc
    raise ConfigError(f"initial_state.kind must be x_state or sci_state, got {kind!r}")


def _section(doc, key, required=True):
    value = doc.get(key)
    if value is None:
        if required:
            raise ConfigError(f"missing section '{key}'")
        return None
    if not isinstance(value, dict):
        raise ConfigError(f"section '{key}' must be an object")
    return value


def parse_config(doc):
    """Build and validate an ``ExperimentConfig`` from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    try:
        dimer = DimerParams(**_section(doc, "dimer"))
        bath = BathParams(**_section(doc, "bath"))
        grid = TimeGrid(**_section(doc, "time_grid"))
        opt = OptimizerSettings(**(_section(doc, "optimizer", False) or {}))
        plateau = PlateauSettings(**(_section(doc, "plateau", False) or {}))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if int(grid.n_points) != grid.n_points or grid.n_points < 2:
        raise ConfigError("time_grid.n_points must be an integer >= 2")
    if grid.t_start < 0 or grid.t_end < grid.t_start:
        raise ConfigError("time_grid needs 0 <= t_start <= t_end")
    if plateau.abs_tol <= 0 or plateau.min_points < 1:
        raise ConfigError("plateau needs abs_tol > 0 and min_points >= 1")

    try:
        alpha = _order(doc.get("renyi_alpha"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"renyi_alpha: {exc}") from exc

    sweep = None
    raw = _section(doc, "sweep", False)
    if raw is not None:
        axis = raw.get("axis")
        values = raw.get("values") or []
        if axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis must be one of {SWEEP_AXES}, got {axis!r}")
        if not values:
            raise ConfigError("sweep.values must be non-empty")
        sweep = Sweep(axis, tuple(float(v) for v in values))

    initial = _section(doc, "initial_state")
    cfg = ExperimentConfig(
        dimer=dimer,
        bath=bath,
        initial_state=dict(initial),
        renyi_alpha=alpha,
        time_grid=TimeGrid(float(grid.t_start), float(grid.t_end), int(grid.n_points)),
        sweep=sweep,
        optimizer=opt,
        plateau=plateau,
    )
    cfg.initial_rho()
    if sweep is not None:
        for v in sweep.values:
            _swept(cfg, v)
    return cfg


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return parse_config(doc)


def _swept(cfg, value):
    # config with the sweep axis set to value; validates the swept parameter
    axis = cfg.sweep.axis
    try:
        if axis == "q":
            return replace(cfg, bath=replace(cfg.bath, q=value))
        if axis == "T":
            return replace(cfg, bath=replace(cfg.bath, T=value))
        return replace(cfg, renyi_alpha=_order(value))
    except ValueError as exc:
        raise ConfigError(f"sweep value {value}: {exc}") from exc


def _discord_point(args):
    t, rho, alpha, opt = args
    try:
        res = renyi_discord(rho, alpha, opt)
    except NumericalFailure as exc:
        raise StageError(t, f"renyi_discord/{exc.stage}", exc) from exc
    return res


def _map(fn, items, threads):
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


def _series(cfg, threads):
    times = cfg.time_grid.times()
    try:
        states = evolve_series(cfg.initial_rho(), cfg.dimer, cfg.bath, times)
    except (ValueError, ArithmeticError) as exc:
        raise StageError(float(times[0]), "evolve", exc) from exc
    jobs = [(float(t), rho, cfg.renyi_alpha, cfg.optimizer) for t, rho in zip(times, states)]
    return times, _map(_discord_point, jobs, threads)


def run_timeseries(cfg, threads=None):
    """
    Rényi discord along the time grid.

    Returns rows ``(t, D_alpha, theta_opt, phi_opt, converged)`` ordered by t.
    """
    times, results = _series(cfg, threads)
    return [
        (float(t), r.value, r.argmin.theta, r.argmin.phi, r.converged)
        for t, r in zip(times, results)
    ]


def run_sweep(cfg, threads=None):
    """One time series per sweep value, rows ``(sweep_value, t, D_alpha)``."""
    if cfg.sweep is None:
        raise ConfigError("config has no sweep section")
    rows = []
    for value in cfg.sweep.values:
        for t, d, *_ in run_timeseries(_swept(cfg, value), threads):
            rows.append((value, t, d))
    return rows


def detect_plateau(series, abs_tol=1e-3, min_points=10):
    """
    Find frozen stretches of a time series.

    Scans left to right, growing each run while the max-min spread of its
    values stays within ``abs_tol``; runs of at least ``min_points`` samples
    are reported as ``(t_begin, t_end, mean_value)``.
    """
    if abs_tol <= 0:
        raise ValueError("abs_tol must be positive")
    series = [(float(t), float(v)) for t, v in series]
    values = [v for _, v in series]
    series_max = max(values) if values else float("nan")
    intervals = []
    if len(series) < min_points:
        return PlateauReport(intervals, series_max)
    i, n = 0, len(series)
    while i < n:
        lo = hi = values[i]
        j = i
        while j + 1 < n:
            v = values[j + 1]
            if max(hi, v) - min(lo, v) > abs_tol:
                break
            lo, hi = min(lo, v), max(hi, v)
            j += 1
        if j - i + 1 >= min_points:
            intervals.append((series[i][0], series[j][0], float(np.mean(values[i : j + 1]))))
        i = j + 1
    return PlateauReport(intervals, series_max)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return format(float(x), ".17g")


def format_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def read_series_csv(path):
    """
    Read a timeseries or sweep CSV; returns ``{sweep_value: [(t, D), ...]}``
    with key ``None`` for a plain time series.
    """
    groups = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"t", "D_alpha"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns t and D_alpha")
        for row in reader:
            key = float(row["sweep_value"]) if "sweep_value" in row else None
            groups.setdefault(key, []).append((float(row["t"]), float(row["D_alpha"])))
    return groups
