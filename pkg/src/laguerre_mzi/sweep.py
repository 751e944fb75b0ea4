"""Parameter sweeps and figure presets.

A ScanSpec names one swept parameter, the fixed values of the others, the
scenario and the output columns. Points are independent; they may be computed
in worker processes and are always emitted in input order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .closed_form import (
    DEFAULT_DERIV_STEP,
    SchemeParams,
    hl,
    mean_total_photons,
    optimal_sensitivity_over_phi,
    parity,
    r_for_energy,
    sensitivity,
    sql,
)
from .errors import DivergentSensitivityError, LaguerreMziError, UsageError
from .qfi import QfiParams, gamma_opt, qcrb, qfi_lossy

SWEEP_VARIABLES = ("r", "phi", "T1", "T2", "eta", "n")
SCENARIOS = ("ideal", "external", "internal", "qfi")
COLUMNS = (
    "parity",
    "sensitivity",
    "qfi",
    "qcrb",
    "sql",
    "hl",
    "nbar",
    "phi_opt",
    "sensitivity_opt",
    "gamma_opt",
    "r",
)
DEFAULTS = {"n": 0, "phi": 0.0, "T1": 1.0, "T2": 1.0, "eta": 1.0}
ENV_OUTDIR = "LAGUERRE_MZI_OUTDIR"


def parse_range(text: str) -> tuple[float, ...]:
    """``lo:hi:count`` -> evenly spaced values (endpoints included)."""
    try:
        lo, hi, count = text.split(":")
        lo_f, hi_f, cnt = float(lo), float(hi), int(count)
    except ValueError as exc:
        raise UsageError(f"range must look like lo:hi:count, got {text!r}") from exc
    if cnt < 1:
        raise UsageError("range count must be >= 1")
    return tuple(float(v) for v in np.linspace(lo_f, hi_f, cnt))


def format_value(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


@dataclass(frozen=True)
class ScanSpec:
    sweep_variable: str
    values: tuple
    fixed: dict = field(default_factory=dict)
    scenario: str = "ideal"
    energy_mode: float | None = None
    outputs: tuple = ("parity", "sensitivity")
    phi_interval: tuple = (1e-4, 1.0)
    derivative_step: float = DEFAULT_DERIV_STEP

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "fixed", {k: float(v) for k, v in dict(self.fixed).items()})
        object.__setattr__(self, "phi_interval", tuple(float(v) for v in self.phi_interval))
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise UsageError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {self.sweep_variable!r}")
        if self.sweep_variable in self.fixed:
            raise UsageError(f"{self.sweep_variable!r} is swept and cannot also be fixed")
        unknown = set(self.fixed) - set(SWEEP_VARIABLES)
        if unknown:
            raise UsageError(f"unknown fixed parameters: {sorted(unknown)}")
        if not self.values or not all(math.isfinite(v) for v in self.values):
            raise UsageError("sweep values must be a nonempty list of finite numbers")
        if self.scenario not in SCENARIOS:
            raise UsageError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.energy_mode is not None:
            if self.sweep_variable == "r" or "r" in self.fixed:
                raise UsageError("energy mode derives r; do not sweep or fix r")
        elif self.sweep_variable != "r" and "r" not in self.fixed:
            raise UsageError("r must be fixed, swept, or derived via energy mode")
        bad = [c for c in self.outputs if c not in COLUMNS]
        if bad or not self.outputs:
            raise UsageError(f"unknown output columns {bad}; choose from {COLUMNS}")
        if self.sweep_variable == "n" and any(v != int(v) or v < 0 for v in self.values):
            raise UsageError("n must take non-negative integer values")

    @classmethod
    def from_range(cls, sweep_variable: str, lo: float, hi: float, count: int, **kwargs) -> "ScanSpec":
        return cls(sweep_variable, tuple(float(v) for v in np.linspace(lo, hi, count)), **kwargs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["values"] = list(self.values)
        d["outputs"] = list(self.outputs)
        d["phi_interval"] = list(self.phi_interval)
        d["fixed"] = dict(sorted(self.fixed.items()))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScanSpec":
        d = dict(d)
        if "range" in d:
            rng = d.pop("range")
            d["values"] = parse_range(rng) if isinstance(rng, str) else tuple(np.linspace(*rng[:2], int(rng[2])))
        try:
            return cls(**d)
        except TypeError as exc:
            raise UsageError(str(exc)) from exc

    @property
    def columns(self) -> tuple:
        return (self.sweep_variable, *self.outputs, "error")


def _point_params(spec: ScanSpec, value: float) -> dict:
    vals = dict(DEFAULTS)
    vals.update(spec.fixed)
    vals[spec.sweep_variable] = value
    vals["n"] = int(vals["n"])
    if spec.energy_mode is not None:
        vals["r"] = r_for_energy(spec.energy_mode, vals["n"])
    return vals


def _scheme(spec: ScanSpec, vals: dict) -> SchemeParams:
    T = {"external": vals["T1"], "internal": vals["T2"]}.get(spec.scenario, 1.0)
    scenario = spec.scenario if spec.scenario != "qfi" else "ideal"
    return SchemeParams(vals["n"], vals["r"], vals["phi"], scenario, T)


def evaluate_point(spec: ScanSpec, value: float) -> dict:
    """All requested columns at one sweep value; failures land in ``error``."""
    row: dict = {spec.sweep_variable: int(value) if spec.sweep_variable == "n" else value}
    errors: list[str] = []
    try:
        vals = _point_params(spec, value)
    except LaguerreMziError as exc:
        row.update({c: math.nan for c in spec.outputs})
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    def attempt(column: str, fn):
        try:
            row[column] = fn()
        except DivergentSensitivityError as exc:
            row[column] = math.inf
            errors.append(f"{column}: {exc}")
        except (LaguerreMziError, ValueError, ZeroDivisionError) as exc:
            row[column] = math.nan
            errors.append(f"{column}: {type(exc).__name__}: {exc}")

    optimum: dict = {}

    def optimize():
        if "res" not in optimum:
            optimum["res"] = optimal_sensitivity_over_phi(
                _scheme(spec, vals), spec.phi_interval, spec.derivative_step
            )
        return optimum["res"]

    qp = lambda: QfiParams(vals["n"], vals["r"], vals["eta"])  # noqa: E731
    nbar = lambda: mean_total_photons(vals["n"], vals["r"])  # noqa: E731
    compute = {
        "parity": lambda: parity(_scheme(spec, vals)),
        "sensitivity": lambda: sensitivity(_scheme(spec, vals), spec.derivative_step),
        "qfi": lambda: qfi_lossy(qp()),
        "qcrb": lambda: qcrb(qfi_lossy(qp())),
        "sql": lambda: sql(nbar()),
        "hl": lambda: hl(nbar()),
        "nbar": nbar,
        "phi_opt": lambda: optimize()[0],
        "sensitivity_opt": lambda: optimize()[1],
        "gamma_opt": lambda: gamma_opt(qp()),
        "r": lambda: vals["r"],
    }
    for column in spec.outputs:
        attempt(column, compute[column])
    row["error"] = "; ".join(errors)
    return row


def _evaluate_packed(args):
    spec_dict, value = args
    return evaluate_point(ScanSpec.from_dict(spec_dict), value)


@dataclass(frozen=True)
class SweepResult:
    spec: ScanSpec
    rows: tuple

    @property
    def columns(self) -> tuple:
        return self.spec.columns

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)

    def header(self) -> dict:
        return {"spec": self.spec.to_dict(), "version": __version__}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(row[c]) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        def enc(v):
            if isinstance(v, float) and not math.isfinite(v):
                return format_value(v)
            return v

        payload = dict(self.header())
        payload["columns"] = list(self.columns)
        payload["rows"] = [[enc(row[c]) for c in self.columns] for row in self.rows]
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise UsageError(f"format must be csv or json, got {fmt!r}")


def default_workers() -> int:
    return os.cpu_count() or 1


def run_sweep(spec: ScanSpec, workers: int | None = 1) -> SweepResult:
    """Evaluate every sweep point; ``workers > 1`` uses a process pool."""
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(spec.values) == 1:
        rows = [evaluate_point(spec, v) for v in spec.values]
    else:
        packed = [(spec.to_dict(), v) for v in spec.values]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate_packed, packed, chunksize=max(1, len(packed) // (4 * workers))))
    return SweepResult(spec, tuple(rows))


# --------------------------------------------------------------------------
# Figure presets
# --------------------------------------------------------------------------

R_GRID = (0.1, 2.0, 96)
R_GRID_OPT = (0.1, 2.0, 40)
PHI_GRID = (-0.3, 0.3, 121)
T_GRID = (0.7, 1.0, 31)
T_GRID_FIG7 = (0.7, 0.999, 30)
ETA_GRID = (0.1, 1.0, 91)
N_VALUES = (0, 1, 2, 3)


@dataclass(frozen=True)
class FigurePreset:
    name: str
    caption: dict
    series: tuple  # ((label, ScanSpec), ...)
    note: str = ""


def _rng(grid):
    return tuple(float(v) for v in np.linspace(grid[0], grid[1], grid[2]))


def _loss_family(scenario: str, tname: str, caption_T: Sequence[float], sweep: str, grid, fixed: dict, energy=None):
    series = []
    for T in caption_T:
        for n in N_VALUES:
            fx = dict(fixed, n=n, **{tname: T})
            label = f"{scenario}_n{n}_{tname}{T:g}"
            series.append(
                (label, ScanSpec(sweep, _rng(grid), fx, scenario, energy, ("parity", "sensitivity", "nbar")))
            )
    return tuple(series)


def _fig8(panel: str, phi: float, n: int, T: float) -> FigurePreset:
    series = []
    for scenario, tname in (("external", "T1"), ("internal", "T2")):
        fx = {"n": n, "phi": phi, tname: T}
        series.append(
            (f"{scenario}_fixed_phi", ScanSpec("r", _rng(R_GRID), fx, scenario, None, ("sensitivity", "nbar", "sql", "hl")))
        )
        series.append(
            (
                f"{scenario}_optimized_phi",
                ScanSpec("r", _rng(R_GRID_OPT), fx, scenario, None, ("phi_opt", "sensitivity_opt", "nbar", "sql", "hl")),
            )
        )
    series.append(("limits", ScanSpec("r", _rng(R_GRID), {"n": n}, "ideal", None, ("nbar", "sql", "hl"))))
    return FigurePreset(
        f"fig8{panel}",
        {"phi": phi, "n": n, "T1": T, "T2": T},
        tuple(series),
        "sensitivity at the fixed phi and minimized over phi; both series are emitted",
    )


def _qfi_family(name: str, sweep: str, grid, outputs, etas, n_values=N_VALUES, fixed=None, caption=None):
    series = []
    for eta in etas:
        for n in n_values:
            fx = dict(fixed or {}, n=n)
            if sweep != "eta":
                fx["eta"] = eta
            label = f"qfi_n{n}" + ("" if sweep == "eta" else f"_eta{eta:g}")
            series.append((label, ScanSpec(sweep, _rng(grid), fx, "qfi", None, outputs)))
    return FigurePreset(name, caption or {}, tuple(series))


def _build_presets() -> dict:
    p = {}
    p["fig3a"] = FigurePreset(
        "fig3a", {"phi": 0.001, "T1": (1.0, 0.95)}, _loss_family("external", "T1", (1.0, 0.95), "r", R_GRID, {"phi": 0.001})
    )
    p["fig4a"] = FigurePreset(
        "fig4a", {"r": 0.7, "T1": (1.0, 0.95)}, _loss_family("external", "T1", (1.0, 0.95), "phi", PHI_GRID, {"r": 0.7})
    )
    p["fig4b"] = FigurePreset(
        "fig4b", {"nbar": 8.0, "T1": (1.0, 0.95)}, _loss_family("external", "T1", (1.0, 0.95), "phi", PHI_GRID, {}, energy=8.0)
    )
    p["fig5a"] = FigurePreset(
        "fig5a", {"phi": 0.001, "T2": (1.0, 0.95)}, _loss_family("internal", "T2", (1.0, 0.95), "r", R_GRID, {"phi": 0.001})
    )
    p["fig6a"] = FigurePreset(
        "fig6a", {"r": 0.7, "T2": (1.0, 0.95)}, _loss_family("internal", "T2", (1.0, 0.95), "phi", PHI_GRID, {"r": 0.7})
    )
    p["fig6b"] = FigurePreset(
        "fig6b", {"nbar": 8.0, "T2": (1.0, 0.95)}, _loss_family("internal", "T2", (1.0, 0.95), "phi", PHI_GRID, {}, energy=8.0)
    )
    # T-sweeps: one series per n
    for name, scenario, tname in (("fig3b", "external", "T1"), ("fig5b", "internal", "T2")):
        series = tuple(
            (
                f"{scenario}_n{n}",
                ScanSpec(tname, _rng(T_GRID), {"n": n, "r": 0.7, "phi": 0.05}, scenario, None, ("parity", "sensitivity")),
            )
            for n in N_VALUES
        )
        p[name] = FigurePreset(name, {"r": 0.7, "phi": 0.05}, series)
    fig7 = []
    for scenario, tname in (("external", "T1"), ("internal", "T2")):
        for n in N_VALUES:
            fig7.append(
                (
                    f"{scenario}_n{n}",
                    ScanSpec(tname, _rng(T_GRID_FIG7), {"n": n, "r": 0.7, "phi": 0.05}, scenario, None, ("parity", "sensitivity")),
                )
            )
    p["fig7"] = FigurePreset("fig7", {"r": 0.7, "phi": 0.05}, tuple(fig7))
    for panel, phi, n, T in (("a", 0.2, 0, 0.96), ("b", 0.15, 1, 0.95), ("c", 0.12, 2, 0.95), ("d", 0.1, 3, 0.95)):
        p[f"fig8{panel}"] = _fig8(panel, phi, n, T)
    p["fig10"] = _qfi_family("fig10", "eta", ETA_GRID, ("qfi", "gamma_opt"), (None,), fixed={"r": 0.7}, caption={"r": 0.7})
    p["fig11a"] = _qfi_family("fig11a", "r", R_GRID, ("qfi", "nbar"), (1.0, 0.8), caption={"eta": (1.0, 0.8)})
    p["fig11b"] = _qfi_family("fig11b", "r", R_GRID, ("qcrb", "nbar"), (1.0, 0.8), caption={"eta": (1.0, 0.8)})
    for panel, n in zip("abcd", N_VALUES):
        fam = _qfi_family(f"fig12{panel}", "r", R_GRID, ("qcrb", "nbar", "sql", "hl"), (1.0, 0.8), n_values=(n,))
        p[f"fig12{panel}"] = FigurePreset(fam.name, {"n": n, "eta": (1.0, 0.8)}, fam.series)
    return p


PRESETS: dict = _build_presets()


def preset_names() -> list:
    return sorted(PRESETS)


def get_preset(name: str) -> FigurePreset:
    if name not in PRESETS:
        raise UsageError(f"unknown preset {name!r}; valid: {', '.join(preset_names())}")
    return PRESETS[name]


def default_output_dir() -> Path:
    return Path(os.environ.get(ENV_OUTDIR, "figures"))


def run_figure_preset(
    name: str,
    out_dir: str | os.PathLike | None = None,
    workers: int | None = 1,
    fmt: str = "csv",
) -> list:
    """Write one file per series plus ``<name>_manifest.json``; returns the paths."""
    preset = get_preset(name)
    out = Path(out_dir) if out_dir is not None else default_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    written = []
    manifest_series = []
    for label, spec in preset.series:
        result = run_sweep(spec, workers)
        path = out / f"{name}__{label}.{fmt}"
        path.write_text(result.render(fmt))
        written.append(path)
        manifest_series.append({"label": label, "file": path.name, "spec": spec.to_dict()})
    manifest = {
        "preset": name,
        "caption": {k: list(v) if isinstance(v, tuple) else v for k, v in preset.caption.items()},
        "note": preset.note,
        "version": __version__,
        "tolerances": {
            "derivative_step": DEFAULT_DERIV_STEP,
            "phi_xtol": 1e-6,
            "phi_grid_points": 64,
        },
        "series": manifest_series,
    }
    mpath = out / f"{name}_manifest.json"
    mpath.write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    written.append(mpath)
    return written
