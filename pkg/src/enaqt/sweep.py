"""Config-driven experiment runner: parameter sweeps to CSV/JSON/SVG.

A run is described by a JSON document with a lattice block, a rate block
(fixed values and one or two sweep axes), a solver selection and an output
block.  Each grid point is evaluated by the selected solvers; per-point
solver errors are recorded in the CSV and the run continues.  CSV bytes
are deterministic for a fixed config and seed — wall times and timestamps
go to a separate metadata file.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import oned, svg
from .gf import transport_gf
from .lattice import Boundary, Dims, HoppingModel, InvalidSpecError, LatticeSpec
from .mcwf import TrajectoryConfig, estimate_transport
from .superop import RateSet


class ConfigError(ValueError):
    """The experiment config is malformed; the message carries the key path."""


_RATE_NAMES = ("J", "mu", "gamma_s", "gamma")
_SOLVERS = ("gf", "mcwf", "bounds", "oned")

#: CSV result columns per solver, with units in the header names
_RESULT_COLUMNS = {
    "gf": ["eta_gf[-]", "tau_gf[1/J]", "lost_gf[-]"],
    "mcwf": ["eta_mcwf[-]", "eta_mcwf_stderr[-]", "tau_mcwf[1/J]"],
    "bounds": [
        "eta_abs[-]", "eta_coh[-]", "eta_incoh[-]", "eta_min[-]",
        "gamma0[J]", "tau_lower[1/J]",
    ],
    "oned": ["eta_coh_1d[-]", "eta_incoh_1d[-]", "gamma0_1d[J]"],
}


@dataclass(frozen=True)
class Axis:
    name: str  # "L" or a rate name
    values: tuple
    spacing: str  # "list", "linear" or "log"

    @property
    def is_log(self) -> bool:
        return self.spacing == "log"


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    dims: Dims
    boundary: Boundary
    hopping_model: HoppingModel
    alpha: float
    sink_index: int | None
    fixed_L: int | None  # None when L is a sweep axis
    axes: tuple  # (Axis,) or (outer Axis, inner Axis)
    fixed_rates: dict
    solvers: tuple
    n_traj: int
    seed: int
    mcwf_mode: str
    mcwf_dt: float | None
    mcwf_t_final: float | None
    formats: tuple
    directory: str | None
    compute_gamma_opt: bool
    plot_y: tuple = ()

    def spec_for(self, point: dict) -> LatticeSpec:
        return LatticeSpec(
            dims=self.dims,
            L=int(point.get("L", self.fixed_L)),
            boundary=self.boundary,
            alpha=self.alpha,
            hopping_model=self.hopping_model,
            sink_index=self.sink_index,
        )

    def rates_for(self, point: dict) -> RateSet:
        vals = dict(self.fixed_rates)
        vals.update({k: v for k, v in point.items() if k in _RATE_NAMES})
        return RateSet(**vals)

    def grid(self):
        """Grid points in row-major (outer, inner) order."""
        if len(self.axes) == 1:
            for v in self.axes[0].values:
                yield {self.axes[0].name: v}
        else:
            outer, inner = self.axes
            for vo in outer.values:
                for vi in inner.values:
                    yield {outer.name: vo, inner.name: vi}


def _parse_axis(name: str, raw) -> Axis | None:
    """An axis spec, or None when ``raw`` is a plain scalar."""
    if isinstance(raw, (int, float)):
        return None
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected number or axis object, got {raw!r}")
    if "values" in raw:
        vals = raw["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"{name}.values must be a non-empty list")
        return Axis(name=name, values=tuple(float(v) for v in vals), spacing="list")
    if "sweep" in raw:
        spacing = raw["sweep"]
        if spacing not in ("linear", "log"):
            raise ConfigError(f"{name}.sweep must be 'linear' or 'log'")
        try:
            start, stop = float(raw["start"]), float(raw["stop"])
            points = int(raw["points"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: sweep needs start, stop, points") from exc
        if points < 2:
            raise ConfigError(f"{name}.points must be >= 2")
        if spacing == "log":
            if start <= 0 or stop <= 0:
                raise ConfigError(f"{name}: log sweep requires positive bounds")
            vals = np.geomspace(start, stop, points)
        else:
            vals = np.linspace(start, stop, points)
        return Axis(name=name, values=tuple(float(v) for v in vals), spacing=spacing)
    raise ConfigError(f"{name}: axis object needs 'values' or 'sweep'")


def parse_config(doc: dict, name: str = "experiment") -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top level must be an object")
    lat = doc.get("lattice")
    if not isinstance(lat, dict):
        raise ConfigError("missing 'lattice' block")
    try:
        dims = Dims(lat.get("dims", "1d"))
        boundary = Boundary(lat.get("boundary", "open"))
        model = HoppingModel(lat.get("hopping_model", "dipolar"))
    except ValueError as exc:
        raise ConfigError(f"lattice: {exc}") from exc

    axes: list[Axis] = []
    raw_l = lat.get("L")
    if raw_l is None:
        raise ConfigError("lattice.L is required")
    l_axis = _parse_axis("L", raw_l)
    fixed_l = None
    if l_axis is None:
        fixed_l = int(raw_l)
    else:
        axes.append(Axis("L", tuple(int(v) for v in l_axis.values), l_axis.spacing))

    rates_blk = doc.get("rates")
    if not isinstance(rates_blk, dict):
        raise ConfigError("missing 'rates' block")
    unknown = set(rates_blk) - set(_RATE_NAMES)
    if unknown:
        raise ConfigError(f"rates: unknown keys {sorted(unknown)}")
    fixed_rates = {}
    for rname in _RATE_NAMES:
        if rname not in rates_blk:
            continue
        axis = _parse_axis(rname, rates_blk[rname])
        if axis is None:
            fixed_rates[rname] = float(rates_blk[rname])
        else:
            axes.append(axis)
    if not 1 <= len(axes) <= 2:
        raise ConfigError(
            f"exactly one or two sweep axes required, got {len(axes)}"
        )

    solvers = doc.get("solvers", ["gf"])
    if solvers == "all" or solvers == ["all"]:
        solvers = list(_SOLVERS)
    if not isinstance(solvers, list) or not solvers:
        raise ConfigError("'solvers' must be a non-empty list")
    bad = set(solvers) - set(_SOLVERS)
    if bad:
        raise ConfigError(f"unknown solvers {sorted(bad)}")
    if "oned" in solvers and dims is not Dims.ONE_D:
        raise ConfigError("solver 'oned' requires a 1d lattice")

    mc = doc.get("mcwf", {})
    out = doc.get("output", {})
    formats = tuple(out.get("formats", ["csv", "json", "svg"]))
    bad = set(formats) - {"csv", "json", "svg"}
    if bad:
        raise ConfigError(f"unknown output formats {sorted(bad)}")
    opts = doc.get("options", {})

    try:
        return ExperimentConfig(
            name=str(doc.get("name", name)),
            dims=dims,
            boundary=boundary,
            hopping_model=model,
            alpha=float(lat.get("alpha", 3.0)),
            sink_index=lat.get("sink_index"),
            fixed_L=fixed_l,
            axes=tuple(axes),
            fixed_rates=fixed_rates,
            solvers=tuple(solvers),
            n_traj=int(mc.get("n_traj", 1000)),
            seed=int(mc.get("seed", 0)),
            mcwf_mode=str(mc.get("mode", "waiting")),
            mcwf_dt=mc.get("dt"),
            mcwf_t_final=mc.get("t_final"),
            formats=formats,
            directory=out.get("directory"),
            compute_gamma_opt=bool(opts.get("compute_gamma_opt", False)),
            plot_y=tuple(opts.get("plot_y", ())),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    try:
        return parse_config(doc, name=path.stem)
    except ConfigError:
        raise
    except InvalidSpecError as exc:
        raise ConfigError(str(exc)) from exc


# --------------------------------------------------------------------------
# evaluation


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if np.isnan(v):
        return "nan"
    return repr(v)


def gamma_opt_numeric(
    spec: LatticeSpec,
    rates: RateSet,
    gamma_lo: float = 1e-3,
    gamma_hi: float = 1e2,
    points: int = 40,
) -> float:
    """Numeric argmax of the exact efficiency over dephasing (log grid plus
    golden-section refinement on log gamma)."""
    from scipy.optimize import minimize_scalar

    grid = np.geomspace(gamma_lo * rates.J, gamma_hi * rates.J, points)
    etas = [transport_gf(spec, rates.replace(gamma=g)).eta for g in grid]
    i = int(np.argmax(etas))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, points - 1)]
    res = minimize_scalar(
        lambda lg: -transport_gf(spec, rates.replace(gamma=np.exp(lg))).eta,
        bounds=(np.log(lo), np.log(hi)),
        method="bounded",
        options={"xatol": 1e-4},
    )
    return float(np.exp(res.x))


def _evaluate_point(config: ExperimentConfig, point: dict) -> dict:
    row: dict = {}
    errors = []
    try:
        spec = config.spec_for(point)
        rates = config.rates_for(point)
    except (InvalidSpecError, ValueError) as exc:
        row["error"] = f"config: {exc}"
        return row

    for solver in config.solvers:
        try:
            if solver == "gf":
                res = transport_gf(spec, rates)
                row["eta_gf[-]"] = res.eta
                row["tau_gf[1/J]"] = res.tau
                row["lost_gf[-]"] = res.lost_fraction
            elif solver == "mcwf":
                tc = TrajectoryConfig(
                    n_traj=config.n_traj,
                    seed=config.seed,
                    mode=config.mcwf_mode,
                    dt=config.mcwf_dt,
                    t_final=config.mcwf_t_final,
                )
                res = estimate_transport(spec, rates, tc)
                row["eta_mcwf[-]"] = res.eta
                row["eta_mcwf_stderr[-]"] = res.metadata["eta_stderr"]
                row["tau_mcwf[1/J]"] = res.tau
            elif solver == "bounds":
                rep = bounds_mod.min_estimate(spec, rates)
                row["eta_abs[-]"] = rep.eta_abs
                row["eta_coh[-]"] = rep.eta_coh
                row["eta_incoh[-]"] = rep.eta_incoh
                row["eta_min[-]"] = rep.eta_min_estimate
                row["gamma0[J]"] = rep.gamma0
                row["tau_lower[1/J]"] = rep.tau_lower
            elif solver == "oned":
                row["eta_coh_1d[-]"] = oned.eta_coh_1d(spec.L, rates)
                row["eta_incoh_1d[-]"] = oned.eta_incoh_1d(spec.L, rates)
                row["gamma0_1d[J]"] = oned.gamma0_equation(
                    spec.L, rates.mu, rates.gamma_s, J=rates.J
                )
        except Exception as exc:  # recorded per point, run continues
            errors.append(f"{solver}: {exc}")
    if config.compute_gamma_opt:
        try:
            row["gamma_opt[J]"] = gamma_opt_numeric(spec, rates)
        except Exception as exc:
            errors.append(f"gamma_opt: {exc}")
    row["error"] = "; ".join(errors)
    return row


def _columns(config: ExperimentConfig) -> list[str]:
    cols = [ax.name if ax.name == "L" else f"{ax.name}[J]" for ax in config.axes]
    param_map = {ax.name: (ax.name if ax.name == "L" else f"{ax.name}[J]")
                 for ax in config.axes}
    for solver in config.solvers:
        cols.extend(_RESULT_COLUMNS[solver])
    if config.compute_gamma_opt:
        cols.append("gamma_opt[J]")
    cols.append("error")
    return cols, param_map


def run_experiment(config: ExperimentConfig, out_dir) -> dict:
    """Evaluate the grid and write the requested artifacts.

    Returns a summary dict with file paths, row count and the number of
    per-point solver errors.
    """
    import csv

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cols, param_map = _columns(config)

    rows = []
    wall_times = []
    n_errors = 0
    started = time.time()
    for point in config.grid():
        t0 = time.time()
        row = _evaluate_point(config, point)
        wall_times.append(time.time() - t0)
        for pname, pval in point.items():
            row[param_map[pname]] = pval
        if row.get("error"):
            n_errors += 1
        rows.append(row)

    files = {}
    if "csv" in config.formats:
        csv_path = out_dir / f"{config.name}.csv"
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(cols)
            for row in rows:
                writer.writerow([_fmt_cell(row.get(c)) for c in cols])
        files["csv"] = str(csv_path)
    if "json" in config.formats:
        meta_path = out_dir / f"{config.name}_meta.json"
        meta = {
            "name": config.name,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(started)),
            "total_wall_time_s": time.time() - started,
            "wall_time_per_point_s": wall_times,
            "n_points": len(rows),
            "n_errors": n_errors,
            "seed": config.seed,
            "solvers": list(config.solvers),
            "axes": [
                {"name": ax.name, "spacing": ax.spacing, "values": list(ax.values)}
                for ax in config.axes
            ],
            "fixed_rates": config.fixed_rates,
        }
        meta_path.write_text(
            json.dumps(meta, indent=2) + "\n", encoding="utf-8"
        )
        files["json"] = str(meta_path)
    if "svg" in config.formats:
        svg_path = out_dir / f"{config.name}.svg"
        svg_path.write_text(_render_plot(config, rows), encoding="utf-8")
        files["svg"] = str(svg_path)
    return {"files": files, "n_points": len(rows), "n_errors": n_errors}


_PLOT_PRIORITY = [
    "eta_gf[-]", "eta_mcwf[-]", "eta_min[-]", "eta_coh[-]", "eta_incoh[-]",
    "eta_abs[-]", "eta_coh_1d[-]", "eta_incoh_1d[-]", "gamma_opt[J]",
    "gamma0_1d[J]", "tau_gf[1/J]",
]


def _render_plot(config: ExperimentConfig, rows: list[dict]) -> str:
    x_axis = config.axes[-1]
    x_name = x_axis.name if x_axis.name == "L" else f"{x_axis.name}[J]"
    present = {c for row in rows for c, v in row.items() if v not in (None, "")}
    if config.plot_y:
        y_cols = [c for c in config.plot_y if c in present]
    else:
        y_cols = [c for c in _PLOT_PRIORITY if c in present][:4]
    if not y_cols:
        y_cols = []

    def col(rws, name):
        return np.array(
            [np.nan if r.get(name) in (None, "") else float(r[name]) for r in rws]
        )

    series = []
    if len(config.axes) == 1:
        for yc in y_cols:
            series.append(svg.Series(label=yc, x=col(rows, x_name), y=col(rows, yc)))
    else:
        outer = config.axes[0]
        o_name = outer.name if outer.name == "L" else f"{outer.name}[J]"
        yc = y_cols[0] if y_cols else None
        for ov in outer.values:
            sub = [r for r in rows if r.get(o_name) == ov]
            if yc is not None:
                series.append(
                    svg.Series(
                        label=f"{outer.name}={ov:g}" if outer.name != "L"
                        else f"L={int(ov)}",
                        x=col(sub, x_name),
                        y=col(sub, yc),
                    )
                )
    y_label = y_cols[0] if len(y_cols) == 1 or len(config.axes) == 2 else "value"
    return svg.line_chart(
        series,
        title=config.name,
        x_label=x_name,
        y_label=y_label,
        log_x=x_axis.is_log,
    )
