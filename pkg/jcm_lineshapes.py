#!/usr/bin/env python3
"""
Driven JCM lineshapes - command line front end
Analytic atomic inversion and lineshapes, figure-data reproduction and
analytic-vs-oracle validation, written as CSV or JSON files.
"""
import argparse
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from rich.console import Console
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table

from utils.jcm import __version__
from utils.jcm.analytic import (
    inversion_series,
    inversion_thermal,
    inversion_undriven,
    lineshape_undriven,
    oscillation_amplitude,
    sweep_lineshape,
)
from utils.jcm.config_manager import ConfigManager
from utils.jcm.data_exporter import DataExporter, DataTable
from utils.jcm.errors import (
    ConfigurationError,
    InvalidFieldSpec,
    InvalidGrid,
    JCMError,
    ToleranceBreach,
)
from utils.jcm.helpers import debug_print, set_verbose
from utils.jcm.model import (
    FieldSpec,
    Fock,
    ModelParams,
    Thermal,
    TruncationPolicy,
    derive,
    validate_params,
)
from utils.jcm.oracle import OracleSettings, inversion_numeric, lineshape_numeric
from utils.jcm.sweep_processor import SweepProcessor


def parse_grid(text: str, name: str = "grid") -> np.ndarray:
    """
    'start:stop:count' (endpoints included) or a single number

    Raises:
        InvalidGrid: malformed, non-finite, or not strictly increasing
    """
    parts = text.split(":")
    try:
        if len(parts) == 1:
            values = np.array([float(parts[0])])
        elif len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if not (math.isfinite(start) and math.isfinite(stop)):
                raise InvalidGrid(f"{name}: grid endpoints must be finite", value=text)
            if count < 1:
                raise InvalidGrid(f"{name}: count must be >= 1, got {count}", value=text)
            if count == 1 and start != stop:
                raise InvalidGrid(f"{name}: a single-point grid needs start == stop", value=text)
            if count > 1 and not stop > start:
                raise InvalidGrid(f"{name}: grid must be strictly increasing", value=text)
            values = np.linspace(start, stop, count)
        else:
            raise InvalidGrid(f"{name}: expected start:stop:count, got {text!r}", value=text)
    except ValueError:
        raise InvalidGrid(f"{name}: cannot parse {text!r}", value=text)
    if not np.all(np.isfinite(values)):
        raise InvalidGrid(f"{name}: grid values must be finite", value=text)
    return values


def parse_fields(nbar: Optional[str], fock: Optional[str], default_nbar: float = 0.1) -> List[FieldSpec]:
    """Comma lists '0.1,4,15' for --nbar or '0,10,20' for --fock"""
    if nbar is not None and fock is not None:
        raise InvalidFieldSpec("--nbar and --fock are mutually exclusive")
    try:
        if fock is not None:
            values = [float(item) for item in fock.split(",")]
            if any(value != int(value) for value in values):
                raise InvalidFieldSpec(f"Fock photon numbers must be integers, got {fock}", value=fock)
            return [Fock(int(value)) for value in values]
        if nbar is not None:
            return [Thermal(float(item)) for item in nbar.split(",")]
    except (ValueError, OverflowError):
        raise InvalidFieldSpec(f"Cannot parse field list {nbar if fock is None else fock!r}")
    return [Thermal(default_nbar)]


@dataclass
class RunConfig:
    """Everything one CLI command needs, resolved from flags over config defaults"""
    command: str
    params: ModelParams
    fields: List[FieldSpec]
    policy: TruncationPolicy
    settings: OracleSettings
    times: Optional[np.ndarray] = None
    deltas: Optional[np.ndarray] = None
    axis_name: Optional[str] = None
    axis_values: Optional[np.ndarray] = None
    output: str = "outputs"
    output_given: bool = False
    fmt: str = "csv"
    oracle: bool = False
    tol: Optional[float] = None
    tolerances: Dict[str, float] = field(default_factory=dict)

    @property
    def alpha(self) -> float:
        return derive(self.params).alpha

    @classmethod
    def from_args(cls, args: argparse.Namespace, config: ConfigManager) -> "RunConfig":
        defaults = config.get("reference_defaults", {})

        def pick(flag: Optional[float], key: str) -> float:
            return float(defaults.get(key) if flag is None else flag)

        params = validate_params(ModelParams(
            omega_c=pick(args.omega_c, "omega_c"),
            omega_eg=pick(args.omega_eg, "omega_eg"),
            g=pick(args.g, "g"),
            zeta=pick(args.zeta, "zeta"),
            xi=pick(args.xi, "xi"),
            omega_0=args.omega_0,
        ))

        policy = config.truncation_policy()
        policy = TruncationPolicy(
            epsilon=policy.epsilon if args.epsilon is None else args.epsilon,
            max_terms=policy.max_terms if args.max_terms is None else args.max_terms,
        )

        settings = config.oracle_settings()
        overrides = {}
        if args.cutoff is not None:
            overrides["cutoff"] = args.cutoff
        if args.method is not None:
            overrides["method"] = args.method
        if args.window is not None:
            if not args.window > 0:
                raise InvalidGrid(f"--window must be > 0, got {args.window}", value=args.window)
            overrides["time_average_window_g"] = args.window
        settings = replace(settings, **overrides)

        fmt = args.format or config.get("output.format", "csv")
        default_nbar = 1.0 if args.command == "surface" else 0.1
        run = cls(
            command=args.command,
            params=params,
            fields=parse_fields(args.nbar, args.fock, default_nbar),
            policy=policy,
            settings=settings,
            output=args.output or str(Path(config.get("output.directory", "outputs")) / f"{args.command}.{fmt}"),
            output_given=args.output is not None,
            fmt=fmt,
            oracle=bool(args.oracle),
            tol=args.tol,
            tolerances={
                "inversion": float(config.get("tolerances.inversion", 1e-5)),
                "time_average": float(config.get("tolerances.time_average", 5e-3)),
                "bounds_slack": float(config.get("tolerances.bounds_slack", 1e-9)),
            },
        )

        if args.t_max is not None or args.command in ("inversion", "validate"):
            t_max = 20.0 if args.t_max is None else args.t_max
            samples = 2000 if args.samples is None else args.samples
            if samples < 1 or t_max < 0 or (samples > 1 and not t_max > 0):
                raise InvalidGrid(f"Time grid needs t_max > 0 and samples >= 1 (got {t_max}, {samples})")
            run.times = np.linspace(0.0, t_max, samples)
        if args.delta is not None:
            run.deltas = parse_grid(args.delta, "--delta")
        elif args.command in ("lineshape", "surface"):
            run.deltas = parse_grid("0:15:300", "--delta")

        if args.command == "surface":
            axes = [(name, text) for name, text in (("nbar", args.nbar_range), ("zeta", args.zeta_range))
                    if text is not None]
            if len(axes) != 1:
                raise InvalidGrid("surface needs exactly one of --nbar-range or --zeta-range")
            run.axis_name, text = axes[0]
            run.axis_values = parse_grid(text, f"--{run.axis_name}-range")
            if run.axis_name == "nbar" and args.fock is not None:
                raise InvalidFieldSpec("--nbar-range sweeps a thermal field; drop --fock")
            if len(run.fields) != 1:
                raise InvalidFieldSpec("surface takes a single field value")
        return run


class JCMCommandRunner:
    """
    Runs one CLI command: computes the data tables, writes them, reports on the console
    """

    def __init__(self, run: RunConfig, config: ConfigManager, console: Console):
        self.run = run
        self.config = config
        self.console = console
        self.exporter = DataExporter(
            fmt=run.fmt,
            float_format=config.get("output.float_format", "%.12e"),
            bounds_slack=run.tolerances.get("bounds_slack", 1e-9),
        )
        self.sweeper = SweepProcessor.from_config(config)

    # ---- metadata ----

    def _base_meta(self) -> dict:
        params = self.run.params
        derived = derive(params)
        return {
            "command": self.run.command,
            "version": __version__,
            "omega_c": params.omega_c,
            "omega_eg": params.omega_eg,
            "g": params.g,
            "zeta": params.zeta,
            "xi": params.xi,
            "omega_0": params.omega_0,
            "alpha": derived.alpha,
            "delta": derived.delta,
            "delta_c": derived.delta_c,
            "epsilon": self.run.policy.epsilon,
            "max_terms": self.run.policy.max_terms,
        }

    def _oracle_meta(self, meta: dict, diagnostics: dict) -> None:
        meta["oracle_method"] = diagnostics.get("method")
        meta["oracle_cutoff"] = diagnostics.get("cutoff")
        if "window" in diagnostics:
            meta["time_average_window"] = diagnostics["window"]

    def _progress(self) -> Progress:
        return Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            TimeElapsedColumn(),
            console=self.console,
            transient=True,
        )

    def _write(self, tables: Dict[str, DataTable]) -> List[str]:
        paths = self.exporter.write_many(tables, self.run.output)
        if self.run.output != "-":
            for path in paths:
                self.console.print(f"[green]💾 Saved: {path}[/green]")
        return paths

    def _tolerance(self, kind: str) -> float:
        return self.run.tol if self.run.tol is not None else self.run.tolerances[kind]

    # ---- inversion ----

    def _inversion_table(self, field_spec: FieldSpec) -> DataTable:
        run = self.run
        series = inversion_series(run.params, field_spec, run.times, run.policy)
        meta = self._base_meta()
        meta.update(field=field_spec.label, model="driven" if run.params.is_driven else "undriven",
                    truncation_terms=series.truncation_report.terms,
                    truncation_tail=series.truncation_report.tail_bound)
        columns = ["t", "g_t", "sigma_z_analytic"]
        data = [series.times, run.params.g * series.times, series.values]

        if run.oracle:
            with self._progress() as progress:
                progress.add_task(f"🔬 Oracle trace for {field_spec.label}...", total=None)
                numeric = inversion_numeric(run.params, field_spec, run.times, settings=run.settings,
                                            policy=run.policy)
            self._oracle_meta(meta, numeric.diagnostics)
            columns.append("sigma_z_numeric")
            data.append(numeric.values)
            meta["max_deviation"] = float(np.max(np.abs(numeric.values - series.values)))

        return DataTable(columns=columns, rows=np.column_stack(data), meta=meta)

    def _raise_breaches(self, tables: Dict[str, DataTable], kind: str) -> None:
        """Files are already written; fail on the worst analytic vs oracle deviation"""
        tol = self._tolerance(kind)
        deviations = {label: table.meta["max_deviation"] for label, table in tables.items()
                      if "max_deviation" in table.meta}
        if not deviations:
            return
        label = max(deviations, key=deviations.get)
        if not deviations[label] < tol:
            raise ToleranceBreach(
                f"Analytic and oracle disagree by {deviations[label]:.3e} (tol {tol:g})",
                value=deviations[label], limit=tol, context={"field": label},
            )

    def cmd_inversion(self) -> int:
        tables = {field_spec.label: self._inversion_table(field_spec) for field_spec in self.run.fields}
        self._write(tables)
        self._raise_breaches(tables, "inversion")
        return 0

    # ---- lineshape ----

    def _numeric_lineshape(self, field_spec: FieldSpec) -> tuple:
        run = self.run
        diagnostics = {}

        def evaluate(delta: float) -> float:
            value, series = lineshape_numeric(field_spec, run.params.g, run.alpha, delta,
                                              settings=run.settings, policy=run.policy,
                                              omega_c=run.params.omega_c, xi=run.params.xi,
                                              cutoff=run.settings.cutoff)
            diagnostics.update(series.diagnostics)
            return value

        sweeper = SweepProcessor(max_workers=self.sweeper.max_workers, parallel=self.sweeper.parallel,
                                 axis_name="delta")
        with self._progress() as progress:
            progress.add_task(f"🔬 Oracle time averages for {field_spec.label} "
                              f"({len(run.deltas)} detunings)...", total=None)
            values = np.array(sweeper.map_grid(evaluate, run.deltas))
        return values, diagnostics

    def _lineshape_table(self, field_spec: FieldSpec) -> DataTable:
        run = self.run
        curve = sweep_lineshape(field_spec, run.params.g, run.alpha, run.deltas, run.policy)
        meta = self._base_meta()
        meta.pop("delta")
        meta.update(field=field_spec.label, truncation_terms=curve.truncation_report.terms,
                    truncation_tail=curve.truncation_report.tail_bound)
        columns = ["delta", "W_analytic"]
        data = [curve.deltas, curve.values]

        if run.oracle:
            numeric, diagnostics = self._numeric_lineshape(field_spec)
            self._oracle_meta(meta, diagnostics)
            columns.append("W_numeric")
            data.append(numeric)
            meta["max_deviation"] = float(np.max(np.abs(numeric - curve.values)))

        return DataTable(columns=columns, rows=np.column_stack(data), meta=meta)

    def cmd_lineshape(self) -> int:
        tables = {field_spec.label: self._lineshape_table(field_spec) for field_spec in self.run.fields}
        self._write(tables)
        self._raise_breaches(tables, "time_average")
        return 0

    # ---- surface ----

    def _surface_row(self, axis_value: float) -> np.ndarray:
        run = self.run
        g = run.params.g
        if run.axis_name == "nbar":
            return sweep_lineshape(Thermal(axis_value), g, run.alpha, run.deltas, run.policy).values
        field_spec = run.fields[0]
        if axis_value == 0 and isinstance(field_spec, Thermal):
            return np.atleast_1d(lineshape_undriven(g, field_spec.n_bar, run.deltas, run.policy))
        # same validation as a full parameter set with this zeta
        alpha = derive(validate_params(replace(run.params, zeta=axis_value, omega_0=None))).alpha
        return sweep_lineshape(field_spec, g, alpha, run.deltas, run.policy).values

    def surface_table(self) -> DataTable:
        run = self.run
        self.sweeper.axis_name = run.axis_name
        rows = self.sweeper.map_grid(self._surface_row, run.axis_values)
        deltas = np.tile(run.deltas, len(run.axis_values))
        axis = np.repeat(run.axis_values, len(run.deltas))
        meta = self._base_meta()
        meta.pop("delta")
        meta["axis"] = run.axis_name
        if run.axis_name == "zeta":
            meta["field"] = run.fields[0].label
            for key in ("zeta", "alpha", "omega_0", "delta_c"):
                meta.pop(key)
        else:
            meta.pop("delta_c")
        return DataTable(columns=["delta", run.axis_name, "W"],
                         rows=np.column_stack([deltas, axis, np.concatenate(rows)]), meta=meta)

    def cmd_surface(self) -> int:
        if self.run.oracle:
            self.console.print("[yellow]⚠️ --oracle is ignored by surface[/yellow]")
        self._write({"surface": self.surface_table()})
        return 0

    # ---- validate ----

    def cmd_validate(self) -> int:
        run = self.run
        lineshape_mode = run.deltas is not None
        tol = self._tolerance("time_average" if lineshape_mode else "inversion")
        report = Table(title="🧪 Analytic vs Oracle", show_header=True, header_style="bold magenta")
        for column in ("Field", "Max |dev|", "Tol", "Terms", "Tail", "Cutoff", "Leakage", "Drift", "Status"):
            report.add_column(column, justify="right" if column not in ("Field", "Status") else "left")

        tables = {}
        worst = (0.0, None)
        agreement = []
        for field_spec in run.fields:
            if lineshape_mode:
                curve = sweep_lineshape(field_spec, run.params.g, run.alpha, run.deltas, run.policy)
                numeric, diagnostics = self._numeric_lineshape(field_spec)
                analytic, terms, tail = curve.values, curve.truncation_report.terms, curve.truncation_report.tail_bound
                axis, columns = run.deltas, ["delta", "W_analytic", "W_numeric"]
                diagnostics.setdefault("max_norm_drift", 0.0)
            else:
                series = inversion_series(run.params, field_spec, run.times, run.policy)
                with self._progress() as progress:
                    progress.add_task(f"🔬 Oracle trace for {field_spec.label}...", total=None)
                    oracle_series = inversion_numeric(run.params, field_spec, run.times,
                                                      settings=run.settings, policy=run.policy)
                numeric, diagnostics = oracle_series.values, oracle_series.diagnostics
                analytic, terms, tail = series.values, series.truncation_report.terms, series.truncation_report.tail_bound
                axis, columns = run.times, ["t", "sigma_z_analytic", "sigma_z_numeric"]
                if not run.params.is_driven and isinstance(field_spec, Thermal) and run.params.g > 0:
                    driven = inversion_thermal(run.params, field_spec.n_bar, run.times, run.policy)
                    undriven = inversion_undriven(run.params, field_spec.n_bar, run.times, run.policy)
                    agreement.append((field_spec.label, float(np.max(np.abs(driven - undriven)))))

            deviation = float(np.max(np.abs(numeric - analytic)))
            if deviation >= worst[0] or worst[1] is None:
                worst = (deviation, field_spec.label)
            passed = deviation < tol
            report.add_row(
                field_spec.label, f"{deviation:.3e}", f"{tol:g}", str(terms), f"{tail:.1e}",
                str(diagnostics.get("cutoff")), f"{diagnostics.get('max_leakage', 0.0):.1e}",
                f"{diagnostics.get('max_norm_drift', 0.0):.1e}",
                "[green]✅ PASS[/green]" if passed else "[red]❌ FAIL[/red]",
            )
            meta = self._base_meta()
            meta.update(field=field_spec.label, max_deviation=deviation, tolerance=tol)
            self._oracle_meta(meta, diagnostics)
            tables[field_spec.label] = DataTable(columns=columns,
                                                 rows=np.column_stack([axis, analytic, numeric]), meta=meta)

        self.console.print(report)
        for label, difference in agreement:
            self.console.print(f"[cyan]🔁 Driven vs undriven analytic ({label}): max |diff| = {difference:.3e}[/cyan]")
        if run.output_given:
            self._write(tables)

        deviation, label = worst
        if not deviation < tol:
            raise ToleranceBreach(f"Max deviation {deviation:.3e} exceeds tolerance {tol:g}",
                                  value=deviation, limit=tol, context={"field": label})
        self.console.print(f"[bold green]✅ Validation passed: max deviation {deviation:.3e} < {tol:g}[/bold green]")
        return 0

    # ---- figures ----

    def cmd_figures(self) -> int:
        """All figure panels in one run, written under the output directory"""
        run = self.run
        if run.output == "-":
            raise ConfigurationError("figures writes several files; give a directory with --output")
        directory = Path(run.output).with_suffix("") if run.output.endswith((".csv", ".json")) else Path(run.output)
        defaults = self.config.get("reference_defaults", {})
        driven = validate_params(ModelParams(**{key: float(defaults[key]) for key in
                                                ("omega_c", "omega_eg", "g", "zeta", "xi")}))
        undriven = validate_params(replace(driven, zeta=0.0, xi=0.0, omega_0=None))
        g, alpha = driven.g, derive(driven).alpha
        times = np.linspace(0.0, 20.0, 2000)
        deltas = parse_grid("0:15:300")
        written = []

        def emit(name: str, tables: Dict[str, DataTable]) -> None:
            written.extend(self.exporter.write_many(tables, str(directory / f"{name}.{run.fmt}")))

        def base(**extra) -> dict:
            meta = {"version": __version__, "epsilon": run.policy.epsilon, "max_terms": run.policy.max_terms}
            meta.update(extra)
            return meta

        # inversion traces, driven and undriven
        tables = {}
        for n_bar in (0.1, 4.0):
            trace = inversion_series(driven, Thermal(n_bar), times, run.policy)
            plain = inversion_series(undriven, Thermal(n_bar), times, run.policy)
            meta = base(figure="inversion", field=Thermal(n_bar).label, omega_c=driven.omega_c,
                        omega_eg=driven.omega_eg, g=g, zeta=driven.zeta, xi=driven.xi,
                        amplitude_driven=oscillation_amplitude(trace),
                        amplitude_undriven=oscillation_amplitude(plain))
            tables[Thermal(n_bar).label] = DataTable(
                columns=["t", "g_t", "sigma_z_driven", "sigma_z_undriven"],
                rows=np.column_stack([times, g * times, trace.values, plain.values]), meta=meta)
        emit("fig_inversion", tables)

        # thermal lineshapes, driven and undriven
        tables = {}
        for n_bar in (0.1, 4.0, 15.0):
            field_spec = Thermal(n_bar)
            tables[field_spec.label] = DataTable(
                columns=["delta", "W_driven", "W_undriven"],
                rows=np.column_stack([deltas,
                                      sweep_lineshape(field_spec, g, alpha, deltas, run.policy).values,
                                      sweep_lineshape(field_spec, g, 0.0, deltas, run.policy).values]),
                meta=base(figure="lineshape", field=field_spec.label, g=g, alpha=alpha))
        emit("fig_lineshape", tables)

        # photon-number and drive-strength surfaces
        surface_deltas = parse_grid("0:15:150")
        for axis_name, axis_grid, field_spec in (("nbar", "0:20:100", Thermal(0.1)),
                                                 ("zeta", "0:6:120", Thermal(1.0))):
            surface_run = replace(run, params=driven, fields=[field_spec],
                                  deltas=surface_deltas, axis_name=axis_name,
                                  axis_values=parse_grid(axis_grid), command="surface")
            surface = JCMCommandRunner(surface_run, self.config, self.console).surface_table()
            surface.meta["figure"] = f"surface_{axis_name}"
            emit(f"fig_surface_{axis_name}", {"surface": surface})

        # Fock lineshapes
        tables = {}
        for k in (0, 10, 20):
            field_spec = Fock(k)
            curve = sweep_lineshape(field_spec, g, alpha, deltas, run.policy)
            tables[field_spec.label] = DataTable(
                columns=["delta", "W"], rows=np.column_stack([deltas, curve.values]),
                meta=base(figure="fock_lineshape", field=field_spec.label, g=g, alpha=alpha))
        emit("fig_fock_lineshape", tables)

        for path in written:
            self.console.print(f"[green]💾 Saved: {path}[/green]")
        self.console.print(f"[bold green]✅ Wrote {len(written)} figure data files to {directory}[/bold green]")
        return 0

    def execute(self) -> int:
        handler = getattr(self, f"cmd_{self.run.command}")
        debug_print(f"▶️ Running {self.run.command} with {self.run.params}")
        return handler()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jcm_lineshapes",
        description="Driven Jaynes-Cummings model: analytic inversion, lineshapes and numerical validation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    model = common.add_argument_group("model parameters (defaults from config reference_defaults)")
    model.add_argument("--omega-c", type=float, help="Cavity frequency")
    model.add_argument("--omega-eg", type=float, help="Atomic transition frequency")
    model.add_argument("--omega-0", type=float, help="Drive frequency; only checked against omega_c - g*xi/zeta")
    model.add_argument("--g", type=float, help="Atom-cavity coupling")
    model.add_argument("--zeta", type=float, help="Drive-atom coupling")
    model.add_argument("--xi", type=float, help="Drive-cavity coupling")

    state = common.add_argument_group("initial field")
    state.add_argument("--nbar", help="Thermal mean photon number(s), comma separated")
    state.add_argument("--fock", help="Fock photon number(s), comma separated")

    grids = common.add_argument_group("grids")
    grids.add_argument("--delta", help="Detuning grid start:stop:count")
    grids.add_argument("--t-max", type=float, help="Final time of the inversion trace (default: 20)")
    grids.add_argument("--samples", type=int, help="Samples of the inversion trace (default: 2000)")
    grids.add_argument("--nbar-range", help="Photon-number axis of a surface, start:stop:count")
    grids.add_argument("--zeta-range", help="Drive-strength axis of a surface, start:stop:count")

    numerics = common.add_argument_group("numerics")
    numerics.add_argument("--epsilon", type=float, help="Series truncation tolerance (default: 1e-12)")
    numerics.add_argument("--max-terms", type=int, help="Series term cap (default: 4096)")
    numerics.add_argument("--cutoff", type=int, help="Oracle Fock cutoff N (default: auto)")
    numerics.add_argument("--oracle", action="store_true", help="Add the numerical oracle columns")
    numerics.add_argument("--method", choices=("transformed", "lab"), help="Oracle propagation path")
    numerics.add_argument("--window", type=float, help="Time-average window in units of 1/g (default: 2000)")
    numerics.add_argument("--tol", type=float, help="Oracle tolerance (default: 1e-5 traces, 5e-3 averages)")

    output = common.add_argument_group("output")
    output.add_argument("--output", help="Output file ('-' for stdout) or directory for figures")
    output.add_argument("--format", choices=("csv", "json"), help="Output format (default: csv)")
    output.add_argument("--config", help="Configuration file (default: $JCM_CONFIG or packaged defaults)")
    output.add_argument("--verbose", action="store_true", help="Debug output on stderr")

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("inversion", parents=[common], help="Atomic inversion trace")
    commands.add_parser("lineshape", parents=[common], help="Time-averaged inversion over a detuning grid")
    commands.add_parser("surface", parents=[common], help="Lineshape over detuning x (nbar or zeta)")
    commands.add_parser("validate", parents=[common], help="Analytic vs numerical oracle report")
    commands.add_parser("figures", parents=[common], help="Data of every figure panel")
    config_parser = commands.add_parser("config", help="Show or check the configuration")
    config_parser.add_argument("--test", action="store_true", help="Validate the configuration values")
    config_parser.add_argument("--config", help="Configuration file")
    config_parser.add_argument("--verbose", action="store_true", help="Debug output on stderr")
    return parser


def cmd_config(args: argparse.Namespace, config: ConfigManager, console: Console) -> int:
    if args.test:
        return 0 if config.test_config() else 2
    console.print_json(data=config.config)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    args = build_parser().parse_args(argv)
    console = Console(stderr=getattr(args, "output", None) == "-")

    try:
        config = ConfigManager(args.config)
    except (FileNotFoundError, ValueError) as e:
        console.print(Panel(f"[red]{e}[/red]", title="❌ Configuration", border_style="red"))
        return 2
    set_verbose(args.verbose or config.is_debug_mode())

    if args.command == "config":
        return cmd_config(args, config, console)

    try:
        run = RunConfig.from_args(args, config)
        return JCMCommandRunner(run, config, console).execute()
    except JCMError as e:
        console.print(Panel(
            f"[red]{e}[/red]",
            title=f"❌ {type(e).__name__} (exit {e.exit_code})",
            border_style="red",
        ))
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
