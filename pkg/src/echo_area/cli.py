"""Command-line front end: ``echo-area <subcommand> [flags]``.

Every table is written as CSV (or JSON with the same columns) and starts
with the effective configuration as ``#`` comment lines. Angles are in
units of pi and carry a ``_pi`` suffix.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
import yaml

from . import areas as ar
from .cascade import MediumConfig, cascade_solve
from .fitting import fit_gamma_tau
from .phasing import phasing_sources, pulse_label

MODES = ("areas", "cascade", "mb", "compare", "figure", "phasing", "fit")
FIGURES = {1: (0.1, 0.999), 2: (0.1, 1.001)}

EXIT_VALIDATION, EXIT_IO, EXIT_NUMERIC = 2, 3, 4


class CliError(Exception):
    def __init__(self, category: str, message: str, code: int):
        super().__init__(message)
        self.category = category
        self.code = code


@dataclass
class RunConfig:
    mode: str = "cascade"
    theta1_pi: float = 0.1
    theta2_pi: float = 0.999
    gamma_tau: float = 1.0
    alpha_z_max: float = 40.0
    dz: float = 1e-3
    max_echo_order: int = 6
    drop_threshold_rad: float = 1e-6
    output_path: str | None = None
    format: str = "csv"
    figure: int | None = None
    handoff_z1: float = 4.1
    handoff_z2: float = 16.3
    pulses: int = 2
    echo: int = 1
    mb_alpha_z_max: float = 5.0
    mb_dz: float = 0.02
    line_width: float = 400.0
    pulse_duration: float = 0.025
    steps_per_duration: int = 40
    field_map_path: str | None = None
    input_path: str | None = None
    fit_alpha_z: float | None = None

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        for name in ("theta1_pi", "theta2_pi"):
            val = getattr(self, name)
            if not 0 <= val < 2:
                raise ValueError(f"{name} must be in [0, 2), got {val}")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.max_echo_order < 1:
            raise ValueError("max_echo_order must be >= 1")
        if self.drop_threshold_rad < 0:
            raise ValueError("drop_threshold_rad must be >= 0")
        if self.figure is not None and self.figure not in FIGURES:
            raise ValueError("figure must be 1 or 2")
        self.medium()

    def medium(self) -> MediumConfig:
        return MediumConfig(alpha_z_max=self.alpha_z_max, dz=self.dz, gamma_tau=self.gamma_tau)

    @property
    def theta1(self) -> float:
        return self.theta1_pi * np.pi

    @property
    def theta2(self) -> float:
        return self.theta2_pi * np.pi

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


# ---------------------------------------------------------------- tables

@dataclass
class Table:
    columns: list
    data: dict  # column -> 1d array
    notes: list = dataclasses.field(default_factory=list)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def render(table: Table, cfg: RunConfig) -> str:
    header = [f"# {k} = {json.dumps(v)}" for k, v in cfg.to_dict().items()]
    header += [f"# {n}" for n in table.notes]
    if cfg.format == "json":
        doc = {
            "config": cfg.to_dict(),
            "notes": table.notes,
            "columns": table.columns,
            "data": {c: [_json_num(x) for x in table.data[c]] for c in table.columns},
        }
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write("\n".join(header) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    n = len(table.data[table.columns[0]])
    for i in range(n):
        w.writerow([_fmt(table.data[c][i]) for c in table.columns])
    return buf.getvalue()


def _json_num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    f = float(x)
    return f if np.isfinite(f) else None


def _emit(text: str, path: str | None) -> None:
    if path is None:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader closed early (e.g. piped into head)
            sys.stdout = None
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise CliError("io", f"cannot write {path}: {exc}", EXIT_IO) from exc


# ------------------------------------------------------------- commands

def run_areas(cfg: RunConfig) -> Table:
    z = cfg.medium().z_grid()
    th1 = ar.theta1_closed(cfg.theta1, z)
    th2 = ar.theta2_closed(cfg.theta1, cfg.theta2, z)
    data = {
        "alpha_z": z,
        "theta1_pi": th1 / np.pi,
        "theta2_pi": th2 / np.pi,
        "theta_e1_closed_pi": ar.primary_echo_closed(cfg.theta1, th2, cfg.gamma_tau, z) / np.pi,
        "echo_total_pi": ar.total_echo_area(cfg.theta1, cfg.theta2, z) / np.pi,
        "mccall_hahn_total_pi": ar.mccall_hahn_closed(cfg.theta1, cfg.theta2, z) / np.pi,
    }
    return Table(list(data), data)


def _trajectory_table(traj) -> Table:
    data = {"alpha_z": traj.z_grid}
    for lab, th in traj.theta.items():
        data[f"theta{lab}_pi" if not lab.startswith("e") else f"theta_{lab}_pi"] = th / np.pi
    data["theta_total_pi"] = traj.theta_total / np.pi
    data["mccall_hahn_total_pi"] = traj.mccall_hahn_total / np.pi
    notes = [f"omitted echoes below drop threshold: {', '.join(traj.omitted)}"] if traj.omitted else []
    return Table(list(data), data, notes)


def run_cascade(cfg: RunConfig):
    traj = cascade_solve(cfg.medium(), cfg.theta1, cfg.theta2,
                         cfg.max_echo_order, cfg.drop_threshold_rad)
    return traj, _trajectory_table(traj)


def approx_echo(traj, handoff_z: float, lead: str, follow: str, gamma_tau: float) -> np.ndarray:
    """Handoff approximation for the echo after ``follow``; NaN before handoff."""
    z = traj.z_grid
    out = np.full_like(z, np.nan)
    if lead not in traj.theta or follow not in traj.theta or handoff_z > z[-1]:
        return out
    m = z >= handoff_z
    fn = ar.reseeded_follower(traj.at(lead, handoff_z), traj.at(follow, handoff_z), handoff_z)
    out[m] = ar.secondary_echo_approx(handoff_z, traj.at(lead, handoff_z), fn, gamma_tau, z[m])
    return out


def run_figure(which: int, cfg: RunConfig) -> Table:
    traj, table = run_cascade(cfg)
    e2 = approx_echo(traj, cfg.handoff_z1, "2", "e1", cfg.gamma_tau)
    e3 = approx_echo(traj, cfg.handoff_z2, "e1", "e2", cfg.gamma_tau)
    table.data["theta_e2_approx_pi"] = e2 / np.pi
    table.data["theta_e3_approx_pi"] = e3 / np.pi
    table.columns += ["theta_e2_approx_pi", "theta_e3_approx_pi"]
    table.notes.append(f"figure {which}: handoff alpha_z1 = {cfg.handoff_z1}, alpha_z2 = {cfg.handoff_z2}")
    return table


def run_phasing(cfg: RunConfig) -> str:
    if cfg.pulses < 1:
        raise ValueError("--pulses must be >= 1")
    src = phasing_sources(cfg.echo, cfg.pulses)
    labels = ", ".join(src.labels)
    return (f"# pulses: {labels}; echo {cfg.echo} emitted at t = {src.emission_time} tau\n"
            f"# notation: sX = sin(theta_X), cX = cos(theta_X), G = exp(-gamma tau)\n"
            f"{src.to_text()}\n")


def _mb_setup(cfg: RunConfig, max_echo_order: int):
    from .mb import EnsembleGrid, OracleResolution, PulseSpec, time_span

    pulses = [PulseSpec(cfg.theta1, 0.0, cfg.pulse_duration),
              PulseSpec(cfg.theta2, 1.0, cfg.pulse_duration)]
    res = OracleResolution(alpha_z_max=cfg.mb_alpha_z_max, dz=cfg.mb_dz,
                           steps_per_duration=cfg.steps_per_duration,
                           max_echo_order=max_echo_order)
    ens = EnsembleGrid.gaussian(cfg.line_width, time_span(pulses, res))
    medium = MediumConfig(alpha_z_max=cfg.mb_alpha_z_max, dz=1e-3, gamma_tau=cfg.gamma_tau)
    return pulses, ens, medium, res


def run_mb(cfg: RunConfig) -> Table:
    from .mb import extract_window_areas, propagate

    k = min(cfg.max_echo_order, 3)
    pulses, ens, medium, res = _mb_setup(cfg, k)
    fgrid = propagate(pulses, ens, medium, res)
    slots = list(range(k + 2))
    areas, flags = extract_window_areas(fgrid, slots)
    data = {"alpha_z": fgrid.z_grid}
    for i, s in enumerate(slots):
        lab = pulse_label(s)
        data[f"theta{lab}_pi" if s < 2 else f"theta_{lab}_pi"] = areas[:, i] / np.pi
    for i, s in enumerate(slots):
        data[f"overlap_{pulse_label(s)}"] = flags[:, i]
    notes = [f"detuning classes: {ens.size}; max Bloch norm drift: {fgrid.norm_error:.3e}"]
    if cfg.field_map_path:
        _write_field_map(fgrid, cfg.field_map_path)
    return Table(list(data), data, notes)


def _write_field_map(fgrid, path: str, max_t: int = 400, max_z: int = 100) -> None:
    ti = np.unique(np.linspace(0, len(fgrid.t_grid) - 1, max_t).astype(int))
    zi = np.unique(np.linspace(0, len(fgrid.z_grid) - 1, max_z).astype(int))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha_z", "t_tau", "omega"])
    for i in zi:
        for j in ti:
            w.writerow([_fmt(fgrid.z_grid[i]), _fmt(fgrid.t_grid[j]), _fmt(fgrid.omega[i, j])])
    _emit(buf.getvalue(), path)


def run_compare(cfg: RunConfig, cascade_gamma_tau: float | None = None) -> Table:
    from .mb import compare_with_area_theorem

    k = min(cfg.max_echo_order, 3)
    pulses, ens, medium, res = _mb_setup(cfg, k)
    casc = None
    if cascade_gamma_tau is not None:
        casc = MediumConfig(alpha_z_max=cfg.mb_alpha_z_max, dz=1e-3, gamma_tau=cascade_gamma_tau)
    rep = compare_with_area_theorem(pulses, ens, medium, res, cascade_medium=casc)
    data = {"alpha_z": rep.z_grid}
    for lab in rep.oracle:
        data[f"oracle_{lab}_pi"] = rep.oracle[lab] / np.pi
        data[f"cascade_{lab}_pi"] = rep.cascade[lab] / np.pi
        data[f"deviation_{lab}_pi"] = rep.deviation[lab] / np.pi
    notes = [f"max deviation {lab}: {d / np.pi:.6f} pi" for lab, d in rep.max_deviation_by_label().items()]
    notes.append(f"max deviation: {rep.max_deviation / np.pi:.6f} pi")
    return Table(list(data), data, notes)


def read_fit_csv(path: str) -> list[tuple[float, float]]:
    """Rows of (tau_multiple, echo_area_rad); '#' comments and one header allowed."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc}", EXIT_IO) from exc
    rows, bad = [], []
    seen_header = False
    for no, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = [p.strip() for p in s.split(",")]
        try:
            if len(parts) != 2:
                raise ValueError
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            if not seen_header and not rows:
                seen_header = True
                continue
            bad.append(no)
    if bad:
        raise ValueError(f"malformed rows at line(s) {', '.join(map(str, bad))} of {path}")
    if len(rows) < 2:
        raise ValueError("fit needs at least two data rows")
    return rows


def run_fit(cfg: RunConfig) -> Table:
    if not cfg.input_path:
        raise ValueError("fit needs --input")
    rows = read_fit_csv(cfg.input_path)
    z = cfg.fit_alpha_z if cfg.fit_alpha_z is not None else cfg.alpha_z_max
    res = fit_gamma_tau(rows, cfg.theta1, cfg.theta2, z)
    m = np.array([r[0] for r in rows])
    a = np.array([r[1] for r in rows])
    data = {"tau_multiple": m, "echo_area_pi": a / np.pi, "residual_pi": res.residuals / np.pi}
    notes = [
        f"fitted gamma_tau = {res.gamma_tau!r}",
        f"fitted gamma*tau = {res.gamma!r}",
        f"beer-law gamma_tau = {res.beer_gamma_tau!r}",
        f"beer-law gamma*tau = {res.beer_gamma!r}",
    ]
    if res.degenerate:
        notes.append("warning: degenerate data (all echo areas equal)")
    return Table(list(data), data, notes)


# ---------------------------------------------------------------- parser

_FLAG_FIELDS = {
    "theta1_pi": float, "theta2_pi": float, "gamma_tau": float, "alpha_z_max": float,
    "dz": float, "max_echo_order": int, "drop_threshold_rad": float,
    "output_path": str, "format": str,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theta1-pi", type=float, dest="theta1_pi")
    p.add_argument("--theta2-pi", type=float, dest="theta2_pi")
    p.add_argument("--gamma-tau", type=float, dest="gamma_tau")
    p.add_argument("--alpha-z-max", type=float, dest="alpha_z_max")
    p.add_argument("--dz", type=float)
    p.add_argument("--max-echo-order", type=int, dest="max_echo_order")
    p.add_argument("--drop-threshold", type=float, dest="drop_threshold_rad")
    p.add_argument("--out", dest="output_path")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--config", dest="config_file", help="JSON or YAML config file")


def _add_mb(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mb-alpha-z-max", type=float, dest="mb_alpha_z_max")
    p.add_argument("--mb-dz", type=float, dest="mb_dz")
    p.add_argument("--line-width", type=float, dest="line_width",
                   help="inhomogeneous width (std dev) in 1/tau")
    p.add_argument("--pulse-duration", type=float, dest="pulse_duration", help="in units of tau")
    p.add_argument("--steps-per-duration", type=int, dest="steps_per_duration")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="echo-area", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="mode", required=True)
    for name, helptext in (
        ("areas", "closed-form input, primary-echo and total areas"),
        ("cascade", "integrate the coupled echo train"),
        ("mb", "full Maxwell-Bloch propagation, windowed areas"),
        ("compare", "Maxwell-Bloch vs area-theorem cross-validation"),
        ("figure", "figure datasets for the two reference regimes"),
        ("phasing", "print phasing sources for an echo"),
        ("fit", "fit the coherence decay from echo areas"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        if name == "figure":
            p.add_argument("figure", type=int, choices=sorted(FIGURES))
            p.add_argument("--handoff-z1", type=float, dest="handoff_z1")
            p.add_argument("--handoff-z2", type=float, dest="handoff_z2")
        if name in ("mb", "compare"):
            _add_mb(p)
        if name == "mb":
            p.add_argument("--field-map", dest="field_map_path")
        if name == "compare":
            p.add_argument("--cascade-gamma-tau", type=float, dest="cascade_gamma_tau",
                           help="override gamma_tau for the area-theorem side (must match)")
        if name == "phasing":
            p.add_argument("--pulses", type=int)
            p.add_argument("--echo", type=int)
        if name == "fit":
            p.add_argument("--input", dest="input_path")
            p.add_argument("--alpha-z", type=float, dest="fit_alpha_z")
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """defaults < figure preset < config file < command-line flags."""
    values = RunConfig().to_dict()
    values["mode"] = args.mode
    if args.mode == "figure":
        values["figure"] = args.figure
        values["theta1_pi"], values["theta2_pi"] = FIGURES[args.figure]
    if getattr(args, "config_file", None):
        try:
            loaded = yaml.safe_load(Path(args.config_file).read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise CliError("io", f"cannot read {args.config_file}: {exc}", EXIT_IO) from exc
        except yaml.YAMLError as exc:
            raise ValueError(f"cannot parse {args.config_file}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a mapping")
        loaded.pop("mode", None)
        values.update(loaded)
    names = {f.name for f in fields(RunConfig)}
    for k, v in vars(args).items():
        if k in names and k != "mode" and v is not None:
            values[k] = v
    cfg = RunConfig.from_dict(values)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if cfg.mode == "phasing":
            _emit(run_phasing(cfg), cfg.output_path)
            return 0
        if cfg.mode == "areas":
            table = run_areas(cfg)
        elif cfg.mode == "cascade":
            table = run_cascade(cfg)[1]
        elif cfg.mode == "figure":
            table = run_figure(cfg.figure, cfg)
        elif cfg.mode == "mb":
            table = run_mb(cfg)
        elif cfg.mode == "compare":
            table = run_compare(cfg, getattr(args, "cascade_gamma_tau", None))
        else:
            table = run_fit(cfg)
        _emit(render(table, cfg), cfg.output_path)
        return 0
    except CliError as exc:
        return _fail(exc.category, str(exc), exc.code)
    except FloatingPointError as exc:
        return _fail("numeric", str(exc), EXIT_NUMERIC)
    except (ValueError, KeyError, TypeError) as exc:
        return _fail("validation", str(exc), EXIT_VALIDATION)


def _fail(category: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": category, "message": message}) + "\n")
    return code


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
