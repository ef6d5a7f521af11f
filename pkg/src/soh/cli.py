"""Run configuration, scenario orchestration, and the `soh` command line.

Config files are flat `key = value` text with `#` comments.  A `[name]`
section holds overrides that apply only when that scenario is selected, so
one file can carry settings for several scenarios.  Unknown keys, type
mismatches and scenario-constraint violations are reported individually.

Exit codes: 0 success, 2 configuration error, 3 solver abort, 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from . import io as sohio
from .core import (BC_OUTFLOW, BC_PERIODIC, CONGESTION_TOL, FieldState, Grid,
                   ModelParams, make_grid, total_mass)
from .errors import (BlowupError, ConfigError, DomainError, NegativePressureError,
                     NewtonConvergenceError, SnapshotError, SohError)
from .analysis import AngleState
from .pressure import make_pressure
from .scenarios import (RIEMANN_PAD_LEFT, RIEMANN_PAD_RIGHT, RiemannSpec,
                        ShockTrack, congested_fraction, init_collision,
                        init_riemann, riemann_grid_size)
from .scheme import ap_step, explicit_step, relaxation_step
from .twofluid import init_crowd, lane_diagnostics, twofluid_step

SCENARIOS = ("riemann", "collision", "crowd", "sweep")
DEFAULT_EPSILONS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
_T_END_DEFAULTS = {"riemann": 0.14, "collision": 0.1, "crowd": 0.075, "sweep": 0.1}
_SNAPSHOT_DEFAULTS = {"riemann": 100, "collision": 100, "crowd": 50, "sweep": 200}


@dataclass
class RunConfig:
    """Validated parameters of one run."""

    scenario: str = ""
    c: float = 1.0
    lam: float = 1.0
    epsilon: float = 1e-4
    beta: float = 1e-7
    gamma: float = 2.0
    rho_star: float = 1.0
    kappa: float = 0.0
    use_background: bool = False
    dt: float = 5e-4
    dx: float = 5e-3
    dy: float = 5e-3
    t_end: float | None = None
    seed: int = 0
    nx: int | None = None
    ny: int | None = None
    # shock test geometry
    x0: float = 0.5
    rho_left: float = 0.8
    theta_left: float = 0.14
    rho_right: float = 0.9969
    theta_right: float = 1.4502
    pad_left: float = RIEMANN_PAD_LEFT
    pad_right: float = RIEMANN_PAD_RIGHT
    # sweep harness
    epsilons: tuple = DEFAULT_EPSILONS
    sweep_steps: int = 200
    # boundaries (riemann keeps its padded periodic domain)
    bc_x: str = BC_PERIODIC
    bc_y: str = BC_PERIODIC
    # output
    snapshot_every: int | None = None
    output_dir: str | None = None

    def model_params(self, epsilon: float | None = None) -> ModelParams:
        return ModelParams(
            c=self.c, lam=self.lam,
            epsilon=self.epsilon if epsilon is None else epsilon,
            beta=self.beta, gamma=self.gamma, rho_star=self.rho_star,
            kappa=self.kappa, use_background=self.use_background,
            dt=self.dt, dx=self.dx, dy=self.dy,
            t_end=self.resolved_t_end(), seed=self.seed)

    def resolved_t_end(self) -> float:
        return _T_END_DEFAULTS[self.scenario] if self.t_end is None else self.t_end

    def resolved_snapshot_every(self) -> int:
        if self.snapshot_every is not None:
            return self.snapshot_every
        return _SNAPSHOT_DEFAULTS[self.scenario]

    def steps(self) -> int:
        return int(round(self.resolved_t_end() / self.dt))

    def validate(self):
        if not self.scenario:
            raise ConfigError("missing required key 'scenario'")
        if self.scenario not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.kappa != 0.0 and not self.use_background:
            raise ConfigError("kappa > 0 requires use_background = true")
        if self.kappa < 0.0:
            raise ConfigError("kappa must be >= 0")
        for name in ("epsilon", "beta", "gamma", "rho_star", "dt", "dx", "dy", "lam"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"key '{name}' must be > 0")
        if self.scenario in ("collision", "crowd", "sweep"):
            nx = self.nx if self.nx is not None else int(round(1.0 / self.dx))
            ny = self.ny if self.ny is not None else int(round(1.0 / self.dy))
            if abs(nx * self.dx - 1.0) > 1e-9 or abs(ny * self.dy - 1.0) > 1e-9:
                raise ConfigError(
                    f"scenario '{self.scenario}' needs a grid covering the unit "
                    f"square: nx*dx={nx * self.dx}, ny*dy={ny * self.dy}")
        if self.scenario == "crowd":
            if self.c != 1.0:
                raise ConfigError("crowd scenario requires c = 1 (model constraint)")
            nx = self.nx if self.nx is not None else int(round(1.0 / self.dx))
            ny = self.ny if self.ny is not None else int(round(1.0 / self.dy))
            if nx % 5 or ny % 5:
                raise ConfigError("crowd scenario needs nx, ny divisible by 5")
        for bc in (self.bc_x, self.bc_y):
            if bc not in (BC_PERIODIC, BC_OUTFLOW):
                raise ConfigError(f"unknown boundary condition {bc!r}")
        if self.scenario == "crowd" and (self.bc_x, self.bc_y) != (BC_PERIODIC, BC_PERIODIC):
            raise ConfigError("crowd scenario supports periodic boundaries only")
        if self.scenario == "riemann":
            if not 0.0 < self.x0 < 1.0:
                raise ConfigError("x0 must lie strictly inside (0, 1)")
            if self.ny not in (None, 1):
                raise ConfigError("riemann scenario runs the 1D fast path (ny = 1)")


_BOOL_VALUES = {"true": True, "yes": True, "1": True,
                "false": False, "no": False, "0": False}


def _parse_bool(raw: str) -> bool:
    try:
        return _BOOL_VALUES[raw.strip().lower()]
    except KeyError:
        raise ConfigError(f"expected a boolean, got {raw!r}") from None


def _parse_epsilons(raw: str) -> tuple:
    try:
        values = tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"key 'epsilons': expected comma-separated floats, got {raw!r}")
    if not values or any(v <= 0 for v in values):
        raise ConfigError("key 'epsilons': need positive values")
    return values


_KEY_TABLE = {
    "scenario": ("scenario", str),
    "c": ("c", float),
    "lambda": ("lam", float),
    "epsilon": ("epsilon", float),
    "beta": ("beta", float),
    "gamma": ("gamma", float),
    "rho_star": ("rho_star", float),
    "kappa": ("kappa", float),
    "use_background": ("use_background", _parse_bool),
    "dt": ("dt", float),
    "dx": ("dx", float),
    "dy": ("dy", float),
    "t_end": ("t_end", float),
    "seed": ("seed", int),
    "nx": ("nx", int),
    "ny": ("ny", int),
    "x0": ("x0", float),
    "rho_left": ("rho_left", float),
    "theta_left": ("theta_left", float),
    "rho_right": ("rho_right", float),
    "theta_right": ("theta_right", float),
    "pad_left": ("pad_left", float),
    "pad_right": ("pad_right", float),
    "epsilons": ("epsilons", _parse_epsilons),
    "sweep_steps": ("sweep_steps", int),
    "bc_x": ("bc_x", str),
    "bc_y": ("bc_y", str),
    "snapshot_every": ("snapshot_every", int),
    "output_dir": ("output_dir", str),
}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a flat key-value config document."""
    global_pairs: list[tuple[str, str]] = []
    sections: dict[str, list[tuple[str, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in SCENARIOS:
                raise ConfigError(
                    f"line {lineno}: section [{name}] is not a scenario")
            current = sections.setdefault(name, [])
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        (global_pairs if current is None else current).append((key, value))

    cfg = RunConfig()

    def apply(pairs):
        for key, value in pairs:
            if key not in _KEY_TABLE:
                raise ConfigError(f"unknown key {key!r}")
            attr, conv = _KEY_TABLE[key]
            try:
                parsed = conv(value)
            except ConfigError:
                raise
            except (TypeError, ValueError):
                raise ConfigError(
                    f"key {key!r}: expected {conv.__name__}, got {value!r}") from None
            setattr(cfg, attr, parsed)

    apply(global_pairs)
    if cfg.scenario in sections:
        apply(sections[cfg.scenario])
    cfg.validate()
    return cfg


# -- run orchestration --------------------------------------------------------

@dataclass
class SweepRow:
    epsilon: float
    ap_stable: bool
    ap_max_rho: float
    ap_max_cfl: float
    ap_mass_drift: float
    ap_fail_reason: str | None
    explicit_blowup_step: int | None


@dataclass
class RunResult:
    scenario: str
    steps_completed: int
    final_time: float
    mass_drift_rel: float
    max_rho: float
    output_dir: Path
    sigma_fit: float | None = None
    fit_residual: float | None = None
    boundary_arrival_time: float | None = None
    congested_fraction_final: float | None = None
    species_mass_drift_rel: float | None = None
    sweep: list[SweepRow] = field(default_factory=list)

    def summary_lines(self):
        yield f"scenario            {self.scenario}"
        yield f"steps               {self.steps_completed}"
        yield f"final time          {self.final_time:.6g}"
        yield f"mass drift (rel)    {self.mass_drift_rel:.3e}"
        yield f"max density         {self.max_rho:.6f}"
        if self.sigma_fit is not None:
            yield f"shock speed fit     {self.sigma_fit:.4f}"
            yield f"fit residual        {self.fit_residual:.3e}"
            arr = (f"{self.boundary_arrival_time:.4f}"
                   if self.boundary_arrival_time is not None else "not reached")
            yield f"boundary arrival    {arr}"
        if self.congested_fraction_final is not None:
            yield f"congested fraction  {self.congested_fraction_final:.4f}"
        if self.species_mass_drift_rel is not None:
            yield f"species mass drift  {self.species_mass_drift_rel:.3e}"
        for row in self.sweep:
            exp = ("stable" if row.explicit_blowup_step is None
                   else f"blow-up at step {row.explicit_blowup_step}")
            ap = "stable" if row.ap_stable else f"UNSTABLE ({row.ap_fail_reason})"
            yield (f"eps={row.epsilon:<8g} ap={ap} max_rho={row.ap_max_rho:.6f} "
                   f"max_cfl={row.ap_max_cfl:.3f} explicit={exp}")


def _output_dir(config: RunConfig) -> Path:
    if config.output_dir:
        root = Path(config.output_dir)
    elif os.environ.get("SOH_OUTPUT_DIR"):
        root = Path(os.environ["SOH_OUTPUT_DIR"]) / config.scenario
    else:
        root = Path.cwd() / "soh_output" / config.scenario
    root.mkdir(parents=True, exist_ok=True)
    return root


_BASE_COLUMNS = ("step", "time", "mass", "max_rho", "congested_fraction",
                 "newton_iterations", "inner_linear_iterations",
                 "max_char_speed", "cfl_explicit", "checkerboard_gap")


def _snap_name(step: int) -> str:
    return f"snapshot_{step:06d}.bin"


def run(config: RunConfig, echo=lambda s: None) -> RunResult:
    """Execute the configured scenario; see RunResult for the summary."""
    config.validate()
    out = _output_dir(config)
    if config.scenario == "riemann":
        return _run_riemann(config, out, echo)
    if config.scenario == "collision":
        return _run_collision(config, out, echo)
    if config.scenario == "crowd":
        return _run_crowd(config, out, echo)
    return _run_sweep(config, out, echo)


def _run_riemann(config: RunConfig, out: Path, echo) -> RunResult:
    params = config.model_params()
    spec = RiemannSpec(
        left=AngleState(config.rho_left, config.theta_left),
        right=AngleState(config.rho_right, config.theta_right),
        jump_position=config.x0,
        pad_left=config.pad_left, pad_right=config.pad_right)
    nx = riemann_grid_size(spec, config.dx)
    grid = make_grid(nx, 1, config.dx, config.dy)
    pressure = make_pressure(params)
    state = init_riemann(spec, grid)
    track = ShockTrack(spec, grid)
    track.record(state)

    nsteps = config.steps()
    every = config.resolved_snapshot_every()
    mass0 = total_mass(state, grid)
    max_rho = float(state.rho.max())
    sohio.write_snapshot(state, out / _snap_name(0), params)
    cols = _BASE_COLUMNS + ("x_shock",)
    with sohio.DiagnosticsWriter(out / "diagnostics.tsv", cols) as diag:
        for step in range(1, nsteps + 1):
            try:
                state, rep = ap_step(state, params, pressure)
            except SohError as exc:
                raise type(exc)(f"step {step}: {exc}") from exc
            pos = track.record(state)
            max_rho = max(max_rho, float(state.rho.max()))
            diag.row({
                "step": step, "time": state.time,
                "mass": total_mass(state, grid),
                "max_rho": float(state.rho.max()),
                "congested_fraction": congested_fraction(state, params, CONGESTION_TOL),
                "newton_iterations": rep.newton_iterations,
                "inner_linear_iterations": rep.inner_linear_iterations,
                "max_char_speed": rep.max_char_speed,
                "cfl_explicit": rep.cfl_explicit,
                "checkerboard_gap": rep.checkerboard_gap,
                "x_shock": float("nan") if pos is None else pos,
            })
            if step % every == 0 or step == nsteps:
                sohio.write_snapshot(state, out / _snap_name(step), params)
    mass1 = total_mass(state, grid)
    result = RunResult(
        scenario="riemann", steps_completed=nsteps, final_time=state.time,
        mass_drift_rel=abs(mass1 - mass0) / mass0, max_rho=max_rho,
        output_dir=out, sigma_fit=track.sigma_fit,
        fit_residual=track.fit_residual,
        boundary_arrival_time=track.arrival_estimate)
    _write_summary(out, result)
    return result


def _single_fluid_loop(config, params, grid, state, out, echo, scenario):
    bc = (config.bc_x, config.bc_y)
    pressure = make_pressure(params)
    nsteps = config.steps()
    every = config.resolved_snapshot_every()
    mass0 = total_mass(state, grid)
    max_rho = float(state.rho.max())
    sohio.write_snapshot(state, out / _snap_name(0), params)
    with sohio.DiagnosticsWriter(out / "diagnostics.tsv", _BASE_COLUMNS) as diag:
        for step in range(1, nsteps + 1):
            try:
                state, rep = ap_step(state, params, pressure, bc=bc)
            except SohError as exc:
                raise type(exc)(f"step {step}: {exc}") from exc
            max_rho = max(max_rho, float(state.rho.max()))
            diag.row({
                "step": step, "time": state.time,
                "mass": total_mass(state, grid),
                "max_rho": float(state.rho.max()),
                "congested_fraction": congested_fraction(state, params, CONGESTION_TOL),
                "newton_iterations": rep.newton_iterations,
                "inner_linear_iterations": rep.inner_linear_iterations,
                "max_char_speed": rep.max_char_speed,
                "cfl_explicit": rep.cfl_explicit,
                "checkerboard_gap": rep.checkerboard_gap,
            })
            if step % every == 0 or step == nsteps:
                sohio.write_snapshot(state, out / _snap_name(step), params)
            if step % 50 == 0:
                echo(f"  step {step}/{nsteps} t={state.time:.4f} "
                     f"max_rho={state.rho.max():.4f}")
    mass1 = total_mass(state, grid)
    result = RunResult(
        scenario=scenario, steps_completed=nsteps, final_time=state.time,
        mass_drift_rel=abs(mass1 - mass0) / mass0, max_rho=max_rho,
        output_dir=out,
        congested_fraction_final=congested_fraction(state, params, CONGESTION_TOL))
    _write_summary(out, result)
    return result


def _run_collision(config: RunConfig, out: Path, echo) -> RunResult:
    params = config.model_params()
    nx = config.nx if config.nx is not None else int(round(1.0 / config.dx))
    ny = config.ny if config.ny is not None else int(round(1.0 / config.dy))
    grid = make_grid(nx, ny, config.dx, config.dy, config.bc_x, config.bc_y)
    state = init_collision(grid, params)
    return _single_fluid_loop(config, params, grid, state, out, echo, "collision")


def _run_crowd(config: RunConfig, out: Path, echo) -> RunResult:
    params = config.model_params()
    nx = config.nx if config.nx is not None else int(round(1.0 / config.dx))
    ny = config.ny if config.ny is not None else int(round(1.0 / config.dy))
    grid = make_grid(nx, ny, config.dx, config.dy)
    pressure = make_pressure(params)
    state = init_crowd(grid, params)
    nsteps = config.steps()
    every = config.resolved_snapshot_every()
    mp0, mm0 = float(state.rho_plus.sum()), float(state.rho_minus.sum())
    max_rho = float(state.rho_total.max())
    sohio.write_snapshot(state, out / _snap_name(0), params)
    cols = _BASE_COLUMNS + ("mass_plus", "mass_minus",
                            "drho_mean", "drho_var", "drho_min", "drho_max",
                            "dq1_mean", "dq1_var", "dq1_min", "dq1_max")
    with sohio.DiagnosticsWriter(out / "diagnostics.tsv", cols) as diag:
        for step in range(1, nsteps + 1):
            try:
                state, rep = twofluid_step(state, params, pressure)
            except SohError as exc:
                raise type(exc)(f"step {step}: {exc}") from exc
            rho_tot = state.rho_total
            max_rho = max(max_rho, float(rho_tot.max()))
            lane = lane_diagnostics(state)
            diag.row({
                "step": step, "time": state.time,
                "mass": float(rho_tot.sum()) * grid.dx * grid.dy,
                "max_rho": float(rho_tot.max()),
                "congested_fraction": float(
                    np.mean(rho_tot >= params.rho_star - CONGESTION_TOL)),
                "newton_iterations": rep.newton_iterations,
                "inner_linear_iterations": rep.inner_linear_iterations,
                "max_char_speed": rep.max_char_speed,
                "cfl_explicit": rep.cfl_explicit,
                "checkerboard_gap": rep.checkerboard_gap,
                "mass_plus": float(state.rho_plus.sum()) * grid.dx * grid.dy,
                "mass_minus": float(state.rho_minus.sum()) * grid.dx * grid.dy,
                **{f"drho_{k}": v for k, v in lane.stats["drho"].items()},
                **{f"dq1_{k}": v for k, v in lane.stats["dq1"].items()},
            })
            if step % every == 0 or step == nsteps:
                sohio.write_snapshot(state, out / _snap_name(step), params)
            if step % 50 == 0:
                echo(f"  step {step}/{nsteps} t={state.time:.4f}")
    mp1, mm1 = float(state.rho_plus.sum()), float(state.rho_minus.sum())
    drift = max(abs(mp1 - mp0) / mp0, abs(mm1 - mm0) / mm0)
    result = RunResult(
        scenario="crowd", steps_completed=nsteps, final_time=state.time,
        mass_drift_rel=abs((mp1 + mm1) - (mp0 + mm0)) / (mp0 + mm0),
        max_rho=max_rho, output_dir=out,
        congested_fraction_final=float(
            np.mean(state.rho_total >= params.rho_star - CONGESTION_TOL)),
        species_mass_drift_rel=drift)
    _write_summary(out, result)
    return result


def _run_sweep(config: RunConfig, out: Path, echo) -> RunResult:
    nx = config.nx if config.nx is not None else int(round(1.0 / config.dx))
    ny = config.ny if config.ny is not None else int(round(1.0 / config.dy))
    grid = make_grid(nx, ny, config.dx, config.dy)
    rows = []
    for eps in config.epsilons:
        params = config.model_params(epsilon=eps)
        pressure = make_pressure(params)
        state = init_collision(grid, params)
        mass0 = float(state.rho.sum())
        max_cfl = 0.0
        max_rho = 0.0
        stable, reason = True, None
        try:
            for step in range(1, config.sweep_steps + 1):
                state, rep = ap_step(state, params, pressure)
                max_cfl = max(max_cfl, rep.cfl_explicit)
                max_rho = max(max_rho, float(state.rho.max()))
            if not np.isfinite(state.rho).all():
                stable, reason = False, "non-finite state"
            elif max_rho > params.rho_star:
                stable, reason = False, "density above rho_star"
        except SohError as exc:
            stable, reason = False, f"{type(exc).__name__}: {exc}"

        state = init_collision(grid, params)
        blow_step = None
        try:
            for step in range(1, config.sweep_steps + 1):
                state, _rep = explicit_step(state, params, pressure)
                state = relaxation_step(state, params)
        except BlowupError:
            blow_step = step
        drift = abs(float(state.rho.sum()) - mass0) / mass0 if stable else float("nan")
        rows.append(SweepRow(epsilon=eps, ap_stable=stable, ap_max_rho=max_rho,
                             ap_max_cfl=max_cfl, ap_mass_drift=drift,
                             ap_fail_reason=reason,
                             explicit_blowup_step=blow_step))
        echo(f"  eps={eps:g}: ap {'ok' if stable else 'FAILED'}, "
             f"explicit {'ok' if blow_step is None else f'blow-up @ {blow_step}'}")

    with sohio.DiagnosticsWriter(
            out / "sweep.tsv",
            ("epsilon", "ap_stable", "ap_max_rho", "ap_max_cfl",
             "ap_mass_drift", "explicit_blowup_step")) as table:
        for r in rows:
            table.row({
                "epsilon": r.epsilon,
                "ap_stable": int(r.ap_stable),
                "ap_max_rho": r.ap_max_rho,
                "ap_max_cfl": r.ap_max_cfl,
                "ap_mass_drift": r.ap_mass_drift,
                "explicit_blowup_step": -1 if r.explicit_blowup_step is None
                else r.explicit_blowup_step,
            })
    result = RunResult(
        scenario="sweep", steps_completed=config.sweep_steps,
        final_time=config.sweep_steps * config.dt,
        mass_drift_rel=0.0, max_rho=max(r.ap_max_rho for r in rows),
        output_dir=out, sweep=rows)
    _write_summary(out, result)
    return result


def _write_summary(out: Path, result: RunResult):
    with open(out / "summary.txt", "w") as fh:
        for line in result.summary_lines():
            fh.write(line + "\n")


# -- command line -------------------------------------------------------------

def _cmd_run(args) -> int:
    text = Path(args.config).read_text()
    config = parse_config(text)
    if args.output_dir:
        config.output_dir = args.output_dir
    if args.seed is not None:
        config.seed = args.seed
    if args.snapshot_every is not None:
        config.snapshot_every = args.snapshot_every
    result = run(config, echo=print)
    for line in result.summary_lines():
        print(line)
    return 0


def _cmd_sweep(args) -> int:
    text = Path(args.config).read_text()
    config = parse_config(text)
    config.scenario = "sweep"
    if args.epsilons:
        config.epsilons = _parse_epsilons(args.epsilons)
    if args.output_dir:
        config.output_dir = args.output_dir
    config.validate()
    result = run(config, echo=print)
    for line in result.summary_lines():
        print(line)
    return 0


def _cmd_inspect(args) -> int:
    state, meta = sohio.read_snapshot(args.snapshot)
    kind = "single" if meta.kind == sohio.KIND_SINGLE else "twofluid"
    print(f"kind     {kind}")
    print(f"grid     {meta.nx} x {meta.ny} (dx={meta.dx:g}, dy={meta.dy:g})")
    print(f"time     {meta.time:.6g}")
    print(f"digest   {meta.digest}")
    names = sohio._SINGLE_FIELDS if meta.kind == sohio.KIND_SINGLE \
        else sohio._TWOFLUID_FIELDS
    for name in names:
        a = getattr(state, name)
        print(f"{name:<10} min={a.min():.6g} max={a.max():.6g} mean={a.mean():.6g}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="soh",
        description="Finite-volume solver for congested self-organized hydrodynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--snapshot-every", type=int)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="epsilon-sweep stability harness")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--epsilons")
    p_sweep.add_argument("--output-dir")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_inspect = sub.add_parser("inspect", help="print snapshot header and stats")
    p_inspect.add_argument("snapshot")
    p_inspect.set_defaults(func=_cmd_inspect)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NewtonConvergenceError, NegativePressureError, BlowupError,
            DomainError) as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return 3
    except (SnapshotError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
