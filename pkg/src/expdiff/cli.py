"""Command-line driver: ``expdiff <command> --config <path> [--out <dir>] [--quiet]``.

Configs are flat UTF-8 ``key = value`` files with ``#`` comments.  Unknown
keys are errors.  Every run writes ``manifest.cfg`` (the resolved config,
re-parsable) next to its results.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import diffeo as dmod
from . import spectral
from .errors import BlowUp, ConfigError, InvalidDiffeo, NoConvergence, ShockFormed
from .expmap import ShootingConfig, exp_map, shoot
from .geodesic import SolverConfig, burgers_oracle, eulerian, integrate, monitor
from .profiles import parse_profile
from .studies import invariant_report, spatial_errors, temporal_order

log = logging.getLogger("expdiff")

COMMANDS = ("evolve", "exp", "log", "invariants", "convergence", "burgers-check")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_BLOWUP, EXIT_NOCONV = 0, 1, 2, 3, 4


def _bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s: str) -> tuple:
    return tuple(float(p) for p in s.split(",") if p.strip())


def _ints(s: str) -> tuple:
    return tuple(int(p) for p in s.split(",") if p.strip())


SOLVER_KEYS = {
    "N": int, "dt": float, "k": int, "dealias": _bool, "slope_floor": float,
    "inversion_tol": float, "monitor_tol": float, "t_max": float,
}
SHOOTING_KEYS = {"M": int, "newton_tol": float, "max_newton": int, "fd_step": float}
RUN_KEYS = {
    "command": str, "T": float, "initial": str, "spatial_initial": str, "target": str,
    "output_dir": str, "seed": int, "stride": int, "snapshot_stride": int,
    "dts": _floats, "grids": _ints, "ref_N": int, "conv_dt": float,
}
ALL_KEYS = {**SOLVER_KEYS, **SHOOTING_KEYS, **RUN_KEYS}


@dataclass(frozen=True)
class ExperimentSpec:
    command: str
    solver: SolverConfig
    shooting: ShootingConfig | None = None
    initial: str = "sine(1, 0.05)"
    target: str | None = None
    spatial_initial: str | None = None
    T: float = 1.0
    output_dir: str = "expdiff_out"
    seed: int = 0
    stride: int = 1
    snapshot_stride: int = 0
    dts: tuple = (4e-3, 2e-3, 1e-3)
    grids: tuple = (64, 128)
    ref_N: int = 512
    conv_dt: float = 1e-2


def _split_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        yield lineno, key, value


def parse_config(text: str, command: str | None = None) -> ExperimentSpec:
    """Parse a ``key = value`` config into a validated :class:`ExperimentSpec`.

    ``command`` (from the command line) takes precedence; a ``command`` key in
    the file must agree with it.
    """
    values = {}
    for lineno, key, value in _split_lines(text):
        if key not in ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = ALL_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None

    file_cmd = values.pop("command", None)
    if command and file_cmd and command != file_cmd:
        raise ConfigError(f"config is for command {file_cmd!r}, invoked as {command!r}")
    command = command or file_cmd
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")

    solver_kw = {k: values.pop(k) for k in list(values) if k in SOLVER_KEYS}
    if command == "burgers-check":
        if solver_kw.get("k", 0) != 0:
            raise ConfigError("key 'k': burgers-check runs the k=0 flow; k must be 0 or omitted")
        solver_kw["k"] = 0
        values.setdefault("T", 0.1)
    elif solver_kw.get("k", 1) < 1:
        raise ConfigError(
            f"key 'k': command {command!r} needs k >= 1 (k=0 is only available via burgers-check)"
        )
    try:
        solver = SolverConfig(**solver_kw)
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from None

    shoot_kw = {k: values.pop(k) for k in list(values) if k in SHOOTING_KEYS}
    shooting = None
    if command == "log" or shoot_kw:
        try:
            shooting = ShootingConfig(solver=solver, **shoot_kw)
        except ValueError as exc:
            raise ConfigError(f"shooting: {exc}") from None

    spec = ExperimentSpec(command=command, solver=solver, shooting=shooting, **values)
    _validate(spec)
    return spec


def _validate(spec: ExperimentSpec) -> None:
    if abs(spec.T) > spec.solver.t_max:
        raise ConfigError(f"key 'T': |T|={abs(spec.T)} exceeds t_max={spec.solver.t_max}")
    if spec.stride < 1 or spec.snapshot_stride < 0:
        raise ConfigError("key 'stride' must be >= 1 and 'snapshot_stride' >= 0")
    for key in ("initial", "spatial_initial", "target"):
        _check_source(key, getattr(spec, key), spec.solver.N, spec.seed)
    if spec.command == "log" and spec.target is None:
        raise ConfigError("command 'log' requires key 'target'")
    if spec.command == "convergence":
        if len(spec.dts) != 3 or any(d <= 0 for d in spec.dts):
            raise ConfigError("key 'dts' needs three positive step sizes")
        if any(n >= spec.ref_N for n in spec.grids):
            raise ConfigError("key 'ref_N' must exceed every entry of 'grids'")


def _check_source(key, source, N, seed):
    if source is None:
        return
    if source.startswith("file:"):
        path = Path(source[5:])
        if not path.is_file():
            raise ConfigError(f"key {key!r}: file {str(path)!r} does not exist")
        return
    try:
        parse_profile(source, N, seed)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: {exc}") from None


def load_field(source: str, N: int, seed: int) -> spectral.Field:
    if source.startswith("file:"):
        f = spectral.read_field_csv(source[5:])
        if f.N != N:
            raise ConfigError(f"{source}: field has N={f.N}, config has N={N}")
        return f
    return parse_profile(source, N, seed)


def load_target(source: str, N: int, seed: int, slope_floor: float) -> dmod.Diffeo:
    """Target diffeomorphism: a ``x,phi`` CSV, or ``id +`` a named displacement profile."""
    try:
        if source.startswith("file:"):
            phi = dmod.read_diffeo_csv(source[5:], slope_floor)
        else:
            phi = dmod.Diffeo(parse_profile(source, N, seed), slope_floor)
    except InvalidDiffeo as exc:
        raise ConfigError(f"target {source!r} is not a valid diffeomorphism: {exc}") from None
    if phi.N != N:
        raise ConfigError(f"{source}: target has N={phi.N}, config has N={N}")
    return phi


def format_manifest(spec: ExperimentSpec) -> str:
    s = spec.solver
    lines = [
        "# resolved expdiff configuration",
        f"command = {spec.command}",
        f"N = {s.N}", f"dt = {s.dt!r}", f"k = {s.k}", f"dealias = {str(s.dealias).lower()}",
        f"slope_floor = {s.slope_floor!r}", f"inversion_tol = {s.inversion_tol!r}",
        f"monitor_tol = {s.monitor_tol!r}", f"t_max = {s.t_max!r}",
    ]
    if spec.shooting is not None:
        sh = spec.shooting
        lines += [f"M = {sh.M}", f"newton_tol = {sh.newton_tol!r}",
                  f"max_newton = {sh.max_newton}", f"fd_step = {sh.fd_step!r}"]
    lines += [f"T = {spec.T!r}", f"initial = {spec.initial}"]
    if spec.spatial_initial is not None:
        lines.append(f"spatial_initial = {spec.spatial_initial}")
    if spec.target is not None:
        lines.append(f"target = {spec.target}")
    lines += [
        f"output_dir = {spec.output_dir}", f"seed = {spec.seed}", f"stride = {spec.stride}",
        f"snapshot_stride = {spec.snapshot_stride}",
        "dts = " + ", ".join(repr(d) for d in spec.dts),
        "grids = " + ", ".join(str(n) for n in spec.grids),
        f"ref_N = {spec.ref_N}", f"conv_dt = {spec.conv_dt!r}",
    ]
    return "\n".join(lines) + "\n"


def _num(v) -> str:
    return "%.17g" % v


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else (str(c) if isinstance(c, int) else _num(c))
                        for c in row])


def _write_monitors(out: Path, rows) -> None:
    _write_rows(out / "monitors.csv", ["t", "energy", "momentum_err", "slope_err", "mean_err"],
                [(r.t, r.energy, r.momentum_err, r.slope_err, r.mean_err) for r in rows])


def _evolve(spec, out, say):
    cfg = spec.solver
    v0 = load_field(spec.initial, cfg.N, spec.seed)
    traj = integrate(v0, spec.T, cfg, stride=1)
    rows = [monitor(s, v0, cfg.k) for i, s in enumerate(traj)
            if i % spec.stride == 0 or i == len(traj) - 1]
    _write_monitors(out, rows)
    if spec.snapshot_stride:
        for i, s in enumerate(traj):
            if i % spec.snapshot_stride == 0:
                spectral.write_field_csv(s.v, out / f"field_v_{i:06d}.csv")
                dmod.write_diffeo_csv(s.phi, out / f"diffeo_phi_{i:06d}.csv")
    final = traj[-1]
    spectral.write_field_csv(v0, out / "field_v0.csv")
    spectral.write_field_csv(final.v, out / "field_v_final.csv")
    spectral.write_field_csv(eulerian(final), out / "field_u_final.csv")
    dmod.write_diffeo_csv(final.phi, out / "diffeo_phi_final.csv")
    say(f"evolve: t={final.t:g}, min slope {final.phi.min_slope:.6f}")
    return EXIT_OK


def _invariants(spec, out, say):
    cfg = spec.solver
    v0 = load_field(spec.initial, cfg.N, spec.seed)
    rows, summary = invariant_report(v0, spec.T, cfg, stride=spec.stride)
    _write_monitors(out, rows)
    _write_rows(out / "invariants.csv", ["quantity", "max_value"], sorted(summary.items()))
    for name, val in summary.items():
        say(f"{name}: {val:.3e}")
    return EXIT_OK


def _exp(spec, out, say):
    cfg = spec.solver
    v0 = load_field(spec.initial, cfg.N, spec.seed)
    phi = exp_map(v0, cfg.k, cfg)
    spectral.write_field_csv(v0, out / "field_v0.csv")
    spectral.write_spectrum_csv(v0, out / "spec_v0.csv")
    dmod.write_diffeo_csv(phi, out / "diffeo_exp.csv")
    say(f"exp: sup|phi - id| = {phi.f.sup():.6e}, min slope {phi.min_slope:.6f}")
    return EXIT_OK


def _write_newton(out: Path, trace) -> None:
    _write_rows(out / "newton.csv", ["iter", "residual", "step_factor"],
                [(s.iter, s.residual, s.step_factor) for s in trace])


def _log(spec, out, say):
    cfg = spec.solver
    target = load_target(spec.target, cfg.N, spec.seed, cfg.slope_floor)
    try:
        result = shoot(target, cfg.k, spec.shooting)
    except NoConvergence as exc:
        _write_newton(out, exc.trace or [])
        raise
    _write_newton(out, result.trace)
    spectral.write_spectrum_csv(result.v, out / "spec_log.csv")
    spectral.write_field_csv(result.v, out / "field_log.csv")
    dmod.write_diffeo_csv(target, out / "diffeo_target.csv")
    say(f"log: residual {result.residual:.3e} after {len(result.trace) - 1} Newton steps")
    return EXIT_OK


def _convergence(spec, out, say):
    cfg = spec.solver
    v0 = load_field(spec.initial, cfg.N, spec.seed)
    diffs, orders = temporal_order(v0, spec.T, spec.dts, cfg)
    spatial_src = spec.spatial_initial or spec.initial
    errs = spatial_errors(lambda n: load_field(spatial_src, n, spec.seed), spec.T,
                          spec.grids, spec.ref_N, dataclasses.replace(cfg, dt=spec.conv_dt))
    rows = [("temporal_diff", dt, d) for dt, d in zip(spec.dts[1:], diffs)]
    rows += [("temporal_order", dt, o) for dt, o in zip(spec.dts[2:], orders)]
    rows += [("spatial_error", float(n), e) for n, e in errs.items()]
    _write_rows(out / "convergence.csv", ["kind", "param", "value"], rows)
    say("temporal orders: " + ", ".join(f"{o:.3f}" for o in orders))
    say("spatial errors: " + ", ".join(f"N={n}: {e:.3e}" for n, e in errs.items()))
    return EXIT_OK


def _burgers_check(spec, out, say):
    cfg = spec.solver
    v0 = load_field(spec.initial, cfg.N, spec.seed)
    lag = eulerian(integrate(v0, spec.T, cfg, stride=10**9)[-1])
    ref = burgers_oracle(v0, spec.T, cfg)
    err = float(abs(lag.values - ref.values).max())
    _write_rows(out / "burgers.csv", ["x", "lagrangian", "characteristics"],
                zip(lag.x, lag.values, ref.values))
    say(f"burgers-check: sup discrepancy {err:.3e} at t={spec.T:g}")
    if err >= cfg.monitor_tol:
        say(f"burgers-check FAILED: discrepancy exceeds monitor_tol={cfg.monitor_tol:.1e}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


RUNNERS = {
    "evolve": _evolve, "invariants": _invariants, "exp": _exp, "log": _log,
    "convergence": _convergence, "burgers-check": _burgers_check,
}


def run(spec: ExperimentSpec, out_dir=None, quiet: bool = False) -> int:
    """Execute an experiment; returns the process exit status."""
    out = Path(out_dir or spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.cfg").write_text(format_manifest(spec), encoding="utf-8")

    def say(msg):
        if not quiet:
            print(msg)

    try:
        return RUNNERS[spec.command](spec, out, say)
    except ConfigError as exc:
        print(f"expdiff {spec.command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUp, ShockFormed) as exc:
        when = f" at t={exc.t:g}" if getattr(exc, "t", None) is not None else ""
        print(f"expdiff {spec.command}: blow-up{when}: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except NoConvergence as exc:
        print(f"expdiff {spec.command}: no convergence: {exc}", file=sys.stderr)
        return EXIT_NOCONV


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="expdiff", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="key = value config file")
    parser.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s")
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        spec = parse_config(text, args.command)
    except (ConfigError, OSError) as exc:
        print(f"expdiff {args.command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out is not None:
        spec = dataclasses.replace(spec, output_dir=str(args.out))
    return run(spec, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
