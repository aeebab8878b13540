"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 physics-domain error
(fold, instability, unreachable constraint), 4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, io, lambdacalc, pipeline, pump, spectrum, sweeps
from .errors import ConfigError, InconsistentInputError, PhysicsError
from .model import (
    MODES,
    TWO_PI,
    STANDARD_ABLATIONS,
    ProcessToggles,
    SystemConfig,
    baseline_config,
    config_from_mapping,
    dbm_to_watt,
    derive_rates,
    load_config,
    watt_to_dbm,
)

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_IO = 0, 2, 3, 4
MHZ = TWO_PI * 1e6


def _mhz(x: float) -> float:
    return x / MHZ


class Run:
    """Per-invocation context: config, output directory, format, worker count."""

    def __init__(self, args: argparse.Namespace, cfg: SystemConfig, argv: Sequence[str]):
        self.args = args
        self.cfg = cfg
        self.argv = list(argv)
        self.out = Path(args.out)
        self.fmt = args.format
        self.workers = max(1, int(args.threads))
        self.outputs: list[Path] = []
        self.warnings = 0

    def table(self, name: str, columns, rows, cfg: SystemConfig | None = None) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        p = io.write_table(self.out / name, columns, rows, cfg or self.cfg, self.fmt)
        self.outputs.append(p)
        return p

    def finish(self, extra: dict | None = None) -> None:
        if self.outputs:
            io.write_manifest(self.out, self.cfg, self.args.command, self.argv, self.outputs, self.warnings, extra)


# --------------------------------------------------------------------------
# config assembly
# --------------------------------------------------------------------------

def _resolve_config(args: argparse.Namespace) -> SystemConfig:
    cfg = load_config(args.config) if args.config else baseline_config()
    changes = {}
    if getattr(args, "power_dbm", None) is not None:
        changes["pump_total_power"] = dbm_to_watt(args.power_dbm)
    if getattr(args, "processes", None):
        changes["toggles"] = ProcessToggles.parse(args.processes)
    if getattr(args, "offsets_mhz", None) is not None:
        changes["detuning_mode"] = "hot_offset"
        changes["detunings"] = tuple(float(v) * MHZ for v in args.offsets_mhz)
    if getattr(args, "mode", None):
        if args.mode not in MODES:
            raise ConfigError("spectrum.mode", f"unknown mode {args.mode!r}")
        changes["spectrum"] = cfg.spectrum.__class__(args.mode, cfg.spectrum.omega_max, cfg.spectrum.points, cfg.spectrum.thetas)
    cfg = cfg.replace(**changes) if changes else cfg
    cfg.validate()
    return cfg


def _check_branch(cfg: SystemConfig) -> None:
    """Refuse operating points beyond the first fold of the zero-connected pump branch."""
    rates = derive_rates(cfg)
    try:
        deltas = pump.resolve_detunings(cfg, rates)
    except PhysicsError as exc:
        d1, d2 = (_mhz(d) for d in cfg.detunings)
        raise PhysicsError(
            f"no steady state at {watt_to_dbm(cfg.pump_total_power):.3f} dBm "
            f"({cfg.detuning_mode} detunings {d1:.3f}, {d2:.3f} MHz): {exc}"
        ) from exc
    grid = np.linspace(0.0, cfg.pump_total_power, 41)
    rec = pump.continuation_scan(cfg, rates, grid, *deltas)
    if rec.folded:
        raise PhysicsError(
            f"pump branch folds or destabilises at {watt_to_dbm(rec.fold_power):.3f} dBm "
            f"(requested {watt_to_dbm(cfg.pump_total_power):.3f} dBm): {rec.message}"
        )


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_validate(run: Run) -> int:
    cfg = run.cfg
    r = derive_rates(cfg)
    print(f"ringsqueeze {__version__}: configuration OK")
    print(f"  ring radius            {cfg.ring_radius * 1e6:.4f} um, circumference {cfg.ring_circumference * 1e6:.4f} um")
    print(f"  ring group index       {2.99792458e8 / cfg.group_velocity_ring:.5f}")
    print(f"  Lambda                 2pi x {cfg.lambda_coeff / TWO_PI:.6g} Hz")
    p1, p2 = cfg.pump_powers
    print(f"  pump powers            {p1 * 1e3:.6g} mW + {p2 * 1e3:.6g} mW ({watt_to_dbm(cfg.pump_total_power):.3f} dBm total)")
    print(f"  processes              {cfg.toggles.label()}")
    print("  mode  freq (THz)        2*Gamma_bar (GHz, /2pi)  kappa_channel (GHz, /2pi)  kappa_phantom (GHz, /2pi)")
    for j, name in enumerate(MODES):
        print(
            f"  {name:<4}  {cfg.mode_frequencies[j] / TWO_PI / 1e12:<16.9f}  "
            f"{2 * r.gamma_bar[j] / TWO_PI / 1e9:<23.6f}  {r.kappa_channel[j] / TWO_PI / 1e9:<25.6f}  "
            f"{r.kappa_phantom[j] / TWO_PI / 1e9:.6f}"
        )
    print(f"2*Gamma_bar_s = 2pi x {2 * r.gamma_bar[2] / TWO_PI / 1e9:.4f} GHz")
    return EXIT_OK


def cmd_steady_state(run: Run) -> int:
    cfg = run.cfg
    _check_branch(cfg)
    op = pipeline.operating_point(cfg)
    st = op.steady
    rows = [
        ("delta_p1_mhz", _mhz(op.detunings[0])),
        ("delta_p2_mhz", _mhz(op.detunings[1])),
        ("abs_F_p1_sq", abs(st.F_p1) ** 2),
        ("abs_F_p2_sq", abs(st.F_p2) ** 2),
        ("arg_F_p1_rad", float(np.angle(st.F_p1))),
        ("arg_F_p2_rad", float(np.angle(st.F_p2))),
        ("energy_p1_pj", st.energies[0] * 1e12),
        ("energy_p2_pj", st.energies[1] * 1e12),
        ("energy_product_pj2", st.energies[0] * st.energies[1] * 1e24),
        ("energy_total_pj", sum(st.energies) * 1e12),
        ("spm_shift_U_mhz", _mhz(st.spm_shift_U)),
        ("pump_stable", st.stable),
        ("drift_abscissa_over_gamma_s", -op.stability.margin),
    ]
    for k, v in rows:
        print(f"{k:<30} {v}")
    run.table("steady_state", ["quantity", "value"], rows)
    return EXIT_OK


def _spectrum_rows(res: spectrum.SpectrumResult):
    rows = []
    for k, w in enumerate(res.omega_grid):
        row = [w / TWO_PI, 10 * math.log10(res.s_min[k]), 10 * math.log10(res.s_max[k]), res.theta_opt[k]]
        row += [10 * math.log10(res.s_theta[t, k]) for t in range(len(res.thetas))]
        rows.append(row)
    cols = ["omega_hz", "s_min_db", "s_max_db", "theta_opt_rad"] + [f"s_theta_{t:.6g}_db" for t in res.thetas]
    return cols, rows


def cmd_spectrum(run: Run) -> int:
    _check_branch(run.cfg)
    op = pipeline.operating_point(run.cfg)
    res = pipeline.spectrum_at(op)
    cols, rows = _spectrum_rows(res)
    run.table("spectrum", cols, rows)
    print(f"mode {res.mode}: squeezing {res.squeezing_db[0]:.4f} dB, anti-squeezing {res.antisqueezing_db[0]:.4f} dB at zero sideband frequency")
    return EXIT_OK


def cmd_photons(run: Run) -> int:
    _check_branch(run.cfg)
    op = pipeline.operating_point(run.cfg)
    ph = pipeline.photons_at(op)
    rows = [(name, float(n)) for name, n in zip(MODES, ph.n)] + [("ratio_mn_over_s", ph.ratio)]
    for k, v in rows:
        print(f"{k:<16} {v:.10g}")
    run.table("photons", ["mode", "n_photons"], rows)
    return EXIT_OK


def cmd_sweep_power(run: Run) -> int:
    res = sweeps.sweep_power(run.cfg, run.args.powers, workers=run.workers)
    rows, spec_rows = [], []
    for r in res:
        if r.error:
            run.warnings += 1
            print(f"warning: {r.power_dbm} dBm: {r.error}", file=sys.stderr)
        sq = -10 * math.log10(r.s_min) if not r.error else math.nan
        asq = 10 * math.log10(r.s_max) if not r.error else math.nan
        rows.append([r.power_dbm, _mhz(r.delta_p1), _mhz(r.delta_p2), sq, asq, r.error])
        if r.spectrum is not None:
            _, srows = _spectrum_rows(r.spectrum)
            spec_rows += [[r.power_dbm] + s[:4] for s in srows]
    run.table("sweep_power", ["power_dbm", "delta_p1_mhz", "delta_p2_mhz", "squeezing_db", "antisqueezing_db", "error"], rows)
    run.table("sweep_power_spectra", ["power_dbm", "omega_hz", "s_min_db", "s_max_db", "theta_opt_rad"], spec_rows)
    return EXIT_OK


def _parse_combos(text: str | None) -> dict[str, ProcessToggles]:
    if not text:
        return dict(STANDARD_ABLATIONS)
    out = {}
    for item in text.split(","):
        item = item.strip()
        if item in STANDARD_ABLATIONS:
            out[item] = STANDARD_ABLATIONS[item]
        else:
            out[item] = ProcessToggles.parse(item)
    return out


def cmd_ablate(run: Run) -> int:
    combos = _parse_combos(run.args.combos)
    res = sweeps.ablate_processes(run.cfg, combos, workers=run.workers)
    rows, spec_rows = [], []
    for r in res:
        if r.error:
            run.warnings += 1
        sq = -10 * math.log10(r.s_min) if not r.error else math.nan
        asq = 10 * math.log10(r.s_max) if not r.error else math.nan
        rows.append([r.label, r.toggles.label(), sq, asq, r.error])
        print(f"{r.label:<10} squeezing {sq:8.4f} dB  anti-squeezing {asq:8.4f} dB {r.error}")
        if r.spectrum is not None:
            _, srows = _spectrum_rows(r.spectrum)
            spec_rows += [[r.label] + s[:4] for s in srows]
    run.table("ablation", ["label", "processes", "squeezing_db", "antisqueezing_db", "error"], rows)
    run.table("ablation_spectra", ["label", "omega_hz", "s_min_db", "s_max_db", "theta_opt_rad"], spec_rows)
    return EXIT_OK


def cmd_map_detuning(run: Run) -> int:
    a = run.args
    grid = np.linspace(-a.span_mhz, a.span_mhz, a.points) * MHZ
    mp = sweeps.map_detuning(run.cfg, grid, grid, workers=run.workers)
    for e in mp.errors:
        print(f"warning: {e}", file=sys.stderr)
    run.warnings += mp.failures
    rows = []
    for i, d1 in enumerate(mp.delta_p1):
        for k, d2 in enumerate(mp.delta_p2):
            ok = np.isfinite(mp.s_min[i, k])
            rows.append(
                [_mhz(d1), _mhz(d2), -10 * math.log10(mp.s_min[i, k]) if ok else math.nan, 10 * math.log10(mp.s_max[i, k]) if ok else math.nan]
            )
    run.table("map_detuning", ["delta_p1_mhz", "delta_p2_mhz", "squeezing_db", "antisqueezing_db"], rows)
    opt_rows = [[_mhz(o.delta_p1), _mhz(o.delta_p2), -10 * math.log10(o.s_min), 10 * math.log10(o.s_max)] for o in mp.optima]
    run.table("map_optima", ["delta_p1_mhz", "delta_p2_mhz", "squeezing_db", "antisqueezing_db"], opt_rows)
    for r in opt_rows:
        print(f"local optimum at ({r[0]:.3f}, {r[1]:.3f}) MHz: squeezing {r[2]:.4f} dB")
    return EXIT_OK


def cmd_sweep_symmetric(run: Run) -> int:
    a = run.args
    kind = sweeps.ConstraintKind(a.constraint)
    value = a.value
    if kind is sweeps.ConstraintKind.ENERGY_PRODUCT:
        value *= 1e-24  # pJ^2 -> J^2
    elif kind is sweeps.ConstraintKind.TOTAL_ENERGY:
        value *= 1e-12  # pJ -> J
    constraint = sweeps.Constraint(kind, value if kind is not sweeps.ConstraintKind.NONE else 0.0)
    deltas = np.linspace(0.0, a.edge_mhz, a.points) * MHZ
    res = sweeps.sweep_symmetric(run.cfg, deltas, constraint, workers=run.workers)
    rows = []
    for r in res:
        if r.error:
            run.warnings += 1
            print(f"warning: delta={_mhz(r.delta):.3f} MHz: {r.error}", file=sys.stderr)
        ok = not r.error
        rows.append(
            [
                _mhz(r.delta),
                r.power_dbm if ok else math.nan,
                -10 * math.log10(r.s_min) if ok else math.nan,
                10 * math.log10(r.s_max) if ok else math.nan,
                r.photon_ratio,
                r.constrained_value,
                r.constraint_residual,
                r.error,
            ]
        )
    run.table(
        "sweep_symmetric",
        ["delta_p1_mhz", "power_dbm", "squeezing_db", "antisqueezing_db", "photon_ratio_mn_over_s", "constrained_value", "constraint_residual", "error"],
        rows,
    )
    return EXIT_OK


def cmd_best_squeezing(run: Run) -> int:
    a = run.args
    sets = _parse_combos(a.combos or "DP,DP+SP")
    res = sweeps.best_squeezing(run.cfg, a.powers, sets, points=a.points, span=a.span_mhz * MHZ, workers=run.workers)
    rows = []
    for r in res:
        if r.error:
            run.warnings += 1
        rows.append([r.power_dbm, r.label, _mhz(r.delta_p1), _mhz(r.delta_p2), r.squeezing_db, r.antisqueezing_db, r.error])
        print(f"{r.power_dbm:6.2f} dBm {r.label:<8} squeezing {r.squeezing_db:.4f} dB at ({_mhz(r.delta_p1):.2f}, {_mhz(r.delta_p2):.2f}) MHz")
    run.table("best_squeezing", ["power_dbm", "label", "delta_p1_mhz", "delta_p2_mhz", "squeezing_db", "antisqueezing_db", "error"], rows)
    return EXIT_OK


def cmd_lambda(run: Run) -> int:
    a = run.args
    try:
        prof = lambdacalc.load_mode_profile(a.mode_file)
    except (ValueError, KeyError) as exc:
        raise ConfigError("mode_file", str(exc)) from exc
    cfg = run.cfg
    omega = cfg.mode_frequencies[2]
    chi3 = a.chi3 if a.chi3 is not None else lambdacalc.chi3_from_n2(a.n2, a.n_bar)
    s = lambdacalc.summarize(prof, omega, chi3, a.n_bar, cfg.group_velocity_ring, cfg.ring_circumference, a.polarization)
    rows = [
        ("effective_area_um2", s.area * 1e12),
        ("gamma_per_w_m", s.gamma),
        ("lambda_hz", s.lam / TWO_PI),
    ]
    print(f"A      = {s.area * 1e12:.6g} um^2")
    print(f"gamma  = {s.gamma:.6g} 1/(W m)")
    print(f"Lambda = 2pi x {s.lam / TWO_PI:.6g} Hz")
    run.table("lambda", ["quantity", "value"], rows)
    return EXIT_OK


def cmd_dump_matrix(run: Run) -> int:
    op = pipeline.operating_point(run.cfg)
    run.out.mkdir(parents=True, exist_ok=True)
    p = io.write_matrix(run.out / "drift_matrix", op.drift.m, run.cfg, run.fmt)
    run.outputs.append(p)
    print(f"wrote {p}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "steady-state": cmd_steady_state,
    "spectrum": cmd_spectrum,
    "photons": cmd_photons,
    "sweep-power": cmd_sweep_power,
    "ablate": cmd_ablate,
    "map-detuning": cmd_map_detuning,
    "sweep-symmetric": cmd_sweep_symmetric,
    "best-squeezing": cmd_best_squeezing,
    "lambda": cmd_lambda,
    "dump-matrix": cmd_dump_matrix,
}


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", default=d(None), help="TOML config file (defaults to the built-in baseline)")
    p.add_argument("--out", default=d("out"), help="output directory")
    p.add_argument("--threads", type=int, default=d(1), help="worker processes for sweeps")
    p.add_argument("--format", choices=("csv", "json"), default=d("csv"))


def _point_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--power-dbm", type=float, help="total input power override")
    p.add_argument("--processes", help='toggle set, e.g. "spm+xpm+dp" or "all"')
    p.add_argument("--offsets-mhz", type=float, nargs=2, metavar=("D1", "D2"), help="pump offsets from the hot resonances (MHz)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringsqueeze", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, point=True):
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        if point:
            _point_flags(p)
        return p

    add("validate", "check a config and report derived rates")
    add("steady-state", "classical pump steady state")
    p = add("spectrum", "squeezing spectrum of one resonance")
    p.add_argument("--mode", choices=MODES)
    add("photons", "intracavity fluctuation photon numbers")
    p = add("sweep-power", "spectra versus total input power")
    p.add_argument("--powers", type=float, nargs="+", default=[11.0, 13.0, 15.0], help="dBm")
    p = add("ablate", "compare process combinations")
    p.add_argument("--combos", help="comma-separated labels (DP, DP+SP, DP+BS, all-HP, all) or toggle strings")
    p = add("map-detuning", "squeezing over the plane of pump offsets")
    p.add_argument("--span-mhz", type=float, default=300.0)
    p.add_argument("--points", type=int, default=61)
    p = add("sweep-symmetric", "symmetric offsets at a held constraint")
    p.add_argument("--constraint", choices=[k.value for k in sweeps.ConstraintKind], default="fixed_energy_product")
    p.add_argument("--value", type=float, default=69.6, help="pJ^2, pJ or dB depending on --constraint")
    p.add_argument("--edge-mhz", type=float, default=900.0)
    p.add_argument("--points", type=int, default=19)
    p = add("best-squeezing", "optimal squeezing over pump offsets")
    p.add_argument("--powers", type=float, nargs="+", default=[10.0, 12.0, 14.0, 16.0])
    p.add_argument("--combos", help="comma-separated toggle sets (default DP,DP+SP)")
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--span-mhz", type=float, default=300.0)
    p = add("lambda", "effective area, gamma and Lambda from a mode file", point=False)
    p.add_argument("--mode-file", required=True)
    p.add_argument("--polarization", choices=[x.value for x in lambdacalc.Polarization], default="full")
    p.add_argument("--n-bar", type=float, default=1.996, help="representative refractive index")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--chi3", type=float, help="chi3 (m^2/V^2)")
    g.add_argument("--n2", type=float, default=2.4e-19, help="nonlinear index (m^2/W)")
    add("dump-matrix", "write the 10x10 drift matrix")
    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    _global_flags(p, suppress=True)
    p.add_argument("manifest")
    return parser


def _execute(args: argparse.Namespace, cfg: SystemConfig, argv: Sequence[str]) -> int:
    run = Run(args, cfg, argv)
    code = COMMANDS[args.command](run)
    run.finish()
    return code


def _replay(args: argparse.Namespace) -> int:
    doc = io.read_manifest(args.manifest)
    inner = build_parser().parse_args(doc["argv"])
    inner.out = args.out
    inner.threads = args.threads
    cfg = config_from_mapping(doc["config"])
    cfg.validate()
    return _execute(inner, cfg, doc["argv"])


def _recorded_argv(argv: Sequence[str]) -> list[str]:
    """argv minus --config/--out/--threads, which the manifest captures separately."""
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok in ("--config", "--out", "--threads"):
            skip = True
            continue
        if tok.split("=", 1)[0] in ("--config", "--out", "--threads"):
            continue
        out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            return _replay(args)
        cfg = _resolve_config(args)
        return _execute(args, cfg, _recorded_argv(argv))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PhysicsError, InconsistentInputError) as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
