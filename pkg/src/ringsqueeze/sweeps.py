"""Parameter studies: power sweeps, process ablation, detuning maps,
constrained symmetric-detuning sweeps and optimal-squeezing searches.

Every grid point is an independent work item. ``workers > 1`` evaluates them in
a process pool; results are always gathered by index so output order does not
depend on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import pipeline, spectrum
from .errors import ConstraintError, PhysicsError
from .model import TWO_PI, ProcessToggles, SystemConfig, watt_to_dbm

DEFAULT_MAP_SPAN = TWO_PI * 300e6
DEFAULT_SYMMETRIC_EDGE = TWO_PI * 0.9e9
CONSTRAINT_RTOL = 1e-3
FOLD_MARGIN = 0.05


def run_indexed(func: Callable, items: Sequence, workers: int = 1) -> list:
    """``[func(x) for x in items]``, optionally in a process pool, in input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunk))


@dataclass(frozen=True)
class PointResult:
    s_min: float
    s_max: float
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    @property
    def squeezing_db(self) -> float:
        return -10.0 * math.log10(self.s_min) if self.ok else math.nan

    @property
    def antisqueezing_db(self) -> float:
        return 10.0 * math.log10(self.s_max) if self.ok else math.nan


def _extremes(cfg: SystemConfig) -> PointResult:
    try:
        smin, smax = pipeline.extremes_at_zero(cfg)
    except PhysicsError as exc:
        return PointResult(math.nan, math.nan, f"{type(exc).__name__}: {exc}")
    return PointResult(smin, smax)


def _at_offsets(cfg: SystemConfig, d1: float, d2: float) -> SystemConfig:
    return cfg.replace(detuning_mode="hot_offset", detunings=(float(d1), float(d2)))


# --------------------------------------------------------------------------
# power sweep
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerRow:
    power_dbm: float
    delta_p1: float
    delta_p2: float
    s_min: float
    s_max: float
    spectrum: spectrum.SpectrumResult | None = field(default=None, repr=False)
    error: str = ""


def _power_point(args) -> PowerRow:
    cfg, dbm, with_spectrum = args
    c = cfg.with_power_dbm(dbm)
    try:
        op = pipeline.operating_point(c)
        res = pipeline.spectrum_at(op) if with_spectrum else None
        zero = pipeline.spectrum_at(op, omegas=np.zeros(1), thetas=())
    except PhysicsError as exc:
        return PowerRow(dbm, math.nan, math.nan, math.nan, math.nan, None, f"{type(exc).__name__}: {exc}")
    return PowerRow(dbm, op.detunings[0], op.detunings[1], float(zero.s_min[0]), float(zero.s_max[0]), res)


def sweep_power(cfg: SystemConfig, powers_dbm: Iterable[float], workers: int = 1, with_spectrum: bool = True) -> list[PowerRow]:
    """Spectra at each total input power with the pumps at the configured hot-cavity offsets."""
    return run_indexed(_power_point, [(cfg, float(p), with_spectrum) for p in powers_dbm], workers)


# --------------------------------------------------------------------------
# process ablation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AblationRow:
    label: str
    toggles: ProcessToggles
    s_min: float
    s_max: float
    spectrum: spectrum.SpectrumResult | None = field(default=None, repr=False)
    error: str = ""


def _ablation_point(args) -> AblationRow:
    cfg, label, tog = args
    c = cfg.replace(toggles=tog)
    try:
        op = pipeline.operating_point(c)
        res = pipeline.spectrum_at(op)
        zero = pipeline.spectrum_at(op, omegas=np.zeros(1), thetas=())
    except PhysicsError as exc:
        return AblationRow(label, tog, math.nan, math.nan, None, f"{type(exc).__name__}: {exc}")
    return AblationRow(label, tog, float(zero.s_min[0]), float(zero.s_max[0]), res)


def ablate_processes(cfg: SystemConfig, combos, workers: int = 1) -> list[AblationRow]:
    """Evaluate each toggle set; ``combos`` maps labels to ProcessToggles (or is a list of them)."""
    if not isinstance(combos, dict):
        combos = {t.label(): t for t in combos}
    for label, tog in combos.items():
        if not tog.dp_sfwm:
            raise ValueError(f"ablation combo {label!r} has DP-SFWM switched off")
    return run_indexed(_ablation_point, [(cfg, k, v) for k, v in combos.items()], workers)


# --------------------------------------------------------------------------
# 2D detuning map
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalOptimum:
    delta_p1: float
    delta_p2: float
    s_min: float
    s_max: float


@dataclass(frozen=True)
class DetuningMap:
    delta_p1: np.ndarray
    delta_p2: np.ndarray
    s_min: np.ndarray  # [i, k] at (delta_p1[i], delta_p2[k]); NaN where the point failed
    s_max: np.ndarray
    errors: list[str]
    optima: list[LocalOptimum]

    @property
    def failures(self) -> int:
        return len(self.errors)

    @property
    def squeezing_db(self) -> np.ndarray:
        return -10.0 * np.log10(self.s_min)


def _map_point(args) -> PointResult:
    cfg, d1, d2 = args
    return _extremes(_at_offsets(cfg, d1, d2))


def _neg_squeezing(cfg: SystemConfig, scale: float) -> Callable[[np.ndarray], float]:
    def f(x):
        r = _extremes(_at_offsets(cfg, x[0] * scale, x[1] * scale))
        return r.s_min if r.ok else 10.0

    return f


def polish(cfg: SystemConfig, d1: float, d2: float, step: float) -> LocalOptimum:
    """Nelder-Mead refinement of a detuning pair (rad/s) starting from a grid point."""
    scale = step
    f = _neg_squeezing(cfg, scale)
    x0 = np.array([d1, d2]) / scale
    simplex = np.array([x0, x0 + [0.5, 0.0], x0 + [0.0, 0.5]])
    res = minimize(
        f, x0, method="Nelder-Mead", options={"initial_simplex": simplex, "xatol": 1e-3, "fatol": 1e-12, "maxiter": 400}
    )
    x = res.x * scale
    r = _extremes(_at_offsets(cfg, x[0], x[1]))
    return LocalOptimum(float(x[0]), float(x[1]), r.s_min, r.s_max)


def _grid_minima(values: np.ndarray) -> list[tuple[int, int]]:
    """Indices of grid points no larger than any of their finite 8-neighbours."""
    ni, nk = values.shape
    out = []
    for i in range(ni):
        for k in range(nk):
            v = values[i, k]
            if not np.isfinite(v):
                continue
            block = values[max(0, i - 1) : i + 2, max(0, k - 1) : k + 2]
            if np.all(~np.isfinite(block) | (block >= v)):
                out.append((i, k))
    return out


def _polish_item(args) -> LocalOptimum:
    cfg, d1, d2, step = args
    return polish(cfg, d1, d2, step)


def map_detuning(
    cfg: SystemConfig,
    delta_p1: np.ndarray | None = None,
    delta_p2: np.ndarray | None = None,
    points: int = 61,
    workers: int = 1,
    refine: bool = True,
) -> DetuningMap:
    """s_min and s_max at W = 0 over a grid of hot-cavity offsets (rad/s)."""
    if delta_p1 is None:
        delta_p1 = np.linspace(-DEFAULT_MAP_SPAN, DEFAULT_MAP_SPAN, points)
    if delta_p2 is None:
        delta_p2 = np.linspace(-DEFAULT_MAP_SPAN, DEFAULT_MAP_SPAN, points)
    delta_p1 = np.asarray(delta_p1, dtype=float)
    delta_p2 = np.asarray(delta_p2, dtype=float)
    items = [(cfg, a, b) for a in delta_p1 for b in delta_p2]
    results = run_indexed(_map_point, items, workers)
    smin = np.array([r.s_min for r in results]).reshape(delta_p1.size, delta_p2.size)
    smax = np.array([r.s_max for r in results]).reshape(delta_p1.size, delta_p2.size)
    errors = [
        f"delta_p1={it[1] / TWO_PI / 1e6:.3f} MHz, delta_p2={it[2] / TWO_PI / 1e6:.3f} MHz: {r.error}"
        for it, r in zip(items, results)
        if not r.ok
    ]
    minima = _grid_minima(smin)
    # interior grid minima only; edge minima mean the optimum lies outside the window
    interior = [(i, k) for i, k in minima if 0 < i < delta_p1.size - 1 and 0 < k < delta_p2.size - 1]
    if refine and interior:
        step = float(min(np.diff(delta_p1).min(), np.diff(delta_p2).min()))
        polished = run_indexed(_polish_item, [(cfg, delta_p1[i], delta_p2[k], step) for i, k in interior], workers)
    else:
        polished = [LocalOptimum(delta_p1[i], delta_p2[k], smin[i, k], smax[i, k]) for i, k in interior]
    optima: list[LocalOptimum] = []
    tol = 0.5 * float(min(np.diff(delta_p1).min(), np.diff(delta_p2).min()))
    for opt in sorted(polished, key=lambda o: o.s_min):
        if all(math.hypot(opt.delta_p1 - o.delta_p1, opt.delta_p2 - o.delta_p2) > tol for o in optima):
            optima.append(opt)
    return DetuningMap(delta_p1, delta_p2, smin, smax, errors, optima)


# --------------------------------------------------------------------------
# best squeezing over the detuning plane
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BestRow:
    power_dbm: float
    label: str
    delta_p1: float
    delta_p2: float
    s_min: float
    s_max: float
    error: str = ""

    @property
    def squeezing_db(self) -> float:
        return -10.0 * math.log10(self.s_min) if not self.error else math.nan

    @property
    def antisqueezing_db(self) -> float:
        return 10.0 * math.log10(self.s_max) if not self.error else math.nan


def best_squeezing(
    cfg: SystemConfig,
    powers_dbm: Iterable[float],
    toggle_sets: dict[str, ProcessToggles],
    points: int = 41,
    span: float = DEFAULT_MAP_SPAN,
    workers: int = 1,
) -> list[BestRow]:
    """Global optimum of s_min over the detuning plane: coarse grid, then polish of every grid minimum."""
    rows = []
    grid = np.linspace(-span, span, points)
    for dbm in powers_dbm:
        for label, tog in toggle_sets.items():
            c = cfg.with_power_dbm(float(dbm)).replace(toggles=tog)
            if c.pump_total_power == 0.0:
                r = _extremes(_at_offsets(c, 0.0, 0.0))
                rows.append(BestRow(float(dbm), label, 0.0, 0.0, r.s_min, r.s_max, r.error))
                continue
            mp = map_detuning(c, grid, grid, workers=workers, refine=True)
            if not mp.optima:
                rows.append(BestRow(float(dbm), label, math.nan, math.nan, math.nan, math.nan, "no interior optimum"))
                continue
            best = mp.optima[0]
            rows.append(BestRow(float(dbm), label, best.delta_p1, best.delta_p2, best.s_min, best.s_max))
    return rows


# --------------------------------------------------------------------------
# constrained symmetric sweep
# --------------------------------------------------------------------------

class ConstraintKind(str, Enum):
    NONE = "none"
    ENERGY_PRODUCT = "fixed_energy_product"
    TOTAL_ENERGY = "fixed_total_energy"
    ANTISQUEEZING = "fixed_antisqueezing"


@dataclass(frozen=True)
class Constraint:
    kind: ConstraintKind
    value: float = 0.0  # J^2, J or dB

    def __post_init__(self):
        object.__setattr__(self, "kind", ConstraintKind(self.kind))
        if self.kind is not ConstraintKind.NONE and not self.value > 0:
            raise ValueError("constraint value must be positive")


@dataclass(frozen=True)
class SymmetricRow:
    delta: float
    power_w: float
    s_min: float
    s_max: float
    photon_ratio: float
    constrained_value: float
    constraint_residual: float
    error: str = ""

    @property
    def power_dbm(self) -> float:
        return watt_to_dbm(self.power_w) if self.power_w > 0 else -math.inf


def _measure(cfg: SystemConfig, kind: ConstraintKind) -> tuple[float, pipeline.OperatingPoint]:
    op = pipeline.operating_point(cfg)
    e1, e2 = op.steady.energies
    if kind is ConstraintKind.ENERGY_PRODUCT:
        return e1 * e2, op
    if kind is ConstraintKind.TOTAL_ENERGY:
        return e1 + e2, op
    res = pipeline.spectrum_at(op, omegas=np.zeros(1), thetas=())
    return 10.0 * math.log10(res.s_max[0]), op


def _failure_power(cfg: SystemConfig, kind, lo: float, hi: float) -> float:
    """Bisect for the smallest power at which the operating point can no longer be solved."""
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        try:
            _measure(cfg.replace(pump_total_power=mid), kind)
            lo = mid
        except PhysicsError:
            hi = mid
        if hi - lo < 1e-6 * hi:
            break
    return hi


def solve_constrained_power(cfg: SystemConfig, constraint: Constraint, p_start: float = 1e-3) -> tuple[float, float]:
    """Total input power (W) meeting the constraint, by bisection; returns (power, achieved value)."""
    kind = constraint.kind
    target = constraint.value
    lo, hi = 0.0, p_start
    limit = math.inf
    # expand the upper end until the target is bracketed or the branch ends
    while True:
        try:
            q, _ = _measure(cfg.replace(pump_total_power=hi), kind)
        except PhysicsError:
            limit = _failure_power(cfg, kind, lo, hi)
            hi = (1.0 - FOLD_MARGIN) * limit
            q, _ = _measure(cfg.replace(pump_total_power=hi), kind)
            if q < target:
                raise ConstraintError(
                    f"constraint {kind.value}={target:.6g} unreachable: branch ends at "
                    f"{watt_to_dbm(limit):.3f} dBm (value {q:.6g} at {1 - FOLD_MARGIN:.0%} of that power)"
                ) from None
            break
        if q >= target:
            break
        lo, hi = hi, 2.0 * hi
        if hi > 1e3:
            raise ConstraintError(f"constraint {kind.value}={target:.6g} not reached below 1 kW")
    q = math.nan
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        q, _ = _measure(cfg.replace(pump_total_power=mid), kind)
        if abs(q - target) <= CONSTRAINT_RTOL * abs(target) * 0.5:
            return mid, q
        if q < target:
            lo = mid
        else:
            hi = mid
    raise ConstraintError(f"bisection on power did not meet {kind.value}={target:.6g} (last {q:.6g})")


def _symmetric_point(args) -> SymmetricRow:
    cfg, delta, constraint = args
    c = _at_offsets(cfg, delta, -delta)
    try:
        if constraint.kind is ConstraintKind.NONE:
            power, achieved = c.pump_total_power, math.nan
        else:
            power, achieved = solve_constrained_power(c, constraint)
        c = c.replace(pump_total_power=power)
        op = pipeline.operating_point(c)
        res = pipeline.spectrum_at(op, omegas=np.zeros(1), thetas=())
        ratio = pipeline.photons_at(op).ratio
    except PhysicsError as exc:
        return SymmetricRow(delta, math.nan, math.nan, math.nan, math.nan, math.nan, math.nan, f"{type(exc).__name__}: {exc}")
    resid = (achieved - constraint.value) / constraint.value if constraint.kind is not ConstraintKind.NONE else 0.0
    return SymmetricRow(delta, power, float(res.s_min[0]), float(res.s_max[0]), ratio, achieved, resid)


def sweep_symmetric(
    cfg: SystemConfig,
    deltas: Iterable[float] | None = None,
    constraint: Constraint = Constraint(ConstraintKind.NONE),
    points: int = 19,
    workers: int = 1,
) -> list[SymmetricRow]:
    """Sweep delta_p1 = -delta_p2 = delta (rad/s), adjusting power to hold the constraint."""
    if deltas is None:
        deltas = np.linspace(0.0, DEFAULT_SYMMETRIC_EDGE, points)
    return run_indexed(_symmetric_point, [(cfg, float(d), constraint) for d in deltas], workers)

