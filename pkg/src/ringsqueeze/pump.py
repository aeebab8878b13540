"""Classical CW steady state of the two pump resonances.

The pump amplitudes F obey

    dF_j/dt = -(G_j - i*Lam*(|F_j|^2 + 2|F_k|^2) - i*D_j) F_j - i*conj(g_j)*C_j

with SPM contributing the ``|F_j|^2`` term and XPM the ``2|F_k|^2`` term.
Steady states are tracked by continuation in power from F = 0, so the branch
returned is always the one connected to the empty cavity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar

from . import kernels
from .errors import ConvergenceError, FoldError
from .model import PUMPS, ModeRates, SystemConfig

NEWTON_TOL = 1e-12
MAX_HALVINGS = 40
MAX_NEWTON_ITER = 60
HOT_RELAXATION = 0.5
HOT_TOL = 1e-6


@dataclass(frozen=True)
class PumpSteadyState:
    F_p1: complex
    F_p2: complex
    delta_abs: tuple[float, float]
    powers: tuple[float, float]
    spm_shift_U: float
    energies: tuple[float, float]
    stable: bool
    residual: float = 0.0

    @property
    def amplitudes(self) -> tuple[complex, complex]:
        return self.F_p1, self.F_p2

    @property
    def photon_numbers(self) -> tuple[float, float]:
        return abs(self.F_p1) ** 2, abs(self.F_p2) ** 2


@dataclass(frozen=True)
class BranchPoint:
    power: float
    F_p1: complex
    F_p2: complex
    stable: bool


@dataclass(frozen=True)
class BranchRecord:
    points: list[BranchPoint]
    fold_power: float | None
    message: str = ""

    @property
    def folded(self) -> bool:
        return self.fold_power is not None


def drive_amplitude(power: float, mode: int, rates: ModeRates, cfg: SystemConfig) -> float:
    """Incident photon-flux amplitude C_L = sqrt(P / (v_L hbar omega_L))."""
    if power < 0:
        raise ValueError("power must be non-negative")
    return math.sqrt(power / (cfg.group_velocity_channel[mode] * hbar * cfg.mode_frequencies[mode]))


def _drives(cfg: SystemConfig, rates: ModeRates, p1: float, p2: float) -> np.ndarray:
    """conj(gamma_L) * C_L for both pumps (units sqrt(photons)/s)."""
    out = np.empty(2, dtype=complex)
    for k, (j, p) in enumerate(zip(PUMPS, (p1, p2))):
        v = cfg.group_velocity_channel[j]
        out[k] = rates.coupling(j, v).conjugate() * drive_amplitude(p, j, rates, cfg)
    return out


def _nonlinear_coeffs(cfg: SystemConfig) -> tuple[float, float]:
    lam = cfg.lambda_coeff
    return lam * cfg.toggles.spm, lam * cfg.toggles.xpm


def kerr_shifts(cfg: SystemConfig, n1: float, n2: float) -> tuple[float, float]:
    """Nonlinear resonance shifts Lam*(|F_self|^2 + 2|F_other|^2), toggles applied."""
    ls, lx = _nonlinear_coeffs(cfg)
    return ls * n1 + 2.0 * lx * n2, ls * n2 + 2.0 * lx * n1


class _Scaled:
    """Dimensionless form of the pump equations for one operating point."""

    def __init__(self, cfg, rates, d1, d2, drives):
        g = np.array([rates.gamma_bar[PUMPS[0]], rates.gamma_bar[PUMPS[1]]])
        self.t = g.min()
        dmax = float(np.abs(drives).max())
        self.a = dmax / self.t if dmax > 0 else 1.0
        ls, lx = _nonlinear_coeffs(cfg)
        self.gam = g / self.t
        self.delta = np.array([d1, d2]) / self.t
        self.lam_spm = ls * self.a**2 / self.t
        self.lam_xpm = lx * self.a**2 / self.t
        self.drives = drives / (self.t * self.a)

    def newton(self, x0, scale):
        d = self.drives * math.sqrt(scale)
        return kernels.pump_newton(
            np.ascontiguousarray(x0, dtype=float),
            self.gam,
            self.delta,
            np.ascontiguousarray(d.real),
            np.ascontiguousarray(d.imag),
            self.lam_spm,
            self.lam_xpm,
            NEWTON_TOL,
            MAX_NEWTON_ITER,
            MAX_HALVINGS,
        )

    def linear_guess(self, scale):
        d = self.drives * math.sqrt(scale)
        f = -1j * d / (self.gam - 1j * self.delta)
        return np.array([f[0].real, f[0].imag, f[1].real, f[1].imag])

    def jacobian_eigs(self, x):
        _, jac = kernels._pump_residual(x, self.gam, self.delta, np.zeros(2), np.zeros(2), self.lam_spm, self.lam_xpm)
        return np.linalg.eigvals(jac) * self.t


def _continue(sc: _Scaled, total_power: float):
    """Walk the power scale from 0 to 1; return (x, residual, det) at scale 1.

    Raises FoldError when the determinant of the Jacobian changes sign or the
    corrector fails as the step shrinks (a turning point of the branch).
    """
    x = np.zeros(4)
    det_prev = float(np.prod(sc.gam**2 + sc.delta**2))
    s, ds = 0.0, 0.25
    res = 0.0
    while s < 1.0:
        s_new = min(1.0, s + ds)
        guess = x * math.sqrt(s_new / s) if s > 0 else sc.linear_guess(s_new)
        xn, status, res, iters, det = sc.newton(guess, s_new)
        jump = np.linalg.norm(xn - guess) / max(np.linalg.norm(xn), 1e-300)
        ok = status == kernels.NEWTON_CONVERGED and det * det_prev > 0 and (iters <= 12 and jump < 0.2)
        if ok:
            x, s, det_prev = xn, s_new, det
            if iters <= 4:
                ds = min(2.0 * ds, 1.0)
            continue
        ds *= 0.5
        if ds < 1e-7:
            raise FoldError(
                f"pump branch turns at {s * total_power * 1e3:.6g} mW total input power "
                f"(continuation cannot proceed; last residual {res:.3g})",
                critical_power=s * total_power,
            )
    return x, res, det_prev


def solve_steady_state(
    cfg: SystemConfig, rates: ModeRates, delta_p1: float, delta_p2: float, p1: float, p2: float
) -> PumpSteadyState:
    """Steady pump amplitudes at absolute detunings (rad/s) and powers (W)."""
    drives = _drives(cfg, rates, p1, p2)
    if p1 == 0 and p2 == 0:
        return _make_state(cfg, 0j, 0j, (delta_p1, delta_p2), (p1, p2), True, 0.0)
    sc = _Scaled(cfg, rates, delta_p1, delta_p2, drives)
    x, res, _ = _continue(sc, p1 + p2)
    if not res < NEWTON_TOL:
        raise ConvergenceError(f"pump Newton did not converge (relative residual {res:.3g})", residual=res)
    stable = bool(np.all(sc.jacobian_eigs(x).real < 0))
    f1 = complex(x[0], x[1]) * sc.a
    f2 = complex(x[2], x[3]) * sc.a
    return _make_state(cfg, f1, f2, (delta_p1, delta_p2), (p1, p2), stable, res)


def _make_state(cfg, f1, f2, deltas, powers, stable, res) -> PumpSteadyState:
    w = cfg.mode_frequencies
    n1, n2 = abs(f1) ** 2, abs(f2) ** 2
    return PumpSteadyState(
        F_p1=f1,
        F_p2=f2,
        delta_abs=(float(deltas[0]), float(deltas[1])),
        powers=(float(powers[0]), float(powers[1])),
        spm_shift_U=-cfg.lambda_coeff * n1,
        energies=(hbar * w[PUMPS[0]] * n1, hbar * w[PUMPS[1]] * n2),
        stable=stable,
        residual=float(res),
    )


def _hot_fixed_point(cfg, rates, offsets, p1, p2) -> tuple[tuple[float, float], PumpSteadyState]:
    """Self-consistent D_j = offset_j - Lam*(|F_j|^2 + 2|F_k|^2).

    Seeded with the exact solution F_j = -i*conj(g_j)C_j / (G_j - i*offset_j), then
    iterated (relaxation 0.5) through ``solve_steady_state`` so the result is
    verified to lie on the branch connected to zero power.
    """
    drives = _drives(cfg, rates, p1, p2)
    g = np.array([rates.gamma_bar[j] for j in PUMPS])
    off = np.asarray(offsets, dtype=float)
    f = -1j * drives / (g - 1j * off)
    sh = np.array(kerr_shifts(cfg, abs(f[0]) ** 2, abs(f[1]) ** 2))
    delta = off - sh
    trace = []
    scale = max(float(np.abs(delta).max()), 1e-3 * float(g.min()))
    for _ in range(200):
        st = solve_steady_state(cfg, rates, delta[0], delta[1], p1, p2)
        target = off - np.array(kerr_shifts(cfg, *st.photon_numbers))
        err = float(np.abs(target - delta).max())
        trace.append(err)
        if err <= HOT_TOL * scale:
            return (float(delta[0]), float(delta[1])), st
        delta = (1.0 - HOT_RELAXATION) * delta + HOT_RELAXATION * target
    raise ConvergenceError("hot-resonance self-consistency did not converge", residual=trace[-1], trace=trace)


def find_hot_detuning(cfg: SystemConfig, rates: ModeRates, p1: float, p2: float) -> tuple[float, float]:
    """Absolute pump detunings that sit exactly on the hot-cavity resonances."""
    return _hot_fixed_point(cfg, rates, (0.0, 0.0), p1, p2)[0]


def resolve_operating_point(cfg: SystemConfig, rates: ModeRates) -> tuple[tuple[float, float], PumpSteadyState]:
    """Absolute detunings for ``cfg`` together with the matching pump steady state."""
    p1, p2 = cfg.pump_powers
    if cfg.detuning_mode == "absolute":
        d1, d2 = cfg.detunings
        return (d1, d2), solve_steady_state(cfg, rates, d1, d2, p1, p2)
    return _hot_fixed_point(cfg, rates, cfg.detunings, p1, p2)


def resolve_detunings(cfg: SystemConfig, rates: ModeRates) -> tuple[float, float]:
    return resolve_operating_point(cfg, rates)[0]


def continuation_scan(
    cfg: SystemConfig,
    rates: ModeRates,
    powers,
    delta_p1: float | None = None,
    delta_p2: float | None = None,
) -> BranchRecord:
    """Track the zero-connected branch over a monotone grid of total powers (W).

    Detunings default to the config's values in absolute mode, or to the hot
    detunings at the largest scanned power otherwise. Never raises on a fold:
    the first failing power is reported in ``fold_power``.
    """
    powers = [float(p) for p in powers]
    if any(b < a for a, b in zip(powers, powers[1:])) or (powers and powers[0] < 0):
        raise ValueError("power grid must be non-negative and monotone")
    split = cfg.pump_split
    if delta_p1 is None or delta_p2 is None:
        if cfg.detuning_mode == "absolute":
            delta_p1, delta_p2 = cfg.detunings
        else:
            pmax = powers[-1] if powers else 0.0
            delta_p1, delta_p2 = find_hot_detuning(cfg, rates, pmax * split, pmax * (1 - split))
    pts: list[BranchPoint] = []
    for p in powers:
        try:
            st = solve_steady_state(cfg, rates, delta_p1, delta_p2, p * split, p * (1 - split))
        except FoldError as exc:
            return BranchRecord(pts, exc.critical_power, str(exc))
        except ConvergenceError as exc:
            return BranchRecord(pts, p, str(exc))
        pts.append(BranchPoint(p, st.F_p1, st.F_p2, st.stable))
        if not st.stable:
            return BranchRecord(pts, p, "pump subsystem unstable")
    return BranchRecord(pts, None)
