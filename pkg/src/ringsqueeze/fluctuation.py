"""Linearised fluctuation dynamics around the CW pump state.

The fluctuation vector is ordered ``[f_m, f_p1, f_s, f_p2, f_n, f_m^+, ..., f_n^+]``
so the conjugate of mode ``J`` sits at ``J + 5``. The drift matrix has the block
form ``[[A, B], [conj(B), conj(A)]]``; every nonlinear entry of ``A`` and ``B``
is listed once in ``TERM_TABLE`` together with the process that owns it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InconsistentInputError
from .model import ModeRates, ProcessToggles, SystemConfig
from .pump import PumpSteadyState

M_, P1, S_, P2, N_ = range(5)
NMODES = 5


@dataclass(frozen=True)
class DetuningParams:
    R: tuple[float, float, float, float, float]
    delta_abs: tuple[float, float]

    def as_array(self) -> np.ndarray:
        return np.array(self.R)


def detuning_params(cfg: SystemConfig, delta_p1: float, delta_p2: float) -> DetuningParams:
    """Rotating-frame detunings of all five fluctuation modes (rad/s)."""
    w = cfg.mode_frequencies
    r_s = 0.5 * (delta_p1 + delta_p2) + 0.5 * (w[P1] + w[P2] - 2 * w[S_])
    r_m = 0.5 * (3 * delta_p1 - delta_p2) + 0.5 * (3 * w[P1] - w[P2] - 2 * w[M_])
    r_n = 0.5 * (3 * delta_p2 - delta_p1) + 0.5 * (3 * w[P2] - w[P1] - 2 * w[N_])
    return DetuningParams((r_m, float(delta_p1), r_s, float(delta_p2), r_n), (float(delta_p1), float(delta_p2)))


# (process, block, row, col, coefficient(F1, F2)) -- the entry gains i*Lam*coefficient.
# Block "A" multiplies f, block "B" multiplies f^+.
TERM_TABLE: tuple[tuple[str, str, int, int, object], ...] = (
    # cross-phase modulation of the sidebands by both pumps
    ("xpm", "A", M_, M_, lambda a, b: 2 * (abs(a) ** 2 + abs(b) ** 2)),
    ("xpm", "A", S_, S_, lambda a, b: 2 * (abs(a) ** 2 + abs(b) ** 2)),
    ("xpm", "A", N_, N_, lambda a, b: 2 * (abs(a) ** 2 + abs(b) ** 2)),
    # pump rows: self terms from SPM, cross terms from XPM
    ("spm", "A", P1, P1, lambda a, b: 2 * abs(a) ** 2),
    ("spm", "A", P2, P2, lambda a, b: 2 * abs(b) ** 2),
    ("spm", "B", P1, P1, lambda a, b: a * a),
    ("spm", "B", P2, P2, lambda a, b: b * b),
    ("xpm", "A", P1, P1, lambda a, b: 2 * abs(b) ** 2),
    ("xpm", "A", P2, P2, lambda a, b: 2 * abs(a) ** 2),
    ("xpm", "A", P1, P2, lambda a, b: 2 * np.conj(b) * a),
    ("xpm", "A", P2, P1, lambda a, b: 2 * np.conj(a) * b),
    ("xpm", "B", P1, P2, lambda a, b: 2 * a * b),
    ("xpm", "B", P2, P1, lambda a, b: 2 * a * b),
    # degenerate-pump SFWM
    ("dp_sfwm", "B", S_, S_, lambda a, b: 2 * a * b),
    # single-pump SFWM
    ("sp_sfwm", "B", S_, M_, lambda a, b: a * a),
    ("sp_sfwm", "B", S_, N_, lambda a, b: b * b),
    ("sp_sfwm", "B", M_, S_, lambda a, b: a * a),
    ("sp_sfwm", "B", N_, S_, lambda a, b: b * b),
    # Bragg-scattering FWM
    ("bs_fwm", "A", S_, M_, lambda a, b: 2 * np.conj(a) * b),
    ("bs_fwm", "A", S_, N_, lambda a, b: 2 * np.conj(b) * a),
    ("bs_fwm", "A", M_, S_, lambda a, b: 2 * np.conj(b) * a),
    ("bs_fwm", "A", N_, S_, lambda a, b: 2 * np.conj(a) * b),
    # hybrid-pump SFWM
    ("hp_sfwm", "B", M_, N_, lambda a, b: 2 * a * b),
    ("hp_sfwm", "B", N_, M_, lambda a, b: 2 * a * b),
)


def process_entries(process: str) -> set[tuple[int, int]]:
    """Positions in the 10x10 matrix (both blocks) touched by ``process``."""
    out = set()
    for proc, block, r, c, _ in TERM_TABLE:
        if proc != process:
            continue
        if block == "A":
            out.update({(r, c), (r + NMODES, c + NMODES)})
        else:
            out.update({(r, c + NMODES), (r + NMODES, c)})
    return out


@dataclass(frozen=True)
class DriftMatrix:
    m: np.ndarray
    gamma_bar: np.ndarray
    toggles_used: ProcessToggles
    R: DetuningParams | None = None

    def __post_init__(self):
        self.m.setflags(write=False)

    @property
    def A(self) -> np.ndarray:
        return self.m[:NMODES, :NMODES]

    @property
    def B(self) -> np.ndarray:
        return self.m[:NMODES, NMODES:]

    def noise_matrix(self) -> np.ndarray:
        """Correlation matrix of the vacuum noise drive: <D_l(t) D_k(t')> = N_lk delta(t - t')."""
        n = np.zeros((2 * NMODES, 2 * NMODES))
        for l in range(NMODES):
            n[l, l + NMODES] = 2.0 * self.gamma_bar[l]
        return n


def assemble(
    F_p1: complex,
    F_p2: complex,
    R,
    gamma_bar,
    lam: float,
    toggles: ProcessToggles,
) -> np.ndarray:
    """Raw 10x10 drift matrix from pump amplitudes and mode detunings."""
    gamma_bar = np.asarray(gamma_bar, dtype=float)
    a = np.diag(-gamma_bar + 1j * np.asarray(R, dtype=float)).astype(complex)
    b = np.zeros((NMODES, NMODES), dtype=complex)
    on = toggles.as_dict()
    for proc, block, r, c, coeff in TERM_TABLE:
        if on[proc]:
            target = a if block == "A" else b
            target[r, c] += 1j * lam * coeff(F_p1, F_p2)
    return np.block([[a, b], [b.conj(), a.conj()]])


def build_drift_matrix(
    steady: PumpSteadyState,
    R: DetuningParams,
    rates: ModeRates,
    lam: float,
    toggles: ProcessToggles,
) -> DriftMatrix:
    if not np.allclose(steady.delta_abs, R.delta_abs, rtol=1e-12, atol=1e-9):
        raise InconsistentInputError(
            f"pump state solved at detunings {steady.delta_abs} rad/s but R built for {R.delta_abs} rad/s"
        )
    m = assemble(steady.F_p1, steady.F_p2, R.R, rates.gamma_bar, lam, toggles)
    return DriftMatrix(m, np.array(rates.gamma_bar), toggles, R)


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    abscissa: float
    margin: float  # -abscissa / gamma_bar_s; positive when stable
    stable: bool


def stability(mtx: DriftMatrix) -> StabilityReport:
    ev = np.linalg.eigvals(mtx.m)
    absc = float(ev.real.max())
    return StabilityReport(ev, absc, -absc / float(mtx.gamma_bar[S_]), absc < 0)
