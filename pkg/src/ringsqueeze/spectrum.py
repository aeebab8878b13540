"""Output quadrature-noise spectra and intracavity photon numbers.

The homodyne spectrum of resonance ``J`` is written as

    S(W, theta) = C0(W) + 2 Re[C2(W) exp(-2i theta)]

with shot noise normalised to 1, so the extremes over theta are C0 -+ 2|C2|.
Three independent evaluation routes are provided:

* ``squeezing_spectrum``: sums over the eigen-decomposition of the drift matrix,
* ``resolvent_spectrum``: steady covariance from a Sylvester solve plus the
  resolvent (iW - M)^-1,
* ``time_domain_oracle``: numerical integration of the Green matrix and its
  Fourier integrals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_sylvester

from . import kernels
from .errors import IllConditionedError, SettlingError, UnstableError
from .fluctuation import NMODES, DriftMatrix, stability
from .model import MODE_INDEX, MODES, PUMPS, SIDEBANDS, ModeRates

COND_LIMIT = 1e10
RECON_TOL = 1e-10


@dataclass(frozen=True)
class EigenSystem:
    """Eigen-triple of M restricted to the invariant subspace of ``modes``.

    Rows/columns are ordered ``[f_J for J in modes] + [f_J^+ for J in modes]``.
    """

    lambdas: np.ndarray
    V: np.ndarray
    V_inv: np.ndarray
    condition_number: float
    reconstruction_error: float
    gamma_bar: np.ndarray
    modes: tuple[int, ...]
    source: DriftMatrix = field(repr=False)

    def local(self, j: int) -> int:
        return self.modes.index(j)


@dataclass(frozen=True)
class SpectrumResult:
    omega_grid: np.ndarray
    thetas: np.ndarray
    s_theta: np.ndarray  # shape (len(thetas), len(omega_grid))
    s_min: np.ndarray
    s_max: np.ndarray
    theta_opt: np.ndarray
    mode: str
    c0: np.ndarray = field(repr=False)
    c2: np.ndarray = field(repr=False)

    @property
    def squeezing_db(self) -> np.ndarray:
        """Squeezing below shot noise in dB (positive numbers mean squeezed)."""
        return -to_db(self.s_min)

    @property
    def antisqueezing_db(self) -> np.ndarray:
        return to_db(self.s_max)


@dataclass(frozen=True)
class PhotonNumbers:
    n: np.ndarray
    ratio: float  # (n_m + n_n) / n_s

    def as_dict(self) -> dict[str, float]:
        return {name: float(v) for name, v in zip(MODES, self.n)}


def to_db(s) -> np.ndarray:
    return 10.0 * np.log10(np.asarray(s, dtype=float))


def mode_index(mode) -> int:
    if isinstance(mode, str):
        try:
            return MODE_INDEX[mode]
        except KeyError:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}") from None
    j = int(mode)
    if not 0 <= j < NMODES:
        raise ValueError(f"mode index {j} out of range")
    return j


def _require_stable(mtx: DriftMatrix) -> None:
    rep = stability(mtx)
    if not rep.stable:
        raise UnstableError(
            f"drift matrix unstable: spectral abscissa {rep.abscissa:.6g} rad/s "
            f"({-rep.margin:.4g} x Gamma_s); operating point is above threshold",
            abscissa=rep.abscissa,
        )


def _block_indices(modes) -> list[int]:
    return list(modes) + [j + NMODES for j in modes]


def eigendecompose(mtx: DriftMatrix, modes=SIDEBANDS) -> EigenSystem:
    """Diagonalise the invariant block of M spanned by ``modes`` (sidebands or pumps).

    The pump and sideband blocks never couple, so each can be handled alone;
    this matters because the pump block is defective exactly on the hot resonance.
    """
    modes = tuple(sorted(mode_index(j) for j in modes))
    if set(modes) not in (set(SIDEBANDS), set(PUMPS), set(range(NMODES))):
        raise ValueError(f"modes {modes} do not span an invariant block")
    _require_stable(mtx)
    idx = _block_indices(modes)
    sub = mtx.m[np.ix_(idx, idx)]
    lam, V = np.linalg.eig(sub)
    cond = float(np.linalg.cond(V))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(
            f"eigenvector matrix of block {[MODES[j] for j in modes]} has condition number {cond:.3g} "
            f"(limit {COND_LIMIT:.0e})",
            cond,
        )
    V_inv = np.linalg.inv(V)
    recon = V @ np.diag(lam) @ V_inv
    err = float(np.linalg.norm(recon - sub) / np.linalg.norm(sub))
    if err > RECON_TOL:
        warnings.warn(f"eigen reconstruction residual {err:.2e} exceeds {RECON_TOL:.0e}", RuntimeWarning, stacklevel=2)
    return EigenSystem(lam, V, V_inv, cond, err, np.array(mtx.gamma_bar)[list(modes)], modes, mtx)


def block_of(j: int) -> tuple[int, ...]:
    return PUMPS if j in PUMPS else SIDEBANDS


def coefficient_A(lam_i: complex, lam_j: complex, omega: float) -> complex:
    """4 lam_i / ((lam_i + lam_j)(lam_i^2 + W^2)): frequency kernel of the eigen-sum."""
    s = lam_i + lam_j
    d = lam_i * lam_i + omega * omega
    scale = max(abs(lam_i), abs(lam_j), abs(omega), 1e-300)
    if abs(s) < 1e-14 * scale or abs(d) < 1e-14 * scale * scale:
        raise ZeroDivisionError(f"coefficient_A singular at lam_i={lam_i}, lam_j={lam_j}, W={omega}")
    return 4.0 * lam_i / (s * d)


def _kernel_weights(eig: EigenSystem) -> np.ndarray:
    # K_ab = sum_m Gamma_m V^-1_{a,m} V^-1_{b,m+5}
    vi = eig.V_inv
    h = len(eig.modes)
    return (vi[:, :h] * eig.gamma_bar) @ vi[:, h:].T


def _channel_factors(rates: ModeRates, j: int) -> tuple[float, complex]:
    kappa = float(rates.kappa_channel[j])
    return kappa, kappa * np.exp(2j * rates.coupling_phase[j])


def _assemble(omegas, thetas, c0, c2, mode: str) -> SpectrumResult:
    if np.any(np.abs(c0.imag) > 1e-9 * np.maximum(1.0, np.abs(c0.real))):
        raise ArithmeticError("spectrum has a non-negligible imaginary part")
    c0 = c0.real
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    s_theta = c0[None, :] + 2.0 * np.real(c2[None, :] * np.exp(-2j * thetas[:, None]))
    mag = np.abs(c2)
    # S is smallest where 2 theta - arg(C2) = pi
    theta_opt = np.mod(0.5 * (np.angle(c2) + np.pi), np.pi)
    return SpectrumResult(
        omega_grid=np.asarray(omegas, dtype=float),
        thetas=thetas,
        s_theta=s_theta,
        s_min=c0 - 2.0 * mag,
        s_max=c0 + 2.0 * mag,
        theta_opt=theta_opt,
        mode=mode,
        c0=c0,
        c2=c2,
    )


def squeezing_spectrum(eig: EigenSystem, rates: ModeRates, mode="s", thetas=(), omegas=(0.0,)) -> SpectrumResult:
    """Eigen-sum evaluation of S_J(W, theta) on an angular-frequency grid (rad/s)."""
    j = mode_index(mode)
    if j not in eig.modes:
        raise ValueError(f"mode {MODES[j]} is not in the decomposed block {[MODES[k] for k in eig.modes]}")
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    K = _kernel_weights(eig)
    t1, t0, _ = kernels.spectrum_sums(eig.lambdas, eig.V, K, eig.local(j), np.ascontiguousarray(omegas))
    kappa, g2 = _channel_factors(rates, j)
    c0 = 1.0 + kappa * t0
    c2 = -g2 * t1
    return _assemble(omegas, thetas, c0, c2, MODES[j])


def photon_numbers(eig: EigenSystem) -> PhotonNumbers:
    """Steady intracavity fluctuation photon numbers for all five modes.

    Modes in the decomposed block use the eigen-sum; the remaining block (usually
    the pumps, which may be defective) is taken from the steady covariance.
    """
    n = np.empty(NMODES)
    local = kernels.photon_sums(eig.lambdas, eig.V, _kernel_weights(eig))
    rest = [j for j in range(NMODES) if j not in eig.modes]
    if rest:
        sigma = steady_covariance(eig.source)
        for j in rest:
            n[j] = sigma[j + NMODES, j].real
    for k, j in enumerate(eig.modes):
        n[j] = local[k].real
    scale = max(1.0, float(np.abs(n).max()))
    if np.any(n < -1e-9 * scale):
        raise ArithmeticError(f"negative photon number {n.min():.3g}")
    n = np.clip(n, 0.0, None)
    ratio = (n[0] + n[4]) / n[2] if n[2] > 0 else float("nan")
    return PhotonNumbers(n, float(ratio))


# --------------------------------------------------------------------------
# eigen-free routes
# --------------------------------------------------------------------------

def steady_covariance(mtx: DriftMatrix) -> np.ndarray:
    """Sigma with Sigma_ik = <f_i f_k> in steady state: M Sigma + Sigma M^T + N = 0."""
    return solve_sylvester(mtx.m, mtx.m.T, -mtx.noise_matrix())


def _spectrum_from_transfer(tp, tm, sigma, rates, j, thetas, omegas):
    c0 = np.empty(len(omegas), dtype=complex)
    c2 = np.empty(len(omegas), dtype=complex)
    kappa, g2 = _channel_factors(rates, j)
    for k in range(len(omegas)):
        t = tp[k] + tm[k]
        g = (t @ sigma)[j, j]
        c = (t @ sigma.T)[j, j + NMODES] + (t @ sigma)[j + NMODES, j]
        c0[k] = 1.0 + kappa * c
        c2[k] = -g2 * g
    return _assemble(omegas, thetas, c0, c2, MODES[j])


def resolvent_spectrum(mtx: DriftMatrix, rates: ModeRates, mode="s", thetas=(), omegas=(0.0,)) -> SpectrumResult:
    """Same quantity as ``squeezing_spectrum`` without diagonalising M."""
    _require_stable(mtx)
    j = mode_index(mode)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    sigma = steady_covariance(mtx)
    eye = np.eye(2 * NMODES)
    tp = [np.linalg.inv(1j * w * eye - mtx.m) for w in omegas]
    tm = [np.linalg.inv(-1j * w * eye - mtx.m) for w in omegas]
    return _spectrum_from_transfer(tp, tm, sigma, rates, j, thetas, omegas)


def spectrum_for(mtx: DriftMatrix, rates: ModeRates, mode="s", thetas=(), omegas=(0.0,)) -> SpectrumResult:
    """Eigen-sum spectrum, falling back to the resolvent route for near-defective M."""
    try:
        eig = eigendecompose(mtx, block_of(mode_index(mode)))
    except IllConditionedError as exc:
        warnings.warn(f"{exc}; using resolvent evaluation", RuntimeWarning, stacklevel=2)
        return resolvent_spectrum(mtx, rates, mode, thetas, omegas)
    return squeezing_spectrum(eig, rates, mode, thetas, omegas)


def time_domain_oracle(
    mtx: DriftMatrix,
    rates: ModeRates,
    t_settle: float,
    omegas=(0.0,),
    thetas=(),
    mode="s",
    rtol: float = 1e-10,
) -> SpectrumResult:
    """Spectrum from direct integration of dG/dt = M G over [0, t_settle] (seconds).

    The state carries G itself, the covariance integral of G N G^T, and the
    Fourier integrals of G at +-W. Raises SettlingError if G has not decayed
    below 1e-8 by the end of the window.
    """
    _require_stable(mtx)
    j = mode_index(mode)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    n = 2 * NMODES
    nn = n * n
    nw = len(omegas)
    scale = float(np.max(mtx.gamma_bar))
    m = mtx.m / scale
    noise = mtx.noise_matrix() / scale
    w = omegas / scale

    def rhs(u, y):
        g = y[:nn].reshape(n, n)
        dy = np.empty_like(y)
        dy[:nn] = (m @ g).ravel()
        dy[nn : 2 * nn] = (g @ noise @ g.T).ravel()
        off = 2 * nn
        for k in range(nw):
            dy[off : off + nn] = np.exp(-1j * w[k] * u) * y[:nn]
            dy[off + nn : off + 2 * nn] = np.exp(1j * w[k] * u) * y[:nn]
            off += 2 * nn
        return dy

    y0 = np.zeros(2 * nn + 2 * nn * nw, dtype=complex)
    y0[:nn] = np.eye(n).ravel()
    sol = solve_ivp(rhs, (0.0, t_settle * scale), y0, method="DOP853", rtol=rtol, atol=1e-14)
    if not sol.success:
        raise SettlingError(f"time integration failed: {sol.message}", remaining=float("nan"))
    y = sol.y[:, -1]
    remaining = float(np.abs(y[:nn]).max())
    if remaining > 1e-8:
        raise SettlingError(
            f"Green matrix decayed only to {remaining:.3g} after {t_settle:.3g} s; lengthen the window",
            remaining=remaining,
        )
    sigma = y[nn : 2 * nn].reshape(n, n)
    tp, tm = [], []
    off = 2 * nn
    for _ in range(nw):
        tp.append(y[off : off + nn].reshape(n, n) / scale)
        tm.append(y[off + nn : off + 2 * nn].reshape(n, n) / scale)
        off += 2 * nn
    return _spectrum_from_transfer(tp, tm, sigma, rates, j, thetas, omegas)
