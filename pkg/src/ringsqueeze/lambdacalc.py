"""Effective mode area, waveguide nonlinear parameter and ring Kerr coupling.

Mode profiles are sampled on a rectangular (y, z) grid covering the ring
cross-section. The field is given as cylindrical components (e_rho, e_phi, e_z)
and may be unnormalised; all results are ratios that cancel the scale.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import epsilon_0, hbar
from scipy.integrate import trapezoid

from .errors import ConfigError


class Polarization(str, Enum):
    TE = "TE"
    TM = "TM"
    FULL = "full"


@dataclass(frozen=True)
class ModeProfile:
    y: np.ndarray  # (ny,) m
    z: np.ndarray  # (nz,) m
    e_field: np.ndarray  # (3, ny, nz) complex: e_rho, e_phi, e_z
    index_map: np.ndarray  # (ny, nz)
    chi3_mask: np.ndarray  # (ny, nz) in [0, 1]
    group_index_map: np.ndarray | None = None

    def __post_init__(self):
        for name, ax in (("y", self.y), ("z", self.z)):
            if ax.ndim != 1 or ax.size < 2 or not np.all(np.diff(ax) > 0):
                raise ValueError(f"grid axis {name} must be strictly increasing with at least two nodes")
        shape = (self.y.size, self.z.size)
        if self.e_field.shape != (3,) + shape:
            raise ValueError(f"e_field shape {self.e_field.shape} does not match grid {shape}")
        for name, arr in (("index_map", self.index_map), ("chi3_mask", self.chi3_mask), ("group_index_map", self.group_index_map)):
            if arr is not None and arr.shape != shape:
                raise ValueError(f"{name} shape {arr.shape} does not match grid {shape}")
        if not np.all(np.isfinite(self.e_field)):
            raise ValueError("e_field contains non-finite values")
        if np.any(self.chi3_mask < 0) or np.any(self.chi3_mask > 1):
            raise ValueError("chi3_mask must lie in [0, 1]")

    def integrate(self, f: np.ndarray) -> float:
        return float(trapezoid(trapezoid(f, self.z, axis=1), self.y))

    def field_at_origin_angle(self) -> np.ndarray:
        """Cartesian field (x, y, z) at azimuth 0: x along e_phi, y along -e_rho."""
        e_rho, e_phi, e_z = self.e_field
        return np.stack([e_phi, -e_rho, e_z])


def _weight(profile: ModeProfile, n_bar: float | None, ng_bar: float | None) -> np.ndarray:
    """Local (n / n_bar) * (n_g / n_g_bar); unity when no group-index map is given."""
    if profile.group_index_map is None:
        return np.ones_like(profile.index_map, dtype=float)
    inten = np.sum(np.abs(profile.e_field) ** 2, axis=0) * profile.chi3_mask
    norm = profile.integrate(inten)
    if n_bar is None:
        n_bar = profile.integrate(inten * profile.index_map) / norm
    if ng_bar is None:
        ng_bar = profile.integrate(inten * profile.group_index_map) / norm
    return (profile.index_map / n_bar) * (profile.group_index_map / ng_bar)


def effective_area(
    profile: ModeProfile,
    polarization: Polarization | str = Polarization.FULL,
    n_bar: float | None = None,
    ng_bar: float | None = None,
) -> float:
    """Effective nonlinear area (m^2).

    TE and TM use the dominant scalar component (e_rho or e_z) with unit weight.
    The full-vector form contracts an isotropic chi3 tensor,
    chi^{ijkl} = chi/3 (d_ij d_kl + d_ik d_jl + d_il d_jk), with the local
    index/group-index weight in the normalisation when a group-index map is present.
    """
    pol = Polarization(polarization)
    if pol is Polarization.FULL:
        e = profile.field_at_origin_angle()
        mag2 = np.sum(np.abs(e) ** 2, axis=0)
        ee = np.sum(e * e, axis=0)
        quartic = (np.abs(ee) ** 2 + 2.0 * mag2**2) / 3.0 * profile.chi3_mask
        quad = mag2 * _weight(profile, n_bar, ng_bar)
    else:
        comp = profile.e_field[0] if pol is Polarization.TE else profile.e_field[2]
        mag2 = np.abs(comp) ** 2
        quartic = mag2**2
        quad = mag2
    den = profile.integrate(quad)
    num = profile.integrate(quartic)
    if den <= 0 or num <= 0:
        raise ValueError("mode field vanishes on the nonlinear region")
    return den * den / num


def gamma_from_n2(n2: float, omega: float, area: float) -> float:
    """gamma = omega n2 / (c A), 1/(W m)."""
    return omega * n2 / (C_LIGHT * area)


def n2_from_chi3(chi3: float, n_bar: float) -> float:
    return 3.0 * chi3 / (4.0 * n_bar**2 * epsilon_0 * C_LIGHT)


def chi3_from_n2(n2: float, n_bar: float) -> float:
    """Inverse of ``n2_from_chi3``: chi3 = 4 n^2 eps0 c n2 / 3 (m^2/V^2)."""
    return 4.0 * n_bar**2 * epsilon_0 * C_LIGHT * n2 / 3.0


def waveguide_gamma(area: float, omega: float, n_bar: float, chi3: float) -> float:
    """Waveguide nonlinear parameter gamma = 3 omega chi3 / (4 n^2 eps0 c^2 A), 1/(W m)."""
    if area <= 0:
        raise ValueError("area must be positive")
    return 3.0 * omega * chi3 / (4.0 * n_bar**2 * epsilon_0 * C_LIGHT**2 * area)


def lambda_coefficient(gamma: float, omega: float, group_velocity: float, circumference: float) -> float:
    """Ring Kerr coupling Lam = hbar omega v^2 gamma / L (rad/s)."""
    if omega <= 0 or group_velocity <= 0 or circumference <= 0:
        raise ValueError("omega, group velocity and circumference must be positive")
    return hbar * omega * group_velocity**2 * gamma / circumference


# --------------------------------------------------------------------------
# mode file
# --------------------------------------------------------------------------

REQUIRED_COLUMNS = ("y", "z", "e_rho_re", "e_rho_im", "e_phi_re", "e_phi_im", "e_z_re", "e_z_im", "n")


def load_mode_profile(path: str | Path) -> ModeProfile:
    """Read a long-format CSV (one row per grid node) into a ModeProfile.

    Required columns: y, z (metres), e_{rho,phi,z}_{re,im}, n. Optional: ng, chi3.
    Lines starting with '#' are ignored.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [line for line in fh if line.strip() and not line.lstrip().startswith("#")]
    reader = csv.DictReader(rows)
    cols = reader.fieldnames or []
    missing = [c for c in REQUIRED_COLUMNS if c not in cols]
    if missing:
        raise ConfigError("mode_file", f"{path}: missing columns {missing}")
    data = {c: [] for c in cols}
    for rec in reader:
        for c in cols:
            data[c].append(float(rec[c]))
    arr = {c: np.asarray(v) for c, v in data.items()}
    ys = np.unique(arr["y"])
    zs = np.unique(arr["z"])
    if ys.size * zs.size != arr["y"].size:
        raise ConfigError("mode_file", f"{path}: nodes do not form a complete rectangular grid")
    iy = np.searchsorted(ys, arr["y"])
    iz = np.searchsorted(zs, arr["z"])

    def grid(values):
        g = np.full((ys.size, zs.size), np.nan, dtype=values.dtype)
        g[iy, iz] = values
        return g

    field = np.stack(
        [grid(arr[f"e_{k}_re"] + 1j * arr[f"e_{k}_im"]) for k in ("rho", "phi", "z")]
    )
    if np.isnan(field).any():
        raise ConfigError("mode_file", f"{path}: duplicate nodes in grid")
    n = grid(arr["n"])
    chi3 = grid(arr["chi3"]) if "chi3" in arr else np.ones_like(n)
    ng = grid(arr["ng"]) if "ng" in arr else None
    return ModeProfile(ys, zs, field, n, chi3, ng)


def save_mode_profile(profile: ModeProfile, path: str | Path) -> None:
    cols = list(REQUIRED_COLUMNS) + ["chi3"] + (["ng"] if profile.group_index_map is not None else [])
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for a, yv in enumerate(profile.y):
            for b, zv in enumerate(profile.z):
                e = profile.e_field[:, a, b]
                row = [yv, zv, e[0].real, e[0].imag, e[1].real, e[1].imag, e[2].real, e[2].imag]
                row += [profile.index_map[a, b], profile.chi3_mask[a, b]]
                if profile.group_index_map is not None:
                    row.append(profile.group_index_map[a, b])
                w.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class NonlinearSummary:
    area: float
    gamma: float
    lam: float


def summarize(
    profile: ModeProfile,
    omega: float,
    chi3: float,
    n_bar: float,
    group_velocity: float,
    circumference: float,
    polarization: Polarization | str = Polarization.FULL,
) -> NonlinearSummary:
    area = effective_area(profile, polarization, n_bar=n_bar, ng_bar=C_LIGHT / group_velocity)
    gam = waveguide_gamma(area, omega, n_bar, chi3)
    return NonlinearSummary(area, gam, lambda_coefficient(gam, omega, group_velocity, circumference))


def gaussian_profile(w: float, half_width: float, points: int, polarization: str = "TE") -> ModeProfile:
    """Test profile exp(-r^2/w^2) in the chosen component, uniform index 2.0."""
    y = np.linspace(-half_width, half_width, points)
    z = np.linspace(-half_width, half_width, points)
    yy, zz = np.meshgrid(y, z, indexing="ij")
    g = np.exp(-(yy**2 + zz**2) / w**2).astype(complex)
    e = np.zeros((3,) + g.shape, dtype=complex)
    e[0 if polarization == "TE" else 2] = g
    return ModeProfile(y, z, e, np.full(g.shape, 2.0), np.ones(g.shape))

