import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.constants import c as C_LIGHT

from ringsqueeze.errors import ConfigError
from ringsqueeze.lambdacalc import (
    ModeProfile,
    Polarization,
    chi3_from_n2,
    effective_area,
    gamma_from_n2,
    gaussian_profile,
    lambda_coefficient,
    load_mode_profile,
    n2_from_chi3,
    save_mode_profile,
    summarize,
    waveguide_gamma,
)

W = 0.6e-6
OMEGA = 2 * math.pi * C_LIGHT / 1550e-9


def _uniform(y, z, inside):
    e = np.zeros((3, y.size, z.size), complex)
    e[0] = inside.astype(float)
    return ModeProfile(y, z, e, np.full(inside.shape, 2.0), np.ones(inside.shape))


def test_flat_field_over_whole_grid():
    y = np.linspace(0, 2e-6, 11)
    z = np.linspace(0, 0.5e-6, 7)
    prof = _uniform(y, z, np.ones((11, 7), bool))
    for pol in Polarization:
        if pol is Polarization.TM:
            continue
        assert effective_area(prof, pol) == pytest.approx(1e-12, rel=1e-12)


def test_flat_field_on_rectangle():
    y = np.linspace(-2e-6, 2e-6, 801)
    z = np.linspace(-1e-6, 1e-6, 401)
    yy, zz = np.meshgrid(y, z, indexing="ij")
    inside = (np.abs(yy) <= 0.75e-6) & (np.abs(zz) <= 0.4e-6)
    assert effective_area(_uniform(y, z, inside), "TE") == pytest.approx(1.5e-6 * 0.8e-6, rel=1e-2)


@pytest.mark.parametrize("pol", ["TE", "TM"])
def test_gaussian_area(pol):
    prof = gaussian_profile(W, 4 * W, 201, pol)
    assert effective_area(prof, pol) == pytest.approx(math.pi * W**2, rel=5e-3)
    assert effective_area(prof, "full") == pytest.approx(math.pi * W**2, rel=5e-3)


def test_grid_convergence():
    coarse = effective_area(gaussian_profile(W, 4 * W, 61), "TE")
    fine = effective_area(gaussian_profile(W, 4 * W, 121), "TE")
    assert abs(fine / coarse - 1) < 1e-3


@settings(max_examples=30, deadline=None)
@given(
    re=st.floats(-1e3, 1e3).filter(lambda x: abs(x) > 1e-3),
    im=st.floats(-1e3, 1e3),
    pol=st.sampled_from(["TE", "full"]),
)
def test_scale_invariance(re, im, pol):
    prof = gaussian_profile(W, 3 * W, 41)
    scaled = ModeProfile(prof.y, prof.z, prof.e_field * complex(re, im), prof.index_map, prof.chi3_mask)
    a, b = effective_area(prof, pol), effective_area(scaled, pol)
    assert b > 0 and b == pytest.approx(a, rel=1e-10)


def test_te_reduction_of_full_vector():
    prof = gaussian_profile(W, 3 * W, 41)
    yy, zz = np.meshgrid(prof.y, prof.z, indexing="ij")
    e = prof.e_field.copy()
    e[0] *= 1 + 0.3 * np.tanh(yy / W) + 0.2j * zz / W
    skewed = ModeProfile(prof.y, prof.z, e, prof.index_map, prof.chi3_mask)
    assert effective_area(skewed, "full") == pytest.approx(effective_area(skewed, "TE"), rel=1e-12)


def test_mixed_polarisation_has_larger_area():
    prof = gaussian_profile(W, 3 * W, 41)
    e = prof.e_field.copy()
    e[2] = 1j * e[0]  # circular: e.e = 0, so A = 4/(8/3) A0
    mixed = ModeProfile(prof.y, prof.z, e, prof.index_map, prof.chi3_mask)
    assert effective_area(mixed, "full") == pytest.approx(1.5 * effective_area(prof, "full"), rel=1e-12)


def test_chi3_mask_excludes_cladding():
    prof = gaussian_profile(W, 3 * W, 61)
    half = prof.chi3_mask.copy()
    half[prof.y < 0, :] = 0.0
    masked = ModeProfile(prof.y, prof.z, prof.e_field, prof.index_map, half)
    assert effective_area(masked, "full") == pytest.approx(2 * effective_area(prof, "full"), rel=2e-2)


def test_uniform_weights_do_nothing():
    prof = gaussian_profile(W, 3 * W, 41)
    weighted = ModeProfile(prof.y, prof.z, prof.e_field, prof.index_map, prof.chi3_mask, np.full(prof.index_map.shape, 2.1))
    assert effective_area(weighted, "full") == pytest.approx(effective_area(prof, "full"), rel=1e-12)


def test_zero_field_rejected():
    prof = gaussian_profile(W, 3 * W, 11)
    zero = ModeProfile(prof.y, prof.z, np.zeros_like(prof.e_field), prof.index_map, prof.chi3_mask)
    with pytest.raises(ValueError):
        effective_area(zero)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda p: dict(y=p.y[::-1]),
        lambda p: dict(z=np.zeros(p.z.size)),
        lambda p: dict(chi3_mask=p.chi3_mask * 1.5),
        lambda p: dict(e_field=np.where(p.e_field == p.e_field.max(), np.nan, p.e_field)),
        lambda p: dict(index_map=p.index_map[:-1]),
    ],
)
def test_profile_validation(mutate):
    p = gaussian_profile(W, 3 * W, 11)
    kw = dict(y=p.y, z=p.z, e_field=p.e_field, index_map=p.index_map, chi3_mask=p.chi3_mask)
    kw.update(mutate(p))
    with pytest.raises(ValueError):
        ModeProfile(**kw)


def test_gamma_formulas():
    assert waveguide_gamma(1e-12, OMEGA, 2.0, 0.0) == 0.0
    n2 = 2.4e-19
    chi3 = chi3_from_n2(n2, 1.996)
    assert n2_from_chi3(chi3, 1.996) == pytest.approx(n2)
    g = waveguide_gamma(1e-12, OMEGA, 1.996, chi3)
    assert g == pytest.approx(gamma_from_n2(n2, OMEGA, 1e-12), rel=1e-12)
    assert 0.3 < g < 3.0
    assert waveguide_gamma(2e-12, OMEGA, 1.996, chi3) == pytest.approx(g / 2)
    with pytest.raises(ValueError):
        waveguide_gamma(0.0, OMEGA, 1.996, chi3)


def test_lambda_coefficient():
    v = C_LIGHT / 2.1
    length = 2 * math.pi * 113e-6
    assert lambda_coefficient(0.0, OMEGA, v, length) == 0.0
    lam = lambda_coefficient(1.0, OMEGA, v, length)
    assert lambda_coefficient(2.0, OMEGA, v, length) == pytest.approx(2 * lam)
    assert lambda_coefficient(1.0, OMEGA, v, 2 * length) == pytest.approx(lam / 2)
    # a ~1 /(W m) waveguide in a 113 um ring sits at the sub-Hz scale
    assert 0.1 < lam / (2 * math.pi) < 2.0


def test_summary_chain():
    prof = gaussian_profile(W, 4 * W, 81)
    s = summarize(prof, OMEGA, chi3_from_n2(2.4e-19, 2.0), 2.0, C_LIGHT / 2.1, 7e-4, "TE")
    assert s.area == pytest.approx(effective_area(prof, "TE"))
    assert s.gamma == pytest.approx(gamma_from_n2(2.4e-19, OMEGA, s.area))
    assert s.lam == pytest.approx(lambda_coefficient(s.gamma, OMEGA, C_LIGHT / 2.1, 7e-4))


def test_mode_file_round_trip(tmp_path):
    p = gaussian_profile(W, 3 * W, 9)
    e = p.e_field.copy()
    e[1] = 0.1j * e[0]
    prof = ModeProfile(p.y, p.z, e, p.index_map, p.chi3_mask * 0.5, np.full(p.index_map.shape, 2.1))
    path = tmp_path / "mode.csv"
    save_mode_profile(prof, path)
    back = load_mode_profile(path)
    for name in ("y", "z", "e_field", "index_map", "chi3_mask", "group_index_map"):
        assert np.array_equal(getattr(back, name), getattr(prof, name))


def test_mode_file_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("y,z,e_rho_re\n0,0,1\n")
    with pytest.raises(ConfigError):
        load_mode_profile(bad)
    holes = tmp_path / "holes.csv"
    cols = "y,z,e_rho_re,e_rho_im,e_phi_re,e_phi_im,e_z_re,e_z_im,n"
    holes.write_text(cols + "\n0,0,1,0,0,0,0,0,2\n1,0,1,0,0,0,0,0,2\n0,1,1,0,0,0,0,0,2\n")
    with pytest.raises(ConfigError):
        load_mode_profile(holes)
