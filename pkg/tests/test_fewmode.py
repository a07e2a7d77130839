import numpy as np
import pytest
from scipy.integrate import quad

from helpers import build
from nucav.fewmode import (
    FewModeBasis,
    SingularConfiguration,
    build_couplings,
    cavity_couplings,
    effective_scheme_fm,
    empty_reflection,
    fewmode_scheme,
    fewmode_spectrum,
    map_3d_to_1d,
    mirror_cavity,
    mode_overlap,
    nucleus_coupling,
    parse_modes,
    pheno_resonance_trajectory,
    scattering_with_nuclei,
    single_mode_scattering,
    stack_couplings_and_nuclei,
)
from nucav.levelscheme import build_level_scheme
from nucav.materials import Material
from nucav.multilayer import rocking_curve
from nucav.units import wavenumber

E0 = 14412.5
FE = Material("Fe", 7.4293858185e-06, 3.388828143e-07)


def _couplings(marker, theta=4e-3, modes=12):
    return cavity_couplings(marker, E0, theta, modes)


def test_parse_modes_forms():
    assert parse_modes(3) == (1, 2, 3)
    assert parse_modes("4") == (1, 2, 3, 4)
    assert parse_modes("2-5") == (2, 3, 4, 5)
    assert parse_modes("2:4") == (2, 3, 4)
    assert parse_modes("1,3,5") == (1, 3, 5)
    assert parse_modes([7, 2]) == (7, 2)


def test_basis_validation():
    assert FewModeBasis((3, 1, 2), 10.0).modes == (1, 2, 3)
    for modes, length in [((), 1.0), ((0, 1), 1.0), ((1, 1), 1.0), ((1,), 0.0)]:
        with pytest.raises(ValueError):
            FewModeBasis(modes, length)


def test_mode_functions_are_orthonormal():
    basis = FewModeBasis(tuple(range(1, 9)), 28.5)
    x, w = np.polynomial.legendre.leggauss(200)
    x = (x + 1) * basis.length / 2
    w = w * basis.length / 2
    chi = basis.mode_function(x)
    gram = np.einsum("k,kl,km->lm", w, chi, chi)
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-12)


def test_mode_overlap_closed_form():
    basis = FewModeBasis((1, 2, 5), 20.0)
    xi = mode_overlap(basis, 3.0, 11.5)
    for a in range(3):
        for b in range(3):
            f = lambda x: basis.mode_function(np.array(x))[a] * basis.mode_function(np.array(x))[b]  # noqa: E731
            assert xi[a, b] == pytest.approx(quad(f, 3.0, 11.5, epsabs=1e-14)[0], abs=1e-12)
    np.testing.assert_allclose(mode_overlap(basis, 0.0, 20.0), np.eye(3), atol=1e-14)
    np.testing.assert_allclose(mode_overlap(basis, 7.0, 7.0), 0.0, atol=1e-15)


def test_odd_parity_modes_vanish_at_centre():
    basis = FewModeBasis(tuple(range(1, 7)), 28.5)
    chi = basis.mode_function(np.array(14.25))
    np.testing.assert_allclose(chi[1::2], 0.0, atol=1e-15)
    assert np.all(np.abs(chi[::2]) > 0.1)


def test_map_3d_to_1d_matches_high_precision_value():
    n_eff, beta = map_3d_to_1d(FE.index, E0, 4e-3, 28.5)
    assert n_eff == pytest.approx(0.27774195210143042312 + 0.076258308614382504129j, rel=1e-9)
    assert beta == pytest.approx(wavenumber(E0) * 28.5 * np.sin(4e-3), rel=1e-15)
    assert n_eff.imag >= 0


def test_propagator_inverse(marker):
    c = _couplings(marker)
    np.testing.assert_allclose(c.D @ c.Dinv, np.eye(12), atol=1e-11)


def test_frequencies_principal_branch(marker):
    c = _couplings(marker)
    assert np.all(c.omega.real > 0)
    assert np.all(c.omega.imag < 0)


def test_empty_cavity_exact_for_any_mode_count(marker):
    th = np.linspace(1.5e-3, 8.5e-3, 60)
    ref = rocking_curve(marker, E0, th)
    for modes in (1, 3, 20):
        np.testing.assert_allclose(empty_reflection(marker, E0, th, modes), ref, atol=1e-12)


def test_lossless_cavity_conserves_flux():
    lossless = {"Fe": {"delta": 7.4e-6, "beta": 0.0}}
    stack = build([("Fe", 28.5)], materials=lossless, mirror=True)
    th = np.linspace(1.5e-3, 8.5e-3, 40)
    c = cavity_couplings(stack, E0, th, 10)
    np.testing.assert_allclose(np.abs(c.S_bg * c.empty_scattering), 1.0, atol=1e-12)


def test_woodbury_equals_direct_inversion(eit_like_mirror):
    c, g, gdag, sp = stack_couplings_and_nuclei(eit_like_mirror, np.array([3e-3, 4.1e-3]), 15)
    d = np.linspace(-40, 40, 81)
    a = scattering_with_nuclei(c, g, gdag, sp.gamma, d)
    b = scattering_with_nuclei(c, g, gdag, sp.gamma, d, method="direct")
    np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-13)
    with pytest.raises(ValueError):
        scattering_with_nuclei(c, g, gdag, sp.gamma, d, method="other")


def test_single_mode_closed_form(marker):
    c = cavity_couplings(marker, E0, 4e-3, "1")
    sp = marker.layers[2].resonant
    g = nucleus_coupling(c, sp, [14.25], 0.5)
    gdag = nucleus_coupling(c, sp, [14.25], 0.5, adjoint=True)
    d = np.linspace(-30, 30, 121)
    a = np.sum(gdag[:, 0] * g[:, 0])
    np.testing.assert_allclose(
        single_mode_scattering(c, a, sp.gamma, d), scattering_with_nuclei(c, g, gdag, sp.gamma, d), rtol=1e-12
    )


def test_no_nuclei_means_empty_cavity(marker):
    c = _couplings(marker)
    g = np.zeros((1, 12), complex)
    s = scattering_with_nuclei(c, g, g, 1.0, np.linspace(-5, 5, 11))
    np.testing.assert_allclose(s, c.S_bg * c.empty_scattering, atol=1e-15)


def test_sheets_must_be_inside(marker):
    c = _couplings(marker)
    with pytest.raises(ValueError):
        nucleus_coupling(c, marker.layers[2].resonant, [0.0], 0.5)


def test_pole_guard():
    basis = FewModeBasis((1, 2), 10.0)
    beta = 3.0
    n_eff = np.pi / beta  # alpha = pi hits mode 1
    with pytest.raises(SingularConfiguration):
        build_couplings(basis, n_eff, beta)


def test_geometry_requirements(eit1):
    with pytest.raises(ValueError, match="mirror"):
        mirror_cavity(eit1)


def test_superradiance_non_negative(marker):
    th = np.linspace(0.2e-3, 8.5e-3, 60)
    for energy in (E0 - 5000, E0, E0 + 5000):
        fm = fewmode_scheme(marker, th, 20, count=1, energy=energy)
        assert np.all(fm.superradiance >= 0)


def test_scheme_constant_across_the_line(marker):
    th = np.linspace(2e-3, 8e-3, 13)
    base = fewmode_scheme(marker, th, 20, count=1).coupling
    for shift in (-1e-6, 1e-6):
        moved = fewmode_scheme(marker, th, 20, count=1, energy=E0 + shift).coupling
        assert np.abs(moved - base).max() < 1e-6 * np.abs(base).max()


def test_effective_scheme_tracks_green_with_mode_count(marker):
    th = np.array([3e-3, 4.1e-3, 6e-3])
    green = np.array([build_level_scheme(marker, t, 1).coupling[0, 0] for t in th])
    gaps = []
    for modes in (20, 40, 80, 160):
        fm = fewmode_scheme(marker, th, modes, count=1)
        gaps.append(np.abs(fm.coupling[:, 0, 0] + green).max())
    gaps = np.array(gaps)
    # truncation error of the mode sum falls like 1/N
    np.testing.assert_allclose(gaps[:-1] / gaps[1:], 2.0, rtol=0.1)
    assert gaps[-1] < 0.01


def test_effective_scheme_fields(marker):
    c, g, gdag, sp = stack_couplings_and_nuclei(marker, 4e-3, 10, count=2)
    fm = effective_scheme_fm(c, g, gdag, sp.gamma)
    assert fm.coupling.shape == (2, 2) and fm.drive.shape == (2,) and fm.peak.shape == (2, 2)
    np.testing.assert_allclose(fm.coupling, fm.coupling.T, rtol=1e-12)


def test_mode_convergence_of_spectra(marker):
    from nucav.multilayer import nuclear_map

    th = np.linspace(2e-3, 8e-3, 25)
    d = np.linspace(-60, 60, 121)
    ref = np.abs(nuclear_map(marker, th, d)) ** 2
    err = [np.abs(np.abs(fewmode_spectrum(marker, th, d, m)) ** 2 - ref).max() for m in (5, 10, 20, 40)]
    assert all(b < 1.1 * a for a, b in zip(err, err[1:]))
    assert err[-1] < err[0]


def test_thick_slab_reduces_to_sheet_for_thin_layer(marker):
    d = np.linspace(-30, 30, 61)
    sheet = fewmode_spectrum(marker, 4e-3, d, 20, count=1)
    slab = fewmode_spectrum(marker, 4e-3, d, 20, thick=True)
    assert np.abs(np.abs(sheet) ** 2 - np.abs(slab) ** 2).max() < 5e-3


def test_pheno_trajectory():
    assert pheno_resonance_trajectory(4e-3, 4e-3, 14412.5) == pytest.approx(14412.5)
    e = pheno_resonance_trajectory(np.array([2e-3, 8e-3]), 4e-3, 14412.5)
    np.testing.assert_allclose(e, 14412.5 * np.sin(4e-3) / np.sin([2e-3, 8e-3]))


@pytest.fixture(scope="module")
def eit_like_mirror():
    """Two resonant layers with three sheets each inside an iron mirror cavity."""
    from nucav.stack import parse_stack

    doc = {
        "materials": {"Fe": {"delta": 7.4293858185e-06, "beta": 3.388828143e-07}},
        "species": {
            "Fe57": {
                "resonance_energy_eV": 14412.5,
                "linewidth_eV": 4.7e-09,
                "internal_conversion": 8.56,
                "lamb_moessbauer": 0.8,
                "spin_ratio": 2.0,
                "number_density_nm3": 84.9,
                "abundance": 0.95,
            }
        },
        "layers": [
            {"material": "vacuum", "thickness_nm": "semi-infinite"},
            {"material": "Fe", "thickness_nm": 6.0},
            {"material": "Fe", "thickness_nm": 1.0, "resonant": "Fe57"},
            {"material": "Fe", "thickness_nm": 9.0},
            {"material": "Fe", "thickness_nm": 1.0, "resonant": "Fe57"},
            {"material": "Fe", "thickness_nm": 11.5},
            {"material": "mirror", "thickness_nm": "mirror"},
        ],
        "partition": {2: 3, 4: 3},
    }
    return parse_stack(doc)
