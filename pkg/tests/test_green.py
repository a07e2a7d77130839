import numpy as np
import pytest

from nucav.green import green_s, green_s_transmissive, mode_profile
from nucav.multilayer import StackOptics
from nucav.units import wavenumber

E0 = 14412.5
THETAS = np.array([2.5e-3, 3.55e-3, 4.2e-3, 6e-3])


def _depths(stack):
    return np.linspace(0.3, stack.total_thickness - 0.3, 9)


def test_reciprocity(eit1, marker):
    for stack in (eit1, marker):
        z = _depths(stack)
        g = green_s(stack, E0, THETAS, z, z)
        np.testing.assert_allclose(g, np.swapaxes(g, -1, -2), rtol=1e-12, atol=0)


def test_profile_equals_field_top(eit1, marker):
    for stack in (eit1, marker):
        z = _depths(stack)
        o = StackOptics(stack, E0, THETAS)
        np.testing.assert_allclose(mode_profile(stack, E0, THETAS, z, optics=o), o.field_top(z), rtol=1e-11)


def test_transmissive_form_agrees(eit1):
    z = _depths(eit1)
    np.testing.assert_allclose(green_s_transmissive(eit1, E0, THETAS, z, z), green_s(eit1, E0, THETAS, z, z), rtol=1e-10)


def test_mirror_cannot_be_lit_from_below(marker):
    with pytest.raises(ValueError):
        mode_profile(marker, E0, 3e-3, [1.0], side="bottom")


def test_vacuum_profile_is_a_unit_plane_wave(vacuum):
    z = np.linspace(0, 50, 11)
    assert np.allclose(np.abs(mode_profile(vacuum, E0, 4e-3, z)), 1.0, atol=1e-14)


def test_vacuum_green_is_free_space(vacuum):
    b = wavenumber(E0) * np.sin(4e-3)
    z = np.array([1.0, 7.5, 30.0])
    g = green_s(vacuum, E0, 4e-3, z, z)
    expect = 1j * np.exp(1j * b * np.abs(z[:, None] - z[None, :])) / (2 * b)
    np.testing.assert_allclose(g, expect, rtol=1e-12)


def test_node_at_mirror(marker):
    z = np.array([marker.total_thickness])
    np.testing.assert_allclose(mode_profile(marker, E0, THETAS, z), 0, atol=1e-13)
    np.testing.assert_allclose(green_s(marker, E0, THETAS, z, [14.25]), 0, atol=1e-13)


def test_derivative_jump(eit1):
    # d/dz G(z, z') jumps by -1 across z = z'
    zp, h = 17.3, 1e-5
    g = lambda z: green_s(eit1, E0, 3.6e-3, [z], [zp])[0, 0]  # noqa: E731
    upper = (g(zp + 2 * h) - g(zp + h)) / h
    lower = (g(zp - h) - g(zp - 2 * h)) / h
    assert upper - lower == pytest.approx(-1.0, abs=1e-3)


def test_helmholtz_away_from_source(eit1):
    zp, z, h = 17.3, 18.5, 1e-3
    o = StackOptics(eit1, E0, 3.6e-3)
    b = o.beta[eit1.layer_at(z)]
    vals = green_s(eit1, E0, 3.6e-3, [z - h, z, z + h], [zp], optics=o)[:, 0]
    lap = (vals[0] - 2 * vals[1] + vals[2]) / h**2
    assert abs(lap + b**2 * vals[1]) < 1e-6 * abs(b**2 * vals[1])


def test_continuity_across_interfaces(eit1):
    eps = 1e-9
    zp = [5.0, 16.0]
    for top in eit1.tops[1:-1]:
        g = green_s(eit1, E0, 3.6e-3, [top - eps, top + eps], zp)
        np.testing.assert_allclose(g[0], g[1], atol=1e-6 * np.abs(g).max())


def test_p_polarization_profile_shape(eit1):
    p = mode_profile(eit1, E0, 3.6e-3, [5.0, 10.0], pol="p")
    assert p.shape == (2, 2)
    with pytest.raises(ValueError):
        mode_profile(eit1, E0, 3.6e-3, [5.0], side="middle")
