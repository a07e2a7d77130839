"""Unit conventions.

Everything internal runs in natural units with hbar = c = 1: energies are
quoted in eV, lengths in nm, and a photon energy E maps to the vacuum wave
number k0 = E / (hbar c) in nm^-1.  Nuclear detunings are expressed in units
of the natural linewidth gamma.
"""

import numpy as np

HBAR_C_EV_NM = 197.3269804

DEFAULT_DETUNING_GRID = (-200.0, 200.0, 801)
DEFAULT_ANGLE_GRID_MRAD = (1.0, 10.0, 901)


def wavenumber(energy_ev):
    """Vacuum wave number in nm^-1 for a photon energy in eV."""
    return np.asarray(energy_ev, dtype=float) / HBAR_C_EV_NM


def energy_from_wavenumber(k0):
    return np.asarray(k0, dtype=float) * HBAR_C_EV_NM


def mrad(angle_mrad):
    return np.asarray(angle_mrad, dtype=float) * 1e-3


def to_mrad(angle_rad):
    return np.asarray(angle_rad, dtype=float) * 1e3


def grid(start, stop, count):
    """Inclusive, evenly spaced grid; count >= 2 unless start == stop."""
    count = int(count)
    if count < 1:
        raise ValueError(f"grid count must be >= 1, got {count}")
    if count == 1:
        if start != stop:
            raise ValueError("a one-point grid needs start == stop")
        return np.array([float(start)])
    if not stop > start:
        raise ValueError(f"grid must be increasing, got start={start}, stop={stop}")
    return np.linspace(float(start), float(stop), count)


def check_angle(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta >= np.pi / 2):
        raise ValueError("incidence angle must lie in (0, pi/2) rad")
    return theta


def check_energy(energy_ev):
    energy_ev = np.asarray(energy_ev, dtype=float)
    if np.any(energy_ev <= 0):
        raise ValueError("photon energy must be positive")
    return energy_ev
