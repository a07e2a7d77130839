"""Effective nuclear level scheme from the stack Green's function.

Each sub-ensemble l is a sheet of resonant nuclei at depth z_l with areal
density rho*f_LM*t_l.  With a_l = k0 |d| sqrt(rho f_LM t_l) the collective
couplings are
    C_ll' = a_l a_l' G(z_l, z_l') / gamma          (linewidth units),
shifts Re C, collective decay rates 2 Im C, and the drive is a_l E_in(z_l).
In the linear regime the coherences obey
    [(Delta + i/2) 1 + C] sigma = -drive / gamma,
and the reflected field picks up sum_l G(0, z_l) a_l sigma_l.
"""

from dataclasses import dataclass

import numpy as np

from .green import green_s
from .materials import effective_dipole_moment_sq
from .multilayer import StackOptics, resonance_energy


@dataclass(frozen=True)
class LevelScheme:
    ensembles: tuple
    coupling: np.ndarray  # complex (L, L), linewidth units
    drive: np.ndarray  # unit-norm, phase fixed by the largest component
    energy: float
    theta: float
    drive_raw: np.ndarray  # a_l E_in(z_l) for unit input amplitude
    emission: np.ndarray  # G(0, z_l) a_l
    empty_reflection: complex
    gamma: float  # linewidth, nm^-1

    @property
    def shifts(self):
        return self.coupling.real

    @property
    def decay_rates(self):
        return 2.0 * self.coupling.imag


def _collective_amplitudes(ensembles):
    amps = []
    for e in ensembles:
        sp = e.species
        amps.append(sp.k0 * np.sqrt(effective_dipole_moment_sq(sp) * sp.resonant_density * sp.lamb_moessbauer * e.thickness))
    return np.array(amps)


def fix_gauge(vector):
    """Unit-normalize and rotate so the largest-magnitude entry is real positive."""
    vector = np.asarray(vector, dtype=complex)
    norm = np.linalg.norm(vector)
    if norm == 0:
        return vector
    k = int(np.argmax(np.abs(vector)))
    return vector / norm * np.exp(-1j * np.angle(vector[k]))


def build_level_scheme(stack, theta, count=None, energy=None):
    """Level scheme at one incidence angle, frozen at the resonance energy."""
    ensembles = tuple(stack.ensembles(count))
    if not ensembles:
        raise ValueError("the stack has no resonant layers")
    energy = resonance_energy(stack) if energy is None else energy
    gammas = {e.species.gamma for e in ensembles}
    if len(gammas) != 1:
        raise ValueError("all ensembles must share one linewidth")
    gamma = gammas.pop()
    optics = StackOptics(stack, energy, theta)
    z = np.array([e.depth for e in ensembles])
    a = _collective_amplitudes(ensembles)
    g = green_s(stack, energy, theta, z, z, optics=optics)
    coupling = a[:, None] * a[None, :] * g / gamma
    e_in = optics.field_top(z)
    drive_raw = a * e_in
    emission = 1j / (2.0 * optics.beta[0]) * e_in * a
    return LevelScheme(
        ensembles=ensembles,
        coupling=coupling,
        drive=fix_gauge(drive_raw),
        energy=float(energy),
        theta=float(theta),
        drive_raw=drive_raw,
        emission=emission,
        empty_reflection=complex(optics.reflection),
        gamma=gamma,
    )


def linear_response(scheme, detuning, input_amplitude=1.0):
    """Coherences sigma_l(Delta), shape (len(detuning), L)."""
    detuning = np.atleast_1d(np.asarray(detuning, dtype=float))
    n = len(scheme.ensembles)
    m = (detuning[:, None, None] + 0.5j) * np.eye(n) + scheme.coupling
    rhs = -input_amplitude * scheme.drive_raw / scheme.gamma
    return np.linalg.solve(m, np.broadcast_to(rhs, (len(detuning), n))[..., None])[..., 0]


def reconstruct_reflection(scheme, detuning, input_amplitude=1.0):
    """Reflection amplitude r(Delta) from the empty cavity plus nuclear re-emission."""
    sigma = linear_response(scheme, detuning, input_amplitude)
    return scheme.empty_reflection + sigma @ scheme.emission / input_amplitude


def green_spectrum(stack, theta, detuning, count=None):
    return reconstruct_reflection(build_level_scheme(stack, theta, count), detuning)


def green_map(stack, theta_grid, detuning, count=None, energy=None):
    """r on an (angle, detuning) grid, all angles solved together."""
    theta_grid = np.asarray(theta_grid, dtype=float)
    detuning = np.asarray(detuning, dtype=float)
    ensembles = tuple(stack.ensembles(count))
    energy = resonance_energy(stack) if energy is None else energy
    gamma = ensembles[0].species.gamma
    optics = StackOptics(stack, energy, theta_grid)
    z = np.array([e.depth for e in ensembles])
    a = _collective_amplitudes(ensembles)
    g = green_s(stack, energy, theta_grid, z, z, optics=optics)
    coupling = a[:, None] * a[None, :] * g / gamma
    e_in = optics.field_top(z)
    drive = a * e_in / gamma
    emission = 1j / (2.0 * optics.beta[0][:, None]) * e_in * a
    n = len(ensembles)
    m = (detuning[None, :, None, None] + 0.5j) * np.eye(n) + coupling[:, None]
    rhs = np.broadcast_to(-drive[:, None, :], m.shape[:-1])[..., None]
    sigma = np.linalg.solve(m, rhs)[..., 0]
    return optics.reflection[:, None] + np.einsum("tdl,tl->td", sigma, emission)
