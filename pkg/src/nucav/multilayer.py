"""Semi-classical layer formalism: the reference for every other route.

Each layer is described by its index deficit m = n - 1, so that the
z-wavenumber is computed from eps - cos^2(theta) = m(m + 2) + sin^2(theta)
without the catastrophic cancellation of the naive difference at grazing
incidence.

Amplitudes inside layer j are written relative to the layer's upper interface:
    u(z) = down_j * exp(i b_j s) + up_j * exp(-i b_j s),   s = z - top_j,
with layer 0 (the illumination side) referenced to the surface z = 0.
"""

from functools import cached_property

import numpy as np

from .materials import lorentzian_response, resonant_index_peak
from .units import check_angle, check_energy, wavenumber


def index_deficit(stack, detuning=None):
    """Per-layer n - 1; resonant layers follow the nuclear line when detuning is given."""
    out = []
    for layer in stack.layers:
        m = complex(-layer.material.delta, layer.material.beta)
        if detuning is not None and layer.resonant is not None:
            m = m - resonant_index_peak(layer.resonant) * lorentzian_response(detuning)
        out.append(m)
    return out


def beta_z(deficit, k0, theta):
    """z-component of the wave vector with Im >= 0 (decay into absorbers)."""
    m = np.asarray(deficit, dtype=complex)
    b = k0 * np.sqrt(m * (m + 2.0) + np.sin(theta) ** 2 + 0j)
    flip = (b.imag < 0) | ((b.imag == 0) & (b.real < 0))
    return np.where(flip, -b, b)


def interface_coefficients(beta_i, beta_j, eps_i=1.0, eps_j=1.0, pol="s"):
    """Fresnel r_ij, t_ij for the interface from layer i into adjacent layer j."""
    if pol == "s":
        r = (beta_i - beta_j) / (beta_i + beta_j)
        return r, 1.0 + r
    if pol == "p":
        ratio = eps_i / eps_j
        r = (beta_i - ratio * beta_j) / (beta_i + ratio * beta_j)
        return r, np.sqrt(ratio + 0j) * (1.0 + r)
    raise ValueError(f"polarization must be 's' or 'p', got {pol!r}")


def mirror_reflection(pol):
    # tangential E vanishes on a perfect conductor
    return -1.0 if pol == "s" else 1.0


class StackOptics:
    """Wave solutions of one stack at broadcastable (energy, angle, detuning) points."""

    def __init__(self, stack, energy, theta, detuning=None, pol="s"):
        energy = check_energy(energy)
        theta = check_angle(theta)
        if detuning is None:
            energy, theta = np.broadcast_arrays(energy, theta)
        else:
            energy, theta, detuning = np.broadcast_arrays(energy, theta, np.asarray(detuning, dtype=float))
        self.stack = stack
        self.pol = pol
        self.shape = energy.shape
        self.theta = theta
        self.k0 = wavenumber(energy)
        self.deficit = [np.broadcast_to(m, self.shape) for m in index_deficit(stack, detuning)]
        self.eps = [(1.0 + m) ** 2 for m in self.deficit]
        self.beta = [beta_z(m, self.k0, theta) for m in self.deficit]
        self.n = len(stack.layers) - 1
        self.d = np.concatenate([[0.0], stack.thicknesses, [0.0]])
        self.tops = stack.tops

    # -- adjacent-interface coefficients -----------------------------------
    def fresnel(self, i, j):
        """(r_ij, t_ij) for adjacent layers; the mirror reflects totally."""
        if j == self.n and self.stack.mirror:
            return np.full(self.shape, mirror_reflection(self.pol), dtype=complex), np.zeros(self.shape, complex)
        if i == self.n and self.stack.mirror:
            raise ValueError("no field propagates out of a perfect mirror")
        return interface_coefficients(self.beta[i], self.beta[j], self.eps[i], self.eps[j], self.pol)

    def phase(self, j, power=1):
        return np.exp(1j * power * self.beta[j] * self.d[j])

    # -- illumination from the top -------------------------------------------
    @cached_property
    def _top(self):
        n = self.n
        down = [None] * (n + 1)
        up = [None] * (n + 1)
        ratio = [None] * (n + 1)  # up/down at the top of each layer
        ratio[n] = np.zeros(self.shape, complex)
        bottom = None
        for j in range(n - 1, -1, -1):
            r, _ = self.fresnel(j, j + 1)
            if j == n - 1 and self.stack.mirror:
                bottom = r
            else:
                bottom = (r + ratio[j + 1]) / (1.0 + r * ratio[j + 1])
            ratio[j] = bottom * self.phase(j, 2)
        down[0] = np.ones(self.shape, complex)
        for j in range(n):
            if j + 1 == n and self.stack.mirror:
                down[n] = np.zeros(self.shape, complex)
                break
            r, t = self.fresnel(j, j + 1)
            down[j + 1] = down[j] * self.phase(j) * t / (1.0 + r * ratio[j + 1])
        for j in range(n + 1):
            up[j] = ratio[j] * down[j]
        return down, up

    # -- outgoing-at-the-top solution (illumination from below) ---------------
    @cached_property
    def _bottom(self):
        n = self.n
        last = n - 1 if self.stack.mirror else n
        up = [None] * (n + 1)
        down = [None] * (n + 1)
        up[0] = np.ones(self.shape, complex)
        down[0] = np.zeros(self.shape, complex)
        below = np.zeros(self.shape, complex)  # down/up at the bottom of layer j - 1
        for j in range(1, last + 1):
            r, t = interface_coefficients(self.beta[j], self.beta[j - 1], self.eps[j], self.eps[j - 1], self.pol)
            rho = (r + below) / (1.0 + r * below)
            up[j] = up[j - 1] * self.phase(j - 1, -1) * (1.0 + r * below) / t
            down[j] = rho * up[j]
            below = rho * self.phase(j, 2)
        return down, up

    @property
    def reflection(self):
        return self._top[1][0]

    @property
    def transmission(self):
        """Amplitude of the down-going wave at the substrate surface."""
        return self._top[0][self.n]

    def _evaluate(self, amplitudes, z):
        down, up = amplitudes
        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.empty(self.shape + z.shape, dtype=complex)
        for idx, depth in enumerate(z):
            j = self.stack.layer_at(depth)
            if j == self.n and self.stack.mirror:
                if depth > self.tops[j] + 1e-12:
                    raise ValueError(f"depth {depth} nm lies inside the mirror")
                j = self.n - 1
            s = depth - self.tops[j]
            b = self.beta[j]
            if down[j] is None:
                raise ValueError(f"depth {depth} nm lies outside the solved region")
            out[..., idx] = down[j] * np.exp(1j * b * s) + up[j] * np.exp(-1j * b * s)
        return out

    def field_top(self, z):
        """Field for unit down-going amplitude at the surface; outgoing below."""
        return self._evaluate(self._top, z)

    def field_bottom(self, z):
        """Solution that is purely up-going above the surface (unit amplitude at z=0)."""
        return self._evaluate(self._bottom, z)

    # -- composite coefficients via the layer recursion ------------------------
    def composite(self, i, k):
        """(r_{i/k}, t_{i/k}) from layer i into layer k through everything between."""
        if i == k:
            return np.zeros(self.shape, complex), np.ones(self.shape, complex)
        if abs(i - k) == 1:
            return self.fresnel(i, k)
        j = i + 1 if i < k else i - 1
        r_ij, t_ij = self.fresnel(i, j)
        r_ji, t_ji = self.fresnel(j, i)
        r_jk, t_jk = self.composite(j, k)
        loop = self.phase(j, 2)
        den = 1.0 - r_ji * r_jk * loop
        r = (r_ij + (t_ij * t_ji - r_ij * r_ji) * r_jk * loop) / den
        t = t_ij * t_jk * self.phase(j) / den
        return r, t


def stack_reflection(stack, energy, theta, detuning=None, pol="s"):
    return StackOptics(stack, energy, theta, detuning, pol).reflection


def stack_transmission(stack, energy, theta, detuning=None, pol="s"):
    return StackOptics(stack, energy, theta, detuning, pol).transmission


def rocking_curve(stack, energy, theta_grid):
    """Off-resonant complex reflectivity versus angle."""
    return stack_reflection(stack, energy, np.asarray(theta_grid, dtype=float))


def energy_angle_map(stack, energy_grid, theta_grid):
    """Off-resonant reflectivity on an (energy, angle) grid, shape (n_E, n_theta)."""
    e, t = np.meshgrid(np.asarray(energy_grid, float), np.asarray(theta_grid, float), indexing="ij")
    return stack_reflection(stack, e, t)


def nuclear_spectrum(stack, theta, detuning_grid, energy=None):
    """Reflectivity versus detuning (linewidths) at one angle, at the resonance energy."""
    energy = resonance_energy(stack) if energy is None else energy
    return stack_reflection(stack, energy, theta, np.asarray(detuning_grid, dtype=float))


def nuclear_map(stack, theta_grid, detuning_grid, energy=None):
    """Reflectivity on an (angle, detuning) grid, shape (n_theta, n_detuning)."""
    energy = resonance_energy(stack) if energy is None else energy
    t, dd = np.meshgrid(np.asarray(theta_grid, float), np.asarray(detuning_grid, float), indexing="ij")
    return stack_reflection(stack, energy, t, dd)


def resonance_energy(stack):
    species = {layer.resonant for layer in stack.layers if layer.resonant is not None}
    energies = {sp.resonance_energy for sp in species}
    if len(energies) != 1:
        if stack.energy is not None and not energies:
            return stack.energy
        raise ValueError("stack must contain resonant layers of a single resonance energy")
    return energies.pop()
