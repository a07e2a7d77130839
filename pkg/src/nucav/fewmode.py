"""Few-mode input-output solution of a uniform cavity on a perfect mirror.

The grazing-incidence problem is mapped to one dimension: a slab of
thickness L with effective index n_eff = sqrt(n^2 - cos^2 theta) / sin theta,
probed at the scaled momentum beta = k0 L sin(theta).  Inside the slab the
system modes are hard-wall sines chi_l(x) = sqrt(2/L) sin(pi l x / L), with x
measured upward from the mirror; everything outside the chosen mode set is
folded into the bath and into a scalar background scattering factor.

All couplings are closed-form.  With alpha = beta n_eff, y = alpha cot(alpha),
s = sum_l 2 l^2 pi^2 / (alpha^2 - l^2 pi^2) and u_l = l (-1)^l / sqrt(omega_l),

    W_l     = sqrt(pi beta)/L exp(-i beta) / (y - s - i beta) u_l
    Wdag_l  = sqrt(pi beta)/L exp(+i beta) / (y - s + i beta) u_l
    D       = diag((alpha^2 - l^2 pi^2) / (2 omega_l L^2)) + (pi/L)^2 u u^T / (y - s - i beta)
    S_bg    = exp(-2 i beta) (y - s + i beta) / (y - s - i beta)

and the empty cavity reflects r = -S_bg S_io exp(2 i beta) at the top
surface, with S_io = 1 - 2 pi i Wdag D^-1 W.  Quantities derived from the
complex index are never conjugated; Wdag and the adjoint nuclear couplings
have their own expressions.

Nuclear frequencies are frozen at the resonance (the cavity response varies
negligibly over the nuclear linewidth).  Detunings are in linewidth units.
"""

from dataclasses import dataclass

import numpy as np

from .materials import effective_dipole_moment_sq
from .multilayer import resonance_energy
from .units import check_angle, check_energy, wavenumber

POLE_TOLERANCE = 1e-9


class SingularConfiguration(ValueError):
    """A bath momentum coincides with a system mode (alpha = l pi)."""


def parse_modes(spec):
    """Mode set from an int N (modes 1..N), a 'a-b' / 'a:b' range, or an iterable."""
    if isinstance(spec, (int, np.integer)):
        modes = range(1, int(spec) + 1)
    elif isinstance(spec, str):
        text = spec.replace(":", "-").strip()
        if "-" in text:
            lo, hi = (int(p) for p in text.split("-", 1))
            modes = range(lo, hi + 1)
        elif "," in text:
            modes = [int(p) for p in text.split(",")]
        else:
            modes = range(1, int(text) + 1)
    else:
        modes = spec
    return tuple(int(m) for m in modes)


@dataclass(frozen=True)
class FewModeBasis:
    modes: tuple
    length: float  # nm

    def __post_init__(self):
        modes = tuple(int(m) for m in self.modes)
        if not modes:
            raise ValueError("the mode set is empty")
        if any(m < 1 for m in modes):
            raise ValueError("mode indices must be positive")
        if len(set(modes)) != len(modes):
            raise ValueError("mode indices must be distinct")
        if not self.length > 0:
            raise ValueError("cavity thickness must be positive")
        object.__setattr__(self, "modes", tuple(sorted(modes)))

    @property
    def indices(self):
        return np.array(self.modes, dtype=float)

    def mode_function(self, x):
        """chi_l(x), shape x.shape + (n_modes,); x measured from the mirror."""
        x = np.asarray(x, dtype=float)
        return np.sqrt(2.0 / self.length) * np.sin(np.pi * self.indices * x[..., None] / self.length)

    def frequencies(self, two_v):
        """omega_l = sqrt(pi^2 l^2 / L^2 + 2 V) with Re > 0; absorption gives Im < 0."""
        two_v = np.asarray(two_v, dtype=complex)
        return np.sqrt((np.pi * self.indices / self.length) ** 2 + two_v[..., None])


def map_3d_to_1d(n, energy, theta, length):
    """(n_eff, beta) for a layer of index n probed at (energy, theta)."""
    return _map_deficit(np.asarray(n, dtype=complex) - 1.0, energy, theta, length)


def _map_deficit(deficit, energy, theta, length):
    theta = check_angle(theta)
    k0 = wavenumber(check_energy(energy))
    sin = np.sin(theta)
    root = np.sqrt(deficit * (deficit + 2.0) + sin**2 + 0j)
    root = np.where((root.imag < 0) | ((root.imag == 0) & (root.real < 0)), -root, root)
    return root / sin, k0 * length * sin


@dataclass(frozen=True)
class FewModeCouplings:
    basis: FewModeBasis
    beta: np.ndarray  # scaled vacuum momentum k0 L sin(theta)
    alpha: np.ndarray  # scaled in-slab momentum
    s: np.ndarray
    two_v: np.ndarray  # 2 V = k0^2 (1 - n^2)
    omega: np.ndarray  # (..., n_modes)
    W: np.ndarray
    Wdag: np.ndarray
    D: np.ndarray
    Dinv: np.ndarray
    S_bg: np.ndarray

    @property
    def empty_scattering(self):
        """S_io without nuclei."""
        return 1.0 - 2j * np.pi * np.einsum("...l,...lm,...m->...", self.Wdag, self.Dinv, self.W)

    @property
    def empty_reflection(self):
        return reflection_from_scattering(self.S_bg * self.empty_scattering, self.beta)


def reflection_from_scattering(total_s, beta):
    """Plane-wave reflection referenced to the top surface."""
    return -total_s * np.exp(2j * np.asarray(beta))


def build_couplings(basis, n_eff, beta_scaled):
    """Closed-form system-bath couplings, propagator and background factor."""
    n_eff = np.asarray(n_eff, dtype=complex)
    beta = np.asarray(beta_scaled, dtype=float)
    n_eff, beta = np.broadcast_arrays(n_eff, beta)
    L = basis.length
    lam_pi = np.pi * basis.indices
    alpha = beta * n_eff
    gap = alpha[..., None] ** 2 - lam_pi**2
    if np.any(np.abs(gap) < POLE_TOLERANCE * lam_pi**2):
        raise SingularConfiguration("alpha coincides with a mode momentum l*pi; choose another angle or mode set")
    s = np.sum(2.0 * lam_pi**2 / gap, axis=-1)
    two_v = (beta**2 - alpha**2) / L**2
    omega = basis.frequencies(two_v)
    u = basis.indices * (-1.0) ** basis.indices / np.sqrt(omega)
    y = alpha / np.tan(alpha)
    norm = np.sqrt(np.pi * beta) / L
    lower = (y - s - 1j * beta)[..., None]
    W = norm[..., None] * np.exp(-1j * beta)[..., None] / lower * u
    Wdag = norm[..., None] * np.exp(1j * beta)[..., None] / (y - s + 1j * beta)[..., None] * u
    diag = gap / (2.0 * omega * L**2)
    uu = u[..., :, None] * u[..., None, :]
    D = _diag(diag) + (np.pi / L) ** 2 * uu / lower[..., None]
    a_inv_u = u / diag
    Dinv = _diag(1.0 / diag) - (np.pi / L) ** 2 / (y - 1j * beta)[..., None, None] * (
        a_inv_u[..., :, None] * a_inv_u[..., None, :]
    )
    S_bg = np.exp(-2j * beta) * (y - s + 1j * beta) / (y - s - 1j * beta)
    return FewModeCouplings(basis, beta, alpha, s, two_v, omega, W, Wdag, D, Dinv, S_bg)


def _diag(values):
    out = np.zeros(values.shape + values.shape[-1:], dtype=complex)
    idx = np.arange(values.shape[-1])
    out[..., idx, idx] = values
    return out


# -- stacks --------------------------------------------------------------------


@dataclass(frozen=True)
class MirrorCavity:
    """A stack reduced to vacuum / uniform slab of thickness L / mirror."""

    length: float
    deficit: complex  # n - 1 of the host material
    resonant: tuple  # (layer index, x_low, x_high, species) per resonant layer, x from the mirror


def mirror_cavity(stack):
    """Check that a stack is solvable by the few-mode route and reduce it."""
    problems = []
    if not stack.mirror:
        problems.append("the substrate must be a perfect mirror")
    top = stack.layers[0].material
    if top.delta != 0 or top.beta != 0:
        problems.append("the illumination side must be vacuum")
    interior = stack.layers[1:-1]
    if not interior:
        problems.append("the cavity needs at least one finite layer")
    hosts = {(layer.material.delta, layer.material.beta) for layer in interior}
    if len(hosts) > 1:
        problems.append("all cavity layers must share one refractive index")
    if problems:
        raise ValueError("stack is not a uniform mirror cavity: " + "; ".join(problems))
    delta, beta = hosts.pop()
    length = stack.total_thickness
    tops = stack.tops
    resonant = tuple(
        (j, length - (tops[j] + stack.layers[j].thickness), length - tops[j], stack.layers[j].resonant)
        for j in stack.resonant_layers
    )
    return MirrorCavity(length, complex(-delta, beta), resonant)


def cavity_couplings(stack, energy, theta, modes):
    cavity = mirror_cavity(stack)
    basis = FewModeBasis(parse_modes(modes), cavity.length)
    n_eff, beta = _map_deficit(cavity.deficit, energy, theta, cavity.length)
    return build_couplings(basis, n_eff, beta)


def empty_reflection(stack, energy, theta, modes=5):
    """Empty-cavity reflection amplitude from the few-mode route."""
    return cavity_couplings(stack, energy, theta, modes).empty_reflection


# -- nuclei ------------------------------------------------------------------------


def _coupling_scale(species, k0):
    # |d| k0 sqrt(f_LM rho / 2)
    return np.sqrt(effective_dipole_moment_sq(species) * species.lamb_moessbauer * species.resonant_density / 2.0) * k0


def nucleus_coupling(couplings, species, x, thickness, adjoint=False):
    """Collective couplings g_{l lambda} of sheets at heights x (from the mirror).

    Shape couplings.shape + (len(x), n_modes).  The adjoint carries the
    opposite prefactor phase but the same, unconjugated, mode frequencies.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    thickness = np.broadcast_to(np.asarray(thickness, dtype=float), x.shape)
    L = couplings.basis.length
    if np.any(x <= 0) or np.any(x >= L):
        raise ValueError("sheets must lie strictly inside the cavity")
    k0 = wavenumber(species.resonance_energy)
    chi = couplings.basis.mode_function(x)  # (n_sheets, n_modes)
    amp = _coupling_scale(species, k0) * np.sqrt(thickness)[:, None] * chi
    w = couplings.omega[..., None, :]
    sign = 1j if adjoint else -1j
    return sign * amp / np.sqrt(w)


def mode_overlap(basis, x_low, x_high):
    """Xi_{l l'} = integral of chi_l chi_l' over [x_low, x_high], closed form."""
    L = basis.length
    p = np.pi * basis.indices / L
    P, Q = p[:, None], p[None, :]
    same = np.isclose(P, Q)
    diff = np.where(same, 1.0, P - Q)

    def primitive(x):
        off = np.sin((P - Q) * x) / (2.0 * diff) - np.sin((P + Q) * x) / (2.0 * (P + Q))
        on = x / 2.0 - np.sin(2.0 * P * x) / (4.0 * P)
        return np.where(same, on, off)

    return (2.0 / L) * (primitive(x_high) - primitive(x_low))


def thick_layer_delta(couplings, species, x_low, x_high):
    """Coupling kernel K of a continuous resonant slab between two heights.

    The interacting propagator is D - K / (gamma (Delta + i/2)); K is the
    slab analogue of the sheet product g^dag g.
    """
    k0 = wavenumber(species.resonance_energy)
    xi = mode_overlap(couplings.basis, x_low, x_high)
    w = couplings.omega
    return _coupling_scale(species, k0) ** 2 * xi / np.sqrt(w[..., :, None] * w[..., None, :])


def centered_slab(length, thickness):
    if not 0 < thickness <= length:
        raise ValueError("slab thickness must lie in (0, L]")
    return (length - thickness) / 2.0, (length + thickness) / 2.0


def _detuning(detuning):
    return np.atleast_1d(np.asarray(detuning, dtype=float))


def scattering_with_nuclei(couplings, g, gdag, gamma, detuning, method="woodbury"):
    """Total S(Delta) for sheet ensembles, shape couplings.shape + (n_detuning,).

    g, gdag: (..., n_sheets, n_modes).  'woodbury' separates the empty cavity
    from the nuclear correction; 'direct' inverts the interacting propagator.
    """
    detuning = _detuning(detuning)
    if gamma <= 0:
        raise ValueError("linewidth must be positive")
    dinv = couplings.Dinv
    if method == "direct":
        kernel = np.einsum("...sl,...sm->...lm", gdag, g)
        return _direct(couplings, kernel / gamma, detuning)
    if method != "woodbury":
        raise ValueError(f"unknown method {method!r}")
    n = g.shape[-2]
    inner = np.einsum("...sl,...lm,...tm->...st", g, dinv, gdag)  # g D^-1 g^dag
    left = np.einsum("...l,...lm,...sm->...s", couplings.Wdag, dinv, gdag)
    right = np.einsum("...sl,...lm,...m->...s", g, dinv, couplings.W)
    lam_inv = -gamma * (detuning + 0.5j)
    m = lam_inv[:, None, None] * np.eye(n) + inner[..., None, :, :]
    corr = np.linalg.solve(m, np.broadcast_to(right[..., None, :, None], m.shape[:-1] + (1,)))[..., 0]
    s_io = couplings.empty_scattering[..., None] + 2j * np.pi * np.einsum("...s,...ds->...d", left, corr)
    return couplings.S_bg[..., None] * s_io


def _direct(couplings, kernel, detuning):
    """S(Delta) from D_int = D - kernel / (Delta + i/2), kernel in linewidth units."""
    d_int = couplings.D[..., None, :, :] - kernel[..., None, :, :] / (detuning + 0.5j)[:, None, None]
    rhs = np.broadcast_to(couplings.W[..., None, :, None], d_int.shape[:-1] + (1,))
    x = np.linalg.solve(d_int, rhs)[..., 0]
    s_io = 1.0 - 2j * np.pi * np.einsum("...l,...dl->...d", couplings.Wdag, x)
    return couplings.S_bg[..., None] * s_io


def slab_scattering(couplings, kernel, gamma, detuning):
    """Total S(Delta) with a continuous-slab kernel (direct inversion)."""
    return _direct(couplings, kernel / gamma, _detuning(detuning))


def single_mode_scattering(couplings, coupling_sum, gamma, detuning):
    """One-mode closed form: S_io = S0 - 2 pi i Wdag W (A/D^2) / (gamma(Delta + i/2) - A/D).

    coupling_sum is A = sum over sheets of gdag_l g_l for the single mode.
    """
    if len(couplings.basis.modes) != 1:
        raise ValueError("the closed form needs exactly one mode")
    detuning = _detuning(detuning)
    d = couplings.D[..., 0, 0][..., None]
    a = np.asarray(coupling_sum)[..., None]
    wd, w = couplings.Wdag[..., 0][..., None], couplings.W[..., 0][..., None]
    s0 = couplings.empty_scattering[..., None]
    s_io = s0 - 2j * np.pi * wd * w * (a / d**2) / (gamma * (detuning + 0.5j) - a / d)
    return couplings.S_bg[..., None] * s_io


@dataclass(frozen=True)
class EffectiveSchemeFM:
    drive: np.ndarray  # Omega_l = 2 pi (g D^-1 W)_l
    coupling: np.ndarray  # G = g D^-1 g^dag, linewidth units
    peak: np.ndarray  # F_R matrix, -2 pi i (Wdag D^-1 g^dag)_l (g D^-1 W)_l'

    @property
    def lamb_shift(self):
        return np.diagonal(self.coupling, axis1=-2, axis2=-1).real

    @property
    def superradiance(self):
        return -2.0 * np.diagonal(self.coupling, axis1=-2, axis2=-1).imag


def effective_scheme_fm(couplings, g, gdag, gamma):
    dinv = couplings.Dinv
    drive = 2.0 * np.pi * np.einsum("...sl,...lm,...m->...s", g, dinv, couplings.W)
    coupling = np.einsum("...sl,...lm,...tm->...st", g, dinv, gdag) / gamma
    left = np.einsum("...l,...lm,...sm->...s", couplings.Wdag, dinv, gdag)
    right = np.einsum("...sl,...lm,...m->...s", g, dinv, couplings.W)
    peak = -2j * np.pi * left[..., :, None] * right[..., None, :]
    return EffectiveSchemeFM(drive, coupling, peak)


# -- stack-level drivers -----------------------------------------------------------


def _sheets(stack, cavity, count):
    """(heights from the mirror, thicknesses, species) of every sub-ensemble."""
    ens = stack.ensembles(count)
    species = {e.species for e in ens}
    if len(species) != 1:
        raise ValueError("the few-mode route supports a single resonant species")
    x = np.array([cavity.length - e.depth for e in ens])
    t = np.array([e.thickness for e in ens])
    return x, t, species.pop()


def stack_couplings_and_nuclei(stack, theta, modes, count=None, energy=None):
    cavity = mirror_cavity(stack)
    energy = resonance_energy(stack) if energy is None else energy
    c = cavity_couplings(stack, energy, theta, modes)
    x, t, species = _sheets(stack, cavity, count)
    g = nucleus_coupling(c, species, x, t)
    gdag = nucleus_coupling(c, species, x, t, adjoint=True)
    return c, g, gdag, species


def fewmode_spectrum(stack, theta, detuning, modes=20, count=None, thick=False, energy=None):
    """Reflection amplitude r(Delta) at one or many angles.

    With thick=True every resonant layer is a continuous slab; otherwise it
    is split into sheets per the stack's partition (or `count`).  Shape
    theta.shape + (n_detuning,).
    """
    cavity = mirror_cavity(stack)
    if not cavity.resonant:
        raise ValueError("the stack has no resonant layers")
    energy = resonance_energy(stack) if energy is None else energy
    c = cavity_couplings(stack, energy, theta, modes)
    if thick:
        species = {sp for *_, sp in cavity.resonant}
        if len(species) != 1:
            raise ValueError("the few-mode route supports a single resonant species")
        sp = species.pop()
        kernel = sum(thick_layer_delta(c, sp, lo, hi) for _, lo, hi, _ in cavity.resonant)
        s = slab_scattering(c, kernel, sp.gamma, detuning)
    else:
        x, t, sp = _sheets(stack, cavity, count)
        g = nucleus_coupling(c, sp, x, t)
        gdag = nucleus_coupling(c, sp, x, t, adjoint=True)
        s = scattering_with_nuclei(c, g, gdag, sp.gamma, detuning)
    return reflection_from_scattering(s, c.beta[..., None])


def fewmode_scheme(stack, theta, modes=20, count=None, energy=None):
    c, g, gdag, sp = stack_couplings_and_nuclei(stack, theta, modes, count, energy)
    return effective_scheme_fm(c, g, gdag, sp.gamma)


def pheno_resonance_trajectory(theta, theta0, omega_nuc):
    """Energy at which the guided mode found at theta0 sits for another angle."""
    theta, theta0 = check_angle(theta), check_angle(theta0)
    return omega_nuc * np.sin(theta0) / np.sin(theta)
