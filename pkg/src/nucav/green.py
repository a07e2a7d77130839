"""Green's function of a layer stack at fixed parallel wave vector.

The s-polarized (in-plane, perpendicular to k_par) component solves
    (d^2/dz^2 + b(z)^2) G(z, z') = -delta(z - z'),
so that in a homogeneous medium G = i exp(i b |z - z'|) / (2 b).  It is built
from two solutions of the homogeneous problem: u_top, excited from above and
outgoing (or vanishing) at the bottom, and u_bot, outgoing above the surface.
Their Wronskian evaluated in the vacuum half-space is -2 i b_0 for the chosen
normalizations, independent of the stack, which also covers perfect-mirror
substrates where no transmission channel exists.
"""

import numpy as np

from .multilayer import StackOptics


def mode_profile(stack, energy, theta, z, pol="s", side="top", optics=None):
    """Field profile for illumination from the top (side='top') or bottom.

    Evaluated from composite reflection/transmission coefficients.  For s
    polarization the single component along k x z is returned; for p the pair
    (component along k_par, component along z).  The top profile has unit
    incident amplitude at the surface, the bottom profile unit incident
    amplitude at the substrate surface.
    """
    o = optics if optics is not None else StackOptics(stack, energy, theta, pol=pol)
    if o.pol != pol:
        raise ValueError("optics were solved for a different polarization")
    n = o.n
    if side not in ("top", "bottom"):
        raise ValueError("side must be 'top' or 'bottom'")
    if side == "bottom" and stack.mirror:
        raise ValueError("a mirror substrate cannot be illuminated from below")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    comps = []
    for depth in z:
        j = stack.layer_at(depth)
        if stack.mirror and j == n:
            if depth > o.tops[j] + 1e-12:
                raise ValueError(f"depth {depth} nm lies inside the mirror")
            j = n - 1
        b = o.beta[j]
        if side == "top":
            source, far = 0, n
            x = o.tops[j] + o.d[j] - depth  # height above the layer's lower interface
            sign = -1.0
        else:
            source, far = n, 0
            x = depth - o.tops[j]  # depth below the layer's upper interface
            sign = 1.0
        _, t_in = o.composite(source, j)
        r_far, _ = o.composite(j, far)
        r_near, _ = o.composite(j, source)
        loop = o.phase(j, 2)
        amp = t_in * o.phase(j) / (1.0 - r_near * r_far * loop)
        fwd, back = np.exp(-1j * b * x), r_far * np.exp(1j * b * x)
        if pol == "s":
            comps.append(amp * (fwd + back))
        else:
            k = o.k0 * (1.0 + o.deficit[j])
            k_par = o.k0 * np.cos(o.theta)
            comps.append(np.stack([sign * amp * b / k * (fwd - back), amp * k_par / k * (fwd + back)], axis=-1))
    return np.stack(comps, axis=len(o.shape))


def green_s(stack, energy, theta, z, zp, optics=None):
    """G(z, z') for every pair, shape broadcast(energy, theta) + (len z, len z')."""
    o = optics if optics is not None else StackOptics(stack, energy, theta)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    zp = np.atleast_1d(np.asarray(zp, dtype=float))
    pts = np.concatenate([z, zp])
    top = o.field_top(pts)
    bot = o.field_bottom(pts)
    ut, ub = top[..., : len(z)], bot[..., : len(z)]
    upt, upb = top[..., len(z):], bot[..., len(z):]
    below = z[:, None] >= zp[None, :]
    prod = np.where(below, ut[..., :, None] * upb[..., None, :], ub[..., :, None] * upt[..., None, :])
    return 1j / (2.0 * o.beta[0][..., None, None]) * prod


def green_s_transmissive(stack, energy, theta, z, zp):
    """Same quantity from the bottom-illuminated profile and t_{0/n}.

    Only defined when the substrate transmits; used to cross-check green_s.
    """
    o = StackOptics(stack, energy, theta)
    _, t0n = o.composite(0, o.n)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    zp = np.atleast_1d(np.asarray(zp, dtype=float))
    e0z, e0p = mode_profile(stack, energy, theta, z, optics=o), mode_profile(stack, energy, theta, zp, optics=o)
    enz = mode_profile(stack, energy, theta, z, side="bottom", optics=o)
    enp = mode_profile(stack, energy, theta, zp, side="bottom", optics=o)
    below = z[:, None] >= zp[None, :]
    prod = np.where(below, e0z[..., :, None] * enp[..., None, :], enz[..., :, None] * e0p[..., None, :])
    return 1j / (2.0 * o.beta[o.n][..., None, None]) * prod / t0n[..., None, None]
