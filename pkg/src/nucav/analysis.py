"""Sweeps, cross-route comparisons, minimum finding and file output."""

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import fewmode
from .fano import FanoFit
from .levelscheme import green_map
from .multilayer import energy_angle_map, nuclear_map, resonance_energy, rocking_curve
from .stack import Layer
from .units import to_mrad

ROUTES = ("oracle", "fewmode", "green")


# -- parallel sweeps ------------------------------------------------------------


def thread_count():
    """Worker threads, capped by NUCAV_THREADS (default: CPU count)."""
    cap = os.environ.get("NUCAV_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"NUCAV_THREADS must be an integer, got {cap!r}") from None
    return n


def chunked_rows(func, rows, threads=None):
    """Apply func to contiguous chunks of rows and stack results in order."""
    rows = np.asarray(rows)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(rows) < 2 * threads:
        return func(rows)
    chunks = np.array_split(rows, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(func, chunks))
    return np.concatenate(parts, axis=0)


# -- spectra -----------------------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    """Complex amplitudes on one or two grids; axes are (name, values) pairs."""

    axes: tuple
    amplitude: np.ndarray
    route: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")
        shape = tuple(len(v) for _, v in self.axes)
        if np.shape(self.amplitude) != shape:
            raise ValueError(f"amplitude shape {np.shape(self.amplitude)} does not match axes {shape}")
        for name, values in self.axes:
            if len(values) > 1 and not np.all(np.diff(values) > 0):
                raise ValueError(f"axis {name!r} must be strictly increasing")
        if not np.all(np.isfinite(self.amplitude)):
            raise ValueError("spectrum contains non-finite values")

    @property
    def reflectance(self):
        return np.abs(self.amplitude) ** 2


def rocking_spectrum(stack, theta, route="oracle", modes=20, energy=None):
    energy = (stack.energy or resonance_energy(stack)) if energy is None else energy
    if route == "oracle":
        r = rocking_curve(stack, energy, theta)
    elif route == "fewmode":
        r = fewmode.empty_reflection(stack, energy, theta, modes)
    else:
        raise ValueError("rocking curves are computed by the oracle or few-mode route")
    return Spectrum((("angle_mrad", to_mrad(theta)),), np.asarray(r), route, {"energy_eV": float(energy)})


def energy_angle_spectrum(stack, energy, theta, route="oracle", modes=20):
    if route == "oracle":
        r = chunked_rows(lambda e: energy_angle_map(stack, e, theta), energy)
    elif route == "fewmode":
        r = chunked_rows(lambda e: fewmode.empty_reflection(stack, e[:, None], theta[None, :], modes), energy)
    else:
        raise ValueError("energy-angle maps are computed by the oracle or few-mode route")
    return Spectrum((("energy_keV", np.asarray(energy) / 1e3), ("angle_mrad", to_mrad(theta))), r, route)


def nuclear_spectrum_map(stack, theta, detuning, route="oracle", modes=20, count=None, thick=False):
    """Reflection on an (angle, detuning) grid via the chosen route."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    detuning = np.asarray(detuning, dtype=float)
    if route == "oracle":
        func = lambda t: nuclear_map(stack, t, detuning)  # noqa: E731
    elif route == "fewmode":
        func = lambda t: fewmode.fewmode_spectrum(stack, t, detuning, modes, count, thick)  # noqa: E731
    elif route == "green":
        func = lambda t: green_map(stack, t, detuning, count)  # noqa: E731
    else:
        raise ValueError(f"unknown route {route!r}")
    r = chunked_rows(func, theta)
    meta = {"modes": len(fewmode.parse_modes(modes))} if route == "fewmode" else {}
    if route == "green" or (route == "fewmode" and not thick):
        meta["subensembles"] = "partition" if count is None else int(count)
    return Spectrum((("angle_mrad", to_mrad(theta)), ("detuning_gamma", detuning)), r, route, meta)


# -- comparisons -------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    routes: tuple
    grid: tuple
    max_abs_dev: float
    max_rel_dev: float  # pointwise |R - R_ref| / R_ref
    tolerance: float | None = None

    @property
    def passed(self):
        return None if self.tolerance is None else bool(self.max_abs_dev < self.tolerance)

    def to_dict(self):
        return {
            "routes": list(self.routes),
            "grid": list(self.grid),
            "max_abs_dev": self.max_abs_dev,
            "max_rel_dev": self.max_rel_dev,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def compare(candidate, reference, tolerance=None):
    """Deviation of candidate reflectance from the reference on a shared grid."""
    if candidate.amplitude.shape != reference.amplitude.shape:
        raise ValueError("spectra are on different grids")
    r, ref = candidate.reflectance, reference.reflectance
    dev = np.abs(r - ref)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(ref > 0, dev / ref, np.where(dev > 0, np.inf, 0.0))
    return ComparisonReport(
        (candidate.route, reference.route), r.shape, float(dev.max()), float(rel.max()), tolerance
    )


def convergence(stack, theta, detuning, route, levels, modes=20, count=None):
    """(level, max_abs_dev, max_rel_dev) against the oracle for increasing resolution.

    levels are mode counts for the few-mode route and sub-ensemble counts for
    the Green route.
    """
    ref = nuclear_spectrum_map(stack, theta, detuning, "oracle")
    rows = []
    for level in levels:
        if route == "fewmode":
            spec = nuclear_spectrum_map(stack, theta, detuning, "fewmode", modes=int(level), count=count)
        elif route == "green":
            spec = nuclear_spectrum_map(stack, theta, detuning, "green", count=int(level))
        else:
            raise ValueError("convergence studies need the few-mode or Green route")
        rep = compare(spec, ref)
        rows.append((int(level), rep.max_abs_dev, rep.max_rel_dev))
    return rows


# -- extrema -------------------------------------------------------------------------


def find_rocking_minima(x, y):
    """Local minima (3-point test) refined by a parabola through the neighbours."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        return []
    k = np.flatnonzero((y[1:-1] < y[:-2]) & (y[1:-1] < y[2:])) + 1
    out = []
    for i in k:
        x0, x1, x2 = x[i - 1], x[i], x[i + 1]
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        den = (x0 - x1) * (x0 - x2) * (x1 - x2)
        a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
        b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / den
        out.append(float(-b / (2 * a)) if a > 0 else float(x1))
    return out


def guided_mode_angles(stack, theta=None, energy=None):
    """Rocking-curve minima in rad on a fine grid (1-10 mrad by default)."""
    theta = np.linspace(1e-3, 10e-3, 9001) if theta is None else np.asarray(theta, dtype=float)
    spec = rocking_spectrum(stack, theta, energy=energy)
    return [m * 1e-3 for m in find_rocking_minima(spec.axes[0][1], spec.reflectance)]


def central_dip(detuning, reflectance, window=5.0, prominence=0.02):
    """Detuning of a local minimum within |Delta| <= window that sits at least
    `prominence` below the lower of its two flanking maxima, or None."""
    x = np.asarray(detuning, dtype=float)
    y = np.asarray(reflectance, dtype=float)
    k = np.flatnonzero((y[1:-1] < y[:-2]) & (y[1:-1] <= y[2:])) + 1
    best = None
    for i in k:
        if abs(x[i]) > window:
            continue
        left, right = y[: i + 1], y[i:]
        depth = min(left.max(), right.max()) - y[i]
        if depth > prominence and (best is None or depth > best[1]):
            best = (float(x[i]), float(depth))
    return None if best is None else best[0]


# -- geometry helpers --------------------------------------------------------------


def centered_resonant_cavity(stack, thickness, reference_thickness=2.0):
    """Mirror cavity with one centred resonant layer of the given thickness.

    The abundance is rescaled so the nucleus count equals that of a
    reference_thickness layer at the configured abundance.
    """
    cavity = fewmode.mirror_cavity(stack)
    if len(cavity.resonant) != 1:
        raise ValueError("need exactly one resonant layer")
    j, _, _, species = cavity.resonant[0]
    host = stack.layers[j].material
    lo, hi = fewmode.centered_slab(cavity.length, thickness)
    scaled = species.with_abundance(species.abundance * reference_thickness / thickness)
    layers = [stack.layers[0]]
    if hi < cavity.length:
        layers.append(Layer(host, cavity.length - hi))
    layers.append(Layer(host, float(thickness), resonant=scaled))
    if lo > 0:
        layers.append(Layer(host, lo))
    layers.append(stack.layers[-1])
    return replace(stack, layers=tuple(layers), partition=())


# -- Fano sweeps --------------------------------------------------------------------


def fano_sweep(stack, theta, detuning, route="oracle", count=None):
    """Per-angle Fano fits: rows (angle_mrad, sigma0, Re q, Im q, delta1, gamma1, residual)."""
    spec = nuclear_spectrum_map(stack, theta, detuning, route, count=count)
    rows = []
    for t, refl in zip(theta, spec.reflectance):
        fit = FanoFit().fit(detuning, refl)
        rows.append((float(to_mrad(t)), fit.sigma0_, fit.q_.real, fit.q_.imag, fit.delta1_, fit.gamma1_, fit.residual_))
    return rows


# -- output ----------------------------------------------------------------------------


def format_number(value):
    return format(float(value), ".17g")


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else format_number(v) for v in row])
    return buf.getvalue()


def spectrum_csv(spec):
    names = [name for name, _ in spec.axes]
    grids = np.meshgrid(*[v for _, v in spec.axes], indexing="ij")
    amp = spec.amplitude.ravel()
    cols = [g.ravel() for g in grids] + [amp.real, amp.imag, np.abs(amp) ** 2]
    return csv_text(names + ["re_r", "im_r", "R"], zip(*cols))


def scheme_json(scheme):
    """Level-scheme export with coupling in linewidth units and gauge-fixed drive."""
    doc = {
        "angle_mrad": float(to_mrad(scheme.theta)),
        "energy_keV": scheme.energy / 1e3,
        "ensembles": [{"z_nm": float(e.depth), "t_nm": float(e.thickness), "layer": e.layer} for e in scheme.ensembles],
        "coupling_re": [float(v) for v in scheme.coupling.real.ravel()],
        "coupling_im": [float(v) for v in scheme.coupling.imag.ravel()],
        "drive_re": [float(v) for v in scheme.drive.real],
        "drive_im": [float(v) for v in scheme.drive.imag],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


FANO_HEADER = ["angle_mrad", "sigma0", "re_q", "im_q", "delta1", "gamma1", "residual"]
