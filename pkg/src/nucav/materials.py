"""Off-resonant optical constants and Moessbauer resonance parameters."""

import warnings
from dataclasses import dataclass

import numpy as np

from .units import wavenumber


@dataclass(frozen=True)
class Material:
    """Refractive index n = 1 - delta + i*beta at the working photon energy."""

    name: str
    delta: float
    beta: float

    def __post_init__(self):
        if not np.isfinite(self.delta) or not np.isfinite(self.beta):
            raise ValueError(f"material {self.name!r}: optical constants must be finite")
        if self.beta < 0:
            raise ValueError(f"material {self.name!r}: beta must be >= 0 (passive medium)")
        if abs(self.delta) > 1e-2 or self.beta > 1e-2:
            warnings.warn(
                f"material {self.name!r}: |delta| or beta above 1e-2 is unusual for x-rays",
                stacklevel=2,
            )

    @property
    def index(self):
        return complex(1.0 - self.delta, self.beta)

    @property
    def permittivity(self):
        return self.index**2


VACUUM = Material("vacuum", 0.0, 0.0)


@dataclass(frozen=True)
class ResonantSpecies:
    """A Moessbauer isotope embedded in a host layer.

    number_density counts host atoms per nm^3; abundance is the fraction of
    them that are the resonant isotope.  spin_ratio is (2 I_e + 1)/(2 I_g + 1).
    """

    name: str
    resonance_energy: float
    linewidth: float
    internal_conversion: float
    lamb_moessbauer: float
    spin_ratio: float
    number_density: float
    abundance: float

    def __post_init__(self):
        problems = species_problems(self)
        if problems:
            raise ValueError(f"species {self.name!r}: " + "; ".join(problems))

    @property
    def k0(self):
        """Wave number of the resonance, nm^-1."""
        return float(wavenumber(self.resonance_energy))

    @property
    def gamma(self):
        """Natural linewidth as a wave number, nm^-1."""
        return float(wavenumber(self.linewidth))

    @property
    def resonant_density(self):
        return self.number_density * self.abundance

    def with_abundance(self, abundance):
        fields = dict(self.__dict__)
        fields["abundance"] = abundance
        return ResonantSpecies(**fields)


def species_problems(species):
    out = []
    if not species.resonance_energy > 0:
        out.append("resonance_energy must be > 0")
    if not species.linewidth > 0:
        out.append("linewidth must be > 0")
    if not species.internal_conversion >= 0:
        out.append("internal_conversion must be >= 0")
    if not 0 <= species.lamb_moessbauer <= 1:
        out.append("lamb_moessbauer must lie in [0, 1]")
    if not species.spin_ratio > 0:
        out.append("spin_ratio must be > 0")
    if not species.number_density > 0:
        out.append("number_density must be > 0")
    if not 0 <= species.abundance <= 1:
        out.append("abundance must lie in [0, 1]")
    return out


def effective_dipole_moment_sq(species):
    """|d|^2 in nm^3 (hbar = c = eps0 = 1)."""
    k0 = species.k0
    return (
        2.0 * np.pi * species.gamma / k0**3
        / (2.0 * (1.0 + species.internal_conversion))
        * species.spin_ratio
    )


def resonant_index_peak(species):
    """Magnitude of the resonant index change at line center."""
    k0 = species.k0
    return (
        2.0 * np.pi * species.resonant_density * species.lamb_moessbauer / k0**3
        / (2.0 * (1.0 + species.internal_conversion))
        * species.spin_ratio
    )


def lorentzian_response(detuning):
    """The complex line profile 1/(2*Delta + i), Delta in linewidths."""
    return 1.0 / (2.0 * np.asarray(detuning, dtype=float) + 1j)


def resonant_refractive_index(species, detuning, base):
    """Refractive index of a resonant layer at detuning Delta (linewidths)."""
    return base.index - resonant_index_peak(species) * lorentzian_response(detuning)
