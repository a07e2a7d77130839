"""Grazing-incidence x-ray cavities with Moessbauer nuclei: a layer-formalism
reference, a Green's-function level scheme, and a few-mode input-output model."""

from .fano import FanoFit, fano_profile
from .fewmode import FewModeBasis, build_couplings, fewmode_spectrum, map_3d_to_1d
from .levelscheme import LevelScheme, build_level_scheme, green_spectrum, reconstruct_reflection
from .materials import Material, ResonantSpecies
from .multilayer import StackOptics, nuclear_spectrum, rocking_curve, stack_reflection
from .stack import ConfigError, Layer, LayerStack, load_stack, parse_stack

__all__ = [
    "ConfigError",
    "FanoFit",
    "FewModeBasis",
    "Layer",
    "LayerStack",
    "LevelScheme",
    "Material",
    "ResonantSpecies",
    "StackOptics",
    "build_couplings",
    "build_level_scheme",
    "fano_profile",
    "fewmode_spectrum",
    "green_spectrum",
    "load_stack",
    "map_3d_to_1d",
    "nuclear_spectrum",
    "parse_stack",
    "reconstruct_reflection",
    "rocking_curve",
    "stack_reflection",
]
