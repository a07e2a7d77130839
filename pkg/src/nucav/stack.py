"""Layer stacks, resonant sub-ensembles, and the YAML configuration format.

Geometry convention: z is the depth below the top surface, increasing into
the stack.  Layer 0 is the semi-infinite illumination side (z < 0); the last
layer is either a semi-infinite substrate or a perfect mirror whose surface
closes the stack.
"""

from dataclasses import dataclass
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import yaml

from .materials import VACUUM, Material, ResonantSpecies, species_problems

SEMI_INFINITE = "semi-infinite"
MIRROR = "mirror"
_MIRROR_MATERIAL = Material(MIRROR, 0.0, 0.0)

_SPECIES_KEYS = {
    "resonance_energy_eV": "resonance_energy",
    "linewidth_eV": "linewidth",
    "internal_conversion": "internal_conversion",
    "lamb_moessbauer": "lamb_moessbauer",
    "spin_ratio": "spin_ratio",
    "number_density_nm3": "number_density",
    "abundance": "abundance",
}


class ConfigError(ValueError):
    """Raised with every problem found in a configuration document."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid stack configuration:\n" + "\n".join(f"  - {p}" for p in self.problems))


@dataclass(frozen=True)
class Layer:
    material: Material
    thickness: float | None = None  # None for the semi-infinite end layers
    resonant: ResonantSpecies | None = None
    mirror: bool = False

    @property
    def finite(self):
        return self.thickness is not None


@dataclass(frozen=True)
class Ensemble:
    """A sheet of resonant nuclei standing in for a slice of a resonant layer."""

    layer: int
    depth: float
    thickness: float
    species: ResonantSpecies


@dataclass(frozen=True)
class LayerStack:
    layers: tuple
    partition: tuple = ()  # sorted (layer index, sub-ensemble count) pairs
    energy: float | None = None  # default photon energy, eV
    name: str = ""

    def __post_init__(self):
        problems = stack_problems(self.layers)
        if problems:
            raise ConfigError(problems)
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "partition", tuple(sorted((int(k), int(v)) for k, v in dict(self.partition).items())))

    @property
    def mirror(self):
        return self.layers[-1].mirror

    @property
    def thicknesses(self):
        """Thicknesses of the finite interior layers, top to bottom."""
        return np.array([layer.thickness for layer in self.layers[1:-1]], dtype=float)

    @property
    def tops(self):
        """Depth of the upper interface of every layer; layer 0 gets 0."""
        return np.concatenate([[0.0], np.cumsum(np.concatenate([[0.0], self.thicknesses]))])

    @property
    def total_thickness(self):
        return float(self.thicknesses.sum())

    @property
    def resonant_layers(self):
        return [j for j, layer in enumerate(self.layers) if layer.resonant is not None]

    def layer_at(self, depth):
        """Index of the layer containing a depth; interfaces belong to the lower layer."""
        tops = self.tops
        j = int(np.searchsorted(tops[1:], depth, side="right"))
        return min(j, len(self.layers) - 1)

    def sub_ensemble_count(self, layer_index):
        return dict(self.partition).get(layer_index, 1)

    def ensembles(self, count=None):
        """Sub-ensembles of every resonant layer, ordered top to bottom.

        count overrides the per-layer partition table when given.
        """
        out = []
        tops = self.tops
        for j in self.resonant_layers:
            n = count if count is not None else self.sub_ensemble_count(j)
            out.extend(partition_layer(self.layers[j], n, tops[j], j))
        return out

    def replace_layer(self, index, layer):
        layers = list(self.layers)
        layers[index] = layer
        return LayerStack(tuple(layers), self.partition, self.energy, self.name)

    def with_partition(self, partition):
        return LayerStack(self.layers, tuple(dict(partition).items()), self.energy, self.name)


def partition_layer(layer, count, top=0.0, index=0):
    """Split a resonant layer into `count` equal slices centred on their midpoints."""
    if layer.resonant is None:
        raise ValueError("only resonant layers can be partitioned")
    if int(count) != count or count < 1:
        raise ValueError(f"sub-ensemble count must be a positive integer, got {count}")
    if not layer.finite:
        raise ValueError("cannot partition a semi-infinite layer")
    count = int(count)
    t = layer.thickness / count
    return [Ensemble(index, top + (k + 0.5) * t, t, layer.resonant) for k in range(count)]


def stack_problems(layers):
    problems = []
    if len(layers) < 2:
        return ["a stack needs at least two layers"]
    for j, layer in enumerate(layers):
        end = j == 0 or j == len(layers) - 1
        if layer.mirror and j != len(layers) - 1:
            problems.append(f"layer {j}: a mirror may only terminate the stack")
        if end and layer.thickness is not None:
            problems.append(f"layer {j}: first and last layers must be semi-infinite or a mirror")
        if not end:
            if layer.thickness is None:
                problems.append(f"layer {j}: interior layers need a finite thickness")
            elif not (np.isfinite(layer.thickness) and layer.thickness > 0):
                problems.append(f"layer {j}: thickness must be positive, got {layer.thickness}")
        if end and layer.resonant is not None:
            problems.append(f"layer {j}: semi-infinite layers cannot be resonant")
    if layers[0].mirror:
        problems.append("layer 0: the illumination side cannot be a mirror")
    return problems


# ---------------------------------------------------------------------------
# configuration documents


def _species_from_mapping(name, doc, where, problems):
    if not isinstance(doc, dict):
        problems.append(f"{where}: resonant species must be a mapping")
        return None
    missing = [k for k in _SPECIES_KEYS if k not in doc]
    for key in missing:
        problems.append(f"{where}: missing species field {key!r}")
    unknown = set(doc) - set(_SPECIES_KEYS) - {"name"}
    for key in sorted(unknown):
        problems.append(f"{where}: unknown species field {key!r}")
    if missing:
        return None
    kwargs = {"name": str(doc.get("name", name))}
    for key, attr in _SPECIES_KEYS.items():
        try:
            kwargs[attr] = float(doc[key])
        except (TypeError, ValueError):
            problems.append(f"{where}: species field {key!r} must be a number")
            return None
    bad = species_problems(SimpleNamespace(**kwargs))
    problems.extend(f"{where}: {p}" for p in bad)
    if bad:
        return None
    return ResonantSpecies(**kwargs)


def parse_stack(document, name=""):
    """Build a LayerStack from a parsed YAML/JSON mapping.

    Every problem found is collected and reported together in a ConfigError.
    """
    problems = []
    if not isinstance(document, dict):
        raise ConfigError(["top level must be a mapping"])

    materials = {"vacuum": VACUUM}
    for mname, mdoc in (document.get("materials") or {}).items():
        if not isinstance(mdoc, dict) or "delta" not in mdoc or "beta" not in mdoc:
            problems.append(f"material {mname!r}: needs 'delta' and 'beta'")
            continue
        try:
            materials[str(mname)] = Material(str(mname), float(mdoc["delta"]), float(mdoc["beta"]))
        except (TypeError, ValueError) as exc:
            problems.append(f"material {mname!r}: {exc}")

    species_table = document.get("species") or {}
    raw_layers = document.get("layers")
    if not isinstance(raw_layers, list) or not raw_layers:
        problems.append("'layers' must be a non-empty list")
        raw_layers = []

    layers = []
    for j, ldoc in enumerate(raw_layers):
        where = f"layer {j}"
        if not isinstance(ldoc, dict):
            problems.append(f"{where}: must be a mapping")
            continue
        thickness = ldoc.get("thickness_nm", SEMI_INFINITE)
        mirror = thickness == MIRROR
        mname = ldoc.get("material", MIRROR if mirror else None)
        if mirror:
            material = _MIRROR_MATERIAL
        elif mname is None:
            problems.append(f"{where}: missing 'material'")
            material = None
        elif mname not in materials:
            problems.append(f"{where}: unknown material {mname!r}")
            material = None
        else:
            material = materials[mname]
        if thickness in (SEMI_INFINITE, MIRROR):
            value = None
        else:
            try:
                value = float(thickness)
            except (TypeError, ValueError):
                problems.append(f"{where}: thickness_nm must be a number, {SEMI_INFINITE!r} or {MIRROR!r}")
                value = None
            else:
                if not (np.isfinite(value) and value > 0):
                    problems.append(f"{where}: thickness must be positive, got {thickness}")
        resonant = ldoc.get("resonant")
        species = None
        if resonant is not None:
            if isinstance(resonant, str):
                if resonant not in species_table:
                    problems.append(f"{where}: unknown species {resonant!r}")
                else:
                    species = _species_from_mapping(resonant, species_table[resonant], where, problems)
            else:
                species = _species_from_mapping("resonant", resonant, where, problems)
        layers.append(Layer(material, value, species, mirror) if material is not None else None)

    partition = {}
    for key, count in (document.get("partition") or {}).items():
        try:
            index = int(key)
        except (TypeError, ValueError):
            problems.append(f"partition key {key!r} is not a layer index")
            continue
        if not (isinstance(count, int) and count >= 1):
            problems.append(f"partition for layer {index}: count must be a positive integer")
            continue
        if index < 0 or index >= len(raw_layers):
            problems.append(f"partition for layer {index}: no such layer")
            continue
        ldoc = raw_layers[index]
        if not isinstance(ldoc, dict) or ldoc.get("resonant") is None:
            problems.append(f"partition for layer {index}: layer is not resonant")
            continue
        partition[index] = count

    energy = document.get("energy_eV")
    if energy is not None:
        try:
            energy = float(energy)
            if not energy > 0:
                problems.append("energy_eV must be positive")
        except (TypeError, ValueError):
            problems.append("energy_eV must be a number")

    if not any(layer is None for layer in layers) and layers:
        problems.extend(stack_problems(layers))
    if problems:
        raise ConfigError(problems)
    return LayerStack(tuple(layers), tuple(partition.items()), energy, str(document.get("name", name)))


def serialize_stack(stack):
    """Mapping that parse_stack turns back into an equal LayerStack."""
    materials = {}
    layer_docs = []
    for layer in stack.layers:
        doc = {}
        if layer.mirror:
            doc["material"] = MIRROR
            doc["thickness_nm"] = MIRROR
        else:
            if layer.material != VACUUM:
                materials[layer.material.name] = {"delta": layer.material.delta, "beta": layer.material.beta}
            doc["material"] = layer.material.name
            doc["thickness_nm"] = SEMI_INFINITE if layer.thickness is None else layer.thickness
        if layer.resonant is not None:
            sp = layer.resonant
            doc["resonant"] = {"name": sp.name, **{key: getattr(sp, attr) for key, attr in _SPECIES_KEYS.items()}}
        layer_docs.append(doc)
    out = {}
    if stack.name:
        out["name"] = stack.name
    if stack.energy is not None:
        out["energy_eV"] = stack.energy
    out["materials"] = materials
    out["layers"] = layer_docs
    if stack.partition:
        out["partition"] = {k: v for k, v in stack.partition}
    return out


def load_stack(path):
    path = Path(path)
    with path.open() as fh:
        document = yaml.safe_load(fh)
    return parse_stack(document, name=path.stem)


def dump_stack(stack):
    return yaml.safe_dump(serialize_stack(stack), sort_keys=False)
