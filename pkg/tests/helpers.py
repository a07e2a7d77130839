"""Small stack builders shared by the test modules."""

from nucav.stack import parse_stack

FE = {"delta": 7.4293858185e-06, "beta": 3.388828143e-07}
PT = {"delta": 1.614687259521e-05, "beta": 2.476710912863e-06}
C = {"delta": 1.998816573e-06, "beta": 8.41039073e-10}
FE57 = {
    "resonance_energy_eV": 14412.5,
    "linewidth_eV": 4.7e-09,
    "internal_conversion": 8.56,
    "lamb_moessbauer": 0.8,
    "spin_ratio": 2.0,
    "number_density_nm3": 84.9,
    "abundance": 0.95,
}


def build(layers, materials=None, mirror=False, energy=14412.5, resonant=None):
    """layers: (material, thickness) pairs between vacuum and the substrate.

    The last pair is the substrate (thickness ignored) unless mirror is set.
    resonant: indices into the full layer list that carry Fe57.
    """
    resonant = set(resonant or ())
    rows = [{"material": "vacuum", "thickness_nm": "semi-infinite"}]
    body = layers if mirror else layers[:-1]
    for k, (name, t) in enumerate(body, start=1):
        row = {"material": name, "thickness_nm": float(t)}
        if k in resonant:
            row["resonant"] = "Fe57"
        rows.append(row)
    if mirror:
        rows.append({"material": "mirror", "thickness_nm": "mirror"})
    else:
        rows.append({"material": layers[-1][0], "thickness_nm": "semi-infinite"})
    doc = {
        "materials": materials if materials is not None else {"Fe": FE, "Pt": PT, "C": C},
        "layers": rows,
        "energy_eV": energy,
    }
    if resonant:
        doc["species"] = {"Fe57": FE57}
    return parse_stack(doc)
