"""nucav command line: sweeps, level schemes, comparisons and fits."""

import argparse
import json
import re
import sys
from pathlib import Path

from . import analysis, fewmode
from .levelscheme import build_level_scheme
from .stack import ConfigError, load_stack
from .units import DEFAULT_ANGLE_GRID_MRAD, DEFAULT_DETUNING_GRID, grid, mrad

EXIT_THRESHOLD = 1
EXIT_USAGE = 2


def _grid_arg(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be START,STOP,COUNT")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p, route_choices=analysis.ROUTES, route_default="oracle"):
    p.add_argument("--config", required=True, type=Path, help="stack configuration (YAML)")
    p.add_argument("--route", choices=route_choices, default=route_default)
    p.add_argument("--modes", default="20", help="few-mode set: N, A-B or comma list")
    p.add_argument("--subensembles", type=int, default=None, help="sub-ensembles per resonant layer")
    p.add_argument("--thick-layer", type=float, default=None, metavar="NM",
                   help="few-mode route: continuous slab; with a value, resize the centred resonant layer")
    p.add_argument("--out", type=Path, default=None, help="output file (default stdout)")


def _angles(p, default=DEFAULT_ANGLE_GRID_MRAD):
    p.add_argument("--angles", type=_grid_arg, default=default, metavar="START,STOP,COUNT", help="mrad")


def _detuning(p):
    p.add_argument("--detuning", type=_grid_arg, default=DEFAULT_DETUNING_GRID,
                   metavar="START,STOP,COUNT", help="linewidths")


def build_parser():
    parser = argparse.ArgumentParser(prog="nucav", description="X-ray thin-film cavities with Moessbauer nuclei.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rocking", help="off-resonant reflectivity versus angle")
    _common(p, ("oracle", "fewmode"))
    _angles(p)
    p.add_argument("--energy", type=float, default=None, help="photon energy, eV")

    p = sub.add_parser("map2d", help="2D reflectance map")
    _common(p)
    _angles(p)
    _detuning(p)
    p.add_argument("--energies", type=_grid_arg, default=None, metavar="START,STOP,COUNT",
                   help="eV; selects an off-resonant energy-angle map instead of angle-detuning")

    p = sub.add_parser("spectrum", help="nuclear spectrum at one angle")
    _common(p)
    _detuning(p)
    p.add_argument("--angle", type=float, required=True, help="mrad")

    p = sub.add_parser("scheme", help="effective level scheme (JSON)")
    _common(p, ("green", "fewmode"), "green")
    p.add_argument("--angle", type=float, required=True, help="mrad")

    p = sub.add_parser("compare", help="route versus oracle deviation report (JSON)")
    _common(p, ("fewmode", "green"), "fewmode")
    _angles(p, (1.0, 8.5, 200))
    _detuning(p)
    p.add_argument("--check", action="store_true", help="exit nonzero when max_abs_dev >= --tol")
    p.add_argument("--tol", type=float, default=0.02)

    p = sub.add_parser("converge", help="deviation versus resolution (CSV)")
    _common(p, ("fewmode", "green"), "fewmode")
    _angles(p, (1.0, 8.5, 76))
    _detuning(p)
    p.add_argument("--levels", default=None, help="comma list of mode or sub-ensemble counts")

    p = sub.add_parser("fano", help="per-angle Fano fits (CSV)")
    _common(p, ("oracle", "green", "fewmode"))
    _angles(p, (2.0, 8.5, 27))
    _detuning(p)

    p = sub.add_parser("fewmode", help="few-mode route outputs")
    _common(p, ("fewmode",), "fewmode")
    _angles(p)
    _detuning(p)
    p.add_argument("--emit", choices=("rocking", "map2d", "spectrum", "scheme", "converge"), default="map2d")
    p.add_argument("--angle", type=float, default=None, help="mrad, for spectrum and scheme")
    return parser


def _stack(args):
    stack = load_stack(args.config)
    if args.thick_layer is not None and args.route == "fewmode":
        stack = analysis.centered_resonant_cavity(stack, args.thick_layer)
    return stack


def _thick(args):
    return args.thick_layer is not None


def _write(args, text):
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)


def cmd_rocking(args):
    stack = _stack(args)
    theta = mrad(grid(*args.angles))
    spec = analysis.rocking_spectrum(stack, theta, args.route, args.modes, args.energy)
    _write(args, analysis.spectrum_csv(spec))
    return 0


def cmd_map2d(args):
    stack = _stack(args)
    theta = mrad(grid(*args.angles))
    if args.energies is not None:
        spec = analysis.energy_angle_spectrum(stack, grid(*args.energies), theta, args.route, args.modes)
    else:
        spec = analysis.nuclear_spectrum_map(stack, theta, grid(*args.detuning), args.route,
                                             args.modes, args.subensembles, _thick(args))
    _write(args, analysis.spectrum_csv(spec))
    return 0


def cmd_spectrum(args):
    stack = _stack(args)
    spec = analysis.nuclear_spectrum_map(stack, [mrad(args.angle)], grid(*args.detuning), args.route,
                                         args.modes, args.subensembles, _thick(args))
    one = analysis.Spectrum((spec.axes[1],), spec.amplitude[0], spec.route)
    _write(args, analysis.spectrum_csv(one))
    return 0


def cmd_scheme(args):
    stack = _stack(args)
    theta = float(mrad(args.angle))
    if args.route == "green":
        _write(args, analysis.scheme_json(build_level_scheme(stack, theta, args.subensembles)))
        return 0
    fm = fewmode.fewmode_scheme(stack, theta, args.modes, args.subensembles)
    doc = {
        "angle_mrad": args.angle,
        "modes": list(fewmode.parse_modes(args.modes)),
        "coupling_re": [float(v) for v in fm.coupling.real.ravel()],
        "coupling_im": [float(v) for v in fm.coupling.imag.ravel()],
        "lamb_shift": [float(v) for v in fm.lamb_shift],
        "superradiance": [float(v) for v in fm.superradiance],
        "drive_re": [float(v) for v in fm.drive.real],
        "drive_im": [float(v) for v in fm.drive.imag],
    }
    _write(args, json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_compare(args):
    stack = _stack(args)
    theta = mrad(grid(*args.angles))
    detuning = grid(*args.detuning)
    ref = analysis.nuclear_spectrum_map(stack, theta, detuning, "oracle")
    cand = analysis.nuclear_spectrum_map(stack, theta, detuning, args.route, args.modes,
                                         args.subensembles, _thick(args))
    report = analysis.compare(cand, ref, args.tol if args.check else None)
    doc = report.to_dict()
    doc.update(cand.meta)
    _write(args, json.dumps(doc, indent=2) + "\n")
    if args.check and not report.passed:
        json.dump({"error": "threshold", "max_abs_dev": report.max_abs_dev, "tol": args.tol}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_THRESHOLD
    return 0


def cmd_converge(args):
    stack = _stack(args)
    if args.levels:
        levels = [int(v) for v in args.levels.split(",")]
    else:
        levels = [5, 10, 20, 30] if args.route == "fewmode" else [1, 2, 4, 8]
    rows = analysis.convergence(stack, mrad(grid(*args.angles)), grid(*args.detuning), args.route,
                                levels, args.modes, args.subensembles)
    _write(args, analysis.csv_text(["level", "max_abs_dev", "max_rel_dev"], rows))
    return 0


def cmd_fano(args):
    stack = _stack(args)
    rows = analysis.fano_sweep(stack, mrad(grid(*args.angles)), grid(*args.detuning), args.route, args.subensembles)
    _write(args, analysis.csv_text(analysis.FANO_HEADER, rows))
    return 0


def cmd_fewmode(args):
    if args.emit in ("spectrum", "scheme") and args.angle is None:
        raise ValueError(f"--emit {args.emit} needs --angle")
    for name in ("energies", "energy", "levels"):
        setattr(args, name, getattr(args, name, None))
    return COMMANDS[args.emit](args)


COMMANDS = {
    "rocking": cmd_rocking,
    "map2d": cmd_map2d,
    "spectrum": cmd_spectrum,
    "scheme": cmd_scheme,
    "compare": cmd_compare,
    "converge": cmd_converge,
    "fano": cmd_fano,
    "fewmode": cmd_fewmode,
}


_GRID_FLAGS = ("--angles", "--detuning", "--energies")


def _attach_negative_values(argv):
    # argparse reads "-100,100,401" as an option; glue it to its flag
    out, i = [], 0
    while i < len(argv):
        token = argv[i]
        if token in _GRID_FLAGS and i + 1 < len(argv) and re.match(r"^-[\d.]", argv[i + 1]):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
        else:
            out.append(token)
            i += 1
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_negative_values(argv))
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        json.dump({"error": "config", "problems": exc.problems}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
