"""Batch front end: ``casimir-surface <command> --config run.json --out DIR``.

Each run reads one JSON object and writes ``results.csv`` (one row per
sweep point) and ``results.json`` (inputs, outputs and per-frequency
breakdowns).  Both files depend on the configuration only; wall-clock
times go to ``timing.json``.

Configuration keys
------------------
command : str, optional
    ``lifshitz``, ``bem-energy``, ``sphere-sphere``, ``tmatrix`` or
    ``force``; the command line wins when both are given.
materials : object
    ``{"outer": material, "bodies": [material, ...]}`` with materials as
    ``{"kind": "Constant", "params": {"eps": 3}}``.
thermal : object
    ``{"mode": "ZeroT"}`` or ``{"mode": "FiniteT", "temperature": T,
    "n_max": N, "rel_tol": r}``.
geometry : object
    Command specific, see the README.
numerics : object
    Command specific tolerances and cutoffs.
sweep : list of float, optional
    Gap values (lifshitz) or centre distances (other commands); strictly
    positive and increasing.
"""

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import lifshitz
from .bem import energy as bem_energy
from .bem import force as bem_force
from .bem import mesh as bem_mesh
from .bem.operators import AssemblyError
from .bem.rwg import QuadratureOptions
from .materials import MaterialModel, MediumAssignment, StaticLimitError, permeability, permittivity
from .matsubara import ThermalSpec, weighted_sum
from .waves import scattering, tmatrix
from .waves.translation import TranslationAccuracyError

COMMANDS = ("lifshitz", "bem-energy", "sphere-sphere", "tmatrix", "force")
THREADS_ENV = "CASIMIR_SURFACE_THREADS"
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    """Invalid run configuration; the message starts with the field path."""


NUMERIC_ERRORS = (
    bem_energy.ConditioningError,
    AssemblyError,
    TranslationAccuracyError,
    scattering.ScatteringError,
    np.linalg.LinAlgError,
    FloatingPointError,
    StaticLimitError,
)


# -- config parsing ----------------------------------------------------------


def _get(obj, key, path, kind=None, default=None, required=False):
    if key not in obj:
        if required:
            raise ConfigError(f"{path}.{key}: required field is missing")
        return default
    value = obj[key]
    if kind is not None and not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(f"{path}.{key}: expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _positive(value, path):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
        raise ConfigError(f"{path}: must be a positive number")
    return float(value)


def _material(spec, path):
    if not isinstance(spec, dict):
        raise ConfigError(f"{path}: expected an object")
    try:
        return MaterialModel.from_dict(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def parse_media(config):
    spec = _get(config, "materials", "config", dict, required=True)
    outer = _material(spec.get("outer", {"kind": "Vacuum"}), "materials.outer")
    bodies = _get(spec, "bodies", "materials", list, required=True)
    if not bodies:
        raise ConfigError("materials.bodies: at least one body medium is required")
    return MediumAssignment(outer, [_material(b, f"materials.bodies[{i}]") for i, b in enumerate(bodies)])


def parse_thermal(config):
    spec = _get(config, "thermal", "config", dict, default={"mode": "ZeroT"})
    try:
        return ThermalSpec.from_dict(spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"thermal: {exc}") from None


def parse_sweep(config):
    values = _get(config, "sweep", "config", list, default=[])
    out = [_positive(v, f"sweep[{i}]") for i, v in enumerate(values)]
    for i in range(1, len(out)):
        if out[i] <= out[i - 1]:
            raise ConfigError(f"sweep[{i}]: values must be strictly increasing")
    return out


def parse_options(numerics):
    spec = _get(numerics, "quadrature", "numerics", dict, default={})
    try:
        return QuadratureOptions(**spec)
    except TypeError as exc:
        raise ConfigError(f"numerics.quadrature: {exc}") from None


def _vector(value, path, n=3):
    if not isinstance(value, list) or len(value) != n:
        raise ConfigError(f"{path}: expected a list of {n} numbers")
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a list of {n} numbers") from None


def build_body(spec, path, base_dir, refinement=None):
    """BodyMesh from a geometry record."""
    if not isinstance(spec, dict):
        raise ConfigError(f"{path}: expected an object")
    shape = _get(spec, "shape", path, str, required=True)
    center = _vector(spec.get("center", [0.0, 0.0, 0.0]), f"{path}.center")
    material = _get(spec, "material", path, int)
    ref = refinement if refinement is not None else _get(spec, "refinement", path, int, default=2)
    if ref < 0:
        raise ConfigError(f"{path}.refinement: must be >= 0")
    if shape == "sphere":
        radius = _positive(_get(spec, "radius", path, required=True), f"{path}.radius")
        return bem_mesh.make_sphere_mesh(radius, ref, center=center, material_index=material)
    if shape == "plate":
        side = _positive(_get(spec, "side", path, required=True), f"{path}.side")
        thickness = _positive(_get(spec, "thickness", path, required=True), f"{path}.thickness")
        base = _get(spec, "base", path, int, default=2)
        return bem_mesh.make_plate_mesh(side, thickness, ref, center=center, base=base, material_index=material)
    if shape == "box":
        size = _vector(_get(spec, "size", path, required=True), f"{path}.size")
        divisions = [int(v) for v in _vector(_get(spec, "divisions", path, required=True), f"{path}.divisions")]
        return bem_mesh.make_box_mesh(size, divisions, center=center, material_index=material)
    if shape == "file":
        file = Path(_get(spec, "path", path, str, required=True))
        file = file if file.is_absolute() else base_dir / file
        if not file.exists():
            raise ConfigError(f"{path}.path: file {file} does not exist")
        try:
            body = bem_mesh.read_panel_file(file, material_index=material)
        except bem_mesh.MeshError as exc:
            raise ConfigError(f"{path}.path: {exc}") from None
        return body.translated(np.asarray(center)) if "center" in spec else body
    raise ConfigError(f"{path}.shape: unknown shape {shape!r} (sphere, plate, box, file)")


# -- pipelines -----------------------------------------------------------------


def _with_distance(bodies, distance, spec):
    """Move the swept body so its centre sits ``distance`` from body 0 along the axis."""
    if distance is None:
        return bodies
    index = spec.get("sweep_body", len(bodies) - 1)
    axis = np.asarray(spec.get("sweep_axis", [0.0, 0.0, 1.0]), dtype=float)
    axis = axis / np.linalg.norm(axis)
    target = bodies[0].center + distance * axis
    out = list(bodies)
    out[index] = bodies[index].translated(target - bodies[index].center)
    return out


def _geometry_bodies(config, base_dir, refinement=None):
    geometry = _get(config, "geometry", "config", dict, required=True)
    specs = _get(geometry, "bodies", "geometry", list, required=True)
    if not specs:
        raise ConfigError("geometry.bodies: at least one body is required")
    return geometry, [build_body(s, f"geometry.bodies[{i}]", base_dir, refinement) for i, s in enumerate(specs)]


def run_lifshitz(config, base_dir):
    media = parse_media(config)
    thermal = parse_thermal(config)
    geometry = _get(config, "geometry", "config", dict, default={})
    numerics = _get(config, "numerics", "config", dict, default={})
    points = _get(numerics, "points", "numerics", int, default=lifshitz.GAUSS_POINTS)
    want_pressure = _get(numerics, "pressure", "numerics", bool, default=True)
    m1 = media.bodies[0]
    m2 = media.bodies[1] if len(media.bodies) > 1 else m1
    gaps = parse_sweep(config) or [_positive(_get(geometry, "gap", "geometry", required=True), "geometry.gap")]
    records = []
    for H in gaps:
        cfg = lifshitz.SlabConfig(H, media.outer, m1, m2, thermal)
        result = lifshitz.free_energy_per_area(cfg, points)
        P = lifshitz.pressure(cfg) if want_pressure else float("nan")
        records.append(
            {
                "inputs": {"H": H},
                "row": {"H": H, "T": thermal.temperature, "F_per_area": result.value, "pressure": P,
                        "n_terms": result.n_terms},
                "per_frequency": result.per_frequency,
                "flag": "converged" if result.converged else "truncated",
            }
        )
    return ["H", "T", "F_per_area", "pressure", "n_terms"], records


def _refinements(numerics):
    refs = _get(numerics, "refinements", "numerics", list)
    if refs is None:
        return [None]
    for i, r in enumerate(refs):
        if not isinstance(r, int) or r < 0:
            raise ConfigError(f"numerics.refinements[{i}]: must be a nonnegative integer")
    return refs


def run_bem_energy(config, base_dir):
    media = parse_media(config)
    thermal = parse_thermal(config)
    numerics = _get(config, "numerics", "config", dict, default={})
    options = parse_options(numerics)
    kappa = numerics.get("kappa")
    if kappa is not None:
        kappa = _positive(kappa, "numerics.kappa")
    representation = _get(numerics, "representation", "numerics", str, default="surface")
    if representation not in ("surface", "hamiltonian"):
        raise ConfigError("numerics.representation: expected 'surface' or 'hamiltonian'")
    term = bem_energy.surface_energy_term if representation == "surface" else bem_energy.hamiltonian_energy_term
    records = []
    for ref in _refinements(numerics):
        geometry, base = _geometry_bodies(config, base_dir, ref)
        for distance in parse_sweep(config) or [None]:
            bodies = _with_distance(base, distance, geometry)
            n = sum(3 * b.n_panels // 2 for b in bodies)
            if kappa is not None:
                value = term(bodies, media, kappa, options=options)
                per, flag = [(kappa, value)], "converged"
            else:
                result = bem_energy.free_energy(bodies, media, thermal, representation, options)
                value, per, flag = result.total, result.per_frequency, result.convergence.flag
            records.append(
                {
                    "inputs": {"refinement": ref, "distance": distance},
                    "row": {"refinement": -1 if ref is None else ref, "distance": _num(distance),
                            "kappa": _num(kappa), "energy": value, "unknowns": 2 * n},
                    "per_frequency": per,
                    "flag": flag,
                }
            )
    return ["refinement", "distance", "kappa", "energy", "unknowns"], records


def run_force(config, base_dir):
    media = parse_media(config)
    thermal = parse_thermal(config)
    numerics = _get(config, "numerics", "config", dict, default={})
    options = parse_options(numerics)
    body_index = _get(numerics, "body", "numerics", int, default=0)
    kappa = numerics.get("kappa")
    if kappa is not None:
        kappa = _positive(kappa, "numerics.kappa")
    fd_direction = numerics.get("fd_direction")
    records = []
    for ref in _refinements(numerics):
        geometry, base = _geometry_bodies(config, base_dir, ref)
        if not 0 <= body_index < len(base):
            raise ConfigError(f"numerics.body: no body {body_index}")
        for distance in parse_sweep(config) or [None]:
            bodies = _with_distance(base, distance, geometry)
            if kappa is not None:
                F = bem_force.force_trace(bodies, media, kappa, body_index, options=options)
                per = [(kappa, F.tolist())]
            else:
                F, per = bem_force.force_thermal(bodies, media, thermal, body_index, options)
                per = [(xi, f.tolist()) for xi, f in per]
            row = {"refinement": -1 if ref is None else ref, "distance": _num(distance), "kappa": _num(kappa),
                   "Fx": F[0], "Fy": F[1], "Fz": F[2]}
            if fd_direction is not None:
                u = _vector(fd_direction, "numerics.fd_direction")
                if kappa is not None:
                    row["F_fd"] = bem_force.force_fd_term(bodies, media, kappa, body_index, u, options=options)
                else:
                    row["F_fd"] = bem_force.force_fd(bodies, media, thermal, body_index, u, options=options)
            records.append({"inputs": {"refinement": ref, "distance": distance}, "row": row,
                            "per_frequency": per, "flag": "converged"})
    columns = ["refinement", "distance", "kappa", "Fx", "Fy", "Fz"] + (["F_fd"] if fd_direction is not None else [])
    return columns, records


def _tmatrix_source(kind, radius, material, media, numerics, options, center=(0.0, 0.0, 0.0)):
    if kind == "mie":
        return lambda kappa, L: tmatrix.sphere_tmatrix(radius, material, kappa, L)
    ref = _get(numerics, "refinement", "numerics", int, default=3)
    body = bem_mesh.make_sphere_mesh(radius, ref, center=center, material_index=0)
    single = MediumAssignment(media.outer, [material])
    return lambda kappa, L: tmatrix.tmatrix_from_surface(body, single, kappa, L, options)


def _require_vacuum(media):
    outer = media.outer
    if outer.kind.value != "Vacuum" and not (outer.kind.value == "Constant" and outer.eps == 1.0 and outer.mu == 1.0):
        raise ConfigError("materials.outer: T-matrices are defined with vacuum outside the bodies")


def run_sphere_sphere(config, base_dir):
    media = parse_media(config)
    _require_vacuum(media)
    thermal = parse_thermal(config)
    geometry = _get(config, "geometry", "config", dict, required=True)
    numerics = _get(config, "numerics", "config", dict, default={})
    options = parse_options(numerics)
    radii = _get(geometry, "radii", "geometry", list, required=True)
    if len(radii) != 2:
        raise ConfigError("geometry.radii: expected two radii")
    radii = [_positive(r, f"geometry.radii[{i}]") for i, r in enumerate(radii)]
    l_max = _get(numerics, "l_max", "numerics", int, default=10)
    adaptive = _get(numerics, "adaptive", "numerics", bool, default=False)
    source = _get(numerics, "tmatrix", "numerics", str, default="mie")
    if source not in ("mie", "surface"):
        raise ConfigError("numerics.tmatrix: expected 'mie' or 'surface'")
    kappa = numerics.get("kappa")
    if kappa is not None:
        kappa = _positive(kappa, "numerics.kappa")
    panel_points = _get(numerics, "panel_points", "numerics", int, default=8)
    m1 = media.bodies[0]
    m2 = media.bodies[1] if len(media.bodies) > 1 else m1
    makers = [_tmatrix_source(source, r, m, media, numerics, options) for r, m in zip(radii, (m1, m2))]
    distances = parse_sweep(config) or [_positive(_get(geometry, "distance", "geometry", required=True), "geometry.distance")]
    records = []
    for d in distances:
        if d <= sum(radii):
            raise ConfigError(f"sweep: centre distance {d} does not exceed the sum of the radii")
        used = []

        def term(xi, d=d, used=used):
            k = xi if xi > 0 else 1e-3 / d
            if adaptive:
                value, L, _ = scattering.adaptive_scattering_energy(lambda b, L: makers[b](k, L), d, k, l_max)
            else:
                L = l_max
                value = scattering.scattering_energy(makers[0](k, L), makers[1](k, L), d, k, L)
            used.append(L)
            return value

        if kappa is not None:
            value = term(kappa)
            per, flag = [(kappa, value)], "converged"
        else:
            report = weighted_sum(term, thermal, panel_points=panel_points, xi_min=0.05 / d)
            value, per, flag = report.value, report.terms, report.flag
        records.append(
            {
                "inputs": {"distance": d},
                "row": {"distance": d, "kappa": _num(kappa), "energy": value, "l_max": max(used)},
                "per_frequency": per,
                "flag": flag,
            }
        )
    return ["distance", "kappa", "energy", "l_max"], records


def run_tmatrix(config, base_dir):
    media = parse_media(config)
    _require_vacuum(media)
    numerics = _get(config, "numerics", "config", dict, default={})
    options = parse_options(numerics)
    geometry = _get(config, "geometry", "config", dict, required=True)
    l_max = _get(numerics, "l_max", "numerics", int, default=3)
    kappas = _get(numerics, "kappas", "numerics", list)
    if kappas is None:
        kappas = [_get(numerics, "kappa", "numerics", required=True)]
    kappas = [_positive(k, f"numerics.kappas[{i}]") for i, k in enumerate(kappas)]
    specs = _get(geometry, "bodies", "geometry", list)
    spec = specs[0] if specs else geometry
    body = build_body(spec, "geometry.bodies[0]" if specs else "geometry", base_dir)
    if body.material_index is None:
        body = body.with_material(0)
    material = media.bodies[body.material_index]
    is_sphere = spec.get("shape") == "sphere"
    records = []
    for kappa in kappas:
        T = tmatrix.tmatrix_from_surface(body, media, kappa, l_max, options)
        for i, idx in enumerate(T.indices):
            row = {"kappa": kappa, "p": idx.p, "l": idx.l, "m": idx.m, "T": float(T.data[i, i].real)}
            if is_sphere:
                row["T_mie"] = float(np.real(tmatrix.mie_coefficients(
                    idx.p, idx.l, kappa, spec["radius"], permittivity(material, kappa), permeability(material, kappa)
                )))
            records.append({"inputs": {"kappa": kappa, "index": [idx.p, idx.l, idx.m]}, "row": row,
                            "per_frequency": [], "flag": "converged"})
        off = T.data - np.diag(np.diag(T.data))
        records[-1]["matrix"] = {"real": T.data.real.tolist(), "imag": T.data.imag.tolist(),
                                 "max_offdiagonal": float(np.abs(off).max())}
    columns = ["kappa", "p", "l", "m", "T"] + (["T_mie"] if is_sphere else [])
    return columns, records


PIPELINES = {
    "lifshitz": run_lifshitz,
    "bem-energy": run_bem_energy,
    "force": run_force,
    "sphere-sphere": run_sphere_sphere,
    "tmatrix": run_tmatrix,
}


def _num(x):
    return float("nan") if x is None else x


def _finite(records):
    for r in records:
        for key, value in r["row"].items():
            if isinstance(value, (float, np.floating)) and not np.isfinite(value) and key not in ("distance", "kappa", "pressure"):
                raise FloatingPointError(f"non-finite output {key} = {value}")


def run(config, command=None, base_dir="."):
    """Run one configuration and return ``(columns, records)``."""
    if not isinstance(config, dict):
        raise ConfigError("config: expected a JSON object")
    command = command or config.get("command")
    if command not in PIPELINES:
        raise ConfigError(f"command: expected one of {', '.join(COMMANDS)}, got {command!r}")
    columns, records = PIPELINES[command](config, Path(base_dir))
    _finite(records)
    return columns, records


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value) if np.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def _format(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_outputs(out_dir, command, config, columns, records, elapsed):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns + ["flag"])
        for r in records:
            writer.writerow([_format(r["row"].get(c, "")) for c in columns] + [r["flag"]])
    sidecar = {"command": command, "config": config, "records": records}
    with open(out / "results.json", "w") as fh:
        json.dump(_jsonable(sidecar), fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(out / "timing.json", "w") as fh:
        json.dump({"wall_clock_seconds": elapsed}, fh)
        fh.write("\n")


def thread_budget(requested):
    """Thread count after the environment override; 0 means automatic."""
    env = os.environ.get(THREADS_ENV)
    if env is not None and env.strip():
        try:
            requested = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV}: expected an integer, got {env!r}") from None
    if requested < 0:
        raise ConfigError("--threads: must be >= 0")
    return requested or os.cpu_count() or 1


def _limit_threads(n):
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return None
    return threadpool_limits(limits=n)


def build_parser():
    parser = argparse.ArgumentParser(prog="casimir-surface", description=__doc__.split("\n")[0])
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="pipeline; defaults to the config's 'command'")
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default="casimir-out", help="output directory")
    parser.add_argument("--threads", type=int, default=0, help=f"thread budget, 0 = auto (env {THREADS_ENV} wins)")
    parser.add_argument("--seed", type=int, default=None, help="reserved; the computations use no randomness")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        path = Path(args.config)
        try:
            config = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"--config: file {path} does not exist") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--config: invalid JSON ({exc})") from None
        command = args.command or (config.get("command") if isinstance(config, dict) else None)
        limiter = _limit_threads(thread_budget(args.threads))
        start = time.perf_counter()
        try:
            columns, records = run(config, command, path.parent)
        finally:
            if limiter is not None:
                limiter.unregister() if hasattr(limiter, "unregister") else None
        write_outputs(args.out, command, config, columns, records, time.perf_counter() - start)
    except (ConfigError, bem_mesh.MeshError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"{command}: {len(records)} record(s) written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
