"""Command-line front end: ``ionjch {crystal,mott,ground,sweep}``.

Parameters come from flags, from an INI-style ``--config`` file (one
section per subcommand, keys named like the long flags with underscores),
or from built-in defaults, in that order of precedence.

Exit codes: 0 ok, 2 usage/config error, 3 domain error, 4 solver failure.
"""

import argparse
import configparser
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .crystal import (
    PhysicalTrapConfig,
    coupling_geometry,
    equilibrium_positions,
    mode_matrix,
    physical_to_model,
    radial_modes,
)
from .errors import CapacityError, ConsistencyError, DomainError, SolverError
from .fockspace import build_sector
from .hamiltonian import HamiltonianSpec, build
from .observables import measure, mott_lobes
from .solver import ground_state
from .sweeps import SweepSpec, classify_phases, default_workers, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_SOLVER = 0, 2, 3, 4

# key -> (type, default); None default means "required"
_SCHEMA = {
    "crystal": {"ions": (int, None), "alpha": (float, 0.1), "t_scale": (float, math.nan)},
    "mott": {
        "delta_min": (float, -15.0),
        "delta_max": (float, 15.0),
        "steps": (int, 301),
        "n_max": (int, 5),
        "validate": (bool, False),
    },
    "ground": {
        "ions": (int, None),
        "excitations": (int, None),
        "t": (float, None),
        "delta": (float, None),
        "method": (str, "auto"),
        "no_site_frequencies": (bool, False),
    },
    "sweep": {
        "ions": (int, 5),
        "excitations": (int, 5),
        "t": (float, 0.3),
        "delta_min": (float, -15.0),
        "delta_max": (float, 15.0),
        "steps": (int, 301),
        "method": (str, "auto"),
        "no_site_frequencies": (bool, False),
        "classify": (bool, False),
        "eps_mi": (float, 0.1),
        "workers": (int, None),
    },
}
_PHYSICAL = ("omega_z", "omega_x", "rabi", "lamb_dicke")


class UsageError(Exception):
    pass


def fmt(x):
    """17-significant-digit, locale-independent number formatting."""
    return format(float(x), ".17g")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(type(obj))


def _clean(obj):
    # JSON has no inf/nan
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps_json(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default) + "\n"


# --- argument handling --------------------------------------------------------


def _add_units(p):
    p.add_argument("--units", choices=("g", "physical"), default=None)
    p.add_argument("--omega-z", type=float, default=None)
    p.add_argument("--omega-x", type=float, default=None)
    p.add_argument("--rabi", type=float, default=None)
    p.add_argument("--lamb-dicke", type=float, default=None)


def make_parser():
    parser = argparse.ArgumentParser(prog="ionjch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="INI file with a section per subcommand")
    common.add_argument("-o", "--output", default=None, help="output file (default stdout)")

    p = sub.add_parser("crystal", parents=[common], help="chain geometry and radial modes")
    p.add_argument("--ions", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--t-scale", type=float, help="alpha*omega_z/2 in units of g, for g-unit couplings")

    p = sub.add_parser("mott", parents=[common], help="single-site chemical potential curves")
    p.add_argument("--delta-min", type=float)
    p.add_argument("--delta-max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--validate", action="store_true", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("ground", parents=[common], help="ground state at one detuning")
    p.add_argument("--ions", type=int)
    p.add_argument("--excitations", type=int)
    p.add_argument("--t", type=float, help="hopping scale t/g")
    p.add_argument("--delta", type=float, help="detuning (units of g, or physical with --units physical)")
    p.add_argument("--method", choices=("auto", "dense", "iterative"))
    p.add_argument("--no-site-frequencies", action="store_true", default=None)
    p.add_argument("--dump-matrix", default=None)
    p.add_argument("--dump-basis", default=None)
    _add_units(p)

    p = sub.add_parser("sweep", parents=[common], help="detuning sweep of site fluctuations")
    p.add_argument("--ions", type=int)
    p.add_argument("--excitations", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--delta-min", type=float)
    p.add_argument("--delta-max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--method", choices=("auto", "dense", "iterative"))
    p.add_argument("--no-site-frequencies", action="store_true", default=None)
    p.add_argument("--classify", action="store_true", default=None)
    p.add_argument("--eps-mi", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_units(p)
    return parser


def _convert(kind, raw, key):
    if kind is bool:
        if isinstance(raw, bool):
            return raw
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"key '{key}': expected a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise UsageError(f"key '{key}': cannot parse {raw!r} as {kind.__name__}") from None


def resolve(args):
    """Merge defaults, config-file values and flags into one parameter dict."""
    cmd = args.command
    schema = dict(_SCHEMA[cmd])
    extra = {"units": (str, "g")} if cmd in ("ground", "sweep") else {}
    extra.update({k: (float, math.nan) for k in _PHYSICAL} if extra else {})
    schema.update(extra)

    file_vals = {}
    if args.config:
        cp = configparser.ConfigParser()
        try:
            with open(args.config, encoding="utf-8") as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if cp.has_section(cmd):
            file_vals = dict(cp.items(cmd))
        unknown = set(file_vals) - set(schema)
        if unknown:
            raise UsageError(f"unknown key(s) in [{cmd}]: {', '.join(sorted(unknown))}")

    out = {}
    for key, (kind, default) in schema.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in file_vals:
            out[key] = _convert(kind, file_vals[key], key)
        else:
            out[key] = default

    physical = out.get("units") == "physical"
    if physical:
        missing = [k for k in _PHYSICAL if not math.isfinite(out[k])]
        if missing:
            raise UsageError(f"physical units need key '{missing[0]}'")
    elif out.get("units") not in (None, "g"):
        raise UsageError(f"key 'units': expected 'g' or 'physical', got {out['units']!r}")

    for key, value in out.items():
        if value is None and key != "workers" and not (physical and key == "t"):
            raise UsageError(f"missing required key '{key}'")
    return out


def _physical_model(p, delta):
    cfg = PhysicalTrapConfig(
        n_ions=p["ions"],
        omega_z=p["omega_z"],
        omega_x=p["omega_x"],
        rabi=p["rabi"],
        lamb_dicke=p["lamb_dicke"],
        delta=delta,
    )
    return cfg, physical_to_model(cfg)


# --- subcommands -------------------------------------------------------------


def cmd_crystal(p):
    n, alpha = p["ions"], p["alpha"]
    u = equilibrium_positions(n)
    modes = radial_modes(mode_matrix(u), alpha)
    # omega_k and t_km relative to omega_x share the prefactor alpha^2/2
    in_wx = coupling_geometry(u, alpha**2 / 2.0)
    report = {
        "n_ions": n,
        "alpha": alpha,
        "positions": u,
        "modes": [
            {
                "p": i + 1,
                "lambda": modes.eigenvalues[i],
                "b": modes.eigenvectors[:, i],
                "gamma": modes.gammas[i],
                "theta": modes.thetas[i],
                "cosh_theta_minus_1": modes.cosh_deviation()[i],
                "omega_p_over_omega_x": modes.collective_frequencies[i],
            }
            for i in range(n)
        ],
        "site_frequencies_over_omega_x": in_wx.site_frequencies,
        "hopping_over_omega_x": _pairs(in_wx.hopping),
        "version": __version__,
    }
    if math.isfinite(p["t_scale"]):
        in_g = coupling_geometry(u, p["t_scale"])
        report["t_scale_over_g"] = p["t_scale"]
        report["site_frequencies_over_g"] = in_g.site_frequencies
        report["hopping_over_g"] = _pairs(in_g.hopping)
    return dumps_json(report)


def _pairs(mat):
    n = mat.shape[0]
    return [{"k": k + 1, "m": m + 1, "value": mat[k, m]} for k in range(n) for m in range(k + 1, n)]


def _grid(p, scale=1.0):
    if p["steps"] < 2 or not p["delta_min"] < p["delta_max"]:
        raise DomainError("grid needs steps >= 2 and delta_min < delta_max")
    return np.linspace(p["delta_min"] / scale, p["delta_max"] / scale, p["steps"])


def cmd_mott(p, fmt_name="csv"):
    grid = _grid(p)
    n_max = p["n_max"]
    curves = mott_lobes(grid, n_max, validate=p["validate"])
    if fmt_name == "json":
        return dumps_json(
            {
                "delta_over_g": grid,
                "mu": {str(c.n): c.mu for c in curves},
                "dmu": {str(c.n): c.lobe_width for c in curves if c.lobe_width is not None},
                "version": __version__,
            }
        )
    header = ["delta_over_g"] + [f"mu_{n}" for n in range(n_max + 1)]
    header += [f"dmu_{k}" for k in range(n_max)]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for j, d in enumerate(grid):
        vals = [d] + [c.mu[j] for c in curves] + [c.lobe_width[j] for c in curves[:n_max]]
        buf.write(",".join(fmt(v) for v in vals) + "\n")
    return buf.getvalue()


def _hamiltonian_inputs(p):
    """(t_over_g, delta_over_g, extra provenance) for ground/sweep in either unit mode."""
    if p["units"] == "physical":
        cfg, model = _physical_model(p, p["delta"] if p.get("delta") is not None else 0.0)
        return model.t_scale, model.delta_over_g, cfg.g, {"rwa_warning": model.rwa_warning}
    return p["t"], p.get("delta"), 1.0, {}


def cmd_ground(p):
    t, delta, _, extra = _hamiltonian_inputs(p)
    n, m = p["ions"], p["excitations"]
    geometry = coupling_geometry(equilibrium_positions(n), t)
    basis = build_sector(n, m)
    spec = HamiltonianSpec(geometry, delta, include_site_frequencies=not p["no_site_frequencies"])
    op = build(spec, basis)
    if p.get("dump_matrix"):
        op.dump(p["dump_matrix"])
    if p.get("dump_basis"):
        basis.dump(p["dump_basis"])
    res = ground_state(op, method=p["method"])
    obs = measure(res, basis, delta_over_g=delta, t_over_g=t)
    return dumps_json(
        {
            "energy": res.energy,
            "gap": res.gap,
            "degenerate": res.degenerate,
            "observables": obs.to_dict(),
            "solver": {"method": res.method, "iterations": res.iterations, "residual": res.residual},
            "provenance": {
                "version": __version__,
                "basis_fingerprint": basis.fingerprint,
                "dimension": basis.dimension,
                "include_site_frequencies": spec.include_site_frequencies,
                **extra,
            },
        }
    )


def sweep_spec(p):
    scale = 1.0
    t = p["t"]
    if p["units"] == "physical":
        _, model = _physical_model(p, 0.0)
        t = model.t_scale
        scale = p["lamb_dicke"] * p["rabi"]
    grid = _grid(p, scale)
    workers = p["workers"] if p["workers"] is not None else default_workers()
    return SweepSpec(
        n_ions=p["ions"],
        n_excitations=p["excitations"],
        t_over_g=t,
        delta_min=float(grid[0]),
        delta_max=float(grid[-1]),
        steps=p["steps"],
        include_site_frequencies=not p["no_site_frequencies"],
        method=p["method"],
        eps_mi=p["eps_mi"],
        workers=workers,
    )


def sweep_csv(result, labels=None):
    n = result.spec.n_ions
    header = ["delta_over_g", "energy", "gap", "degenerate"]
    for k in range(1, n + 1):
        header += [f"meanN_{k}", f"varN_{k}", f"meanNa_{k}", f"varNa_{k}", f"meann_{k}"]
    if labels is not None:
        header += [f"phase_{k}" for k in range(1, n + 1)]
    header.append("status")
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for i, row in enumerate(result.rows):
        cells = [fmt(row.delta_over_g), fmt(row.energy), fmt(row.gap), str(int(row.degenerate))]
        obs = row.observables
        for k in range(n):
            if obs is None:
                cells += ["nan"] * 5
            else:
                cells += [
                    fmt(obs.mean_total[k]),
                    fmt(obs.var_total[k]),
                    fmt(obs.mean_qubit[k]),
                    fmt(obs.var_qubit[k]),
                    fmt(obs.mean_phonon[k]),
                ]
        if labels is not None:
            cells += labels[i] if labels[i] is not None else [""] * n
        cells.append("ok" if row.ok else '"' + row.status.replace('"', "'") + '"')
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def cmd_sweep(p, fmt_name="csv"):
    spec = sweep_spec(p)
    result = run_sweep(spec)
    labels = classify_phases(result) if p["classify"] else None
    if fmt_name == "json":
        text = dumps_json(
            {
                "provenance": result.provenance(),
                "rows": [
                    {
                        "delta_over_g": r.delta_over_g,
                        "energy": r.energy,
                        "gap": r.gap,
                        "degenerate": r.degenerate,
                        "status": r.status,
                        "observables": None if r.observables is None else r.observables.to_dict(),
                        **({"phases": labels[i]} if labels is not None else {}),
                    }
                    for i, r in enumerate(result.rows)
                ],
            }
        )
    else:
        text = sweep_csv(result, labels)
    return text, result


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        p = resolve(args)
        if args.command == "crystal":
            _emit(cmd_crystal(p), args.output)
        elif args.command == "mott":
            _emit(cmd_mott(p, args.format), args.output)
        elif args.command == "ground":
            p.update(dump_matrix=args.dump_matrix, dump_basis=args.dump_basis)
            _emit(cmd_ground(p), args.output)
        else:
            text, result = cmd_sweep(p, args.format)
            if result.n_failed == len(result.rows):
                print(f"ionjch: all {len(result.rows)} sweep points failed", file=sys.stderr)
                return EXIT_SOLVER
            _emit(text, args.output)
            if result.n_failed:
                print(f"ionjch: warning: {result.n_failed} sweep points failed", file=sys.stderr)
    except UsageError as exc:
        print(f"ionjch {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ConsistencyError) as exc:
        print(f"ionjch {args.command}: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (SolverError, CapacityError) as exc:
        print(f"ionjch {args.command}: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
