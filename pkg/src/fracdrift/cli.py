"""Configuration-driven command-line front door.

Subcommands: compute-cp, build-phi, eval-distance, solve-dirichlet,
solve-obstacle, fit-expansion, holder, factorize, report.  Every run writes
the resolved configuration next to its outputs; fixed iteration orders and
seeds make reruns byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

from . import expansion as expn
from . import obstacle as obst
from .domains import domain_from_config, generalized_distance
from .errors import ConfigError, FracDriftError
from .flatcase import compute_cp, cp_scan, sign_changes
from .kernels import kernel_from_config
from .phimap import build_phi, invert_phi, phi_to_dict
from .solver import assemble_operator, gradient, make_grid, solve_dirichlet

KERNEL_SCHEMA = {
    "type": "object",
    "required": ["s", "n"],
    "properties": {
        "s": {"type": "number", "exclusiveMinimum": 0.0, "exclusiveMaximum": 1.0},
        "n": {"enum": [1, 2]},
        "angular": {
            "type": "object",
            "properties": {
                "type": {"enum": ["constant", "cosine", "series"]},
                "coeffs": {"type": "array", "items": {"type": "number"}},
                "value": {"type": "number"},
            },
        },
        "normalized": {"type": "boolean"},
    },
}

DOMAIN_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["interval", "disk", "graph"]},
        "a": {"type": "number"},
        "b": {"type": "number"},
        "center": {"type": "array", "items": {"type": "number"}},
        "r": {"type": "number", "exclusiveMinimum": 0.0},
        "beta": {"type": "number"},
        "g": {"type": "object"},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["problem"],
    "properties": {
        "problem": {
            "enum": [
                "compute-cp",
                "phi",
                "dirichlet",
                "obstacle",
                "flatcase",
                "expansion",
                "distance",
                "factorize",
                "report",
            ]
        },
        "kernel": KERNEL_SCHEMA,
        "domain": DOMAIN_SCHEMA,
        "b": {"type": ["number", "array"]},
        "f": {"type": "object"},
        "obstacle": {"type": "object"},
        "grid": {"type": "object"},
        "seed": {"type": "integer"},
        "p": {"type": "number"},
        "p_min": {"type": "number"},
        "p_max": {"type": "number"},
        "step": {"type": "number"},
        "degree": {"type": "integer", "minimum": 0},
        "beta": {"type": "number"},
        "eta": {"type": "object"},
        "window": {"type": "array", "items": {"type": "number"}},
        "criteria": {"type": "array", "items": {"type": "integer"}},
    },
}


def validate_config(cfg, schema=CONFIG_SCHEMA):
    if jsonschema is None:  # pragma: no cover
        return
    try:
        jsonschema.validate(cfg, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(exc.message, path=list(exc.absolute_path)) from None


def load_config(path):
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
    validate_config(cfg)
    return cfg


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path, header, rows, comments=()):
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _emit_config(cfg, outdir):
    with open(os.path.join(outdir, "config.resolved.json"), "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")


def closed_form_function(cfg, default="constant"):
    """Closed-form tags for right-hand sides and obstacles."""
    cfg = cfg or {"type": default}
    kind = cfg.get("type", default)
    if kind == "constant":
        c = float(cfg.get("value", 1.0))
        return lambda x: np.full_like(np.asarray(x, dtype=float), c)
    if kind == "poly":
        coeffs = list(cfg.get("coeffs", [1.0]))
        return lambda x: np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)
    if kind == "bump":
        return lambda x: obst.smooth_bump(
            x,
            amplitude=float(cfg.get("amplitude", 0.5)),
            width=float(cfg.get("width", math.sqrt(0.5))),
            center=float(cfg.get("center", 0.0)),
        )
    if kind == "cosine":
        a = float(cfg.get("amplitude", 1.0))
        k = float(cfg.get("freq", 1.0))
        return lambda x: a * (1.0 + np.cos(k * np.asarray(x, dtype=float)))
    raise ConfigError(f"unknown closed-form tag {kind!r}", path=("f", "type"))


# -- subcommand implementations --------------------------------------------


def cmd_compute_cp(cfg, outdir):
    s = float(cfg["kernel"]["s"])
    p_min = float(cfg.get("p_min", 0.1))
    p_max = float(cfg.get("p_max", 2 * s - 0.05))
    step = float(cfg.get("step", 0.05))
    rows = cp_scan(s, p_min, p_max, step)
    write_csv(
        os.path.join(outdir, "cp_scan.csv"),
        ["p", "c_p", "quadrature_error_estimate", "flags"],
        rows,
        comments=[
            "p: power exponent [dimensionless]",
            "c_p: finite-part second-difference constant [dimensionless, raw kernel]",
            "quadrature_error_estimate: |difference between two quadrature splits|",
            "flags: log-resonance marker",
        ],
    )
    flips = sign_changes([r[1] for r in rows])
    verdict = {"s": s, "sign_changes": len(flips), "zero_near": s}
    with open(os.path.join(outdir, "cp_scan.json"), "w") as fh:
        json.dump(verdict, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0 if len(flips) == 1 else 2


def cmd_build_phi(cfg, outdir):
    kernel = kernel_from_config(cfg["kernel"])
    p = float(cfg["p"])
    degree = int(cfg.get("degree", 1))
    phi = build_phi(kernel, p, degree, quality=cfg.get("quality", "standard"))
    payload = phi_to_dict(phi)
    upper, norm = phi.triangularity_defect()
    payload["triangularity_defect"] = upper / norm if norm else 0.0
    with open(os.path.join(outdir, "phi.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_eval_distance(cfg, outdir):
    domain = domain_from_config(cfg["domain"])
    dist = generalized_distance(domain)
    n_samples = int(cfg.get("grid", {}).get("n", 256))
    rows = []
    if domain.kind == "interval":
        xs = np.linspace(domain.a, domain.b, n_samples + 2)[1:-1]
        for x in xs:
            rows.append(
                (
                    x,
                    float(dist(x)),
                    dist.directional(x, 1.0, 1),
                    dist.directional(x, 1.0, 2),
                )
            )
        header = ["x", "d", "d1", "d2"]
    else:
        if domain.kind == "disk":
            ray = np.asarray(domain.center) + np.array([0.0, 1.0]) * 0.0
            ts = np.linspace(0.0, domain.radius, n_samples + 1)[:-1]
            pts = np.asarray(domain.center)[None, :] + np.stack(
                [ts, np.zeros_like(ts)], axis=1
            )
            direction = np.array([1.0, 0.0])
        else:
            ts = np.geomspace(1e-3, 0.8 * domain.height, n_samples)
            pts = np.stack([np.zeros_like(ts), np.asarray(domain.graph(0.0)) + ts], axis=1)
            direction = np.array([0.0, 1.0])
        for pt in pts:
            rows.append(
                (
                    pt[0],
                    pt[1],
                    float(dist(pt)),
                    dist.directional(pt, direction, 1),
                    dist.directional(pt, direction, 2),
                )
            )
        header = ["x1", "x2", "d", "d1", "d2"]
    write_csv(
        os.path.join(outdir, "distance.csv"),
        header,
        rows,
        comments=["generalized distance samples; derivatives along the scan direction"],
    )
    return 0


def _setup_problem(cfg):
    kernel = kernel_from_config(cfg["kernel"])
    domain = domain_from_config(cfg["domain"])
    gcfg = cfg.get("grid", {})
    grid = make_grid(domain, n_interior=gcfg.get("n", 1023), h=gcfg.get("h"))
    return kernel, domain, grid


def cmd_solve_dirichlet(cfg, outdir):
    kernel, domain, grid = _setup_problem(cfg)
    b = cfg.get("b", 0.0)
    op = assemble_operator(kernel, grid, b=b)
    f_fun = closed_form_function(cfg.get("f"))
    if grid.n == 1:
        f_vals = f_fun(grid.nodes[grid.interior])
    else:
        f_vals = f_fun(grid.nodes[grid.interior][:, 0])
    u = solve_dirichlet(op, f_vals)
    g = gradient(u, grid)
    dist = generalized_distance(domain)
    d = dist(grid.nodes)
    rows = []
    if grid.n == 1:
        for i in np.flatnonzero(grid.interior):
            rows.append((grid.nodes[i], d[i], u[i], g[i]))
        header = ["x", "d", "u", "du"]
    else:
        for i in np.flatnonzero(grid.interior):
            rows.append((grid.nodes[i][0], grid.nodes[i][1], d[i], u[i], g[i][0], g[i][1]))
        header = ["x1", "x2", "d", "u", "du1", "du2"]
    write_csv(
        os.path.join(outdir, "u.csv"),
        header,
        rows,
        comments=["Dirichlet solve: node coordinates, generalized distance, solution, gradient"],
    )
    return 0


def cmd_solve_obstacle(cfg, outdir):
    kernel, domain, grid = _setup_problem(cfg)
    phi_fun = closed_form_function(cfg.get("obstacle"), default="bump")
    phi = phi_fun(grid.nodes)
    spec = obst.ObstacleProblemSpec(
        kernel=kernel, grid=grid, obstacle=phi, b=float(cfg.get("b", 0.0))
    )
    u, res = obst.solve_obstacle(spec)
    w = res.height
    write_csv(
        os.path.join(outdir, "u.csv"),
        ["x", "u", "phi"],
        [(grid.nodes[i], u[i], phi[i]) for i in range(len(grid.nodes))],
        comments=["obstacle solve"],
    )
    write_csv(
        os.path.join(outdir, "w.csv"),
        ["x", "w"],
        [(grid.nodes[i], w[i]) for i in range(len(grid.nodes))],
        comments=["height function w = u - phi"],
    )
    fb_payload = {
        "boundary_points": [float(t) for t in res.boundary_points],
        "complementarity_residual": res.complementarity_residual,
        "sweeps": res.sweeps,
        "contact_nodes": int(len(res.contact_set)),
    }
    if len(res.boundary_points):
        reps = []
        for z, side in ((res.boundary_points[0], -1), (res.boundary_points[-1], +1)):
            try:
                rep = obst.check_regular_point(w, grid, kernel.s, z, 0.15)
                rep["growth_exponent"] = obst.growth_exponent_at_boundary(
                    w, grid, z, side=side, window=0.15
                )
                reps.append(rep)
            except FracDriftError:
                pass
        fb_payload["nondegeneracy"] = reps
    with open(os.path.join(outdir, "fb.json"), "w") as fh:
        json.dump(fb_payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_fit_expansion(cfg, outdir):
    kernel, domain, grid = _setup_problem(cfg)
    b = float(cfg.get("b", 0.0))
    op = assemble_operator(kernel, grid, b=b)
    f_fun = closed_form_function(cfg.get("f"))
    u = solve_dirichlet(op, f_fun(grid.nodes[grid.interior]))
    s = kernel.s
    lad = expn.ladder(s, float(cfg.get("beta", 2.2)))
    x = grid.nodes
    mask = grid.interior & (x > domain.a) & (x <= domain.a + 0.25 * (domain.b - domain.a))
    ts = x[mask] - domain.a
    window = expn.fit_window(grid.h)
    fit = expn.fit_expansion(u[mask], ts, lad.exponents, window=window)
    payload = {
        "exponents": [float(p) for p in fit.exponents],
        "coefficients": [float(c) for c in fit.coefficients],
        "uncertainties": [float(c) for c in fit.uncertainties],
        "residual_decay_exponent": fit.residual_decay_exponent,
        "condition_number": fit.condition_number,
        "window": list(fit.window),
        "ladder_flags": {f"k={e.k},l={e.l}": list(e.flags) for e in lad.entries},
    }
    with open(os.path.join(outdir, "fit.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_csv(
        os.path.join(outdir, "fit_bands.csv"),
        ["band_center", "residual_max"],
        list(zip(fit.band_centers, fit.band_residuals)),
        comments=["band-wise residual maxima of the expansion fit"],
    )
    return 0


def cmd_holder(cfg, outdir):
    kernel, domain, grid = _setup_problem(cfg)
    b = float(cfg.get("b", 0.0))
    op = assemble_operator(kernel, grid, b=b)
    f_fun = closed_form_function(cfg.get("f"))
    u = solve_dirichlet(op, f_fun(grid.nodes[grid.interior]))
    s = kernel.s
    x = grid.nodes
    field = cfg.get("field", "quotient")
    h = grid.h
    window = expn.fit_window(h)
    mask = grid.interior & (x > domain.a) & (x - domain.a <= 0.25)
    ts = x[mask] - domain.a
    if field == "quotient":
        lad = expn.ladder(s, 2.2)
        fit = expn.fit_expansion(u[mask], ts, lad.exponents, window=window)
        center = fit.coefficients[0]
        vals = u[mask] / ts**s
        lo = max(0.0125, window[0])
    else:
        vals = u[mask]
        center = 0.0
        lo = window[0]
    expo, saturated, nb = expn.holder_exponent(vals, ts, center=center, window=(lo, 0.2))
    rows = [(lo * 2**j, expo) for j in range(nb)]
    write_csv(
        os.path.join(outdir, "holder.csv"),
        ["scale", "exponent"],
        rows,
        comments=[f"field={field}, exponent estimate, saturated={saturated}"],
    )
    with open(os.path.join(outdir, "holder.json"), "w") as fh:
        json.dump({"field": field, "exponent": expo, "saturated": saturated, "bands": nb}, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_factorize(cfg, outdir):
    kernel = kernel_from_config(cfg["kernel"])
    domain = domain_from_config(cfg["domain"])
    p = float(cfg.get("p", kernel.s + 0.2))
    eta_cfg = cfg.get("eta", {"type": "constant", "value": 1.0})
    if eta_cfg.get("type", "constant") != "constant":
        raise ConfigError("factorize supports constant eta tags here", path=("eta", "type"))
    cval = float(eta_cfg.get("value", 1.0))

    def eta(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1] if (domain.kind != "interval" and x.ndim > 1) else x.shape
        return np.full(shape, cval)

    res = expn.singular_factorization(kernel, domain, eta, p)
    payload = {
        "phi": res.phi,
        "residual_exponent": res.residual_exponent,
        "reference_cp_moment": res.reference,
        "distances": [float(t) for t in res.distances],
        "operator_values": [float(v) for v in res.operator_values],
    }
    with open(os.path.join(outdir, "factorization.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_report(cfg, outdir):
    from .report import AcceptanceContext, run_all

    ctx = AcceptanceContext(seed=int(cfg.get("seed", 20260809)))
    ids = set(cfg.get("criteria", [])) or None
    results = run_all(ctx, ids=ids)
    payload = {
        "criteria": [
            {
                "id": r.cid,
                "name": r.name,
                "passed": r.passed,
                "runtime_s": round(r.runtime, 2),
                "budget_s": r.budget,
                "failures": r.failures,
                "details": _jsonable(r.details),
            }
            for r in results
        ],
        "all_passed": all(r.passed for r in results),
    }
    with open(os.path.join(outdir, "acceptance.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_csv(
        os.path.join(outdir, "acceptance.csv"),
        ["id", "name", "passed", "runtime_s"],
        [(r.cid, r.name, int(r.passed), round(r.runtime, 2)) for r in results],
        comments=["acceptance verdicts, one row per criterion"],
    )
    return 0 if payload["all_passed"] else 2


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


COMMANDS = {
    "compute-cp": cmd_compute_cp,
    "build-phi": cmd_build_phi,
    "eval-distance": cmd_eval_distance,
    "solve-dirichlet": cmd_solve_dirichlet,
    "solve-obstacle": cmd_solve_obstacle,
    "fit-expansion": cmd_fit_expansion,
    "holder": cmd_holder,
    "factorize": cmd_factorize,
    "report": cmd_report,
}

_DEFAULT_KERNEL = {"s": 0.7, "n": 1, "angular": {"type": "constant"}, "normalized": False}
_DEFAULT_DOMAIN = {"kind": "interval", "a": -1.0, "b": 1.0}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="fracdrift",
        description="desk-scale laboratory for fractional operators with drift",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--out", default="runs/out", help="output directory")
    parser.add_argument("--seed", type=int, default=20260809)
    parser.add_argument("--threads", type=int, default=1, help="advisory worker count")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config) if args.config else {}
        cfg.setdefault("problem", args.command)
        cfg.setdefault("kernel", dict(_DEFAULT_KERNEL))
        cfg.setdefault("domain", dict(_DEFAULT_DOMAIN))
        cfg.setdefault("seed", args.seed)
        os.makedirs(args.out, exist_ok=True)
        _emit_config(cfg, args.out)
        return COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FracDriftError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
