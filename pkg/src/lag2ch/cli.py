"""Command-line front end: ``lag2ch run | greens | converge``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from ._jit import set_threads
from .core import Grid
from .eulerian import characteristics_export, e_norm_distance, push_to_eulerian
from .greens import NegativeCoefficient, build_kernels, identity_residuals
from .initdata import AtomicMeasure, EulerianInit, gaussian, lagrangian_from_eulerian, peakon_pair, smooth_init
from .timeint import SimConfig, simulate

log = logging.getLogger("lag2ch")

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_NONMONOTONE = 0, 1, 2, 3
OUTPUTS = ("diag", "char", "field", "atoms")

_num = {"type": "number"}
SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["grid", "scenario", "sim"],
    "properties": {
        "grid": {
            "type": "object", "additionalProperties": False, "required": ["n", "dxi"],
            "properties": {"n": {"type": "integer", "minimum": 3},
                           "dxi": {"type": "number", "exclusiveMinimum": 0}, "xi0": _num},
        },
        "scenario": {
            "type": "object", "additionalProperties": False, "required": ["type"],
            "properties": {
                "type": {"enum": ["peakon_pair", "smooth", "eulerian_tables"]},
                "params": {"type": "object"},
                "rho_inf": {"type": "number", "minimum": 0},
            },
        },
        "sim": {
            "type": "object", "additionalProperties": False, "required": ["dt", "t_end"],
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "t_end": {"type": "number", "minimum": 0},
                "mode": {"enum": ["propagate", "resolve", "auto"]},
                "output_every": {"type": "integer", "minimum": 1},
                "max_halvings": {"type": "integer", "minimum": 0},
                "char_stride": {"type": "integer", "minimum": 1},
            },
        },
        "outputs": {
            "type": "object", "additionalProperties": False,
            "properties": {"dir": {"type": "string"},
                           "which": {"type": "array", "items": {"enum": list(OUTPUTS)}}},
        },
    },
}

PARAM_SCHEMAS = {
    "peakon_pair": {
        "type": "object", "additionalProperties": False, "required": ["p", "x1", "x2"],
        "properties": {"p": _num, "x1": _num, "x2": _num,
                       "support_tol": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
    },
    "smooth": {
        "type": "object", "additionalProperties": False,
        "properties": {"amplitude": _num, "center": _num,
                       "width": {"type": "number", "exclusiveMinimum": 0},
                       "rho_amplitude": _num,
                       "rho_width": {"type": "number", "exclusiveMinimum": 0}},
    },
    "eulerian_tables": {
        "type": "object", "additionalProperties": False, "required": ["x", "u"],
        "properties": {"x": {"type": "array", "items": _num, "minItems": 2},
                       "u": {"type": "array", "items": _num, "minItems": 2},
                       "rho": {"type": "array", "items": _num},
                       "atoms": {"type": "array", "items": {"type": "array", "items": _num,
                                                            "minItems": 2, "maxItems": 2}}},
    },
}


class ConfigError(Exception):
    pass


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _where(err: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in err.absolute_path)
    return path or "<root>"


def load_scenario(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"scenario not found: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
        sc = doc["scenario"]
        jsonschema.validate(sc.get("params", {}), PARAM_SCHEMAS[sc["type"]])
    except jsonschema.ValidationError as exc:
        where = _where(exc)
        if exc.instance is doc.get("scenario", {}).get("params"):
            where = "scenario.params" + ("." + where if where != "<root>" else "")
        raise ConfigError(f"invalid field {where}: {exc.message}") from exc
    return doc


def build_grid(doc) -> Grid:
    g = doc["grid"]
    return Grid(g["n"], g["dxi"], g.get("xi0", -0.5 * g["n"] * g["dxi"]))


def build_state(doc, grid: Grid):
    sc = doc["scenario"]
    prm = sc.get("params", {})
    rho_inf = float(sc.get("rho_inf", 0.0))
    kind = sc["type"]
    if kind == "peakon_pair":
        return peakon_pair(prm["p"], prm["x1"], prm["x2"], rho_inf, grid,
                           support_tol=prm.get("support_tol", 1e-4))
    if kind == "smooth":
        u0 = gaussian(prm.get("amplitude", 1.0), prm.get("center", 0.0), prm.get("width", 1.0))
        bump = gaussian(prm.get("rho_amplitude", 0.0), prm.get("center", 0.0),
                        prm.get("rho_width", prm.get("width", 1.0)))
        return smooth_init(u0, lambda x: rho_inf + bump(x), grid, rho_inf)
    x = np.asarray(prm["x"], dtype=float)
    if len(prm["u"]) != x.size or ("rho" in prm and len(prm["rho"]) != x.size):
        raise ConfigError("invalid field scenario.params: tables x, u, rho must have equal length")
    rho = (x, np.asarray(prm["rho"], dtype=float)) if "rho" in prm else None
    init = EulerianInit(u0=(x, np.asarray(prm["u"], dtype=float)), rho0=rho, rho_inf=rho_inf,
                        support=(x[0], x[-1]), mu_sing=AtomicMeasure(tuple(map(tuple, prm.get("atoms", [])))))
    return lagrangian_from_eulerian(init, grid)


def build_config(doc) -> SimConfig:
    s = doc["sim"]
    return SimConfig(dt=s["dt"], t_end=s["t_end"], mode=s.get("mode", "auto"),
                     output_every=s.get("output_every", 1), max_halvings=s.get("max_halvings", 10))


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([v if isinstance(v, (int, np.integer)) else _fmt(v) for v in r])


def write_outputs(traj, outdir: Path, which, char_stride: int = 1):
    outdir.mkdir(parents=True, exist_ok=True)
    if "diag" in which:
        _write_csv(outdir / "diag.csv", ["t", "H_inf", "I", "minDy", "maxh", "residB"],
                   ([d.t, d.H_inf, d.I, d.minDy, d.maxh, d.residB] for d in traj.diagnostics))
    if "char" in which:
        tab = characteristics_export(traj, char_stride)
        _write_csv(outdir / "char.csv", ["t", "j", "y"], ((t, int(j), y) for t, j, y in tab))
    if "field" in which or "atoms" in which:
        st0 = traj.snapshots[0]
        yn = st0.y_nodes
        xs = np.linspace(yn[0], yn[-1], st0.grid.n + 1)
        frows, arows = [], []
        for t, st in zip(traj.times, traj.snapshots):
            f = push_to_eulerian(st, xs)
            frows += [(t, x, u, r, e) for x, u, r, e in zip(f.x, f.u, f.rho, f.energy_density)]
            arows += [(t, x, m) for x, m in f.atoms]
        if "field" in which:
            _write_csv(outdir / "field.csv", ["t", "x", "u", "rho", "edens"], frows)
        if "atoms" in which:
            _write_csv(outdir / "atoms.csv", ["t", "x", "mass"], arows)


def cmd_run(path) -> int:
    try:
        doc = load_scenario(path)
        grid = build_grid(doc)
        cfg = build_config(doc)
        state = build_state(doc, grid)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outs = doc.get("outputs", {})
    outdir = Path(outs.get("dir", "out"))
    traj = simulate(cfg, state)
    write_outputs(traj, outdir, outs.get("which", list(OUTPUTS)), doc["sim"].get("char_stride", 1))
    for f in traj.flags[:20]:
        log.warning(f)
    if traj.aborted:
        print(f"error: simulation aborted: {traj.aborted}", file=sys.stderr)
        return EXIT_ABORT
    d0, d1 = traj.diagnostics[0], traj.diagnostics[-1]
    print(f"done: t={d1.t:.6g} H_inf={d1.H_inf:.12g} (initial {d0.H_inf:.12g}) "
          f"I={d1.I:.6g} minDy={d1.minDy:.3e} -> {outdir}")
    return EXIT_OK


def fig3_coefficients(dxi: float, n: int):
    """Piecewise-constant preset: 2 on (-1, 0.5], 0 on (0.5, 1], 4 on (1, 1.5], 1 elsewhere."""
    j = np.arange(n) - (n - 1) // 2
    xi = np.round(j * dxi, 12)  # keep breakpoints like 5 * 0.2 = 1 exact
    a = np.ones(n)
    a[(xi > -1) & (xi <= 0.5)] = 2.0
    a[(xi > 0.5) & (xi <= 1.0)] = 0.0
    a[(xi > 1.0) & (xi <= 1.5)] = 4.0
    return j, a


def parse_coeff(spec: str, dxi: float, n: int):
    """``constant[:v]`` | ``table:v0,v1,...`` | ``table:@file`` | ``fig3``. Returns (labels, a)."""
    kind, _, rest = spec.partition(":")
    if kind == "constant":
        v = float(rest) if rest else 1.0
        return np.arange(n), np.full(n, v)
    if kind == "table":
        if rest.startswith("@"):
            txt = Path(rest[1:]).read_text().replace("\n", ",")
        else:
            txt = rest
        vals = np.array([float(t) for t in txt.split(",") if t.strip()])
        if vals.size < 3:
            raise ConfigError("coefficient table needs at least 3 entries")
        return np.arange(vals.size), vals
    if kind == "fig3":
        return fig3_coefficients(dxi, n)
    raise ConfigError(f"unknown coefficient spec {spec!r}")


def cmd_greens(coeff: str, dxi: float, n: int, out) -> int:
    try:
        if dxi <= 0 or n < 3:
            raise ConfigError("need dxi > 0 and n >= 3")
        labels, a = parse_coeff(coeff, dxi, n)
        ks = build_kernels(a, dxi)
    except (ConfigError, NegativeCoefficient, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    m = labels.size
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "g", "k", "gamma", "kappa"])
        for i in range(m):
            for j in range(m):
                w.writerow([int(labels[i]), int(labels[j]), _fmt(ks.g[i, j]), _fmt(ks.k[i, j]),
                            _fmt(ks.gamma[i, j]), _fmt(ks.kappa[i, j])])
    res = identity_residuals(ks)
    print("identity residuals: " + " ".join(f"{k}={v:.3e}" for k, v in res.items()))
    return EXIT_OK


def cmd_converge(path, levels: int, out=None) -> int:
    if levels < 3:
        print("error: need ≥ 3 levels", file=sys.stderr)
        return EXIT_CONFIG
    try:
        doc = load_scenario(path)
        base = build_grid(doc)
        cfg = build_config(doc)
        grids = [Grid(base.n * 2 ** l, base.dxi / 2 ** l, base.xi0) for l in range(levels)]
        states = [build_state(doc, g) for g in grids]
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cfg.output_every = 10 ** 9
    finals, aborted = [], None
    for st in states:
        tr = simulate(cfg, st)
        aborted = aborted or tr.aborted
        finals.append(tr.snapshots[-1])
    dist = [e_norm_distance(a, b) for a, b in zip(finals[:-1], finals[1:])]
    orders = [float(np.log2(d0 / d1)) if d1 > 0 else float("inf") for d0, d1 in zip(dist[:-1], dist[1:])]
    monotone = all(d1 <= d0 for d0, d1 in zip(dist[:-1], dist[1:]))
    report = {"dxi": [g.dxi for g in grids], "n": [g.n for g in grids], "t_end": cfg.t_end,
              "distances": dist, "orders": orders, "order_estimate": orders[-1] if orders else None,
              "monotone": monotone, "aborted": aborted}
    outdir = Path(doc.get("outputs", {}).get("dir", "out")) if out is None else Path(out).parent
    outdir.mkdir(parents=True, exist_ok=True)
    target = Path(out) if out is not None else outdir / "converge.json"
    target.write_text(json.dumps(report, indent=2))
    print(json.dumps(report))
    if aborted:
        return EXIT_ABORT
    return EXIT_OK if monotone else EXIT_NONMONOTONE


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="lag2ch", description="Lagrangian semi-discrete 2CH solver")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("run", help="run a scenario file")
    p.add_argument("scenario")
    p = sub.add_parser("greens", help="dump kernels for a coefficient sequence")
    p.add_argument("--coeff", required=True, help="constant[:v] | table:v0,v1,... | table:@file | fig3")
    p.add_argument("--dxi", type=float, default=0.2)
    p.add_argument("--n", type=int, default=41)
    p.add_argument("-o", "--output", required=True)
    p = sub.add_parser("converge", help="self-convergence study over grid refinements")
    p.add_argument("scenario")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("-o", "--output", default=None, help="report path (default <outputs.dir>/converge.json)")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if os.environ.get("LAG2CH_THREADS", "").isdigit():
        set_threads(int(os.environ["LAG2CH_THREADS"]))
    if args.cmd == "run":
        return cmd_run(args.scenario)
    if args.cmd == "greens":
        return cmd_greens(args.coeff, args.dxi, args.n, args.output)
    return cmd_converge(args.scenario, args.levels, args.output)


if __name__ == "__main__":
    sys.exit(main())
