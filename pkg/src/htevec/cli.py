"""Command-line front end.

Usage::

    htevec <command> --config run.json [--out DIR] [--workers K] [--verbose]

Each run reads one JSON configuration, writes result CSVs and a
``manifest.json`` into the output directory and exits with 0 on success, 2
on an invalid configuration and 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import __version__
from .eigenprocess import bivariate_process, eigenvalue_process
from .ensembles import EnsembleSpec, Kind, calibrate_levy_sigma, sample_matrix
from .errors import DomainError, NumericError, ParameterError
from .fixedpoint import SolverConfig, limit_cov, limit_cov_kappa
from .inversion import EtaSchedule, cov_C_from_H, e_phi_set, spectral_cdf
from .io import write_csv, write_json
from .montecarlo import (
    CovEstimate,
    estimate_cov,
    map_replicates,
    process_samples,
    replicate_decomposition,
    scaling_scan,
    tightness_check,
)
from .philib import PhiModel
from .population import PopulationSampler, population_kappa_handle
from .verification import verify_identities

__all__ = ["COMMANDS", "CONFIG_SCHEMA", "ConfigError", "load_config", "run", "main"]

log = logging.getLogger("htevec")

COMMANDS = (
    "sample",
    "process",
    "mc-cov",
    "scaling-scan",
    "tightness-check",
    "limit-cov",
    "spectral-cdf",
    "cov-c",
    "verify-identities",
    "compare",
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

_num = {"type": "number"}
_unit = {"type": "number", "minimum": 0, "maximum": 1}
_grid = {"type": "array", "items": _num, "minItems": 1}
_unit_grid = {"type": "array", "items": _unit, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["command", "seed"],
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "ensemble": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": [k.value for k in Kind]},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2},
                "sigma": {"type": "number", "exclusiveMinimum": 0},
                "p": {"type": "number", "exclusiveMinimum": 0},
                "m_atoms": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "items": {"type": "number", "minimum": 0},
                              "minItems": 2, "maxItems": 2},
                },
            },
        },
        "levy_sigma": {"enum": ["closed_form", "calibrated"]},
        "n": {"type": "integer", "minimum": 2},
        "n_list": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 2},
        "R": {"type": "integer", "minimum": 1},
        "process": {"enum": ["B", "C", "X"]},
        "grids": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"s": _unit_grid, "t": _unit_grid, "lambda": _grid},
        },
        "points": {"type": "array", "minItems": 1,
                   "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 3}},
        "point": {"type": "array", "items": _unit, "minItems": 2, "maxItems": 2},
        "pairs": {"type": "array", "minItems": 1,
                  "items": {"type": "array", "items": _num, "minItems": 4, "maxItems": 6}},
        "solver": {"type": "object"},
        "eta_schedule": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "etas": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                "order": {"type": "integer", "minimum": 0},
            },
        },
        "options": {"type": "object"},
        "output_dir": {"type": "string", "minLength": 1},
        "workers": {"type": "integer", "minimum": 1},
    },
}

# fields each command needs beyond command and seed
_REQUIRED = {
    "sample": ["ensemble", "n"],
    "process": ["ensemble", "n", "grids"],
    "mc-cov": ["ensemble", "n", "R", "points"],
    "scaling-scan": ["ensemble", "n_list", "R", "point"],
    "tightness-check": ["ensemble", "R", "grids"],
    "limit-cov": ["ensemble", "pairs"],
    "spectral-cdf": ["ensemble", "grids"],
    "cov-c": ["ensemble", "pairs"],
    "verify-identities": [],
    "compare": ["ensemble", "n", "R", "pairs"],
}


class ConfigError(Exception):
    """Invalid configuration; the message is line-addressed."""


# configuration ---------------------------------------------------------------

def _locate(text: str, path) -> int:
    """Best-effort line of the JSON element at ``path``."""
    pos = 0
    for key in path:
        if isinstance(key, str):
            k = text.find(json.dumps(key), pos)
            if k < 0:
                break
            pos = k
        else:
            # skip to the key-th element of the array opened after pos
            k = text.find("[", pos)
            if k < 0:
                break
            depth, idx, j = 0, 0, k + 1
            while j < len(text) and idx < key:
                c = text[j]
                if c in "[{":
                    depth += 1
                elif c in "]}":
                    if depth == 0:
                        break
                    depth -= 1
                elif c == "," and depth == 0:
                    idx += 1
                j += 1
            pos = j
            while pos < len(text) and text[pos] in " \t\r\n":
                pos += 1
    return text.count("\n", 0, pos) + 1


def load_config(path, command: str | None = None) -> dict:
    """Read and validate a configuration file.

    Raises
    ------
    ConfigError
        With a ``path:line: message`` text.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read configuration ({exc.strerror})") from exc
    if not text.strip():
        raise ConfigError(f"{path}:1: empty configuration")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg} (column {exc.colno})") from exc
    if command is not None and isinstance(cfg, dict):
        cfg.setdefault("command", command)
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        e = errors[0]
        where = "/".join(map(str, e.absolute_path)) or "<root>"
        raise ConfigError(f"{path}:{_locate(text, e.absolute_path)}: {where}: {e.message}")
    if command is not None and cfg["command"] != command:
        raise ConfigError(f"{path}:{_locate(text, ['command'])}: command: config says "
                          f"{cfg['command']!r} but {command!r} was requested")
    for key in _REQUIRED[cfg["command"]]:
        if key not in cfg:
            raise ConfigError(f"{path}:1: <root>: {key!r} is required for {cfg['command']}")
    for key in ("grids", "solver", "eta_schedule"):
        if key in cfg:
            _check_section(cfg, key, text, path)
    return cfg


def _check_section(cfg, key, text, path):
    try:
        if key == "solver":
            SolverConfig(**cfg["solver"])
        elif key == "eta_schedule":
            _schedule(cfg)
        elif key == "grids":
            for name, g in cfg["grids"].items():
                if any(b <= a for a, b in zip(g[:-1], g[1:])):
                    raise ParameterError(f"grid {name!r} must be strictly ascending")
    except (TypeError, ParameterError) as exc:
        raise ConfigError(f"{path}:{_locate(text, [key])}: {key}: {exc}") from exc


def _spec(cfg) -> EnsembleSpec:
    d = dict(cfg["ensemble"])
    d["seed"] = cfg["seed"]
    return EnsembleSpec.from_dict(d)


def _model(cfg, spec: EnsembleSpec) -> tuple[PhiModel, dict]:
    info = {}
    if spec.kind is Kind.LEVY and cfg.get("levy_sigma") == "calibrated":
        sig, se = calibrate_levy_sigma(spec)
        info["levy_sigma"] = {"method": "calibrated", "value": sig, "stderr": se}
        return PhiModel.from_spec(spec, levy_sigma=sig), info
    model = PhiModel.from_spec(spec)
    if spec.kind is Kind.LEVY:
        info["levy_sigma"] = {"method": "closed_form", "value": model.sigma}
    return model, info


def _solver(cfg) -> SolverConfig:
    return SolverConfig(**cfg.get("solver", {}))


def _schedule(cfg, default=None) -> EtaSchedule:
    d = cfg.get("eta_schedule")
    if d is None:
        return default if default is not None else EtaSchedule()
    base = default if default is not None else EtaSchedule()
    return EtaSchedule(tuple(d.get("etas", base.etas)), int(d.get("order", base.order)))


def _opt(cfg, key, default):
    return cfg.get("options", {}).get(key, default)


def _c(v) -> complex:
    return complex(v[0], v[1])


# commands --------------------------------------------------------------------

def _cmd_sample(cfg, out, workers):
    spec = _spec(cfg)
    n, R = cfg["n"], cfg.get("R", 1)
    rows, files, ov_rows, mat_rows = [], [], [], []
    for r in range(R):
        dec = replicate_decomposition(spec, n, r)
        rows += [(r, j, float(v)) for j, v in enumerate(dec.eigenvalues)]
        if _opt(cfg, "dump_overlaps", False):
            ov_rows += [(r, i, j, float(dec.overlaps[i, j])) for i in range(n) for j in range(n)]
        if _opt(cfg, "dump_matrix", False):
            m = sample_matrix(spec, n, r)
            mat_rows += [(r, i, j, float(m[i, j])) for i in range(n) for j in range(n)]
    files.append(write_csv(out / "eigenvalues.csv", ["replicate", "index", "eigenvalue"], rows))
    if ov_rows:
        files.append(write_csv(out / "overlaps.csv", ["replicate", "i", "j", "overlap"], ov_rows))
    if mat_rows:
        files.append(write_csv(out / "matrix.csv", ["replicate", "i", "j", "entry"], mat_rows))
    return files, {"n": n, "R": R}


def _cmd_process(cfg, out, workers):
    spec = _spec(cfg)
    n, R = cfg["n"], cfg.get("R", 1)
    proc = cfg.get("process", "B")
    if proc not in ("B", "C"):
        raise ParameterError("process must be 'B' or 'C' for the process command")
    g = cfg["grids"]
    s = g.get("s")
    second = g.get("t") if proc == "B" else g.get("lambda")
    if s is None or second is None:
        raise ParameterError(f"process {proc} needs grids 's' and {'t' if proc == 'B' else 'lambda'!r}")
    rows = []
    for r in range(R):
        dec = replicate_decomposition(spec, n, r)
        surf = bivariate_process(dec, s, second) if proc == "B" else eigenvalue_process(dec, s, second)
        rows += [(r, *map(float, row)) for row in surf.long_format()]
    col = "t" if proc == "B" else "lambda"
    return [write_csv(out / "surface.csv", ["replicate", "s", col, "value"], rows)], {"n": n, "R": R}


def _points(cfg, proc):
    pts = cfg["points"]
    if proc == "X":
        if any(len(p) != 3 for p in pts):
            raise ParameterError("X points are [s, Re z, Im z]")
        return [(float(p[0]), complex(p[1], p[2])) for p in pts]
    if any(len(p) != 2 for p in pts):
        raise ParameterError("B and C points are [s, t] or [s, lambda]")
    return [(float(p[0]), float(p[1])) for p in pts]


def _cov_rows(est: CovEstimate):
    rows = []
    P = len(est.points)
    for i in range(P):
        for j in range(P):
            a, b = est.points[i], est.points[j]
            c, se = complex(est.cov[i, j]), complex(est.cov_se[i, j])
            rows.append((i, j, *_pt(a), *_pt(b), c.real, c.imag, se.real, se.imag))
    return rows


def _pt(p):
    s, x = p
    if isinstance(x, complex):
        return (s, x.real, x.imag)
    return (s, float(x), 0.0)


def _cmd_mc_cov(cfg, out, workers):
    spec = _spec(cfg)
    proc = cfg.get("process", "B")
    pts = _points(cfg, proc)
    est = estimate_cov(spec, cfg["n"], cfg["R"], pts, proc, workers)
    hdr = ["i", "j", "s_i", "x_i_re", "x_i_im", "s_j", "x_j_re", "x_j_im", "cov_re", "cov_im",
           "se_re", "se_im"]
    files = [write_csv(out / "cov.csv", hdr, _cov_rows(est))]
    mean_rows = [(i, *_pt(p), complex(m).real, complex(m).imag, complex(se).real, complex(se).imag)
                 for i, (p, m, se) in enumerate(zip(est.points, est.mean, est.mean_se))]
    files.append(write_csv(out / "mean.csv", ["i", "s", "x_re", "x_im", "mean_re", "mean_im",
                                              "se_re", "se_im"], mean_rows))
    return files, {"n": cfg["n"], "R": cfg["R"], "process": proc}


def _cmd_scaling(cfg, out, workers):
    spec = _spec(cfg)
    rep = scaling_scan(spec, cfg["n_list"], cfg["R"], cfg["point"], workers)
    rows = list(zip(rep.n_list, rep.variances.tolist(), rep.stderr.tolist()))
    return [write_csv(out / "scaling.csv", ["n", "variance", "stderr"], rows)], rep.to_dict()


def _cmd_tightness(cfg, out, workers):
    spec = _spec(cfg)
    grid = cfg["grids"].get("s") or cfg["grids"].get("t")
    if grid is None:
        raise ParameterError("tightness-check needs grids.s")
    n_list = cfg.get("n_list") or [cfg.get("n")]
    if n_list == [None]:
        raise ParameterError("tightness-check needs n or n_list")
    full = bool(_opt(cfg, "full_bound", True))
    rows, summary = [], {}
    for n in n_list:
        rep = tightness_check(spec, n, cfg["R"], grid, workers, full_bound=full)
        for rect, m4, se, b, q in zip(rep.rectangles, rep.fourth_moment, rep.stderr, rep.bound, rep.ratio):
            rows.append((n, *map(float, rect), float(m4), float(se), float(b), float(q)))
        summary[str(n)] = {"worst_ratio": rep.worst, "passed": rep.passed}
    hdr = ["n", "s0", "s1", "t0", "t1", "fourth_moment", "stderr", "bound", "ratio"]
    return [write_csv(out / "tightness.csv", hdr, rows)], {"full_bound": full, "by_n": summary}


def _pairs_z(cfg):
    out = []
    for p in cfg["pairs"]:
        if len(p) != 6:
            raise ParameterError("resolvent pairs are [s, Re z, Im z, s2, Re z2, Im z2]")
        out.append((float(p[0]), complex(p[1], p[2]), float(p[3]), complex(p[4], p[5])))
    return out


def _limit_values(cfg, model, pairs, solver):
    method = _opt(cfg, "method", "kappa")
    fn = {"kappa": limit_cov_kappa, "u-integral": limit_cov}.get(method)
    if fn is None:
        raise ParameterError("options.method must be 'kappa' or 'u-integral'")
    return [complex(fn(model, s, z, s2, z2, solver)) for s, z, s2, z2 in pairs], method


def _cmd_limit_cov(cfg, out, workers):
    spec = _spec(cfg)
    model, info = _model(cfg, spec)
    pairs = _pairs_z(cfg)
    vals, method = _limit_values(cfg, model, pairs, _solver(cfg))
    rows = [(s, z.real, z.imag, s2, z2.real, z2.imag, v.real, v.imag) for (s, z, s2, z2), v in zip(pairs, vals)]
    hdr = ["s", "z_re", "z_im", "s2", "z2_re", "z2_im", "cov_re", "cov_im"]
    return [write_csv(out / "limit_cov.csv", hdr, rows)], {"method": method, **info}


def _cmd_spectral_cdf(cfg, out, workers):
    spec = _spec(cfg)
    model, info = _model(cfg, spec)
    lam = cfg["grids"].get("lambda")
    if lam is None:
        raise ParameterError("spectral-cdf needs grids.lambda")
    res = spectral_cdf(model, lam, _schedule(cfg), _solver(cfg), ray_q=int(_opt(cfg, "ray_q", 6)))
    rows = [(float(l), float(v), float(r), float(fr)) for l, v, r, fr in
            zip(res.lambdas, res.values, res.raw, res.fit_residual)]
    files = [write_csv(out / "cdf.csv", ["lambda", "F", "F_raw", "fit_residual"], rows)]
    per = [(float(l), float(e), float(res.per_eta[i, k])) for i, l in enumerate(res.lambdas)
           for k, e in enumerate(res.etas)]
    files.append(write_csv(out / "cdf_per_eta.csv", ["lambda", "eta", "F_eta"], per))
    eset = e_phi_set(res.lambdas, res.values, float(_opt(cfg, "jump_threshold", 0.01)))
    files.append(write_json(out / "e_phi.json", eset))
    return files, {"max_adjustment": res.max_adjustment, "etas": list(res.etas), **info}


def _cov_handle(cfg, model, solver):
    kind = _opt(cfg, "handle", "auto")
    if kind == "auto":
        kind = "population" if model.is_levy else "solver"
    if kind == "population":
        ps = PopulationSampler(model, pool=int(_opt(cfg, "pool", 20000)), sweeps=int(_opt(cfg, "sweeps", 30)),
                               seed=cfg["seed"])
        return population_kappa_handle(ps), kind
    if kind == "solver":
        return (lambda s, z, s2, z2: limit_cov_kappa(model, s, z, s2, z2, solver)), kind
    raise ParameterError("options.handle must be 'auto', 'solver' or 'population'")


def _cmd_cov_c(cfg, out, workers):
    spec = _spec(cfg)
    model, info = _model(cfg, spec)
    solver = _solver(cfg)
    if "solver" not in cfg:
        solver = solver.with_(trunc_eps=1e-8)
    handle, kind = _cov_handle(cfg, model, solver)
    sched = _schedule(cfg, EtaSchedule((0.4, 0.2, 0.1)))
    rows = []
    for p in cfg["pairs"]:
        if len(p) != 4:
            raise ParameterError("cov-c pairs are [s, lambda, s2, lambda2]")
        v, d = cov_C_from_H(handle, p[0], p[1], p[2], p[3], sched, ray_q=int(_opt(cfg, "ray_q", 4)),
                            atoms=_opt(cfg, "atoms", None), return_diag=True)
        per = d.get("per_eta", [])
        rows.append((*map(float, p), float(v), float(d.get("fit_residual", 0.0)), *map(float, per)))
    hdr = ["s", "lambda", "s2", "lambda2", "cov", "fit_residual"] + [f"eta_{e!r}" for e in sched.etas]
    return [write_csv(out / "cov_c.csv", hdr, rows)], {"handle": kind, "etas": list(sched.etas), **info}


def _cmd_verify(cfg, out, workers):
    recs = verify_identities(int(_opt(cfg, "instances", 120)), int(_opt(cfg, "n_max", 50)), cfg["seed"])
    rows = [(r.check, r.instance, r.ensemble, r.n, r.residual, r.tolerance, r.passed) for r in recs]
    hdr = ["check", "instance", "ensemble", "n", "residual", "tolerance", "passed"]
    summary = {}
    for r in recs:
        d = summary.setdefault(r.check, {"count": 0, "failures": 0, "max_residual": -np.inf})
        d["count"] += 1
        d["failures"] += int(not r.passed)
        d["max_residual"] = max(d["max_residual"], r.residual)
    if any(d["failures"] for d in summary.values()):
        write_csv(out / "identities.csv", hdr, rows)
        raise NumericError("identity check failed: " + ", ".join(k for k, d in summary.items() if d["failures"]))
    return [write_csv(out / "identities.csv", hdr, rows)], summary


def _zscore(mc, lim, se, floor=1e-12):
    """``|mc - lim| / se``; parts that vanish identically (``se`` at rounding level) score 0."""
    if se <= floor:
        return 0.0 if abs(mc - lim) <= floor else float("inf")
    return abs(mc - lim) / se


def _cmd_compare(cfg, out, workers):
    spec = _spec(cfg)
    model, info = _model(cfg, spec)
    pairs = _pairs_z(cfg)
    pts = []
    for s, z, s2, z2 in pairs:
        for p in ((s, z), (s2, z2)):
            if p not in pts:
                pts.append(p)
    x = process_samples(spec, cfg["n"], cfg["R"], pts, "X", workers)
    est = CovEstimate.from_samples(x, pts, "X", cfg["n"])
    lim, method = _limit_values(cfg, model, pairs, _solver(cfg))
    rows, zmax = [], 0.0
    for (s, z, s2, z2), L in zip(pairs, lim):
        i, j = pts.index((s, z)), pts.index((s2, z2))
        mc, se = complex(est.cov[i, j]), complex(est.cov_se[i, j])
        zr, zi = _zscore(mc.real, L.real, se.real), _zscore(mc.imag, L.imag, se.imag)
        zmax = max(zmax, zr, zi)
        rows.append((s, z.real, z.imag, s2, z2.real, z2.imag, mc.real, mc.imag, se.real, se.imag,
                     L.real, L.imag, zr, zi))
    hdr = ["s", "z_re", "z_im", "s2", "z2_re", "z2_im", "mc_re", "mc_im", "se_re", "se_im",
           "limit_re", "limit_im", "zscore_re", "zscore_im"]
    return [write_csv(out / "compare.csv", hdr, rows)], {"max_zscore": zmax, "method": method,
                                                          "n": cfg["n"], "R": cfg["R"], **info}


_DISPATCH = {
    "sample": _cmd_sample,
    "process": _cmd_process,
    "mc-cov": _cmd_mc_cov,
    "scaling-scan": _cmd_scaling,
    "tightness-check": _cmd_tightness,
    "limit-cov": _cmd_limit_cov,
    "spectral-cdf": _cmd_spectral_cdf,
    "cov-c": _cmd_cov_c,
    "verify-identities": _cmd_verify,
    "compare": _cmd_compare,
}


def _resolve_workers(flag, cfg) -> int:
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get("HTEVEC_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer HTEVEC_WORKERS=%r", env)
    return int(cfg.get("workers", 1))


def run(cfg: dict, out_dir, workers: int = 1) -> dict:
    """Execute a validated configuration and write its artifacts.

    Returns
    -------
    dict
        The manifest that was written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    log.info("running %s into %s with %d worker(s)", cfg["command"], out, workers)
    files, results = _DISPATCH[cfg["command"]](cfg, out, workers)
    manifest = {
        "command": cfg["command"],
        "config": cfg,
        "version": __version__,
        "environment": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
        "started_utc": started.isoformat(timespec="seconds"),
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "workers": workers,
        "outputs": sorted(Path(f).name for f in files),
        "results": results,
    }
    write_json(out / "manifest.json", manifest)
    return manifest


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="htevec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON configuration file")
        sp.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: HTEVEC_WORKERS, then config, then 1)")
        sp.add_argument("--out", default=None, help="output directory (default: config output_dir)")
        sp.add_argument("--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, args.command)
        out = args.out or cfg.get("output_dir")
        if not out:
            raise ConfigError(f"{args.config}:1: <root>: no output directory (use --out or output_dir)")
        workers = _resolve_workers(args.workers, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run(cfg, out, workers)
    except (ParameterError, DomainError) as exc:
        print(f"error: {args.config}: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, ArithmeticError, np.linalg.LinAlgError) as exc:
        diag = getattr(exc, "residual", None)
        extra = f" (residual {diag:.3e})" if isinstance(diag, float) else ""
        print(f"error: numerical failure: {exc}{extra}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
