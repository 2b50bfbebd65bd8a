"""``hpx`` command line: configs, dispatch, reports and replay.

Exit codes: 0 ok, 1 replay mismatch, 2 config error, 3 budget refusal,
4 bound sandwich violated.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import bounds, counting, extremal, ip, montecarlo
from .errors import BudgetExceeded
from .groups import GroupSpec, SubsetMask, format_element, parse_element
from .hp import HPSpec, hp_size
from .pipeline import pipeline_envelope
from .report import body_of, dumps, manifest, sha256_json

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_BUDGET, EXIT_VIOLATION = 0, 1, 2, 3, 4
SEED_ENV = "HPX_SEED"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one command, inputs included."""

    command: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    budget: int = counting.DEFAULT_BUDGET
    report: str | None = None
    csv: str | None = None
    manifest: str | None = None

    def to_json(self) -> dict:
        return {"command": self.command, "params": self.params, "seed": self.seed,
                "budget": self.budget, "outputs": {"report": self.report, "csv": self.csv,
                                                   "manifest": self.manifest}}

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        out = obj.get("outputs", {})
        return cls(obj["command"], dict(obj.get("params", {})), obj.get("seed"),
                   int(obj.get("budget", counting.DEFAULT_BUDGET)),
                   out.get("report"), out.get("csv"), out.get("manifest"))

    def hash(self) -> str:
        # outputs excluded: the same experiment written elsewhere is the same experiment
        return sha256_json({"command": self.command, "params": self.params,
                            "seed": self.seed, "budget": self.budget})


@dataclass
class Outcome:
    report: dict
    csv_rows: list[dict] | None = None
    violation: bool = False


# --- input helpers ---------------------------------------------------------

def _hp(params: dict) -> HPSpec:
    return HPSpec.from_json(params["spec"], k=params.get("k") or 3)


def _read_set_lines(path: str) -> list[str]:
    with open(path) as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    return [ln for ln in lines if ln]


def _subset(spec: GroupSpec, lines: list[str]) -> SubsetMask:
    return SubsetMask.from_elements(spec, [parse_element(s, spec) for s in lines])


def _elements(A: SubsetMask) -> list[str]:
    return [format_element(e) for e in A.elements()]


def _floats(text: str) -> list[float]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok:
            out.append(float(Fraction(tok)))
    return out


def _int_rows(text: str) -> list[list[int]]:
    """``"1,0;0,1"`` -> ``[[1, 0], [0, 1]]``."""
    return [[int(v) for v in row.split(",") if v.strip()] for row in text.split(";") if row.strip()]


def _grid(text: str) -> list[list[int]]:
    cells = []
    for tok in text.split(","):
        D, N = tok.split(":")
        cells.append([int(D), int(N)])
    return cells


def _spec_from_args(args) -> dict:
    if args.spec:
        with open(args.spec) as fh:
            obj = json.load(fh)
    elif args.p is not None and args.dims is not None:
        obj = {"p": args.p, "dims": [int(v) for v in args.dims.split(",")]}
    else:
        raise ConfigError("give --spec FILE or both --p and --dims")
    if not isinstance(obj, dict) or "p" not in obj or "dims" not in obj:
        raise ConfigError("spec JSON needs keys p and dims")
    return obj


def _attached_values(obj) -> dict[str, float]:
    """Accept ``{delta: value}``, ``[{delta, value}]`` or a single report."""
    def val(v):
        return float(v["float"]) if isinstance(v, dict) else float(v)
    if isinstance(obj, list):
        return {str(float(r["delta"])): val(r["value"]) for r in obj}
    if isinstance(obj, dict) and "delta" in obj and "value" in obj:
        return {str(float(obj["delta"])): val(obj["value"])}
    if isinstance(obj, dict) and "points" in obj:
        return _attached_values(obj["points"])
    if isinstance(obj, dict):
        return {str(float(Fraction(k))): val(v) for k, v in obj.items()}
    raise ConfigError("unrecognised --attach content")


# --- commands --------------------------------------------------------------

def cmd_count(params, seed, budget) -> Outcome:
    hp = _hp(params)
    A = _subset(hp.spec, params["set"])
    if params.get("fourier"):
        if hp.k != 3 or not hp.is_default:
            raise ConfigError("--fourier needs k = 3 with default points")
        density = counting.s3_fourier_exact(A)
        method = "fourier"
        count = density * hp_size(hp)
    else:
        count = counting.hp_count(A, hp, budget)
        density = Fraction(count, hp_size(hp))
        method = "bruteforce"
    return Outcome({"density": density, "count": int(count),
                    "nontrivial_count": int(count) - A.cardinality,
                    "cardinality": A.cardinality, "method": method,
                    "hp": hp.to_json(), "provenance": "exact-rational"})


def cmd_hp_size(params, seed, budget) -> Outcome:
    hp = _hp(params)
    return Outcome({"hp": hp.to_json(), "hp_size": hp_size(hp), "provenance": "exact-rational"})


def cmd_extremal_exact(params, seed, budget) -> Outcome:
    hp = _hp(params)
    delta = params.get("delta")
    if delta is None:
        value, A = extremal.r_k_exact(hp, method=params.get("method") or "branch")
        method = f"r_k-{params.get('method') or 'branch'}"
    else:
        value, A = extremal.R_exact(hp, delta)
        method = "R-exhaustive"
    return Outcome({"value": value, "witness": _elements(A), "method": method,
                    "delta": delta, "seed": None, "hp": hp.to_json(),
                    "provenance": "exact-rational"})


def _search_config(params, seed) -> extremal.SearchConfig:
    obj = dict(params.get("search") or {})
    obj["seed"] = seed
    return extremal.SearchConfig.from_json(obj)


def cmd_extremal_search(params, seed, budget) -> Outcome:
    hp = _hp(params)
    if params.get("delta") is None:
        raise ConfigError("search needs --delta")
    cfg = _search_config(params, seed)
    value, A = extremal.d_hp_search(hp, params["delta"], cfg)
    return Outcome({"value": value, "witness": _elements(A), "method": f"anneal-{cfg.move}",
                    "delta": params["delta"], "seed": seed, "search": cfg.to_json(),
                    "hp": hp.to_json(), "provenance": "search"})


def cmd_envelope(params, seed, budget) -> Outcome:
    rows = params["points"]
    samples = {float(r["delta"]): float(r["value"]) for r in rows}
    prov = {float(r["delta"]): r.get("provenance") or "search" for r in rows}
    pts = extremal.EnvelopePoints.anchored(samples, prov)
    hull = extremal.convex_envelope(pts)
    tag = dict(zip(pts.deltas, pts.provenance))
    verts = [{"delta": x, "value": y, "provenance": tag.get(x, "envelope")}
             for x, y in hull.vertices()]
    evals = [{"delta": d, "value": float(hull(d)), "input": v}
             for d, v in zip(pts.deltas, pts.values)]
    return Outcome({"vertices": verts, "evaluated": evals, "provenance": "float-analytic"},
                   csv_rows=verts)


def cmd_bounds(params, seed, budget) -> Outcome:
    attach = params.get("attach")
    values = {float(k): v for k, v in _attached_values(attach).items()} if attach else None
    rep = bounds.sandwich(params["p"], params["deltas"], base=params.get("base", 2.0),
                          search_values=values)
    cp = bounds.solve_cp(params["p"])
    body = rep.to_json()
    body["cp"] = {"x_star": cp.x_star, "inf_value": cp.inf_value, "c_p": cp.c_p,
                  "C_p": cp.C_p, "method": cp.method}
    return Outcome(body, csv_rows=rep.to_csv_rows(), violation=rep.has_violation)


def _gens(params, d: int, length: int) -> np.ndarray:
    if params.get("gens"):
        return np.asarray(params["gens"], dtype=np.int64)
    return ip.repeated_basis(d, length)


def cmd_ip_char_average(params, seed, budget) -> Outcome:
    p, xi = params["p"], params["xi"]
    D, N = params["D"], params["N"]
    w = ip.IPWindow(p, _gens(params, len(xi), N), D, N)
    char = ip.CharacterId(p, tuple(xi))
    enum = ip.ip_char_average(char, w, budget=min(budget, ip.ENUMERATION_BUDGET))
    prod = ip.product_formula(char, w)
    return Outcome({"enumeration": enum, "product": prod, "difference": abs(enum - prod),
                    "junta": ip.junta_test(char, w.gens, D), "window": [D, N],
                    "provenance": "float-analytic"})


def _state_function(params, spec: GroupSpec) -> np.ndarray:
    if params.get("values") is not None:
        v = np.asarray(params["values"], dtype=float)
        if v.size != spec.size:
            raise ConfigError(f"need {spec.size} function values, got {v.size}")
        return v
    xi = np.asarray(params["xi"], dtype=np.int64)
    if xi.size != spec.n:
        raise ConfigError(f"--xi needs {spec.n} entries")
    phase = (spec.coords() @ xi) % spec.p
    return np.cos(2 * np.pi * phase / spec.p)


def cmd_ip_double_limit(params, seed, budget) -> Outcome:
    p, n = params["p"], params["n"]
    sysm = ip.TranslationSystem.identity(p, n)
    f = _state_function(params, sysm.state_spec)
    grid = [tuple(c) for c in params["grid"]]
    gens = _gens(params, n, max(N for _, N in grid))
    table = ip.double_limit_average(f, sysm, gens, grid)
    rows = []
    for (D, N), avg in table.items():
        proj = ip.junta_projection(f, sysm, gens, D)
        dev = float(np.sqrt(np.mean(np.abs(avg - proj) ** 2)))
        rows.append({"D": D, "N": N, "value": float(np.sqrt(np.mean(avg ** 2))),
                     "deviation": dev, "average": avg})
    csv_rows = [{k: r[k] for k in ("D", "N", "value", "deviation")} for r in rows]
    return Outcome({"rows": rows, "norm": "l2 mean over states",
                    "provenance": "float-analytic"}, csv_rows=csv_rows)


def cmd_ip_weyl_check(params, seed, budget) -> Outcome:
    p, n, k = params["p"], params["n"], params["k"] or 3
    spec = GroupSpec(p, (n,))
    if params.get("set") is not None:
        f = _subset(spec, params["set"]).bits.astype(float)
    else:
        f = np.full(spec.size, float(params["delta"]))
    rows = ip.weyl_limit_experiment([f] * k, p, n, [tuple(c) for c in params["grid"]])
    csv_rows = [{k2: r[k2] for k2 in ("D", "N", "value", "deviation")} for r in rows]
    return Outcome({"rows": rows, "provenance": "float-analytic"}, csv_rows=csv_rows)


def cmd_ip_matrix_check(params, seed, budget) -> Outcome:
    p, n = params["p"], params["n"]
    d = params.get("d") or n
    spec = GroupSpec(p, (n,))
    A = _subset(spec, params["set"])
    gammas = params.get("gammas") or [list(c) for c in GroupSpec(p, (d,)).coords()[1:]]
    target = counting.s3_fourier_exact(A)
    rows = [{"gamma": list(g), "value": ip.matrix_correlation(A, g, d)} for g in gammas]
    return Outcome({"rows": rows, "s3_fourier": target,
                    "all_equal": all(r["value"] == target for r in rows),
                    "provenance": "exact-rational"})


def _distribution(params) -> montecarlo.DistributionFn:
    p = params["p"]
    if params.get("factors"):
        return montecarlo.DistributionFn(p, "coordinate-product", factors=params["factors"])
    if params.get("delta") is None:
        raise ConfigError("give --delta or --factors")
    return montecarlo.DistributionFn.constant(p, params["delta"])


def cmd_random_verify(params, seed, budget) -> Outcome:
    F = _distribution(params)
    windows = params["windows"]
    shifts = params.get("shifts") or montecarlo.default_shifts(F.p, min(windows))
    rep = montecarlo.verify_randomset(F, params["k"] or 3, shifts, windows, seed)
    return Outcome(rep.to_json())


def cmd_random_delta_k(params, seed, budget) -> Outcome:
    rep = montecarlo.delta_k_experiment(params["p"], params["k"] or 3, params["delta"],
                                        params["window"], seed, shifts=params.get("shifts"))
    return Outcome(rep.to_json())


def cmd_pipeline(params, seed, budget) -> Outcome:
    cfg = _search_config(params, seed)
    res = pipeline_envelope(params["p"], params["k"] or 3, params["ladder"], params["deltas"],
                            cfg, base=params.get("base", 2.0))
    cells = [{"dims": list(c.dims), "delta": c.delta, "value": c.value,
              "running_min": c.running_min, "provenance": c.provenance,
              "witness_ranks": c.witness} for c in res.cells]
    body = {"cells": cells,
            "minima": [{"delta": d, "value": v} for d, v in sorted(res.minima.items())],
            "envelope": [{"delta": x, "value": y} for x, y in res.hull.vertices()],
            "bounds": res.bounds.to_json() if res.bounds else None,
            "notes": res.notes, "seed": seed, "search": cfg.to_json()}
    viol = bool(res.bounds and res.bounds.has_violation)
    return Outcome(body, csv_rows=res.csv_rows(), violation=viol)


COMMANDS: dict[str, Callable] = {
    "count": cmd_count,
    "hp-size": cmd_hp_size,
    "extremal.exact": cmd_extremal_exact,
    "extremal.search": cmd_extremal_search,
    "envelope": cmd_envelope,
    "bounds": cmd_bounds,
    "ip.char-average": cmd_ip_char_average,
    "ip.double-limit": cmd_ip_double_limit,
    "ip.weyl-check": cmd_ip_weyl_check,
    "ip.matrix-check": cmd_ip_matrix_check,
    "random.verify": cmd_random_verify,
    "random.delta-k": cmd_random_delta_k,
    "pipeline": cmd_pipeline,
}


# --- execution -------------------------------------------------------------

def execute(config: ExperimentConfig) -> tuple[dict, Outcome, float]:
    """Run a config in memory; returns the report, the outcome and elapsed ms."""
    if config.command not in COMMANDS:
        raise ConfigError(f"unknown command {config.command!r}")
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = COMMANDS[config.command](config.params, config.seed, config.budget)
    elapsed = round((time.perf_counter() - t0) * 1000, 3)
    report = dict(out.report)
    report["command"] = config.command
    report["config_hash"] = config.hash()
    report["warnings"] = sorted({str(w.message) for w in caught})
    if out.violation:
        report["status"] = "VIOLATION"
    report["elapsed_ms"] = elapsed
    return report, out, elapsed


def _write_csv(path: str, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def run(config: ExperimentConfig, stdout=None) -> int:
    """Execute, write report/CSV/manifest, and return the exit status."""
    stdout = stdout or sys.stdout
    report, out, elapsed = execute(config)
    text = dumps(report)
    if config.report:
        with open(config.report, "w") as fh:
            fh.write(text)
        man_path = config.manifest or config.report + ".manifest.json"
    else:
        stdout.write(text)
        man_path = config.manifest
    if man_path:
        with open(man_path, "w") as fh:
            fh.write(dumps(manifest(config.to_json(), config.hash(), report, elapsed)))
    if config.csv and out.csv_rows is not None:
        _write_csv(config.csv, out.csv_rows)
    return EXIT_VIOLATION if out.violation else EXIT_OK


def replay(path: str, out_path: str | None = None, stdout=None) -> int:
    """Re-run a manifest's config and compare report bodies by hash."""
    stdout = stdout or sys.stdout
    with open(path) as fh:
        man = json.load(fh)
    config = ExperimentConfig.from_json(man["config"])
    report, _, _ = execute(config)
    actual = sha256_json(body_of(report))
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(dumps(report))
    match = actual == man["body_sha256"]
    stdout.write(dumps({"command": config.command, "config_hash": config.hash(),
                        "expected_body_sha256": man["body_sha256"],
                        "actual_body_sha256": actual, "match": match}))
    return EXIT_OK if match else EXIT_MISMATCH


# --- argument parsing ------------------------------------------------------

def _add_common(sp, seeded=False):
    sp.add_argument("--out", help="write the JSON report here instead of stdout")
    sp.add_argument("--csv", help="also write a plot-ready CSV table")
    sp.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    sp.add_argument("--budget", type=int, default=counting.DEFAULT_BUDGET,
                    help="enumeration cap")
    if seeded:
        sp.add_argument("--seed", type=int, default=0)


def _add_spec(sp, k_default=3):
    sp.add_argument("--spec", help="JSON file {p, dims, points?}")
    sp.add_argument("--p", type=int)
    sp.add_argument("--dims", help="comma-separated block dimensions")
    sp.add_argument("--k", type=int, default=k_default)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hpx", description="Hall-Petresco progression toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("count", help="S^k density of a set")
    _add_spec(sp)
    sp.add_argument("--set", required=True, help="one canonical element per line")
    sp.add_argument("--fourier", action="store_true")
    _add_common(sp)

    sp = sub.add_parser("hp-size", help="order of the Hall-Petresco group")
    _add_spec(sp)
    _add_common(sp)

    ex = sub.add_parser("extremal", help="exact or heuristic extremal densities")
    exs = ex.add_subparsers(dest="mode", required=True)
    for mode in ("exact", "search"):
        sp = exs.add_parser(mode)
        _add_spec(sp)
        sp.add_argument("--delta", type=Fraction, help="omit (exact only) for r_k")
        sp.add_argument("--config", help="SearchConfig JSON")
        if mode == "exact":
            sp.add_argument("--method", choices=["branch", "exhaustive"], default="branch")
        _add_common(sp, seeded=mode == "search")

    sp = sub.add_parser("envelope", help="lower convex envelope of CSV samples")
    sp.add_argument("--in", dest="inp", required=True, help="CSV with delta,value[,provenance]")
    _add_common(sp)

    sp = sub.add_parser("bounds", help="bound sandwich for 3-term progressions")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--deltas", required=True, help="comma-separated, fractions allowed")
    sp.add_argument("--base", type=float, default=2.0)
    sp.add_argument("--attach", help="JSON with search values per delta")
    _add_common(sp)

    ipp = sub.add_parser("ip", help="IP averages and limit checks")
    ips = ipp.add_subparsers(dest="mode", required=True)
    sp = ips.add_parser("char-average")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--xi", required=True, help="character frequency, e.g. 1,2")
    sp.add_argument("--D", type=int, default=0)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--gens", help="generators as rows, e.g. 1,0;0,1 (default: repeated basis)")
    _add_common(sp)
    sp = ips.add_parser("double-limit")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--xi", help="use f = cos(2 pi <xi, x> / p)")
    sp.add_argument("--values", help="file of |X| function values")
    sp.add_argument("--grid", required=True, help="D:N pairs, e.g. 0:10,0:20")
    sp.add_argument("--gens")
    _add_common(sp)
    sp = ips.add_parser("weyl-check")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--set", help="indicator set file")
    sp.add_argument("--delta", type=Fraction, help="constant function instead of a set")
    sp.add_argument("--grid", required=True)
    _add_common(sp)
    sp = ips.add_parser("matrix-check")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int)
    sp.add_argument("--set", required=True)
    sp.add_argument("--gamma", help="rows of gammas, e.g. 1,0;0,1 (default: all nonzero)")
    _add_common(sp)

    rp = sub.add_parser("random", help="random-set statistics")
    rps = rp.add_subparsers(dest="mode", required=True)
    sp = rps.add_parser("verify")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--delta", type=Fraction)
    sp.add_argument("--factors", help="per-coordinate factors, rows of p values, e.g. 1,0,0")
    sp.add_argument("--windows", required=True, help="comma-separated window dimensions")
    sp.add_argument("--shifts", help="comma-separated shift ranks")
    _add_common(sp, seeded=True)
    sp = rps.add_parser("delta-k")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--delta", type=Fraction, required=True)
    sp.add_argument("--window", type=int, required=True)
    sp.add_argument("--shifts")
    _add_common(sp, seeded=True)

    sp = sub.add_parser("pipeline", help="dims ladder, envelope and sandwich")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--ladder", required=True, help="dims per rung, e.g. 1;2 or 1,1;2")
    sp.add_argument("--deltas", required=True)
    sp.add_argument("--base", type=float, default=2.0)
    sp.add_argument("--config", help="SearchConfig JSON")
    _add_common(sp, seeded=True)

    sp = sub.add_parser("replay", help="re-run a manifest and compare")
    sp.add_argument("manifest_path")
    sp.add_argument("--out")
    return ap


def _frac(x) -> float | None:
    return None if x is None else float(x)


def _resolve_seed(args) -> int | None:
    if not hasattr(args, "seed"):
        return None
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from exc
    return args.seed


def config_from_args(args) -> ExperimentConfig:
    """Turn parsed arguments into a self-contained config (files are inlined)."""
    cmd = args.command + (f".{args.mode}" if getattr(args, "mode", None) else "")
    p: dict = {}
    if cmd in ("count", "hp-size", "extremal.exact", "extremal.search"):
        p["spec"], p["k"] = _spec_from_args(args), args.k
    if cmd == "count":
        p["set"], p["fourier"] = _read_set_lines(args.set), args.fourier
    if cmd.startswith("extremal."):
        p["delta"] = _frac(args.delta)
        if cmd == "extremal.exact":
            p["method"] = args.method
    if cmd in ("extremal.search", "pipeline") and args.config:
        with open(args.config) as fh:
            p["search"] = json.load(fh)
    if cmd == "envelope":
        with open(args.inp, newline="") as fh:
            p["points"] = [dict(r) for r in csv.DictReader(fh)]
    if cmd == "bounds":
        p.update(p=args.p, deltas=_floats(args.deltas), base=args.base)
        if args.attach:
            with open(args.attach) as fh:
                p["attach"] = json.load(fh)
    if cmd == "ip.char-average":
        p.update(p=args.p, xi=[int(v) for v in args.xi.split(",")], D=args.D, N=args.N)
    if cmd in ("ip.double-limit", "ip.weyl-check", "ip.matrix-check"):
        p.update(p=args.p, n=args.n)
    if cmd in ("ip.double-limit", "ip.weyl-check"):
        p["grid"] = _grid(args.grid)
    if cmd == "ip.double-limit":
        if args.values:
            with open(args.values) as fh:
                p["values"] = [float(v) for v in fh.read().split()]
        elif args.xi:
            p["xi"] = [int(v) for v in args.xi.split(",")]
        else:
            raise ConfigError("give --xi or --values")
    if cmd in ("ip.char-average", "ip.double-limit") and args.gens:
        p["gens"] = _int_rows(args.gens)
    if cmd == "ip.weyl-check":
        p["k"] = args.k
        if args.set:
            p["set"] = _read_set_lines(args.set)
        elif args.delta is not None:
            p["delta"] = float(args.delta)
        else:
            raise ConfigError("give --set or --delta")
    if cmd == "ip.matrix-check":
        p["set"], p["d"] = _read_set_lines(args.set), args.d
        if args.gamma:
            p["gammas"] = _int_rows(args.gamma)
    if cmd.startswith("random."):
        p.update(p=args.p, k=args.k, delta=_frac(args.delta))
        if args.shifts:
            p["shifts"] = [int(v) for v in args.shifts.split(",")]
    if cmd == "random.verify":
        p["windows"] = [int(v) for v in args.windows.split(",")]
        if args.factors:
            p["factors"] = [[float(v) for v in row] for row in
                            (r.split(",") for r in args.factors.split(";"))]
    if cmd == "random.delta-k":
        p["window"] = args.window
    if cmd == "pipeline":
        p.update(p=args.p, k=args.k, ladder=_int_rows(args.ladder),
                 deltas=_floats(args.deltas), base=args.base)
    seed = _resolve_seed(args)
    return ExperimentConfig(cmd, p, seed, args.budget, args.out, args.csv, args.manifest)


_CONFIG_ERRORS = (ConfigError, ValueError, KeyError, TypeError, IndexError,
                  OSError, json.JSONDecodeError, ZeroDivisionError)


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                 "exit_code": code}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "replay":
            return replay(args.manifest_path, args.out)
        return run(config_from_args(args))
    except (BudgetExceeded, OverflowError) as exc:
        return _fail(EXIT_BUDGET, exc)
    except _CONFIG_ERRORS as exc:
        return _fail(EXIT_CONFIG, exc)


if __name__ == "__main__":
    sys.exit(main())
