"""Command-line front end: parse a JSON run configuration and orchestrate
solve / verify / sweep / oracle runs.

Regimes are numbered from 1 in configuration files and in every CSV/JSON
output; the Python API underneath is 0-based.

Outputs are deterministic: the same configuration gives byte-identical
``value.csv``, ``barrier.csv``, ``summary.json``, ``solution.npz``,
``verify.json`` and ``sweep.csv``.  Wall-clock times go to a separate
``timing.json``, the one file expected to differ between runs.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import math
import re
import sys
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import kernels
from .chain import Grid
from .errors import ConfigError, DivMcaError, OracleUndefined
from .mc_verify import SimConfig, oracle_barrier_value, oracle_optimal_barrier, simulate_payoff
from .model import (
    ClaimDistribution,
    ControlSet,
    ModelSpec,
    PayoffSpec,
    RegimeSet,
    tabulated_reward,
    validate,
)
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, Solution, extract_barrier, solve

log = logging.getLogger("divmca")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_VERIFY_FAILED = 4

MAX_ITER_DEFAULT = {"policy": 10_000, "value": DEFAULT_MAX_ITER}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "required": ["model", "payoff", "grid"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "model": {
            "type": "object",
            "required": ["type", "claim", "beta", "Q", "r"],
            "additionalProperties": False,
            "properties": {
                "type": {"enum": ["proportional", "excess_of_loss"]},
                "claim": {
                    "type": "object",
                    "required": ["dist"],
                    "additionalProperties": False,
                    "properties": {
                        "dist": {"enum": ["exponential", "uniform", "table"]},
                        "rate": _num,
                        "lo": _num,
                        "hi": _num,
                        "x": {"type": "array", "items": _num},
                        "sf": {"type": "array", "items": _num},
                    },
                    "allOf": [
                        {"if": {"properties": {"dist": {"const": "exponential"}}},
                         "then": {"required": ["rate"]}},
                        {"if": {"properties": {"dist": {"const": "uniform"}}},
                         "then": {"required": ["lo", "hi"]}},
                        {"if": {"properties": {"dist": {"const": "table"}}},
                         "then": {"required": ["x", "sf"]}},
                    ],
                },
                "beta": {"type": "array", "minItems": 1, "items": _num},
                "Q": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _num}},
                "r": _num,
            },
        },
        "payoff": {
            "type": "object",
            "required": ["c"],
            "additionalProperties": False,
            "properties": {
                "c": {
                    "type": "object",
                    "required": ["type"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"enum": ["constant", "exp_marginal"]},
                        "value": _num,
                        "lambda": _num,
                    },
                },
                "f": {
                    "type": "object",
                    "required": ["type"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"enum": ["zero", "tabulated"]},
                        "u": {"type": "array", "items": _num},
                        "values": {"type": "array", "items": {"type": "array", "items": _num}},
                    },
                    "if": {"properties": {"type": {"const": "tabulated"}}},
                    "then": {"required": ["u", "values"]},
                },
            },
        },
        "control": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "u_min": _num,
                "u_max": _num,
                "n_u": {"type": "integer"},
                "fixed": _num,
            },
        },
        "grid": {
            "type": "object",
            "required": ["h", "B"],
            "additionalProperties": False,
            "properties": {"h": _pos, "B": _pos},
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["policy", "value"]},
                "tol": _pos,
                "max_iter": {"type": "integer", "minimum": 1},
                "discount": {"enum": ["implicit", "exponential"]},
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt_sim": _pos,
                "t_max": _pos,
                "n_paths": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "probes": {
            "type": "array",
            "items": {
                "type": "array",
                "prefixItems": [_num, {"type": "integer"}],
                "minItems": 2,
                "maxItems": 2,
            },
        },
    },
}


@dataclass
class RunConfig:
    """Everything one run needs, fully validated.

    ``probes`` holds ``(x, regime)`` with ``x`` on the grid and ``regime``
    0-based.  ``resolved`` is the configuration with every default filled
    in (regimes 1-based), echoed into the outputs.
    """

    model: ModelSpec
    h: float
    B: float
    method: str = "policy"
    tol: float = DEFAULT_TOL
    max_iter: int = 10_000
    discount: str = "implicit"
    sim: SimConfig = SimConfig()
    probes: list = field(default_factory=list)
    resolved: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    verify_given: bool = False

    @property
    def grid(self) -> Grid:
        return Grid(self.h, self.B)


# --------------------------------------------------------------------------
# parsing


def _json_path(error) -> str:
    path = error.json_path
    if error.validator == "required":
        m = re.match(r"'([^']+)' is a required property", error.message)
        if m:
            return f"{path}.{m.group(1)}"
    return path


def _resolve(doc: dict) -> dict:
    """Copy of ``doc`` with every optional field materialised."""
    out = copy.deepcopy(doc)
    c = out["payoff"]["c"]
    if c["type"] == "constant":
        c.setdefault("value", 1.0)
    else:
        c.setdefault("lambda", 1.0)
    out["payoff"].setdefault("f", {"type": "zero"})
    ctl = out.setdefault("control", {})
    if "fixed" not in ctl:
        ctl.setdefault("u_min", 0.0)
        ctl.setdefault("u_max", 1.0)
        ctl.setdefault("n_u", 101)
    sol = out.setdefault("solver", {})
    sol.setdefault("method", "policy")
    sol.setdefault("tol", DEFAULT_TOL)
    sol.setdefault("max_iter", MAX_ITER_DEFAULT[sol["method"]])
    sol.setdefault("discount", "implicit")
    ver = out.setdefault("verify", {})
    base = SimConfig()
    ver.setdefault("dt_sim", base.dt_sim)
    ver.setdefault("t_max", base.t_max)
    ver.setdefault("n_paths", base.n_paths)
    ver.setdefault("seed", base.seed)
    out.setdefault("probes", [])
    return out


def _claim(spec: dict) -> ClaimDistribution:
    if spec["dist"] == "exponential":
        return ClaimDistribution.exponential(spec["rate"])
    if spec["dist"] == "uniform":
        return ClaimDistribution.uniform(spec["lo"], spec["hi"])
    return ClaimDistribution.table(spec["x"], spec["sf"])


def _regime_path(msg: str) -> str:
    m = re.match(r"generator (?:row|entry) \(?(\d+)", msg)
    if m:
        return f"$.model.Q[{m.group(1)}]"
    m = re.match(r"claim rate beta\[(\d+)\]", msg)
    if m:
        return f"$.model.beta[{m.group(1)}]"
    if msg.startswith("generator"):
        return "$.model.Q"
    return "$.model.beta"


def _semantic_issues(doc: dict, model: ModelSpec) -> list:
    issues = [("$.model.claim", msg) for msg in model.claim.violations()]
    issues += [(_regime_path(msg), msg) for msg in model.regimes.violations()]
    for msg in model.payoff.violations():
        issues.append(("$.model.r" if msg.startswith("discount") else "$.payoff.c", msg))
    issues += [("$.control", msg) for msg in model.control.violations()]
    if issues:
        return issues
    # cross-field checks (e.g. retention mesh vs claim support)
    return [("$.model", msg) for msg in validate(model)]


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Raises :class:`ConfigError` with ``kind`` ``"syntax"`` (line/column),
    ``"schema"`` (JSON path of each offending field) or ``"semantic"``
    (model invariants, located by JSON path).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("syntax", [(f"line {exc.lineno}, column {exc.colno}", exc.msg)]) from None

    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (_json_path(e), e.message))
    if errors:
        raise ConfigError("schema", [(_json_path(e), e.message) for e in errors])

    res = _resolve(doc)
    md, pay, ctl = res["model"], res["payoff"], res["control"]

    c = pay["c"]
    f = None
    f_issues = []
    if pay["f"]["type"] == "tabulated":
        u_pts, vals = pay["f"]["u"], pay["f"]["values"]
        if len(u_pts) < 2 or np.any(np.diff(u_pts) <= 0):
            f_issues.append(("$.payoff.f.u", "reward table needs >= 2 strictly increasing u points"))
        if len(vals) != len(md["beta"]) or any(len(v) != len(u_pts) for v in vals):
            f_issues.append(("$.payoff.f.values", "reward table needs one row per regime, one value per u point"))
        if not f_issues:
            f = tabulated_reward(u_pts, vals)
    payoff = PayoffSpec(
        r=md["r"],
        c_kind=c["type"],
        c_value=c.get("value", 1.0),
        lam=c.get("lambda", 1.0),
        f=f,
    )
    control = (
        ControlSet(fixed=ctl["fixed"])
        if "fixed" in ctl
        else ControlSet(ctl["u_min"], ctl["u_max"], ctl["n_u"])
    )
    model = ModelSpec(
        reinsurance=md["type"],
        claim=_claim(md["claim"]),
        regimes=RegimeSet(Q=md["Q"], beta=md["beta"]),
        payoff=payoff,
        control=control,
    )
    issues = _semantic_issues(res, model) + f_issues

    g = res["grid"]
    grid = None
    try:
        grid = Grid(g["h"], g["B"])
    except DivMcaError as exc:
        issues.append(("$.grid.B", str(exc)))

    warnings = []
    probes = []
    for i, (x, ell) in enumerate(res["probes"]):
        if not 1 <= ell <= model.m:
            issues.append((f"$.probes[{i}][1]", f"regime {ell} outside 1..{model.m}"))
            continue
        if grid is None:
            continue
        if not 0 <= x <= grid.B:
            issues.append((f"$.probes[{i}][0]", f"x={x:g} outside [0, {grid.B:g}]"))
            continue
        k = grid.index(x, snap=True)
        xs = k * grid.h
        if abs(xs - x) > 1e-9 * max(grid.h, abs(x)):
            msg = f"probe x={x:g} is not a multiple of h={grid.h:g}; snapped to {xs:g}"
            warnings.append(msg)
            log.warning(msg)
        probes.append((xs, ell - 1))
        res["probes"][i] = [xs, ell]

    sim = SimConfig(
        dt_sim=res["verify"]["dt_sim"],
        t_max=res["verify"]["t_max"],
        n_paths=res["verify"]["n_paths"],
        seed=res["verify"]["seed"],
    )
    verify_given = "verify" in doc
    if verify_given and grid is not None and not issues:
        issues += [("$.verify", msg) for msg in sim.violations(grid, model.r)]
    if issues:
        raise ConfigError("semantic", issues)

    sol = res["solver"]
    return RunConfig(
        model=model,
        h=float(g["h"]),
        B=float(g["B"]),
        method=sol["method"],
        tol=float(sol["tol"]),
        max_iter=int(sol["max_iter"]),
        discount=sol["discount"],
        sim=sim,
        probes=probes,
        resolved=res,
        warnings=warnings,
        verify_given=verify_given,
    )


def preset_names() -> list:
    return sorted(p.name[:-5] for p in resources.files("divmca").joinpath("presets").iterdir()
                  if p.name.endswith(".json"))


def load_config(path_or_preset) -> RunConfig:
    """Read a configuration file, or a packaged preset by name (e.g. ``prop-exp``)."""
    p = Path(path_or_preset)
    if p.is_file():
        return parse_config(p.read_text(encoding="utf-8"))
    name = str(path_or_preset)
    if name in preset_names():
        text = resources.files("divmca").joinpath("presets", name + ".json").read_text(encoding="utf-8")
        return parse_config(text)
    raise ConfigError("syntax", [(str(path_or_preset), "no such file or preset")])


# --------------------------------------------------------------------------
# output helpers


def _f9(v: float) -> str:
    s = f"{v:.9f}"
    return "0.000000000" if s == "-0.000000000" else s


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)] + [",".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _action_name(act: int, k: int) -> str:
    if k == 0:
        return "ruin"
    return {kernels.SINGULAR: "singular", kernels.REGULAR: "regular", kernels.REFLECT: "reflect"}[int(act)]


def _solve(cfg: RunConfig, grid: Optional[Grid] = None) -> Solution:
    grid = grid or cfg.grid
    return solve(cfg.model, grid, method=cfg.method, tol=cfg.tol, max_iter=cfg.max_iter,
                 discount=cfg.discount)


def _probe_rows(cfg: RunConfig, sol: Solution, grid: Grid) -> list:
    out = []
    for x, ell in cfg.probes:
        xs = grid.index(x, snap=True) * grid.h
        out.append({"x": xs, "regime": ell + 1, "V": sol.value_at(xs, ell)})
    return out


# --------------------------------------------------------------------------
# runs


def run_solve(cfg: RunConfig, out_dir) -> tuple[Solution, dict]:
    """Solve and write ``value.csv``, ``barrier.csv``, ``summary.json``, ``solution.npz``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid
    t0 = time.perf_counter()
    sol = _solve(cfg, grid)
    wall = time.perf_counter() - t0

    rows = []
    u_star = sol.u_star
    for k in range(grid.n_states):
        for ell in range(cfg.model.m):
            u = u_star[ell, k]
            rows.append((
                _f9(k * grid.h),
                str(ell + 1),
                _f9(sol.V[ell, k]),
                _action_name(sol.action[ell, k], k),
                _f9(u) if math.isfinite(u) else "",
            ))
    _write_csv(out / "value.csv", ("x", "regime", "V", "action", "u_star"), rows)

    rep = extract_barrier(sol, grid)
    _write_csv(
        out / "barrier.csv",
        ("regime", "barrier"),
        [(str(ell + 1), "" if b is None else _f9(b)) for ell, b in enumerate(rep.barrier)],
    )

    summary = {
        "converged": bool(sol.converged),
        "method": sol.method,
        "iterations": int(sol.iterations),
        "final_delta": float(sol.final_delta),
        "residual": float(sol.residual),
        "barriers": [
            {"regime": ell + 1, "barrier": None if b is None else round(b, 12), "pays_above": bool(up)}
            for ell, (b, up) in enumerate(zip(rep.barrier, rep.upper_interval))
        ],
        "probes": _probe_rows(cfg, sol, grid),
        "config": cfg.resolved,
    }
    _write_json(out / "summary.json", summary)
    np.savez(
        out / "solution.npz",
        V=sol.V,
        action=sol.action,
        u_index=sol.u_index,
        u_mesh=sol.u_mesh,
        grid=np.array([grid.h, grid.B]),
    )
    _write_json(out / "timing.json", {"solve_wall_time_s": wall, "backend": kernels.BACKEND})
    return sol, summary


def load_solution(cfg: RunConfig, solution_dir) -> Solution:
    """Reload the policy written by :func:`run_solve` and check it matches ``cfg``."""
    path = Path(solution_dir) / "solution.npz"
    if not path.is_file():
        raise ConfigError("semantic", [(str(path), "no solution.npz; run `solve` first")])
    grid = cfg.grid
    with np.load(path) as z:
        V, act, uidx, mesh, hb = z["V"], z["action"], z["u_index"], z["u_mesh"], z["grid"]
    ok = (
        V.shape == (cfg.model.m, grid.n_states)
        and np.allclose(hb, [grid.h, grid.B], rtol=1e-12, atol=0)
        and np.array_equal(mesh, cfg.model.control.mesh())
    )
    if not ok:
        raise ConfigError("semantic", [(str(path), "solution does not match this configuration")])
    return Solution(V=V, action=act, u_index=uidx, u_mesh=mesh, grid=grid, method="loaded",
                    iterations=0, final_delta=math.nan, converged=True)


def run_verify(cfg: RunConfig, solution_dir, out_dir) -> dict:
    """Monte Carlo check of the stored policy at every probe; writes ``verify.json``."""
    grid = cfg.grid
    bad = cfg.sim.violations(grid, cfg.model.r)
    if bad:
        raise ConfigError("semantic", [("$.verify", msg) for msg in bad])
    if not cfg.probes:
        raise ConfigError("semantic", [("$.probes", "verify needs at least one probe")])
    sol = load_solution(cfg, solution_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    slack = 5.0 * grid.h * cfg.model.payoff.c_max
    t0 = time.perf_counter()
    results = []
    for x, ell in cfg.probes:
        est = simulate_payoff(cfg.model, grid, sol, replace(cfg.sim, x0=x, regime0=ell))
        v = sol.value_at(x, ell)
        diff = abs(v - est.mean)
        bound = 3.0 * est.stderr + slack
        results.append({
            "x": x,
            "regime": ell + 1,
            "V": v,
            "mean": est.mean,
            "stderr": est.stderr,
            "abs_diff": diff,
            "bound": bound,
            "ruin_fraction": est.ruin_fraction,
            "n_paths": est.n_paths,
            "seed": est.seed,
            "pass": bool(diff <= bound),
        })
    report = {
        "all_pass": all(r["pass"] for r in results),
        "criterion": "abs_diff <= 3 * stderr + 5 * h * c_max",
        "probes": results,
        "config": cfg.resolved,
    }
    _write_json(out / "verify.json", report)
    _write_json(out / "timing.json", {"verify_wall_time_s": time.perf_counter() - t0,
                                      "backend": kernels.BACKEND})
    return report


def run_sweep(cfg: RunConfig, hs, out_dir) -> list:
    """Solve at each ``h`` in ``hs`` and tabulate probe differences and empirical order.

    For successive step sizes the row at ``h_i`` carries ``diff = |V_{h_i} -
    V_{h_(i-1)}|``; once two differences exist, ``ratio`` is the previous diff
    over this one and ``order = log(ratio) / log(h_(i-1) / h_i)`` (``log2`` of
    the ratio when ``h`` halves).
    """
    if not cfg.probes:
        raise ConfigError("semantic", [("$.probes", "sweep needs at least one probe")])
    grids = []
    for h in hs:
        try:
            grids.append(Grid(float(h), cfg.B))
        except DivMcaError as exc:
            raise ConfigError("semantic", [("--h", str(exc))]) from None
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    values = []
    converged = []
    for grid in grids:
        sol = _solve(cfg, grid)
        converged.append(sol.converged)
        values.append([sol.value_at(x, ell) for x, ell in cfg.probes])

    table = []
    for i, grid in enumerate(grids):
        for p, (x, ell) in enumerate(cfg.probes):
            row = {"h": grid.h, "x": x, "regime": ell + 1, "V": values[i][p],
                   "converged": converged[i], "diff": None, "ratio": None, "order": None}
            if i >= 1:
                row["diff"] = abs(values[i][p] - values[i - 1][p])
            if i >= 2 and row["diff"] > 0:
                prev = table[(i - 1) * len(cfg.probes) + p]["diff"]
                row["ratio"] = prev / row["diff"]
                if row["ratio"] > 0:
                    row["order"] = math.log(row["ratio"]) / math.log(grids[i - 1].h / grid.h)
            table.append(row)

    def cell(v):
        return "" if v is None else _f9(v)

    _write_csv(
        out / "sweep.csv",
        ("h", "x", "regime", "V", "diff", "ratio", "order", "converged"),
        [(_f9(r["h"]), _f9(r["x"]), str(r["regime"]), _f9(r["V"]), cell(r["diff"]),
          cell(r["ratio"]), cell(r["order"]), str(r["converged"]).lower()) for r in table],
    )
    return table


def oracle_table(mu: float, sigma2: float, r: float, x_max: float = 20.0, step: float = 1.0):
    """``(b*, [(x, V(x)), ...])`` for the single-regime barrier problem."""
    if not sigma2 > 0:
        raise OracleUndefined("closed form needs sigma^2 > 0")
    sigma = math.sqrt(sigma2)
    b = oracle_optimal_barrier(mu, sigma, r)
    n = int(math.floor(x_max / step + 1e-9))
    return b, [(i * step, oracle_barrier_value(mu, sigma, r, i * step, b)) for i in range(n + 1)]


# --------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="divmca", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("solve", help="solve the control problem and write value/barrier/summary files")
    p.add_argument("--config", required=True, help="JSON config file or packaged preset name")
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", help="Monte Carlo check of a solved policy at the probes")
    p.add_argument("--config", required=True)
    p.add_argument("--solution", required=True, help="output directory of a previous solve")
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="solve at several step sizes and report convergence")
    p.add_argument("--config", required=True)
    p.add_argument("--h", required=True, help="comma-separated step sizes, e.g. 0.2,0.1,0.05")
    p.add_argument("--out", required=True)

    p = sub.add_parser("oracle", help="closed-form single-regime barrier and value table")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--x-max", type=float, default=20.0)
    p.add_argument("--step", type=float, default=1.0)

    sub.add_parser("presets", help="list packaged preset configurations")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.verb == "oracle":
            b, rows = oracle_table(args.mu, args.sigma2, args.r, args.x_max, args.step)
            print(f"b* = {b:.9f}")
            print("x,V")
            for x, v in rows:
                print(f"{_f9(x)},{_f9(v)}")
            return EXIT_OK
        if args.verb == "presets":
            print("\n".join(preset_names()))
            return EXIT_OK

        cfg = load_config(args.config)
        if args.verb == "solve":
            sol, summary = run_solve(cfg, args.out)
            for p in summary["probes"]:
                print(f"V({p['x']:g}, {p['regime']}) = {p['V']:.9f}")
            for b in summary["barriers"]:
                print(f"barrier regime {b['regime']}: {b['barrier']}")
            if not sol.converged:
                print("solver did not converge", file=sys.stderr)
                return EXIT_NOT_CONVERGED
            return EXIT_OK
        if args.verb == "verify":
            rep = run_verify(cfg, args.solution, args.out)
            for p in rep["probes"]:
                tag = "pass" if p["pass"] else "FAIL"
                print(f"{tag} V({p['x']:g}, {p['regime']}) = {p['V']:.6f}  MC = {p['mean']:.6f}"
                      f" +- {p['stderr']:.6f}  |diff| = {p['abs_diff']:.6f} <= {p['bound']:.6f}")
            return EXIT_OK if rep["all_pass"] else EXIT_VERIFY_FAILED
        if args.verb == "sweep":
            try:
                hs = [float(s) for s in args.h.split(",") if s.strip()]
            except ValueError:
                raise ConfigError("syntax", [("--h", f"cannot parse {args.h!r}")]) from None
            table = run_sweep(cfg, hs, args.out)
            print("h,x,regime,V,diff,ratio,order")
            for r in table:
                cells = [f"{r[k]:.6g}" if r[k] is not None else "" for k in ("diff", "ratio", "order")]
                print(f"{r['h']:g},{r['x']:g},{r['regime']},{r['V']:.9f}," + ",".join(cells))
            return EXIT_NOT_CONVERGED if not all(r["converged"] for r in table) else EXIT_OK
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except OracleUndefined as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
