"""Batch front end: parse a JSON run config, execute one scenario, write
machine-readable results.

Subcommands
-----------
slope    evaluate the t=0 current slope, numeric vs closed form -> JSON
evolve   propagate the canonical initial state -> trajectory CSV + JSON
unravel  run the white-noise ensemble -> CSV with a standard-error column
compare  run the numeric-vs-analytic suite -> summary JSON, exit 0 iff
         every tolerance is met

Exit codes: 0 success, 1 validation error, 2 tolerance failure,
3 numerical failure.  All numeric text output carries 17 significant
digits so downstream tools can reproduce comparisons exactly.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import (compare as slope_compare, slope_singular,
                        slope_weak_exact, slope_weak_largeN)
from .environment import DELTA, EXPONENTIAL, CorrelationModel, equal_coupling_model
from .evolution import IntegrationError, current_slope, evolve
from .fockspace import FockBasis, fock_state
from .generator import (asymmetric_weak_coupling_generator,
                        singular_coupling_generator, weak_coupling_generator)
from .model import ModelParams, closed_current_derivative
from .stochastic import (CalibrationError, NoiseConfig, StepSizeError,
                         run_ensemble)

SCENARIOS = ("slope-weak", "slope-singular", "evolve-weak", "evolve-singular",
             "unravel", "compare-all")
_SUBCOMMAND_SCENARIOS = {
    "slope": ("slope-weak", "slope-singular"),
    "evolve": ("evolve-weak", "evolve-singular"),
    "unravel": ("unravel",),
    "compare": ("compare-all",),
}
CSV_HEADER = "t,J,trace_dev,min_eig,leakage"
DEFAULT_SEED = 20240801

WEAK_IDENTITY_RTOL = 1e-10
SINGULAR_IDENTITY_RTOL = 1e-10
INVARIANCE_ATOL = 1e-12
NULL_ATOL = 1e-12


class ConfigError(ValueError):
    """Config file missing, unparsable, or schema-invalid."""


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _require_keys(section: dict, allowed: set, required: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(section)
    if missing:
        raise ConfigError(f"missing keys in {where}: {sorted(missing)}")


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return value


def _matrix_from_config(block: dict, where: str) -> np.ndarray:
    _require_keys(block, {"real", "imag"}, {"real"}, where)

    def grid(part, label):
        rows = block.get(part)
        if rows is None:
            return np.zeros((4, 4))
        arr = np.array(rows, dtype=float)
        if arr.shape != (4, 4):
            raise ConfigError(f"{where}.{label} must be a 4x4 array")
        return arr
    return grid("real", "real") + 1j * grid("imag", "imag")


def load_config(path: Path) -> dict:
    """Parse and schema-validate a run config; raises ConfigError."""
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _require_keys(raw, {"model", "basis", "initial_state", "environment",
                        "scenario", "time_grid", "noise", "output", "seed"},
                  {"model", "basis", "initial_state", "environment",
                   "scenario", "time_grid"}, "config")

    model = raw["model"]
    _require_keys(model, {"T", "U", "eps1", "eps2", "lambda"},
                  {"T", "U", "eps1", "eps2", "lambda"}, "model")
    for key in ("T", "U", "eps1", "eps2", "lambda"):
        _as_number(model[key], f"model.{key}")

    _require_keys(raw["basis"], {"n_max"}, {"n_max"}, "basis")
    _as_int(raw["basis"]["n_max"], "basis.n_max")

    _require_keys(raw["initial_state"], {"N"}, {"N"}, "initial_state")
    _as_int(raw["initial_state"]["N"], "initial_state.N")

    env = raw["environment"]
    _require_keys(env, {"kind", "G", "mu"}, {"kind", "G"}, "environment")
    if env["kind"] not in (EXPONENTIAL, DELTA):
        raise ConfigError(f"environment.kind must be one of "
                          f"[{EXPONENTIAL!r}, {DELTA!r}], got {env['kind']!r}")
    _matrix_from_config(env["G"], "environment.G")

    if raw["scenario"] not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {SCENARIOS}, "
                          f"got {raw['scenario']!r}")

    _require_keys(raw["time_grid"], {"t_max", "points"},
                  {"t_max", "points"}, "time_grid")
    if _as_number(raw["time_grid"]["t_max"], "time_grid.t_max") <= 0:
        raise ConfigError("time_grid.t_max must be > 0")
    if _as_int(raw["time_grid"]["points"], "time_grid.points") < 2:
        raise ConfigError("time_grid.points must be >= 2")

    if "noise" in raw:
        _require_keys(raw["noise"], {"G", "dt", "seed", "trajectories",
                                     "channel_mask"},
                      {"dt", "seed", "trajectories"}, "noise")
    if "output" in raw:
        _require_keys(raw["output"], {"stem"}, set(), "output")
    if "seed" in raw:
        _as_int(raw["seed"], "seed")
    return raw


def _build_objects(cfg: dict):
    m = cfg["model"]
    params = ModelParams(T=m["T"], U=m["U"], eps1=m["eps1"], eps2=m["eps2"],
                         lam=m["lambda"])
    basis = FockBasis(cfg["basis"]["n_max"])
    env = cfg["environment"]
    model = CorrelationModel(kind=env["kind"],
                             G=_matrix_from_config(env["G"], "environment.G"),
                             mu=env.get("mu"))
    n_fill = cfg["initial_state"]["N"]
    if n_fill > basis.n_max:
        raise ConfigError(f"initial_state.N={n_fill} exceeds n_max")
    rho0 = fock_state(basis, n_fill, n_fill)
    tg = cfg["time_grid"]
    t_grid = np.linspace(0.0, tg["t_max"], tg["points"])
    return params, basis, model, n_fill, rho0, t_grid


def _generator_for(cfg_scenario: str, basis, params, model):
    if cfg_scenario.endswith("singular"):
        return singular_coupling_generator(basis, params, model)
    if params.symmetric:
        return weak_coupling_generator(basis, params, model)
    return asymmetric_weak_coupling_generator(basis, params, model)


def build_identifier() -> str:
    """Short content hash of the installed package sources."""
    digest = hashlib.sha1()
    pkg_dir = Path(__file__).resolve().parent
    for py in sorted(pkg_dir.rglob("*.py")):
        digest.update(py.name.encode())
        digest.update(py.read_bytes())
    return digest.hexdigest()[:12]


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: str, columns):
    rows = [header]
    n = len(columns[0])
    for k in range(n):
        rows.append(",".join(_fmt(col[k]) for col in columns))
    path.write_text("\n".join(rows) + "\n")


def _report_payload(cfg: dict, extra: dict) -> dict:
    payload = {"config": cfg, "build": build_identifier(),
               "version": __version__}
    payload.update(extra)
    return payload


def _run_slope(cfg, out_dir: Path, stem: str) -> int:
    params, basis, model, n_fill, rho0, _ = _build_objects(cfg)
    gen = _generator_for(cfg["scenario"], basis, params, model)
    if cfg["scenario"] == "slope-singular":
        analytic = slope_singular(n_fill, params.lam, model.G)
        large_n = None
    elif params.symmetric:
        analytic = slope_weak_exact(n_fill, params, model)
        large_n = slope_weak_largeN(params, model)
    else:
        analytic = 0.0
        large_n = None
    report = slope_compare(gen, rho0, analytic, analytic_large_n=large_n)
    payload = _report_payload(cfg, {
        "scenario": cfg["scenario"],
        "slope": {
            "numeric": report.numeric,
            "analytic": report.analytic,
            "analytic_large_n": report.analytic_large_n,
            "abs_dev": report.abs_dev,
            "rel_dev": report.rel_dev,
            "degenerate": report.degenerate,
        },
    })
    _write_json(out_dir / f"{stem}_slope.json", payload)
    return 0


def _run_evolve(cfg, out_dir: Path, stem: str) -> int:
    params, basis, model, _, rho0, t_grid = _build_objects(cfg)
    gen = _generator_for(cfg["scenario"], basis, params, model)
    traj = evolve(gen, rho0, t_grid)
    j_real = traj.expectations["J"].real
    if np.abs(traj.expectations["J"].imag).max() > 1e-10:
        raise IntegrationError("current acquired an imaginary part")
    _write_csv(out_dir / f"{stem}_trajectory.csv", CSV_HEADER,
               [traj.times, j_real, traj.trace_dev, traj.min_eig,
                traj.leakage])
    payload = _report_payload(cfg, {
        "scenario": cfg["scenario"],
        "diagnostics": {
            "max_trace_dev": float(traj.trace_dev.max()),
            "min_eigenvalue": float(traj.min_eig.min()),
            "max_leakage": float(traj.leakage.max()),
            "flagged_records": int(traj.flagged.sum()),
        },
    })
    _write_json(out_dir / f"{stem}_diagnostics.json", payload)
    return 0


def _run_unravel(cfg, out_dir: Path, stem: str, seed_override) -> int:
    params, basis, model, _, rho0, t_grid = _build_objects(cfg)
    if "noise" not in cfg:
        raise ConfigError("unravel scenario requires a noise block")
    nz = cfg["noise"]
    g_noise = (_matrix_from_config(nz["G"], "noise.G")
               if "G" in nz else model.G)
    if np.abs(np.asarray(g_noise).imag).max() > 1e-12:
        raise ConfigError("noise covariance must be real")
    seed = seed_override if seed_override is not None else nz["seed"]
    noise = NoiseConfig(G=np.asarray(g_noise).real, dt=nz["dt"], seed=seed,
                        trajectories=nz["trajectories"],
                        channel_mask=(tuple(nz["channel_mask"])
                                      if "channel_mask" in nz else None))
    result = run_ensemble(basis, params, noise, rho0, t_grid)
    traj = result.trajectory
    _write_csv(out_dir / f"{stem}_ensemble.csv", CSV_HEADER + ",J_stderr",
               [traj.times, traj.expectations["J"].real, traj.trace_dev,
                traj.min_eig, traj.leakage, result.stderr])
    payload = _report_payload(cfg, {
        "scenario": "unravel",
        "ensemble": {
            "trajectories": result.trajectories,
            "seed": result.seed,
            "final_mean_current": float(traj.expectations["J"].real[-1]),
            "final_stderr": float(result.stderr[-1]),
        },
    })
    _write_json(out_dir / f"{stem}_ensemble.json", payload)
    return 0


def _compare_checks(cfg, seed: int):
    """Numeric-vs-analytic records for the compare subcommand."""
    params, basis, model, n_fill, rho0, _ = _build_objects(cfg)
    if model.kind != EXPONENTIAL:
        raise ConfigError("compare-all expects an exponential-kind "
                          "environment block")
    if not params.symmetric:
        raise ConfigError("compare-all expects a symmetric trap")
    if np.abs(model.G.imag).max() > 1e-12:
        raise ConfigError("compare-all needs a real coupling matrix so the "
                          "same G can drive the singular limit")
    checks = []

    def add(name, numeric, analytic, tol, mode):
        dev = abs(numeric - analytic)
        rel = dev / max(abs(analytic), 1e-300)
        passed = (rel < tol) if mode == "rel" else (dev < tol)
        checks.append({"name": name, "numeric": numeric, "analytic": analytic,
                       "abs_dev": dev, "rel_dev": rel, "tolerance": tol,
                       "mode": mode, "pass": bool(passed)})

    gen_w = weak_coupling_generator(basis, params, model)
    add("weak-slope-identity", current_slope(gen_w, rho0),
        slope_weak_exact(n_fill, params, model), WEAK_IDENTITY_RTOL, "rel")

    rng = np.random.default_rng(seed)
    for k in range(10):
        amp = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        g_rand = amp @ amp.conj().T / 4.0
        m_rand = CorrelationModel(EXPONENTIAL, g_rand, mu=model.mu)
        add(f"weak-slope-identity-draw-{k}",
            current_slope(weak_coupling_generator(basis, params, m_rand), rho0),
            slope_weak_exact(n_fill, params, m_rand),
            WEAK_IDENTITY_RTOL, "rel")

    model_d = CorrelationModel(DELTA, model.G.real)
    gen_s = singular_coupling_generator(basis, params, model_d)
    target = slope_singular(n_fill, params.lam, model_d.G)
    add("singular-slope-identity", current_slope(gen_s, rho0), target,
        SINGULAR_IDENTITY_RTOL, "rel")
    for k in range(5):
        draw = ModelParams(T=float(rng.uniform(0.0, 0.5)),
                           U=float(rng.uniform(0.5, 3.0)),
                           eps1=float(rng.uniform(-1.0, 1.0)),
                           eps2=float(rng.uniform(-1.0, 1.0)),
                           lam=params.lam)
        gen_k = singular_coupling_generator(basis, draw, model_d)
        add(f"singular-slope-invariance-draw-{k}",
            current_slope(gen_k, rho0), target, INVARIANCE_ATOL, "abs")

    eq_w = equal_coupling_model(EXPONENTIAL, 1.0, mu=model.mu)
    add("null-equal-coupling-weak",
        current_slope(weak_coupling_generator(basis, params, eq_w), rho0),
        0.0, NULL_ATOL, "abs")
    eq_s = equal_coupling_model(DELTA, 1.0)
    add("null-equal-coupling-singular",
        current_slope(singular_coupling_generator(basis, params, eq_s), rho0),
        0.0, NULL_ATOL, "abs")
    tilted = ModelParams(T=params.T, U=params.U, eps1=params.eps1,
                         eps2=params.eps1 + 0.37, lam=params.lam)
    add("null-asymmetric-trap",
        current_slope(
            asymmetric_weak_coupling_generator(basis, tilted, model), rho0),
        0.0, NULL_ATOL, "abs")
    add("null-closed-system",
        closed_current_derivative(basis, params, n_fill), 0.0,
        NULL_ATOL, "abs")
    return checks


def _run_compare(cfg, out_dir: Path, stem: str, seed_override) -> int:
    seed = (seed_override if seed_override is not None
            else cfg.get("seed", DEFAULT_SEED))
    checks = _compare_checks(cfg, seed)
    all_pass = all(c["pass"] for c in checks)
    payload = _report_payload(cfg, {
        "scenario": "compare-all",
        "seed": seed,
        "checks": checks,
        "all_pass": all_pass,
    })
    _write_json(out_dir / f"{stem}_summary.json", payload)
    return 0 if all_pass else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wellflow",
        description="two-well open-system current simulator")
    parser.add_argument("command",
                        choices=["slope", "evolve", "unravel", "compare"])
    parser.add_argument("--config", required=True, help="run config JSON")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    def say(msg):
        if not args.quiet:
            print(msg)

    try:
        cfg = load_config(Path(args.config))
        if cfg["scenario"] not in _SUBCOMMAND_SCENARIOS[args.command]:
            raise ConfigError(
                f"scenario {cfg['scenario']!r} does not match subcommand "
                f"{args.command!r}")
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = cfg.get("output", {}).get("stem", "result")
    except (ConfigError, ValueError) as exc:
        print(f"wellflow: config error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "slope":
            code = _run_slope(cfg, out_dir, stem)
        elif args.command == "evolve":
            code = _run_evolve(cfg, out_dir, stem)
        elif args.command == "unravel":
            code = _run_unravel(cfg, out_dir, stem, args.seed)
        else:
            code = _run_compare(cfg, out_dir, stem, args.seed)
    except ConfigError as exc:
        print(f"wellflow: config error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationError, StepSizeError, CalibrationError,
            np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"wellflow: numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"wellflow: config error: {exc}", file=sys.stderr)
        return 1

    say(f"wellflow {args.command}: wrote outputs to {out_dir} (stem {stem!r})")
    if code == 2:
        print("wellflow compare: tolerance failure", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
