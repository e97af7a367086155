"""Command-line front end.

Subcommands:
  heat-errors   exact linear error engine: value + bounds over an (M, N) grid
  simulate      dump one trajectory of the nonlinear scheme
  converge      coupled Monte Carlo convergence study with rate fits
  check         inequality and monotonicity audit suite

Configuration is one JSON file with sections "model", "discretization",
"study", "output"; all sections optional with documented defaults.  The
--seed/--paths/--out/--threads flags override the file, and the environment
variables SPDE_SEED / SPDE_OUT sit between the two (flag > env > file).

Exit codes: 0 success, 2 configuration error, 3 sandwich violation in
heat-errors, 4 audit failure in check.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, heat_errors, nonlinearity, scheme
from .noise import NoiseTape

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SANDWICH = 3
EXIT_AUDIT = 4

DEFAULT_HEAT_GRID = (1, 2, 4, 8, 16, 32, 64)
AUDIT_TOL = 1e-8


class ConfigError(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config root must be an object, got {type(cfg).__name__}")
    unknown = set(cfg) - {"model", "discretization", "study", "output"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    return cfg


def _env_int(name: str):
    raw = os.environ.get(name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from exc


def _pick(flag, env, file_value, default):
    for candidate in (flag, env, file_value):
        if candidate is not None:
            return candidate
    return default


def _build_model(cfg: dict, n_xi: int) -> scheme.ModelParams:
    section = cfg.get("model", {})
    coeffs = section.get("a", [0.0, 1.0, 0.0, -1.0])
    if not (isinstance(coeffs, (list, tuple)) and len(coeffs) == 4):
        raise ConfigError(f"model.a must be a list of 4 coefficients, got {coeffs!r}")
    initial = section.get("initial", "bump")
    if isinstance(initial, str):
        xi = scheme.initial_coefficients(initial, n_xi)
    elif isinstance(initial, (list, tuple)):
        xi = np.asarray(initial, dtype=np.float64)
    else:
        raise ConfigError(f"model.initial must be a preset name or a list, got {initial!r}")
    return scheme.ModelParams(
        T=float(section.get("T", 1.0)),
        nu=float(section.get("nu", 1.0)),
        a=nonlinearity.CubicCoefficients(*[float(c) for c in coeffs]),
        xi=xi,
    )


def _build_study(cfg: dict, args) -> experiments.StudyConfig:
    study = cfg.get("study", {})
    disc = cfg.get("discretization", {})
    n_master = int(study.get("N_master", 0)) or int(study.get("N_ref", 128))
    model = _build_model(cfg, n_xi=max(n_master, 512))
    seed = _pick(args.seed, _env_int("SPDE_SEED"), study.get("seed"), 0)
    paths = _pick(args.paths, None, study.get("paths"), 200)
    threads = _pick(args.threads, None, study.get("threads"), 1)
    return experiments.StudyConfig(
        model=model,
        m_grid=tuple(study.get("m_grid", (16, 32, 64, 128))),
        n_grid=tuple(study.get("n_grid", (8, 16, 32, 64))),
        m_ref=int(study.get("M_ref", 2048)),
        n_ref=int(study.get("N_ref", 128)),
        paths=int(paths),
        seed=int(seed),
        gamma=float(disc.get("gamma", scheme.DEFAULT_GAMMA)),
        chi=float(disc.get("chi", scheme.DEFAULT_CHI)),
        m_master=int(study.get("M_master", 0)),
        n_master=int(study.get("N_master", 0)),
        exact=bool(study.get("exact", False)),
        threads=int(threads),
        moment_p=int(study.get("moment_p", 2)),
    )


def _out_dir(cfg: dict, args) -> Path:
    output = cfg.get("output", {})
    chosen = _pick(args.out, os.environ.get("SPDE_OUT"), output.get("dir"), ".")
    path = Path(chosen)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _prefix(cfg: dict) -> str:
    return str(cfg.get("output", {}).get("prefix", "spde1d"))


# ---------------------------------------------------------------------------
# subcommands

def cmd_heat_errors(cfg: dict, args) -> int:
    study = cfg.get("study", {})
    model_section = cfg.get("model", {})
    T = float(model_section.get("T", 1.0))
    nu = float(model_section.get("nu", 1.0))
    if not (T > 0 and nu > 0):
        raise ConfigError(f"model.T and model.nu must be positive, got {T}, {nu}")
    m_grid = [int(m) for m in study.get("m_grid", DEFAULT_HEAT_GRID)]
    n_grid = list(study.get("n_grid", DEFAULT_HEAT_GRID))
    tol = float(study.get("sandwich_tol", 1e-12))
    out = _out_dir(cfg, args) / f"{_prefix(cfg)}_heat_errors.csv"

    reports = []
    for kind in heat_errors.KINDS:
        for M in m_grid:
            for N in n_grid:
                if N == heat_errors.ALL_MODES and kind != "temporal":
                    continue  # the spatial remainder is zero with every mode kept
                reports.append(heat_errors.error_report(kind, M, N, T, nu))
    lines = [heat_errors.REPORT_HEADER, *(r.as_csv_row() for r in reports)]
    experiments.write_text_atomic(out, "\n".join(lines) + "\n")

    violations = [r for r in reports if not r.sandwiched(tol)]
    if violations:
        for r in violations:
            print(f"sandwich violated (tol={tol:g}): kind={r.kind} M={r.M} N={r.N} "
                  f"lower={r.lower!r} exact={r.exact!r} upper={r.upper!r}",
                  file=sys.stderr)
        return EXIT_SANDWICH
    print(f"wrote {out} ({len(reports)} rows, all sandwiched at tol={tol:g})")
    return EXIT_OK


def cmd_simulate(cfg: dict, args) -> int:
    disc_section = cfg.get("discretization", {})
    study = cfg.get("study", {})
    M = int(disc_section.get("M", 64))
    N = int(disc_section.get("N", 64))
    d = scheme.DiscretizationParams(
        M=M, N=N,
        gamma=float(disc_section.get("gamma", scheme.DEFAULT_GAMMA)),
        chi=float(disc_section.get("chi", scheme.DEFAULT_CHI)),
    )
    model = _build_model(cfg, n_xi=max(N, 512))
    seed = int(_pick(args.seed, _env_int("SPDE_SEED"), study.get("seed"), 0))
    m_master = int(study.get("M_master", 0)) or M
    n_master = int(study.get("N_master", 0)) or N
    tape = NoiseTape(seed=seed, M_master=m_master, N_master=n_master,
                     T=model.T, path=int(study.get("path", 0)))
    states = scheme.simulate_trajectory(model, d, tape)
    out = _out_dir(cfg, args) / f"{_prefix(cfg)}_trajectory.csv"
    experiments.write_text_atomic(out, scheme.trajectory_csv(model, d, states))
    print(f"wrote {out} ({len(states)} grid times x {N} modes)")
    return EXIT_OK


def cmd_converge(cfg: dict, args) -> int:
    study_cfg = _build_study(cfg, args)
    rows, fits = experiments.run_convergence_study(study_cfg)
    out_dir = _out_dir(cfg, args)
    csv_path = out_dir / f"{_prefix(cfg)}_errors.csv"
    json_path = out_dir / f"{_prefix(cfg)}_rates.json"
    experiments.write_text_atomic(csv_path, experiments.error_table_csv(rows))
    experiments.write_text_atomic(json_path, experiments.fits_json(fits))
    print(f"wrote {csv_path} and {json_path}")
    print(f"temporal slope {fits['temporal'].slope:+.4f}, "
          f"spatial slope {fits['spatial'].slope:+.4f}")
    return EXIT_OK


def cmd_check(cfg: dict, args) -> int:
    study = cfg.get("study", {})
    trials = int(study.get("audit_trials", 300))
    seed = int(_pick(args.seed, _env_int("SPDE_SEED"), study.get("seed"), 0))

    results = []
    for name in ("monotonicity", "lipschitz", "coercivity"):
        residual = nonlinearity.run_inequality_audit(name, trials=trials, seed=seed)
        results.append((f"drift-{name}", residual <= AUDIT_TOL,
                        f"max_residual={residual:.3e} tol={AUDIT_TOL:g} trials={trials}"))

    hs_violations = heat_errors.run_hs_monotonicity_audit(trials=max(trials // 2, 50),
                                                          seed=seed)
    results.append(("hs-factor-monotonicity", hs_violations == 0,
                    f"violations={hs_violations}"))

    m_values = [1, 2, 4, 8, 16, 32, 64]
    temporal = [heat_errors.temporal_error_exact(M, 32, 1.0, 1.0) for M in m_values]
    ok_t = all(b <= a * (1 + 1e-12) for a, b in zip(temporal, temporal[1:]))
    results.append(("temporal-error-monotone-in-M", ok_t,
                    f"values M=1..64: {temporal[0]:.6f} -> {temporal[-1]:.6f}"))

    spatial = [heat_errors.spatial_error_exact(N, 1.0, 1.0) for N in range(1, 65)]
    ok_s = all(b < a for a, b in zip(spatial, spatial[1:]))
    results.append(("spatial-error-decreasing-in-N", ok_s,
                    f"values N=1..64: {spatial[0]:.6f} -> {spatial[-1]:.6f}"))

    failed = False
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name:32s} {detail}")
        failed = failed or not ok
    return EXIT_AUDIT if failed else EXIT_OK


# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spde1d",
        description="Spectral exponential Euler solver and exact error engine "
                    "for 1-D stochastic reaction-diffusion equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_text in (
        ("heat-errors", cmd_heat_errors,
         "exact linear errors with lower/upper bounds over an (M, N) grid"),
        ("simulate", cmd_simulate, "dump one scheme trajectory as CSV"),
        ("converge", cmd_converge, "Monte Carlo convergence study with rate fits"),
        ("check", cmd_check, "run inequality and monotonicity audits"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=fn)
        p.add_argument("--config", metavar="PATH", help="JSON configuration file")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, metavar="U64", help="master seed override")
        p.add_argument("--paths", type=int, metavar="U32", help="Monte Carlo path count")
        p.add_argument("--threads", type=int, metavar="U32",
                       help="worker process cap (default 1)")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return args.handler(cfg, args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
