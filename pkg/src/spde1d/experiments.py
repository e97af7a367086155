"""Coupled-path Monte Carlo studies of the nonlinear scheme.

A study runs the scheme at several (M, N) resolutions against a fine
reference on the *same* noise tape, estimates the strong error

    sup over grid times of || X_ref(t) - Y^{M,N}(t) ||_{L^2(P;H)}

and fits log-log rates.  The sup is taken outside the expectation: per grid
time the squared differences are averaged over paths first, then the maximum
over times is located and a delta-method standard error is attached at the
maximizing time.

Paths are processed in fixed-size batches of 64.  A batch is a pure function
of (config, batch index), and batch results are reduced in index order, so
output bytes are identical for any --threads value.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import heat_errors, spectral
from .noise import NoiseTape
from .scheme import DEFAULT_CHI, DEFAULT_GAMMA, DiscretizationParams, ModelParams, run_scheme

BATCH_PATHS = 64

ERROR_TABLE_HEADER = "kind,M,N,estimate,stderr,activation_fraction,paths,seed"


@dataclass(frozen=True)
class StudyConfig:
    """Everything a convergence study depends on; hashable and picklable.

    Invariants: every grid M and the reference M divide the master step
    count, every grid N and the reference N fit inside the master mode
    count, and there is at least one path.  The reference-ratio rules
    (>= 8x in time, >= 2x in space, equality allowed) are the business of
    the operations that actually use the reference.
    """

    model: ModelParams
    m_grid: tuple
    n_grid: tuple
    m_ref: int
    n_ref: int
    paths: int = 200
    seed: int = 0
    gamma: float = DEFAULT_GAMMA
    chi: float = DEFAULT_CHI
    m_master: int = 0  # 0: use m_ref
    n_master: int = 0  # 0: use n_ref
    exact: bool = False
    threads: int = 1
    moment_p: int = 2

    def __post_init__(self):
        object.__setattr__(self, "m_grid", tuple(int(m) for m in self.m_grid))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.m_grid or not self.n_grid:
            raise ValueError("m_grid and n_grid must be nonempty")
        if self.m_master == 0:
            object.__setattr__(self, "m_master", int(self.m_ref))
        if self.n_master == 0:
            object.__setattr__(self, "n_master", int(self.n_ref))
        for m in (*self.m_grid, self.m_ref):
            if m < 1 or self.m_master % m != 0:
                raise ValueError(f"M={m} must divide the master step count {self.m_master}")
        for n in self.n_grid:
            if not (1 <= n <= self.n_ref):
                raise ValueError(f"N={n} must lie in [1, N_ref={self.n_ref}]")
        if not (1 <= self.n_ref <= self.n_master):
            raise ValueError(f"need N_ref <= N_master, got {self.n_ref} vs {self.n_master}")
        if self.paths < 1:
            raise ValueError(f"need at least one path, got {self.paths}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.moment_p not in (2, 4, 8):
            raise ValueError(f"moment_p must be one of 2, 4, 8, got {self.moment_p}")
        if self.exact and any(v != 0 for v in self.model.a.as_tuple()):
            raise ValueError("exact mode is only defined for the zero-drift model")
        DiscretizationParams(M=1, N=1, gamma=self.gamma, chi=self.chi)  # range check

    def discretization(self, M: int, N: int) -> DiscretizationParams:
        return DiscretizationParams(M=M, N=N, gamma=self.gamma, chi=self.chi)


@dataclass(frozen=True)
class ErrorTableRow:
    kind: str
    M: int
    N: int
    estimate: float
    stderr: float
    activation_fraction: float  # fraction of steps with the drift suppressed
    paths: int
    seed: int

    def as_csv_row(self) -> str:
        return "%s,%d,%d,%.17g,%.17g,%.17g,%d,%d" % (
            self.kind, self.M, self.N, self.estimate, self.stderr,
            self.activation_fraction, self.paths, self.seed)


def error_table_csv(rows) -> str:
    return "\n".join([ERROR_TABLE_HEADER, *(r.as_csv_row() for r in rows)]) + "\n"


def write_text_atomic(path, text: str) -> None:
    """Write-then-rename so readers never observe a partial file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _check_reference_ratios(cfg: StudyConfig, targets) -> None:
    for _, M, N in targets:
        if M != cfg.m_ref and (cfg.m_ref < 8 * M or cfg.m_ref % M != 0):
            raise ValueError(
                f"reference M={cfg.m_ref} must be a multiple and >= 8x of target M={M}")
        if N != cfg.n_ref and cfg.n_ref < 2 * N:
            raise ValueError(
                f"reference N={cfg.n_ref} must be >= 2x target N={N}")


def _batches(paths: int):
    return [(s, min(s + BATCH_PATHS, paths)) for s in range(0, paths, BATCH_PATHS)]


def _map_batches(worker, cfg: StudyConfig, targets, threads: int | None):
    threads = cfg.threads if threads is None else threads
    jobs = [(cfg, targets, start, stop) for start, stop in _batches(cfg.paths)]
    if threads <= 1 or len(jobs) == 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, jobs))  # map preserves job order


# ---------------------------------------------------------------------------
# coupled reference-vs-target engine

def _coupled_batch(job):
    """Accumulators for one path batch: per target, per-grid-time sums of
    squared H differences and their squares, plus truncation counts."""
    cfg, targets, start, stop = job
    acc = {t: {"d2": np.zeros(t[1] + 1), "d4": np.zeros(t[1] + 1),
               "suppressed": 0, "steps": 0} for t in targets}
    d_ref = cfg.discretization(cfg.m_ref, cfg.n_ref)
    for path in range(start, stop):
        tape = NoiseTape(seed=cfg.seed, M_master=cfg.m_master,
                         N_master=cfg.n_master, T=cfg.model.T, path=path)
        master = tape.master_increments(cfg.n_ref)
        group_ref = cfg.m_master // cfg.m_ref
        dw_ref = master.reshape(cfg.m_ref, group_ref, cfg.n_ref).sum(axis=1)
        y_ref, _, _ = run_scheme(cfg.model, d_ref, dw_ref)
        for target in targets:
            _, M, N = target
            group = cfg.m_master // M
            dw = master[:, :N].reshape(M, group, N).sum(axis=1)
            y, _, suppressed = run_scheme(cfg.model, cfg.discretization(M, N), dw)
            diff = y_ref[:: cfg.m_ref // M].copy()
            diff[:, :N] -= y
            d2 = np.einsum("ij,ij->i", diff, diff)
            a = acc[target]
            a["d2"] += d2
            a["d4"] += d2 * d2
            a["suppressed"] += suppressed
            a["steps"] += M
    return acc


def _reduce_accumulators(parts):
    total = parts[0]
    for part in parts[1:]:
        for key, a in part.items():
            t = total[key]
            for field_name in ("d2", "d4"):
                t[field_name] = t[field_name] + a[field_name]
            t["suppressed"] += a["suppressed"]
            t["steps"] += a["steps"]
    return total


def _estimate_from_acc(a, paths: int) -> tuple[float, float, float]:
    mean_d2 = a["d2"] / paths
    m_star = int(np.argmax(mean_d2))
    est = math.sqrt(max(mean_d2[m_star], 0.0))
    if paths < 2:
        se = math.nan
    elif est == 0.0:
        se = 0.0
    else:
        var = (a["d4"][m_star] / paths - mean_d2[m_star] ** 2) * paths / (paths - 1)
        se = math.sqrt(max(var, 0.0) / paths) / (2.0 * est)
    fraction = a["suppressed"] / a["steps"] if a["steps"] else 0.0
    return est, se, fraction


def strong_error_mc(cfg: StudyConfig, M: int, N: int, threads: int | None = None,
                    enforce_ratios: bool = True) -> tuple[float, float, float]:
    """(estimate, stderr, activation_fraction) for one target resolution.

    enforce_ratios=False skips the reference-separation guard; refinement
    audits that compare targets near the reference resolution need this.
    """
    target = ("single", M, N)
    if enforce_ratios:
        _check_reference_ratios(cfg, [target])
    parts = _map_batches(_coupled_batch, cfg, [target], threads)
    acc = _reduce_accumulators(parts)[target]
    return _estimate_from_acc(acc, cfg.paths)


def run_convergence_study(cfg: StudyConfig, threads: int | None = None):
    """Full study: ErrorTable rows plus temporal and spatial rate fits.

    The temporal axis varies M at the largest available mode count (the
    reference's N); the spatial axis varies N at the reference's M.  In
    exact mode (zero drift) the table is filled from the closed-form engine:
    row estimates are the errors against the time-space continuum, the
    temporal fit uses the pure temporal series at fixed N, and the spatial
    fit uses the pure spatial series (its M -> infinity limit); stderr is 0
    and the paths column reads 0.
    """
    T, nu = cfg.model.T, cfg.model.nu
    temporal_targets = [("temporal", M, cfg.n_ref) for M in cfg.m_grid]
    spatial_targets = [("spatial", cfg.m_ref, N) for N in cfg.n_grid]

    if cfg.exact:
        rows = [
            ErrorTableRow("temporal", M, cfg.n_ref,
                          heat_errors.full_error_exact(M, cfg.n_ref, T, nu),
                          0.0, math.nan, 0, cfg.seed)
            for _, M, _ in temporal_targets
        ] + [
            ErrorTableRow("spatial", cfg.m_ref, N,
                          heat_errors.full_error_exact(cfg.m_ref, N, T, nu),
                          0.0, math.nan, 0, cfg.seed)
            for _, _, N in spatial_targets
        ]
        fits = {
            "temporal": heat_errors.fit_rate(
                {M: heat_errors.temporal_error_exact(M, cfg.n_ref, T, nu)
                 for M in cfg.m_grid}),
            "spatial": heat_errors.fit_rate(
                {N: heat_errors.spatial_error_exact(N, T, nu) for N in cfg.n_grid}),
        }
        return rows, fits

    targets = temporal_targets + spatial_targets
    _check_reference_ratios(cfg, targets)
    acc = _reduce_accumulators(_map_batches(_coupled_batch, cfg, targets, threads))
    rows = []
    for kind, M, N in targets:
        est, se, frac = _estimate_from_acc(acc[(kind, M, N)], cfg.paths)
        rows.append(ErrorTableRow(kind, M, N, est, se, frac, cfg.paths, cfg.seed))
    fits = {}
    for axis, resolution_of in (("temporal", lambda r: r.M), ("spatial", lambda r: r.N)):
        pts = {resolution_of(r): r.estimate for r in rows
               if r.kind == axis and r.estimate > 0}
        fits[axis] = heat_errors.fit_rate(pts)
    return rows, fits


def fits_json(fits: dict) -> str:
    payload = {
        "temporal": fits["temporal"].as_dict("M"),
        "spatial": fits["spatial"].as_dict("N"),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# target-only engine: moment audits and truncation activation

def _cells_batch(job):
    """Per cell: sums of ||Y_T||_{H_gamma}^p and its square, truncation counts."""
    cfg, cells, start, stop = job
    acc = {c: {"v": 0.0, "v2": 0.0, "suppressed": 0, "steps": 0} for c in cells}
    weights = {N: spectral.eigenvalues(N, cfg.model.nu) ** (2 * cfg.gamma)
               for N in sorted({c[1] for c in cells})}
    half_p = cfg.moment_p / 2.0
    for path in range(start, stop):
        tape = NoiseTape(seed=cfg.seed, M_master=cfg.m_master,
                         N_master=cfg.n_master, T=cfg.model.T, path=path)
        master = tape.master_increments()
        for cell in cells:
            M, N = cell
            group = cfg.m_master // M
            dw = master[:, :N].reshape(M, group, N).sum(axis=1)
            y, _, suppressed = run_scheme(cfg.model, cfg.discretization(M, N), dw)
            value = float(np.dot(weights[N], y[-1] * y[-1])) ** half_p
            a = acc[cell]
            a["v"] += value
            a["v2"] += value * value
            a["suppressed"] += suppressed
            a["steps"] += M
    return acc


def _reduce_cells(parts):
    total = parts[0]
    for part in parts[1:]:
        for key, a in part.items():
            t = total[key]
            t["v"] += a["v"]
            t["v2"] += a["v2"]
            t["suppressed"] += a["suppressed"]
            t["steps"] += a["steps"]
    return total


def _run_cells(cfg: StudyConfig, cells, threads):
    for M, N in cells:
        if cfg.m_master % M != 0:
            raise ValueError(f"cell M={M} must divide master step count {cfg.m_master}")
        if not (1 <= N <= cfg.n_master):
            raise ValueError(f"cell N={N} exceeds master mode count {cfg.n_master}")
    return _reduce_cells(_map_batches(_cells_batch, cfg, list(cells), threads))


@dataclass(frozen=True)
class MomentRow:
    M: int
    N: int
    estimate: float
    stderr: float
    activation_fraction: float


def moment_audit(cfg: StudyConfig, threads: int | None = None):
    """Empirical E||Y_T||_{H_gamma}^p over the m_grid x n_grid product.

    Returns (rows, flagged): flagged is True when some estimate exceeds
    three times the grid median by more than three of its standard errors,
    a scale-free proxy for 'the moments do not blow up with resolution'.
    """
    cells = [(M, N) for M in cfg.m_grid for N in cfg.n_grid]
    acc = _run_cells(cfg, cells, threads)
    rows = []
    for M, N in cells:
        a = acc[(M, N)]
        mean = a["v"] / cfg.paths
        if cfg.paths < 2:
            se = math.nan
        else:
            var = (a["v2"] / cfg.paths - mean * mean) * cfg.paths / (cfg.paths - 1)
            se = math.sqrt(max(var, 0.0) / cfg.paths)
        frac = a["suppressed"] / a["steps"] if a["steps"] else 0.0
        rows.append(MomentRow(M, N, mean, se, frac))
    median = float(np.median([r.estimate for r in rows]))
    flagged = any(
        r.estimate > 3.0 * median + 3.0 * r.stderr
        for r in rows if not math.isnan(r.stderr)
    )
    return rows, flagged


def activation_fractions(cfg: StudyConfig, cells, threads: int | None = None):
    """Drift-suppression fraction per (M, N) cell, [(M, N, fraction), ...]."""
    acc = _run_cells(cfg, list(cells), threads)
    return [(M, N, acc[(M, N)]["suppressed"] / acc[(M, N)]["steps"])
            for M, N in cells]


def with_threads(cfg: StudyConfig, threads: int) -> StudyConfig:
    return replace(cfg, threads=threads)
