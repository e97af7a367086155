"""Nonlinearity-truncated spectral exponential Euler scheme.

One step advances the Galerkin coefficients by

    Y_{m+1} = e^{hA} Y_m + (O_{m+1} - e^{hA} O_m)
              + 1{ ||Y_m||_{H_gamma} + ||O_m||_{H_gamma} <= (M/T)^chi }
                * phi1(h) P_N F(Y_m)

where O is the discretized stochastic convolution driven by the same noise
tape.  The indicator suppresses the cubic drift on the rare steps where the
state exceeds a resolution-dependent threshold; that is what tames the
explicit treatment of the superlinear term.  Everything here is a
deterministic function of (model, discretization, tape).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .nonlinearity import CubicCoefficients, allen_cahn, project_F
from .noise import NoiseTape

INITIAL_PRESETS = ("zero", "first_mode", "bump")


@dataclass(frozen=True)
class ModelParams:
    """Continuous-problem data: horizon, diffusivity, drift, initial value.

    xi holds sine coefficients of the initial condition; runs use its first N
    entries (zero-padded), i.e. the initial value is P_N xi for every
    resolution, so refinements share one initial function.
    """

    T: float
    nu: float
    a: CubicCoefficients
    xi: np.ndarray

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"horizon T must be positive and finite, got {self.T}")
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValueError(f"diffusivity nu must be positive, got {self.nu}")
        xi = np.asarray(self.xi, dtype=np.float64)
        if xi.ndim != 1:
            raise ValueError(f"xi must be a coefficient vector, got shape {xi.shape}")
        if not np.all(np.isfinite(xi)):
            raise ValueError("xi coefficients must be finite")
        object.__setattr__(self, "xi", xi)

    def xi_projected(self, n_modes: int) -> np.ndarray:
        out = np.zeros(n_modes)
        m = min(n_modes, self.xi.shape[0])
        out[:m] = self.xi[:m]
        return out


# widest gamma window for which the taming argument closes; chi cannot exceed
# gamma/3 - 1/18, which is positive exactly on this window
GAMMA_RANGE = (1.0 / 6.0, 0.25)
DEFAULT_GAMMA = 0.2
DEFAULT_CHI = 1.0 / 90.0  # = DEFAULT_GAMMA/3 - 1/18, the permissive end


@dataclass(frozen=True)
class DiscretizationParams:
    M: int
    N: int
    gamma: float = DEFAULT_GAMMA
    chi: float = DEFAULT_CHI

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError(f"need M, N >= 1, got M={self.M}, N={self.N}")
        lo, hi = GAMMA_RANGE
        if not (lo < self.gamma < hi):
            raise ValueError(
                f"gamma must lie in ({lo:.6g}, {hi:.6g}) exclusive, got {self.gamma}")
        chi_cap = self.gamma / 3.0 - 1.0 / 18.0
        if not (0 < self.chi <= chi_cap):
            raise ValueError(
                f"chi must lie in (0, gamma/3 - 1/18] = (0, {chi_cap:.6g}], got {self.chi}")

    def threshold(self, T: float) -> float:
        return (self.M / T) ** self.chi


@dataclass(frozen=True)
class SchemeState:
    m: int
    Y: np.ndarray
    O: np.ndarray

    def __post_init__(self):
        if self.Y.shape != self.O.shape or self.Y.ndim != 1:
            raise ValueError(
                f"Y and O must be vectors of equal length, got {self.Y.shape} vs {self.O.shape}")


def initial_coefficients(preset: str, n_modes: int) -> np.ndarray:
    """Named initial conditions as sine coefficient vectors of length n_modes.

    "bump" is x(1-x): integrating x(1-x) sqrt(2) sin(k pi x) gives
    2 sqrt(2) (1 - (-1)^k) / (k pi)^3.
    """
    if n_modes < 1:
        raise ValueError(f"need n_modes >= 1, got {n_modes}")
    if preset == "zero":
        return np.zeros(n_modes)
    if preset == "first_mode":
        out = np.zeros(n_modes)
        out[0] = 1.0
        return out
    if preset == "bump":
        k = np.arange(1, n_modes + 1, dtype=np.float64)
        return 2.0 * math.sqrt(2.0) * (1.0 - (-1.0) ** k) / (k * math.pi) ** 3
    raise ValueError(f"unknown initial preset {preset!r}; expected one of {INITIAL_PRESETS}")


def truncation_indicator(Y: np.ndarray, O: np.ndarray, d: DiscretizationParams,
                         T: float, nu: float) -> bool:
    """True iff the drift stays on: ||Y||_{H_gamma} + ||O||_{H_gamma} <= (M/T)^chi.

    The comparison is non-strict; the boundary case keeps the drift.
    """
    total = spectral.hr_norm(Y, d.gamma, nu) + spectral.hr_norm(O, d.gamma, nu)
    return bool(total <= d.threshold(T))


def euler_step(state: SchemeState, O_next: np.ndarray, h: float,
               model: ModelParams, d: DiscretizationParams) -> SchemeState:
    """Single exponential Euler update; O_next must come from the same tape."""
    if O_next.shape != state.Y.shape:
        raise ValueError(
            f"O_next has {O_next.shape[0]} modes, state has {state.Y.shape[0]}")
    n = state.Y.shape[0]
    decay = spectral.semigroup_factors(n, model.nu, h)
    y_next = decay * state.Y + O_next - decay * state.O
    if truncation_indicator(state.Y, state.O, d, model.T, model.nu):
        phi = spectral.phi1_factors(n, model.nu, h)
        y_next = y_next + phi * project_F(state.Y, model.a)
    return SchemeState(m=state.m + 1, Y=y_next, O=np.asarray(O_next, dtype=np.float64))


def run_scheme(model: ModelParams, d: DiscretizationParams,
               dw: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Whole-trajectory kernel on raw increment arrays.

    dw has shape (M, N).  Returns (Y_path, O_path, drift_suppressed) with
    paths of shape (M+1, N) at grid times and the count of steps whose
    indicator was false.  This is the hot loop shared by the drivers; the
    recursion order matches euler_step / the OU step exactly.
    """
    dw = np.asarray(dw, dtype=np.float64)
    if dw.shape != (d.M, d.N):
        raise ValueError(f"increments shape {dw.shape} does not match (M,N)=({d.M},{d.N})")
    h = model.T / d.M
    decay = spectral.semigroup_factors(d.N, model.nu, h)
    phi = spectral.phi1_factors(d.N, model.nu, h)
    weights = spectral.eigenvalues(d.N, model.nu) ** (2 * d.gamma)
    thr = d.threshold(model.T)
    drift_on = any(v != 0 for v in model.a.as_tuple())
    grid = spectral.default_grid(d.N)

    y_path = np.empty((d.M + 1, d.N))
    o_path = np.empty((d.M + 1, d.N))
    y_path[0] = o_path[0] = model.xi_projected(d.N)
    suppressed = 0
    y, o = y_path[0], o_path[0]
    for m in range(d.M):
        o_next = decay * (o + dw[m])
        y_next = decay * y + o_next - decay * o
        norm_sum = math.sqrt(float(np.dot(weights, y * y))) \
            + math.sqrt(float(np.dot(weights, o * o)))
        if norm_sum <= thr:
            if drift_on:
                y_next = y_next + phi * project_F(y, model.a, grid)
        else:
            suppressed += 1
        y_path[m + 1] = y_next
        o_path[m + 1] = o_next
        y, o = y_next, o_next
    return y_path, o_path, suppressed


def simulate_trajectory(model: ModelParams, d: DiscretizationParams,
                        tape: NoiseTape) -> list[SchemeState]:
    """States at grid times 0, h, ..., T; Y_0 = O_0 = P_N xi."""
    if tape.M_master % d.M != 0:
        raise ValueError(f"tape steps {tape.M_master} not divisible by M={d.M}")
    if tape.N_master < d.N:
        raise ValueError(f"tape holds {tape.N_master} modes, need {d.N}")
    if tape.T != model.T:
        raise ValueError(f"tape horizon {tape.T} differs from model horizon {model.T}")
    dw = tape.increments(d.M, d.N)
    y_path, o_path, _ = run_scheme(model, d, dw)
    return [SchemeState(m=m, Y=y_path[m], O=o_path[m]) for m in range(d.M + 1)]


def reference_solution(model: ModelParams, tape: NoiseTape, M_ref: int, N_ref: int,
                       gamma: float = DEFAULT_GAMMA, chi: float = DEFAULT_CHI,
                       max_target_M: int | None = None,
                       max_target_N: int | None = None) -> list[SchemeState]:
    """Fine-resolution stand-in for the exact solution, on the shared tape.

    Coarser targets are compared against it at their grid times.  Targets
    must keep a ratio of at least 8 in time and 2 in space, except when they
    sit exactly at the reference resolution (self-comparison along one axis).
    """
    for name, ref, target, ratio in (("M", M_ref, max_target_M, 8),
                                     ("N", N_ref, max_target_N, 2)):
        if target is not None and target != ref and ref < ratio * target:
            raise ValueError(
                f"reference {name}={ref} must be >= {ratio}x the largest target {target}")
    d = DiscretizationParams(M=M_ref, N=N_ref, gamma=gamma, chi=chi)
    return simulate_trajectory(model, d, tape)


TRAJECTORY_HEADER = "t,mode_index,Y_coeff,O_coeff,indicator"


def trajectory_csv(model: ModelParams, d: DiscretizationParams,
                   states: list[SchemeState]) -> str:
    """CSV dump, one row per (grid time, mode); indicator re-evaluated at each
    time so the column can be cross-checked from the dumped coefficients."""
    h = model.T / d.M
    lines = [TRAJECTORY_HEADER]
    for state in states:
        ind = int(truncation_indicator(state.Y, state.O, d, model.T, model.nu))
        t = state.m * h
        for k in range(d.N):
            lines.append("%.17g,%d,%.17g,%.17g,%d"
                         % (t, k + 1, state.Y[k], state.O[k], ind))
    return "\n".join(lines) + "\n"


def allen_cahn_model(T: float = 1.0, nu: float = 1.0, preset: str = "bump",
                     n_xi_modes: int = 512) -> ModelParams:
    """The reference nonlinear model: F(v) = v - v^3 with a named initial state."""
    return ModelParams(T=T, nu=nu, a=allen_cahn(),
                       xi=initial_coefficients(preset, n_xi_modes))
