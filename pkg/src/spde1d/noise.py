"""Space-time white noise tape and the discretized Ornstein-Uhlenbeck process.

The tape hands out the Brownian coefficient increments Delta W[j][k] of the
first N_master sine modes on a master grid of M_master steps.  Generation is
counter-based: element (path, substream, j, k) sits at a fixed Philox counter
position and normals come from the inverse CDF of 53-bit uniforms, so any
element can be regenerated independently, bit-identically, in any order and
under any parallel schedule.  Coarser resolutions are produced by summing
master increments in fixed groups, which is what couples refinements in the
convergence studies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

from . import spectral

_KEY_SALT = 0x9E3779B97F4A7C15  # decouples the 128-bit Philox key from small seeds

SUBSTREAM_INCREMENTS = 0
SUBSTREAM_AUX = 1  # residual draws for the exact true-vs-discrete coupling


def _uniform_open(raw: np.ndarray) -> np.ndarray:
    # 53-bit mantissa, shifted to the open interval (0,1)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


@dataclass(frozen=True)
class NoiseTape:
    """Reproducible white-noise increments for one sample path.

    Fields
    ------
    seed : master seed shared by a whole experiment
    M_master, N_master : master resolution; every consumed (M, N) must satisfy
        M | M_master and N <= N_master
    T : time horizon; master step is T/M_master
    path : sub-stream index of this sample path
    """

    seed: int
    M_master: int
    N_master: int
    T: float
    path: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        if self.M_master < 1 or self.N_master < 1:
            raise ValueError("master resolution must be at least (1, 1)")
        if not self.T > 0:
            raise ValueError(f"horizon T must be positive, got {self.T}")
        if not (0 <= int(self.path) < 2**64):
            raise ValueError(f"path index must fit in 64 bits, got {self.path}")

    @property
    def h_master(self) -> float:
        return self.T / self.M_master

    def _raw(self, substream: int, start: int, count: int) -> np.ndarray:
        """count raw 64-bit words from stream position `start`."""
        block, offset = divmod(start, 4)
        bg = Philox(
            counter=[block, substream, self.path, 0],
            key=[self.seed, _KEY_SALT],
        )
        return bg.random_raw(offset + count)[offset:]

    def normals(self, rows: int | None = None, cols: int | None = None,
                substream: int = SUBSTREAM_INCREMENTS) -> np.ndarray:
        """Standard normal block of shape (rows, cols), rows of stride N_master.

        Element (j, k) is a pure function of (seed, path, substream, j, k);
        requesting fewer rows or columns returns the identical leading block.
        """
        rows = self.M_master if rows is None else rows
        cols = self.N_master if cols is None else cols
        if rows > self.M_master or cols > self.N_master:
            raise ValueError(
                f"requested ({rows},{cols}) exceeds master ({self.M_master},{self.N_master})"
            )
        raw = self._raw(substream, 0, rows * self.N_master)
        block = raw.reshape(rows, self.N_master)[:, :cols]
        return ndtri(_uniform_open(block))

    def normal_at(self, j: int, k: int, substream: int = SUBSTREAM_INCREMENTS) -> float:
        """Single element (j, k), derived independently of any block request."""
        if not (0 <= j < self.M_master and 0 <= k < self.N_master):
            raise ValueError(f"element ({j},{k}) outside master block")
        raw = self._raw(substream, j * self.N_master + k, 1)
        return float(ndtri(_uniform_open(raw))[0])

    def master_increments(self, n_modes: int | None = None) -> np.ndarray:
        """Delta W at master resolution: normals scaled by sqrt(T/M_master)."""
        z = self.normals(cols=n_modes)
        return z * np.sqrt(self.h_master)

    def increments(self, n_steps: int, n_modes: int) -> np.ndarray:
        """Delta W at a coarse resolution (n_steps, n_modes).

        Coarse step j is the in-order group sum of master increments; the
        result is a deterministic function of the tape identity alone.
        """
        if self.M_master % n_steps != 0:
            raise ValueError(
                f"n_steps must divide M_master, got {n_steps} vs {self.M_master}"
            )
        return coarsen_increments(self.master_increments(n_modes), n_steps)


def coarsen_increments(master: np.ndarray, n_steps: int) -> np.ndarray:
    """Group-sum master-resolution increments down to n_steps rows."""
    m_master, n_modes = master.shape
    if m_master % n_steps != 0:
        raise ValueError(f"{n_steps} does not divide master step count {m_master}")
    group = m_master // n_steps
    return master.reshape(n_steps, group, n_modes).sum(axis=1)


def generate_tape(seed: int, M_master: int = 4096, N_master: int = 512,
                  T: float = 1.0, path: int = 0) -> NoiseTape:
    return NoiseTape(seed=seed, M_master=M_master, N_master=N_master, T=T, path=path)


# ---------------------------------------------------------------------------
# discretized OU process O^{M,N}

def ou_step(coeffs: np.ndarray, dw: np.ndarray, decay: np.ndarray) -> np.ndarray:
    """One step O -> e^{hA}(O + Delta W); exact in distribution at grid times."""
    return decay * (coeffs + dw)


def simulate_ou(tape: NoiseTape, n_steps: int, n_modes: int, nu: float,
                xi: np.ndarray | None = None) -> np.ndarray:
    """Grid-time OU trajectory, shape (n_steps+1, n_modes), O_0 = P_N xi."""
    h = tape.T / n_steps
    decay = spectral.semigroup_factors(n_modes, nu, h)
    dw = tape.increments(n_steps, n_modes)
    out = np.empty((n_steps + 1, n_modes))
    out[0] = 0.0 if xi is None else np.asarray(xi, dtype=np.float64)[:n_modes]
    for m in range(n_steps):
        out[m + 1] = ou_step(out[m], dw[m], decay)
    return out


def ou_variance_discrete(n_steps: int, n_modes: int, T: float, nu: float) -> np.ndarray:
    """Per-mode Var(O_T) for the zero-initial discretized OU after n_steps steps.

    Closed form of sum_{j=1..M} h e^{-2 mu j h}.
    """
    h = T / n_steps
    mu = spectral.eigenvalues(n_modes, nu)
    return h * np.exp(-2 * mu * h) * np.expm1(-2 * mu * T) / np.expm1(-2 * mu * h)


def ou_second_moment(n_steps: int, n_modes: int, T: float, nu: float,
                     r: float = 0.0) -> float:
    """E ||O_T||_{H_r}^2 of the zero-initial discretized OU, exactly."""
    mu = spectral.eigenvalues(n_modes, nu)
    return float(np.sum(mu ** (2 * r) * ou_variance_discrete(n_steps, n_modes, T, nu)))


# ---------------------------------------------------------------------------
# exact coupling of the true stochastic convolution to the tape
#
# For mode k on step j the integral I_j = int e^{-mu(T-s)} dW(s) is jointly
# Gaussian with the step increment; conditioning gives
#   I_j = alpha_j Delta W_j + beta_j Z_j,   Z_j fresh standard normal,
# with alpha_j h = Cov(I_j, Delta W_j) and beta_j^2 = Var I_j - alpha_j^2 h.
# Summing I_j - e^{-mu(T - t_j)} Delta W_j over j realizes the difference
# P_N O_T - O^{M,N}_T pathwise with the exact joint law.

def _bridge_coefficients(n_steps: int, n_modes: int, T: float, nu: float):
    h = T / n_steps
    mu = spectral.eigenvalues(n_modes, nu)
    j = np.arange(n_steps, dtype=np.float64)[:, None]
    e_end = np.exp(-mu * (T - (j + 1) * h))
    e_start = np.exp(-mu * (T - j * h))
    var_i = e_end**2 * (-np.expm1(-2 * mu * h)) / (2 * mu)
    alpha = e_end * (-np.expm1(-mu * h)) / (mu * h)
    beta = np.sqrt(np.maximum(var_i - alpha**2 * h, 0.0))
    coef_z = (alpha - e_start) * np.sqrt(h)  # multiplies the increment normal
    return coef_z, beta


def sample_bridge_gap(tape: NoiseTape, n_steps: int, n_modes: int, nu: float) -> np.ndarray:
    """One path of the mode-wise gap P_N O_T - O^{M,N}_T (zero initial data)."""
    coef_z, beta = _bridge_coefficients(n_steps, n_modes, tape.T, nu)
    z = tape.normals(rows=n_steps, cols=n_modes, substream=SUBSTREAM_INCREMENTS)
    resid = tape.normals(rows=n_steps, cols=n_modes, substream=SUBSTREAM_AUX)
    return np.einsum("jk,jk->k", coef_z, z) + np.einsum("jk,jk->k", beta, resid)


def bridge_estimate(seed: int, n_steps: int, n_modes: int, T: float, nu: float,
                    paths: int) -> tuple[float, float]:
    """MC estimate of ||P_N O_T - O^{M,N}_T||_{L^2(P;H)} with delta-method stderr.

    Uses a master tape at exactly (n_steps, n_modes); the coupling above makes
    the estimator unbiased for the closed-form value, so agreement within
    Monte Carlo error is a two-sided validation of both constructions.
    """
    coef_z, beta = _bridge_coefficients(n_steps, n_modes, T, nu)
    sums = 0.0
    sums_sq = 0.0
    for p in range(paths):
        tape = NoiseTape(seed=seed, M_master=n_steps, N_master=n_modes, T=T, path=p)
        z = tape.normals(substream=SUBSTREAM_INCREMENTS)
        resid = tape.normals(substream=SUBSTREAM_AUX)
        gap = np.einsum("jk,jk->k", coef_z, z) + np.einsum("jk,jk->k", beta, resid)
        ssq = float(np.dot(gap, gap))
        sums += ssq
        sums_sq += ssq * ssq
    mean = sums / paths
    var = max(sums_sq / paths - mean * mean, 0.0) * paths / max(paths - 1, 1)
    se_mean = np.sqrt(var / paths)
    est = np.sqrt(mean)
    return est, (se_mean / (2.0 * est) if est > 0 else 0.0)


# ---------------------------------------------------------------------------
# MC moment diagnostics

def ou_moment_diagnostics(seed: int, resolutions, T: float, nu: float,
                          gamma: float = 0.2, p: int = 2, paths: int = 64):
    """Empirical E||O_T||_{H_gamma}^p and E sup_t ||O_t||_{L^inf-grid}^p per cell.

    resolutions is an iterable of (M, N); requires even p >= 2 and gamma < 1/4
    (the spatial regularity ceiling of the stochastic convolution).  One
    master noise draw per path feeds every resolution, so the cells are
    coupled.  Returns (rows, bounded) where rows are
    (M, N, moment, se, sup_moment, se) tuples and bounded reports whether no
    estimate exceeds the finest-resolution value by more than 3 joint
    standard errors.
    """
    if p < 2 or p % 2 != 0:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    if not gamma < 0.25:
        raise ValueError(f"gamma must be < 1/4, got {gamma}")
    resolutions = list(resolutions)
    m_master = int(np.lcm.reduce([int(m) for m, _ in resolutions]))
    n_max = max(n for _, n in resolutions)
    half_p = p / 2.0
    vals = {cell: np.empty(paths) for cell in resolutions}
    sups = {cell: np.empty(paths) for cell in resolutions}
    for path in range(paths):
        tape = NoiseTape(seed=seed, M_master=m_master, N_master=n_max,
                         T=T, path=path)
        master = tape.master_increments()
        for cell in resolutions:
            m_steps, n_modes = cell
            dw = coarsen_increments(master[:, :n_modes], m_steps)
            h = T / m_steps
            decay = spectral.semigroup_factors(n_modes, nu, h)
            wg = spectral.eigenvalues(n_modes, nu) ** (2 * gamma)
            grid = spectral.default_grid(n_modes)
            o = np.zeros(n_modes)
            sup = np.max(np.abs(spectral.to_grid(o, grid)))
            for m in range(m_steps):
                o = ou_step(o, dw[m], decay)
                sup = max(sup, np.max(np.abs(spectral.to_grid(o, grid))))
            vals[cell][path] = float(np.dot(wg, o * o)) ** half_p
            sups[cell][path] = sup**p
    rows = []
    for cell in resolutions:
        v, s = vals[cell], sups[cell]
        rows.append((cell[0], cell[1],
                     float(v.mean()), float(v.std(ddof=1) / np.sqrt(paths)),
                     float(s.mean()), float(s.std(ddof=1) / np.sqrt(paths))))
    ref = max(rows, key=lambda r: (r[0], r[1]))
    bounded = all(
        r[2] <= ref[2] + 3.0 * np.hypot(r[3], ref[3]) and
        r[4] <= ref[4] + 3.0 * np.hypot(r[5], ref[5])
        for r in rows
    )
    return rows, bounded
