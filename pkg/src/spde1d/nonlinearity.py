"""Cubic reaction term F(v) = a0 + a1 v + a2 v^2 + a3 v^3 and its Galerkin projection.

The projection is exact for band-limited input: the odd parts (a1 v, a3 v^3)
go through a dealiased DST-I round trip, the even parts (a0, a2 v^2) through
coefficient convolutions and the analytic cosine-to-sine projection.  The
structural inequality checkers at the bottom evaluate every inner product in
trig coefficient space, so their residuals carry no quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite

import numpy as np

from . import spectral
from .spectral import SQRT2


@dataclass(frozen=True)
class CubicCoefficients:
    """Coefficients (a0, a1, a2, a3) of the reaction polynomial.

    The cubic coefficient must satisfy a3 < 0, or a3 = 0 together with
    a2 = 0: a positive or lone-quadratic leading term has no one-sided
    dissipativity and the scheme's truncation argument does not apply.
    """

    a0: float
    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        vals = (self.a0, self.a1, self.a2, self.a3)
        if not all(isfinite(float(a)) for a in vals):
            raise ValueError(f"coefficients must be finite, got {vals}")
        if self.a3 > 0:
            raise ValueError(f"a3 must be <= 0, got {self.a3}")
        if self.a3 == 0 and self.a2 != 0:
            raise ValueError("a2 must vanish when a3 = 0")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (float(self.a0), float(self.a1), float(self.a2), float(self.a3))

    @property
    def is_odd(self) -> bool:
        """True when F maps sine polynomials to sine polynomials (a0 = a2 = 0)."""
        return self.a0 == 0.0 and self.a2 == 0.0


def allen_cahn() -> CubicCoefficients:
    """F(v) = v - v^3."""
    return CubicCoefficients(0.0, 1.0, 0.0, -1.0)


def evaluate_on_grid(values: np.ndarray, a: CubicCoefficients) -> np.ndarray:
    a0, a1, a2, a3 = a.as_tuple()
    return a0 + values * (a1 + values * (a2 + values * a3))


# ---------------------------------------------------------------------------
# exact trigonometric coefficient algebra (unnormalized sin/cos series)
#
# Sine vectors b are indexed b[0] = 0, b[k] = coefficient of sin(k pi x);
# cosine vectors q have q[m] = coefficient of cos(m pi x), q[0] the constant.

def cos_coeffs_of_sine_square(b: np.ndarray) -> np.ndarray:
    """Cosine series of (sum_k b_k sin(k pi x))^2; returns q[0..2N]."""
    b = np.asarray(b, dtype=np.float64)
    n = b.shape[0] - 1
    conv = np.convolve(b, b)                       # conv[m] = sum_{k+j=m} b_k b_j
    corr = np.zeros(2 * n + 1)
    for m in range(n):                             # corr[m] = sum_l b_{l+m} b_l
        corr[m] = np.dot(b[m:], b[: b.shape[0] - m])
    q = np.zeros(2 * n + 1)
    q[0] = 0.5 * corr[0]
    q[1:] = corr[1:] - 0.5 * conv[1 : 2 * n + 1]
    return q


def cos_coeffs_of_cos_square(c: np.ndarray) -> np.ndarray:
    """Cosine series of (sum_m c_m cos(m pi x))^2; returns q[0..2M]."""
    c = np.asarray(c, dtype=np.float64)
    m = c.shape[0] - 1
    conv = np.convolve(c, c)
    corr = np.zeros(2 * m + 1)
    for r in range(m + 1):
        corr[r] = np.dot(c[r:], c[: c.shape[0] - r])
    q = np.zeros(2 * m + 1)
    q[0] = 0.5 * (corr[0] + conv[0])
    q[1:] = corr[1:] + 0.5 * conv[1 : 2 * m + 1]
    return q


def sine_coeffs_of_cos_times_sine(q: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sine series of (sum q_m cos(m pi x)) * (sum b_k sin(k pi x))."""
    q = np.asarray(q, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    mq = q.shape[0] - 1
    nb = b.shape[0] - 1
    out_len = mq + nb + 1
    conv = np.convolve(q, b)                       # sum_{m+k=n} q_m b_k
    crp = np.zeros(out_len)                        # sum_m q_m b_{m+n}
    for n in range(nb):
        top = min(mq, nb - n)
        crp[n] = np.dot(q[: top + 1], b[n : n + top + 1])
    crm = np.zeros(out_len)                        # sum_k b_k q_{k+n}
    for n in range(mq):
        top = min(nb, mq - n)
        crm[n] = np.dot(b[: top + 1], q[n : n + top + 1])
    r = 0.5 * (conv[:out_len] + crp - crm)
    r[0] = 0.0
    return r


def cos_to_sine_matrix(n_rows: int, n_cols: int) -> np.ndarray:
    """g[k, m] = <e_k, cos(m pi x)> for k = 1..n_rows, m = 0..n_cols-1.

    Closed form sqrt(2) (1 - (-1)^{k+m}) k / (pi (k^2 - m^2)); zero on the
    same-parity lattice, so the k = m diagonal never divides by zero.
    """
    k = np.arange(1, n_rows + 1)[:, None].astype(np.float64)
    m = np.arange(0, n_cols)[None, :].astype(np.float64)
    odd = (k + m) % 2 == 1
    denom = np.where(odd, k * k - m * m, 1.0)
    return np.where(odd, 2.0 * SQRT2 * k / (np.pi * denom), 0.0)


def constant_term_coeffs(n_modes: int) -> np.ndarray:
    """Sine coefficients of the constant function 1: sqrt(2)(1-(-1)^k)/(k pi)."""
    k = np.arange(1, n_modes + 1, dtype=np.float64)
    return SQRT2 * (1.0 - (-1.0) ** k) / (k * np.pi)


def project_F(coeffs: np.ndarray, a: CubicCoefficients, grid: int | None = None) -> np.ndarray:
    """First N sine coefficients of F(v) for band-limited v, exact to roundoff.

    Parameters
    ----------
    coeffs : array, shape (..., N)
        Sine coefficients of v; batched input is allowed.
    a : CubicCoefficients
    grid : int, optional
        Transform grid for the odd part; must satisfy grid-1 >= 3N+1
        (alias-free analysis of the cubic), defaults to 4N+1.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n = coeffs.shape[-1]
    if grid is None:
        grid = spectral.default_grid(n)
    if grid - 1 < 3 * n + 1:
        raise ValueError(
            f"alias risk: need grid-1 >= 3N+1 = {3 * n + 1}, got grid-1 = {grid - 1}"
        )
    a0, a1, a2, a3 = a.as_tuple()
    out = np.zeros_like(coeffs)
    if a1 != 0.0 or a3 != 0.0:
        u = spectral.to_grid(coeffs, grid)
        out += spectral.from_grid(a1 * u + a3 * u**3, n)
    if a2 != 0.0:
        g = cos_to_sine_matrix(n, 2 * n + 1)
        flat = coeffs.reshape(-1, n)
        proj = np.empty_like(flat)
        for i, row in enumerate(flat):             # even part is off the hot path
            b = np.concatenate(([0.0], SQRT2 * row))
            proj[i] = g @ cos_coeffs_of_sine_square(b)
        out += a2 * proj.reshape(coeffs.shape)
    if a0 != 0.0:
        out += a0 * constant_term_coeffs(n)
    return out


# ---------------------------------------------------------------------------
# structural inequality checks

def monotonicity_constant(a: CubicCoefficients) -> float:
    """One-sided constant c with <v-w, A(v-w) + F(v)-F(w)> <= c ||v-w||^2."""
    a0, a1, a2, a3 = a.as_tuple()
    lead = abs(a3) if a3 != 0.0 else 1.0
    return 2.0 * max(1.0, 1.0 / lead) * max(1.0, max(abs(a1), 2.0 * abs(a2)) ** 2)


def check_monotonicity(
    v: np.ndarray, w: np.ndarray, a: CubicCoefficients, nu: float
) -> float:
    """Residual <v-w, A(v-w) + F(v)-F(w)> - c||v-w||^2; nonpositive up to roundoff."""
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if v.shape != w.shape or v.ndim != 1:
        raise ValueError("v and w must be coefficient vectors of equal length")
    n = v.shape[0]
    d = v - w
    mu = spectral.eigenvalues(n, nu)
    quad = -np.dot(mu * d, d)
    drift = np.dot(d, project_F(v, a) - project_F(w, a))
    return quad + drift - monotonicity_constant(a) * np.dot(d, d)


def _f_difference_h_norm_sq(
    v: np.ndarray, w: np.ndarray, a: CubicCoefficients, grid: int
) -> float:
    """||F(v) - F(w)||_H^2, exact: sine block + cosine block + mixed Gram term."""
    n = v.shape[0]
    a0, a1, a2, a3 = a.as_tuple()
    uv = spectral.to_grid(v, grid)
    uw = spectral.to_grid(w, grid)
    odd = (a1 * uv + a3 * uv**3) - (a1 * uw + a3 * uw**3)
    s = spectral.from_grid(odd, 3 * n)             # normalized sine coeffs, exact
    total = float(np.dot(s, s))
    if a2 != 0.0:
        bv = np.concatenate(([0.0], SQRT2 * v))
        bw = np.concatenate(([0.0], SQRT2 * w))
        dq = a2 * (cos_coeffs_of_sine_square(bv) - cos_coeffs_of_sine_square(bw))
        total += dq[0] ** 2 + 0.5 * float(np.dot(dq[1:], dq[1:]))
        g = cos_to_sine_matrix(3 * n, 2 * n + 1)
        total += 2.0 * float(s @ (g @ dq))
    return total


def check_lipschitz(
    v: np.ndarray, w: np.ndarray, a: CubicCoefficients, grid: int | None = None
) -> float:
    """Residual of the polynomial Lipschitz bound in L^6-weighted form.

    ||F(v)-F(w)||_H^2 <= 36 max(|a1|,|a2|,|a3|)^2 ||v-w||_{L^6}^2
                         (1 + ||v||_{L^6}^4 + ||w||_{L^6}^4)
    """
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if v.shape != w.shape or v.ndim != 1:
        raise ValueError("v and w must be coefficient vectors of equal length")
    n = v.shape[0]
    if grid is None:
        grid = spectral.default_grid(n)
    if grid - 1 < 3 * n + 1:
        raise ValueError(f"need grid-1 >= 3N+1 for exact norms, got {grid - 1}")
    lhs = _f_difference_h_norm_sq(v, w, a, grid)
    uv = spectral.to_grid(v, grid)
    uw = spectral.to_grid(w, grid)
    l6v = spectral.lq_norm_on_grid(uv, 6)
    l6w = spectral.lq_norm_on_grid(uw, 6)
    l6d = spectral.lq_norm_on_grid(uv - uw, 6)
    amax = max(abs(a.a1), abs(a.a2), abs(a.a3))
    rhs = 36.0 * amax**2 * l6d**2 * (1.0 + l6v**4 + l6w**4)
    return lhs - rhs


def check_coercivity_gradient(v: np.ndarray, a: CubicCoefficients, nu: float) -> float:
    """Residual of the gradient-weighted coercivity bound.

    -nu sum_{k=1..3} a_k <v'', v^k> = nu int v'(x)^2 (a1 + 2 a2 v + 3 a3 v^2) dx
    <= (|a1| + a2^2/(3|a3| or 1)) ||v||_{H_{1/2}}^2.

    Equality holds for a = (*, a1, 0, 0), which pins the constant.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("v must be a coefficient vector")
    n = v.shape[0]
    a0, a1, a2, a3 = a.as_tuple()
    k = np.arange(1, n + 1, dtype=np.float64)
    p = np.concatenate(([0.0], SQRT2 * v * k * np.pi))   # cos series of v'
    qp = cos_coeffs_of_cos_square(p)                     # cos series of v'^2
    lhs = a1 * qp[0]
    if a2 != 0.0:
        g = cos_to_sine_matrix(n, 2 * n + 1)
        lhs += 2.0 * a2 * float(v @ (g @ qp))
    if a3 != 0.0:
        b = np.concatenate(([0.0], SQRT2 * v))
        qv = cos_coeffs_of_sine_square(b)
        lhs += 3.0 * a3 * (qp[0] * qv[0] + 0.5 * float(np.dot(qp[1:], qv[1:])))
    lhs *= nu
    lead = 3.0 * abs(a3) if a3 != 0.0 else 1.0
    h_half_sq = float(spectral.hr_norm(v, 0.5, nu) ** 2)
    rhs = (abs(a1) + a2**2 / lead) * h_half_sq
    return lhs - rhs


# ---------------------------------------------------------------------------
# randomized audit driver (shared by the CLI `check` command and the tests)

AUDIT_COEFFICIENT_SETS = (
    (0.0, 1.0, 0.0, -1.0),
    (0.5, -1.0, 0.0, 0.0),
    (1.0, 2.0, 3.0, -4.0),
    (2.0, 0.0, 0.0, -1.0),
    (0.0, 1.0, 0.0, 0.0),
)


def _random_coeff_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    k = np.arange(1, n + 1, dtype=np.float64)
    amp = rng.uniform(0.1, 2.0)
    return amp * rng.standard_normal(n) / k


def run_inequality_audit(
    name: str,
    trials: int = 1000,
    seed: int = 0,
    coefficient_sets=AUDIT_COEFFICIENT_SETS,
    max_modes: int = 32,
) -> float:
    """Run `trials` randomized residual evaluations; returns the max residual.

    name is one of 'monotonicity', 'lipschitz', 'coercivity'.  A correct
    implementation keeps every residual at roundoff level below zero.
    """
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for t in range(trials):
        a = CubicCoefficients(*coefficient_sets[t % len(coefficient_sets)])
        n = int(rng.integers(1, max_modes + 1))
        v = _random_coeff_vector(rng, n)
        w = _random_coeff_vector(rng, n)
        nu = float(rng.uniform(0.3, 3.0))
        if name == "monotonicity":
            r = check_monotonicity(v, w, a, nu)
        elif name == "lipschitz":
            r = check_lipschitz(v, w, a)
        elif name == "coercivity":
            r = check_coercivity_gradient(v, a, nu)
        else:
            raise ValueError(f"unknown audit {name!r}")
        worst = max(worst, float(r))
    return worst
