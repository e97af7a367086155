"""Independent slow-path oracles used to pin values in the test suite.

Everything here is deliberately naive: termwise integer combinatorics and
arbitrary-precision arithmetic, no transforms, no shared code paths with the
package. Costs are O(N^4) and worse; keep inputs small.
"""
import math

import mpmath as mp
import numpy as np


def sine_integral(m):
    """int_0^1 sin(m pi x) dx for integer m, elementwise; odd in m."""
    m = np.asarray(m)
    out = np.zeros(m.shape, dtype=float)
    odd = m % 2 != 0
    out[odd] = 2.0 / (np.pi * m[odd])
    return out


def cos_cos_integral(p, q):
    """int_0^1 cos(p pi x) cos(q pi x) dx for integer p, q, elementwise."""
    p = np.abs(np.asarray(p))
    q = np.abs(np.asarray(q))
    both_zero = (p == 0) & (q == 0)
    return np.where(both_zero, 1.0, np.where(p == q, 0.5, 0.0))


def project_cubic_oracle(coeffs, c):
    """Sine coefficients of P_N (a0 + a1 v + a2 v^2 + a3 v^3), brute force.

    v = sum c_k sqrt(2) sin(k pi x). Triple and quadruple sine products are
    integrated analytically through product-to-sum identities, one (i, j[, l])
    mesh per output mode.
    """
    a0, a1, a2, a3 = (float(a) for a in coeffs)
    c = np.asarray(c, dtype=float)
    n = c.size
    k_idx = np.arange(1, n + 1)
    b = a0 * math.sqrt(2.0) * sine_integral(k_idx) + a1 * c
    if a2 != 0.0:
        i = k_idx[:, None]
        j = k_idx[None, :]
        cc = c[:, None] * c[None, :]
        for t, k in enumerate(k_idx):
            # int e_i e_j e_k = 2 sqrt(2) * (1/4) [S(k+i-j)+S(k-i+j)-S(k+i+j)-S(k-i-j)]
            trip = (sine_integral(k + i - j) + sine_integral(k - i + j)
                    - sine_integral(k + i + j) - sine_integral(k - i - j))
            b[t] += a2 * (math.sqrt(2.0) / 2.0) * float(np.sum(cc * trip))
    if a3 != 0.0:
        i = k_idx[:, None, None]
        j = k_idx[None, :, None]
        l = k_idx[None, None, :]
        ccc = c[:, None, None] * c[None, :, None] * c[None, None, :]
        for t, k in enumerate(k_idx):
            # int e_i e_j e_l e_k = C(i-j,l-k) - C(i-j,l+k) - C(i+j,l-k) + C(i+j,l+k)
            quad = (cos_cos_integral(i - j, l - k) - cos_cos_integral(i - j, l + k)
                    - cos_cos_integral(i + j, l - k) + cos_cos_integral(i + j, l + k))
            b[t] += a3 * float(np.sum(ccc * quad))
    return b


def hr_norm_mp(c, r, nu, dps=50):
    """H_r norm of sum c_k e_k at dps decimal digits, returned as float."""
    with mp.workdps(dps):
        nu_mp = mp.mpf(nu)
        total = mp.mpf(0)
        for k, ck in enumerate(np.asarray(c, dtype=float), start=1):
            mu = nu_mp * mp.pi**2 * k**2
            total += mu ** (2 * mp.mpf(r)) * mp.mpf(ck) ** 2
        return float(mp.sqrt(total))


def temporal_mode_mp(M, k, T, nu, dps=60):
    """Closed-form per-mode temporal error integral in mp arithmetic.

    sum_j int_{t_j}^{t_{j+1}} (e^{-mu(T-s)} - e^{-mu(T-t_j)})^2 ds evaluated
    as a geometric sum; at dps=60 the small-x cancellation is harmless.
    """
    with mp.workdps(dps):
        mu = mp.mpf(nu) * mp.pi**2 * k**2
        h = mp.mpf(T) / M
        x = mu * h
        G = (1 - mp.e**(-2 * mu * T)) / (1 - mp.e**(-2 * x))
        J = mp.e**(-2 * x) * ((mp.e**(2 * x) - 1) / 2 - 2 * (mp.e**x - 1) + x) / mu
        return float(G * J)


def temporal_mode_quad_mp(M, k, T, nu, dps=40):
    """Same integral by direct mp.quad on each step interval (no closed form)."""
    with mp.workdps(dps):
        mu = mp.mpf(nu) * mp.pi**2 * k**2
        h = mp.mpf(T) / M
        total = mp.mpf(0)
        for j in range(M):
            t = j * h
            total += mp.quad(
                lambda s: (mp.e**(-mu * (T - s)) - mp.e**(-mu * (T - t)))**2,
                [t, t + h])
        return float(total)


def spatial_tail_mp(N, T, nu, dps=40):
    """sum_{k>N} (1 - e^{-2 mu_k T}) / (2 mu_k) via mp.nsum, as float."""
    with mp.workdps(dps):
        nu_mp = mp.mpf(nu)
        T_mp = mp.mpf(T)

        def term(k):
            mu = nu_mp * mp.pi**2 * k**2
            return (1 - mp.e**(-2 * mu * T_mp)) / (2 * mu)

        return float(mp.nsum(term, [N + 1, mp.inf]))


def ou_pair_mismatch_brute(M, M_ref, N, N_ref, T, nu):
    """E||O^{ref}(t_m) - O(t_m)||^2 on the coarse grid, O(M_ref N_ref) per time.

    Walks the fine grid once per mode accumulating the variance of the
    kernel difference; the package's closed-form recursion must match this.
    """
    r = M_ref // M
    h_f = T / M_ref
    out = np.zeros(M + 1)
    for k in range(1, N_ref + 1):
        mu = nu * math.pi**2 * k**2
        for m in range(1, M + 1):
            t = m * (T / M)
            acc = 0.0
            for j in range(m * r):
                s = j * h_f
                fine = math.exp(-mu * (t - s))
                if k <= N:
                    coarse_left = math.floor(s / (T / M)) * (T / M)
                    coarse = math.exp(-mu * (t - coarse_left))
                else:
                    coarse = 0.0
                acc += h_f * (fine - coarse) ** 2
            out[m] += acc
    return out
