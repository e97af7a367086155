#!/usr/bin/env python3
# Exact strong error of the exponential-Euler spectral scheme for the linear
# stochastic heat equation, sandwiched between the closed-form bounds.
# No sampling anywhere in this script: every number is a deterministic series.

import math

from spde1d import heat_errors as he

T, nu = 1.0, 1.0

print("temporal error at N=2048, bounds and fitted rate")
print(f"{'M':>6} {'lower':>12} {'exact':>12} {'upper':>12}")
errs = {}
for M in (4, 16, 64, 256, 1024, 4096):
    e = he.temporal_error_exact(M, 2048, T, nu)
    lo = he.bound_lower_temporal(M, 2048, T, nu)
    hi = he.bound_upper_temporal(M, T, nu)
    assert lo <= e <= hi
    errs[M] = e
    print(f"{M:>6} {lo:>12.6f} {e:>12.6f} {hi:>12.6f}")
fit = he.fit_rate(errs)
print(f"log-log slope {fit.slope:+.4f}  (exponential-integrator barrier is -1/4)")

print()
print("spatial error, all time steps resolved (M -> infinity)")
print(f"{'N':>6} {'lower':>12} {'exact':>12} {'upper':>12}")
errs = {}
for N in (4, 16, 64, 256, 1024):
    e = he.spatial_error_exact(N, T, nu)
    lo = he.bound_lower_spatial(N, T, nu)
    hi = he.bound_upper_spatial(N, T, nu)
    assert lo <= e <= hi
    errs[N] = e
    print(f"{N:>6} {lo:>12.6f} {e:>12.6f} {hi:>12.6f}")
fit = he.fit_rate(errs)
print(f"log-log slope {fit.slope:+.4f}  (projection error decays like N^-1/2)")

print()
print("full error splits exactly into the two contributions:")
M, N = 32, 48
f = he.full_error_exact(M, N, T, nu)
t = he.temporal_error_exact(M, N, T, nu)
s = he.spatial_error_exact(N, T, nu)
print(f"  full({M},{N})     = {f:.15f}")
print(f"  hypot(temporal, spatial) = {math.hypot(t, s):.15f}")
