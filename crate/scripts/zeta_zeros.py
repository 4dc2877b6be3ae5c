#!/usr/bin/env python3
"""Regenerate the first N Riemann zeta zero ordinates (one per line, 9 decimals).

Zeros are bracketed by sign changes of the Riemann-Siegel Z function on a
fine grid (leading-order Riemann-Siegel formula, vectorized), narrowed by
bisection and polished with mpmath's full-accuracy `siegelz`. Zero indices
are verified against `mpmath.zetazero` at regular checkpoints, so a missed
zero aborts the run.

    python3 scripts/zeta_zeros.py 100000 > crates/core/tests/data/zeros_1e5.txt
"""
import sys

import mpmath
import numpy as np

STEPS_PER_GAP = 16
CHECK_EVERY = 5000


def theta(t):
    return t / 2 * np.log(t / (2 * np.pi)) - t / 2 - np.pi / 8 + 1 / (48 * t) + 7 / (5760 * t**3)


def z_leading(t):
    """Riemann-Siegel Z(t) with the first remainder term only."""
    t = np.asarray(t, dtype=float)
    a = np.sqrt(t / (2 * np.pi))
    n_max = np.floor(a).astype(int)
    th = theta(t)
    total = np.zeros_like(t)
    for n in range(1, int(n_max.max()) + 1):
        mask = n <= n_max
        total += np.where(mask, np.cos(th - t * np.log(n)) / np.sqrt(n), 0.0)
    p = a - n_max
    c0 = np.cos(2 * np.pi * (p * p - p - 1 / 16)) / np.cos(2 * np.pi * p)
    sign = np.where(n_max % 2 == 1, 1.0, -1.0)
    return 2 * total + sign * a ** -0.5 * c0


def brackets(t_lo, t_hi):
    """Sign-change brackets on one global grid, evaluated in slices.

    A close pair of zeros inside one grid cell shows up as a local minimum
    of |Z| without a sign change; those cells are resampled finely.
    """
    gap = 2 * np.pi / np.log(t_hi / (2 * np.pi))
    grid = np.arange(t_lo, t_hi + gap, gap / STEPS_PER_GAP)
    values = np.concatenate([z_leading(part) for part in np.array_split(grid, max(1, grid.size // 20000))])
    idx = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    lo, hi = [grid[idx]], [grid[idx + 1]]
    mag, sign = np.abs(values), np.sign(values)
    dips = np.nonzero(
        (sign[:-2] == sign[1:-1]) & (sign[1:-1] == sign[2:]) & (mag[1:-1] < mag[:-2]) & (mag[1:-1] < mag[2:])
    )[0] + 1
    for i in dips:
        fine = np.linspace(grid[i - 1], grid[i + 1], 401)
        z = z_leading(fine)
        j = np.nonzero(np.sign(z[:-1]) * np.sign(z[1:]) < 0)[0]
        lo.append(fine[j])
        hi.append(fine[j + 1])
    lo, hi = np.concatenate(lo), np.concatenate(hi)
    order = np.argsort(lo)
    return lo[order], hi[order]


def bisect(lo, hi, iterations=30):
    f_lo = z_leading(lo)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        f_mid = z_leading(mid)
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def polish(t):
    h = 1e-6
    for _ in range(2):
        f0 = mpmath.fp.siegelz(t)
        f1 = mpmath.fp.siegelz(t + h)
        if f1 == f0:
            break
        step = f0 * h / (f1 - f0)
        t -= step
        if abs(step) < 1e-11:
            break
    return t


def main():
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 100000
    t_end = mpmath.fp.zetazero(count).imag + 0.05
    zeros = list(bisect(*brackets(14.0, t_end)))
    zeros = [polish(z) for z in zeros[:count]]
    for n in list(range(CHECK_EVERY, count + 1, CHECK_EVERY)) + [1, count]:
        expected = mpmath.fp.zetazero(n).imag
        if abs(zeros[n - 1] - expected) > 1e-6:
            sys.exit("zero %d mismatch: %.9f vs %.9f" % (n, zeros[n - 1], expected))
    out = sys.stdout
    out.write("# imaginary parts of the first %d nontrivial zeta zeros\n" % count)
    for z in zeros:
        out.write("%.9f\n" % z)


if __name__ == "__main__":
    main()
