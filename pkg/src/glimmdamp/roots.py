"""Vectorised bracketed root finding for monotone scalar functions.

Each element is solved independently; elements that have converged are
frozen, so the result for one element never depends on the others.  This
is what lets the Glimm step chunk its interfaces freely without changing
a single bit of output.
"""
from __future__ import annotations

import numpy as np


def solve_increasing(f, lo, hi, flo=None, fhi=None, xtol=1e-14, rtol=4e-16, maxiter=200):
    """Roots of increasing functions on brackets with f(lo) <= 0 <= f(hi).

    ``f(x, idx)`` evaluates the function for the elements ``idx`` at the
    points ``x`` (both 1-D arrays of equal length).  Uses Illinois-modified
    regula falsi with a bisection fallback whenever a step fails to halve
    the bracket.  Returns ``(x, converged)``.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    n = lo.size
    all_idx = np.arange(n)
    flo = f(lo, all_idx) if flo is None else np.array(flo, dtype=float, copy=True)
    fhi = f(hi, all_idx) if fhi is None else np.array(fhi, dtype=float, copy=True)

    x = 0.5 * (lo + hi)
    x = np.where(flo == 0, lo, np.where(fhi == 0, hi, x))
    done = (flo == 0) | (fhi == 0) | (hi - lo <= xtol + rtol * np.abs(x))
    bisect = np.zeros(n, dtype=bool)
    ref_width = hi - lo
    age = np.zeros(n, dtype=np.int8)
    last = np.zeros(n, dtype=np.int8)  # -1 lo moved last, +1 hi moved last

    for _ in range(maxiter):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        a, b, fa, fb = lo[act], hi[act], flo[act], fhi[act]
        with np.errstate(invalid="ignore", divide="ignore"):
            xr = (a * fb - b * fa) / (fb - fa)
        mid = 0.5 * (a + b)
        # keep at least a tolerance away from the endpoints so a near-zero
        # endpoint value collapses the bracket instead of stalling
        eps = np.minimum(0.5 * (xtol + rtol * np.abs(mid)), 0.25 * (b - a))
        bad = bisect[act] | ~np.isfinite(xr) | (xr < a) | (xr > b)
        xc = np.where(bad, mid, np.clip(xr, a + eps, b - eps))
        fc = f(xc, act)

        exact = fc == 0
        move_lo = (fc < 0) & ~exact
        move_hi = (fc > 0) & ~exact

        new_lo = np.where(move_lo, xc, a)
        new_hi = np.where(move_hi, xc, b)
        new_flo = np.where(move_lo, fc, fa)
        new_fhi = np.where(move_hi, fc, fb)
        prev = last[act]
        # Illinois: halve the stale endpoint value when the same side moves twice
        new_fhi = np.where(move_lo & (prev == -1), 0.5 * new_fhi, new_fhi)
        new_flo = np.where(move_hi & (prev == 1), 0.5 * new_flo, new_flo)
        last[act] = np.where(move_lo, -1, np.where(move_hi, 1, 0))

        lo[act] = np.where(exact, xc, new_lo)
        hi[act] = np.where(exact, xc, new_hi)
        flo[act] = np.where(exact, 0.0, new_flo)
        fhi[act] = np.where(exact, 0.0, new_fhi)
        new_width = hi[act] - lo[act]
        a_age = age[act] + 1
        check = a_age >= 4
        bisect[act] = check & (new_width > 0.5 * ref_width[act])
        ref_width[act] = np.where(check | bisect[act], new_width, ref_width[act])
        age[act] = np.where(check, 0, a_age)

        xm = np.where(exact, xc, 0.5 * (lo[act] + hi[act]))
        x[act] = xm
        done[act] = exact | (hi[act] - lo[act] <= xtol + rtol * np.abs(xm))

    return x, done
