"""Numerical audit of the structural conditions on shock curves and damping.

Every check samples a region of the invariant plane, skips samples whose
states (or constructed curves) leave the physical domain, and reduces the
per-sample slack to a single worst-case margin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, GlimmDampError, UnsolvableRiemannError
from .models import DampingParams, GasModel, InvariantPoint, check_entropy_dissipative, entropy_pair
from .roots import solve_increasing
from .waves import shock_left_arr, shock_right_arr, shock_slope_arr, solve_riemann_arrays

DEFAULT_TOL = 1e-9
EXCLUDED_WARN = 0.05
QUARTER_PI = math.pi / 4


class Condition(str, Enum):
    B1 = "B1"
    B2 = "B2"
    B3 = "B3"
    B4 = "B4"
    D3 = "D3"
    D3angle = "D3angle"
    D4 = "D4"


@dataclass(frozen=True)
class RegionSpec:
    """Axis-aligned box in the (omega, zeta) plane sampled on a grid_n x grid_n grid."""

    omega_range: tuple
    zeta_range: tuple
    grid_n: int = 9

    def __post_init__(self):
        for r in (self.omega_range, self.zeta_range):
            if len(r) != 2 or not r[0] <= r[1]:
                raise ValueError("ranges must be (lo, hi) with lo <= hi")
        if self.grid_n < 1:
            raise ValueError("grid_n must be >= 1")

    def grid(self, n: int | None = None):
        n = n or self.grid_n
        w = np.linspace(*self.omega_range, n)
        z = np.linspace(*self.zeta_range, n)
        W, Z = np.meshgrid(w, z, indexing="ij")
        return W.ravel(), Z.ravel()

    def random(self, rng, n: int):
        return rng.uniform(*self.omega_range, n), rng.uniform(*self.zeta_range, n)

    def contains(self, omega, zeta):
        return ((omega >= self.omega_range[0]) & (omega <= self.omega_range[1])
                & (zeta >= self.zeta_range[0]) & (zeta <= self.zeta_range[1]))

    def strictly_inside(self, other: "RegionSpec") -> bool:
        return (other.omega_range[0] < self.omega_range[0] and self.omega_range[1] < other.omega_range[1]
                and other.zeta_range[0] < self.zeta_range[0] and self.zeta_range[1] < other.zeta_range[1])


@dataclass
class ConditionReport:
    condition: Condition
    passed: bool
    margin: float
    witness: dict | None
    samples_checked: int
    excluded: int = 0
    tolerance: float = DEFAULT_TOL
    details: dict = field(default_factory=dict)

    @property
    def warning(self) -> str | None:
        total = self.samples_checked + self.excluded
        if total and self.excluded / total > EXCLUDED_WARN:
            return f"{self.excluded} of {total} samples excluded (domain exits)"
        return None

    def to_text(self) -> str:
        lines = [f"condition = {Condition(self.condition).value}",
                 f"pass = {'true' if self.passed else 'false'}",
                 f"margin = {self.margin!r}",
                 f"tolerance = {self.tolerance!r}",
                 f"samples_checked = {self.samples_checked}",
                 f"excluded = {self.excluded}"]
        for k, v in (self.witness or {}).items():
            lines.append(f"witness.{k} = {v!r}")
        for k, v in self.details.items():
            lines.append(f"detail.{k} = {v!r}")
        if self.warning:
            lines.append(f"warning = {self.warning}")
        return "\n".join(lines) + "\n"


def _report(cond, margins, witnesses, excluded, tol, details=None):
    """Reduce per-sample margins; ``witnesses(i)`` describes sample i."""
    margins = np.asarray(margins, float)
    if margins.size == 0:
        return ConditionReport(cond, False, -math.inf, None, 0, excluded, tol,
                               dict(details or {}, note="no admissible samples"))
    i = int(np.argmin(margins))
    m = float(margins[i])
    return ConditionReport(cond, bool(m >= -tol), m, witnesses(i), int(margins.size), excluded, tol,
                           dict(details or {}))


def _in_domain(model: GasModel, w, z):
    lo, hi = model.h_bounds()
    h = 0.5 * (w - z)
    ok = np.isfinite(w) & np.isfinite(z) & (h > lo) & (h < hi)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        q1, v = model.primitives_unchecked(np.where(ok, w, 0.0), np.where(ok, z, 0.0))
        ok &= np.isfinite(q1) & np.isfinite(v) & (q1 > 1e-12)
        lo1, hi1 = model.q1_bounds()
        ok &= (q1 > lo1) & (q1 < hi1)
        if model.relativistic:
            ok &= np.abs(v) < model.c * (1 - 1e-12)
    return ok


def _hy(w, z):
    return 0.5 * (w - z), 0.5 * (w + z)


def _wz(h, y):
    return y + h, y - h


# ---------------------------------------------------------------------------
# B1

def check_B1(model: GasModel, region: RegionSpec, cap: float = 1e3, tol: float = DEFAULT_TOL) -> ConditionReport:
    """Bounded characteristic speeds on the region.

    Fails when the sampled supremum exceeds ``cap`` or doubles when the
    sampling grid is refined (a sign of a speed singularity in the region).
    """
    def sup_on(n):
        w, z = region.grid(n)
        ok = _in_domain(model, w, z)
        q1, v = model.primitives_unchecked(w[ok], z[ok])
        lam1, lam2 = model.eigenvalues_arr(q1, v)
        speed = np.maximum(np.abs(lam1), np.abs(lam2))
        return speed, w[ok], z[ok], int(np.sum(~ok))

    n = region.grid_n
    coarse, _, _, _ = sup_on(n)
    fine, wf, zf, excluded = sup_on(4 * n - 3)
    if fine.size == 0:
        return _report(Condition.B1, [], None, excluded, tol)
    i = int(np.argmax(fine))
    sup_f = float(fine[i])
    sup_c = float(np.max(coarse)) if coarse.size else math.inf
    ratio = sup_f / sup_c if sup_c > 0 else math.inf
    finite = math.isfinite(sup_f)
    margin = (cap - sup_f) if finite else -math.inf
    if ratio >= 2.0:
        margin = min(margin, 2.0 - ratio)
    witness = {"omega": float(wf[i]), "zeta": float(zf[i]), "speed": sup_f}
    return ConditionReport(Condition.B1, bool(finite and margin >= -tol), margin, witness,
                           int(fine.size), excluded, tol,
                           {"sup_speed": sup_f, "refinement_ratio": ratio, "cap": cap})


# ---------------------------------------------------------------------------
# B2

def check_B2(model: GasModel, region: RegionSpec, beta_max: float, n_beta: int = 16,
             tol: float = DEFAULT_TOL) -> ConditionReport:
    """Shock-curve slopes: in (0, 1) for family 1 and in (1, inf) for family 2."""
    if not beta_max > 0:
        raise ValueError("beta_max must be > 0")
    w, z = region.grid()
    ok = _in_domain(model, w, z)
    excluded = int(np.sum(~ok)) * 4 * n_beta
    w, z = w[ok], z[ok]
    h, y = _hy(w, z)
    betas = np.linspace(beta_max / n_beta, beta_max, n_beta)
    H, B = np.meshgrid(h, betas, indexing="ij")
    Y, _ = np.meshgrid(y, betas, indexing="ij")
    margins, wit = [], []
    for fam in (1, 2):
        for right in (True, False):
            with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
                s = shock_slope_arr(model, fam, B, H, Y, right).ravel()
            good = np.isfinite(s)
            if not model.translation_invariant:
                fn = shock_right_arr if right else shock_left_arr
                h2, y2 = fn(model, fam, H.ravel(), Y.ravel(), B.ravel() * (1 + 1e-5))
                good &= _in_domain(model, *_wz(h2, y2))
            excluded += int(np.sum(~good))
            s = s[good]
            m = np.minimum(s, 1.0 - s) if fam == 1 else s - 1.0
            margins.append(m)
            idx = np.flatnonzero(good)
            wit.extend((fam, right, float(w[k // n_beta]), float(z[k // n_beta]),
                        float(betas[k % n_beta]), float(sv)) for k, sv in zip(idx, s))
    margins = np.concatenate(margins)

    def witness(i):
        fam, right, w0, z0, b, s = wit[i]
        return {"family": fam, "curve": "R" if right else "L", "omega": w0, "zeta": z0,
                "beta": b, "slope": s}

    return _report(Condition.B2, margins, witness, excluded, tol, {"beta_max": beta_max})


# ---------------------------------------------------------------------------
# B3

def _curve_beta_for_omega(model, fam, right, h0, y0, target, beta_hi):
    """Curve parameter at which the shock curve from (h0, y0) reaches omega = target."""
    fn = shock_right_arr if right else shock_left_arr
    sgn = 1.0 if right else -1.0  # omega decreases along R-curves, increases along L-curves

    def f(b, idx):
        h, y = fn(model, fam, h0[idx], y0[idx], b)
        return sgn * (target[idx] - (y + h))

    lo = np.zeros_like(target)
    hi = np.array(beta_hi, dtype=float, copy=True)
    fhi = f(hi, np.arange(hi.size))
    for _ in range(60):
        need = ~(fhi >= 0)
        if not np.any(need):
            break
        k = np.flatnonzero(need)
        hi[k] *= 2.0
        fhi[k] = f(hi[k], k)
    flo = f(lo, np.arange(lo.size))
    beta, conv = solve_increasing(f, lo, hi, np.minimum(flo, 0.0), fhi, xtol=1e-15, maxiter=200)
    beta[~(fhi >= 0) | ~conv] = np.nan
    return beta


def _b3_differences(model, fam, hl, yl, hr, yr, beta, n):
    """zeta_R - zeta_L on n interior omega-points for each configuration (rows)."""
    wl, _ = _wz(hl, yl)
    wr, _ = _wz(hr, yr)
    frac = (np.arange(1, n + 1) / (n + 1))[None, :]
    target = (wr[:, None] + frac * (wl - wr)[:, None]).ravel()
    reps = lambda a: np.repeat(a, n)  # noqa: E731
    bR = _curve_beta_for_omega(model, fam, True, reps(hl), reps(yl), target, reps(beta))
    hR, yR = shock_right_arr(model, fam, reps(hl), reps(yl), bR)
    bL = _curve_beta_for_omega(model, fam, False, reps(hr), reps(yr), target, reps(beta))
    hL, yL = shock_left_arr(model, fam, reps(hr), reps(yr), bL)
    d = (yR - hR) - (yL - hL)
    return d.reshape(-1, n)


def _sign_changes(d):
    s = np.sign(d)
    return np.sum((s[:, 1:] * s[:, :-1]) < 0, axis=1) + np.sum(s == 0, axis=1)


def check_B3(model: GasModel, region: RegionSpec, beta_max: float, n_beta: int = 4,
             n_grid: int = 32, tol: float = DEFAULT_TOL) -> ConditionReport:
    """R-curve from Z_l and L-curve from Z_r = R(Z_l, beta) meet only at their endpoints.

    The difference of the two curves (as functions of omega) is sampled on
    an interior grid; configurations with a sign change or a near-zero value
    are re-sampled 16 times finer before being declared failures.
    """
    w, z = region.grid()
    ok = _in_domain(model, w, z)
    excluded = int(np.sum(~ok)) * 2 * n_beta
    w, z = w[ok], z[ok]
    betas = np.linspace(beta_max / n_beta, beta_max, n_beta)
    W, B = np.meshgrid(w, betas, indexing="ij")
    Z, _ = np.meshgrid(z, betas, indexing="ij")
    W, Z, B = W.ravel(), Z.ravel(), B.ravel()
    hl, yl = _hy(W, Z)
    margins, wit = [], []
    for fam in (1, 2):
        hr, yr = shock_right_arr(model, fam, hl, yl, B)
        good = _in_domain(model, *_wz(hr, yr))
        excluded += int(np.sum(~good))
        k = np.flatnonzero(good)
        with np.errstate(invalid="ignore", over="ignore"):
            d = _b3_differences(model, fam, hl[k], yl[k], hr[k], yr[k], B[k], n_grid)
        bad_rows = ~np.all(np.isfinite(d), axis=1)
        excluded += int(np.sum(bad_rows))
        k, d = k[~bad_rows], d[~bad_rows]
        scale = np.max(np.abs(d), axis=1, keepdims=True)
        changes = _sign_changes(d)
        suspicious = (changes > 0) | np.any(np.abs(d) < 1e-10 * np.maximum(scale, 1e-300), axis=1)
        refined = np.zeros(k.size, dtype=bool)
        if np.any(suspicious):
            s = np.flatnonzero(suspicious)
            with np.errstate(invalid="ignore", over="ignore"):
                dr = _b3_differences(model, fam, hl[k[s]], yl[k[s]], hr[k[s]], yr[k[s]], B[k[s]],
                                     16 * n_grid)
            changes[s] = _sign_changes(dr)
            refined[s] = True
        # margin: minus the number of spurious crossings, or the smallest relative gap
        mid = d[:, n_grid // 2][:, None]
        gap = np.min(np.sign(mid) * d / np.maximum(scale, 1e-300), axis=1)
        m = np.where(changes > 0, -changes.astype(float), np.maximum(gap, 0.0))
        margins.append(m)
        wit.extend((fam, float(W[i]), float(Z[i]), float(B[i]), int(c), bool(r))
                   for i, c, r in zip(k, changes, refined))
    margins = np.concatenate(margins) if margins else np.array([])

    def witness(i):
        fam, w0, z0, b, c, r = wit[i]
        return {"family": fam, "omega": w0, "zeta": z0, "beta": b, "interior_crossings": c,
                "refined": r}

    return _report(Condition.B3, margins, witness, excluded, tol, {"beta_max": beta_max})


# ---------------------------------------------------------------------------
# B4

def b4_slack_arrays(model: GasModel, wl, zl, beta_a, beta_b):
    """Slack of the interaction inequality for 2-shock (beta_a) then 1-shock (beta_b) paths.

    Returns (slack, valid) where invalid entries left the domain or did not
    resolve into two shocks.
    """
    hl, yl = _hy(wl, zl)
    hm, ym = shock_right_arr(model, 2, hl, yl, beta_a)
    hr, yr = shock_right_arr(model, 1, hm, ym, beta_b)
    wm, zm = _wz(hm, ym)
    wr, zr = _wz(hr, yr)
    valid = _in_domain(model, wl, zl) & _in_domain(model, wm, zm) & _in_domain(model, wr, zr)
    slack = np.full(np.shape(wl), np.nan)
    k = np.flatnonzero(valid)
    if k.size:
        try:
            fans = solve_riemann_arrays(model, wl[k], zl[k], wr[k], zr[k])
        except UnsolvableRiemannError:
            ok = np.zeros(k.size, dtype=bool)
            for j, i in enumerate(k):
                try:
                    solve_riemann_arrays(model, wl[i], zl[i], wr[i], zr[i])
                    ok[j] = True
                except UnsolvableRiemannError:
                    pass
            valid[k[~ok]] = False
            k = k[ok]
            fans = solve_riemann_arrays(model, wl[k], zl[k], wr[k], zr[k])
        two = fans.has1 & fans.shock1 & fans.has2 & fans.shock2
        lhs = (wl[k] - fans.wm) + (fans.zm - zr[k])
        rhs = (zl[k] - zm[k]) + (wm[k] - wr[k])
        slack[k] = rhs - lhs
        degenerate = (beta_a[k] == 0) | (beta_b[k] == 0)
        slack[k[degenerate]] = rhs[degenerate] - lhs[degenerate]
        valid[k[~two & ~degenerate]] = False
    return slack, valid


def check_B4(model: GasModel, region: RegionSpec, beta_max: float, n_quadruples: int,
             seed: int = 0, tol: float = DEFAULT_TOL) -> ConditionReport:
    """Resolving a 2-shock followed by a 1-shock never increases the total shock strength."""
    if n_quadruples < 1:
        raise ValueError("n_quadruples must be >= 1")
    rng = np.random.default_rng(seed)
    wl, zl = region.random(rng, n_quadruples)
    ba = rng.uniform(0.0, beta_max, n_quadruples)
    bb = rng.uniform(0.0, beta_max, n_quadruples)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        slack, valid = b4_slack_arrays(model, wl, zl, ba, bb)
    k = np.flatnonzero(valid)

    def witness(i):
        j = k[i]
        return {"omega_l": float(wl[j]), "zeta_l": float(zl[j]), "beta_2": float(ba[j]),
                "beta_1": float(bb[j]), "slack": float(slack[j])}

    return _report(Condition.B4, slack[k], witness, int(np.sum(~valid)), tol, {"beta_max": beta_max})


# ---------------------------------------------------------------------------
# D3, direct route

def _decay(w, z, a, b, delta):
    return np.exp(-a * delta) * w, np.exp(-b * delta) * z


def d3_slack_arrays(model: GasModel, params: DampingParams, family, wl, zl, beta, delta):
    """Original shock strength minus the strength after decaying both end states."""
    hl, yl = _hy(wl, zl)
    hr, yr = shock_right_arr(model, family, hl, yl, beta)
    wr, zr = _wz(hr, yr)
    valid = _in_domain(model, wl, zl) & _in_domain(model, wr, zr)
    before = (wl - wr) if family == 1 else (zl - zr)
    slack = np.full(np.shape(wl), np.nan)
    k = np.flatnonzero(valid)
    if k.size:
        a, b = params.a, params.b
        wl2, zl2 = _decay(wl[k], zl[k], a, b, delta[k])
        wr2, zr2 = _decay(wr[k], zr[k], a, b, delta[k])
        fans = solve_riemann_arrays(model, wl2, zl2, wr2, zr2)
        slack[k] = before[k] - fans.strengths()
    return slack, valid


def check_D3_direct(model: GasModel, params: DampingParams, delta_max: float, region: RegionSpec,
                    n_samples: int = 1000, seed: int = 0, beta_max: float = 2.0,
                    deltas=None, betas=None, tol: float = DEFAULT_TOL) -> ConditionReport:
    """Decaying both end states of a single shock never increases the shock strength.

    Random mode draws ``n_samples`` base points, strengths and deltas; grid
    mode (``deltas`` and ``betas`` given) uses the region grid crossed with
    those lists.
    """
    if not 0 < delta_max <= 1:
        raise ValueError("delta_max must lie in (0, 1]")
    if deltas is not None and betas is not None:
        w0, z0 = region.grid()
        D, Bt, I = np.meshgrid(np.asarray(deltas, float), np.asarray(betas, float),
                               np.arange(w0.size), indexing="ij")
        wl, zl, beta, delta = w0[I.ravel()], z0[I.ravel()], Bt.ravel(), D.ravel()
    else:
        rng = np.random.default_rng(seed)
        wl, zl = region.random(rng, n_samples)
        beta = rng.uniform(0.0, beta_max, n_samples)
        delta = rng.uniform(0.0, delta_max, n_samples)
    margins, wit, excluded = [], [], 0
    for fam in (1, 2):
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            try:
                slack, valid = d3_slack_arrays(model, params, fam, wl, zl, beta, delta)
            except UnsolvableRiemannError as exc:
                return ConditionReport(Condition.D3, False, -math.inf,
                                       {"family": fam, "error": str(exc)}, 0, 0, tol)
        k = np.flatnonzero(valid)
        excluded += int(np.sum(~valid))
        margins.append(slack[k])
        wit.extend((fam, float(wl[i]), float(zl[i]), float(beta[i]), float(delta[i])) for i in k)
    margins = np.concatenate(margins)

    def witness(i):
        fam, w0, z0, b, d = wit[i]
        return {"family": fam, "omega_l": w0, "zeta_l": z0, "beta": b, "delta": d}

    return _report(Condition.D3, margins, witness, excluded, tol,
                   {"a": params.a, "b": params.b, "delta_max": delta_max})


# ---------------------------------------------------------------------------
# D3, angle route

class UndefinedAngleError(GlimmDampError):
    """The constructed segment has zero length."""


def _strength_of(model: GasModel, W1: InvariantPoint, W2: InvariantPoint) -> float:
    q_a, _ = model.primitives_of(W1.omega, W1.zeta)
    q_b, _ = model.primitives_of(W2.omega, W2.zeta)
    return abs(math.log(float(q_b) / float(q_a)))


def theta_arrays(model: GasModel, family: int, delta, a: float, b: float, w1, z1, beta):
    """Vectorised angle construction for shocks of ``family`` with strength ``beta`` from (w1, z1).

    Returns (angle, valid, second_wave_shock) arrays.  Family 1 gives the
    angle of W2->W3' with the vertical axis, family 2 the angle of
    Z2->Z3'' with the horizontal axis.  At delta = 0 the tangent of the
    shock curve at the end state is used instead.
    """
    w1 = np.asarray(w1, float)
    z1 = np.asarray(z1, float)
    beta = np.broadcast_to(np.asarray(beta, float), w1.shape)
    delta = np.broadcast_to(np.asarray(delta, float), w1.shape)
    h1, y1 = _hy(w1, z1)
    h2, y2 = shock_right_arr(model, family, h1, y1, beta)
    w2, z2 = _wz(h2, y2)
    valid = _in_domain(model, w1, z1) & _in_domain(model, w2, z2) & (beta > 0)
    angle = np.full(w1.shape, np.nan)
    other_shock = np.zeros(w1.shape, dtype=bool)

    tangent = valid & (delta == 0)
    if np.any(tangent):
        k = np.flatnonzero(tangent)
        s = shock_slope_arr(model, family, beta[k], h1[k], y1[k], True)
        angle[k] = (math.pi / 2 - np.arctan(np.abs(s))) if family == 1 else np.arctan(np.abs(s))
        other_shock[k] = True

    k = np.flatnonzero(valid & (delta > 0))
    if k.size:
        w1p, z1p = _decay(w1[k], z1[k], a, b, delta[k])
        w2p, z2p = _decay(w2[k], z2[k], a, b, delta[k])
        ok = _in_domain(model, w1p, z1p) & _in_domain(model, w2p, z2p)
        valid[k[~ok]] = False
        k, w1p, z1p, w2p, z2p = k[ok], w1p[ok], z1p[ok], w2p[ok], z2p[ok]
        fans = solve_riemann_arrays(model, w1p, z1p, w2p, z2p)
        if family == 1:
            # translate so W1' lands on W1: W3' = M' + (W1 - W1')
            w3 = fans.wm + (w1[k] - w1p)
            z3 = fans.zm + (z1[k] - z1p)
            dw, dz = np.abs(w3 - w2[k]), np.abs(z3 - z2[k])
            ang = np.arctan2(dw, dz)
            other_shock[k] = fans.shock2
        else:
            # Z3'' = Z1 + (Z2' - M')
            w3 = w1[k] + (w2p - fans.wm)
            z3 = z1[k] + (z2p - fans.zm)
            dw, dz = np.abs(w3 - w2[k]), np.abs(z3 - z2[k])
            ang = np.arctan2(dz, dw)
            other_shock[k] = fans.shock1
        zero = np.hypot(dw, dz) < 1e-14
        ang[zero] = np.nan
        valid[k[zero]] = False
        angle[k] = ang
    return angle, valid, other_shock


def _theta(model, family, gamma, delta, mu, P1, P2, a_base):
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    a, b = a_base, a_base + mu
    if not (a > 0 and b > 0):
        raise ValueError("a_base and a_base + mu must both be > 0")
    m = model if gamma == model.gamma else model.with_gamma(gamma, heuristic=model.heuristic or gamma > 1)
    beta = _strength_of(m, P1, P2)
    expected = shock_right_arr(m, family, *_hy(P1.omega, P1.zeta), beta)
    ew, ez = _wz(*expected)
    if abs(float(ew) - P2.omega) + abs(float(ez) - P2.zeta) > 1e-8 * (1 + abs(P2.omega) + abs(P2.zeta)):
        raise DomainError(f"second state is not on the family-{family} shock curve from the first")
    ang, valid, _ = theta_arrays(m, family, np.array([delta]), a, b, np.array([P1.omega]),
                                 np.array([P1.zeta]), np.array([beta]))
    if not valid[0]:
        raise UndefinedAngleError("constructed segment is degenerate or leaves the domain")
    return float(ang[0])


def theta1(model: GasModel, gamma: float, delta: float, mu: float, W1: InvariantPoint,
           W2: InvariantPoint, a_base: float = 1.0) -> float:
    """Angle with the vertical of the segment from W2 to the translated middle state."""
    return _theta(model, 1, gamma, delta, mu, W1, W2, a_base)


def theta2(model: GasModel, gamma: float, delta: float, mu: float, Z1: InvariantPoint,
           Z2: InvariantPoint, a_base: float = 1.0) -> float:
    """Angle with the horizontal of the segment from Z2 to the doubly translated state."""
    return _theta(model, 2, gamma, delta, mu, Z1, Z2, a_base)


@dataclass
class ThetaRow:
    gamma: float
    mu: float
    delta: float
    min_theta1: float
    min_theta2: float
    passed: bool
    samples: int
    excluded: int


@dataclass
class ThetaTable:
    rows: list
    eps0: float
    tolerance: float = 1e-6

    def to_csv(self) -> str:
        out = ["gamma,mu,delta,min_theta1,min_theta2,pass"]
        for r in self.rows:
            out.append(f"{r.gamma!r},{r.mu!r},{r.delta!r},{r.min_theta1!r},{r.min_theta2!r},"
                       f"{'true' if r.passed else 'false'}")
        return "\n".join(out) + "\n"

    @property
    def box_nonempty(self) -> bool:
        return self.eps0 > 0


def map_theta_region(model: GasModel, gamma_list, mu_list, delta_list, K: RegionSpec, V: RegionSpec,
                     beta_max: float, a_base: float = 1.0, n_beta: int = 8,
                     tol: float = 1e-6) -> ThetaTable:
    """Minimal angles over W1 in the K grid and shocks (beta <= beta_max) ending in V.

    ``eps0`` is the smallest max(|gamma-1|, |mu|) among failing combinations
    (``inf`` when none fails); the box |gamma-1| < eps0, |mu| < eps0 holds
    only passing combinations among those sampled.
    """
    rows = []
    betas = np.linspace(beta_max / n_beta, beta_max, n_beta)
    for g in gamma_list:
        try:
            m = model if g == model.gamma else model.with_gamma(g, heuristic=model.heuristic or g > 1)
        except DomainError:
            continue
        w, z = K.grid()
        inside = _in_domain(m, w, z)
        w, z = w[inside], z[inside]
        W, B = np.meshgrid(w, betas, indexing="ij")
        Z, _ = np.meshgrid(z, betas, indexing="ij")
        W, Z, B = W.ravel(), Z.ravel(), B.ravel()
        for mu in mu_list:
            a, b = a_base, a_base + mu
            for d in delta_list:
                mins, n_ok, n_bad = [], 0, int(np.sum(~inside)) * n_beta * 2
                for fam in (1, 2):
                    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
                        h2, y2 = shock_right_arr(m, fam, *_hy(W, Z), B)
                        in_v = V.contains(*_wz(h2, y2))
                        if a > 0 and b > 0:
                            ang, valid, _ = theta_arrays(m, fam, np.full(W.size, float(d)), a, b, W, Z, B)
                        else:
                            ang, valid = np.full(W.size, np.nan), np.zeros(W.size, bool)
                    valid &= in_v
                    n_ok += int(np.sum(valid))
                    n_bad += int(np.sum(~valid))
                    mins.append(float(np.min(ang[valid])) if np.any(valid) else math.nan)
                passed = all(math.isfinite(x) and x > QUARTER_PI + tol for x in mins)
                rows.append(ThetaRow(float(g), float(mu), float(d), mins[0], mins[1], passed, n_ok, n_bad))
    failing = [max(abs(r.gamma - 1.0), abs(r.mu)) for r in rows if not r.passed]
    eps0 = min(failing) if failing else math.inf
    return ThetaTable(rows, eps0, tol)


def check_D3_angle(model: GasModel, params: DampingParams, delta_list, K: RegionSpec, V: RegionSpec,
                   beta_max: float, tol: float = 1e-6) -> ConditionReport:
    table = map_theta_region(model, [model.gamma], [params.mu], delta_list, K, V, beta_max,
                             a_base=params.a, tol=tol)
    margins = [min(r.min_theta1, r.min_theta2) - QUARTER_PI - tol for r in table.rows]
    margins = [x if math.isfinite(x) else -math.inf for x in margins]

    def witness(i):
        r = table.rows[i]
        return {"gamma": r.gamma, "mu": r.mu, "delta": r.delta,
                "min_theta1": r.min_theta1, "min_theta2": r.min_theta2}

    rep = _report(Condition.D3angle, margins, witness, sum(r.excluded for r in table.rows), 0.0)
    rep.samples_checked = sum(r.samples for r in table.rows)
    return rep


# ---------------------------------------------------------------------------
# D4

def annulus_sample(model: GasModel, r_in: float, r_out: float, n: int, seed: int = 0):
    """Primitive states whose invariant coordinates lie in r_in <= |Z| <= r_out."""
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(r_in ** 2, r_out ** 2, n))
    phi = rng.uniform(0.0, 2 * math.pi, n)
    w, z = r * np.cos(phi), r * np.sin(phi)
    ok = _in_domain(model, w, z)
    q1, q2 = model.primitives_unchecked(w[ok], z[ok])
    return np.column_stack([q1, q2]), int(np.sum(~ok))


def check_D4(model: GasModel, params: DampingParams, region: RegionSpec | None = None,
             n_samples: int = 10000, seed: int = 0, annulus: tuple | None = None,
             tol: float = 1e-12) -> ConditionReport:
    """Entropy dissipation grad(eta) . G >= 0, strictly away from the equilibrium.

    Samples come from ``region`` (random points) or from an ``annulus``
    (r_in, r_out) around the origin of the invariant plane.  The margin is
    the smallest rate divided by |Z|^2.
    """
    if not entropy_pair(model).available:
        return ConditionReport(Condition.D4, False, -math.inf, {"reason": "no entropy pair"}, 0, 0, tol)
    if annulus is not None:
        pts, excluded = annulus_sample(model, annulus[0], annulus[1], n_samples, seed)
    else:
        rng = np.random.default_rng(seed)
        w, z = region.random(rng, n_samples)
        ok = _in_domain(model, w, z)
        q1, q2 = model.primitives_unchecked(w[ok], z[ok])
        pts, excluded = np.column_stack([q1, q2]), int(np.sum(~ok))
    rep = check_entropy_dissipative(model, params, pts, tol)
    w, z = model.invariants_of(pts[:, 0], pts[:, 1])
    r2 = w * w + z * z
    away = r2 > 1e-18
    scaled = np.where(away, rep.values / np.where(away, r2, 1.0), 0.0)
    i = int(np.argmin(np.where(away, scaled, np.inf))) if np.any(away) else 0
    margin = float(scaled[i]) if np.any(away) else 0.0
    strict = bool(np.all(rep.values[away] > 0))
    witness = {"q1": float(pts[i, 0]), "q2": float(pts[i, 1]), "rate": float(rep.values[i])}
    return ConditionReport(Condition.D4, bool(rep.passed and strict), margin, witness, rep.n_samples,
                           excluded, tol, {"min_rate": rep.min_value, "strict_min": rep.strict_margin})


__all__ = [
    "Condition", "RegionSpec", "ConditionReport", "check_B1", "check_B2", "check_B3", "check_B4",
    "b4_slack_arrays", "check_D3_direct", "d3_slack_arrays", "theta_arrays", "theta1", "theta2",
    "UndefinedAngleError", "ThetaRow", "ThetaTable", "map_theta_region", "check_D3_angle",
    "annulus_sample", "check_D4",
]
