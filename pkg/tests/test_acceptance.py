"""Acceptance criteria 1-10, one test each.

Every test prints a single ``[criterion N] PASS|FAIL ...`` line (visible
with ``pytest -s`` or when this file is run as a script).
"""
import math
import os
import sys
import time

import numpy as np
import pytest

from glimmdamp import glimm
from glimmdamp.cli import main as cli_main
from glimmdamp.config import parse_config
from glimmdamp.glimm import fractional_decay, fractional_decay_arr
from glimmdamp.models import DampingParams, GasModel, InvariantPoint, Kind, from_invariants
from glimmdamp.verify import (RegionSpec, check_B1, check_B2, check_B3, check_B4, check_D3_direct,
                              check_D4, map_theta_region)
from glimmdamp.waves import shock_curve_right, solve_riemann, solve_riemann_arrays

from oracles import oracle_middle

SINUSOID = """model.kind = LagrangianIsothermal
damping.a = 1
damping.b = 1
grid.N = 200
datum.preset = sinusoidal
datum.omega_amp = 0.5
datum.zeta_amp = 0.5
datum.zeta_phase = 0.25
"""


def report(n, ok, detail):
    print(f"[criterion {n}] {'PASS' if ok else 'FAIL'} {detail}")
    return ok


@pytest.fixture(scope="module")
def short_run():
    """2000 steps of the sinusoidal run with 𝓛 recorded before every step."""
    cfg = parse_config(SINUSOID + "time.t_end = 100\ntime.max_steps = 2000\ntime.record_every = 1\n")
    strengths = []
    t0 = time.perf_counter()
    res = glimm.run(cfg, on_step=lambda g, f: strengths.append(float(np.sum(f.strengths()))))
    elapsed = time.perf_counter() - t0
    strengths.append(glimm.grid_wave_strength(res.final, cfg.model))
    return res, np.array(strengths), elapsed


def test_criterion_1_wave_strength_monotone(short_run):
    res, L, elapsed = short_run
    tv0 = res.records[0].tv_per
    worst = float(np.max(np.diff(L)))
    ok = (res.stats["steps"] == 2000 and worst <= 1e-10 and elapsed < 30.0 and abs(tv0 - 4.0) < 0.05)
    report(1, ok, f"steps={res.stats['steps']} tv0={tv0:.4f} max increase={worst:.3e} time={elapsed:.1f}s")
    assert ok


def test_criterion_2_invariant_region(short_run):
    res, _, _ = short_run
    mo = np.array([r.max_omega for r in res.records])
    mz = np.array([r.min_zeta for r in res.records])
    slack = min(float(np.min(-np.diff(mo))), float(np.min(np.diff(mz))))
    ok = len(res.records) == 2001 and slack >= -1e-10
    report(2, ok, f"records={len(res.records)} worst slack={slack:.3e}")
    assert ok


def test_criterion_3_decay():
    # record cadence of 50 steps; step-by-step dist_eq carries sampling noise
    cfg = parse_config(SINUSOID + "time.t_end = 10\ntime.record_every = 50\n")
    res = glimm.run(cfg)
    d = np.array([r.dist_eq for r in res.records])
    ratio = d[-1] / d[0]
    worst = float(np.max(np.diff(d)))

    ctrl = parse_config("model.kind = LagrangianIsothermal\ngrid.N = 16\ntime.t_end = 3\n"
                        "datum.preset = constant\ndatum.omega0 = 0.3\ndatum.zeta0 = -0.2\n")
    m = ctrl.model
    err = 0.0
    for r in glimm.run(ctrl).records:
        U = from_invariants(m, InvariantPoint(0.3 * math.exp(-r.t), -0.2 * math.exp(-r.t)))
        exact = math.hypot(U.q1 - 1.0, U.q2)
        err = max(err, abs(r.dist_eq - exact))
    ok = res.final.t == 10.0 and ratio < 0.05 and worst <= 1e-8 and err <= 1e-10
    report(3, ok, f"dist ratio={ratio:.3e} max increase={worst:.3e} control err={err:.3e}")
    assert ok


KINDS_AT_ONE = [
    GasModel(Kind.LAGRANGIAN_ISOTHERMAL),
    GasModel(Kind.EULERIAN_ISOTHERMAL),
    GasModel(Kind.RELATIVISTIC_ISOTHERMAL, c=10.0),
    GasModel(Kind.LAGRANGIAN_GAMMA_LAW, gamma=1.0),
    GasModel(Kind.EULERIAN_GAMMA_LAW, gamma=1.0),
    GasModel(Kind.RELATIVISTIC_GAMMA_LAW, gamma=1.0, c=10.0),
]


def _shock_checks(model, qa, qb, s, lam_a, lam_b, family):
    ca, cb = np.array(model.conserved_arr(*qa)), np.array(model.conserved_arr(*qb))
    fa, fb = np.array(model.flux_arr(*qa)), np.array(model.flux_arr(*qb))
    rh = np.max(np.abs(s * (cb - ca) - (fb - fa)), axis=0)
    k = family - 1
    lax = (lam_a[k] > s) & (s > lam_b[k])
    return rh, lax


@pytest.mark.parametrize("model", KINDS_AT_ONE, ids=lambda m: m.kind.value)
def test_criterion_4_riemann_oracle(model):
    rng = np.random.default_rng(4)
    wl, zl, wr, zr = rng.uniform(-1.0, 1.0, (4, 1000))
    fans = solve_riemann_arrays(model, wl, zl, wr, zr)
    om, oz, resid, _, _ = oracle_middle(model, wl, zl, wr, zr)
    mid_err = float(np.max(np.hypot(fans.wm - om, fans.zm - oz)))

    ql = model.primitives_unchecked(fans.wl, fans.zl)
    qm = model.primitives_unchecked(fans.wm, fans.zm)
    qr = model.primitives_unchecked(fans.wr, fans.zr)
    lam_l, lam_m, lam_r = (model.eigenvalues_arr(*q) for q in (ql, qm, qr))
    rh_max, lax_ok, n_shocks = 0.0, True, 0
    for fam, mask, s, qa, qb, la, lb in (
            (1, fans.has1 & fans.shock1, fans.s1lo, ql, qm, lam_l, lam_m),
            (2, fans.has2 & fans.shock2, fans.s2lo, qm, qr, lam_m, lam_r)):
        k = np.flatnonzero(mask)
        n_shocks += k.size
        rh, lax = _shock_checks(model, (qa[0][k], qa[1][k]), (qb[0][k], qb[1][k]), s[k],
                                (la[0][k], la[1][k]), (lb[0][k], lb[1][k]), fam)
        if k.size:
            rh_max = max(rh_max, float(np.max(rh)))
            lax_ok &= bool(np.all(lax))
    ok = mid_err <= 1e-8 and float(np.max(resid)) < 1e-10 and rh_max < 1e-10 and lax_ok
    report(4, ok, f"{model.kind.value}: middle err={mid_err:.2e} shocks={n_shocks} "
           f"RH={rh_max:.2e} Lax={lax_ok}")
    assert ok


def _bakhvalov(model, region):
    return [check_B1(model, region), check_B2(model, region, 2.0), check_B3(model, region, 2.0),
            check_B4(model, region, 2.0, 10_000, seed=5)]


def test_criterion_5_bakhvalov_suite():
    t0 = time.perf_counter()
    K = RegionSpec((-2.0, 2.0), (-2.0, 2.0))
    compact = RegionSpec((-1.0, 1.0), (-1.0, 1.0))
    cases = [(GasModel(Kind.LAGRANGIAN_ISOTHERMAL), K), (GasModel(Kind.EULERIAN_ISOTHERMAL), K),
             (GasModel(Kind.LAGRANGIAN_GAMMA_LAW, gamma=0.5), compact),
             (GasModel(Kind.EULERIAN_GAMMA_LAW, gamma=0.5), compact)]
    results = []
    for model, region in cases:
        reps = _bakhvalov(model, region)
        results.append((model, reps))
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for _, reps in results for r in reps) and elapsed < 60.0
    summary = "; ".join(f"{m.kind.value}(g={m.gamma:g}): " + ",".join(
        f"{r.condition.value}={'ok' if r.passed else 'fail'}" for r in reps) for m, reps in results)
    report(5, ok, f"{summary} time={elapsed:.1f}s")
    assert ok


def test_criterion_6_d3_both_routes():
    model = GasModel(Kind.LAGRANGIAN_ISOTHERMAL)
    K = RegionSpec((-2.0, 2.0), (-2.0, 2.0))
    V = RegionSpec((-7.0, 7.0), (-7.0, 7.0))
    deltas = (0.0, 0.25, 0.5, 1.0)
    n_beta = 8
    table = map_theta_region(model, [1.0], [0.0], deltas, K, V, beta_max=2.0, n_beta=n_beta)
    t1 = min(r.min_theta1 for r in table.rows)
    t2 = min(r.min_theta2 for r in table.rows)
    excluded = sum(r.excluded for r in table.rows)
    betas = np.linspace(2.0 / n_beta, 2.0, n_beta)
    direct = check_D3_direct(model, DampingParams(1.0, 1.0), 1.0, K, deltas=deltas, betas=betas)
    box = map_theta_region(model, [0.9, 0.95, 1.0, 1.05, 1.1], [-0.1, 0.0, 0.1], deltas, K, V,
                           beta_max=2.0, n_beta=n_beta)
    bound = math.pi / 4 + 1e-6
    ok = t1 > bound and t2 > bound and excluded == 0 and direct.passed and box.box_nonempty
    report(6, ok, f"min theta1={t1:.6f} min theta2={t2:.6f} (pi/4={math.pi / 4:.6f}) "
           f"direct margin={direct.margin:.3e} eps0={box.eps0}")
    assert ok


def test_criterion_7_dissipativity():
    K = RegionSpec((-2.0, 2.0), (-2.0, 2.0))
    reps = []
    for kind in (Kind.LAGRANGIAN_ISOTHERMAL, Kind.EULERIAN_ISOTHERMAL):
        m = GasModel(kind)
        reps.append(check_D4(m, DampingParams(1.0, 1.0), K, n_samples=10_000, seed=7))
        reps.append(check_D4(m, DampingParams(1.0, 1.05), n_samples=10_000, seed=7, annulus=(0.1, 1.0)))
    ok = all(r.passed and r.margin > 0 and r.samples_checked == 10_000 for r in reps)
    report(7, ok, "margins=" + ",".join(f"{r.margin:.3e}" for r in reps))
    assert ok


JUMP = """model.kind = LagrangianIsothermal
damping.disabled = true
grid.N = {N}
time.t_end = 0.15
datum.preset = jump
datum.shock_family = 1
datum.shock_beta = 0.5
datum.x_jump = 0.5
"""


def _shock_run(model, N, speed):
    pos_err, drift, mean0 = [], [], []

    def on_step(g, _):
        x = g.x_centers[:-1]
        k = np.flatnonzero((np.abs(np.diff(g.omega)) > 1e-3) & (x > 0.2) & (x < 0.8))
        pos_err.append(abs((k[0] + 1) * g.l - (0.5 + speed * g.t)))
        q1, q2 = g.primitives(model)
        mean = np.array([q1.mean(), q2.mean()])
        if not mean0:
            mean0.append(mean)
        drift.append(float(np.sum(np.abs(mean - mean0[0]))))

    glimm.run(parse_config(JUMP.format(N=N)), on_step=on_step)
    return float(np.mean(pos_err)), float(np.mean(drift))


def _halving_ratio(ls, errs):
    slope = np.polyfit(np.log(ls), np.log(errs), 1)[0]
    return 0.5 ** slope


def test_criterion_8_consistency():
    model = GasModel(Kind.LAGRANGIAN_ISOTHERMAL)
    L = InvariantPoint(0.0, 0.0)
    speed = solve_riemann(model, L, shock_curve_right(model, 1, L, 0.5)).wave1.speed_lo
    Ns = (200, 400, 800, 1600, 3200)
    pos, drift = zip(*(_shock_run(model, N, speed) for N in Ns))
    ls = [1.0 / N for N in Ns]
    r_pos = _halving_ratio(ls, pos)
    r_drift = _halving_ratio(ls, drift)
    ok = 0.35 <= r_pos <= 0.65 and 0.35 <= r_drift <= 0.65
    report(8, ok, f"shock speed={speed:.7f} position ratio={r_pos:.3f} drift ratio={r_drift:.3f} "
           f"errors={[f'{e:.2e}' for e in pos]}")
    assert ok


def test_criterion_9_thread_determinism(tmp_path):
    cfg = tmp_path / "run.txt"
    cfg.write_text("model.kind = EulerianIsothermal\ngrid.N = 600\ntime.t_end = 0.5\n"
                   "datum.preset = square\ndatum.omega_amp = 0.4\ndatum.zeta_amp = 0.3\n"
                   "sampling.mode = SeededUniform\nsampling.seed = 11\n")
    outputs = []
    for threads in (1, 4, 1, 3):
        out = tmp_path / f"out{len(outputs)}"
        code = cli_main(["run", str(cfg), "--output", str(out), "--threads", str(threads), "--quiet"])
        assert code == 0
        outputs.append((out / "diagnostics.csv").read_bytes())
    ok = all(o == outputs[0] for o in outputs) and outputs[0].count(b"\n") > 3
    report(9, ok, f"runs={len(outputs)} threads=1,4,1,3 identical={ok}")
    assert ok


def test_criterion_10_fractional_exactness():
    rng = np.random.default_rng(10)
    n = 100_000
    w, z = rng.uniform(-5.0, 5.0, (2, n))
    a, b = rng.uniform(0.01, 5.0, (2, n))
    delta = rng.uniform(0.0, 2.0, n)
    worst = 0.0
    for i in range(n):
        p = DampingParams(float(a[i]), float(b[i]))
        got = fractional_decay(InvariantPoint(float(w[i]), float(z[i])), p, float(delta[i]))
        ew, ez = w[i] * np.exp(-a[i] * delta[i]), z[i] * np.exp(-b[i] * delta[i])
        worst = max(worst, abs(got.omega - ew) / max(abs(ew), 1e-300), abs(got.zeta - ez) / max(abs(ez), 1e-300))
    gw, gz = fractional_decay_arr(w[:10], z[:10], DampingParams(1.0, 2.0), 0.3)
    arr_err = float(np.max(np.abs(gw - w[:10] * np.exp(-0.3)) + np.abs(gz - z[:10] * np.exp(-0.6))))
    ok = worst <= 1e-14 and arr_err <= 1e-14
    report(10, ok, f"samples={n} max relative err={worst:.2e}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([os.path.abspath(__file__), "-s", "-q"]))
