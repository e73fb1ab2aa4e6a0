"""Periodic Glimm scheme with an exact fractional damping substep.

Cells live on the unit period with width ``l = 1/N`` and centres
``x_m = (m + 1/2) l``; interface ``m`` sits between cells ``m`` and ``m+1``.
One step solves every interface Riemann problem, draws a single sampling
offset ``a`` in (-1/2, 1/2), replaces cell ``m`` by the exact solution at
``x_m + a l`` and then applies ``(omega, zeta) -> (e^{-a h} omega, e^{-b h} zeta)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CFLError, ConfigError, DomainError, SafetyRegionError, UnsolvableRiemannError
from .models import DampingParams, GasModel, InvariantPoint, entropy_pair
from .waves import FanArray, sample_fans, shock_curve_right, solve_riemann_arrays

CHUNK = 256
FAN_TOL = 1e-12


# ---------------------------------------------------------------------------
# state and sampling

@dataclass(frozen=True, eq=False)
class GridState:
    """Cell values in invariant coordinates on one period."""

    omega: np.ndarray
    zeta: np.ndarray
    t: float = 0.0
    n: int = 0

    def __post_init__(self):
        w = np.array(self.omega, dtype=float)
        z = np.array(self.zeta, dtype=float)
        if w.ndim != 1 or w.shape != z.shape:
            raise ValueError("omega and zeta must be 1-D arrays of equal length")
        if w.size < 2:
            raise ValueError("a grid needs at least 2 cells")
        w.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "zeta", z)

    @classmethod
    def from_cells(cls, cells, t=0.0, n=0):
        arr = np.array([[c.omega, c.zeta] for c in cells], dtype=float)
        return cls(arr[:, 0], arr[:, 1], t, n)

    @property
    def N(self) -> int:
        return self.omega.size

    @property
    def l(self) -> float:
        return 1.0 / self.N

    @property
    def cells(self) -> list[InvariantPoint]:
        return [InvariantPoint(float(w), float(z)) for w, z in zip(self.omega, self.zeta)]

    @property
    def x_centers(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) / self.N

    def primitives(self, model: GasModel):
        return model.primitives_of(self.omega, self.zeta)


class SamplingMode(str, Enum):
    VanDerCorput = "VanDerCorput"
    SeededUniform = "SeededUniform"


def van_der_corput(n: int, base: int = 2) -> float:
    """Radical inverse of ``n`` in ``base``."""
    q, denom = 0.0, 1.0
    while n > 0:
        n, digit = divmod(n, base)
        denom *= base
        q += digit / denom
    return q


class SamplingSequence:
    """Stream of sampling offsets in (-1/2, 1/2), advanced once per step."""

    def __init__(self, mode=SamplingMode.VanDerCorput, seed: int = 0, cursor: int = 0):
        self.mode = SamplingMode(mode)
        self.seed = int(seed)
        self.cursor = 0
        self._rng = np.random.default_rng(self.seed)
        for _ in range(cursor):
            self.next()

    def next(self) -> float:
        self.cursor += 1
        if self.mode is SamplingMode.VanDerCorput:
            return van_der_corput(self.cursor) - 0.5
        while True:
            a = float(self._rng.random()) - 0.5
            if a > -0.5:
                return a

    def __repr__(self):
        return f"SamplingSequence(mode={self.mode.value}, seed={self.seed}, cursor={self.cursor})"


def sampling_next(seq: SamplingSequence) -> float:
    return seq.next()


# ---------------------------------------------------------------------------
# building blocks

def solve_interfaces(model: GasModel, grid: GridState, threads: int = 1) -> FanArray:
    """Riemann fans at all N periodic interfaces (interface m joins cells m and m+1).

    Work is split in fixed chunks so results never depend on ``threads``.
    """
    wl, zl = grid.omega, grid.zeta
    wr, zr = np.roll(wl, -1), np.roll(zl, -1)
    starts = range(0, grid.N, CHUNK)

    def solve(s):
        e = min(s + CHUNK, grid.N)
        try:
            return solve_riemann_arrays(model, wl[s:e], zl[s:e], wr[s:e], zr[s:e])
        except UnsolvableRiemannError as exc:
            raise UnsolvableRiemannError(
                f"interface {s + exc.index}: {exc}", exc.left, exc.right, s + exc.index) from exc

    if threads > 1 and grid.N > CHUNK:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(solve, starts))
    else:
        parts = [solve(s) for s in starts]
    return parts[0] if len(parts) == 1 else FanArray.concat(parts)


def max_wave_speed(model: GasModel, grid: GridState, fans: FanArray | None = None) -> float:
    q1, q2 = model.primitives_unchecked(grid.omega, grid.zeta)
    lam1, lam2 = model.eigenvalues_arr(q1, q2)
    speed = float(np.max(np.maximum(np.abs(lam1), np.abs(lam2))))
    if fans is not None:
        speed = max(speed, float(np.max(fans.max_speed)))
    return speed


def cfl_timestep(model: GasModel, grid: GridState, safety: float = 0.45,
                 fans: FanArray | None = None) -> float:
    """Time step ``safety * l / max|lambda|``.

    With ``fans`` the maximum also covers the middle states, which is what
    keeps neighbouring fans disjoint during a step.
    """
    if not 0.0 < safety <= 0.5:
        raise ValueError("safety must lie in (0, 0.5]")
    speed = max_wave_speed(model, grid, fans)
    if not math.isfinite(speed) or speed <= 0.0:
        raise CFLError(f"unbounded or degenerate wave speed ({speed})")
    h = safety * grid.l / speed
    if not h > 0.0:
        raise CFLError("time step underflow")
    return h


def fractional_decay(Z: InvariantPoint, params: DampingParams, delta: float) -> InvariantPoint:
    """Exact solution of the damping substep over time ``delta``."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return InvariantPoint(math.exp(-params.a * delta) * Z.omega, math.exp(-params.b * delta) * Z.zeta)


def fractional_decay_arr(omega, zeta, params: DampingParams, delta: float):
    return math.exp(-params.a * delta) * np.asarray(omega, float), \
        math.exp(-params.b * delta) * np.asarray(zeta, float)


def sample_grid(model: GasModel, grid: GridState, fans: FanArray, a: float, h: float):
    """Exact solution at ``x_m + a l`` after time ``h``, for every cell."""
    l = grid.l
    idx = np.arange(grid.N)
    if a >= 0.0:
        which = idx
        xi = (a - 0.5) * l / h
    else:
        which = (idx - 1) % grid.N
        xi = (a + 0.5) * l / h
    return sample_fans(model, fans, which, np.full(grid.N, xi))


def glimm_step(grid: GridState, model: GasModel, params: DampingParams, seq: SamplingSequence,
               h: float, fans: FanArray | None = None, threads: int = 1) -> GridState:
    """Advance one step: random-choice sampling followed by exact decay."""
    if not h > 0:
        raise CFLError("time step must be positive")
    if fans is None:
        fans = solve_interfaces(model, grid, threads)
    speed = max_wave_speed(model, grid, fans)
    if speed * h > 0.5 * grid.l * (1.0 + FAN_TOL):
        raise CFLError(f"time step {h} lets neighbouring fans interact (max speed {speed})")
    a = seq.next()
    w, z = sample_grid(model, grid, fans, a, h)
    w, z = fractional_decay_arr(w, z, params, h)
    return GridState(w, z, grid.t + h, grid.n + 1)


# ---------------------------------------------------------------------------
# diagnostics

@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    L_per: float
    tv_per: float
    entropy_int: float
    dist_eq: float
    mean_state: tuple
    max_omega: float
    min_zeta: float
    min_omega: float = math.nan
    max_zeta: float = math.nan
    tv_per_primitive: float = math.nan
    step: int = 0

    @property
    def mean_q1(self) -> float:
        return self.mean_state[0]

    @property
    def mean_q2(self) -> float:
        return self.mean_state[1]


def grid_wave_strength(grid: GridState, model: GasModel, fans: FanArray | None = None) -> float:
    """Per-period sum of shock strengths over all interface fans."""
    if fans is None:
        fans = solve_interfaces(model, grid)
    return float(np.sum(fans.strengths()))


def periodic_tv(values) -> float:
    values = np.asarray(values, float)
    return float(np.sum(np.abs(np.roll(values, -1) - values)))


def diagnostics(grid: GridState, model: GasModel, fans: FanArray | None = None) -> DiagnosticsRecord:
    """Cell-sum quadrature of all diagnostics at the grid's time."""
    l = grid.l
    q1, q2 = model.primitives_unchecked(grid.omega, grid.zeta)
    pair = entropy_pair(model)
    if pair.available:
        ent = float(np.sum(pair.eta_fn(q1, q2)) * l)
    else:
        ent = float(np.sum(np.abs(grid.omega) + np.abs(grid.zeta)) * l)
    eq1, eq2 = model.equilibrium
    dist = float(np.sum(np.hypot(q1 - eq1, q2 - eq2)) * l)
    c1, c2 = model.conserved_arr(q1, q2)
    return DiagnosticsRecord(
        t=grid.t,
        L_per=grid_wave_strength(grid, model, fans),
        tv_per=periodic_tv(grid.omega) + periodic_tv(grid.zeta),
        entropy_int=ent,
        dist_eq=dist,
        mean_state=(float(np.sum(c1) * l), float(np.sum(c2) * l)),
        max_omega=float(np.max(grid.omega)),
        min_zeta=float(np.min(grid.zeta)),
        min_omega=float(np.min(grid.omega)),
        max_zeta=float(np.max(grid.zeta)),
        tv_per_primitive=periodic_tv(q1) + periodic_tv(q2),
        step=grid.n,
    )


@dataclass
class EntropyBudgetReport:
    passed: bool
    max_increment: float
    t_max_increment: float
    slope: float
    tolerance: float


def entropy_budget(records, beta0: float | None = None, C_budget: float = 1.0) -> EntropyBudgetReport:
    """Positive increments of the entropy integral against ``C_budget * beta0 * dt``."""
    if len(records) < 2:
        return EntropyBudgetReport(True, 0.0, records[0].t if records else 0.0, 0.0, 0.0)
    t = np.array([r.t for r in records])
    e = np.array([r.entropy_int for r in records])
    if beta0 is None:
        beta0 = records[0].tv_per
    inc = np.diff(e)
    dt = np.diff(t)
    k = int(np.argmax(inc))
    tol = C_budget * beta0 * dt
    slope = float(np.polyfit(t, e, 1)[0]) if np.ptp(t) > 0 else 0.0
    return EntropyBudgetReport(bool(np.all(inc <= tol)), float(max(inc[k], 0.0)),
                               float(t[k + 1]), slope, float(np.max(tol)))


# ---------------------------------------------------------------------------
# initial data

def _sample_datum(model: GasModel, datum, N: int):
    """(omega, zeta) at the cell centres for a datum spec (preset name + params)."""
    p = dict(datum.params)
    x = (np.arange(N) + 0.5) / N
    preset = datum.preset
    w0 = float(p.get("omega0", 0.0))
    z0 = float(p.get("zeta0", 0.0))
    if preset == "constant":
        return np.full(N, w0), np.full(N, z0)
    if preset in ("sinusoidal", "square"):
        wa = float(p.get("omega_amp", 0.0))
        za = float(p.get("zeta_amp", 0.0))
        k = float(p.get("wavenumber", 1))
        sw = np.sin(2 * math.pi * k * (x + float(p.get("omega_phase", 0.0))))
        sz = np.sin(2 * math.pi * k * (x + float(p.get("zeta_phase", 0.0))))
        if preset == "square":
            sw, sz = np.sign(sw), np.sign(sz)
        return w0 + wa * sw, z0 + za * sz
    if preset == "jump":
        left = InvariantPoint(float(p.get("left_omega", w0)), float(p.get("left_zeta", z0)))
        if "shock_family" in p:
            right = shock_curve_right(model, int(p["shock_family"]), left, float(p.get("shock_beta", 0.0)))
        else:
            right = InvariantPoint(float(p.get("right_omega", 0.0)), float(p.get("right_zeta", 0.0)))
        xj = float(p.get("x_jump", 0.5))
        on_left = x < xj
        return np.where(on_left, left.omega, right.omega), np.where(on_left, left.zeta, right.zeta)
    if preset == "file":
        path = p.get("path")
        if not path:
            raise ConfigError("file datum needs a path", key="datum.path")
        try:
            data = np.loadtxt(path, comments="#", ndmin=2)
        except OSError:
            raise
        except ValueError as exc:
            raise ConfigError(f"cannot parse datum file {path}: {exc}", key="datum.path") from exc
        if data.shape[1] < 2:
            raise ConfigError("datum file needs two columns (omega zeta)", key="datum.path")
        cols = data[:, -2:]
        if cols.shape[0] != N:
            raise ConfigError(f"datum file has {cols.shape[0]} rows but grid.N = {N}", key="datum.path")
        return cols[:, 0].copy(), cols[:, 1].copy()
    raise ConfigError(f"unknown datum preset {preset!r}", key="datum.preset")


def initial_grid(model: GasModel, datum, N: int) -> GridState:
    w, z = _sample_datum(model, datum, N)
    try:
        model.primitives_of(w, z)
    except DomainError as exc:
        raise ConfigError(f"initial datum leaves the physical domain: {exc}", key="datum.preset") from exc
    return GridState(w, z, 0.0, 0)


# ---------------------------------------------------------------------------
# orchestration

@dataclass
class RunResult:
    records: list
    final: GridState
    snapshots: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)


def _region_violation(grid: GridState, region):
    if region is None:
        return None
    bad = ((grid.omega < region.omega_min) | (grid.omega > region.omega_max)
           | (grid.zeta < region.zeta_min) | (grid.zeta > region.zeta_max))
    if np.any(bad):
        return int(np.flatnonzero(bad)[0])
    return None


def run(config, threads: int = 1, log=None, on_step=None) -> RunResult:
    """Run the scheme described by a run configuration.

    ``on_step(grid, fans)`` is called before every step with the current
    grid and its interface fans (used by monotonicity checks).  A positive
    ``max_steps`` in the config ends the run early (``stats['truncated']``).
    """
    model = config.model
    params = config.damping_params
    grid = initial_grid(model, config.datum, config.N)
    seq = SamplingSequence(config.sampling_mode, config.seed)
    region = config.safety_region
    t_end = float(config.t_end)
    stops = sorted({float(s) for s in config.snapshot_times if 0.0 <= s <= t_end})
    records, snapshots = [], []

    fans = solve_interfaces(model, grid, threads)
    rec0 = diagnostics(grid, model, fans)
    records.append(rec0)
    if stops and stops[0] == 0.0:
        snapshots.append(grid)
        stops.pop(0)
    cell = _region_violation(grid, region)
    if cell is not None:
        raise SafetyRegionError("initial datum outside the safety region", records, 0, cell)

    targets = sorted(set(stops) | {t_end})
    max_tv = rec0.tv_per
    max_abs = float(max(np.max(np.abs(grid.omega)), np.max(np.abs(grid.zeta))))
    step_cap = config.max_steps
    while grid.t < t_end:
        if on_step is not None:
            on_step(grid, fans)
        h = cfl_timestep(model, grid, config.safety, fans)
        nxt = next(s for s in targets if s > grid.t)
        snap = False
        if grid.t + h >= nxt * (1 - 1e-14):
            h = nxt - grid.t
            snap = True
        grid = glimm_step(grid, model, params, seq, h, fans, threads)
        if snap:
            grid = GridState(grid.omega, grid.zeta, nxt, grid.n)
            targets = [s for s in targets if s > nxt]
        cell = _region_violation(grid, region)
        if cell is not None:
            records.append(diagnostics(grid, model))
            raise SafetyRegionError(
                f"cell {cell} left the safety region at step {grid.n} (t={grid.t:.6g}); "
                "the run's a-priori region estimate is exceeded", records, grid.n, cell)
        fans = solve_interfaces(model, grid, threads)
        capped = bool(step_cap) and grid.n >= step_cap
        done = grid.t >= t_end or capped
        if grid.n % config.record_every == 0 or done:
            rec = diagnostics(grid, model, fans)
            records.append(rec)
            max_tv = max(max_tv, rec.tv_per)
        max_abs = max(max_abs, float(np.max(np.abs(grid.omega))), float(np.max(np.abs(grid.zeta))))
        if snap and nxt in stops:
            snapshots.append(grid)
        if log is not None and grid.n % max(config.record_every, 1) == 0:
            log(f"step {grid.n} t={grid.t:.6g}")
        if capped:
            break

    tv0 = rec0.tv_per
    stats = {
        "steps": grid.n,
        "K_tv": (max_tv / tv0) if tv0 > 0 else 1.0,
        "empirical_R": max_abs,
        "sampling_cursor": seq.cursor,
        "truncated": grid.t < t_end,
    }
    return RunResult(records, grid, snapshots, stats)


__all__ = [
    "GridState", "SamplingMode", "SamplingSequence", "van_der_corput", "sampling_next",
    "solve_interfaces", "cfl_timestep", "fractional_decay", "fractional_decay_arr", "glimm_step",
    "sample_grid", "DiagnosticsRecord", "grid_wave_strength", "diagnostics", "periodic_tv",
    "EntropyBudgetReport", "entropy_budget", "initial_grid", "RunResult", "run",
]
