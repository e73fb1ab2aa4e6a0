"""Gas-dynamics models written in Riemann-invariant coordinates.

Every model shares one structure.  With ``y`` a velocity coordinate (the
velocity itself for classical kinds, the rapidity ``c*artanh(v/c)`` for
relativistic ones) and ``h`` a thermodynamic potential of the first
primitive variable, both measured from the equilibrium state,

    omega = y + h,    zeta = y - h.

Along a 1-rarefaction ``zeta`` is constant and ``h`` increases; along a
2-rarefaction ``omega`` is constant and ``h`` decreases.  Across any
admissible shock the velocity coordinate drops by ``jump_y(h_left, h_right)``.
The wave machinery in :mod:`glimmdamp.waves` is written once against this
interface.

All ``*_arr`` helpers are numpy-vectorised and do no domain checking; the
public functions taking :class:`PrimitiveState` / :class:`InvariantPoint`
validate their input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DomainError, UnsupportedOperationError

# inputs closer than this to u=0 / |v|=c are rejected
BOUNDARY_MARGIN = 1e-12


class Kind(str, Enum):
    LAGRANGIAN_ISOTHERMAL = "LagrangianIsothermal"
    EULERIAN_ISOTHERMAL = "EulerianIsothermal"
    RELATIVISTIC_ISOTHERMAL = "RelativisticIsothermal"
    LAGRANGIAN_GAMMA_LAW = "LagrangianGammaLaw"
    EULERIAN_GAMMA_LAW = "EulerianGammaLaw"
    RELATIVISTIC_GAMMA_LAW = "RelativisticGammaLaw"

    @property
    def frame(self) -> str:
        return self.value.replace("Isothermal", "").replace("GammaLaw", "").lower()

    @property
    def isothermal(self) -> bool:
        return self.value.endswith("Isothermal")

    @property
    def conservative_form(self) -> bool:
        """True for kinds written with a non-trivial map U -> (U1, U2)."""
        return self.frame != "lagrangian"

    def with_isothermal(self, isothermal: bool) -> "Kind":
        base = self.frame.capitalize()
        return Kind(base + ("Isothermal" if isothermal else "GammaLaw"))


@dataclass(frozen=True)
class PrimitiveState:
    """(specific volume or density, velocity)."""

    q1: float
    q2: float

    def __iter__(self):
        yield self.q1
        yield self.q2


EquilibriumState = PrimitiveState


@dataclass(frozen=True)
class InvariantPoint:
    omega: float
    zeta: float

    def __iter__(self):
        yield self.omega
        yield self.zeta

    def __add__(self, other):
        return InvariantPoint(self.omega + other.omega, self.zeta + other.zeta)

    def __sub__(self, other):
        return InvariantPoint(self.omega - other.omega, self.zeta - other.zeta)

    def scaled(self, f_omega: float, f_zeta: float) -> "InvariantPoint":
        return InvariantPoint(self.omega * f_omega, self.zeta * f_zeta)

    def as_array(self) -> np.ndarray:
        return np.array([self.omega, self.zeta])


@dataclass(frozen=True)
class DampingParams:
    """Decay rates of the two invariants.

    ``homogeneous=True`` switches damping off (a = b = 0), which is only
    meant for undamped baseline runs.
    """

    a: float
    b: float
    homogeneous: bool = False

    def __post_init__(self):
        if self.homogeneous:
            if self.a != 0 or self.b != 0:
                raise DomainError("homogeneous damping requires a = b = 0")
            return
        if not self.a > 0:
            raise DomainError("damping.a must be > 0")
        if not self.b > 0:
            raise DomainError("damping.b must be > 0")

    @classmethod
    def none(cls) -> "DampingParams":
        return cls(0.0, 0.0, homogeneous=True)

    @property
    def mu(self) -> float:
        return self.b - self.a


class Strictness(str, Enum):
    STRICTLY_DISSIPATIVE = "StrictlyDissipative"
    DISSIPATIVE_ONLY = "DissipativeOnly"
    UNAVAILABLE = "Unavailable"


@dataclass(frozen=True)
class EntropyPair:
    """Entropy / entropy-flux pair normalised to vanish (with its gradient) at equilibrium.

    The ``*_fn`` callables take primitive arrays ``(q1, q2)``; ``grad_fn``
    returns the gradient with respect to the primitive variables.
    """

    strictness: Strictness
    eta_fn: Callable | None = None
    q_fn: Callable | None = None
    grad_fn: Callable | None = None

    def eta(self, U: PrimitiveState) -> float:
        self._require()
        return float(self.eta_fn(U.q1, U.q2))

    def q_flux(self, U: PrimitiveState) -> float:
        self._require()
        return float(self.q_fn(U.q1, U.q2))

    def grad(self, U: PrimitiveState) -> np.ndarray:
        self._require()
        return np.array(self.grad_fn(U.q1, U.q2), dtype=float)

    @property
    def available(self) -> bool:
        return self.strictness is not Strictness.UNAVAILABLE

    def _require(self):
        if not self.available:
            raise UnsupportedOperationError("no closed-form entropy for this model")


@dataclass(frozen=True)
class GasModel:
    kind: Kind
    gamma: float = 1.0
    kappa: float = 1.0
    c: float | None = None
    equilibrium: PrimitiveState = field(default_factory=lambda: PrimitiveState(1.0, 0.0))
    heuristic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        g = float(self.gamma)
        if self.kind.isothermal:
            if g != 1.0:
                raise DomainError(f"{self.kind.value} requires gamma = 1, got {g}")
        elif not 0.0 < g <= 1.0:
            if 1.0 < g < 2.0 and self.heuristic:
                pass
            elif 1.0 < g < 2.0:
                raise DomainError("gamma > 1 needs the heuristic flag (classical invariants only)")
            else:
                raise DomainError(f"gamma must lie in (0, 2), got {g}")
        if not self.kappa > 0:
            raise DomainError("kappa must be > 0")
        if self.relativistic:
            if self.c is None or not self.c > 0:
                raise DomainError("relativistic models need a speed of light c > 0")
            if g == 1.0 and not self.kappa < self.c:
                raise DomainError("isothermal relativistic model needs kappa < c (subluminal sound)")
        q1b, q2b = self.equilibrium
        object.__setattr__(self, "equilibrium", PrimitiveState(float(q1b), float(q2b)))
        self._check_primitive(np.asarray(q1b, float), np.asarray(q2b, float), what="equilibrium")

    # -- classification -------------------------------------------------
    @property
    def frame(self) -> str:
        return self.kind.frame

    @property
    def relativistic(self) -> bool:
        return self.frame == "relativistic"

    @property
    def translation_invariant(self) -> bool:
        """Shock curves in the invariant plane are translates of one curve."""
        return self.gamma == 1.0

    def with_gamma(self, gamma: float, heuristic: bool | None = None) -> "GasModel":
        kind = self.kind.with_isothermal(gamma == 1.0)
        return GasModel(kind, gamma, self.kappa, self.c, self.equilibrium,
                        self.heuristic if heuristic is None else heuristic)

    # -- thermodynamics -------------------------------------------------
    def pressure(self, q1):
        q1 = np.asarray(q1, float)
        if self.frame == "lagrangian":
            return self.kappa * q1 ** (-self.gamma)
        if self.frame == "eulerian":
            return self.kappa * q1 ** self.gamma
        return self.kappa ** 2 * q1 ** self.gamma

    def sound_speed(self, q1):
        """Lagrangian: sqrt(-p'(u)); otherwise sqrt(p'(rho))."""
        q1 = np.asarray(q1, float)
        g = self.gamma
        if self.frame == "lagrangian":
            return math.sqrt(self.kappa * g) * q1 ** (-(g + 1) / 2)
        if self.frame == "eulerian":
            return math.sqrt(self.kappa * g) * q1 ** ((g - 1) / 2)
        return self.kappa * math.sqrt(g) * q1 ** ((g - 1) / 2)

    # -- velocity coordinate y ------------------------------------------
    def _y_raw(self, v):
        v = np.asarray(v, float)
        if self.relativistic:
            return self.c * np.arctanh(v / self.c)
        return v

    def y_arr(self, v):
        return self._y_raw(v) - self._y_raw(self.equilibrium.q2)

    def v_from_y(self, y):
        y = np.asarray(y, float) + self._y_raw(self.equilibrium.q2)
        if self.relativistic:
            return self.c * np.tanh(y / self.c)
        return y

    def dy_dv(self, v):
        v = np.asarray(v, float)
        if self.relativistic:
            return self.c ** 2 / (self.c ** 2 - v ** 2)
        return np.ones_like(v)

    # -- thermodynamic coordinate h -------------------------------------
    @property
    def _classical_scale(self):
        return math.sqrt(self.kappa * self.gamma)

    @property
    def _rel_alpha(self):
        # coefficient of log(rho) in the isothermal relativistic invariants
        c, k = self.c, self.kappa
        return c * c * k / (k * k + c * c)

    def _ulike(self, q1):
        q1 = np.asarray(q1, float)
        return q1 if self.frame == "lagrangian" else 1.0 / q1

    def h_arr(self, q1):
        q1 = np.asarray(q1, float)
        g = self.gamma
        q1b = self.equilibrium.q1
        if not self.relativistic:
            L = np.log(self._ulike(q1) / self._ulike(q1b))
            if g == 1.0:
                return math.sqrt(self.kappa) * L
            e = (1.0 - g) / 2
            ub = float(self._ulike(q1b))
            return self._classical_scale * ub ** e * np.expm1(e * L) / e
        L = np.log(q1 / q1b)
        if g == 1.0:
            return -self._rel_alpha * L
        gg = (g - 1.0) / 2
        B = self.kappa * q1b ** gg / self.c
        AmB = B * np.expm1(gg * L)
        A = B + AmB
        theta = self.c * math.sqrt(g) * np.arctan(AmB / (1.0 + A * B)) / gg
        return -theta

    def q1_from_h(self, h):
        """Inverse of :meth:`h_arr`; NaN outside the image."""
        h = np.asarray(h, float)
        g = self.gamma
        q1b = self.equilibrium.q1
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            if not self.relativistic:
                if g == 1.0:
                    L = h / math.sqrt(self.kappa)
                else:
                    e = (1.0 - g) / 2
                    ub = float(self._ulike(q1b))
                    L = np.log1p(h * e / (self._classical_scale * ub ** e)) / e
                u = float(self._ulike(q1b)) * np.exp(L)
                return u if self.frame == "lagrangian" else 1.0 / u
            if g == 1.0:
                return q1b * np.exp(-h / self._rel_alpha)
            gg = (g - 1.0) / 2
            B = self.kappa * q1b ** gg / self.c
            Tb = math.atan(B)
            delta = -h * gg / (self.c * math.sqrt(g))
            T = Tb + delta
            T = np.where((T > 0) & (T < math.pi / 2), T, np.nan)
            L = np.log1p(np.sin(delta) / (np.cos(T) * math.sin(Tb))) / gg
            return q1b * np.exp(L)

    def dh_dq1(self, q1):
        q1 = np.asarray(q1, float)
        g = self.gamma
        if self.frame == "lagrangian":
            return self.sound_speed(q1)
        if self.frame == "eulerian":
            return -self.sound_speed(q1) / q1
        p = self.pressure(q1)
        return -self.c ** 2 * self.sound_speed(q1) / (p + q1 * self.c ** 2)

    def h_bounds(self) -> tuple[float, float]:
        """Open interval of attainable h values."""
        g = self.gamma
        if g == 1.0:
            return (-math.inf, math.inf)
        if not self.relativistic:
            e = (1.0 - g) / 2
            ub = float(self._ulike(self.equilibrium.q1))
            edge = -self._classical_scale * ub ** e / e
            return (edge, math.inf) if e > 0 else (-math.inf, edge)
        gg = (g - 1.0) / 2
        Tb = math.atan(self.kappa * self.equilibrium.q1 ** gg / self.c)
        # subluminal sound caps tan(T) at 1/sqrt(gamma)
        T_lo, T_hi = 0.0, math.atan(1.0 / math.sqrt(g))
        k = self.c * math.sqrt(g) / gg
        ends = sorted((-k * (T_lo - Tb), -k * (T_hi - Tb)))
        return (ends[0], ends[1])

    def q1_bounds(self) -> tuple[float, float]:
        """Open interval of admissible first primitive values."""
        g = self.gamma
        if not self.relativistic or g == 1.0:
            return (0.0, math.inf)
        edge = (self.c ** 2 / (self.kappa ** 2 * g)) ** (1.0 / (g - 1.0))
        return (edge, math.inf) if g < 1.0 else (0.0, edge)

    # -- shocks ---------------------------------------------------------
    def jump_y(self, ha, hb):
        """Drop of the velocity coordinate across the shock joining h-levels ``ha`` and ``hb``.

        Symmetric in its arguments; the admissible branch is selected by the caller.
        """
        ha = np.asarray(ha, float)
        hb = np.asarray(hb, float)
        g = self.gamma
        if not self.relativistic:
            if g == 1.0:
                sk = math.sqrt(self.kappa)
                return 2.0 * sk * np.abs(np.sinh((hb - ha) / (2.0 * sk)))
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                ua = self._ulike(self.q1_from_h(ha))
                ub = self._ulike(self.q1_from_h(hb))
                pa = self.kappa * ua ** (-g)
                pb = self.kappa * ub ** (-g)
                return np.sqrt(np.maximum(-(pb - pa) * (ub - ua), 0.0))
        c = self.c
        if g == 1.0:
            k = self.kappa
            d = -(hb - ha) / self._rel_alpha
            r = np.exp(d)
            w = k * c * np.abs(np.expm1(d)) / np.sqrt((c * c + k * k * r) * (c * c * r + k * k))
            return c * np.arctanh(w)
        ra = self.q1_from_h(ha)
        rb = self.q1_from_h(hb)
        pa, pb = self.pressure(ra), self.pressure(rb)
        ea, eb = ra * c * c, rb * c * c
        w2 = (pb - pa) * (eb - ea) / ((ea + pb) * (eb + pa))
        return c * np.arctanh(np.sqrt(np.maximum(w2, 0.0)))

    def shock_q1_sign(self, family: int) -> float:
        """Sign s such that a family shock of strength beta has q1_right = q1_left * exp(s*beta)."""
        lag = self.frame == "lagrangian"
        if family == 1:
            return -1.0 if lag else 1.0
        return 1.0 if lag else -1.0

    def h_per_log_q1(self) -> float:
        """dh/dlog(q1) for translation-invariant kinds."""
        if not self.translation_invariant:
            raise UnsupportedOperationError("h is linear in log(q1) only for gamma = 1")
        if self.frame == "lagrangian":
            return math.sqrt(self.kappa)
        if self.frame == "eulerian":
            return -math.sqrt(self.kappa)
        return -self._rel_alpha

    # -- characteristic structure ---------------------------------------
    def eigenvalues_arr(self, q1, v):
        q1 = np.asarray(q1, float)
        v = np.asarray(v, float)
        cs = self.sound_speed(q1)
        if self.frame == "lagrangian":
            return -cs, cs
        if self.frame == "eulerian":
            return v - cs, v + cs
        c2 = self.c ** 2
        return (v - cs) / (1.0 - v * cs / c2), (v + cs) / (1.0 + v * cs / c2)

    def conserved_arr(self, q1, v):
        q1 = np.asarray(q1, float)
        v = np.asarray(v, float)
        if self.frame == "lagrangian":
            return q1, v
        if self.frame == "eulerian":
            return q1, q1 * v
        c2 = self.c ** 2
        U2 = (self.pressure(q1) + q1 * c2) * v / (c2 - v * v)
        return v / c2 * U2 + q1, U2

    def flux_arr(self, q1, v):
        q1 = np.asarray(q1, float)
        v = np.asarray(v, float)
        p = self.pressure(q1)
        if self.frame == "lagrangian":
            return -v, p
        if self.frame == "eulerian":
            return q1 * v, q1 * v * v + p
        _, U2 = self.conserved_arr(q1, v)
        return U2, U2 * v + p

    def dp_dq1(self, q1):
        q1 = np.asarray(q1, float)
        g = self.gamma
        if self.frame == "lagrangian":
            return -g * self.kappa * q1 ** (-g - 1)
        if self.frame == "eulerian":
            return g * self.kappa * q1 ** (g - 1)
        return g * self.kappa ** 2 * q1 ** (g - 1)

    def jacobian_arr(self, q1, v):
        """d(U1, U2)/d(q1, q2) as an array of shape (..., 2, 2)."""
        q1 = np.asarray(q1, float)
        v = np.asarray(v, float)
        if self.frame == "lagrangian":
            raise UnsupportedOperationError(
                f"{self.kind.value} is already in primitive conservation form; no Jacobian map")
        out = np.zeros(np.broadcast(q1, v).shape + (2, 2))
        if self.frame == "eulerian":
            out[..., 0, 0] = 1.0
            out[..., 1, 0] = v
            out[..., 1, 1] = q1
            return out
        c2 = self.c ** 2
        p = self.pressure(q1)
        dU2_dr = (self.dp_dq1(q1) + c2) * v / (c2 - v * v)
        dU2_dv = (p + q1 * c2) * (c2 + v * v) / (c2 - v * v) ** 2
        U2 = (p + q1 * c2) * v / (c2 - v * v)
        out[..., 0, 0] = v / c2 * dU2_dr + 1.0
        out[..., 0, 1] = U2 / c2 + v / c2 * dU2_dv
        out[..., 1, 0] = dU2_dr
        out[..., 1, 1] = dU2_dv
        return out

    # -- coordinate maps ------------------------------------------------
    def _check_primitive(self, q1, q2, what="state"):
        bad = ~(q1 > BOUNDARY_MARGIN) | ~np.isfinite(q1) | ~np.isfinite(q2)
        if np.any(bad):
            raise DomainError(f"{what}: first primitive variable must be > 0 (got {q1[bad].ravel()[0]!r})")
        if self.relativistic:
            if np.any(np.abs(q2) >= self.c - BOUNDARY_MARGIN):
                raise DomainError(f"{what}: |v| must be < c = {self.c}")
            if self.gamma != 1.0 and np.any(self.sound_speed(q1) >= self.c):
                raise DomainError(f"{what}: sound speed reaches c (density outside the subluminal range)")

    def invariants_of(self, q1, q2):
        """Validated primitive arrays -> (omega, zeta) arrays."""
        q1 = np.asarray(q1, float)
        q2 = np.asarray(q2, float)
        self._check_primitive(q1, q2)
        h = self.h_arr(q1)
        y = self.y_arr(q2)
        return y + h, y - h

    def primitives_of(self, omega, zeta):
        """Validated (omega, zeta) arrays -> primitive arrays."""
        omega = np.asarray(omega, float)
        zeta = np.asarray(zeta, float)
        h = 0.5 * (omega - zeta)
        y = 0.5 * (omega + zeta)
        lo, hi = self.h_bounds()
        if not np.all(np.isfinite(h) & np.isfinite(y)):
            raise DomainError("invariant coordinates must be finite")
        if np.any((h <= lo) | (h >= hi)):
            raise DomainError(
                f"(omega - zeta)/2 must lie in ({lo}, {hi}) for {self.kind.value}")
        q1 = self.q1_from_h(h)
        v = self.v_from_y(y)
        self._check_primitive(q1, v, what="image of invariant point")
        return q1, v

    def primitives_unchecked(self, omega, zeta):
        h = 0.5 * (np.asarray(omega, float) - np.asarray(zeta, float))
        y = 0.5 * (np.asarray(omega, float) + np.asarray(zeta, float))
        return self.q1_from_h(h), self.v_from_y(y)


# ---------------------------------------------------------------------------
# public per-state operations

def to_invariants(model: GasModel, U: PrimitiveState) -> InvariantPoint:
    w, z = model.invariants_of(U.q1, U.q2)
    return InvariantPoint(float(w), float(z))


def from_invariants(model: GasModel, Z: InvariantPoint) -> PrimitiveState:
    q1, q2 = model.primitives_of(Z.omega, Z.zeta)
    return PrimitiveState(float(q1), float(q2))


def eigenvalues(model: GasModel, U: PrimitiveState) -> tuple[float, float]:
    model._check_primitive(np.asarray(U.q1, float), np.asarray(U.q2, float))
    l1, l2 = model.eigenvalues_arr(U.q1, U.q2)
    l1, l2 = float(l1), float(l2)
    if not l1 < l2:
        raise AssertionError(f"strict hyperbolicity lost at {U}: {l1} >= {l2}")
    return l1, l2


def invariant_gradients(model: GasModel, q1, q2):
    """(grad omega, grad zeta) with respect to the primitive variables."""
    dh = model.dh_dq1(q1)
    dy = model.dy_dv(q2)
    return np.stack([dh, dy], axis=-1), np.stack([-dh, dy], axis=-1)


def eigenvectors_arr(model: GasModel, q1, q2):
    dh = np.asarray(model.dh_dq1(q1), float)
    dy = np.asarray(model.dy_dv(q2), float)
    r1 = np.stack([0.5 / dh, 0.5 / dy], axis=-1)
    r2 = np.stack([-0.5 / dh, 0.5 / dy], axis=-1)
    return r1, r2


def eigenvectors(model: GasModel, U: PrimitiveState) -> tuple[np.ndarray, np.ndarray]:
    """Right eigenvectors (primitive coordinates) normalised so r_i . grad(invariant_j) = delta_ij."""
    model._check_primitive(np.asarray(U.q1, float), np.asarray(U.q2, float))
    return eigenvectors_arr(model, U.q1, U.q2)


def damping_G_arr(model: GasModel, params: DampingParams, q1, q2):
    w, z = model.invariants_of(q1, q2)
    r1, r2 = eigenvectors_arr(model, q1, q2)
    return (params.a * w)[..., None] * r1 + (params.b * z)[..., None] * r2


def damping_G(model: GasModel, params: DampingParams, U: PrimitiveState) -> np.ndarray:
    """Source a*omega*r1 + b*zeta*r2 in primitive coordinates."""
    return damping_G_arr(model, params, np.asarray(U.q1, float), np.asarray(U.q2, float))


def jacobian_A(model: GasModel, U: PrimitiveState) -> np.ndarray:
    if not model.kind.conservative_form:
        raise UnsupportedOperationError(
            f"{model.kind.value} is already in primitive conservation form; no Jacobian map")
    model._check_primitive(np.asarray(U.q1, float), np.asarray(U.q2, float))
    return model.jacobian_arr(U.q1, U.q2)


def damping_G_tilde(model: GasModel, params: DampingParams, U: PrimitiveState) -> np.ndarray:
    """Source term for the conservative form: A(U) G(U)."""
    A = jacobian_A(model, U)
    return A @ damping_G(model, params, U)


# ---------------------------------------------------------------------------
# entropy pairs

def _classical_energy(model: GasModel):
    """E(u) = -int p du (Lagrangian) or W(rho) = rho * int p/s^2 ds (Eulerian), with derivative."""
    k, g = model.kappa, model.gamma
    if model.frame == "lagrangian":
        if g == 1.0:
            return (lambda u: -k * np.log(u)), (lambda u: -k / u)
        return (lambda u: k * u ** (1 - g) / (g - 1)), (lambda u: -k * u ** (-g))
    if g == 1.0:
        return (lambda r: k * r * np.log(r)), (lambda r: k * (np.log(r) + 1.0))
    return (lambda r: k * r ** g / (g - 1)), (lambda r: k * g * r ** (g - 1) / (g - 1))


def entropy_pair(model: GasModel) -> EntropyPair:
    if model.relativistic:
        return EntropyPair(Strictness.UNAVAILABLE)
    qb, vb = model.equilibrium
    E, dE = _classical_energy(model)
    Eb, dEb = float(E(qb)), float(dE(qb))
    pb = float(model.pressure(qb))

    if model.frame == "lagrangian":
        def eta(u, v):
            u, v = np.asarray(u, float), np.asarray(v, float)
            return 0.5 * (v - vb) ** 2 + (E(u) - Eb - dEb * (u - qb))

        def q(u, v):
            u, v = np.asarray(u, float), np.asarray(v, float)
            return (v - vb) * (model.pressure(u) - pb)

        def grad(u, v):
            u, v = np.asarray(u, float), np.asarray(v, float)
            return np.stack([dE(u) - dEb, v - vb], axis=-1)
    else:
        lin_rho = 0.5 * vb * vb - dEb

        def eta(r, v):
            r, v = np.asarray(r, float), np.asarray(v, float)
            return 0.5 * r * (v - vb) ** 2 + (E(r) - Eb - dEb * (r - qb))

        def q(r, v):
            r, v = np.asarray(r, float), np.asarray(v, float)
            p = model.pressure(r)
            q0 = 0.5 * r * v ** 3 + v * (E(r) + p)
            return q0 + lin_rho * r * v - vb * (r * v * v + p)

        def grad(r, v):
            r, v = np.asarray(r, float), np.asarray(v, float)
            return np.stack([0.5 * (v - vb) ** 2 + dE(r) - dEb, r * (v - vb)], axis=-1)

    return EntropyPair(Strictness.STRICTLY_DISSIPATIVE, eta, q, grad)


@dataclass
class DissipationReport:
    passed: bool
    min_value: float
    argmin: PrimitiveState | None
    strict_margin: float
    n_samples: int
    values: np.ndarray = field(repr=False, default=None)

    def __bool__(self):
        return self.passed


def dissipation_rate(model: GasModel, params: DampingParams, q1, q2, pair: EntropyPair | None = None):
    """grad(eta) . G, i.e. a*omega*d(eta)/d(omega) + b*zeta*d(eta)/d(zeta)."""
    pair = pair or entropy_pair(model)
    pair._require()
    G = damping_G_arr(model, params, np.asarray(q1, float), np.asarray(q2, float))
    return np.sum(pair.grad_fn(q1, q2) * G, axis=-1)


def check_entropy_dissipative(model: GasModel, params: DampingParams, domain_sample,
                              tol: float = 1e-12) -> DissipationReport:
    """Evaluate grad(eta).G on every sampled state.

    ``domain_sample`` is a sequence of :class:`PrimitiveState` or an array of
    shape (n, 2).  The strict margin is the smallest value over samples not
    at the equilibrium (``inf`` when every sample is the equilibrium).
    """
    pair = entropy_pair(model)
    if not pair.available:
        raise UnsupportedOperationError(f"no closed-form entropy for {model.kind.value}")
    pts = np.array([[s.q1, s.q2] for s in domain_sample] if not isinstance(domain_sample, np.ndarray)
                   else domain_sample, dtype=float).reshape(-1, 2)
    q1, q2 = pts[:, 0], pts[:, 1]
    vals = dissipation_rate(model, params, q1, q2, pair)
    i = int(np.argmin(vals))
    qb, vb = model.equilibrium
    away = np.hypot(q1 - qb, q2 - vb) > 1e-9
    strict = float(np.min(vals[away])) if np.any(away) else math.inf
    return DissipationReport(
        passed=bool(vals[i] >= -tol),
        min_value=float(vals[i]),
        argmin=PrimitiveState(float(q1[i]), float(q2[i])),
        strict_margin=strict,
        n_samples=len(vals),
        values=vals,
    )
