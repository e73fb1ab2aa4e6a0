import math

import numpy as np
import pytest

from glimmdamp.errors import DomainError, UnsupportedOperationError
from glimmdamp.models import (DampingParams, GasModel, InvariantPoint, Kind, PrimitiveState,
                              check_entropy_dissipative, damping_G, damping_G_tilde, eigenvalues,
                              eigenvectors, entropy_pair, from_invariants, jacobian_A, to_invariants)

MODELS = [
    GasModel(Kind.LAGRANGIAN_ISOTHERMAL),
    GasModel(Kind.EULERIAN_ISOTHERMAL),
    GasModel(Kind.RELATIVISTIC_ISOTHERMAL, kappa=0.5, c=3.0),
    GasModel(Kind.LAGRANGIAN_GAMMA_LAW, gamma=0.5),
    GasModel(Kind.EULERIAN_GAMMA_LAW, gamma=0.7, kappa=2.0),
    GasModel(Kind.RELATIVISTIC_GAMMA_LAW, gamma=0.5, c=10.0),
]
STATES = [PrimitiveState(1.0, 0.0), PrimitiveState(0.6, 0.3), PrimitiveState(1.7, -0.4)]


def ids(m):
    return f"{m.kind.value}-{m.gamma:g}"


def fd_jac(fn, q1, q2, eps=1e-6):
    """Central-difference d(fn)/d(q1, q2)."""
    a = np.array(fn(q1 + eps, q2)) - np.array(fn(q1 - eps, q2))
    b = np.array(fn(q1, q2 + eps)) - np.array(fn(q1, q2 - eps))
    return np.column_stack([a, b]) / (2 * eps)


def primitive_system(model, U):
    """Matrix B of q_t + B q_x = 0 from finite differences of the conserved form."""
    return np.linalg.solve(fd_jac(model.conserved_arr, U.q1, U.q2), fd_jac(model.flux_arr, U.q1, U.q2))


@pytest.mark.parametrize("model", MODELS, ids=ids)
@pytest.mark.parametrize("U", STATES)
def test_eigenvalues_match_flux_jacobian(model, U):
    B = primitive_system(model, U)
    num = np.sort(np.linalg.eigvals(B).real)
    l1, l2 = eigenvalues(model, U)
    assert l1 < l2
    np.testing.assert_allclose([l1, l2], num, rtol=1e-7, atol=1e-8)


@pytest.mark.parametrize("model", MODELS, ids=ids)
@pytest.mark.parametrize("U", STATES)
def test_invariant_gradients_are_left_eigenvectors(model, U):
    B = primitive_system(model, U)
    l1, l2 = eigenvalues(model, U)
    gw = fd_jac(lambda a, b: model.invariants_of(a, b)[0], U.q1, U.q2).ravel()
    gz = fd_jac(lambda a, b: model.invariants_of(a, b)[1], U.q1, U.q2).ravel()
    np.testing.assert_allclose(gw @ B, l1 * gw, atol=1e-6)
    np.testing.assert_allclose(gz @ B, l2 * gz, atol=1e-6)


@pytest.mark.parametrize("model", MODELS, ids=ids)
def test_eigenvectors_dual_to_invariant_gradients(model):
    U = PrimitiveState(0.8, 0.2)
    r1, r2 = eigenvectors(model, U)
    gw = fd_jac(lambda a, b: model.invariants_of(a, b)[0], U.q1, U.q2).ravel()
    gz = fd_jac(lambda a, b: model.invariants_of(a, b)[1], U.q1, U.q2).ravel()
    np.testing.assert_allclose([[gw @ r1, gw @ r2], [gz @ r1, gz @ r2]], np.eye(2), atol=1e-7)


@pytest.mark.parametrize("model", MODELS, ids=ids)
def test_equilibrium_maps_to_origin(model):
    Z = to_invariants(model, model.equilibrium)
    assert abs(Z.omega) < 1e-15 and abs(Z.zeta) < 1e-15


@pytest.mark.parametrize("model", MODELS, ids=ids)
def test_round_trip(model):
    rng = np.random.default_rng(1)
    for _ in range(50):
        U = PrimitiveState(float(rng.uniform(0.3, 2.0)), float(rng.uniform(-0.5, 0.5)))
        back = from_invariants(model, to_invariants(model, U))
        assert back.q1 == pytest.approx(U.q1, rel=1e-12)
        assert back.q2 == pytest.approx(U.q2, rel=1e-12, abs=1e-14)


def test_lagrangian_isothermal_closed_form():
    # p = 1/u: omega = v + log u, zeta = v - log u, speeds -/+ 1/u
    m = GasModel(Kind.LAGRANGIAN_ISOTHERMAL)
    Z = to_invariants(m, PrimitiveState(math.e, 0.25))
    assert Z.omega == pytest.approx(0.25 + 1.0, abs=1e-15)
    assert Z.zeta == pytest.approx(0.25 - 1.0, abs=1e-15)
    assert eigenvalues(m, PrimitiveState(2.0, 0.0)) == pytest.approx((-0.5, 0.5))


@pytest.mark.parametrize("kwargs", [
    dict(kind=Kind.LAGRANGIAN_ISOTHERMAL, gamma=1.4),
    dict(kind=Kind.EULERIAN_GAMMA_LAW, gamma=0.0),
    dict(kind=Kind.EULERIAN_GAMMA_LAW, gamma=1.4),
    dict(kind=Kind.RELATIVISTIC_ISOTHERMAL),
    dict(kind=Kind.RELATIVISTIC_ISOTHERMAL, kappa=2.0, c=1.0),
    dict(kind=Kind.LAGRANGIAN_ISOTHERMAL, kappa=-1.0),
    dict(kind=Kind.LAGRANGIAN_ISOTHERMAL, equilibrium=PrimitiveState(-1.0, 0.0)),
])
def test_invalid_models(kwargs):
    with pytest.raises(DomainError):
        GasModel(**kwargs)


def test_heuristic_gamma_above_one():
    m = GasModel(Kind.EULERIAN_GAMMA_LAW, gamma=1.4, heuristic=True)
    assert m.gamma == 1.4


@pytest.mark.parametrize("U", [PrimitiveState(0.0, 0.0), PrimitiveState(-1.0, 0.0),
                               PrimitiveState(1.0, math.nan)])
def test_invalid_states(U):
    with pytest.raises(DomainError):
        to_invariants(GasModel(Kind.EULERIAN_ISOTHERMAL), U)


def test_superluminal_state_rejected():
    with pytest.raises(DomainError):
        to_invariants(GasModel(Kind.RELATIVISTIC_ISOTHERMAL, c=2.0), PrimitiveState(1.0, 2.5))


@pytest.mark.parametrize("a,b", [(-1.0, 1.0), (1.0, 0.0), (0.0, 0.0)])
def test_damping_rates_must_be_positive(a, b):
    with pytest.raises(DomainError):
        DampingParams(a, b)


def test_homogeneous_damping():
    p = DampingParams.none()
    assert (p.a, p.b, p.homogeneous) == (0.0, 0.0, True)
    assert DampingParams(1.0, 1.5).mu == pytest.approx(0.5)


@pytest.mark.parametrize("model", MODELS, ids=ids)
def test_damping_source_decays_invariants(model):
    # d(omega)/dt = -a omega, d(zeta)/dt = -b zeta under q_t = -G
    U = PrimitiveState(0.8, 0.2)
    p = DampingParams(1.0, 2.0)
    G = damping_G(model, p, U)
    Z = to_invariants(model, U)
    gw = fd_jac(lambda a, b: model.invariants_of(a, b)[0], U.q1, U.q2).ravel()
    gz = fd_jac(lambda a, b: model.invariants_of(a, b)[1], U.q1, U.q2).ravel()
    assert gw @ G == pytest.approx(p.a * Z.omega, rel=1e-6)
    assert gz @ G == pytest.approx(p.b * Z.zeta, rel=1e-6)


@pytest.mark.parametrize("model", [m for m in MODELS if m.frame != "lagrangian"], ids=ids)
def test_jacobian_matches_finite_differences(model):
    U = PrimitiveState(1.3, 0.4)
    np.testing.assert_allclose(jacobian_A(model, U), fd_jac(model.conserved_arr, U.q1, U.q2), rtol=1e-7)
    G = damping_G(model, DampingParams(1.0, 1.0), U)
    np.testing.assert_allclose(damping_G_tilde(model, DampingParams(1.0, 1.0), U), jacobian_A(model, U) @ G)


def test_lagrangian_has_no_jacobian_map():
    with pytest.raises(UnsupportedOperationError):
        jacobian_A(GasModel(Kind.LAGRANGIAN_ISOTHERMAL), PrimitiveState(1.0, 0.0))


@pytest.mark.parametrize("model", [m for m in MODELS if entropy_pair(m).available], ids=ids)
def test_entropy_flux_compatibility(model):
    # grad(eta) B = grad(q) in primitive coordinates
    pair = entropy_pair(model)
    for U in STATES:
        B = primitive_system(model, U)
        gq = fd_jac(pair.q_fn, U.q1, U.q2).ravel()
        np.testing.assert_allclose(pair.grad(U) @ B, gq, atol=1e-6)
        np.testing.assert_allclose(pair.grad(U), fd_jac(pair.eta_fn, U.q1, U.q2).ravel(), atol=1e-6)
    assert pair.eta(model.equilibrium) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("kind", [Kind.LAGRANGIAN_ISOTHERMAL, Kind.EULERIAN_ISOTHERMAL])
def test_isothermal_entropy_dissipative(kind):
    m = GasModel(kind)
    rep = check_entropy_dissipative(m, DampingParams(1.0, 1.0), [PrimitiveState(1.0, 0.0),
                                                                 PrimitiveState(0.5, 0.3),
                                                                 PrimitiveState(2.0, -0.7)])
    assert rep.passed and rep.strict_margin > 0 and rep.min_value == pytest.approx(0.0, abs=1e-15)


def test_relativistic_entropy_unavailable():
    m = GasModel(Kind.RELATIVISTIC_ISOTHERMAL, c=10.0)
    pair = entropy_pair(m)
    assert not pair.available
    with pytest.raises(UnsupportedOperationError):
        pair.eta(PrimitiveState(1.0, 0.0))


def test_invariant_point_arithmetic():
    p = InvariantPoint(1.0, -2.0) + InvariantPoint(0.5, 0.5)
    assert p == InvariantPoint(1.5, -1.5)
    assert (p - InvariantPoint(1.5, 0.0)).scaled(2.0, 3.0) == InvariantPoint(0.0, -4.5)


def test_worked_values():
    lag, eul = GasModel(Kind.LAGRANGIAN_ISOTHERMAL), GasModel(Kind.EULERIAN_ISOTHERMAL)
    assert from_invariants(lag, InvariantPoint(1.0, -1.0)).q1 == pytest.approx(math.e)
    assert eigenvalues(eul, PrimitiveState(1.0, 0.0)) == pytest.approx((-1.0, 1.0))
    r1, r2 = eigenvectors(lag, PrimitiveState(2.0, 0.0))
    np.testing.assert_allclose(r1, [1.0, 0.5])
    np.testing.assert_allclose(r2, [-1.0, 0.5])
    # Eulerian omega grows with 1/rho, so r1 points to lower density
    np.testing.assert_allclose(eigenvectors(eul, PrimitiveState(1.0, 0.0))[0], [-0.5, 0.5])
    one = DampingParams(1.0, 1.0)
    np.testing.assert_allclose(damping_G(lag, one, PrimitiveState(math.e, 0.0)), [math.e, 0.0], atol=1e-15)
    np.testing.assert_allclose(damping_G_tilde(eul, one, PrimitiveState(math.e, 0.0)), [math.e, 0.0], atol=1e-15)
    np.testing.assert_allclose(damping_G(lag, one, PrimitiveState(1.0, 0.0)), [0.0, 0.0])
    np.testing.assert_allclose(jacobian_A(eul, PrimitiveState(2.0, 3.0)), [[1, 0], [3, 2]])
    rel = GasModel(Kind.RELATIVISTIC_ISOTHERMAL, kappa=0.5, c=3.0)
    np.testing.assert_allclose(jacobian_A(rel, PrimitiveState(1.5, 0.0)),
                               [[1, 0], [0, (0.25 + 9.0) * 1.5 / 9.0]], atol=1e-15)
    l1, l2 = eigenvalues(rel, PrimitiveState(1.0, 0.0))
    assert l1 == pytest.approx(-l2)


def test_lagrangian_damping_closed_form():
    # a = b: G = a (u log u, v)
    lag = GasModel(Kind.LAGRANGIAN_ISOTHERMAL)
    for u, v in [(0.5, 0.3), (2.0, -1.0)]:
        np.testing.assert_allclose(damping_G(lag, DampingParams(2.0, 2.0), PrimitiveState(u, v)),
                                   [2.0 * u * math.log(u), 2.0 * v], rtol=1e-12)


def test_lagrangian_entropy_values():
    pair = entropy_pair(GasModel(Kind.LAGRANGIAN_ISOTHERMAL))
    assert pair.eta(PrimitiveState(1.0, 2.0)) == pytest.approx(2.0)
    assert pair.q_flux(PrimitiveState(1.0, 2.0)) == pytest.approx(0.0)
    assert pair.q_flux(PrimitiveState(1.0, 0.0)) == 0.0
    np.testing.assert_allclose(pair.grad(PrimitiveState(1.0, 0.0)), [0.0, 0.0], atol=1e-10)


@pytest.mark.parametrize("kind", [Kind.LAGRANGIAN_ISOTHERMAL, Kind.EULERIAN_ISOTHERMAL])
def test_entropy_hessian_positive_definite(kind):
    m = GasModel(kind)
    pair = entropy_pair(m)
    for U in STATES:
        H = fd_jac(lambda a, b: pair.grad_fn(a, b), U.q1, U.q2, eps=1e-5)
        assert np.all(np.linalg.eigvalsh(0.5 * (H + H.T)) > 0)


def test_eulerian_half_gamma_against_quadrature():
    # written in u = 1/rho: omega - v = -(integral of sqrt(p'(s))/s from 1 to rho), p = s^(1/2)
    m = GasModel(Kind.EULERIAN_GAMMA_LAW, gamma=0.5)
    x, wts = np.polynomial.legendre.leggauss(40)
    s = 2.5 + 1.5 * x
    h = -1.5 * np.sum(wts * np.sqrt(0.5 * s ** -0.5) / s)
    Z = to_invariants(m, PrimitiveState(4.0, 0.0))
    assert Z.omega == pytest.approx(h, rel=1e-12)
    assert Z.zeta == pytest.approx(-h, rel=1e-12)


@pytest.mark.parametrize("kind", [Kind.LAGRANGIAN_GAMMA_LAW, Kind.EULERIAN_GAMMA_LAW])
@pytest.mark.parametrize("eps", [1e-6, -1e-6])
def test_gamma_law_approaches_isothermal(kind, eps):
    iso = GasModel(kind.with_isothermal(True))
    near = GasModel(kind, gamma=1.0 + eps, heuristic=eps > 0)
    for U in STATES:
        np.testing.assert_allclose(tuple(to_invariants(near, U)), tuple(to_invariants(iso, U)), atol=1e-4)
