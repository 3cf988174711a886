import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from conftest import seeds
from qreversal.antiunitary import Conjugation, q_map, unitary_conj_map
from qreversal.detailed_balance import check_sqdb_theta
from qreversal.errors import NotSteadyError, ReversalError
from qreversal.models import (
    CollisionSpec,
    RandomUnitarySpec,
    build_collision_reverser,
    build_collision_unitary,
    build_random_unitary_model,
    build_reverser_variant,
    collision_kraus_discrepancy,
    fit_order,
    gksl_apply,
    gksl_reverser_ops,
    gksl_steady_state,
    gksl_superop,
    random_collision_spec,
    reverser_hamiltonian,
    thermal_qubit_spec,
    thermal_qubit_state,
)
from qreversal.random_ops import ginibre, random_density, random_hermitian, random_state, random_unitary
from qreversal.reversal import (
    check_corollary_steady,
    check_lemma_fg,
    check_special_reversal,
    check_theorem1,
    check_theorem3,
    run_checks,
)
from qreversal.tensor_core import tensor_product

DTS = np.geomspace(1e-2, 1e-5, 8)


def ladder_spec(d, omega, rng, t=0.7, d_e=2):
    return RandomUnitarySpec(
        h=omega * np.diag(np.arange(d)),
        x=random_hermitian(d, rng),
        lambdas=np.linspace(-1, 1, d_e),
        chi_amps=random_state(d_e, rng),
        t=t,
        c_phase=0.3,
    )


def test_spec_validation(rng):
    h = random_hermitian(2, rng)
    with pytest.raises(ReversalError):
        RandomUnitarySpec(h=ginibre(2, 2, rng), x=h, lambdas=[1, -1], chi_amps=[1, 0], t=1)
    with pytest.raises(ReversalError):
        RandomUnitarySpec(h=h, x=h, lambdas=[1, -1], chi_amps=[1, 1], t=1)
    with pytest.raises(ReversalError):
        RandomUnitarySpec(h=h, x=h, lambdas=[1, -1, 0], chi_amps=[1, 0], t=1)
    with pytest.raises(ReversalError):
        CollisionSpec(h=h, jump_ops=[h], dt=0.0)
    with pytest.raises(ReversalError):
        CollisionSpec(h=h, jump_ops=[h], dt=0.1, fock_cutoff=0)


def test_random_unitary_model_definition(rng):
    spec = RandomUnitarySpec.random(3, 2, rng)
    gen = tensor_product(spec.h, np.eye(2)) + tensor_product(spec.x, np.diag(spec.lambdas))
    np.testing.assert_allclose(spec.interaction(), expm(-1j * gen * spec.t), atol=1e-12)
    model = build_random_unitary_model(spec)
    np.testing.assert_allclose(model.sigma, np.eye(3) / 3)
    np.testing.assert_allclose(model.chi_tilde, np.exp(-1j * spec.c_phase * spec.t) * spec.chi_amps)


def test_zero_time_model_is_trivial(rng):
    spec = RandomUnitarySpec.random(2, 3, rng, t=0.0)
    model = build_random_unitary_model(spec)
    np.testing.assert_allclose(model.u, np.eye(6), atol=1e-15)
    np.testing.assert_allclose(model.v, np.eye(6), atol=1e-15)
    assert all(r.passed for r in run_checks(model))


def test_worked_example_qubit(rng):
    spec = RandomUnitarySpec(
        h=np.diag([0.0, 1.0]), x=random_hermitian(2, rng), lambdas=[1.0, -1.0], chi_amps=random_state(2, rng), t=0.7
    )
    report = check_special_reversal(build_random_unitary_model(spec))
    assert report.residual < 1e-10


@pytest.mark.parametrize("d", [2, 3, 4])
def test_reverser_hamiltonian_two_relabelings(d, rng):
    omega, c = 1.3, 0.4
    h = omega * np.diag(np.arange(d))
    std = Conjugation.standard(d)
    w1, w2 = np.eye(d), np.eye(d)[::-1]
    np.testing.assert_allclose(reverser_hamiltonian(h, w1, std, c), c * np.eye(d) - h, atol=1e-12)
    c_prime = c - omega * (d - 1)
    np.testing.assert_allclose(reverser_hamiltonian(h, w2, std, c), c_prime * np.eye(d) + h, atol=1e-12)


@pytest.mark.parametrize("r", [1.0, 2.0, -1.0, 0.5])
def test_reverser_variants_pass(r, rng):
    spec = RandomUnitarySpec.random(3, 2, rng)
    w = random_unitary(3, rng)
    theta = Conjugation(random_unitary(3, rng))
    model = build_random_unitary_model(spec, w, theta)
    v = build_reverser_variant(spec, r, w, theta)
    np.testing.assert_allclose(v, model.v, atol=1e-10)
    assert check_special_reversal(model.with_reverser(v, model.chi_tilde)).passed
    with pytest.raises(ReversalError):
        build_reverser_variant(spec, 0.0)


def test_wrong_sign_reverser_fails(rng):
    spec = RandomUnitarySpec.random(2, 2, rng)
    model = build_random_unitary_model(spec)
    broken = model.with_reverser(build_reverser_variant(spec, 1.0, sign=1.0), model.chi_tilde)
    for check in (check_special_reversal, check_theorem3, check_theorem1, check_lemma_fg):
        assert not check(broken).passed
    # sigma = I/d is steady for every unital G, so this one cannot detect the error
    assert check_corollary_steady(broken).passed


def test_collision_without_jumps(rng):
    h = random_hermitian(2, rng)
    spec = CollisionSpec(h=h, jump_ops=[np.zeros((2, 2))], dt=0.01)
    _, f = build_collision_unitary(spec)
    np.testing.assert_allclose(f.kraus[0], expm(-1j * h * 0.01), atol=1e-12)
    np.testing.assert_allclose(f.kraus[1], 0, atol=1e-15)


def test_collision_kraus_expansion_orders():
    gamma = 0.5
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    r0, r1 = [], []
    for dt in DTS:
        spec = CollisionSpec(h=np.zeros((2, 2)), jump_ops=[np.sqrt(gamma) * lower], dt=dt)
        _, f = build_collision_unitary(spec)
        r0.append(np.linalg.norm(f.kraus[0] - np.eye(2) - spec.drift() * dt))
        r1.append(np.linalg.norm(f.kraus[1] - np.sqrt(gamma * dt) * lower))
    o0, _ = fit_order(DTS, r0)
    o1, _ = fit_order(DTS, r1)
    assert o0 >= 1.4
    assert o1 >= 0.9


def test_gksl_examples(rng):
    z = np.diag([1.0, -1.0])
    spec = CollisionSpec(h=np.zeros((2, 2)), jump_ops=[np.sqrt(0.3) * z], dt=0.01)
    diag = np.diag(rng.uniform(0.1, 1, 2))
    np.testing.assert_allclose(gksl_apply(spec, diag), 0, atol=1e-15)
    spec = random_collision_spec(3, 2, 0.01, rng)
    rho = random_density(3, rng)
    assert abs(np.trace(gksl_apply(spec, rho))) < 1e-12
    np.testing.assert_allclose(gksl_superop(spec) @ rho.reshape(-1, order="F"), gksl_apply(spec, rho).reshape(-1, order="F"), atol=1e-12)
    # finite-difference generator from the collision step
    errs = []
    for dt in DTS[:5]:
        _, f = build_collision_unitary(spec.with_dt(dt))
        errs.append(np.linalg.norm((f.apply(rho) - rho) / dt - gksl_apply(spec, rho)))
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_gksl_reverser_transpose_case(rng):
    lreal = rng.standard_normal((3, 3))
    spec = CollisionSpec(h=np.zeros((3, 3)), jump_ops=[lreal, lreal.T], dt=0.01)
    sigma = np.eye(3) / 3
    assert np.linalg.norm(gksl_apply(spec, sigma)) < 1e-9  # L, L^T pair keeps I/d stationary
    rev = gksl_reverser_ops(spec, sigma)
    for got, op in zip(rev.jump_ops, spec.jump_ops):
        np.testing.assert_allclose(got, -op.T, atol=1e-12)


def test_gksl_reverser_needs_steady_state(rng):
    spec = random_collision_spec(2, 1, 0.01, rng)
    with pytest.raises(NotSteadyError):
        gksl_reverser_ops(spec, np.eye(2) / 2)


def test_thermal_qubit_detailed_balance_closed_form():
    spec = thermal_qubit_spec(1e-3)
    sigma = thermal_qubit_state()
    assert np.linalg.norm(gksl_apply(spec, sigma)) < 1e-12
    # Q G = G and Q L_j = sum_k u_jk L_k with u the swap
    std = Conjugation.standard(2)
    np.testing.assert_allclose(q_map(sigma, std, spec.drift()), spec.drift(), atol=1e-12)
    l1, l2 = spec.jump_ops
    np.testing.assert_allclose(q_map(sigma, std, l1), l2, atol=1e-12)
    np.testing.assert_allclose(q_map(sigma, std, l2), l1, atol=1e-12)
    w = random_unitary(2, np.random.default_rng(5))
    rev = gksl_reverser_ops(spec, sigma, w, std)
    np.testing.assert_allclose(rev.h, -unitary_conj_map(w, spec.h), atol=1e-12)
    np.testing.assert_allclose(rev.jump_ops[0], -unitary_conj_map(w, l2), atol=1e-12)
    np.testing.assert_allclose(rev.jump_ops[1], -unitary_conj_map(w, l1), atol=1e-12)
    # the discrete collision channel is itself detailed-balanced with an involutory c
    _, f = build_collision_unitary(spec)
    assert check_sqdb_theta(f, sigma, std, tol=1e-6).passed


def test_reverser_kraus_discrepancy_converges():
    spec = random_collision_spec(2, 2, 1e-2, np.random.default_rng(11))
    sigma = gksl_steady_state(spec)
    disc = [collision_kraus_discrepancy(spec.with_dt(dt), sigma) for dt in DTS]
    assert all(b < a for a, b in zip(disc, disc[1:]))
    order, r2 = fit_order(np.sqrt(DTS), disc)
    assert order >= 0.9 and r2 > 0.99


def test_collision_reverser_field_state():
    spec = thermal_qubit_spec(1e-3)
    spec.c_phase = 0.5
    v, chi_tilde = build_collision_reverser(spec, gksl_reverser_ops(spec, thermal_qubit_state()))
    assert np.linalg.norm(v.conj().T @ v - np.eye(v.shape[0])) < 1e-10
    np.testing.assert_allclose(chi_tilde, [np.exp(-0.5j * 1e-3), 0, 0, 0])
    assert collision_kraus_discrepancy(spec, thermal_qubit_state()) < 1e-12


def test_semigroup_limit_monotone():
    spec = random_collision_spec(2, 2, 1e-2, np.random.default_rng(3))
    exact = expm(gksl_superop(spec))
    errs = []
    for k in range(8):
        n = 100 * 2**k
        _, f = build_collision_unitary(spec.with_dt(1.0 / n))
        errs.append(np.linalg.norm(np.linalg.matrix_power(f.superop(), n) - exact))
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_fit_order_on_exact_power_law():
    xs = np.geomspace(1, 1e-3, 6)
    slope, r2 = fit_order(xs, 3 * xs**1.5)
    assert np.isclose(slope, 1.5) and np.isclose(r2, 1.0)


# -- properties --------------------------------------------------------------

@settings(max_examples=20)
@given(seeds, st.integers(2, 3), st.integers(2, 3))
def test_random_unitary_models_pass(seed, d, d_e):
    rng = np.random.default_rng(seed)
    spec = RandomUnitarySpec.random(d, d_e, rng)
    model = build_random_unitary_model(spec, random_unitary(d, rng), Conjugation(random_unitary(d, rng)))
    np.testing.assert_allclose(model.sigma, np.eye(d) / d)
    for check in (check_special_reversal, check_theorem3, check_theorem1, check_lemma_fg):
        assert check(model).passed


@settings(max_examples=100)
@given(seeds, st.integers(2, 4))
def test_backaction_cancellation_special_case(seed, d):
    """For a theta-real Hamiltonian the reverser Hamiltonian is -W H W^dagger + c."""
    rng = np.random.default_rng(seed)
    theta = Conjugation(random_unitary(d, rng))
    real_h = random_hermitian(d, rng, real=True).real
    h = theta.basis @ real_h @ theta.basis.conj().T
    w = random_unitary(d, rng)
    np.testing.assert_allclose(reverser_hamiltonian(h, w, theta, 0.2), 0.2 * np.eye(d) - unitary_conj_map(w, h), atol=1e-10)


@settings(max_examples=50)
@given(seeds, st.floats(1e-6, 1.0), st.integers(1, 2), st.integers(1, 2))
def test_collision_unitary_exact(seed, dt, n_jumps, cutoff):
    spec = random_collision_spec(2, n_jumps, dt, np.random.default_rng(seed))
    spec.fock_cutoff = cutoff
    u, f = build_collision_unitary(spec)
    assert np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) < 1e-10
    assert f.completeness_defect() < 1e-10
