import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_model, seeds
from qreversal.antiunitary import Conjugation, q_map, theta_map
from qreversal.channel import KrausChannel, map_distance, petz_map, steady_state, theta_conjugate
from qreversal.detailed_balance import (
    NoValidCError,
    check_corollary2,
    check_corollary3,
    check_sqdb_direct,
    check_sqdb_theta,
    db_symmetrize,
    reverser_kraus_via_c,
    solve_c_matrix,
)
from qreversal.errors import NotSteadyError, ReversalError
from qreversal.models import RandomUnitarySpec, build_random_unitary_model
from qreversal.random_ops import ginibre, random_density, random_hermitian, random_kraus, random_unitary
from qreversal.reversal import ReversalModel, build_reverser_unitary, check_theorem1
from qreversal.tensor_core import expm_skew, hs_inner, pd_power

PAULI = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]


def pauli_channel(p=(0.25, 0.25, 0.25, 0.25)):
    return KrausChannel([np.sqrt(pj) * s for pj, s in zip(p, PAULI)])


def kms(sigma, y, x):
    r = pd_power(sigma, 0.5)
    return hs_inner(y, r @ x @ r)


def random_db_channel(rng, d, n):
    """A channel in SQDB-theta about the eigenbasis conjugation of its own steady state."""
    base = KrausChannel(random_kraus(d, n, rng))
    sigma = steady_state(base).sigma
    theta = Conjugation(np.linalg.eigh(sigma)[1])
    return db_symmetrize(base.kraus, sigma, theta), sigma, theta


def test_sqdb_theta_examples(rng):
    std = Conjugation.standard(3)
    sigma = np.diag([0.2, 0.3, 0.5])
    assert check_sqdb_theta(KrausChannel.identity(3), sigma, std).passed
    u = expm_skew(-1j * random_hermitian(3, rng, real=True) * 0.8)
    assert check_sqdb_theta(KrausChannel.unitary(u), np.eye(3) / 3, std).passed
    assert check_sqdb_theta(pauli_channel(), np.eye(2) / 2, Conjugation.standard(2)).passed
    ad = KrausChannel([np.diag([1, np.sqrt(0.5)]), np.sqrt(0.5) * np.array([[0, 1], [0, 0]])])
    with pytest.raises(NotSteadyError):
        check_sqdb_theta(ad, np.eye(2) / 2, Conjugation.standard(2))


def test_sqdb_direct_examples(rng):
    sigma = random_density(3, rng, real=True)
    std = Conjugation.standard(3)
    report = check_sqdb_direct(KrausChannel.identity(3), sigma, std, n_max=4)
    assert report.passed and len(report.witnesses["per_n"]) == 5
    # n = 0 alone only needs Theta sigma = sigma
    u = random_unitary(3, rng)
    assert check_sqdb_direct(KrausChannel.unitary(u), np.eye(3) / 3, std, n_max=0).passed
    assert not check_sqdb_direct(KrausChannel.unitary(u), np.eye(3) / 3, std, n_max=1).passed
    with pytest.raises(ReversalError):
        check_sqdb_direct(KrausChannel.identity(2), np.eye(2) / 2, Conjugation.standard(2), n_max=-1)


def test_c_matrix_examples():
    c = solve_c_matrix(KrausChannel.identity(3), np.eye(3) / 3, Conjugation.standard(3))
    np.testing.assert_allclose(c.c, [[1]])
    c = solve_c_matrix(pauli_channel(), np.eye(2) / 2, Conjugation.standard(2))
    np.testing.assert_allclose(c.c, np.diag([1, 1, -1, 1]), atol=1e-12)
    assert c.residual < 1e-10
    assert c.unitarity_defect < 1e-10 and c.involution_defect < 1e-10 and c.linearly_independent
    ad = KrausChannel([np.diag([1, np.sqrt(0.5)]), np.sqrt(0.5) * np.array([[0, 1], [0, 0]])])
    with pytest.raises(NotSteadyError):
        solve_c_matrix(ad, np.eye(2) / 2, Conjugation.standard(2))


def test_no_valid_c(rng):
    f = KrausChannel(random_kraus(3, 2, rng))
    sigma = steady_state(f).sigma
    theta = Conjugation(random_unitary(3, rng))
    with pytest.raises(NoValidCError) as info:
        solve_c_matrix(f, sigma, theta)
    assert not info.value.result.valid
    assert not solve_c_matrix(f, sigma, theta, strict=False).valid


def test_reverser_kraus_via_c_examples(rng):
    w = random_unitary(2, rng)
    f = pauli_channel((0.1, 0.2, 0.3, 0.4))
    c = solve_c_matrix(f, np.eye(2) / 2, Conjugation.standard(2))
    via_c = reverser_kraus_via_c(f, c, w)
    for g, fk in zip(via_c, f.kraus):
        np.testing.assert_allclose(g, w @ q_map(np.eye(2) / 2, Conjugation.standard(2), fk) @ w.conj().T, atol=1e-12)
    same = reverser_kraus_via_c(KrausChannel([np.eye(2)]), np.eye(1), w)
    np.testing.assert_allclose(same[0], np.eye(2), atol=1e-12)
    with pytest.raises(ReversalError):
        reverser_kraus_via_c(f, np.eye(2), w)


def test_corollaries_on_time_symmetric_random_unitary_model(rng):
    spec = RandomUnitarySpec.random(3, 2, rng, real=True)
    w = random_unitary(3, rng)
    m = build_random_unitary_model(spec, w)
    assert check_corollary2(m).passed
    assert check_corollary3(m).passed
    ident = ReversalModel(u=np.eye(4), chi=np.eye(2)[0], sigma=np.eye(2) / 2, v=np.eye(4), chi_tilde=np.eye(2)[0])
    assert check_corollary3(ident).passed


def test_corollary3_preconditions(rng):
    spec = RandomUnitarySpec.random(2, 2, rng)  # complex H: not time-symmetric
    m = build_random_unitary_model(spec)
    with pytest.raises(ReversalError):
        check_corollary3(m)


def test_db_symmetrize_requires_invariant_sigma(rng):
    base = KrausChannel(random_kraus(2, 2, rng))
    sigma = steady_state(base).sigma
    with pytest.raises(ReversalError):
        db_symmetrize(base.kraus, sigma, Conjugation(random_unitary(2, rng)))


# -- properties --------------------------------------------------------------

@settings(max_examples=50)
@given(seeds, st.integers(2, 3), st.integers(1, 3), st.booleans())
def test_sqdb_forms_agree(seed, d, n, make_db):
    rng = np.random.default_rng(seed)
    if make_db:
        f, sigma, theta = random_db_channel(rng, d, n)
    else:
        f = KrausChannel(random_kraus(d, n, rng))
        sigma = steady_state(f).sigma
        theta = Conjugation(random_unitary(d, rng))
    a = check_sqdb_theta(f, sigma, theta)
    b = check_sqdb_direct(f, sigma, theta, n_max=3)
    assert a.passed == b.passed
    assert a.passed == make_db


@settings(max_examples=200)
@given(seeds, st.integers(1, 4))
def test_kms_inner_product_under_theta(seed, d):
    rng = np.random.default_rng(seed)
    theta = Conjugation(random_unitary(d, rng))
    sigma = random_density(d, rng)
    x, y = ginibre(d, d, rng), ginibre(d, d, rng)
    lhs = kms(sigma, theta_map(theta, x), theta_map(theta, y))
    assert np.isclose(lhs, kms(theta_map(theta, sigma), y, x), atol=1e-10)


@settings(max_examples=100)
@given(seeds, st.integers(2, 3), st.integers(1, 3))
def test_db_channels_have_valid_c(seed, d, n):
    rng = np.random.default_rng(seed)
    f, sigma, theta = random_db_channel(rng, d, n)
    c = solve_c_matrix(f, sigma, theta)
    assert c.partial_isometry_defect < 1e-8
    # Kraus family {Q f_k} rebuilds Theta F^Petz Theta, which equals F under detailed balance
    rebuilt = KrausChannel([q_map(sigma, theta, k) for k in f.kraus]).superop()
    assert map_distance(rebuilt, theta_conjugate(petz_map(f, sigma), theta)) < 1e-9
    assert map_distance(rebuilt, f.superop()) < 1e-9
    if c.linearly_independent:
        assert c.unitarity_defect < 1e-8
    w = random_unitary(d, rng)
    for a, b in zip(reverser_kraus_via_c(f, c, w), [w @ q_map(sigma, theta, k) @ w.conj().T for k in f.kraus]):
        np.testing.assert_allclose(a, b, atol=1e-9)


@settings(max_examples=50)
@given(seeds)
def test_corollary2_under_detailed_balance(seed):
    """A constructed reverser for a DB model reproduces W F W^-1."""
    rng = np.random.default_rng(seed)
    spec = RandomUnitarySpec.random(int(rng.integers(2, 4)), int(rng.integers(2, 4)), rng, real=True)
    base = build_random_unitary_model(spec, random_unitary(spec.d, rng))
    m = base.with_reverser(build_reverser_unitary(base, base.chi), base.chi)
    assert check_theorem1(m).passed
    assert check_corollary2(m).passed
    assert check_corollary3(m).passed


@settings(max_examples=50)
@given(seeds)
def test_corollary2_fails_without_detailed_balance(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng)
    m = m.with_reverser(build_reverser_unitary(m, m.chi), m.chi)
    assert not check_corollary2(m).passed
