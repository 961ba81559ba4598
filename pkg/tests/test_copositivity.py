import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sqc.cones import ConeSpec, contains
from sqc.copositivity import (
    CopositivityStatus,
    ZStatus,
    certify_copositive,
    complementary_pairs,
    lorentz_copositive,
    lorentz_j,
    maximize_s_lemma,
    s_lemma_floor,
    sampled_copositive,
    z_property_sampled,
)
from sqc.errors import UnsupportedConeError
from sqc.linalg import quad

from conftest import random_symmetric


def test_lorentz_j():
    np.testing.assert_array_equal(lorentz_j(3), np.diag([1.0, -1.0, -1.0]))


def test_s_lemma_floor_frozen():
    assert s_lemma_floor(np.diag([1.0, -1.0]), 0.0) == -1.0
    assert s_lemma_floor(np.diag([1.0, -1.0]), 1.0) == pytest.approx(0.0, abs=1e-15)
    assert s_lemma_floor(np.diag([1.0, -1.0]), 3.0) == pytest.approx(-2.0)


def test_maximize_s_lemma_on_j():
    rho, g, R = maximize_s_lemma(lorentz_j(4))
    assert rho == pytest.approx(1.0, abs=1e-8)
    assert g == pytest.approx(0.0, abs=1e-8)
    assert R == pytest.approx(2 * 2 + 1)


def test_maximize_s_lemma_endpoint_zero():
    rho, g, _ = maximize_s_lemma(np.eye(3))
    assert rho == 0.0 and g == 1.0


@settings(max_examples=50, deadline=None)
@given(arrays(float, (4, 4), elements=st.floats(-5, 5)), st.floats(0, 20), st.floats(0, 20),
       st.floats(0, 1))
def test_floor_is_concave(M, r1, r2, w):
    A = 0.5 * (M + M.T)
    mid = s_lemma_floor(A, w * r1 + (1 - w) * r2)
    assert mid >= w * s_lemma_floor(A, r1) + (1 - w) * s_lemma_floor(A, r2) - 1e-10


def test_lorentz_copositive_frozen():
    c = lorentz_copositive(lorentz_j(3))
    assert c.status is CopositivityStatus.COPOSITIVE and c.method == "s-lemma"
    assert c.rho == pytest.approx(1.0, abs=1e-6)
    c = lorentz_copositive(-np.eye(3))
    assert c.refuted and c.witness_value == pytest.approx(-1.0)
    c = lorentz_copositive(np.diag([1.0, -2.0, 0.0]))
    assert c.refuted
    assert c.witness_value == pytest.approx(-0.5, abs=1e-9)
    assert contains(ConeSpec.lorentz(3), c.witness)


def test_lorentz_copositive_negated_cone():
    # -L: quadratic forms are even so copositivity is unchanged
    A = np.diag([1.0, -2.0, 0.0])
    c = lorentz_copositive(A, cone=-ConeSpec.lorentz(3))
    assert c.refuted and contains(-ConeSpec.lorentz(3), c.witness)


def test_lorentz_witnesses_reverify(rng):
    K = ConeSpec.lorentz(5)
    for _ in range(40):
        A = random_symmetric(rng, 5)
        c = lorentz_copositive(A)
        if c.refuted:
            assert contains(K, c.witness)
            assert abs(np.linalg.norm(c.witness) - 1) < 1e-12
            assert quad(A, c.witness) == pytest.approx(c.witness_value) and c.witness_value < -1e-8
        if c.copositive:
            assert c.psd_floor >= -1e-8


def test_sampled_orthant():
    c = sampled_copositive(np.array([[1.0, -2.0], [-2.0, 1.0]]), ConeSpec.orthant(2))
    assert c.refuted and c.witness_value == pytest.approx(-1.0, abs=1e-9)
    np.testing.assert_allclose(c.witness, [2**-0.5, 2**-0.5], atol=1e-6)
    c = sampled_copositive(np.array([[0.0, 1.0], [1.0, 0.0]]), ConeSpec.orthant(2))
    assert c.status is CopositivityStatus.INCONCLUSIVE
    c = sampled_copositive(np.eye(2), ConeSpec.orthant(2))
    assert c.copositive and c.method == "psd"


def test_certify_elliptic():
    I = np.eye(3)
    E = ConeSpec.elliptic(I[0], I[1:], [4.0, 4.0])
    assert certify_copositive(np.diag([4.0, -1.0, -1.0]), E).copositive
    c = certify_copositive(np.diag([1.0, -16.0, -16.0]), E)
    assert c.refuted and contains(E, c.witness)
    assert quad(np.diag([1.0, -16.0, -16.0]), c.witness) < 0


def test_z_property_orthant_exact():
    z = z_property_sampled(np.array([[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]), ConeSpec.orthant(3))
    assert z.status is ZStatus.CONSISTENT and z.max_value == 0.0
    z = z_property_sampled(np.array([[1.0, 0.3], [0.3, 1.0]]), ConeSpec.orthant(2))
    assert z.status is ZStatus.VIOLATED and z.max_value == pytest.approx(0.3)


def test_z_property_lorentz_frozen():
    z = z_property_sampled(lorentz_j(3), ConeSpec.lorentz(3))
    assert z.status is ZStatus.VIOLATED and z.max_value == pytest.approx(1.0)
    z = z_property_sampled(-lorentz_j(3), ConeSpec.lorentz(3))
    assert z.status is ZStatus.CONSISTENT and z.max_value == pytest.approx(-1.0)
    # max <Ax, Jx> over x = (1, u)/sqrt2 is (a11 - lambda_min(A22)) / 2 for diagonal A
    z = z_property_sampled(np.diag([0.0, 1.0, 2.0]), ConeSpec.lorentz(3))
    assert z.max_value == pytest.approx(-0.5)


def test_complementary_pairs(rng):
    for K in (ConeSpec.orthant(4), ConeSpec.lorentz(4), -ConeSpec.lorentz(3)):
        X, Y = complementary_pairs(K, 100, rng)
        assert np.all(contains(K, X)) and np.all(contains(K, Y))
        np.testing.assert_allclose(np.sum(X * Y, axis=1), 0.0, atol=1e-14)
    with pytest.raises(UnsupportedConeError):
        complementary_pairs(ConeSpec.elliptic(np.eye(3)[0], np.eye(3)[1:], [2.0, 2.0]), 5, rng)
