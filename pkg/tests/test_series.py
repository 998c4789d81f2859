import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmrg import CouplingVector, DomainError, LogDomainError
from qmrg.series import (gaussian_smear, jet_exp, jet_log1p, jet_multiply,
                         second_derivative_jet, to_taylor)

floats = st.floats(-2.0, 2.0, allow_nan=False)


def test_coupling_vector_invariants():
    with pytest.raises(DomainError):
        CouplingVector((0.0, 1.0, float("inf")))
    with pytest.raises(DomainError):
        CouplingVector((0.0, 1.0, 2.0), even=True)
    cv = CouplingVector((0.0, 0.0, 1.0, 0.0, 2.4))
    assert cv.order == 4 and cv[4] == 2.4


def test_to_taylor():
    assert np.allclose(to_taylor(CouplingVector((0, 0, 1, 0, 0))), [0, 0, 0.5, 0, 0])
    assert not np.any(to_taylor(CouplingVector.zero(4)))
    assert to_taylor(CouplingVector((0, 0, 0, 0, 2.4)))[4] == pytest.approx(0.1, rel=1e-15)


def test_second_derivative_jet():
    h = CouplingVector((0.0, 0.0, 3.0, 0.0, 0.0))
    assert np.allclose(second_derivative_jet(h), [3.0, 0.0, 0.0])
    q = CouplingVector((0.0, 0.0, 1.0, 0.0, 2.4))
    assert np.allclose(second_derivative_jet(q), [1.0, 0.0, 1.2])
    six = CouplingVector((0.1, 0.0, 1.0, 0.0, 2.0, 0.0, 7.0))
    j = second_derivative_jet(six)
    assert np.allclose(j, [1.0, 0.0, 2.0 / 2, 0.0, 7.0 / 24])
    assert np.count_nonzero(j) == 3
    with pytest.raises(DomainError):
        second_derivative_jet(CouplingVector((1.0, 2.0)))


def test_jet_multiply():
    assert np.allclose(jet_multiply([1, 1, 0], [1, -1, 0], 2), [1, 0, -1])
    assert not np.any(jet_multiply([1, 2, 3], [0, 0, 0], 2))


@settings(max_examples=50, deadline=None)
@given(st.lists(floats, min_size=7, max_size=7), st.lists(floats, min_size=7, max_size=7))
def test_jet_multiply_matches_polynomial_product(a, b):
    full = np.polynomial.polynomial.polymul(a, b)[:7]
    assert np.allclose(jet_multiply(a, b, 6), full, rtol=1e-13, atol=1e-13)


def test_jet_log1p_simple():
    assert np.allclose(jet_log1p([0.3, 0, 0], 2), [math.log1p(0.3), 0, 0])
    assert np.allclose(jet_log1p([0, 1, 0, 0], 3), [0, 1, -0.5, 1 / 3])


def test_jet_log1p_matches_partition_sum():
    # log(1 + c + d x^2) by hand, P = 1/(1+c):
    # x^2: d P ; x^4: -(d P)^2/2
    c, d = 0.7, 0.25
    P = 1 / (1 + c)
    got = jet_log1p([c, 0, d, 0, 0], 4)
    assert np.allclose(got, [math.log1p(c), 0, d * P, 0, -0.5 * (d * P) ** 2], rtol=1e-14)


def test_jet_log1p_domain_error():
    with pytest.raises(LogDomainError) as ei:
        jet_log1p([-1.5, 0, 1], 2)
    assert ei.value.u0 == -1.5
    assert "log-domain violation" in str(ei.value)


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.5, 0.5), st.lists(floats, min_size=10, max_size=10),
       st.integers(1, 10))
def test_log_exp_roundtrip(u0, rest, t):
    u = np.array([u0] + rest[:t])
    back = jet_exp(jet_log1p(u, t), t)
    target = u.copy()
    target[0] += 1.0
    assert np.allclose(back, target, rtol=1e-12, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.5, 0.5), st.lists(floats, min_size=5, max_size=5))
def test_parity_preserved(u0, rest):
    u = np.zeros(11)
    u[0] = u0
    u[2::2] = rest
    out = jet_log1p(u, 10)
    assert not np.any(out[1::2])
    assert not np.any(jet_multiply(u, u, 10)[1::2])
    assert not np.any(jet_exp(u, 10)[1::2])


def test_gaussian_smear_moments():
    s2, x0 = 0.37, 0.8
    x2 = CouplingVector((0.0, 0.0, 2.0))
    assert gaussian_smear(x2, s2, x0) == pytest.approx(x0 ** 2 + s2, rel=1e-14)
    x4 = CouplingVector((0.0, 0.0, 0.0, 0.0, 24.0))
    assert gaussian_smear(x4, s2, x0) == pytest.approx(
        x0 ** 4 + 6 * s2 * x0 ** 2 + 3 * s2 ** 2, rel=1e-14)


def test_gaussian_smear_vs_gauss_hermite():
    cv = CouplingVector((0.3, -0.2, 1.1, 0.4, 2.0, -0.7, 5.0))
    a2, x0 = 0.37, 0.8
    t, w = np.polynomial.hermite.hermgauss(64)
    ref = float(w @ cv(x0 + math.sqrt(2 * a2) * t)) / math.sqrt(math.pi)
    assert gaussian_smear(cv, a2, x0) == pytest.approx(ref, abs=1e-12)


def test_gaussian_smear_properties():
    cv = CouplingVector.anharmonic(2.4, 1.0, 1.0, 6)
    other = CouplingVector((0.0, 1.0, -0.5, 0.0, 0.0, 0.0, 3.0))
    for x0 in (-1.0, 0.0, 0.6):
        assert gaussian_smear(cv, 0.0, x0) == cv(x0)
        both = CouplingVector(tuple(np.add(cv.derivs, other.derivs)))
        assert gaussian_smear(both, 0.3, x0) == pytest.approx(
            gaussian_smear(cv, 0.3, x0) + gaussian_smear(other, 0.3, x0), rel=1e-13)
    for convex in (CouplingVector((0, 0, 2.0)), CouplingVector((0, 0, 0, 0, 24.0))):
        vals = [gaussian_smear(convex, a2, 0.3) for a2 in (0.0, 0.1, 0.5, 2.0)]
        assert all(np.diff(vals) > 0)
    with pytest.raises(DomainError):
        gaussian_smear(cv, -0.1, 0.0)
