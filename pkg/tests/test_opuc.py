import mpmath
import numpy as np
import pytest

from conftest import U_HALF_EXAMPLE, disk_grid, random_alphas
from jostlab.core import InputError, JacobiParameters, PoleError, RegionError, VerblunskyCoefficients
from jostlab.jacobi_gc import jost_u
from jostlab.opuc import (d_inverse, jost_from_d, q_from_b, q_series, r_eval, s_eval, s_series,
                          sz2_forward, sz2_inverse, szego_iterate)

DINV_HALF_EXAMPLE = 1.02971728369285


def test_szego_small():
    s = szego_iterate(VerblunskyCoefficients((0.0, 0.5)), 2)
    assert s[2].Phi.tolist() == [-0.5, 0.0, 1.0]
    assert s[2].PhiStar.tolist() == [1.0, 0.0, -0.5]
    assert s[2].kappa == pytest.approx(1 / np.sqrt(0.75))


def test_szego_reversal():
    al = VerblunskyCoefficients((0.3, -0.2, 0.1, 0.4))
    for st in szego_iterate(al, 4):
        assert np.allclose(st.PhiStar, st.Phi[::-1])


def test_szego_rejects():
    with pytest.raises(InputError):
        szego_iterate(VerblunskyCoefficients((0.1,)), -1)


def test_s_example(example_alpha):
    R = 2.0
    z = np.array([0.3, 0.9j, 1.5, 3 + 1j])
    exact = 1 - z * z / R / (1 - z * z / R ** 2)
    assert np.max(np.abs(s_eval(example_alpha, z) - exact)) < 1e-14
    c = s_series(example_alpha, 6, prec=128).coeffs
    assert [float(v) for v in c] == [1, 0, -0.5, 0, -0.125, 0, -0.03125]


def test_d_inverse_single():
    assert (d_inverse(VerblunskyCoefficients((0.5,)), z=0.0) ** 2).real == pytest.approx(4 / 3, rel=1e-15)


def test_d_inverse_free():
    assert np.allclose(d_inverse(VerblunskyCoefficients(()), z=disk_grid()), 1.0)


def test_d_inverse_example(example_alpha):
    assert d_inverse(example_alpha, z=0.5).real == pytest.approx(DINV_HALF_EXAMPLE, abs=1e-13)


def test_d_series_matches_pointwise(example_alpha):
    m = d_inverse(example_alpha, N=120)
    for z in (0.4, -0.8j, 1.2 + 0.3j):
        assert abs(complex(m(z)) - d_inverse(example_alpha, z=z)) < 1e-12


def test_d_inverse_arguments(example_alpha):
    with pytest.raises(InputError):
        d_inverse(example_alpha)
    with pytest.raises(InputError):
        d_inverse(example_alpha, z=0.1, N=4)


def test_bridge(example_alpha, example_J):
    # u of the Sz2 image is a constant multiple of D^-1
    z = disk_grid()
    assert np.max(np.abs(jost_from_d(example_alpha, z) - jost_u(example_J, z))) < 1e-13
    assert jost_from_d(example_alpha, 0.5).real == pytest.approx(U_HALF_EXAMPLE, abs=1e-14)


@pytest.mark.parametrize("alphas", random_alphas(), ids=lambda a: f"n{len(a.head)}")
def test_bridge_random(alphas):
    J = sz2_forward(alphas)
    z = disk_grid(0.95, 20)
    assert np.max(np.abs(jost_from_d(alphas, z) - jost_u(J, z))) < 1e-12


def test_sz2_example(example_J):
    r = example_J.realize(4, 200)
    assert [float(v) for v in r.a2m1] == [0.3125, 0.08984375, 0.023193359375, 0.0058441162109375]
    assert all(v == 0 for v in r.b)


def test_sz2_single():
    # alpha = (c,): a_1**2 = 1 - c**2... with alpha_1 = 0, b_1 = alpha_0
    J = sz2_forward(VerblunskyCoefficients((0.5,)))
    r = J.realize(2, 128)
    assert float(r.b[0]) == pytest.approx(0.5)
    assert float(r.a2m1[0]) == pytest.approx(0.0, abs=1e-30)


@pytest.mark.parametrize("alphas", random_alphas(), ids=lambda a: f"n{len(a.head)}")
def test_sz2_round_trip(alphas):
    back = sz2_inverse(sz2_forward(alphas))
    n = len(alphas.head)
    got = list(back.head) + [0] * max(0, n - len(back.head))
    assert max(abs(float(x) - float(y)) for x, y in zip(got, alphas.head)) < 1e-13


def test_sz2_inverse_methods():
    J = sz2_forward(VerblunskyCoefficients((0.2, -0.3, 0.1, 0.25)))
    a = sz2_inverse(J, method="backward")
    b = sz2_inverse(J, method="fixed_point", tol=1e-14)
    assert max(abs(float(x - y)) for x, y in zip(a.head, b.head)) < 1e-12
    with pytest.raises(InputError):
        sz2_inverse(J, method="newton")


def test_sz2_inverse_bound_state():
    with pytest.raises(InputError):
        sz2_inverse(JacobiParameters.from_lists(b=[2.5]))


def test_q_identity(example_alpha):
    q1 = q_series(example_alpha, 30, prec=200).coeffs
    q2 = q_from_b(example_alpha, 30, prec=200)
    assert max(abs(x - y) for x, y in zip(q1, q2)) < mpmath.mpf(2) ** -180


@pytest.mark.parametrize("alphas", random_alphas(4), ids=lambda a: f"n{len(a.head)}")
def test_q_identity_random(alphas):
    q1 = q_series(alphas, 20, prec=200).coeffs
    q2 = q_from_b(alphas, 20, prec=200)
    assert max(abs(x - y) for x, y in zip(q1, q2)) < mpmath.mpf(2) ** -180


def test_r_symmetry(example_alpha):
    for z in (0.7, 0.6 + 0.9j, -1.3):
        assert abs(r_eval(example_alpha, z) * r_eval(example_alpha, 1 / z) - 1) < 1e-13


def test_r_free():
    assert r_eval(VerblunskyCoefficients(()), 0.3 + 0.2j) == pytest.approx(1.0)


def test_r_needs_model(example_alpha):
    with pytest.raises(RegionError):
        r_eval(example_alpha, 0.3)
    r = r_eval(example_alpha, 0.3, d_model=d_inverse(example_alpha, N=200))
    assert np.isfinite(r)
